#![allow(dead_code)]

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use certdns::resolver::{NetTransport, Transport};
use certdns::server::{spawn, ServerConfig, ServerHandle};
use certdns::store::save_zone;
use certdns_core::publisher::{build_entry, PublishConfig};
use certdns_core::{Zone, ZoneEntry};

pub fn fixture(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e))
}

pub fn entry(cert: &str) -> ZoneEntry {
    build_entry(&fixture(cert), &PublishConfig::default()).unwrap()
}

pub fn zone_with(certs: &[&str]) -> Zone {
    let mut zone = Zone::new("polito.it".parse().unwrap()).unwrap();
    for c in certs {
        zone.upsert(entry(c)).unwrap();
    }
    zone
}

pub struct TestServer {
    pub dir: tempfile::TempDir,
    pub zone_path: PathBuf,
    pub handle: ServerHandle,
}

impl TestServer {
    pub fn start(zone: &Zone) -> TestServer {
        Self::start_with(zone, |_| {})
    }

    pub fn start_with(zone: &Zone, tweak: impl FnOnce(&mut ServerConfig)) -> TestServer {
        let dir = tempfile::tempdir().unwrap();
        let zone_path = dir.path().join("polito.it.zone");
        save_zone(&zone_path, zone).unwrap();
        let mut config = ServerConfig::new("127.0.0.1:0".parse().unwrap(), &zone_path);
        tweak(&mut config);
        let handle = spawn(config).unwrap();
        TestServer { dir, zone_path, handle }
    }

    pub fn addr(&self) -> SocketAddr {
        self.handle.local_addr()
    }
}

/// Real sockets, with every exchange recorded.
#[derive(Default)]
pub struct CountingTransport {
    inner: NetTransport,
    pub udp_sent: Vec<usize>,
    pub udp_received: Vec<Vec<u8>>,
    pub tcp_exchanges: Vec<(usize, usize)>,
}

impl Transport for CountingTransport {
    fn send_udp(&mut self, server: SocketAddr, msg: &[u8]) -> io::Result<()> {
        self.udp_sent.push(msg.len());
        self.inner.send_udp(server, msg)
    }

    fn recv_udp(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>> {
        let r = self.inner.recv_udp(timeout)?;
        if let Some(b) = &r {
            self.udp_received.push(b.clone());
        }
        Ok(r)
    }

    fn tcp_exchange(&mut self, server: SocketAddr, msg: &[u8], timeout: Duration) -> io::Result<Vec<u8>> {
        let r = self.inner.tcp_exchange(server, msg, timeout)?;
        self.tcp_exchanges.push((msg.len(), r.len()));
        Ok(r)
    }
}
