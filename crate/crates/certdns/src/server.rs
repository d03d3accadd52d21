//! Authoritative UDP/TCP server for one zone file.
//!
//! One thread answers UDP datagrams, one accepts TCP connections and
//! hands each to its own thread, and one polls the zone file. Requests
//! read an `Arc<Zone>` snapshot; a reload swaps in a new snapshot, so an
//! in-flight request always sees one consistent zone version.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, UdpSocket};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::{self, JoinHandle};
use std::time::{Duration, SystemTime};

use certdns_core::responder::{Responder, Transport};
use certdns_core::Zone;
use log::{debug, info, warn};

use crate::store::{load_zone, StoreError};

const POLL: Duration = Duration::from_millis(50);
const TCP_IDLE: Duration = Duration::from_secs(10);

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub zone_path: PathBuf,
    /// Cap on UDP response size; raised to 512 when lower.
    pub max_udp_payload: u16,
    pub reload_interval: Duration,
}

impl ServerConfig {
    pub fn new(listen: SocketAddr, zone_path: impl Into<PathBuf>) -> Self {
        ServerConfig {
            listen,
            zone_path: zone_path.into(),
            max_udp_payload: certdns_core::consts::DEFAULT_EDNS_PAYLOAD,
            reload_interval: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error(transparent)]
    Zone(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Counters for what the server has seen.
#[derive(Debug, Default)]
pub struct Stats {
    pub udp_received: AtomicU64,
    pub udp_sent: AtomicU64,
    pub tcp_connections: AtomicU64,
    pub tcp_messages: AtomicU64,
    pub reloads: AtomicU64,
}

struct Shared {
    zone: RwLock<Arc<Zone>>,
    responder: Responder,
    stop: AtomicBool,
    stats: Stats,
}

impl Shared {
    fn snapshot(&self) -> Arc<Zone> {
        self.zone.read().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

/// A running server. Dropping the handle stops it.
pub struct ServerHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    threads: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    /// The bound address, shared by the UDP and TCP sockets.
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stats(&self) -> &Stats {
        &self.shared.stats
    }

    /// Serial of the zone currently served.
    pub fn serial(&self) -> u32 {
        self.shared.snapshot().serial()
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    /// Blocks until the server stops, which only happens on `stop`.
    pub fn wait(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    fn shutdown(&mut self) {
        self.shared.stop.store(true, Ordering::SeqCst);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Binds UDP and TCP on one address. With port 0 the UDP port is chosen
/// first and TCP follows it, retrying if that port is taken for TCP.
fn bind(addr: SocketAddr) -> Result<(UdpSocket, TcpListener), ServerError> {
    let attempts = if addr.port() == 0 { 20 } else { 1 };
    let mut last = None;
    for _ in 0..attempts {
        let udp = UdpSocket::bind(addr).map_err(|source| ServerError::Bind { addr, source })?;
        let bound = udp.local_addr()?;
        match TcpListener::bind(bound) {
            Ok(tcp) => return Ok((udp, tcp)),
            Err(source) => last = Some(ServerError::Bind { addr: bound, source }),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Loads the zone, binds the sockets and starts serving in background
/// threads.
pub fn spawn(config: ServerConfig) -> Result<ServerHandle, ServerError> {
    let zone = load_zone(&config.zone_path)?;
    let (udp, tcp) = bind(config.listen)?;
    let addr = udp.local_addr()?;
    udp.set_read_timeout(Some(POLL))?;
    tcp.set_nonblocking(true)?;
    info!("serving {} (serial {}) on {}", zone.origin(), zone.serial(), addr);

    let shared = Arc::new(Shared {
        zone: RwLock::new(Arc::new(zone)),
        responder: Responder::new(config.max_udp_payload),
        stop: AtomicBool::new(false),
        stats: Stats::default(),
    });
    let mut threads = Vec::new();
    let s = shared.clone();
    threads.push(thread::Builder::new().name("udp".into()).spawn(move || udp_loop(udp, &s))?);
    let s = shared.clone();
    threads.push(thread::Builder::new().name("tcp".into()).spawn(move || tcp_loop(tcp, s))?);
    let s = shared.clone();
    threads.push(thread::Builder::new().name("reload".into()).spawn(move || reload_loop(&config, &s))?);
    Ok(ServerHandle { addr, shared, threads })
}

/// Runs the server until the process ends.
pub fn serve(config: ServerConfig) -> Result<(), ServerError> {
    spawn(config)?.wait();
    Ok(())
}

fn udp_loop(sock: UdpSocket, shared: &Shared) {
    let mut buf = vec![0u8; 65535];
    while !shared.stop.load(Ordering::Relaxed) {
        let (n, peer) = match sock.recv_from(&mut buf) {
            Ok(r) => r,
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
            Err(e) => {
                // ICMP errors from earlier sends surface here on some systems
                debug!("udp receive: {}", e);
                continue;
            }
        };
        shared.stats.udp_received.fetch_add(1, Ordering::Relaxed);
        let zone = shared.snapshot();
        let Some(resp) = shared.responder.respond(&buf[..n], &zone, Transport::Udp) else {
            debug!("dropped {} octets from {}", n, peer);
            continue;
        };
        match sock.send_to(&resp, peer) {
            Ok(_) => {
                shared.stats.udp_sent.fetch_add(1, Ordering::Relaxed);
            }
            Err(e) => debug!("udp send to {}: {}", peer, e),
        }
    }
}

fn tcp_loop(listener: TcpListener, shared: Arc<Shared>) {
    let mut workers: Vec<JoinHandle<()>> = Vec::new();
    while !shared.stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, peer)) => {
                shared.stats.tcp_connections.fetch_add(1, Ordering::Relaxed);
                let s = shared.clone();
                let spawned = thread::Builder::new().name("tcp-conn".into()).spawn(move || {
                    if let Err(e) = tcp_connection(stream, &s) {
                        debug!("tcp {}: {}", peer, e);
                    }
                });
                match spawned {
                    Ok(h) => workers.push(h),
                    Err(e) => warn!("cannot start connection thread: {}", e),
                }
                workers.retain(|h| !h.is_finished());
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(5)),
            Err(e) => {
                debug!("accept: {}", e);
                thread::sleep(Duration::from_millis(5));
            }
        }
    }
    for h in workers {
        let _ = h.join();
    }
}

fn tcp_connection(mut stream: TcpStream, shared: &Shared) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(POLL))?;
    stream.set_nodelay(true)?;
    let mut idle = Duration::ZERO;
    loop {
        let mut len = [0u8; 2];
        // wait for the next message, watching for shutdown
        match read_full(&mut stream, &mut len[..1], shared) {
            Ok(true) => idle = Duration::ZERO,
            Ok(false) => return Ok(()),
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                idle += POLL;
                if idle >= TCP_IDLE {
                    return Ok(());
                }
                continue;
            }
            Err(e) => return Err(e),
        }
        if !read_full(&mut stream, &mut len[1..], shared)? {
            return Ok(());
        }
        let mut msg = vec![0u8; usize::from(u16::from_be_bytes(len))];
        if !read_full(&mut stream, &mut msg, shared)? {
            return Ok(());
        }
        shared.stats.tcp_messages.fetch_add(1, Ordering::Relaxed);
        let zone = shared.snapshot();
        let Some(resp) = shared.responder.respond(&msg, &zone, Transport::Tcp) else {
            continue;
        };
        let Ok(n) = u16::try_from(resp.len()) else {
            warn!("response of {} octets does not fit TCP framing", resp.len());
            return Ok(());
        };
        let mut framed = Vec::with_capacity(resp.len() + 2);
        framed.extend_from_slice(&n.to_be_bytes());
        framed.extend_from_slice(&resp);
        stream.write_all(&framed)?;
    }
}

/// Fills `buf`. Returns `Ok(false)` on a clean end of stream before any
/// octet was read or when the server is stopping.
fn read_full(stream: &mut TcpStream, buf: &mut [u8], shared: &Shared) -> io::Result<bool> {
    let mut filled = 0;
    let mut waited = Duration::ZERO;
    while filled < buf.len() {
        if shared.stop.load(Ordering::Relaxed) {
            return Ok(false);
        }
        match stream.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(io::ErrorKind::UnexpectedEof.into()),
            Ok(n) => filled += n,
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                if filled == 0 {
                    return Err(e);
                }
                waited += POLL;
                if waited >= TCP_IDLE {
                    return Err(e);
                }
            }
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

fn file_stamp(path: &std::path::Path) -> Option<(SystemTime, u64)> {
    let meta = std::fs::metadata(path).ok()?;
    Some((meta.modified().ok()?, meta.len()))
}

fn reload_loop(config: &ServerConfig, shared: &Shared) {
    let mut stamp = file_stamp(&config.zone_path);
    let mut since_check = Duration::ZERO;
    while !shared.stop.load(Ordering::Relaxed) {
        thread::sleep(POLL.min(config.reload_interval));
        since_check += POLL.min(config.reload_interval);
        if since_check < config.reload_interval {
            continue;
        }
        since_check = Duration::ZERO;
        let now = file_stamp(&config.zone_path);
        if now == stamp {
            continue;
        }
        stamp = now;
        match load_zone(&config.zone_path) {
            Ok(zone) => {
                let current = shared.snapshot().serial();
                if zone.serial() == current {
                    debug!("zone file changed but serial {} did not", current);
                    continue;
                }
                info!("reloaded {}: serial {} -> {}", zone.origin(), current, zone.serial());
                *shared.zone.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(zone);
                shared.stats.reloads.fetch_add(1, Ordering::Relaxed);
            }
            Err(e) => warn!("keeping current zone: {}", e),
        }
    }
}
