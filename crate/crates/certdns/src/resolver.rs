//! Certificate lookup client.
//!
//! A lookup sends one CERT query to one server. Over UDP a truncated
//! answer is retried over TCP with the same question; with
//! [`TransportPolicy::TcpOnly`] UDP is never touched. Socket access sits
//! behind [`Transport`] and time behind [`Clock`] so tests can count
//! datagrams and run timeouts without waiting.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpStream, UdpSocket};
use std::time::{Duration, Instant};

use certdns_core::consts::{DEFAULT_EDNS_PAYLOAD, TYPE_CERT};
use certdns_core::naming::{translate_email, NamingError};
use certdns_core::wire::{peek_header, Edns, Rcode};
use certdns_core::{CertRecordData, CertType, DnsMessage, DomainName, KeyTag};
use log::debug;
use rand::Rng;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(3);
pub const DEFAULT_UDP_RETRIES: u32 = 2;

pub trait Transport {
    fn send_udp(&mut self, server: SocketAddr, msg: &[u8]) -> io::Result<()>;
    /// Next datagram from the server of the last `send_udp`, or `None`
    /// once `timeout` has passed.
    fn recv_udp(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>>;
    /// One length-prefixed TCP request/response exchange.
    fn tcp_exchange(&mut self, server: SocketAddr, msg: &[u8], timeout: Duration) -> io::Result<Vec<u8>>;
}

pub trait Clock {
    fn now(&self) -> Instant;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Instant {
        Instant::now()
    }
}

/// Real sockets. The UDP socket is created on first use.
#[derive(Debug, Default)]
pub struct NetTransport {
    udp: Option<UdpSocket>,
    peer: Option<SocketAddr>,
}

impl NetTransport {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Transport for NetTransport {
    fn send_udp(&mut self, server: SocketAddr, msg: &[u8]) -> io::Result<()> {
        let wrong_family = self.udp.as_ref().and_then(|s| s.local_addr().ok()).is_some_and(|a| a.is_ipv4() != server.is_ipv4());
        if self.udp.is_none() || wrong_family {
            let any: SocketAddr = if server.is_ipv4() { "0.0.0.0:0" } else { "[::]:0" }.parse().unwrap();
            self.udp = Some(UdpSocket::bind(any)?);
        }
        self.peer = Some(server);
        self.udp.as_ref().unwrap().send_to(msg, server)?;
        Ok(())
    }

    fn recv_udp(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>> {
        let (Some(sock), Some(peer)) = (&self.udp, self.peer) else {
            return Ok(None);
        };
        let deadline = Instant::now() + timeout;
        let mut buf = vec![0u8; 65535];
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Ok(None);
            }
            sock.set_read_timeout(Some(left))?;
            match sock.recv_from(&mut buf) {
                Ok((n, from)) if from == peer => return Ok(Some(buf[..n].to_vec())),
                Ok((_, from)) => debug!("ignoring datagram from {}", from),
                Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => return Ok(None),
                // port unreachable from an earlier send
                Err(e) if e.kind() == io::ErrorKind::ConnectionRefused => {}
                Err(e) => return Err(e),
            }
        }
    }

    fn tcp_exchange(&mut self, server: SocketAddr, msg: &[u8], timeout: Duration) -> io::Result<Vec<u8>> {
        let len = u16::try_from(msg.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "query too long"))?;
        let mut stream = TcpStream::connect_timeout(&server, timeout)?;
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        stream.set_nodelay(true)?;
        let mut framed = Vec::with_capacity(msg.len() + 2);
        framed.extend_from_slice(&len.to_be_bytes());
        framed.extend_from_slice(msg);
        stream.write_all(&framed)?;
        let mut len = [0u8; 2];
        stream.read_exact(&mut len)?;
        let mut resp = vec![0u8; usize::from(u16::from_be_bytes(len))];
        stream.read_exact(&mut resp)?;
        Ok(resp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Email(String),
    Host(DomainName),
    RawName(DomainName),
}

impl Target {
    /// `user@domain` is an e-mail address, anything else a host name.
    pub fn parse(text: &str) -> Result<Target, LookupError> {
        if text.contains('@') {
            Ok(Target::Email(text.to_string()))
        } else {
            let name = text.parse().map_err(|e| LookupError::BadTarget(NamingError::Name(e)))?;
            Ok(Target::Host(name))
        }
    }
}

pub fn resolve_target(target: &Target) -> Result<DomainName, LookupError> {
    match target {
        Target::Email(addr) => translate_email(addr).map_err(LookupError::BadTarget),
        Target::Host(n) | Target::RawName(n) => Ok(n.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportPolicy {
    #[default]
    UdpThenTcp,
    TcpOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportUsed {
    Udp,
    Tcp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupRequest {
    pub target: Target,
    pub server: SocketAddr,
    /// Advertised EDNS0 payload size; `None` sends no OPT record.
    pub edns_payload: Option<u16>,
    pub policy: TransportPolicy,
    pub key_tag: Option<KeyTag>,
    pub cert_type: Option<CertType>,
}

impl LookupRequest {
    pub fn new(target: Target, server: SocketAddr) -> Self {
        LookupRequest {
            target,
            server,
            edns_payload: Some(DEFAULT_EDNS_PAYLOAD),
            policy: TransportPolicy::UdpThenTcp,
            key_tag: None,
            cert_type: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupResult {
    pub owner: DomainName,
    pub records: Vec<CertRecordData>,
    pub transport_used: TransportUsed,
    pub retried_over_tcp: bool,
    /// Size of the response message the records came from.
    pub message_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotFound {
    NxDomain,
    NoData,
}

#[derive(Debug, thiserror::Error)]
pub enum LookupError {
    #[error("bad target: {0}")]
    BadTarget(NamingError),
    #[error("EDNS0 payload size {0} is below 512")]
    EdnsTooSmall(u16),
    #[error("no response within the timeout")]
    Timeout,
    #[error("name not found ({0:?})")]
    NotFound(NotFound),
    #[error("server answered {0}")]
    ServerError(Rcode),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub struct Resolver<T = NetTransport, C = SystemClock> {
    transport: T,
    clock: C,
    pub timeout: Duration,
    pub udp_retries: u32,
}

impl Resolver {
    pub fn new() -> Self {
        Resolver::with_parts(NetTransport::new(), SystemClock)
    }
}

impl Default for Resolver {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Transport, C: Clock> Resolver<T, C> {
    pub fn with_parts(transport: T, clock: C) -> Self {
        Resolver { transport, clock, timeout: DEFAULT_TIMEOUT, udp_retries: DEFAULT_UDP_RETRIES }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn transport_mut(&mut self) -> &mut T {
        &mut self.transport
    }

    pub fn lookup(&mut self, req: &LookupRequest) -> Result<LookupResult, LookupError> {
        if let Some(n) = req.edns_payload.filter(|&n| n < 512) {
            return Err(LookupError::EdnsTooSmall(n));
        }
        let owner = resolve_target(&req.target)?;
        let id: u16 = rand::rng().random();
        let mut query = DnsMessage::query(id, owner.clone(), TYPE_CERT, req.edns_payload.map(|s| Edns { udp_payload_size: s }));
        query.flags.recursion_desired = false;
        let wire = query.encode().map_err(|e| LookupError::Malformed(e.to_string()))?;

        let (resp, size, used, retried) = match req.policy {
            TransportPolicy::TcpOnly => {
                let (m, n) = self.tcp(req.server, &wire, &query)?;
                (m, n, TransportUsed::Tcp, false)
            }
            TransportPolicy::UdpThenTcp => {
                let (m, n) = self.udp(req.server, &wire, &query)?;
                if m.flags.truncated {
                    debug!("truncated UDP answer ({} octets), retrying over TCP", n);
                    let (m, n) = self.tcp(req.server, &wire, &query)?;
                    (m, n, TransportUsed::Tcp, true)
                } else {
                    (m, n, TransportUsed::Udp, false)
                }
            }
        };

        match resp.flags.rcode {
            Rcode::NOERROR => {}
            Rcode::NXDOMAIN => return Err(LookupError::NotFound(NotFound::NxDomain)),
            rcode => return Err(LookupError::ServerError(rcode)),
        }
        let mut records = Vec::new();
        for rr in resp.answers.iter().filter(|rr| rr.owner == owner) {
            let Some(data) = rr.cert_data() else { continue };
            let data = data.map_err(|e| LookupError::Malformed(e.to_string()))?;
            if req.key_tag.is_some_and(|t| t != data.key_tag) || req.cert_type.is_some_and(|t| t != data.cert_type) {
                continue;
            }
            records.push(data);
        }
        if records.is_empty() {
            return Err(LookupError::NotFound(NotFound::NoData));
        }
        Ok(LookupResult { owner, records, transport_used: used, retried_over_tcp: retried, message_size: size })
    }

    /// Sends the query over UDP, resending after each silent timeout.
    fn udp(&mut self, server: SocketAddr, wire: &[u8], query: &DnsMessage) -> Result<(DnsMessage, usize), LookupError> {
        for attempt in 0..=self.udp_retries {
            if attempt > 0 {
                debug!("no answer from {}, attempt {}", server, attempt + 1);
            }
            self.transport.send_udp(server, wire)?;
            let deadline = self.clock.now() + self.timeout;
            loop {
                let left = deadline.saturating_duration_since(self.clock.now());
                if left.is_zero() {
                    break;
                }
                let Some(bytes) = self.transport.recv_udp(left)? else { break };
                if let Some(m) = accept(&bytes, query)? {
                    return Ok((m, bytes.len()));
                }
            }
        }
        Err(LookupError::Timeout)
    }

    fn tcp(&mut self, server: SocketAddr, wire: &[u8], query: &DnsMessage) -> Result<(DnsMessage, usize), LookupError> {
        let bytes = match self.transport.tcp_exchange(server, wire, self.timeout) {
            Ok(b) => b,
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                return Err(LookupError::Timeout)
            }
            Err(e) => return Err(e.into()),
        };
        match accept(&bytes, query)? {
            Some(m) => Ok((m, bytes.len())),
            None => Err(LookupError::Malformed("TCP response does not match the query".into())),
        }
    }
}

/// `Some` for a response to `query`, `None` for anything to be ignored
/// (other ids, other questions, non-responses).
fn accept(bytes: &[u8], query: &DnsMessage) -> Result<Option<DnsMessage>, LookupError> {
    match DnsMessage::decode(bytes) {
        Ok(m) if m.id == query.id && m.flags.response && m.question == query.question => Ok(Some(m)),
        // FORMERR and similar replies may omit the question
        Ok(m) if m.id == query.id && m.flags.response && m.question.is_none() && m.flags.rcode != Rcode::NOERROR => {
            Ok(Some(m))
        }
        Ok(m) => {
            debug!("discarding response with id {} (expected {})", m.id, query.id);
            Ok(None)
        }
        Err(e) => match peek_header(bytes) {
            Some((id, flags)) if id == query.id && flags.response => Err(LookupError::Malformed(e.to_string())),
            _ => Ok(None),
        },
    }
}

/// Resolves `target` (an e-mail address or host name) and returns the
/// certificate payloads found there.
pub fn fetch_certificate<T: Transport, C: Clock>(
    resolver: &mut Resolver<T, C>,
    target: &str,
    template: &LookupRequest,
) -> Result<Vec<Vec<u8>>, LookupError> {
    let req = LookupRequest { target: Target::parse(target)?, ..template.clone() };
    let result = resolver.lookup(&req)?;
    Ok(result.records.into_iter().map(|r| r.payload).collect())
}
