//! DNS message wire format.
//!
//! ```text
//!     +---------------------+
//!     |        Header       |
//!     +---------------------+
//!     |       Question      |
//!     +---------------------+
//!     |        Answer       |
//!     +---------------------+
//!     |      Authority      |
//!     +---------------------+
//!     |      Additional     |  (OPT pseudo-record lives here)
//!     +---------------------+
//! ```
//!
//! The encoder compresses exactly one thing: answer owner names equal to
//! the question name become a pointer to offset 12. The decoder follows
//! any chain of backward pointers.

use alloc::vec::Vec;
use core::fmt;

use crate::cert::{CertError, CertRecordData};
use crate::consts::*;
use crate::name::{DomainName, NameError, MAX_NAME_LEN};

pub const HEADER_LEN: usize = 12;

/// Offset of the question name in every message that has one.
const QUESTION_NAME_OFFSET: u16 = HEADER_LEN as u16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("message truncated at offset {0}")]
    Truncated(usize),
    #[error("unsupported label type 0x{0:02x}")]
    BadLabelType(u8),
    #[error("compression pointer at offset {0} does not point backwards")]
    CompressionLoop(usize),
    #[error("name exceeds 255 octets")]
    NameTooLong,
    #[error("rdata of {0} octets exceeds 65535")]
    RdataTooLong(usize),
    #[error("{0} records do not fit a 16-bit section count")]
    SectionOverflow(usize),
    #[error("{0} questions; exactly zero or one supported")]
    MultipleQuestions(u16),
    #[error("OPT record outside the additional section or with a non-root owner")]
    MisplacedOpt,
    #[error("more than one OPT record")]
    DuplicateOpt,
    #[error("{0} octets follow the last section")]
    TrailingData(usize),
    #[error("rdata does not match its declared length")]
    RdataMismatch,
    #[error("message of {0} octets exceeds 65535")]
    MessageTooLong(usize),
    #[error(transparent)]
    Name(#[from] NameError),
}

/// Response code (low four bits).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rcode(pub u8);

impl Rcode {
    pub const NOERROR: Rcode = Rcode(0);
    pub const FORMERR: Rcode = Rcode(1);
    pub const SERVFAIL: Rcode = Rcode(2);
    pub const NXDOMAIN: Rcode = Rcode(3);
    pub const NOTIMP: Rcode = Rcode(4);
    pub const REFUSED: Rcode = Rcode(5);
}

impl fmt::Debug for Rcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("NOERROR"),
            1 => f.write_str("FORMERR"),
            2 => f.write_str("SERVFAIL"),
            3 => f.write_str("NXDOMAIN"),
            4 => f.write_str("NOTIMP"),
            5 => f.write_str("REFUSED"),
            n => write!(f, "RCODE{}", n),
        }
    }
}

/// Header flag bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Flags {
    pub response: bool,
    /// Four-bit opcode; 0 is a standard query.
    pub opcode: u8,
    pub authoritative: bool,
    pub truncated: bool,
    pub recursion_desired: bool,
    pub recursion_available: bool,
    pub rcode: Rcode,
}

impl Flags {
    fn to_bits(self) -> u16 {
        (self.response as u16) << 15
            | u16::from(self.opcode & 0x0F) << 11
            | (self.authoritative as u16) << 10
            | (self.truncated as u16) << 9
            | (self.recursion_desired as u16) << 8
            | (self.recursion_available as u16) << 7
            | u16::from(self.rcode.0 & 0x0F)
    }

    fn from_bits(bits: u16) -> Self {
        Flags {
            response: bits & 0x8000 != 0,
            opcode: ((bits >> 11) & 0x0F) as u8,
            authoritative: bits & 0x0400 != 0,
            truncated: bits & 0x0200 != 0,
            recursion_desired: bits & 0x0100 != 0,
            recursion_available: bits & 0x0080 != 0,
            rcode: Rcode((bits & 0x0F) as u8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Question {
    pub name: DomainName,
    pub qtype: u16,
    pub qclass: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResourceRecord {
    pub owner: DomainName,
    pub ttl: u32,
    pub class: u16,
    pub rr_type: u16,
    /// Uncompressed rdata. Names embedded in NS, CNAME, PTR, MX and SOA
    /// rdata are expanded on decode; other types are carried opaquely.
    pub rdata: Vec<u8>,
}

impl ResourceRecord {
    pub fn cert(owner: DomainName, ttl: u32, data: &CertRecordData) -> Result<Self, CertError> {
        Ok(ResourceRecord { owner, ttl, class: CLASS_IN, rr_type: TYPE_CERT, rdata: data.encode()? })
    }

    /// Decodes the rdata as CERT data; `None` when this is not a CERT record.
    pub fn cert_data(&self) -> Option<Result<CertRecordData, CertError>> {
        (self.rr_type == TYPE_CERT).then(|| CertRecordData::decode(&self.rdata))
    }
}

/// EDNS0 parameters carried by the OPT pseudo-record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edns {
    /// Largest UDP payload the sender can reassemble.
    pub udp_payload_size: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DnsMessage {
    pub id: u16,
    pub flags: Flags,
    pub question: Option<Question>,
    pub answers: Vec<ResourceRecord>,
    pub authority: Vec<ResourceRecord>,
    /// Additional records other than OPT, which is kept in `edns`.
    pub additional: Vec<ResourceRecord>,
    pub edns: Option<Edns>,
}

impl DnsMessage {
    /// A standard query with recursion desired.
    pub fn query(id: u16, name: DomainName, qtype: u16, edns: Option<Edns>) -> Self {
        DnsMessage {
            id,
            flags: Flags { recursion_desired: true, ..Flags::default() },
            question: Some(Question { name, qtype, qclass: CLASS_IN }),
            edns,
            ..DnsMessage::default()
        }
    }

    /// Empty response skeleton echoing id, opcode, RD and the question.
    pub fn response_to(query: &DnsMessage) -> Self {
        DnsMessage {
            id: query.id,
            flags: Flags {
                response: true,
                opcode: query.flags.opcode,
                recursion_desired: query.flags.recursion_desired,
                ..Flags::default()
            },
            question: query.question.clone(),
            ..DnsMessage::default()
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        encode_message(self)
    }

    pub fn decode(wire: &[u8]) -> Result<Self, WireError> {
        decode_message(wire)
    }
}

fn count(n: usize) -> Result<u16, WireError> {
    u16::try_from(n).map_err(|_| WireError::SectionOverflow(n))
}

fn write_record(out: &mut Vec<u8>, rr: &ResourceRecord, pointer: Option<u16>) -> Result<(), WireError> {
    if rr.rr_type == TYPE_OPT {
        return Err(WireError::DuplicateOpt);
    }
    let rdlen = u16::try_from(rr.rdata.len()).map_err(|_| WireError::RdataTooLong(rr.rdata.len()))?;
    match pointer {
        Some(offset) => out.extend_from_slice(&(0xC000 | offset).to_be_bytes()),
        None => rr.owner.write_wire(out),
    }
    out.extend_from_slice(&rr.rr_type.to_be_bytes());
    out.extend_from_slice(&rr.class.to_be_bytes());
    out.extend_from_slice(&rr.ttl.to_be_bytes());
    out.extend_from_slice(&rdlen.to_be_bytes());
    out.extend_from_slice(&rr.rdata);
    Ok(())
}

/// Encodes a message. Output is a pure function of the message.
pub fn encode_message(msg: &DnsMessage) -> Result<Vec<u8>, WireError> {
    let qdcount = u16::from(msg.question.is_some());
    let ancount = count(msg.answers.len())?;
    let nscount = count(msg.authority.len())?;
    let arcount = count(msg.additional.len() + usize::from(msg.edns.is_some()))?;

    let mut out = Vec::with_capacity(512);
    out.extend_from_slice(&msg.id.to_be_bytes());
    out.extend_from_slice(&msg.flags.to_bits().to_be_bytes());
    for c in [qdcount, ancount, nscount, arcount] {
        out.extend_from_slice(&c.to_be_bytes());
    }
    if let Some(q) = &msg.question {
        q.name.write_wire(&mut out);
        out.extend_from_slice(&q.qtype.to_be_bytes());
        out.extend_from_slice(&q.qclass.to_be_bytes());
    }
    let qname = msg.question.as_ref().map(|q| &q.name);
    for rr in &msg.answers {
        let pointer = (Some(&rr.owner) == qname).then_some(QUESTION_NAME_OFFSET);
        write_record(&mut out, rr, pointer)?;
    }
    for rr in msg.authority.iter().chain(&msg.additional) {
        write_record(&mut out, rr, None)?;
    }
    if let Some(edns) = msg.edns {
        // root owner, type OPT, class = payload size, ttl = 0 (ext rcode,
        // version 0, no flags), empty rdata
        out.push(0);
        out.extend_from_slice(&TYPE_OPT.to_be_bytes());
        out.extend_from_slice(&edns.udp_payload_size.to_be_bytes());
        out.extend_from_slice(&[0, 0, 0, 0, 0, 0]);
    }
    if out.len() > usize::from(u16::MAX) {
        return Err(WireError::MessageTooLong(out.len()));
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or(WireError::Truncated(self.pos))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    /// Reads a possibly compressed name starting at the cursor. Labels may
    /// not extend past `self.buf`; pointers must point strictly backwards,
    /// which rules out cycles.
    fn name(&mut self) -> Result<DomainName, WireError> {
        let mut labels: Vec<&[u8]> = Vec::new();
        let mut pos = self.pos;
        let mut resume = None;
        let mut wire_len = 1;
        loop {
            let len = *self.buf.get(pos).ok_or(WireError::Truncated(pos))?;
            match len & 0xC0 {
                0x00 if len == 0 => {
                    pos += 1;
                    break;
                }
                0x00 => {
                    let start = pos + 1;
                    let end = start + usize::from(len);
                    let label = self.buf.get(start..end).ok_or(WireError::Truncated(start))?;
                    wire_len += label.len() + 1;
                    if wire_len > MAX_NAME_LEN {
                        return Err(WireError::NameTooLong);
                    }
                    labels.push(label);
                    pos = end;
                }
                0xC0 => {
                    let low = *self.buf.get(pos + 1).ok_or(WireError::Truncated(pos + 1))?;
                    let target = usize::from(len & 0x3F) << 8 | usize::from(low);
                    if target >= pos {
                        return Err(WireError::CompressionLoop(pos));
                    }
                    resume.get_or_insert(pos + 2);
                    pos = target;
                }
                _ => return Err(WireError::BadLabelType(len)),
            }
        }
        self.pos = resume.unwrap_or(pos);
        Ok(DomainName::from_labels(labels)?)
    }

    fn record(&mut self) -> Result<ResourceRecord, WireError> {
        let owner = self.name()?;
        let rr_type = self.u16()?;
        let class = self.u16()?;
        let ttl = self.u32()?;
        let rdlen = usize::from(self.u16()?);
        let start = self.pos;
        let end = start + rdlen;
        if end > self.buf.len() {
            return Err(WireError::Truncated(start));
        }
        let rdata = match rr_type {
            TYPE_NS | TYPE_CNAME | TYPE_PTR | TYPE_MX | TYPE_SOA => {
                let mut sub = Reader { buf: &self.buf[..end], pos: start };
                let mut rdata = Vec::with_capacity(rdlen);
                if rr_type == TYPE_MX {
                    rdata.extend_from_slice(sub.take(2)?);
                }
                sub.name()?.write_wire(&mut rdata);
                if rr_type == TYPE_SOA {
                    sub.name()?.write_wire(&mut rdata);
                    rdata.extend_from_slice(sub.take(20)?);
                }
                if sub.pos != end {
                    return Err(WireError::RdataMismatch);
                }
                rdata
            }
            _ => self.buf[start..end].to_vec(),
        };
        self.pos = end;
        Ok(ResourceRecord { owner, ttl, class, rr_type, rdata })
    }
}

/// Decodes a complete message. The OPT pseudo-record, if any, is lifted
/// out of the additional section into [`DnsMessage::edns`].
pub fn decode_message(wire: &[u8]) -> Result<DnsMessage, WireError> {
    let mut r = Reader { buf: wire, pos: 0 };
    let id = r.u16()?;
    let flags = Flags::from_bits(r.u16()?);
    let qdcount = r.u16()?;
    let ancount = r.u16()?;
    let nscount = r.u16()?;
    let arcount = r.u16()?;
    if qdcount > 1 {
        return Err(WireError::MultipleQuestions(qdcount));
    }
    let question = if qdcount == 1 {
        let name = r.name()?;
        let qtype = r.u16()?;
        let qclass = r.u16()?;
        Some(Question { name, qtype, qclass })
    } else {
        None
    };

    let mut section = |n: u16, opt_allowed: bool, edns: &mut Option<Edns>| {
        let mut out = Vec::new();
        for _ in 0..n {
            let rr = r.record()?;
            if rr.rr_type != TYPE_OPT {
                out.push(rr);
            } else if !opt_allowed || !rr.owner.is_root() {
                return Err(WireError::MisplacedOpt);
            } else if edns.is_some() {
                return Err(WireError::DuplicateOpt);
            } else {
                *edns = Some(Edns { udp_payload_size: rr.class });
            }
        }
        Ok(out)
    };
    let mut edns = None;
    let answers = section(ancount, false, &mut edns)?;
    let authority = section(nscount, false, &mut edns)?;
    let additional = section(arcount, true, &mut edns)?;

    if r.pos != wire.len() {
        return Err(WireError::TrailingData(wire.len() - r.pos));
    }
    Ok(DnsMessage { id, flags, question, answers, authority, additional, edns })
}

/// Reads just the id and flags, for answering messages that fail to decode.
pub fn peek_header(wire: &[u8]) -> Option<(u16, Flags)> {
    if wire.len() < HEADER_LEN {
        return None;
    }
    Some((u16::from_be_bytes([wire[0], wire[1]]), Flags::from_bits(u16::from_be_bytes([wire[2], wire[3]]))))
}
