//! Authoritative answers for the certificate zone.
//!
//! Over UDP the response must fit `min(client size, server cap)`, where the
//! client size is its EDNS0 advertised payload or 512 without EDNS0. A
//! response that does not fit is replaced by a truncated one with no
//! records at all, which sends the client to TCP. TCP responses are never
//! truncated.

use alloc::vec::Vec;

use crate::consts::*;
use crate::wire::{peek_header, DnsMessage, Edns, Flags, Rcode};
use crate::zone::Zone;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transport {
    Udp,
    Tcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Responder {
    /// Largest UDP response the server is willing to send; at least 512.
    pub max_udp_payload: u16,
}

impl Default for Responder {
    fn default() -> Self {
        Responder { max_udp_payload: DEFAULT_EDNS_PAYLOAD }
    }
}

impl Responder {
    pub fn new(max_udp_payload: u16) -> Self {
        Responder { max_udp_payload: max_udp_payload.max(CLASSIC_UDP_LIMIT) }
    }

    /// The size a UDP response to `query` may have.
    pub fn udp_budget(&self, query: &DnsMessage) -> usize {
        let client = query.edns.map_or(CLASSIC_UDP_LIMIT, |e| e.udp_payload_size.max(CLASSIC_UDP_LIMIT));
        usize::from(client.min(self.max_udp_payload))
    }

    /// The complete response, before any size budget is applied.
    fn full_answer(&self, query: &DnsMessage, zone: &Zone) -> DnsMessage {
        let mut resp = DnsMessage::response_to(query);
        if query.edns.is_some() {
            resp.edns = Some(Edns { udp_payload_size: self.max_udp_payload });
        }
        let Some(q) = &query.question else {
            resp.flags.rcode = Rcode::FORMERR;
            return resp;
        };
        if query.flags.opcode != 0 {
            resp.flags.rcode = Rcode::NOTIMP;
            return resp;
        }
        if q.qclass != CLASS_IN && q.qclass != TYPE_ANY {
            resp.flags.rcode = Rcode::REFUSED;
            return resp;
        }
        resp.flags.authoritative = true;
        if !zone.contains_name(&q.name) {
            resp.flags.rcode = Rcode::NXDOMAIN;
            return resp;
        }
        if matches!(q.qtype, TYPE_CERT | TYPE_ANY) {
            for entry in zone.entries_at(&q.name) {
                // entries hold validated, non-empty payloads
                if let Ok(rr) = entry.to_record() {
                    resp.answers.push(rr);
                }
            }
        }
        if matches!(q.qtype, TYPE_SOA | TYPE_ANY) && q.name == *zone.origin() {
            resp.answers.push(zone.soa_record());
        }
        if resp.answers.is_empty() {
            resp.authority.push(zone.soa_record());
        }
        resp
    }

    /// Answers `query` from `zone` and encodes the result for `transport`.
    pub fn answer_wire(&self, query: &DnsMessage, zone: &Zone, transport: Transport) -> Vec<u8> {
        let full = self.full_answer(query, zone);
        let wire = match full.encode() {
            Ok(w) => w,
            Err(_) => return servfail(query),
        };
        if transport == Transport::Udp && wire.len() > self.udp_budget(query) {
            let mut truncated = full;
            truncated.answers.clear();
            truncated.authority.clear();
            truncated.additional.clear();
            truncated.flags.truncated = true;
            return truncated.encode().unwrap_or_else(|_| servfail(query));
        }
        wire
    }

    /// Like [`Responder::answer_wire`] but returns the message.
    pub fn answer(&self, query: &DnsMessage, zone: &Zone, transport: Transport) -> DnsMessage {
        let wire = self.answer_wire(query, zone, transport);
        DnsMessage::decode(&wire).expect("responder output decodes")
    }

    /// Handles raw query octets. Returns `None` when nothing should be sent:
    /// unreadable headers and messages that are themselves responses.
    pub fn respond(&self, wire: &[u8], zone: &Zone, transport: Transport) -> Option<Vec<u8>> {
        match DnsMessage::decode(wire) {
            Ok(query) if query.flags.response => None,
            Ok(query) => Some(self.answer_wire(&query, zone, transport)),
            Err(_) => {
                let (id, flags) = peek_header(wire)?;
                if flags.response {
                    return None;
                }
                let resp = DnsMessage {
                    id,
                    flags: Flags {
                        response: true,
                        opcode: flags.opcode,
                        recursion_desired: flags.recursion_desired,
                        rcode: Rcode::FORMERR,
                        ..Flags::default()
                    },
                    ..DnsMessage::default()
                };
                resp.encode().ok()
            }
        }
    }
}

fn servfail(query: &DnsMessage) -> Vec<u8> {
    let mut resp = DnsMessage::response_to(query);
    resp.flags.rcode = Rcode::SERVFAIL;
    // a lone question always encodes
    resp.encode().unwrap_or_default()
}

/// Answers one query for `zone` with a UDP budget of `transport_budget`
/// octets, or without truncation when it is `None`.
pub fn answer(query: &DnsMessage, zone: &Zone, transport_budget: Option<u16>) -> DnsMessage {
    match transport_budget {
        Some(cap) => Responder::new(cap).answer(query, zone, Transport::Udp),
        None => Responder::default().answer(query, zone, Transport::Tcp),
    }
}
