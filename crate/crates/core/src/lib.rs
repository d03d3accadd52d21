//! Core of a DNS-hosted certificate repository.
//!
//! This crate holds everything that does not touch a socket or a file:
//!
//! * [`wire`]: DNS message encoding and decoding, including the EDNS0 OPT
//!   pseudo-record.
//! * [`cert`]: CERT resource record data, in wire and master-file form.
//! * [`keytag`]: the two-octet key tag used to tell certificates at one
//!   owner name apart.
//! * [`identity`]: a small DER walker pulling the naming-relevant fields
//!   out of an X.509 certificate.
//! * [`naming`]: the rules that pick the owner name for a certificate.
//! * [`zone`]: zone entries, the zone model and the master-file format.
//! * [`responder`]: the authoritative answer logic, independent of the
//!   transport that carries it.
//!
//! The crate is `no_std` with `alloc`; the `std` feature (on by default)
//! only adds `std::error::Error` implementations.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cert;
mod der;
pub mod identity;
pub mod keytag;
pub mod name;
pub mod naming;
pub mod publisher;
pub mod responder;
pub mod wire;
pub mod zone;

pub use cert::{Algorithm, CertRecordData, CertType};
pub use identity::{extract_identity, IdentitySummary, SanEntry};
pub use keytag::{compute_keytag, KeyTag};
pub use name::DomainName;
pub use naming::{map_identity, NamingDecision, NamingProfile};
pub use wire::{DnsMessage, ResourceRecord};
pub use zone::{Zone, ZoneEntry};

/// Well-known RR type and class codes.
pub mod consts {
    pub const TYPE_NS: u16 = 2;
    pub const TYPE_CNAME: u16 = 5;
    pub const TYPE_SOA: u16 = 6;
    pub const TYPE_PTR: u16 = 12;
    pub const TYPE_MX: u16 = 15;
    pub const TYPE_CERT: u16 = 37;
    pub const TYPE_OPT: u16 = 41;
    pub const TYPE_ANY: u16 = 255;

    pub const CLASS_IN: u16 = 1;

    /// Classic UDP message ceiling, used whenever the client does not
    /// advertise a larger size through EDNS0.
    pub const CLASSIC_UDP_LIMIT: u16 = 512;

    /// Default EDNS0 advertised payload size.
    pub const DEFAULT_EDNS_PAYLOAD: u16 = 4096;

    /// TTL used for published records unless overridden.
    pub const DEFAULT_TTL: u32 = 86400;
}
