//! CERT resource record data.
//!
//! Wire layout of the RDATA:
//!
//! ```text
//!  0                   1                   2                   3
//!  0 1 2 3 4 5 6 7 8 9 0 1 2 3 4 5 6 7 8 9 0 1 2 3 4 5 6 7 8 9 0 1
//! +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
//! |             type              |             key tag           |
//! +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
//! |   algorithm   |                                               /
//! +---------------+            certificate or CRL                 /
//! /                                                               /
//! +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
//! ```
//!
//! In master files the payload is base64 and may be split into
//! whitespace-separated chunks, usually inside parentheses.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use core::str::FromStr;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;

use crate::keytag::KeyTag;
use crate::name::DomainName;

/// Base64 characters per line when formatting.
pub const BASE64_LINE_WIDTH: usize = 64;

/// Fixed octets ahead of the payload.
pub const CERT_HEADER_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertError {
    #[error("certificate payload is empty")]
    EmptyPayload,
    #[error("CERT rdata of {0} octets is shorter than its 5-octet header")]
    ShortRdata(usize),
    #[error("unknown {kind} mnemonic `{text}`")]
    UnknownMnemonic { kind: &'static str, text: String },
    #[error("{field} value `{text}` out of range")]
    OutOfRange { field: &'static str, text: String },
    #[error("missing {0} field")]
    MissingField(&'static str),
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("invalid base64 payload: {0}")]
    InvalidBase64(String),
    #[error("owner name: {0}")]
    Owner(#[from] crate::name::NameError),
    #[error("expected `IN CERT`, found `{0}`")]
    NotCert(String),
}

/// Certificate format identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CertType(pub u16);

impl CertType {
    pub const PKIX: CertType = CertType(1);
    pub const SPKI: CertType = CertType(2);
    pub const PGP: CertType = CertType(3);

    pub fn mnemonic(self) -> Option<&'static str> {
        match self.0 {
            1 => Some("PKIX"),
            2 => Some("SPKI"),
            3 => Some("PGP"),
            _ => None,
        }
    }
}

impl fmt::Display for CertType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mnemonic() {
            Some(m) => f.write_str(m),
            None => write!(f, "{}", self.0),
        }
    }
}

impl FromStr for CertType {
    type Err = CertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.bytes().all(|b| b.is_ascii_digit()) && !s.is_empty() {
            return s.parse::<u16>().map(CertType).map_err(|_| CertError::OutOfRange {
                field: "certificate type",
                text: s.to_string(),
            });
        }
        match s.to_ascii_uppercase().as_str() {
            "PKIX" => Ok(CertType::PKIX),
            "SPKI" => Ok(CertType::SPKI),
            "PGP" => Ok(CertType::PGP),
            _ => Err(CertError::UnknownMnemonic { kind: "certificate type", text: s.to_string() }),
        }
    }
}

/// Public-key algorithm number, shared with DNSSEC KEY/SIG records.
/// Zero means the algorithm has no DNSSEC number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Algorithm(pub u8);

impl Algorithm {
    pub const UNSPECIFIED: Algorithm = Algorithm(0);
    pub const RSAMD5: Algorithm = Algorithm(1);
    pub const DH: Algorithm = Algorithm(2);
    pub const DSA: Algorithm = Algorithm(3);
    pub const ECC: Algorithm = Algorithm(4);
    pub const RSASHA1: Algorithm = Algorithm(5);

    pub fn mnemonic(self) -> Option<&'static str> {
        match self.0 {
            1 => Some("RSAMD5"),
            2 => Some("DH"),
            3 => Some("DSA"),
            4 => Some("ECC"),
            5 => Some("RSASHA1"),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mnemonic() {
            Some(m) => f.write_str(m),
            None => write!(f, "{}", self.0),
        }
    }
}

impl FromStr for Algorithm {
    type Err = CertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.bytes().all(|b| b.is_ascii_digit()) && !s.is_empty() {
            return s.parse::<u8>().map(Algorithm).map_err(|_| CertError::OutOfRange {
                field: "algorithm",
                text: s.to_string(),
            });
        }
        match s.to_ascii_uppercase().as_str() {
            "RSAMD5" => Ok(Algorithm::RSAMD5),
            "DH" => Ok(Algorithm::DH),
            "DSA" => Ok(Algorithm::DSA),
            "ECC" => Ok(Algorithm::ECC),
            "RSASHA1" => Ok(Algorithm::RSASHA1),
            _ => Err(CertError::UnknownMnemonic { kind: "algorithm", text: s.to_string() }),
        }
    }
}

/// The RDATA of a CERT record.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CertRecordData {
    pub cert_type: CertType,
    pub key_tag: KeyTag,
    pub algorithm: Algorithm,
    pub payload: Vec<u8>,
}

impl CertRecordData {
    pub fn new(
        cert_type: CertType,
        key_tag: KeyTag,
        algorithm: Algorithm,
        payload: Vec<u8>,
    ) -> Result<Self, CertError> {
        if payload.is_empty() {
            return Err(CertError::EmptyPayload);
        }
        Ok(CertRecordData { cert_type, key_tag, algorithm, payload })
    }

    pub fn encoded_len(&self) -> usize {
        CERT_HEADER_LEN + self.payload.len()
    }

    /// Encodes the RDATA in network byte order.
    pub fn encode(&self) -> Result<Vec<u8>, CertError> {
        if self.payload.is_empty() {
            return Err(CertError::EmptyPayload);
        }
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.cert_type.0.to_be_bytes());
        out.extend_from_slice(&self.key_tag.0.to_be_bytes());
        out.push(self.algorithm.0);
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    pub fn decode(rdata: &[u8]) -> Result<Self, CertError> {
        if rdata.len() < CERT_HEADER_LEN {
            return Err(CertError::ShortRdata(rdata.len()));
        }
        CertRecordData::new(
            CertType(u16::from_be_bytes([rdata[0], rdata[1]])),
            KeyTag(u16::from_be_bytes([rdata[2], rdata[3]])),
            Algorithm(rdata[4]),
            rdata[CERT_HEADER_LEN..].to_vec(),
        )
    }

    /// Parses the presentation form of the RDATA: type, key tag,
    /// algorithm, then the base64 payload split by any whitespace and
    /// optionally wrapped in parentheses.
    pub fn parse_presentation(text: &str) -> Result<Self, CertError> {
        let mut depth = 0usize;
        let mut cleaned = String::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '(' => {
                    depth += 1;
                    cleaned.push(' ');
                }
                ')' => {
                    depth = depth.checked_sub(1).ok_or(CertError::UnbalancedParens)?;
                    cleaned.push(' ');
                }
                c => cleaned.push(c),
            }
        }
        if depth != 0 {
            return Err(CertError::UnbalancedParens);
        }
        let mut fields = cleaned.split_whitespace();
        let cert_type: CertType = fields.next().ok_or(CertError::MissingField("type"))?.parse()?;
        let tag_text = fields.next().ok_or(CertError::MissingField("key tag"))?;
        let key_tag = tag_text
            .parse::<u16>()
            .map(KeyTag)
            .map_err(|_| CertError::OutOfRange { field: "key tag", text: tag_text.to_string() })?;
        let algorithm: Algorithm =
            fields.next().ok_or(CertError::MissingField("algorithm"))?.parse()?;
        let b64: String = fields.collect();
        if b64.is_empty() {
            return Err(CertError::MissingField("certificate"));
        }
        let payload = STANDARD
            .decode(b64.as_bytes())
            .map_err(|e| CertError::InvalidBase64(e.to_string()))?;
        CertRecordData::new(cert_type, key_tag, algorithm, payload)
    }

    /// The RDATA presentation: `TYPE TAG ALG (` then base64 lines and `)`.
    pub fn to_presentation(&self) -> String {
        let mut out = String::new();
        write!(out, "{} {} {} (", self.cert_type, self.key_tag, self.algorithm).unwrap();
        let b64 = STANDARD.encode(&self.payload);
        for chunk in b64.as_bytes().chunks(BASE64_LINE_WIDTH) {
            out.push_str("\n\t");
            // base64 output is ASCII
            out.push_str(core::str::from_utf8(chunk).unwrap());
        }
        out.push_str(" )");
        out
    }
}

/// Renders a complete single-record master-file entry:
/// `owner ttl IN CERT type tag alg ( base64... )`.
pub fn format_cert_presentation(owner: &DomainName, ttl: u32, data: &CertRecordData) -> String {
    alloc::format!("{} {} IN CERT {}", owner, ttl, data.to_presentation())
}

/// Parses the RDATA part of a CERT presentation line.
pub fn parse_cert_presentation(text: &str) -> Result<CertRecordData, CertError> {
    CertRecordData::parse_presentation(text)
}

/// Parses a full line as written by [`format_cert_presentation`]. The
/// owner is taken as absolute.
pub fn parse_cert_line(text: &str) -> Result<(DomainName, u32, CertRecordData), CertError> {
    let text = text.trim_start();
    let mut fields = text.splitn(5, |c: char| c.is_ascii_whitespace());
    let owner = fields.next().filter(|s| !s.is_empty()).ok_or(CertError::MissingField("owner"))?;
    let ttl = fields.next().ok_or(CertError::MissingField("ttl"))?;
    let ttl = ttl.parse().map_err(|_| CertError::OutOfRange { field: "ttl", text: ttl.to_string() })?;
    let class = fields.next().unwrap_or("");
    let rr_type = fields.next().unwrap_or("");
    if !class.eq_ignore_ascii_case("IN") || !rr_type.eq_ignore_ascii_case("CERT") {
        return Err(CertError::NotCert(alloc::format!("{} {}", class, rr_type)));
    }
    let rdata = fields.next().ok_or(CertError::MissingField("rdata"))?;
    Ok((DomainName::parse(owner)?, ttl, CertRecordData::parse_presentation(rdata)?))
}
