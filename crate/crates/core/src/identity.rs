//! Extraction of the naming-relevant fields of an X.509 certificate.
//!
//! Only the parts of the structure the repository needs are interpreted:
//!
//! ```text
//! Certificate  ::=  SEQUENCE  {
//!      tbsCertificate       TBSCertificate,
//!      signatureAlgorithm   AlgorithmIdentifier,
//!      signatureValue       BIT STRING  }
//!
//! TBSCertificate  ::=  SEQUENCE  {
//!      version         [0]  EXPLICIT Version DEFAULT v1,
//!      serialNumber         CertificateSerialNumber,
//!      signature            AlgorithmIdentifier,
//!      issuer               Name,
//!      validity             Validity,
//!      subject              Name,                      <- captured
//!      subjectPublicKeyInfo SubjectPublicKeyInfo,      <- captured verbatim
//!      issuerUniqueID  [1]  IMPLICIT UniqueIdentifier OPTIONAL,
//!      subjectUniqueID [2]  IMPLICIT UniqueIdentifier OPTIONAL,
//!      extensions      [3]  EXPLICIT Extensions OPTIONAL }  <- SAN only
//! ```
//!
//! Nothing is verified: signatures, validity dates and the issuer are
//! the relying party's business.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::net::{IpAddr, Ipv4Addr, Ipv6Addr};

use crate::der::{self, DerReader, Tlv};

pub const OID_CN: &str = "2.5.4.3";
pub const OID_C: &str = "2.5.4.6";
pub const OID_O: &str = "2.5.4.10";
pub const OID_OU: &str = "2.5.4.11";
pub const OID_DC: &str = "0.9.2342.19200300.100.1.25";
pub const OID_EMAIL: &str = "1.2.840.113549.1.9.1";
pub const OID_SUBJECT_ALT_NAME: &str = "2.5.29.17";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DerError {
    #[error("input ends early (offset {0})")]
    Truncated(usize),
    #[error("indefinite length at offset {0}")]
    IndefiniteLength(usize),
    #[error("non-canonical or oversized length at offset {0}")]
    BadLength(usize),
    #[error("unsupported tag 0x{tag:02x} at offset {offset}")]
    UnsupportedTag { offset: usize, tag: u8 },
    #[error("expected tag 0x{expected:02x} at offset {offset}, found 0x{found:02x}")]
    UnexpectedTag { offset: usize, expected: u8, found: u8 },
    #[error("unexpected data at offset {0}")]
    TrailingData(usize),
    #[error("malformed object identifier")]
    BadOid,
    #[error("input is not an X.509 certificate")]
    NotACertificate,
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("subject attribute {attribute} uses unsupported string type 0x{tag:02x}")]
    UnsupportedEncoding { attribute: String, tag: u8 },
    #[error("invalid characters in {0}")]
    BadString(&'static str),
    #[error("iPAddress entry of {0} octets")]
    BadIpAddress(usize),
    #[error("duplicate subjectAltName extension")]
    DuplicateSan,
}

/// One attribute of the subject distinguished name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DnAttribute {
    /// Attribute type in dotted-decimal form.
    pub oid: String,
    pub value: String,
}

impl DnAttribute {
    pub fn new(oid: &str, value: &str) -> Self {
        DnAttribute { oid: oid.to_string(), value: value.to_string() }
    }

    pub fn short_name(&self) -> Option<&'static str> {
        short_name(&self.oid)
    }
}

impl fmt::Display for DnAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.short_name() {
            Some(n) => write!(f, "{}={}", n, self.value),
            None => write!(f, "{}={}", self.oid, self.value),
        }
    }
}

pub fn short_name(oid: &str) -> Option<&'static str> {
    match oid {
        OID_CN => Some("CN"),
        OID_O => Some("O"),
        OID_OU => Some("OU"),
        OID_C => Some("C"),
        OID_DC => Some("DC"),
        OID_EMAIL => Some("emailAddress"),
        _ => None,
    }
}

/// The GeneralName kinds the naming rules use.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SanEntry {
    Rfc822Name(String),
    DnsName(String),
    Uri(String),
    IpAddress(IpAddr),
}

impl fmt::Display for SanEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SanEntry::Rfc822Name(s) => write!(f, "email:{}", s),
            SanEntry::DnsName(s) => write!(f, "DNS:{}", s),
            SanEntry::Uri(s) => write!(f, "URI:{}", s),
            SanEntry::IpAddress(ip) => write!(f, "IP:{}", ip),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IdentitySummary {
    /// 1, 2 or 3.
    pub version: u8,
    /// Subject attributes in certificate (most general first) order.
    pub subject_dn: Vec<DnAttribute>,
    /// Supported SubjectAltName entries in certificate order.
    pub san_entries: Vec<SanEntry>,
    /// The complete DER SubjectPublicKeyInfo.
    pub spki_der: Vec<u8>,
    /// Outer signature algorithm OID, dotted decimal.
    pub signature_algorithm: String,
    pub der_size: usize,
    /// Set for pre-v3 certificates, which cannot carry a SubjectAltName.
    pub legacy_version: bool,
}

impl IdentitySummary {
    /// Subject DN in the usual string order (most specific first).
    pub fn subject_string(&self) -> String {
        let parts: Vec<String> = self.subject_dn.iter().rev().map(|a| a.to_string()).collect();
        parts.join(", ")
    }

    pub fn subject_values<'a>(&'a self, oid: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.subject_dn.iter().filter(move |a| a.oid == oid).map(|a| a.value.as_str())
    }
}

fn ascii_string(value: &[u8], what: &'static str) -> Result<String, DerError> {
    if value.is_ascii() {
        Ok(value.iter().map(|&b| b as char).collect())
    } else {
        Err(DerError::BadString(what))
    }
}

fn read_oid(r: &mut DerReader<'_>) -> Result<String, DerError> {
    der::oid_to_string(r.expect(der::TAG_OID)?.value)
}

fn parse_name(mut name: DerReader<'_>) -> Result<Vec<DnAttribute>, DerError> {
    let mut out = Vec::new();
    while !name.is_empty() {
        let mut rdn = name.nested(der::TAG_SET)?;
        while !rdn.is_empty() {
            let mut atv = rdn.nested(der::TAG_SEQUENCE)?;
            let oid = read_oid(&mut atv)?;
            let Tlv { tag, value, .. } = atv.read()?;
            atv.finish()?;
            let value = match tag {
                // UTF8String
                0x0C => core::str::from_utf8(value)
                    .map_err(|_| DerError::BadString("UTF8String"))?
                    .to_string(),
                // PrintableString
                0x13 => ascii_string(value, "PrintableString")?,
                // IA5String
                0x16 => ascii_string(value, "IA5String")?,
                _ => {
                    let attribute = short_name(&oid).map(str::to_string).unwrap_or(oid);
                    return Err(DerError::UnsupportedEncoding { attribute, tag });
                }
            };
            out.push(DnAttribute { oid, value });
        }
    }
    Ok(out)
}

fn parse_general_names(mut names: DerReader<'_>) -> Result<Vec<SanEntry>, DerError> {
    let mut out = Vec::new();
    while !names.is_empty() {
        let Tlv { tag, value, .. } = names.read()?;
        let entry = match tag {
            0x81 => SanEntry::Rfc822Name(ascii_string(value, "rfc822Name")?),
            0x82 => SanEntry::DnsName(ascii_string(value, "dNSName")?),
            0x86 => SanEntry::Uri(ascii_string(value, "uniformResourceIdentifier")?),
            0x87 => match value.len() {
                4 => SanEntry::IpAddress(IpAddr::V4(Ipv4Addr::new(value[0], value[1], value[2], value[3]))),
                16 => {
                    let mut octets = [0u8; 16];
                    octets.copy_from_slice(value);
                    SanEntry::IpAddress(IpAddr::V6(Ipv6Addr::from(octets)))
                }
                n => return Err(DerError::BadIpAddress(n)),
            },
            // otherName, x400Address, directoryName, ediPartyName, registeredID
            _ => continue,
        };
        out.push(entry);
    }
    Ok(out)
}

/// Walks a DER certificate and returns its identity summary.
pub fn extract_identity(cert_der: &[u8]) -> Result<IdentitySummary, DerError> {
    let mut outer = DerReader::new(cert_der);
    if outer.peek_tag().is_some_and(|t| t != der::TAG_SEQUENCE) {
        return Err(DerError::NotACertificate);
    }
    let mut cert = outer.nested(der::TAG_SEQUENCE)?;
    outer.finish()?;
    if cert.peek_tag() != Some(der::TAG_SEQUENCE) {
        return Err(DerError::NotACertificate);
    }
    let mut tbs = cert.nested(der::TAG_SEQUENCE)?;
    let signature_algorithm = read_oid(&mut cert.nested(der::TAG_SEQUENCE)?)?;
    cert.expect(der::TAG_BIT_STRING)?;
    cert.finish()?;

    let version = match tbs.optional(0xA0)? {
        Some(v) => {
            let mut inner = DerReader::new(v.value);
            let int = inner.expect(der::TAG_INTEGER)?;
            inner.finish()?;
            match int.value {
                [v @ 0..=2] => v + 1,
                [v, ..] => return Err(DerError::BadVersion(*v)),
                [] => return Err(DerError::BadVersion(0)),
            }
        }
        None => 1,
    };
    tbs.expect(der::TAG_INTEGER)?; // serial
    tbs.expect(der::TAG_SEQUENCE)?; // signature
    tbs.expect(der::TAG_SEQUENCE)?; // issuer
    tbs.expect(der::TAG_SEQUENCE)?; // validity
    let subject_dn = parse_name(tbs.nested(der::TAG_SEQUENCE)?)?;
    let spki = tbs.expect(der::TAG_SEQUENCE)?;
    tbs.optional(0x81)?;
    tbs.optional(0x82)?;

    let mut san_entries = Vec::new();
    let mut seen_san = false;
    if tbs.peek_tag() == Some(0xA3) {
        let mut wrapper = tbs.nested(0xA3)?;
        let mut extensions = wrapper.nested(der::TAG_SEQUENCE)?;
        wrapper.finish()?;
        while !extensions.is_empty() {
            let mut ext = extensions.nested(der::TAG_SEQUENCE)?;
            let oid = read_oid(&mut ext)?;
            ext.optional(der::TAG_BOOLEAN)?;
            let value = ext.expect(der::TAG_OCTET_STRING)?;
            ext.finish()?;
            if oid == OID_SUBJECT_ALT_NAME {
                if seen_san {
                    return Err(DerError::DuplicateSan);
                }
                seen_san = true;
                let mut inner = DerReader::new(value.value);
                san_entries = parse_general_names(inner.nested(der::TAG_SEQUENCE)?)?;
                inner.finish()?;
            }
        }
    }
    tbs.finish()?;

    Ok(IdentitySummary {
        version,
        subject_dn,
        legacy_version: version != 3 && !seen_san,
        san_entries,
        spki_der: spki.raw.to_vec(),
        signature_algorithm,
        der_size: cert_der.len(),
    })
}
