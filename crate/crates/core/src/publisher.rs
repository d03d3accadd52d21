//! Turning an issued certificate into a zone entry.
//!
//! The steps are: read the subject and SubjectAltName, choose the owner
//! name, fill in the CERT fields (type PKIX, key tag over the
//! SubjectPublicKeyInfo, algorithm from the signature algorithm) and
//! carry the DER certificate as payload.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::cert::{Algorithm, CertError, CertRecordData, CertType};
use crate::consts::DEFAULT_TTL;
use crate::identity::{extract_identity, DerError, IdentitySummary};
use crate::keytag::compute_keytag;
use crate::name::{DomainName, NameError};
use crate::naming::{map_identity, NamingDecision, NamingError, NamingProfile};
use crate::zone::{ZoneEntry, ZoneError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PublishError {
    #[error("certificate: {0}")]
    Der(#[from] DerError),
    #[error("naming: {0}")]
    Naming(#[from] NamingError),
    #[error("{0} is on the deny list")]
    Denied(DomainName),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Zone(#[from] ZoneError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublishConfig {
    pub ttl: u32,
    pub profile: NamingProfile,
    /// Owner names whose subjects asked not to be published.
    pub deny: BTreeSet<DomainName>,
}

impl Default for PublishConfig {
    fn default() -> Self {
        PublishConfig { ttl: DEFAULT_TTL, profile: NamingProfile::Generic, deny: BTreeSet::new() }
    }
}

/// Everything learned while building an entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Publication {
    pub entry: ZoneEntry,
    pub decision: NamingDecision,
    pub identity: IdentitySummary,
}

const MD5_WITH_RSA: &str = "1.2.840.113549.1.1.4";
const SHA1_WITH_RSA: &str = "1.2.840.113549.1.1.5";
const SHA1_WITH_RSA_OIW: &str = "1.3.14.3.2.29";
const DSA_WITH_SHA1: &str = "1.2.840.10040.4.3";
const DSA_WITH_SHA224: &str = "2.16.840.1.101.3.4.3.1";
const DSA_WITH_SHA256: &str = "2.16.840.1.101.3.4.3.2";

/// CERT algorithm number for a certificate signature algorithm OID.
pub fn algorithm_for_signature(oid: &str) -> Algorithm {
    match oid {
        MD5_WITH_RSA => Algorithm::RSAMD5,
        SHA1_WITH_RSA | SHA1_WITH_RSA_OIW => Algorithm::RSASHA1,
        DSA_WITH_SHA1 | DSA_WITH_SHA224 | DSA_WITH_SHA256 => Algorithm::DSA,
        _ => Algorithm::UNSPECIFIED,
    }
}

pub fn prepare_entry(cert_der: &[u8], config: &PublishConfig) -> Result<Publication, PublishError> {
    let identity = extract_identity(cert_der)?;
    let decision = map_identity(&identity, config.profile)?;
    if config.deny.contains(&decision.owner) {
        return Err(PublishError::Denied(decision.owner));
    }
    let record = CertRecordData::new(
        CertType::PKIX,
        compute_keytag(&identity.spki_der),
        algorithm_for_signature(&identity.signature_algorithm),
        cert_der.to_vec(),
    )?;
    let entry = ZoneEntry::new(decision.owner.clone(), config.ttl, record)?;
    Ok(Publication { entry, decision, identity })
}

/// Builds the zone entry for one DER certificate.
pub fn build_entry(cert_der: &[u8], config: &PublishConfig) -> Result<ZoneEntry, PublishError> {
    prepare_entry(cert_der, config).map(|p| p.entry)
}

/// Parses a deny list: one owner name per line, `#` starts a comment.
pub fn parse_deny_list(text: &str) -> Result<BTreeSet<DomainName>, (usize, NameError)> {
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.insert(DomainName::parse(line).map_err(|e| (i + 1, e))?);
    }
    Ok(out)
}

/// Strips PEM armor when present; DER input is returned unchanged.
pub fn der_from_pem_or_der(input: &[u8]) -> Result<Vec<u8>, CertError> {
    use base64::Engine as _;
    const BEGIN: &str = "-----BEGIN CERTIFICATE-----";
    const END: &str = "-----END CERTIFICATE-----";
    let Ok(text) = core::str::from_utf8(input) else {
        return Ok(input.to_vec());
    };
    let Some(start) = text.find(BEGIN) else {
        return Ok(input.to_vec());
    };
    let body = &text[start + BEGIN.len()..];
    let end = body.find(END).ok_or(CertError::MissingField("PEM end line"))?;
    let b64: Vec<u8> = body[..end].bytes().filter(|b| !b.is_ascii_whitespace()).collect();
    base64::engine::general_purpose::STANDARD
        .decode(b64)
        .map_err(|e| CertError::InvalidBase64(alloc::string::ToString::to_string(&e)))
}
