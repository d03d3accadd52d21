//! Choosing the owner name of a certificate's CERT record.
//!
//! Candidate names are tried in this order of rules:
//!
//! 1. a domain name identifying the subject;
//! 2. an IP address, as its inverse (`in-addr.arpa` / `ip6.arpa`) name;
//! 3. the host of a URI;
//! 4. an e-mail address, with `@` turned into a label separator;
//! 5. the `DC` components of the subject distinguished name.
//!
//! Under [`NamingProfile::Generic`] the subject is searched first (a CN
//! that is a multi-label host name for rule 1, an `emailAddress`
//! attribute for rule 4), then the SubjectAltName extension for rules 1
//! to 4, and the DN mapping of rule 5 is the last resort.
//!
//! [`NamingProfile::Polito`] reads names from SubjectAltName only: server
//! certificates (with a dNSName) are stored under that name, personal
//! certificates (rfc822Name, no dNSName) under the translated address.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::net::{IpAddr, Ipv4Addr, Ipv6Addr};
use core::str::FromStr;

use crate::identity::{DnAttribute, IdentitySummary, SanEntry, OID_CN, OID_DC, OID_EMAIL};
use crate::name::{DomainName, NameError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NamingError {
    #[error("`{0}` is not a single-`@` e-mail address")]
    MalformedEmail(String),
    #[error("quoted or escaped local part in `{0}` is not supported")]
    UnsupportedLocalPart(String),
    #[error("IP address of {0} octets; expected 4 or 16")]
    BadIpLength(usize),
    #[error("distinguished name has no DC components")]
    NoDcComponents,
    #[error("DC value `{0}` is not a single label")]
    BadDcValue(String),
    #[error("no naming rule yields a domain name for this certificate")]
    NoNameDerivable,
    #[error(transparent)]
    Name(#[from] NameError),
}

/// Which rule produced the owner name. Variants are in priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NamingRule {
    SubjectDomainName,
    InverseIpName,
    UriDomainName,
    EmailTranslation,
    Rfc2247DnMapping,
}

impl fmt::Display for NamingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamingRule::SubjectDomainName => "domain-name",
            NamingRule::InverseIpName => "inverse-ip",
            NamingRule::UriDomainName => "uri-host",
            NamingRule::EmailTranslation => "email",
            NamingRule::Rfc2247DnMapping => "dc-mapping",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceField {
    Subject,
    SubjectAltName,
}

impl fmt::Display for SourceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceField::Subject => "subject",
            SourceField::SubjectAltName => "subjectAltName",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NamingDecision {
    pub owner: DomainName,
    pub rule_applied: NamingRule,
    pub source_field: SourceField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NamingProfile {
    #[default]
    Generic,
    Polito,
}

impl FromStr for NamingProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "generic" => Ok(NamingProfile::Generic),
            "polito" => Ok(NamingProfile::Polito),
            other => Err(alloc::format!("unknown naming profile `{}`", other)),
        }
    }
}

/// `first.last@example.org` becomes `first.last.example.org`.
pub fn translate_email(addr: &str) -> Result<DomainName, NamingError> {
    let (local, domain) = match addr.split_once('@') {
        Some((l, d)) if !l.is_empty() && !d.is_empty() && !d.contains('@') => (l, d),
        _ => return Err(NamingError::MalformedEmail(addr.to_string())),
    };
    if local.contains(['"', '\\']) || local.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(NamingError::UnsupportedLocalPart(addr.to_string()));
    }
    let domain = DomainName::parse(domain)?;
    let local = DomainName::from_labels(local.split('.'))?;
    Ok(local.concat(&domain)?)
}

/// Inverse name of a 4- or 16-octet address.
pub fn translate_ip(octets: &[u8]) -> Result<DomainName, NamingError> {
    match octets.len() {
        4 => Ok(translate_ip_addr(IpAddr::V4(Ipv4Addr::new(octets[0], octets[1], octets[2], octets[3])))),
        16 => {
            let mut a = [0u8; 16];
            a.copy_from_slice(octets);
            Ok(translate_ip_addr(IpAddr::V6(Ipv6Addr::from(a))))
        }
        n => Err(NamingError::BadIpLength(n)),
    }
}

pub fn translate_ip_addr(ip: IpAddr) -> DomainName {
    let mut labels: Vec<String> = Vec::with_capacity(34);
    match ip {
        IpAddr::V4(v4) => {
            labels.extend(v4.octets().iter().rev().map(|o| o.to_string()));
            labels.extend(["in-addr".to_string(), "arpa".to_string()]);
        }
        IpAddr::V6(v6) => {
            for o in v6.octets().iter().rev() {
                labels.push(alloc::format!("{:x}", o & 0x0F));
                labels.push(alloc::format!("{:x}", o >> 4));
            }
            labels.extend(["ip6".to_string(), "arpa".to_string()]);
        }
    }
    // at most 34 short labels: always a valid name
    DomainName::from_labels(labels).expect("inverse names are well-formed")
}

/// Joins the `DC` attribute values of `dn`, given most specific first.
pub fn translate_dn(dn: &[DnAttribute]) -> Result<DomainName, NamingError> {
    let components: Vec<&str> = dn.iter().filter(|a| a.oid == OID_DC).map(|a| a.value.as_str()).collect();
    if components.is_empty() {
        return Err(NamingError::NoDcComponents);
    }
    if let Some(bad) = components.iter().find(|c| c.contains('.')) {
        return Err(NamingError::BadDcValue(bad.to_string()));
    }
    Ok(DomainName::from_labels(components)?)
}

/// Host part of a URI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UriHost {
    Name(DomainName),
    Ip(IpAddr),
}

/// Extracts the host of `scheme://[userinfo@]host[:port][/...]`.
pub fn uri_host(uri: &str) -> Option<UriHost> {
    let (scheme, rest) = uri.split_once("://")?;
    let scheme_ok = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && scheme.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    if !scheme_ok {
        return None;
    }
    let authority = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host_port = authority.rsplit_once('@').map_or(authority, |(_, h)| h);
    if let Some(bracketed) = host_port.strip_prefix('[') {
        let (literal, _) = bracketed.split_once(']')?;
        return literal.parse::<Ipv6Addr>().ok().map(|ip| UriHost::Ip(IpAddr::V6(ip)));
    }
    let host = host_port.split(':').next().unwrap_or("");
    if host.is_empty() {
        return None;
    }
    if let Ok(v4) = host.parse::<Ipv4Addr>() {
        return Some(UriHost::Ip(IpAddr::V4(v4)));
    }
    DomainName::parse(host).ok().filter(|n| !n.is_root()).map(UriHost::Name)
}

fn decision(owner: DomainName, rule: NamingRule, source: SourceField) -> NamingDecision {
    NamingDecision { owner, rule_applied: rule, source_field: source }
}

fn from_subject(id: &IdentitySummary) -> Option<NamingDecision> {
    // most specific attribute first
    let cn_domain = id
        .subject_dn
        .iter()
        .rev()
        .filter(|a| a.oid == OID_CN)
        .filter_map(|a| DomainName::parse(&a.value).ok())
        .find(DomainName::is_multi_label_hostname);
    if let Some(owner) = cn_domain {
        return Some(decision(owner, NamingRule::SubjectDomainName, SourceField::Subject));
    }
    id.subject_dn
        .iter()
        .rev()
        .filter(|a| a.oid == OID_EMAIL)
        .find_map(|a| translate_email(&a.value).ok())
        .map(|owner| decision(owner, NamingRule::EmailTranslation, SourceField::Subject))
}

fn san_dns_name(id: &IdentitySummary) -> Option<DomainName> {
    id.san_entries.iter().find_map(|e| match e {
        SanEntry::DnsName(n) => DomainName::parse(n).ok().filter(|n| !n.is_root()),
        _ => None,
    })
}

fn san_email(id: &IdentitySummary) -> Option<DomainName> {
    id.san_entries.iter().find_map(|e| match e {
        SanEntry::Rfc822Name(addr) => translate_email(addr).ok(),
        _ => None,
    })
}

fn from_san(id: &IdentitySummary) -> Option<NamingDecision> {
    let san = SourceField::SubjectAltName;
    if let Some(owner) = san_dns_name(id) {
        return Some(decision(owner, NamingRule::SubjectDomainName, san));
    }
    let uri_hosts = || {
        id.san_entries.iter().filter_map(|e| match e {
            SanEntry::Uri(u) => uri_host(u),
            _ => None,
        })
    };
    let ip = id
        .san_entries
        .iter()
        .find_map(|e| match e {
            SanEntry::IpAddress(ip) => Some(*ip),
            _ => None,
        })
        .or_else(|| {
            uri_hosts().find_map(|h| match h {
                UriHost::Ip(ip) => Some(ip),
                UriHost::Name(_) => None,
            })
        });
    if let Some(ip) = ip {
        return Some(decision(translate_ip_addr(ip), NamingRule::InverseIpName, san));
    }
    let uri_name = uri_hosts().find_map(|h| match h {
        UriHost::Name(n) => Some(n),
        UriHost::Ip(_) => None,
    });
    if let Some(owner) = uri_name {
        return Some(decision(owner, NamingRule::UriDomainName, san));
    }
    san_email(id).map(|owner| decision(owner, NamingRule::EmailTranslation, san))
}

/// Picks the owner name for the certificate described by `id`.
pub fn map_identity(id: &IdentitySummary, profile: NamingProfile) -> Result<NamingDecision, NamingError> {
    let found = match profile {
        NamingProfile::Generic => from_subject(id).or_else(|| from_san(id)).or_else(|| {
            let most_specific_first: Vec<DnAttribute> = id.subject_dn.iter().rev().cloned().collect();
            translate_dn(&most_specific_first)
                .ok()
                .map(|owner| decision(owner, NamingRule::Rfc2247DnMapping, SourceField::Subject))
        }),
        NamingProfile::Polito => san_dns_name(id)
            .map(|owner| decision(owner, NamingRule::SubjectDomainName, SourceField::SubjectAltName))
            .or_else(|| {
                san_email(id).map(|owner| decision(owner, NamingRule::EmailTranslation, SourceField::SubjectAltName))
            }),
    };
    found.ok_or(NamingError::NoNameDerivable)
}
