//! Naming-rule table shared by the naming tests and the acceptance run.

use certdns_core::identity::{DnAttribute, IdentitySummary, SanEntry, OID_CN, OID_DC, OID_EMAIL, OID_O};
use certdns_core::naming::{NamingRule, SourceField};

pub struct Case {
    pub label: &'static str,
    pub identity: IdentitySummary,
    pub owner: &'static str,
    pub rule: NamingRule,
    pub source: SourceField,
}

fn id(subject: &[(&str, &str)], san: Vec<SanEntry>) -> IdentitySummary {
    IdentitySummary {
        version: 3,
        subject_dn: subject.iter().map(|(o, v)| DnAttribute::new(o, v)).collect(),
        san_entries: san,
        spki_der: vec![0x30, 0x00],
        signature_algorithm: "1.2.840.113549.1.1.5".into(),
        der_size: 0,
        legacy_version: false,
    }
}

fn dns(s: &str) -> SanEntry {
    SanEntry::DnsName(s.into())
}
fn ip(s: &str) -> SanEntry {
    SanEntry::IpAddress(s.parse().unwrap())
}
fn uri(s: &str) -> SanEntry {
    SanEntry::Uri(s.into())
}
fn mail(s: &str) -> SanEntry {
    SanEntry::Rfc822Name(s.into())
}

pub fn cases() -> Vec<Case> {
    use NamingRule::*;
    use SourceField::*;
    let person = [(OID_O, "Politecnico di Torino"), (OID_CN, "Marinus Marian")];
    vec![
        Case {
            label: "email example",
            identity: id(&person, vec![mail("marinus.marian@polito.it")]),
            owner: "marinus.marian.polito.it",
            rule: EmailTranslation,
            source: SubjectAltName,
        },
        // one exclusive trigger per rule
        Case {
            label: "only domain name",
            identity: id(&person, vec![dns("www.polito.it")]),
            owner: "www.polito.it",
            rule: SubjectDomainName,
            source: SubjectAltName,
        },
        Case {
            label: "only subject domain name",
            identity: id(&[(OID_CN, "Mail.Polito.IT")], vec![]),
            owner: "mail.polito.it",
            rule: SubjectDomainName,
            source: Subject,
        },
        Case {
            label: "only ip",
            identity: id(&person, vec![ip("192.0.2.1")]),
            owner: "1.2.0.192.in-addr.arpa",
            rule: InverseIpName,
            source: SubjectAltName,
        },
        Case {
            label: "only uri",
            identity: id(&person, vec![uri("https://ca.polito.it:8443/certs")]),
            owner: "ca.polito.it",
            rule: UriDomainName,
            source: SubjectAltName,
        },
        Case {
            label: "only email",
            identity: id(&person, vec![mail("a.b@polito.it")]),
            owner: "a.b.polito.it",
            rule: EmailTranslation,
            source: SubjectAltName,
        },
        Case {
            label: "only subject email",
            identity: id(&[(OID_CN, "A B"), (OID_EMAIL, "a.b@polito.it")], vec![]),
            owner: "a.b.polito.it",
            rule: EmailTranslation,
            source: Subject,
        },
        Case {
            label: "only dc",
            identity: id(&[(OID_DC, "it"), (OID_DC, "polito"), (OID_CN, "Marinus Marian")], vec![]),
            owner: "polito.it",
            rule: Rfc2247DnMapping,
            source: Subject,
        },
        // adjacent pairs: the lower rule index wins
        Case {
            label: "domain over ip",
            identity: id(&person, vec![ip("192.0.2.1"), dns("www.polito.it")]),
            owner: "www.polito.it",
            rule: SubjectDomainName,
            source: SubjectAltName,
        },
        Case {
            label: "ip over uri",
            identity: id(&person, vec![uri("http://www.polito.it/"), ip("2001:db8::1")]),
            owner: "1.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0.8.b.d.0.1.0.0.2.ip6.arpa",
            rule: InverseIpName,
            source: SubjectAltName,
        },
        Case {
            label: "uri over email",
            identity: id(&person, vec![mail("a@polito.it"), uri("ldap://dir.polito.it/o=x")]),
            owner: "dir.polito.it",
            rule: UriDomainName,
            source: SubjectAltName,
        },
        Case {
            label: "email over dc",
            identity: id(&[(OID_DC, "it"), (OID_DC, "polito"), (OID_EMAIL, "x.y@polito.it")], vec![]),
            owner: "x.y.polito.it",
            rule: EmailTranslation,
            source: Subject,
        },
        Case {
            label: "san email over dc",
            identity: id(&[(OID_DC, "it"), (OID_DC, "polito")], vec![mail("x.y@polito.it")]),
            owner: "x.y.polito.it",
            rule: EmailTranslation,
            source: SubjectAltName,
        },
        // source order: subject material first
        Case {
            label: "subject before san",
            identity: id(&[(OID_CN, "host.polito.it")], vec![dns("www.polito.it")]),
            owner: "host.polito.it",
            rule: SubjectDomainName,
            source: Subject,
        },
        Case {
            label: "uri with ip host",
            identity: id(&person, vec![uri("http://10.1.2.3/")]),
            owner: "3.2.1.10.in-addr.arpa",
            rule: InverseIpName,
            source: SubjectAltName,
        },
    ]
}
