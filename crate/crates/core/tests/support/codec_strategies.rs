//! Generators for valid messages and CERT records.

use certdns_core::consts::*;
use certdns_core::keytag::KeyTag;
use certdns_core::wire::{Edns, Flags, Question, Rcode};
use certdns_core::{Algorithm, CertRecordData, CertType, DnsMessage, DomainName, ResourceRecord};
use proptest::prelude::*;

pub fn label() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        3 => "[a-z0-9][a-z0-9-]{0,14}".prop_map(String::into_bytes),
        1 => prop::collection::vec(any::<u8>().prop_map(|b| b.to_ascii_lowercase()), 1..=20),
    ]
}

pub fn name() -> impl Strategy<Value = DomainName> {
    prop::collection::vec(label(), 0..=5).prop_map(|ls| DomainName::from_labels(ls).unwrap())
}

pub fn cert_data() -> impl Strategy<Value = CertRecordData> {
    (
        prop_oneof![Just(1u16), Just(2), Just(3), any::<u16>()],
        any::<u16>(),
        prop_oneof![Just(0u8), Just(1), Just(3), Just(5), any::<u8>()],
        prop::collection::vec(any::<u8>(), 1..600),
    )
        .prop_map(|(t, k, a, p)| CertRecordData::new(CertType(t), KeyTag(k), Algorithm(a), p).unwrap())
}

pub fn record() -> impl Strategy<Value = ResourceRecord> {
    let rdata = prop_oneof![
        cert_data().prop_map(|d| (TYPE_CERT, d.encode().unwrap())),
        name().prop_map(|n| {
            let mut w = Vec::new();
            n.write_wire(&mut w);
            (TYPE_NS, w)
        }),
        (any::<u16>(), name()).prop_map(|(pref, n)| {
            let mut w = pref.to_be_bytes().to_vec();
            n.write_wire(&mut w);
            (TYPE_MX, w)
        }),
        (
            prop_oneof![Just(1u16), Just(16), Just(28), Just(99), Just(65280)],
            prop::collection::vec(any::<u8>(), 0..64)
        ),
    ];
    (name(), any::<u32>(), prop_oneof![Just(CLASS_IN), Just(3u16)], rdata).prop_map(
        |(owner, ttl, class, (rr_type, rdata))| ResourceRecord { owner, ttl, class, rr_type, rdata },
    )
}

pub fn flags() -> impl Strategy<Value = Flags> {
    (any::<[bool; 5]>(), 0u8..16, 0u8..16).prop_map(|(b, opcode, rcode)| Flags {
        response: b[0],
        opcode,
        authoritative: b[1],
        truncated: b[2],
        recursion_desired: b[3],
        recursion_available: b[4],
        rcode: Rcode(rcode),
    })
}

prop_compose! {
    pub fn message()(
        id in any::<u16>(),
        flags in flags(),
        question in prop::option::weighted(0.9, (name(), any::<u16>(), any::<u16>())),
        answers in prop::collection::vec(record(), 0..4),
        authority in prop::collection::vec(record(), 0..2),
        additional in prop::collection::vec(record(), 0..2),
        edns in prop::option::of(any::<u16>()),
        share_owner in any::<bool>(),
    ) -> DnsMessage {
        let question = question
            .filter(|(_, qtype, _)| *qtype != TYPE_OPT)
            .map(|(name, qtype, qclass)| Question { name, qtype, qclass });
        let mut answers = answers;
        // exercise the compression pointer path
        if let (true, Some(q), Some(first)) = (share_owner, &question, answers.first_mut()) {
            first.owner = q.name.clone();
        }
        DnsMessage {
            id,
            flags,
            question,
            answers,
            authority,
            additional,
            edns: edns.map(|udp_payload_size| Edns { udp_payload_size }),
        }
    }
}
