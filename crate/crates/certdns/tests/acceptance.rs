//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Tolerances are exact unless stated on the criterion. The decoder fuzz
//! runs for `CERTDNS_FUZZ_SECS` seconds (default 60).

mod common;

#[path = "../../core/tests/support/codec_strategies.rs"]
mod codec_strategies;
#[path = "../../core/tests/support/keytag_oracles.rs"]
mod keytag_oracles;
#[path = "../../core/tests/support/naming_cases.rs"]
mod naming_cases;

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;
use std::thread;
use std::time::{Duration, Instant};

use certdns::resolver::{LookupRequest, Resolver, Target, TransportPolicy, TransportUsed};
use certdns::store::save_zone;
use certdns_core::cert::{format_cert_presentation, parse_cert_line};
use certdns_core::naming::{map_identity, NamingProfile};
use certdns_core::publisher::{build_entry, PublishConfig};
use certdns_core::zone::emit_zone_file;
use certdns_core::{compute_keytag, extract_identity, DnsMessage, KeyTag, Zone};
use common::*;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRng, TestRunner};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn keytag_oracle() -> Outcome {
    ensure!(compute_keytag(&[]) == KeyTag(0), "[] -> {}", compute_keytag(&[]));
    ensure!(compute_keytag(&[1, 2]) == KeyTag(0x0102), "[1,2] -> {}", compute_keytag(&[1, 2]));
    ensure!(compute_keytag(&[0xFF; 4]) == KeyTag(0xFFFF), "[ff;4] -> {}", compute_keytag(&[0xFF; 4]));
    let mut rng = rand::rngs::StdRng::seed_from_u64(2538);
    let inputs: Vec<Vec<u8>> = (0..10_000)
        .map(|_| {
            let mut v = vec![0u8; rng.random_range(0..=4096)];
            rng.fill(&mut v[..]);
            v
        })
        .collect();
    let start = Instant::now();
    let tags: Vec<u16> = inputs.iter().map(|k| compute_keytag(k).0).collect();
    let elapsed = start.elapsed();
    for (k, &t) in inputs.iter().zip(&tags) {
        ensure!(t == keytag_oracles::c_listing(k), "disagrees with the C listing on {} octets", k.len());
        ensure!(t == keytag_oracles::bigint_oracle(k), "disagrees with the bigint oracle on {} octets", k.len());
    }
    ensure!(elapsed < Duration::from_secs(1), "10000 tags took {:?}", elapsed);
    Ok(format!("10000 random inputs agree with both oracles; fixed vectors exact; {:.3} s", elapsed.as_secs_f64()))
}

fn quiet(config: Config) -> Config {
    Config { failure_persistence: None, ..config }
}

fn fuzz_decoder(budget: Duration) -> Result<(u64, u64), String> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0xF022);
    let mut runner = TestRunner::new_with_rng(quiet(Config::default()), TestRng::deterministic_rng(Default::default()));
    let strategy = codec_strategies::message();
    let seeds: Vec<Vec<u8>> = (0..256)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current().encode().unwrap())
        .chain([fixture("personal.der")])
        .collect();
    let start = Instant::now();
    let (mut runs, mut rejected) = (0u64, 0u64);
    while start.elapsed() < budget {
        for _ in 0..256 {
            let input: Vec<u8> = match rng.random_range(0..4) {
                0 => (0..rng.random_range(0..600)).map(|_| rng.random()).collect(),
                1 => {
                    let s = &seeds[rng.random_range(0..seeds.len())];
                    s[..rng.random_range(0..=s.len())].to_vec()
                }
                _ => {
                    let mut s = seeds[rng.random_range(0..seeds.len())].clone();
                    for _ in 0..rng.random_range(1..8) {
                        let at = rng.random_range(0..s.len());
                        s[at] = match rng.random_range(0..3) {
                            0 => rng.random(),
                            1 => 0xC0 | (s[at] & 0x3F),
                            _ => s[at] ^ (1 << rng.random_range(0..8)),
                        };
                    }
                    s
                }
            };
            let result = panic::catch_unwind(|| {
                let d = DnsMessage::decode(&input);
                let _ = extract_identity(&input);
                d
            });
            match result {
                Ok(Ok(m)) => {
                    if m.encode().is_err() {
                        return Err(format!("accepted message fails to re-encode: {:02x?}", input));
                    }
                }
                Ok(Err(_)) => rejected += 1,
                Err(_) => return Err(format!("panic on input {:02x?}", input)),
            }
            runs += 1;
        }
    }
    Ok((runs, rejected))
}

fn codec_round_trip() -> Outcome {
    let secs: u64 = std::env::var("CERTDNS_FUZZ_SECS").ok().and_then(|s| s.parse().ok()).unwrap_or(60);
    let fuzz = thread::spawn(move || fuzz_decoder(Duration::from_secs(secs)));

    let mut runner = TestRunner::new(quiet(Config { cases: 1000, ..Config::default() }));
    runner
        .run(&codec_strategies::message(), |m| {
            let wire = m.encode().unwrap();
            let back = DnsMessage::decode(&wire).unwrap();
            proptest::prop_assert_eq!(&back, &m);
            proptest::prop_assert_eq!(back.encode().unwrap(), wire);
            Ok(())
        })
        .map_err(|e| format!("message round trip: {}", e))?;
    let records = (codec_strategies::name(), 1u32.., codec_strategies::cert_data());
    runner
        .run(&records, |(owner, ttl, d)| {
            let rdata = d.encode().unwrap();
            proptest::prop_assert_eq!(certdns_core::CertRecordData::decode(&rdata).unwrap(), d.clone());
            let (o, t, back) = parse_cert_line(&format_cert_presentation(&owner, ttl, &d)).unwrap();
            proptest::prop_assert_eq!((o, t, back), (owner, ttl, d));
            Ok(())
        })
        .map_err(|e| format!("CERT record round trip: {}", e))?;

    let (runs, rejected) = fuzz.join().map_err(|_| "fuzz thread panicked".to_string())??;
    Ok(format!(
        "1000 messages + 1000 CERT records bit-exact; {}s fuzz: {} inputs, {} typed rejections, no panics",
        secs, runs, rejected
    ))
}

fn naming_table() -> Outcome {
    let cases = naming_cases::cases();
    for c in &cases {
        let d = map_identity(&c.identity, NamingProfile::Generic).map_err(|e| format!("{}: {}", c.label, e))?;
        ensure!(
            d.owner.to_string() == c.owner && d.rule_applied == c.rule && d.source_field == c.source,
            "{}: got {} {} {}",
            c.label,
            d.owner,
            d.rule_applied,
            d.source_field
        );
    }
    Ok(format!("{} cases (email example, 5 exclusive triggers, adjacent-pair priorities) exact", cases.len()))
}

fn golden_zone() -> Outcome {
    let mut zone = Zone::new("polito.it".parse().unwrap()).unwrap();
    let config = PublishConfig::default();
    let sizes: Vec<usize> = ["server.der", "personal.der", "small.der"].iter().map(|c| fixture(c).len()).collect();
    for cert in ["server.der", "personal.der", "small.der"] {
        zone.upsert(build_entry(&fixture(cert), &config).map_err(|e| e.to_string())?).unwrap();
    }
    let text = emit_zone_file(&zone);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/golden.zone");
    let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {}", path.display(), e))?;
    ensure!(text == golden, "emitted zone differs from {}", path.display());
    for e in zone.entries() {
        let prefix = format!("{} 86400 IN CERT PKIX {} ", e.owner, e.record.key_tag);
        let line = e.to_presentation();
        ensure!(line.starts_with(&prefix) && line.contains(" ("), "entry shape: {}", &line[..line.len().min(80)]);
    }
    Ok(format!("byte-identical to golden.zone ({} octets; certificates of {:?} octets)", golden.len(), sizes))
}

fn truncation_end_to_end() -> Outcome {
    let start = Instant::now();
    let der = fixture("personal.der");
    let srv = TestServer::start(&zone_with(&["personal.der"]));
    let req = LookupRequest::new(Target::Email("marinus.marian@polito.it".into()), srv.addr());

    // (a) EDNS0 4096: one datagram each way
    let mut r = Resolver::with_parts(CountingTransport::default(), certdns::resolver::SystemClock);
    let a = r.lookup(&req).map_err(|e| format!("(a) {}", e))?;
    let t = r.transport();
    ensure!(t.udp_sent.len() == 1 && t.udp_received.len() == 1 && t.tcp_exchanges.is_empty(), "(a) exchanges: {} sent, {} received, {} tcp", t.udp_sent.len(), t.udp_received.len(), t.tcp_exchanges.len());
    let resp = DnsMessage::decode(&t.udp_received[0]).unwrap();
    let size_a = t.udp_received[0].len();
    ensure!(!resp.flags.truncated && a.transport_used == TransportUsed::Udp && !a.retried_over_tcp, "(a) truncated");
    ensure!(size_a > 512 && size_a <= 1472, "(a) response of {} octets", size_a);
    ensure!(a.records.len() == 1 && a.records[0].payload == der, "(a) payload differs");

    // (b) no EDNS0: TC at most 512 octets, then TCP
    let mut r = Resolver::with_parts(CountingTransport::default(), certdns::resolver::SystemClock);
    let b = r.lookup(&LookupRequest { edns_payload: None, ..req.clone() }).map_err(|e| format!("(b) {}", e))?;
    let t = r.transport();
    ensure!(t.udp_sent.len() == 1 && t.udp_received.len() == 1 && t.tcp_exchanges.len() == 1, "(b) exchanges: {} sent, {} received, {} tcp", t.udp_sent.len(), t.udp_received.len(), t.tcp_exchanges.len());
    let tc = DnsMessage::decode(&t.udp_received[0]).unwrap();
    let size_b = t.udp_received[0].len();
    ensure!(tc.flags.truncated && tc.answers.is_empty() && size_b <= 512, "(b) UDP answer: tc={} {} octets", tc.flags.truncated, size_b);
    ensure!(b.retried_over_tcp && b.transport_used == TransportUsed::Tcp, "(b) no TCP retry");
    ensure!(b.records == a.records && b.records[0].payload == der, "(b) TCP payload differs");

    // (c) TCP only: no datagrams at all
    let before = srv.handle.stats().udp_received.load(Ordering::SeqCst);
    let mut r = Resolver::with_parts(CountingTransport::default(), certdns::resolver::SystemClock);
    let c = r.lookup(&LookupRequest { policy: TransportPolicy::TcpOnly, ..req.clone() }).map_err(|e| format!("(c) {}", e))?;
    let after = srv.handle.stats().udp_received.load(Ordering::SeqCst);
    ensure!(r.transport().udp_sent.is_empty() && after == before, "(c) {} datagrams sent", r.transport().udp_sent.len());
    ensure!(c.records[0].payload == der, "(c) payload differs");

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {:?}", elapsed);
    Ok(format!(
        "(a) 1 UDP exchange, {} octets; (b) TC at {} octets then TCP, identical bytes; (c) 0 datagrams; {:.2} s",
        size_a,
        size_b,
        elapsed.as_secs_f64()
    ))
}

fn reissue_and_multi_cert() -> Outcome {
    let mut zone = zone_with(&["personal.der"]);
    let first = entry("personal.der");
    let reissue = entry("personal-reissue.der");
    let alt = entry("personal-alt.der");
    ensure!(first.record.key_tag == reissue.record.key_tag, "re-issue changed the key tag");
    ensure!(first.record.key_tag != alt.record.key_tag, "distinct keys share a tag");
    zone.upsert(reissue.clone()).unwrap();
    ensure!(zone.entries() == [reissue.clone()], "re-issue did not replace: {} entries", zone.entries().len());
    zone.upsert(alt.clone()).unwrap();
    ensure!(zone.entries_at(&first.owner).len() == 2, "{} entries at owner", zone.entries_at(&first.owner).len());

    let srv = TestServer::start(&zone);
    let mut r = Resolver::new();
    let req = LookupRequest::new(Target::Email("marinus.marian@polito.it".into()), srv.addr());
    let both = r.lookup(&req).map_err(|e| e.to_string())?;
    ensure!(both.records.len() == 2, "{} records retrieved", both.records.len());
    for (tag, cert) in [(reissue.record.key_tag, "personal-reissue.der"), (alt.record.key_tag, "personal-alt.der")] {
        let one = r.lookup(&LookupRequest { key_tag: Some(tag), ..req.clone() }).map_err(|e| e.to_string())?;
        ensure!(one.records.len() == 1 && one.records[0].payload == fixture(cert), "tag {} does not select {}", tag, cert);
    }
    Ok(format!(
        "re-issue replaced tag {}; tags {} and {} coexist and are selected by tag over {:?}",
        reissue.record.key_tag, reissue.record.key_tag, alt.record.key_tag, both.transport_used
    ))
}

fn zone_reload() -> Outcome {
    let mut zone = zone_with(&["server.der"]);
    let srv = TestServer::start(&zone);
    let mut r = Resolver::new();
    let req = LookupRequest::new(Target::Email("marinus.marian@polito.it".into()), srv.addr());
    ensure!(r.lookup(&req).is_err(), "certificate visible before publication");
    let old = zone.serial();
    zone.upsert(entry("personal.der")).unwrap();
    save_zone(&srv.zone_path, &zone).map_err(|e| e.to_string())?;
    let start = Instant::now();
    loop {
        if let Ok(found) = r.lookup(&req) {
            ensure!(found.records[0].payload == fixture("personal.der"), "wrong payload after reload");
            break;
        }
        ensure!(start.elapsed() < Duration::from_secs(2), "not visible after {:?}", start.elapsed());
        thread::sleep(Duration::from_millis(20));
    }
    let elapsed = start.elapsed();
    ensure!(srv.handle.serial() == zone.serial(), "serving serial {}", srv.handle.serial());
    Ok(format!("serial {} -> {} visible after {:.2} s (limit 2 s)", old, zone.serial(), elapsed.as_secs_f64()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("key-tag oracle", keytag_oracle),
        ("codec round-trip", codec_round_trip),
        ("naming-rule table", naming_table),
        ("golden zone file", golden_zone),
        ("truncation/EDNS0 end-to-end", truncation_end_to_end),
        ("re-issue and multi-cert", reissue_and_multi_cert),
        ("zone reload", zone_reload),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {}: {}", i + 1, name, detail),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {}: {}", i + 1, name, why);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
