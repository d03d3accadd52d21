mod support {
    pub mod keytag_oracles;
}

use std::time::Instant;

use certdns_core::keytag::{compute_keytag, KeyTag};
use rand::{Rng, SeedableRng};
use support::keytag_oracles::{bigint_oracle, c_listing};

#[test]
fn fixed_vectors() {
    assert_eq!(compute_keytag(&[]), KeyTag(0));
    assert_eq!(compute_keytag(&[0x01, 0x02]), KeyTag(0x0102));
    assert_eq!(compute_keytag(&[0xFF; 4]), KeyTag(0xFFFF));
    assert_eq!(c_listing(&[0xFF; 4]), 0xFFFF);
    assert_eq!(bigint_oracle(&[0xFF; 4]), 0xFFFF);
}

#[test]
fn agrees_with_oracles_on_random_inputs() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x4b45_5954);
    let inputs: Vec<Vec<u8>> = (0..10_000)
        .map(|_| {
            let len = rng.random_range(0..=4096);
            let mut v = vec![0u8; len];
            rng.fill(&mut v[..]);
            v
        })
        .collect();
    let start = Instant::now();
    for key in &inputs {
        let got = compute_keytag(key).0;
        assert_eq!(got, c_listing(key), "len {}", key.len());
        assert_eq!(got, bigint_oracle(key), "len {}", key.len());
    }
    // the oracles dominate; the implementation alone is far cheaper
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn implementation_runtime() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let inputs: Vec<Vec<u8>> = (0..10_000)
        .map(|_| (0..rng.random_range(0..=4096)).map(|_| rng.random()).collect())
        .collect();
    let start = Instant::now();
    let mut acc = 0u32;
    for key in &inputs {
        acc = acc.wrapping_add(u32::from(compute_keytag(key).0));
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "{:?} ({})", start.elapsed(), acc);
}

#[test]
fn appending_zero_octets_keeps_the_tag() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..500 {
        let mut key: Vec<u8> = (0..rng.random_range(0..300)).map(|_| rng.random()).collect();
        let tag = compute_keytag(&key);
        key.push(0);
        assert_eq!(compute_keytag(&key), tag);
        key.push(0);
        assert_eq!(compute_keytag(&key), tag);
    }
}

#[test]
fn extreme_lengths_fold_once() {
    // 64 KiB of 0xFF: sum = 0x7FFF8000, one fold leaves a carry that is
    // discarded, exactly as in the reference routine
    let key = vec![0xFF; 65536];
    assert_eq!(compute_keytag(&key).0, c_listing(&key));
    assert_eq!(compute_keytag(&key).0, bigint_oracle(&key));
}

#[test]
fn appending_zero_one_adds_one_before_the_fold() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(13);
    for _ in 0..2000 {
        let len = 2 * rng.random_range(0..200);
        let mut key: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        let before = compute_keytag(&key).0;
        key.extend([0x00, 0x01]);
        let after = compute_keytag(&key).0;
        assert_eq!(after, bigint_oracle(&key));
        // without a wrap of the low half the tag simply grows by one
        let sum: u64 = key[..len].chunks(2).map(|p| u64::from(p[0]) << 8 | u64::from(p[1])).sum();
        if sum & 0xFFFF != 0xFFFF {
            assert_eq!(after, before.wrapping_add(1));
        }
    }
}
