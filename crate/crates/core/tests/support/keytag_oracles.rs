//! Independent key-tag evaluations used as test oracles.

use num_bigint::BigUint;

/// Line-by-line port of the reference C routine, with `long int` as i64.
pub fn c_listing(key: &[u8]) -> u16 {
    let mut ac: i64 = 0;
    let mut i: u32 = 0;
    while (i as usize) < key.len() {
        ac += if i & 1 != 0 { key[i as usize] as i64 } else { (key[i as usize] as i64) << 8 };
        i += 1;
    }
    ac += (ac >> 16) & 0xFFFF;
    (ac & 0xFFFF) as i32 as u16
}

/// Same definition over arbitrary precision: the input read as big-endian
/// 16-bit words (odd length padded with a zero octet), summed exactly.
pub fn bigint_oracle(key: &[u8]) -> u16 {
    let mut sum = BigUint::from(0u32);
    for pair in key.chunks(2) {
        let word = u32::from(pair[0]) << 8 | u32::from(*pair.get(1).unwrap_or(&0));
        sum += word;
    }
    let mask = BigUint::from(0xFFFFu32);
    let folded = &sum + ((&sum >> 16u32) & &mask);
    let low = folded & mask;
    low.to_u32_digits().first().copied().unwrap_or(0) as u16
}
