//! Key tags.
//!
//! The tag is a ones'-complement-flavoured checksum over the key octets:
//! octets at even offsets are added shifted into the high byte, octets at
//! odd offsets into the low byte, and the carry out of the low 16 bits is
//! folded back in exactly once.
//!
//! Publishers feed the DER-encoded SubjectPublicKeyInfo of the
//! certificate. Other CERT publishers may pick different input octets, so
//! tags are only comparable between records produced the same way.

use core::fmt;

/// A two-octet key tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct KeyTag(pub u16);

impl KeyTag {
    pub fn value(self) -> u16 {
        self.0
    }
}

impl fmt::Display for KeyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u16> for KeyTag {
    fn from(v: u16) -> Self {
        KeyTag(v)
    }
}

/// Computes the key tag of `key`. Total over all inputs.
pub fn compute_keytag(key: &[u8]) -> KeyTag {
    // 64-bit accumulator: no overflow below 2^48 octets.
    let mut acc: u64 = key
        .chunks(2)
        .map(|pair| match *pair {
            [hi, lo] => u64::from(hi) << 8 | u64::from(lo),
            [hi] => u64::from(hi) << 8,
            _ => unreachable!(),
        })
        .sum();
    acc += (acc >> 16) & 0xFFFF;
    KeyTag((acc & 0xFFFF) as u16)
}
