//! Domain names.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

/// Longest permitted label, in octets.
pub const MAX_LABEL_LEN: usize = 63;

/// Longest permitted name in uncompressed wire form, including the
/// length octets and the terminating root label.
pub const MAX_NAME_LEN: usize = 255;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NameError {
    #[error("empty domain name")]
    Empty,
    #[error("empty label")]
    EmptyLabel,
    #[error("label of {0} octets exceeds 63")]
    LabelTooLong(usize),
    #[error("name of {0} octets exceeds 255")]
    NameTooLong(usize),
    #[error("bad escape sequence in name")]
    BadEscape,
}

/// A validated domain name.
///
/// Labels are stored case-folded to ASCII lowercase, so equality,
/// hashing and ordering are all case-insensitive with respect to the
/// input the name was built from. Ordering follows DNS canonical order:
/// labels are compared from the rightmost one.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DomainName {
    labels: Vec<Vec<u8>>,
}

impl DomainName {
    pub fn root() -> Self {
        DomainName { labels: Vec::new() }
    }

    /// Builds a name from labels ordered leftmost first.
    pub fn from_labels<I, L>(labels: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = L>,
        L: AsRef<[u8]>,
    {
        let mut out = Vec::new();
        let mut wire_len = 1;
        for label in labels {
            let label = label.as_ref();
            if label.is_empty() {
                return Err(NameError::EmptyLabel);
            }
            if label.len() > MAX_LABEL_LEN {
                return Err(NameError::LabelTooLong(label.len()));
            }
            wire_len += label.len() + 1;
            out.push(label.to_ascii_lowercase());
        }
        if wire_len > MAX_NAME_LEN {
            return Err(NameError::NameTooLong(wire_len));
        }
        Ok(DomainName { labels: out })
    }

    pub fn labels(&self) -> impl DoubleEndedIterator<Item = &[u8]> + ExactSizeIterator {
        self.labels.iter().map(Vec::as_slice)
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_root(&self) -> bool {
        self.labels.is_empty()
    }

    /// Length of the uncompressed wire encoding.
    pub fn wire_len(&self) -> usize {
        1 + self.labels.iter().map(|l| l.len() + 1).sum::<usize>()
    }

    /// Appends the uncompressed wire form to `out`.
    pub fn write_wire(&self, out: &mut Vec<u8>) {
        for label in &self.labels {
            out.push(label.len() as u8);
            out.extend_from_slice(label);
        }
        out.push(0);
    }

    /// True when `self` equals `ancestor` or lies below it.
    pub fn is_within(&self, ancestor: &DomainName) -> bool {
        self.labels.len() >= ancestor.labels.len()
            && self.labels.iter().rev().zip(ancestor.labels.iter().rev()).all(|(a, b)| a == b)
    }

    /// The name formed by appending `suffix` to `self`.
    pub fn concat(&self, suffix: &DomainName) -> Result<DomainName, NameError> {
        DomainName::from_labels(self.labels.iter().chain(suffix.labels.iter()))
    }

    /// Removes the leftmost label; `None` for the root.
    pub fn parent(&self) -> Option<DomainName> {
        if self.labels.is_empty() {
            None
        } else {
            Some(DomainName { labels: self.labels[1..].to_vec() })
        }
    }

    /// True when every label is letters, digits and inner hyphens, and the
    /// name has at least two labels. Used to decide whether a free-form
    /// string names a host.
    pub fn is_multi_label_hostname(&self) -> bool {
        self.labels.len() >= 2
            && self.labels.iter().all(|l| {
                l.iter().all(|&b| b.is_ascii_alphanumeric() || b == b'-')
                    && l.first() != Some(&b'-')
                    && l.last() != Some(&b'-')
            })
    }

    /// Parses a presentation-format name. A trailing dot is accepted and
    /// ignored; `\X` and `\DDD` escapes are honoured.
    pub fn parse(text: &str) -> Result<Self, NameError> {
        Self::parse_with_origin(text, None).map(|(name, _)| name)
    }

    /// Parses a name that may be relative. Returns the name and whether the
    /// text was absolute (ended with an unescaped dot). A relative name is
    /// completed with `origin` when one is given.
    pub fn parse_with_origin(
        text: &str,
        origin: Option<&DomainName>,
    ) -> Result<(Self, bool), NameError> {
        if text.is_empty() {
            return Err(NameError::Empty);
        }
        if text == "." {
            return Ok((DomainName::root(), true));
        }
        let bytes = text.as_bytes();
        let mut labels: Vec<Vec<u8>> = Vec::new();
        let mut current = Vec::new();
        let mut absolute = false;
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'.' => {
                    if current.is_empty() {
                        return Err(NameError::EmptyLabel);
                    }
                    labels.push(core::mem::take(&mut current));
                    if i + 1 == bytes.len() {
                        absolute = true;
                    }
                    i += 1;
                }
                b'\\' => {
                    let rest = &bytes[i + 1..];
                    match rest {
                        [a, b, c, ..] if a.is_ascii_digit() && b.is_ascii_digit() && c.is_ascii_digit() => {
                            let v = u32::from(a - b'0') * 100 + u32::from(b - b'0') * 10 + u32::from(c - b'0');
                            if v > 255 {
                                return Err(NameError::BadEscape);
                            }
                            current.push(v as u8);
                            i += 4;
                        }
                        [a, ..] if !a.is_ascii_digit() => {
                            current.push(*a);
                            i += 2;
                        }
                        _ => return Err(NameError::BadEscape),
                    }
                }
                b => {
                    current.push(b);
                    i += 1;
                }
            }
        }
        if !current.is_empty() {
            labels.push(current);
        }
        let name = DomainName::from_labels(labels)?;
        match origin {
            Some(origin) if !absolute => Ok((name.concat(origin)?, false)),
            _ => Ok((name, absolute)),
        }
    }
}

impl FromStr for DomainName {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DomainName::parse(s)
    }
}

impl fmt::Display for DomainName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.labels.is_empty() {
            return f.write_str(".");
        }
        for (i, label) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            for &b in label {
                match b {
                    b'.' | b'\\' | b'(' | b')' | b';' | b'"' | b'@' | b'$' => {
                        write!(f, "\\{}", b as char)?
                    }
                    0x21..=0x7e => write!(f, "{}", b as char)?,
                    _ => write!(f, "\\{:03}", b)?,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DomainName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DomainName({})", self)
    }
}

impl Ord for DomainName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.labels.iter().rev().cmp(other.labels.iter().rev())
    }
}

impl PartialOrd for DomainName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<DomainName> for String {
    fn from(name: DomainName) -> String {
        alloc::format!("{}", name)
    }
}
