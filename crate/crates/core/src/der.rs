//! Minimal DER reader: definite lengths, low tag numbers, no copying.

use alloc::string::String;
use core::fmt::Write as _;

use crate::identity::DerError;

pub(crate) const TAG_INTEGER: u8 = 0x02;
pub(crate) const TAG_BIT_STRING: u8 = 0x03;
pub(crate) const TAG_OCTET_STRING: u8 = 0x04;
pub(crate) const TAG_OID: u8 = 0x06;
pub(crate) const TAG_BOOLEAN: u8 = 0x01;
pub(crate) const TAG_SEQUENCE: u8 = 0x30;
pub(crate) const TAG_SET: u8 = 0x31;

/// One decoded TLV.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tlv<'a> {
    pub tag: u8,
    pub value: &'a [u8],
    /// The complete encoding, header included.
    pub raw: &'a [u8],
}

#[derive(Debug, Clone)]
pub(crate) struct DerReader<'a> {
    buf: &'a [u8],
    pos: usize,
    /// Offset of `buf` within the outermost input, for error reporting.
    base: usize,
}

impl<'a> DerReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        DerReader { buf, pos: 0, base: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.buf.len()
    }

    fn offset(&self) -> usize {
        self.base + self.pos
    }

    pub fn peek_tag(&self) -> Option<u8> {
        self.buf.get(self.pos).copied()
    }

    pub fn read(&mut self) -> Result<Tlv<'a>, DerError> {
        let start = self.pos;
        let at = self.offset();
        let tag = *self.buf.get(start).ok_or(DerError::Truncated(at))?;
        if tag & 0x1F == 0x1F {
            return Err(DerError::UnsupportedTag { offset: at, tag });
        }
        let first = *self.buf.get(start + 1).ok_or(DerError::Truncated(at + 1))?;
        let (len, header) = if first & 0x80 == 0 {
            (usize::from(first), 2)
        } else {
            let n = usize::from(first & 0x7F);
            if n == 0 {
                return Err(DerError::IndefiniteLength(at));
            }
            if n > 4 {
                return Err(DerError::BadLength(at));
            }
            let bytes = self
                .buf
                .get(start + 2..start + 2 + n)
                .ok_or(DerError::Truncated(at + 2))?;
            if bytes[0] == 0 {
                return Err(DerError::BadLength(at));
            }
            let len = bytes.iter().fold(0usize, |acc, &b| acc << 8 | usize::from(b));
            if len < 0x80 {
                return Err(DerError::BadLength(at));
            }
            (len, 2 + n)
        };
        let end = (start + header).checked_add(len).ok_or(DerError::BadLength(at))?;
        if end > self.buf.len() {
            return Err(DerError::Truncated(at));
        }
        self.pos = end;
        Ok(Tlv { tag, value: &self.buf[start + header..end], raw: &self.buf[start..end] })
    }

    pub fn expect(&mut self, tag: u8) -> Result<Tlv<'a>, DerError> {
        let at = self.offset();
        let tlv = self.read()?;
        if tlv.tag != tag {
            return Err(DerError::UnexpectedTag { offset: at, expected: tag, found: tlv.tag });
        }
        Ok(tlv)
    }

    /// Reads a constructed value with `tag` and returns a reader over its
    /// contents.
    pub fn nested(&mut self, tag: u8) -> Result<DerReader<'a>, DerError> {
        let header_at = self.offset();
        let tlv = self.expect(tag)?;
        let header_len = tlv.raw.len() - tlv.value.len();
        Ok(DerReader { buf: tlv.value, pos: 0, base: header_at + header_len })
    }

    /// Reads the next element only if it carries `tag`.
    pub fn optional(&mut self, tag: u8) -> Result<Option<Tlv<'a>>, DerError> {
        if self.peek_tag() == Some(tag) {
            self.read().map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn finish(&self) -> Result<(), DerError> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(DerError::TrailingData(self.offset()))
        }
    }
}

/// Renders the content octets of an OBJECT IDENTIFIER in dotted form.
pub(crate) fn oid_to_string(value: &[u8]) -> Result<String, DerError> {
    if value.is_empty() || value[value.len() - 1] & 0x80 != 0 {
        return Err(DerError::BadOid);
    }
    let mut arcs = value.split_inclusive(|b| b & 0x80 == 0);
    let mut out = String::new();
    let mut first = true;
    for arc in &mut arcs {
        if arc.len() > 9 || arc[0] == 0x80 {
            return Err(DerError::BadOid);
        }
        let v = arc.iter().fold(0u64, |acc, &b| acc << 7 | u64::from(b & 0x7F));
        if first {
            let (a, b) = match v {
                0..=39 => (0, v),
                40..=79 => (1, v - 40),
                _ => (2, v - 80),
            };
            write!(out, "{}.{}", a, b).unwrap();
            first = false;
        } else {
            write!(out, ".{}", v).unwrap();
        }
    }
    Ok(out)
}
