//! The zone served by the repository and its master-file form.
//!
//! A zone is an SOA/NS skeleton plus CERT entries. Entries stay sorted
//! by (owner, key tag, certificate type) so the master file is a pure
//! function of the zone. Every mutation bumps the SOA serial, which is
//! how running servers notice new data.
//!
//! The emitted file starts with `$ORIGIN .` so that owner names can be
//! written without a trailing dot and still be absolute.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::cert::{format_cert_presentation, CertError, CertRecordData, CertType};
use crate::consts::*;
use crate::keytag::KeyTag;
use crate::name::{DomainName, NameError};
use crate::wire::ResourceRecord;

pub const SOA_REFRESH: u32 = 3600;
pub const SOA_RETRY: u32 = 600;
pub const SOA_EXPIRE: u32 = 604800;
pub const SOA_MINIMUM: u32 = 300;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZoneError {
    #[error("{owner} is not within zone {origin}")]
    OutOfZone { owner: DomainName, origin: DomainName },
    #[error("TTL must be positive")]
    ZeroTtl,
    #[error("no entry matches {0}")]
    NotFound(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl ToString) -> ZoneError {
    ZoneError::Parse { line, message: message.to_string() }
}

/// One CERT record in the zone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZoneEntry {
    pub owner: DomainName,
    pub ttl: u32,
    pub record: CertRecordData,
}

impl ZoneEntry {
    pub fn new(owner: DomainName, ttl: u32, record: CertRecordData) -> Result<Self, ZoneError> {
        if ttl == 0 {
            return Err(ZoneError::ZeroTtl);
        }
        Ok(ZoneEntry { owner, ttl, record })
    }

    fn sort_key(&self) -> (&DomainName, KeyTag, CertType) {
        (&self.owner, self.record.key_tag, self.record.cert_type)
    }

    pub fn to_presentation(&self) -> String {
        format_cert_presentation(&self.owner, self.ttl, &self.record)
    }

    pub fn to_record(&self) -> Result<ResourceRecord, CertError> {
        ResourceRecord::cert(self.owner.clone(), self.ttl, &self.record)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    origin: DomainName,
    serial: u32,
    default_ttl: u32,
    nameservers: Vec<DomainName>,
    hostmaster: DomainName,
    entries: Vec<ZoneEntry>,
}

impl Zone {
    /// An empty zone with serial 1, served by `ns1.<origin>`.
    pub fn new(origin: DomainName) -> Result<Self, NameError> {
        let ns = DomainName::parse("ns1")?.concat(&origin)?;
        let hostmaster = DomainName::parse("hostmaster")?.concat(&origin)?;
        Ok(Zone {
            origin,
            serial: 1,
            default_ttl: DEFAULT_TTL,
            nameservers: alloc::vec![ns],
            hostmaster,
            entries: Vec::new(),
        })
    }

    pub fn with_default_ttl(mut self, ttl: u32) -> Self {
        self.default_ttl = ttl;
        self
    }

    pub fn with_serial(mut self, serial: u32) -> Self {
        self.serial = serial;
        self
    }

    pub fn origin(&self) -> &DomainName {
        &self.origin
    }

    pub fn serial(&self) -> u32 {
        self.serial
    }

    pub fn default_ttl(&self) -> u32 {
        self.default_ttl
    }

    pub fn nameservers(&self) -> &[DomainName] {
        &self.nameservers
    }

    pub fn hostmaster(&self) -> &DomainName {
        &self.hostmaster
    }

    pub fn entries(&self) -> &[ZoneEntry] {
        &self.entries
    }

    pub fn contains_name(&self, name: &DomainName) -> bool {
        name.is_within(&self.origin)
    }

    /// Entries stored at `owner`, in key tag order.
    pub fn entries_at<'a>(&'a self, owner: &DomainName) -> &'a [ZoneEntry] {
        let start = self.entries.partition_point(|e| e.owner < *owner);
        let end = start + self.entries[start..].partition_point(|e| e.owner == *owner);
        &self.entries[start..end]
    }

    fn bump_serial(&mut self) {
        self.serial = self.serial.wrapping_add(1);
    }

    /// Adds `entry`, replacing an entry with the same owner, key tag and
    /// certificate type (a re-issued certificate).
    pub fn upsert(&mut self, entry: ZoneEntry) -> Result<(), ZoneError> {
        if !self.contains_name(&entry.owner) {
            return Err(ZoneError::OutOfZone { owner: entry.owner, origin: self.origin.clone() });
        }
        match self.entries.binary_search_by(|e| e.sort_key().cmp(&entry.sort_key())) {
            Ok(i) => self.entries[i] = entry,
            Err(i) => self.entries.insert(i, entry),
        }
        self.bump_serial();
        Ok(())
    }

    /// Removes the entries at `owner`, or only those with `key_tag` when
    /// given. Returns how many were removed.
    pub fn remove(&mut self, owner: &DomainName, key_tag: Option<KeyTag>) -> Result<usize, ZoneError> {
        let before = self.entries.len();
        self.entries.retain(|e| !(e.owner == *owner && key_tag.is_none_or(|t| t == e.record.key_tag)));
        let removed = before - self.entries.len();
        if removed == 0 {
            let what = match key_tag {
                Some(t) => alloc::format!("{} with key tag {}", owner, t),
                None => owner.to_string(),
            };
            return Err(ZoneError::NotFound(what));
        }
        self.bump_serial();
        Ok(removed)
    }

    pub fn soa_rdata(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.nameservers[0].write_wire(&mut out);
        self.hostmaster.write_wire(&mut out);
        for v in [self.serial, SOA_REFRESH, SOA_RETRY, SOA_EXPIRE, SOA_MINIMUM] {
            out.extend_from_slice(&v.to_be_bytes());
        }
        out
    }

    pub fn soa_record(&self) -> ResourceRecord {
        ResourceRecord {
            owner: self.origin.clone(),
            ttl: self.default_ttl,
            class: CLASS_IN,
            rr_type: TYPE_SOA,
            rdata: self.soa_rdata(),
        }
    }

    /// Renders the zone as a master file. Equal zones give equal text.
    pub fn to_master_file(&self) -> String {
        let mut out = String::new();
        let ttl = self.default_ttl;
        writeln!(out, "$ORIGIN .").unwrap();
        writeln!(out, "$TTL {}", ttl).unwrap();
        writeln!(out, "{} {} IN SOA {} {} (", self.origin, ttl, self.nameservers[0], self.hostmaster).unwrap();
        writeln!(out, "\t{} ; serial", self.serial).unwrap();
        writeln!(out, "\t{} ; refresh", SOA_REFRESH).unwrap();
        writeln!(out, "\t{} ; retry", SOA_RETRY).unwrap();
        writeln!(out, "\t{} ; expire", SOA_EXPIRE).unwrap();
        writeln!(out, "\t{} ; minimum", SOA_MINIMUM).unwrap();
        writeln!(out, "\t)").unwrap();
        for ns in &self.nameservers {
            writeln!(out, "{} {} IN NS {}", self.origin, ttl, ns).unwrap();
        }
        for entry in &self.entries {
            out.push('\n');
            out.push_str(&entry.to_presentation());
            out.push('\n');
        }
        out
    }

    /// Parses a master file. Accepts the subset written by
    /// [`Zone::to_master_file`] plus relative names, `@`, both
    /// TTL/class orders, comments and TTL unit suffixes.
    pub fn parse_master_file(text: &str) -> Result<Zone, ZoneError> {
        MasterFileParser::default().parse(text)
    }
}

/// Renders `zone` as a master file.
pub fn emit_zone_file(zone: &Zone) -> String {
    zone.to_master_file()
}

/// Parses a master file produced by [`emit_zone_file`].
pub fn parse_zone_file(text: &str) -> Result<Zone, ZoneError> {
    Zone::parse_master_file(text)
}

struct LogicalLine<'a> {
    line: usize,
    /// Began with whitespace, so the owner is inherited.
    continued_owner: bool,
    tokens: Vec<&'a str>,
}

/// Splits master-file text into logical lines, joining parenthesised
/// continuations and dropping comments. Parentheses become separators.
fn logical_lines(text: &str) -> Result<Vec<LogicalLine<'_>>, ZoneError> {
    let mut out: Vec<LogicalLine<'_>> = Vec::new();
    let mut depth = 0usize;
    let mut open = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split(';').next().unwrap_or("");
        let mut tokens = Vec::new();
        for piece in content.split_whitespace() {
            let mut rest = piece;
            while !rest.is_empty() {
                let cut = rest.find(['(', ')']).unwrap_or(rest.len());
                if cut > 0 {
                    tokens.push(&rest[..cut]);
                }
                match rest.as_bytes().get(cut) {
                    Some(b'(') => depth += 1,
                    Some(b')') => {
                        depth = depth.checked_sub(1).ok_or_else(|| parse_err(line_no, "unbalanced `)`"))?
                    }
                    _ => {}
                }
                rest = rest.get(cut + 1..).unwrap_or("");
            }
        }
        if open {
            out.last_mut().unwrap().tokens.extend(tokens);
        } else if !tokens.is_empty() {
            let continued_owner = raw.starts_with([' ', '\t']);
            out.push(LogicalLine { line: line_no, continued_owner, tokens });
        }
        open = depth > 0 && !out.is_empty();
    }
    if depth != 0 {
        return Err(parse_err(out.last().map_or(0, |l| l.line), "unclosed `(`"));
    }
    Ok(out)
}

fn parse_ttl(token: &str) -> Option<u32> {
    if let Ok(v) = token.parse::<u32>() {
        return Some(v);
    }
    let mut total: u64 = 0;
    let mut digits = String::new();
    for c in token.chars() {
        if c.is_ascii_digit() {
            digits.push(c);
            continue;
        }
        let unit: u64 = match c.to_ascii_lowercase() {
            's' => 1,
            'm' => 60,
            'h' => 3600,
            'd' => 86400,
            'w' => 604800,
            _ => return None,
        };
        let n: u64 = digits.parse().ok()?;
        total += n * unit;
        digits.clear();
    }
    if !digits.is_empty() || total > u64::from(u32::MAX) {
        return None;
    }
    Some(total as u32)
}

#[derive(Default)]
struct MasterFileParser {
    origin: Option<DomainName>,
    default_ttl: Option<u32>,
    last_owner: Option<DomainName>,
}

struct Soa {
    origin: DomainName,
    ttl: u32,
    mname: DomainName,
    rname: DomainName,
    serial: u32,
}

impl MasterFileParser {
    fn name(&self, token: &str, line: usize) -> Result<DomainName, ZoneError> {
        if token == "@" {
            return self.origin.clone().ok_or_else(|| parse_err(line, "`@` used without $ORIGIN"));
        }
        DomainName::parse_with_origin(token, self.origin.as_ref())
            .map(|(n, _)| n)
            .map_err(|e| parse_err(line, e))
    }

    fn parse(mut self, text: &str) -> Result<Zone, ZoneError> {
        let mut soa: Option<Soa> = None;
        let mut nameservers = Vec::new();
        let mut entries = Vec::new();

        for LogicalLine { line, continued_owner, tokens } in logical_lines(text)? {
            let mut it = tokens.into_iter().peekable();
            let first = *it.peek().unwrap();
            if first.starts_with('$') {
                it.next();
                let arg = it.next().ok_or_else(|| parse_err(line, alloc::format!("{} needs an argument", first)))?;
                match first.to_ascii_uppercase().as_str() {
                    "$ORIGIN" => {
                        let (name, _) = DomainName::parse_with_origin(arg, self.origin.as_ref())
                            .map_err(|e| parse_err(line, e))?;
                        self.origin = Some(name);
                    }
                    "$TTL" => {
                        self.default_ttl = Some(parse_ttl(arg).ok_or_else(|| parse_err(line, "bad $TTL"))?);
                    }
                    other => return Err(parse_err(line, alloc::format!("unsupported directive {}", other))),
                }
                continue;
            }

            let owner = if continued_owner {
                self.last_owner.clone().ok_or_else(|| parse_err(line, "record without owner"))?
            } else {
                let token = it.next().unwrap();
                self.name(token, line)?
            };
            self.last_owner = Some(owner.clone());

            let mut ttl = None;
            let mut class_seen = false;
            let rr_type = loop {
                let token = it.next().ok_or_else(|| parse_err(line, "missing record type"))?;
                if ttl.is_none() && token.starts_with(|c: char| c.is_ascii_digit()) {
                    ttl = Some(parse_ttl(token).ok_or_else(|| parse_err(line, alloc::format!("bad TTL `{}`", token)))?);
                } else if !class_seen && token.eq_ignore_ascii_case("IN") {
                    class_seen = true;
                } else if !class_seen && ["CH", "HS", "CS"].iter().any(|c| token.eq_ignore_ascii_case(c)) {
                    return Err(parse_err(line, alloc::format!("class {} not supported", token)));
                } else {
                    break token.to_ascii_uppercase();
                }
            };
            let ttl = match ttl.or(self.default_ttl) {
                Some(t) => t,
                None => return Err(parse_err(line, "no TTL and no $TTL")),
            };
            let rdata: Vec<&str> = it.collect();

            match rr_type.as_str() {
                "SOA" => {
                    if soa.is_some() {
                        return Err(parse_err(line, "second SOA record"));
                    }
                    if rdata.len() != 7 {
                        return Err(parse_err(line, "SOA needs 7 fields"));
                    }
                    let serial = rdata[2].parse::<u32>().map_err(|_| parse_err(line, "bad SOA serial"))?;
                    for field in &rdata[3..] {
                        parse_ttl(field).ok_or_else(|| parse_err(line, alloc::format!("bad SOA field `{}`", field)))?;
                    }
                    soa = Some(Soa {
                        origin: owner,
                        ttl,
                        mname: self.name(rdata[0], line)?,
                        rname: self.name(rdata[1], line)?,
                        serial,
                    });
                }
                "NS" => {
                    let [target] = rdata[..] else {
                        return Err(parse_err(line, "NS needs one name"));
                    };
                    nameservers.push((line, owner, self.name(target, line)?));
                }
                "CERT" => {
                    let record = CertRecordData::parse_presentation(&rdata.join(" ")).map_err(|e| parse_err(line, e))?;
                    let entry = ZoneEntry::new(owner, ttl, record).map_err(|e| parse_err(line, e))?;
                    entries.push((line, entry));
                }
                other => return Err(parse_err(line, alloc::format!("record type {} not supported", other))),
            }
        }

        let soa = soa.ok_or_else(|| parse_err(0, "zone has no SOA record"))?;
        let mut zone = Zone {
            origin: soa.origin,
            serial: soa.serial,
            default_ttl: self.default_ttl.unwrap_or(soa.ttl),
            nameservers: Vec::new(),
            hostmaster: soa.rname,
            entries: Vec::new(),
        };
        // the SOA MNAME leads the NS list
        zone.nameservers.push(soa.mname.clone());
        for (line, owner, ns) in nameservers {
            if owner != zone.origin {
                return Err(parse_err(line, "NS record away from the apex"));
            }
            if ns != soa.mname {
                zone.nameservers.push(ns);
            }
        }
        for (line, entry) in entries {
            if !zone.contains_name(&entry.owner) {
                return Err(parse_err(line, alloc::format!("{} is outside zone {}", entry.owner, zone.origin)));
            }
            match zone.entries.binary_search_by(|e| e.sort_key().cmp(&entry.sort_key())) {
                Ok(_) => return Err(parse_err(line, "duplicate owner/key tag/type")),
                Err(i) => zone.entries.insert(i, entry),
            }
        }
        Ok(zone)
    }
}
