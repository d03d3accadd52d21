use std::error::Error;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use certdns::resolver::{LookupRequest, Resolver, Target, TransportPolicy};
use certdns::server::{serve, ServerConfig};
use certdns::store::{load_zone, save_zone};
use certdns_core::consts::DEFAULT_TTL;
use certdns_core::naming::NamingProfile;
use certdns_core::publisher::{der_from_pem_or_der, parse_deny_list, prepare_entry, PublishConfig};
use certdns_core::{compute_keytag, extract_identity, DomainName, KeyTag, Zone};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "certdns", version, about = "Publish, serve and fetch X.509 certificates as DNS CERT records")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the CERT record for a certificate and add it to a zone file
    Publish {
        /// DER or PEM certificate
        #[arg(long)]
        cert: PathBuf,
        /// Zone file to update; without it the record is printed
        #[arg(long)]
        zone: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TTL)]
        ttl: u32,
        #[arg(long, default_value = "generic")]
        profile: NamingProfile,
        /// Owner names that must not be published, one per line
        #[arg(long)]
        deny_list: Option<PathBuf>,
        /// Zone origin, needed when the zone file does not exist yet
        #[arg(long)]
        origin: Option<DomainName>,
    },
    /// Remove the records at an owner name
    Remove {
        #[arg(long)]
        owner: DomainName,
        /// Only the record with this key tag
        #[arg(long)]
        keytag: Option<u16>,
        #[arg(long)]
        zone: PathBuf,
    },
    /// Print the key tag of a certificate's public key, or of a raw file
    Keytag { file: PathBuf },
    /// Print the owner name a certificate would be published under
    Map {
        cert: PathBuf,
        #[arg(long, default_value = "generic")]
        profile: NamingProfile,
    },
    /// Print what was extracted from a certificate
    Inspect { cert: PathBuf },
    /// Serve a zone file over UDP and TCP
    Serve {
        #[arg(long, default_value = "127.0.0.1:5353")]
        listen: SocketAddr,
        #[arg(long)]
        zone: PathBuf,
        #[arg(long = "max-udp", default_value_t = 4096)]
        max_udp: u16,
        /// Seconds between zone file checks
        #[arg(long, default_value_t = 1)]
        reload_interval: u64,
    },
    /// Look up the certificates of an e-mail address or host
    Fetch {
        target: String,
        #[arg(long)]
        server: SocketAddr,
        #[arg(long, default_value_t = 4096, conflicts_with = "no_edns")]
        edns: u16,
        #[arg(long)]
        no_edns: bool,
        #[arg(long)]
        tcp_only: bool,
        #[arg(long)]
        keytag: Option<u16>,
        /// Write each certificate to <dir>/<owner>.<keytag>.cer
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seconds to wait for each answer
        #[arg(long, default_value_t = 3)]
        timeout: u64,
    },
}

fn read_cert(path: &Path) -> Result<Vec<u8>, Box<dyn Error>> {
    let raw = fs::read(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    Ok(der_from_pem_or_der(&raw)?)
}

fn run(cli: Cli) -> Result<(), Box<dyn Error>> {
    match cli.command {
        Command::Publish { cert, zone, ttl, profile, deny_list, origin } => {
            let mut config = PublishConfig { ttl, profile, ..PublishConfig::default() };
            if let Some(path) = deny_list {
                let text = fs::read_to_string(&path).map_err(|e| format!("{}: {}", path.display(), e))?;
                config.deny = parse_deny_list(&text)
                    .map_err(|(line, e)| format!("{}:{}: {}", path.display(), line, e))?;
            }
            let p = prepare_entry(&read_cert(&cert)?, &config)?;
            let Some(zone_path) = zone else {
                println!("{}", p.entry.to_presentation());
                return Ok(());
            };
            let mut zone = if zone_path.exists() {
                let z = load_zone(&zone_path)?;
                if let Some(o) = origin.filter(|o| o != z.origin()) {
                    return Err(format!("zone file is for {}, not {}", z.origin(), o).into());
                }
                z
            } else {
                let origin = origin.ok_or("zone file does not exist; pass --origin to create it")?;
                Zone::new(origin)?
            };
            zone.upsert(p.entry.clone())?;
            save_zone(&zone_path, &zone)?;
            println!(
                "published {} key tag {} ({}, {}); serial {}",
                p.entry.owner,
                p.entry.record.key_tag,
                p.decision.rule_applied,
                p.decision.source_field,
                zone.serial()
            );
        }
        Command::Remove { owner, keytag, zone } => {
            let mut z = load_zone(&zone)?;
            let n = z.remove(&owner, keytag.map(KeyTag))?;
            save_zone(&zone, &z)?;
            println!("removed {} record(s); serial {}", n, z.serial());
        }
        Command::Keytag { file } => {
            let raw = fs::read(&file).map_err(|e| format!("{}: {}", file.display(), e))?;
            // certificates are tagged by their public key, other input as is
            let key = match der_from_pem_or_der(&raw).ok().and_then(|d| extract_identity(&d).ok()) {
                Some(id) => id.spki_der,
                None => raw,
            };
            println!("{}", compute_keytag(&key));
        }
        Command::Map { cert, profile } => {
            let id = extract_identity(&read_cert(&cert)?)?;
            let d = certdns_core::map_identity(&id, profile)?;
            println!("{} {} {}", d.owner, d.rule_applied, d.source_field);
        }
        Command::Inspect { cert } => {
            let der = read_cert(&cert)?;
            let id = extract_identity(&der)?;
            println!("version: {}", id.version);
            println!("size: {}", id.der_size);
            println!("subject: {}", id.subject_string());
            for san in &id.san_entries {
                println!("san: {}", san);
            }
            println!("signature: {}", id.signature_algorithm);
            println!("spki: {} octets", id.spki_der.len());
            println!("keytag: {}", compute_keytag(&id.spki_der));
            if id.legacy_version {
                println!("warning: pre-v3 certificate without subjectAltName");
            }
        }
        Command::Serve { listen, zone, max_udp, reload_interval } => {
            let config = ServerConfig {
                max_udp_payload: max_udp,
                reload_interval: Duration::from_secs(reload_interval.max(1)),
                ..ServerConfig::new(listen, zone)
            };
            serve(config)?;
        }
        Command::Fetch { target, server, edns, no_edns, tcp_only, keytag, out, timeout } => {
            let mut req = LookupRequest::new(Target::parse(&target)?, server);
            req.edns_payload = (!no_edns).then_some(edns);
            req.policy = if tcp_only { TransportPolicy::TcpOnly } else { TransportPolicy::UdpThenTcp };
            req.key_tag = keytag.map(KeyTag);
            let mut resolver = Resolver::new();
            resolver.timeout = Duration::from_secs(timeout.max(1));
            let result = resolver.lookup(&req)?;
            log::info!(
                "{} octets over {:?}{}",
                result.message_size,
                result.transport_used,
                if result.retried_over_tcp { " after truncation" } else { "" }
            );
            for r in &result.records {
                println!("{} {} {} {} {}", result.owner, r.cert_type, r.key_tag, r.algorithm, r.payload.len());
                if let Some(dir) = &out {
                    let path = dir.join(format!("{}.{}.cer", result.owner, r.key_tag));
                    fs::write(&path, &r.payload).map_err(|e| format!("{}: {}", path.display(), e))?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("certdns: {}", e);
            ExitCode::FAILURE
        }
    }
}
