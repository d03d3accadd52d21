//! Runtime side of the certificate repository: zone files on disk, the
//! authoritative UDP/TCP server and the lookup client.

pub mod resolver;
pub mod server;
pub mod store;

pub use certdns_core as core;
