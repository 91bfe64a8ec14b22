//! Unit constants. Data sizes are decimal (1 MB = 10^6 B) unless the name
//! says otherwise; rates are bits per second.

pub const KB: u64 = 1_000;
pub const MB: u64 = 1_000_000;
pub const GB: u64 = 1_000_000_000;

pub const KIB: u64 = 1 << 10;
pub const MIB: u64 = 1 << 20;

pub const MBPS: f64 = 1e6;
pub const GBPS: f64 = 1e9;
