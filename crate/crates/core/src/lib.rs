//! Chunked one-sided-write transfer protocols over a simulated WAN.
//!
//! The crate models a memory-to-memory transfer between two sites joined by
//! a long-RTT path whose weakest node has a small burst buffer. It provides:
//!
//! - [`wire`]: the 32-byte chunk header, chunk plans, split and reassembly;
//! - [`wan`]: a deterministic path model (sender rate, propagation, a
//!   policing bottleneck with a cold-start state, optional seeded loss);
//! - [`gbn`]: Go-Back-N delivery of one-sided writes over that path;
//! - [`mr`]: registered regions and the rotating receive-region pool;
//! - [`protocols`]: the four transports and Link-Enable priming;
//! - [`fl`]: a FedAvg-shaped communication workload;
//! - [`bench`]: scenario files, CSV reports, and the table presets.
//!
//! ```
//! use fedrdma::prelude::*;
//!
//! let mut path = Path::new(PathConfig::with_rate(10.0 * GBPS)).unwrap();
//! let params = TransportParams::new(TransportKind::FedRdmaE);
//! let blob = Blob::random(9 * MB as usize, 1);
//! let mut pool = pool_for(&params, blob.len()).unwrap();
//! let report = transfer(&blob, &mut path, &params, Some(&mut pool)).unwrap();
//! assert!(report.is_success());
//! assert_eq!(report.header_ops, 1);
//! ```

pub mod bench;
pub mod fl;
pub mod gbn;
pub mod mr;
pub mod protocols;
pub mod units;
pub mod wan;
pub mod wire;

pub mod prelude {
    pub use crate::fl::{energy, lora_payload_bytes, run_federation, FederationConfig, FederationReport};
    pub use crate::gbn::TransferResult;
    pub use crate::mr::{register_mr, MemoryRegion, MrPool};
    pub use crate::protocols::{
        apply_link_enable, fedrdma_e_transfer, fedrdma_v1_transfer, naive_rdma_transfer, pool_for,
        tcp_like_transfer, transfer, LinkEnablePolicy, TransferReport, TransportKind, TransportParams,
    };
    pub use crate::units::*;
    pub use crate::wan::{LossModel, Path, PathConfig};
    pub use crate::wire::{Blob, ChunkHeader, ChunkPlan};
}
