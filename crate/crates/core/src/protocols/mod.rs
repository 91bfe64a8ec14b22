//! The four transports compared by the benchmark, plus the Link-Enable
//! priming policy shared by the chunked ones.
//!
//! | transport  | framing              | pacing                          | receive side             |
//! |------------|----------------------|---------------------------------|--------------------------|
//! | NaiveRdma  | one write            | none (whole blob in one burst)  | in place                 |
//! | TcpLike    | stream               | window-limited, slow start      | kernel copies            |
//! | FedRdmaV1  | header per chunk     | ACK-gated + fixed delay         | temp store + reassembly  |
//! | FedRdmaE   | one header, last     | ACK-gated                       | pooled region, in place  |

mod chunked_e;
mod chunked_v1;
mod naive;
mod tcp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chunked_e::fedrdma_e_transfer;
pub use chunked_v1::fedrdma_v1_transfer;
pub use naive::naive_rdma_transfer;
pub use tcp::tcp_like_transfer;

use crate::gbn::{GbnError, TransferResult, DEFAULT_RETRY_LIMIT};
use crate::mr::{MrError, MrPool};
use crate::units::{GBPS, MB};
use crate::wan::{Path, PathConfig};
use crate::wire::{Blob, ChunkPlan, WireError};

pub const TCP_NIC_POWER_W: f64 = 5.1;
pub const RDMA_NIC_POWER_W: f64 = 18.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransportKind {
    NaiveRdma,
    TcpLike,
    FedRdmaV1,
    FedRdmaE,
}

impl TransportKind {
    pub const ALL: [TransportKind; 4] = [
        TransportKind::NaiveRdma,
        TransportKind::TcpLike,
        TransportKind::FedRdmaV1,
        TransportKind::FedRdmaE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransportKind::NaiveRdma => "NaiveRdma",
            TransportKind::TcpLike => "TcpLike",
            TransportKind::FedRdmaV1 => "FedRdmaV1",
            TransportKind::FedRdmaE => "FedRdmaE",
        }
    }

    pub fn default_power(self) -> f64 {
        match self {
            TransportKind::TcpLike => TCP_NIC_POWER_W,
            _ => RDMA_NIC_POWER_W,
        }
    }

    pub fn is_chunked(self) -> bool {
        matches!(self, TransportKind::FedRdmaV1 | TransportKind::FedRdmaE)
    }
}

impl std::fmt::Display for TransportKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TransportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransportKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown transport `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LinkEnablePolicy {
    #[default]
    Auto,
    Force,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportParams {
    pub kind: TransportKind,
    pub base_chunk_size: u64,
    /// Pause between acked chunks in FedRdmaV1, seconds.
    pub artificial_delay: f64,
    pub tcp_window: u64,
    pub link_enable_policy: LinkEnablePolicy,
    /// Watts drawn by the NIC while transferring; per-kind default when unset.
    pub nic_power: Option<f64>,
    pub retry_limit: u32,
    /// Receive regions per FedRdmaE pool.
    pub pool_size: usize,
    /// FedRdmaE receiver poll period; a quarter RTT when unset.
    pub poll_period: Option<f64>,
    /// Link-Enable kicks in at or above this sender rate...
    pub primer_min_rate: f64,
    /// ...when the largest chunk is at least this big.
    pub primer_min_chunk: u64,
    /// Sender-side smoothing cap for TcpLike, bits/s.
    pub pacing_rate: Option<f64>,
}

impl Default for TransportParams {
    fn default() -> Self {
        Self::new(TransportKind::FedRdmaE)
    }
}

impl TransportParams {
    pub fn new(kind: TransportKind) -> Self {
        Self {
            kind,
            base_chunk_size: 4 * MB,
            artificial_delay: 0.0144,
            tcp_window: 812_500,
            link_enable_policy: LinkEnablePolicy::Auto,
            nic_power: None,
            retry_limit: DEFAULT_RETRY_LIMIT,
            pool_size: 2,
            poll_period: None,
            primer_min_rate: 4.0 * GBPS,
            primer_min_chunk: 2 * MB,
            pacing_rate: None,
        }
    }

    pub fn with_chunk(mut self, s: u64) -> Self {
        self.base_chunk_size = s;
        self
    }

    pub fn power(&self) -> f64 {
        self.nic_power.unwrap_or_else(|| self.kind.default_power())
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.base_chunk_size == 0 {
            return Err(ProtocolError::InvalidParams("base_chunk_size must be positive"));
        }
        if !(self.artificial_delay >= 0.0) {
            return Err(ProtocolError::InvalidParams("artificial_delay must be non-negative"));
        }
        if self.tcp_window == 0 {
            return Err(ProtocolError::InvalidParams("tcp_window must be positive"));
        }
        if self.pool_size == 0 {
            return Err(ProtocolError::InvalidParams("pool_size must be at least 1"));
        }
        if matches!(self.nic_power, Some(p) if !(p >= 0.0)) {
            return Err(ProtocolError::InvalidParams("nic_power must be non-negative"));
        }
        if matches!(self.poll_period, Some(p) if !(p > 0.0)) {
            return Err(ProtocolError::InvalidParams("poll_period must be positive"));
        }
        if matches!(self.pacing_rate, Some(r) if !(r > 0.0)) {
            return Err(ProtocolError::InvalidParams("pacing_rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid transport parameters: {0}")]
    InvalidParams(&'static str),
    #[error("receive region holds {capacity} bytes, transfer needs {needed}")]
    RegionTooSmall { capacity: u64, needed: u64 },
    #[error("FedRdmaE needs a receive-region pool")]
    MissingPool,
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Transport(#[from] GbnError),
    #[error(transparent)]
    Region(#[from] MrError),
}

/// Outcome of one blob transfer.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub transport: TransportKind,
    pub result: TransferResult,
    pub latency: f64,
    pub bytes_on_wire: u64,
    pub retransmissions: u64,
    /// Chunk headers constructed by the sender.
    pub header_ops: u64,
    /// Chunk headers parsed by the receiver.
    pub header_decodes: u64,
    pub peak_extra_memory: u64,
    pub primer_used: bool,
    pub power: f64,
    pub energy: f64,
    pub data_bytes: u64,
    pub chunk_bytes: u64,
    pub num_chunks: u32,
    /// Largest amount of unacked protocol bytes (payload + headers) at any instant.
    pub peak_in_flight: u64,
    /// Whether the receiver ended up with exactly the sent bytes; `None` when content was elided.
    pub delivered_intact: Option<bool>,
    /// FedRdmaE only: whether the payload was complete when the header first polled valid.
    pub completion_sound: Option<bool>,
}

impl TransferReport {
    pub(crate) fn new(kind: TransportKind, params: &TransportParams, blob: &Blob) -> Self {
        Self {
            transport: kind,
            result: TransferResult::Success,
            latency: 0.0,
            bytes_on_wire: 0,
            retransmissions: 0,
            header_ops: 0,
            header_decodes: 0,
            peak_extra_memory: 0,
            primer_used: false,
            power: params.power(),
            energy: 0.0,
            data_bytes: blob.len(),
            chunk_bytes: blob.len(),
            num_chunks: 1,
            peak_in_flight: 0,
            delivered_intact: None,
            completion_sound: None,
        }
    }

    /// Folds one Go-Back-N stream into the report and returns the retry
    /// budget left for the rest of the transfer.
    pub(crate) fn absorb(&mut self, out: &crate::gbn::TransferOutcome, budget: u32) -> u32 {
        self.bytes_on_wire += out.bytes_on_wire;
        self.retransmissions += out.retransmissions;
        self.peak_in_flight = self.peak_in_flight.max(out.peak_unacked_bytes);
        if !out.result.is_success() {
            self.result = TransferResult::TransmissionFailure;
        }
        budget.saturating_sub(out.retries_used)
    }

    pub(crate) fn finish(&mut self, latency: f64) {
        self.latency = latency;
        self.energy = crate::fl::energy(self.power, latency);
    }

    pub fn is_success(&self) -> bool {
        self.result.is_success()
    }
}

/// What, if anything, goes out ahead of the large chunks to prime the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primer {
    None,
    /// The trailing chunk is small enough to serve as the primer itself.
    LastChunk,
    /// A dedicated probe segment of `len` bytes.
    Probe { len: u64 },
}

impl Primer {
    pub fn is_used(self) -> bool {
        self != Primer::None
    }
}

/// Largest trailing chunk still sent as a primer, in MTUs.
const PRIMER_TAIL_MTUS: u64 = 4;

/// Decides whether a chunked transfer primes the path first.
///
/// Under `Auto`, priming is needed at or above `primer_min_rate` when the
/// largest chunk reaches `primer_min_chunk`. The trailing chunk doubles as the
/// primer when it is at most four MTUs, which saves the probe's round trip.
pub fn apply_link_enable(params: &TransportParams, path: &PathConfig, plan: &ChunkPlan) -> Primer {
    let required = match params.link_enable_policy {
        LinkEnablePolicy::Off => false,
        LinkEnablePolicy::Force => true,
        LinkEnablePolicy::Auto => {
            path.sender_rate >= params.primer_min_rate
                && plan.max_chunk_len() >= params.primer_min_chunk
        }
    };
    if !required {
        Primer::None
    } else if plan.num_chunks > 1 && plan.last_chunk_size <= PRIMER_TAIL_MTUS * path.mtu {
        Primer::LastChunk
    } else {
        Primer::Probe {
            len: path.mtu.min(params.base_chunk_size),
        }
    }
}

/// Runs `blob` through the transport named in `params`. FedRdmaE needs a pool.
pub fn transfer(
    blob: &Blob,
    path: &mut Path,
    params: &TransportParams,
    pool: Option<&mut MrPool>,
) -> Result<TransferReport, ProtocolError> {
    params.validate()?;
    match params.kind {
        TransportKind::NaiveRdma => naive_rdma_transfer(blob, path, params),
        TransportKind::TcpLike => tcp_like_transfer(blob, path, params),
        TransportKind::FedRdmaV1 => fedrdma_v1_transfer(blob, path, params),
        TransportKind::FedRdmaE => {
            fedrdma_e_transfer(blob, path, params, pool.ok_or(ProtocolError::MissingPool)?)
        }
    }
}

/// Pool sized for transfers of up to `max_len` bytes.
pub fn pool_for(params: &TransportParams, max_len: u64) -> Result<MrPool, MrError> {
    MrPool::new(params.pool_size, max_len + crate::wire::HEADER_LEN as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(len: u64, s: u64) -> ChunkPlan {
        ChunkPlan::new(len, s).unwrap()
    }

    #[test]
    fn link_enable_table_points() {
        let p = TransportParams::new(TransportKind::FedRdmaE);
        let fast = PathConfig::with_rate(10.0 * GBPS);
        assert!(apply_link_enable(&p, &fast, &plan(1_000 * MB, 4 * MB)).is_used());

        let slow = PathConfig::with_rate(3.0 * GBPS);
        let unchunked = p.clone().with_chunk(1_000 * MB);
        assert_eq!(apply_link_enable(&unchunked, &slow, &plan(1_000 * MB, 1_000 * MB)), Primer::None);

        assert_eq!(apply_link_enable(&p, &fast, &plan(1_100_000, 4 * MB)), Primer::None);
    }

    #[test]
    fn primer_choice() {
        let p = TransportParams::new(TransportKind::FedRdmaE);
        let fast = PathConfig::with_rate(10.0 * GBPS);
        assert_eq!(
            apply_link_enable(&p, &fast, &plan(8 * MB + 3_000, 4 * MB)),
            Primer::LastChunk
        );
        assert_eq!(
            apply_link_enable(&p, &fast, &plan(9 * MB, 4 * MB)),
            Primer::Probe { len: 1500 }
        );

        let mut off = p.clone();
        off.link_enable_policy = LinkEnablePolicy::Off;
        assert_eq!(apply_link_enable(&off, &fast, &plan(9 * MB, 4 * MB)), Primer::None);

        let mut force = p;
        force.link_enable_policy = LinkEnablePolicy::Force;
        let slow = PathConfig::with_rate(GBPS);
        assert!(apply_link_enable(&force, &slow, &plan(1_000, 4 * MB)).is_used());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in TransportKind::ALL {
            assert_eq!(k.name().parse::<TransportKind>().unwrap(), k);
        }
        assert!("Udp".parse::<TransportKind>().is_err());
    }
}
