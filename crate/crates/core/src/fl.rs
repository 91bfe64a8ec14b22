//! FedAvg-shaped communication workload: every round each client downloads
//! the global model and uploads its update. Training itself is a fixed
//! per-round compute time; aggregation is free.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbn::TransferResult;
use crate::mr::MrPool;
use crate::protocols::{pool_for, transfer, ProtocolError, TransferReport, TransportKind, TransportParams};
use crate::wan::{Path, PathConfig, PathError};
use crate::wire::Blob;

pub fn energy(power: f64, duration: f64) -> f64 {
    power * duration
}

/// Per-round LoRA adapter payload, decimal MB, indexed by rank.
const LORA_TABLE: [(u32, f64); 9] = [
    (4, 1.1),
    (8, 2.3),
    (16, 4.5),
    (32, 9.0),
    (64, 18.0),
    (128, 36.0),
    (256, 72.0),
    (512, 144.0),
    (1024, 288.0),
];

pub const LORA_RANKS: [u32; 9] = [4, 8, 16, 32, 64, 128, 256, 512, 1024];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlError {
    #[error("no payload size known for LoRA rank {0}")]
    UnknownRank(u32),
    #[error("invalid federation config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub fn lora_payload_bytes(rank: u32) -> Result<u64, FlError> {
    LORA_TABLE
        .iter()
        .find(|(r, _)| *r == rank)
        .map(|(_, mb)| (mb * 1e6).round() as u64)
        .ok_or(FlError::UnknownRank(rank))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationConfig {
    pub rounds: u32,
    pub clients: u32,
    pub model_bytes: u64,
    #[serde(default)]
    pub compute_time_per_round: f64,
    #[serde(default)]
    pub transport: TransportParams,
    #[serde(default)]
    pub path: PathConfig,
    /// Overrides the transport's NIC power when set.
    #[serde(default)]
    pub nic_power: Option<f64>,
    /// Clients exchange at the same time, each over its own copy of the
    /// path; the round lasts as long as the slowest client.
    #[serde(default)]
    pub parallel_clients: bool,
}

impl FederationConfig {
    pub fn new(rounds: u32, clients: u32, model_bytes: u64, transport: TransportParams, path: PathConfig) -> Self {
        Self {
            rounds,
            clients,
            model_bytes,
            compute_time_per_round: 0.0,
            transport,
            path,
            nic_power: None,
            parallel_clients: false,
        }
    }

    pub fn validate(&self) -> Result<(), FlError> {
        if self.rounds == 0 {
            return Err(FlError::InvalidConfig("rounds must be at least 1"));
        }
        if self.clients == 0 {
            return Err(FlError::InvalidConfig("clients must be at least 1"));
        }
        if !(self.compute_time_per_round >= 0.0) {
            return Err(FlError::InvalidConfig("compute_time_per_round must be non-negative"));
        }
        if matches!(self.nic_power, Some(p) if !(p >= 0.0)) {
            return Err(FlError::InvalidConfig("nic_power must be non-negative"));
        }
        self.path.validate()?;
        self.transport.validate()?;
        Ok(())
    }
}

/// One client's download and upload in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Exchange {
    pub client: u32,
    pub download: TransferReport,
    pub upload: Option<TransferReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationReport {
    pub result: TransferResult,
    pub rounds_completed: u32,
    /// Payload bytes moved by successful transfers.
    pub total_traffic: u64,
    pub comm_time: f64,
    pub compute_time: f64,
    pub comm_fraction: f64,
    pub per_round: Vec<Vec<Exchange>>,
    pub energy: f64,
}

impl FederationReport {
    pub fn transfers(&self) -> impl Iterator<Item = &TransferReport> {
        self.per_round
            .iter()
            .flatten()
            .flat_map(|e| std::iter::once(&e.download).chain(e.upload.as_ref()))
    }
}

/// Runs the federation. A failed transfer ends it early; the report then
/// covers everything up to and including the failure.
pub fn run_federation(cfg: &FederationConfig) -> Result<FederationReport, FlError> {
    cfg.validate()?;
    let mut params = cfg.transport.clone();
    if cfg.nic_power.is_some() {
        params.nic_power = cfg.nic_power;
    }
    let blob = Blob::elided(cfg.model_bytes);
    let needs_pool = params.kind == TransportKind::FedRdmaE;
    let new_pool = || -> Result<Option<MrPool>, FlError> {
        Ok(if needs_pool {
            Some(pool_for(&params, cfg.model_bytes).map_err(ProtocolError::from)?)
        } else {
            None
        })
    };

    // receive pools: one at the server (uploads), one per client (downloads)
    let mut server_pool = new_pool()?;
    let mut client_pools = (0..cfg.clients).map(|_| new_pool()).collect::<Result<Vec<_>, _>>()?;
    let shared = Path::new(cfg.path.clone())?;
    let mut paths: Vec<Path> = if cfg.parallel_clients {
        vec![shared; cfg.clients as usize]
    } else {
        vec![shared]
    };

    let mut report = FederationReport {
        result: TransferResult::Success,
        rounds_completed: 0,
        total_traffic: 0,
        comm_time: 0.0,
        compute_time: 0.0,
        comm_fraction: 0.0,
        per_round: Vec::new(),
        energy: 0.0,
    };

    'rounds: for _ in 0..cfg.rounds {
        let mut exchanges = Vec::new();
        let mut round_comm = 0.0f64;
        for c in 0..cfg.clients as usize {
            let path = if cfg.parallel_clients { &mut paths[c] } else { &mut paths[0] };
            let down = transfer(&blob, path, &params, client_pools[c].as_mut())?;
            let up = if down.is_success() {
                Some(transfer(&blob, path, &params, server_pool.as_mut())?)
            } else {
                None
            };

            let spent = down.latency + up.as_ref().map_or(0.0, |u| u.latency);
            if cfg.parallel_clients {
                round_comm = round_comm.max(spent);
            } else {
                round_comm += spent;
            }
            for r in std::iter::once(&down).chain(up.as_ref()) {
                report.energy += r.energy;
                if r.is_success() {
                    report.total_traffic += r.data_bytes;
                }
            }
            let failed = !down.is_success() || up.as_ref().is_some_and(|u| !u.is_success());
            exchanges.push(Exchange { client: c as u32, download: down, upload: up });
            if failed {
                report.result = TransferResult::TransmissionFailure;
                report.comm_time += round_comm;
                report.per_round.push(exchanges);
                break 'rounds;
            }
        }
        report.comm_time += round_comm;
        report.compute_time += cfg.compute_time_per_round;
        report.per_round.push(exchanges);
        report.rounds_completed += 1;

        // everyone trains; the paths sit idle meanwhile
        let sync = paths.iter().map(|p| p.state.clock).fold(0.0, f64::max);
        for p in &mut paths {
            p.state.clock = sync + cfg.compute_time_per_round;
        }
    }

    let total = report.comm_time + report.compute_time;
    report.comm_fraction = if total > 0.0 { report.comm_time / total } else { 0.0 };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{GBPS, MB};

    #[test]
    fn energy_is_power_times_time() {
        assert!((energy(5.1, 24.6) - 125.46).abs() < 1e-9);
        assert!((energy(18.7, 6.0) - 112.2).abs() < 1e-9);
        assert_eq!(energy(0.0, 123.0), 0.0);
    }

    #[test]
    fn lora_lookup() {
        assert_eq!(lora_payload_bytes(16).unwrap(), 4_500_000);
        assert_eq!(lora_payload_bytes(1024).unwrap(), 288_000_000);
        assert_eq!(lora_payload_bytes(4).unwrap(), 1_100_000);
        assert_eq!(lora_payload_bytes(7), Err(FlError::UnknownRank(7)));
        for r in LORA_RANKS {
            assert!(lora_payload_bytes(r).is_ok());
        }
    }

    #[test]
    fn empty_model_costs_two_round_trips() {
        for kind in TransportKind::ALL {
            let cfg = FederationConfig::new(1, 1, 0, TransportParams::new(kind), PathConfig::default());
            let r = run_federation(&cfg).unwrap();
            assert_eq!(r.total_traffic, 0);
            assert!((r.comm_time - 0.040).abs() < 0.005, "{kind}: {}", r.comm_time);
        }
    }

    #[test]
    fn traffic_identity_and_transport_independence() {
        let mut totals = Vec::new();
        for kind in TransportKind::ALL {
            let mut cfg = FederationConfig::new(3, 2, 2 * MB, TransportParams::new(kind), PathConfig::with_rate(2.0 * GBPS));
            cfg.compute_time_per_round = 1.5;
            let r = run_federation(&cfg).unwrap();
            assert_eq!(r.result, TransferResult::Success);
            assert_eq!(r.total_traffic, 3 * 2 * 2 * 2 * MB);
            assert_eq!(r.per_round.len(), 3);
            assert!((r.compute_time - 4.5).abs() < 1e-12);
            totals.push((r.total_traffic, r.compute_time));
        }
        assert!(totals.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn failure_ends_federation_with_partial_report() {
        let cfg = FederationConfig::new(
            3,
            2,
            1_000 * MB,
            TransportParams::new(TransportKind::NaiveRdma),
            PathConfig::with_rate(10.0 * GBPS),
        );
        let r = run_federation(&cfg).unwrap();
        assert_eq!(r.result, TransferResult::TransmissionFailure);
        assert_eq!(r.rounds_completed, 0);
        assert_eq!(r.per_round.len(), 1);
        assert!(r.per_round[0][0].upload.is_none());
    }

    #[test]
    fn parallel_clients_overlap() {
        let mk = |parallel| {
            let mut cfg = FederationConfig::new(
                2,
                3,
                5 * MB,
                TransportParams::new(TransportKind::FedRdmaE),
                PathConfig::with_rate(2.0 * GBPS),
            );
            cfg.parallel_clients = parallel;
            run_federation(&cfg).unwrap()
        };
        let (seq, par) = (mk(false), mk(true));
        assert_eq!(seq.total_traffic, par.total_traffic);
        assert!(par.comm_time < seq.comm_time / 2.0);
    }

    #[test]
    fn rejects_empty_federation() {
        let cfg = FederationConfig::new(0, 1, 1, TransportParams::default(), PathConfig::default());
        assert!(matches!(run_federation(&cfg), Err(FlError::InvalidConfig(_))));
    }
}
