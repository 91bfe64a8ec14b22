//! Benchmark plumbing: scenario files, per-run CSV rows, the chunk-size
//! search, and the table presets.

mod presets;
mod report;
mod scenario;

use std::path::Path as FsPath;

use thiserror::Error;

pub use presets::{
    bandwidth_row, bandwidth_table, fl_e2e_table, fl_row, lora_table, run_preset, syscost_table, BandwidthRow, FlRow,
    LoraRow, Preset,
    SyscostRow, Table, BANDWIDTH_POINTS, FL_CLIENTS, FL_COMPUTE_PER_ROUND, FL_MODEL_BYTES, FL_ROUNDS, FL_TREND_GBPS,
};
pub use report::{parse_rows, rows_to_csv, write_rows, ReportRow, RunResult, COLUMNS};
pub use scenario::{parse_scenarios, FederationWorkload, Scenario, ScenarioFile, SweepAxis, SweepSpec, Workload};

use crate::fl::{run_federation, FlError};
use crate::protocols::{pool_for, transfer, LinkEnablePolicy, ProtocolError, TransferReport, TransportKind, TransportParams};
use crate::units::{GB, MB};
use crate::wan::{LossModel, Path, PathConfig, PathError};
use crate::wire::Blob;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    ConfigParse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Fl(#[from] FlError),
    #[error("no candidate chunk size completes the transfer")]
    NoFeasibleChunk,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// Runs one blob transfer on a fresh path.
pub fn run_single(
    path: &PathConfig,
    params: &TransportParams,
    data_bytes: u64,
    loss_probability: f64,
) -> Result<TransferReport, BenchError> {
    let mut sim = Path::new(path.clone())?;
    if loss_probability > 0.0 {
        sim = sim.with_loss(LossModel::Bernoulli(loss_probability));
    }
    let mut pool = match params.kind {
        TransportKind::FedRdmaE => Some(pool_for(params, data_bytes).map_err(ProtocolError::from)?),
        _ => None,
    };
    Ok(transfer(&Blob::elided(data_bytes), &mut sim, params, pool.as_mut())?)
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// Executes every repetition of every scenario. Repetition `r` runs with
/// seed `base + r`, where `base` is `seed` if given, else the scenario's
/// path seed. Rows come out in scenario, sweep-point, repetition order.
pub fn run_scenarios(scenarios: &[Scenario], seed: Option<u64>) -> Result<Vec<ReportRow>, BenchError> {
    let mut rows = Vec::new();
    for sc in scenarios {
        let base = seed.unwrap_or(sc.path.seed);
        let mut points: Vec<(String, PathConfig, TransportParams, Option<u64>)> = Vec::new();
        match &sc.workload {
            Workload::SingleBlob { data_bytes } => {
                points.push((sc.id.clone(), sc.path.clone(), sc.transport.clone(), Some(*data_bytes)))
            }
            Workload::Federation(_) => points.push((sc.id.clone(), sc.path.clone(), sc.transport.clone(), None)),
            Workload::Sweep(sw) => {
                for &v in &sw.values {
                    let (p, t, len) = sw.apply(v, &sc.path, &sc.transport);
                    points.push((format!("{}@{}={}", sc.id, sw.axis.name(), fmt_value(v)), p, t, Some(len)));
                }
            }
        }
        for (id, path, params, len) in points {
            for rep in 0..sc.repetitions {
                let run_seed = base.wrapping_add(u64::from(rep));
                let cfg = PathConfig { seed: run_seed, ..path.clone() };
                let row = match (&sc.workload, len) {
                    (Workload::Federation(f), _) => {
                        let fc = f.config(cfg.clone(), params.clone());
                        let rep_out = run_federation(&fc)?;
                        let power = fc.nic_power.unwrap_or_else(|| params.power());
                        ReportRow::from_federation(&id, rep, run_seed, &cfg, params.kind, power, &rep_out)
                    }
                    (_, Some(len)) => {
                        let r = run_single(&cfg, &params, len, sc.loss_probability)?;
                        ReportRow::from_transfer(&id, rep, run_seed, &cfg, &r)
                    }
                    (_, None) => unreachable!("only federations lack a blob size"),
                };
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

pub fn load_scenarios(file: &FsPath) -> Result<Vec<Scenario>, BenchError> {
    parse_scenarios(&std::fs::read_to_string(file)?)
}

/// Blob size used by the chunk-size search.
pub const SEARCH_BYTES: u64 = GB;

pub const DEFAULT_CANDIDATES: [u64; 8] = [MB, 2 * MB, 4 * MB, 8 * MB, 12 * MB, 16 * MB, 64 * MB, GB];

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkSearch {
    pub max_chunk: u64,
    pub best_chunk: u64,
    pub best_latency: f64,
    /// Latency per candidate, `None` where the transfer failed.
    pub points: Vec<(u64, Option<f64>)>,
}

/// Tries a 1 GB FedRdmaE transfer with every candidate chunk size (Auto
/// link-enable, otherwise `params`). The max chunk is the largest candidate
/// that succeeds; the best is the fastest success, ties going to the smaller.
pub fn find_max_and_best_chunk(
    path: &PathConfig,
    candidates: &[u64],
    params: &TransportParams,
) -> Result<ChunkSearch, BenchError> {
    if candidates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::ConfigParse("candidates: must be strictly ascending".into()));
    }
    let mut points = Vec::with_capacity(candidates.len());
    for &s in candidates {
        let p = TransportParams {
            kind: TransportKind::FedRdmaE,
            link_enable_policy: LinkEnablePolicy::Auto,
            ..params.clone()
        }
        .with_chunk(s);
        let r = run_single(path, &p, SEARCH_BYTES, 0.0)?;
        points.push((s, r.is_success().then_some(r.latency)));
    }
    let ok = || points.iter().filter_map(|&(s, l)| l.map(|l| (s, l)));
    let max_chunk = ok().map(|(s, _)| s).max().ok_or(BenchError::NoFeasibleChunk)?;
    let (best_chunk, best_latency) = ok()
        .reduce(|best, cur| if cur.1 < best.1 { cur } else { best })
        .ok_or(BenchError::NoFeasibleChunk)?;
    Ok(ChunkSearch {
        max_chunk,
        best_chunk,
        best_latency,
        points,
    })
}
