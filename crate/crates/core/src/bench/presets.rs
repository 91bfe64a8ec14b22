//! Canned experiments that regenerate the evaluation tables.

use std::io::Write;
use std::str::FromStr;

use crate::fl::{lora_payload_bytes, run_federation, FederationConfig, LORA_RANKS};
use crate::protocols::{TransportKind, TransportParams};
use crate::units::{GB, GBPS, MB};
use crate::wan::PathConfig;
use crate::wire::ChunkPlan;

use super::{find_max_and_best_chunk, run_single, BenchError, DEFAULT_CANDIDATES, SEARCH_BYTES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    TableBandwidth,
    TableSyscost,
    TableLora,
    FlE2e,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::TableBandwidth, Preset::TableSyscost, Preset::TableLora, Preset::FlE2e];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TableBandwidth => "table-bandwidth",
            Preset::TableSyscost => "table-syscost",
            Preset::TableLora => "table-lora",
            Preset::FlE2e => "fl-e2e",
        }
    }
}

impl FromStr for Preset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| BenchError::UnknownPreset(s.to_string()))
    }
}

/// A small CSV table with its own columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn yes_no(b: bool) -> String {
    if b { "YES" } else { "NO" }.to_string()
}

fn path_at(rate: f64, seed: u64) -> PathConfig {
    PathConfig {
        seed,
        ..PathConfig::with_rate(rate)
    }
}

/// Bandwidth columns of the table, with the rate each one is evaluated at.
/// Range columns use their upper end.
pub const BANDWIDTH_POINTS: [(&str, f64); 7] = [
    ("1", 1.0),
    ("2", 2.0),
    ("3", 3.0),
    ("4-5", 5.0),
    ("6-9", 9.0),
    ("10", 10.0),
    ("100", 100.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthRow {
    pub label: &'static str,
    pub sender_rate: f64,
    pub max_chunk: u64,
    pub best_chunk: u64,
    pub best_chunk_latency: f64,
    pub link_enable: bool,
    /// 1 GB FedRdmaE latency at default settings: unchunked where the whole
    /// blob fits through, 4 MB chunks otherwise.
    pub latency: f64,
}

pub fn bandwidth_row(label: &'static str, gbps: f64, seed: u64) -> Result<BandwidthRow, BenchError> {
    let path = path_at(gbps * GBPS, seed);
    let params = TransportParams::new(TransportKind::FedRdmaE);
    let search = find_max_and_best_chunk(&path, &DEFAULT_CANDIDATES, &params)?;
    let s = if search.max_chunk >= SEARCH_BYTES { SEARCH_BYTES } else { 4 * MB };
    let r = run_single(&path, &params.clone().with_chunk(s), SEARCH_BYTES, 0.0)?;
    Ok(BandwidthRow {
        label,
        sender_rate: path.sender_rate,
        max_chunk: search.max_chunk,
        best_chunk: search.best_chunk,
        best_chunk_latency: search.best_latency,
        link_enable: r.primer_used,
        latency: r.latency,
    })
}

pub fn bandwidth_table(seed: u64) -> Result<Vec<BandwidthRow>, BenchError> {
    BANDWIDTH_POINTS
        .iter()
        .map(|&(label, gbps)| bandwidth_row(label, gbps, seed))
        .collect()
}

fn size_label(bytes: u64) -> String {
    if bytes >= GB && bytes % GB == 0 {
        format!("{}GB", bytes / GB)
    } else {
        format!("{}MB", bytes / MB)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyscostRow {
    pub transport: TransportKind,
    pub memory_bytes: u64,
    pub time: f64,
    pub power: f64,
    pub energy: f64,
}

/// 1 GB at 10 Gbit/s over TcpLike, FedRdmaV1 and FedRdmaE with defaults.
pub fn syscost_table(seed: u64) -> Result<Vec<SyscostRow>, BenchError> {
    let path = path_at(10.0 * GBPS, seed);
    [TransportKind::TcpLike, TransportKind::FedRdmaV1, TransportKind::FedRdmaE]
        .into_iter()
        .map(|kind| {
            let r = run_single(&path, &TransportParams::new(kind), GB, 0.0)?;
            Ok(SyscostRow {
                transport: kind,
                memory_bytes: r.peak_extra_memory,
                time: r.latency,
                power: r.power,
                energy: r.energy,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoraRow {
    pub rank: u32,
    pub data_bytes: u64,
    pub num_chunks: u32,
    pub link_enable: bool,
    pub tcp_latency: f64,
    pub fedrdma_e_latency: f64,
}

/// Per-rank adapter transfer at 10 Gbit/s, 4 MB chunks.
pub fn lora_table(seed: u64) -> Result<Vec<LoraRow>, BenchError> {
    let path = path_at(10.0 * GBPS, seed);
    LORA_RANKS
        .into_iter()
        .map(|rank| {
            let len = lora_payload_bytes(rank)?;
            let e_params = TransportParams::new(TransportKind::FedRdmaE);
            let e = run_single(&path, &e_params, len, 0.0)?;
            let tcp = run_single(&path, &TransportParams::new(TransportKind::TcpLike), len, 0.0)?;
            Ok(LoraRow {
                rank,
                data_bytes: len,
                num_chunks: ChunkPlan::new(len, e_params.base_chunk_size)
                    .map_err(crate::protocols::ProtocolError::from)?
                    .num_chunks,
                link_enable: e.primer_used,
                tcp_latency: tcp.latency,
                fedrdma_e_latency: e.latency,
            })
        })
        .collect()
}

pub const FL_ROUNDS: u32 = 5;
pub const FL_CLIENTS: u32 = 2;
/// 117 M fp32 parameters.
pub const FL_MODEL_BYTES: u64 = 468_500_000;
pub const FL_COMPUTE_PER_ROUND: f64 = 56.2;
pub const FL_TREND_GBPS: [f64; 4] = [1.0, 2.0, 4.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct FlRow {
    pub transport: TransportKind,
    pub sender_rate: f64,
    pub success: bool,
    pub rounds_completed: u32,
    pub total_traffic: u64,
    pub comm_time: f64,
    pub compute_time: f64,
    pub comm_fraction: f64,
    pub energy: f64,
}

pub fn fl_row(kind: TransportKind, gbps: f64, seed: u64) -> Result<FlRow, BenchError> {
    let mut cfg = FederationConfig::new(
        FL_ROUNDS,
        FL_CLIENTS,
        FL_MODEL_BYTES,
        TransportParams::new(kind),
        path_at(gbps * GBPS, seed),
    );
    cfg.compute_time_per_round = FL_COMPUTE_PER_ROUND;
    let r = run_federation(&cfg)?;
    Ok(FlRow {
        transport: kind,
        sender_rate: cfg.path.sender_rate,
        success: r.result.is_success(),
        rounds_completed: r.rounds_completed,
        total_traffic: r.total_traffic,
        comm_time: r.comm_time,
        compute_time: r.compute_time,
        comm_fraction: r.comm_fraction,
        energy: r.energy,
    })
}

/// Every transport at 10 Gbit/s, then FedRdmaE across [`FL_TREND_GBPS`].
pub fn fl_e2e_table(seed: u64) -> Result<Vec<FlRow>, BenchError> {
    let mut rows = TransportKind::ALL
        .into_iter()
        .map(|k| fl_row(k, 10.0, seed))
        .collect::<Result<Vec<_>, _>>()?;
    for g in FL_TREND_GBPS.into_iter().filter(|&g| g != 10.0) {
        rows.push(fl_row(TransportKind::FedRdmaE, g, seed)?);
    }
    Ok(rows)
}

pub fn run_preset(p: Preset, seed: u64) -> Result<Table, BenchError> {
    Ok(match p {
        Preset::TableBandwidth => Table {
            columns: vec!["bandwidth_gbps", "bandwidth_bps", "max_chunk", "best_chunk", "link_enable", "latency_s"],
            rows: bandwidth_table(seed)?
                .into_iter()
                .map(|r| {
                    vec![
                        r.label.to_string(),
                        format!("{}", r.sender_rate),
                        size_label(r.max_chunk),
                        size_label(r.best_chunk),
                        yes_no(r.link_enable),
                        format!("{:.3}", r.latency),
                    ]
                })
                .collect(),
        },
        Preset::TableSyscost => Table {
            columns: vec!["method", "memory_bytes", "time_s", "power_w", "energy_j"],
            rows: syscost_table(seed)?
                .into_iter()
                .map(|r| {
                    vec![
                        r.transport.to_string(),
                        r.memory_bytes.to_string(),
                        format!("{:.3}", r.time),
                        format!("{}", r.power),
                        format!("{:.3}", r.energy),
                    ]
                })
                .collect(),
        },
        Preset::TableLora => Table {
            columns: vec![
                "lora_rank",
                "data_bytes",
                "num_chunks",
                "link_enable",
                "tcp_latency_s",
                "fedrdma_e_latency_s",
                "reduction",
            ],
            rows: lora_table(seed)?
                .into_iter()
                .map(|r| {
                    vec![
                        r.rank.to_string(),
                        r.data_bytes.to_string(),
                        r.num_chunks.to_string(),
                        yes_no(r.link_enable),
                        format!("{:.3}", r.tcp_latency),
                        format!("{:.3}", r.fedrdma_e_latency),
                        format!("{:.3}", 1.0 - r.fedrdma_e_latency / r.tcp_latency),
                    ]
                })
                .collect(),
        },
        Preset::FlE2e => Table {
            columns: vec![
                "transport",
                "bandwidth_bps",
                "result",
                "rounds_completed",
                "total_traffic_bytes",
                "comm_time_s",
                "compute_time_s",
                "comm_fraction",
                "energy_j",
            ],
            rows: fl_e2e_table(seed)?
                .into_iter()
                .map(|r| {
                    vec![
                        r.transport.to_string(),
                        format!("{}", r.sender_rate),
                        if r.success { "Success" } else { "TransmissionFailure" }.to_string(),
                        r.rounds_completed.to_string(),
                        r.total_traffic.to_string(),
                        format!("{:.3}", r.comm_time),
                        format!("{:.3}", r.compute_time),
                        format!("{:.4}", r.comm_fraction),
                        format!("{:.3}", r.energy),
                    ]
                })
                .collect(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!("table-x".parse::<Preset>(), Err(BenchError::UnknownPreset(_))));
    }

    #[test]
    fn size_labels() {
        assert_eq!(size_label(GB), "1GB");
        assert_eq!(size_label(12 * MB), "12MB");
    }

    #[test]
    fn slow_rate_row_is_unchunked() {
        let r = bandwidth_row("2", 2.0, 0).unwrap();
        assert_eq!((r.max_chunk, r.best_chunk), (GB, GB));
        assert!(!r.link_enable);
    }
}
