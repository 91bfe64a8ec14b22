//! Per-run CSV rows.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize, Serializer};

use crate::fl::FederationReport;
use crate::protocols::{TransferReport, TransportKind};
use crate::wan::PathConfig;

use super::BenchError;

pub const COLUMNS: [&str; 18] = [
    "scenario_id",
    "repetition",
    "transport",
    "bandwidth_bps",
    "rtt_s",
    "data_bytes",
    "chunk_bytes",
    "num_chunks",
    "link_enable",
    "result",
    "latency_s",
    "bytes_on_wire",
    "retransmissions",
    "header_ops",
    "peak_extra_memory_bytes",
    "power_w",
    "energy_j",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunResult {
    Success,
    TransmissionFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario_id: String,
    pub repetition: u32,
    pub transport: TransportKind,
    #[serde(serialize_with = "plain")]
    pub bandwidth_bps: f64,
    #[serde(serialize_with = "plain")]
    pub rtt_s: f64,
    pub data_bytes: u64,
    pub chunk_bytes: u64,
    pub num_chunks: u32,
    #[serde(serialize_with = "yes_no", deserialize_with = "parse_yes_no")]
    pub link_enable: bool,
    pub result: RunResult,
    #[serde(serialize_with = "millis")]
    pub latency_s: f64,
    pub bytes_on_wire: u64,
    pub retransmissions: u64,
    pub header_ops: u64,
    pub peak_extra_memory_bytes: u64,
    #[serde(serialize_with = "plain")]
    pub power_w: f64,
    #[serde(serialize_with = "millis")]
    pub energy_j: f64,
    pub seed: u64,
}

// shortest form that parses back to the same value, without a forced ".0"
fn plain<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn millis<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:.3}"))
}

fn yes_no<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(if *v { "YES" } else { "NO" })
}

fn parse_yes_no<'de, D: serde::Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    match String::deserialize(d)?.as_str() {
        "YES" => Ok(true),
        "NO" => Ok(false),
        other => Err(serde::de::Error::custom(format!("link_enable must be YES or NO, got `{other}`"))),
    }
}

fn result_of(ok: bool) -> RunResult {
    if ok {
        RunResult::Success
    } else {
        RunResult::TransmissionFailure
    }
}

impl ReportRow {
    pub fn from_transfer(id: &str, repetition: u32, seed: u64, path: &PathConfig, r: &TransferReport) -> Self {
        Self {
            scenario_id: id.to_string(),
            repetition,
            transport: r.transport,
            bandwidth_bps: path.sender_rate,
            rtt_s: path.rtt,
            data_bytes: r.data_bytes,
            chunk_bytes: r.chunk_bytes,
            num_chunks: r.num_chunks,
            link_enable: r.primer_used,
            result: result_of(r.is_success()),
            latency_s: r.latency,
            bytes_on_wire: r.bytes_on_wire,
            retransmissions: r.retransmissions,
            header_ops: r.header_ops,
            peak_extra_memory_bytes: r.peak_extra_memory,
            power_w: r.power,
            energy_j: r.energy,
            seed,
        }
    }

    /// One row for a whole federation: traffic, communication time and
    /// energy are totals; chunk layout and link-enable describe a single
    /// model transfer; peak memory is the largest of any transfer.
    pub fn from_federation(
        id: &str,
        repetition: u32,
        seed: u64,
        path: &PathConfig,
        kind: TransportKind,
        power: f64,
        f: &FederationReport,
    ) -> Self {
        let first = f.transfers().next();
        let sum = |g: fn(&TransferReport) -> u64| f.transfers().map(g).sum::<u64>();
        Self {
            scenario_id: id.to_string(),
            repetition,
            transport: kind,
            bandwidth_bps: path.sender_rate,
            rtt_s: path.rtt,
            data_bytes: f.total_traffic,
            chunk_bytes: first.map_or(0, |r| r.chunk_bytes),
            num_chunks: first.map_or(0, |r| r.num_chunks),
            link_enable: first.is_some_and(|r| r.primer_used),
            result: result_of(f.result.is_success()),
            latency_s: f.comm_time,
            bytes_on_wire: sum(|r| r.bytes_on_wire),
            retransmissions: sum(|r| r.retransmissions),
            header_ops: sum(|r| r.header_ops),
            peak_extra_memory_bytes: f.transfers().map(|r| r.peak_extra_memory).max().unwrap_or(0),
            power_w: power,
            energy_j: f.energy,
            seed,
        }
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ReportRow]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String, BenchError> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Reads rows written by [`write_rows`]. The header must list exactly [`COLUMNS`].
pub fn parse_rows<R: Read>(input: R) -> Result<Vec<ReportRow>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(BenchError::ConfigParse(format!(
            "report header must be `{}`",
            COLUMNS.join(",")
        )));
    }
    rd.deserialize().map(|r| r.map_err(BenchError::from)).collect()
}
