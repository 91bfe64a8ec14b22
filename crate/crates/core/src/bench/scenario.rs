//! Scenario files.
//!
//! A scenario file is TOML with one or more `[[scenario]]` tables:
//!
//! ```toml
//! [[scenario]]
//! id = "e-10g"
//! repetitions = 3
//! loss_probability = 0.0
//! path = { sender_rate = 10e9, rtt = 0.02 }
//! transport = { kind = "FedRdmaE", base_chunk_size = 4_000_000 }
//! workload = { single_blob = { data_bytes = 1_000_000_000 } }
//! ```
//!
//! `path` and `transport` take any [`PathConfig`] / [`TransportParams`]
//! field and default the rest. `workload` is one of
//!
//! - `{ single_blob = { data_bytes = N } }`
//! - `{ federation = { rounds, clients, model_bytes, compute_time_per_round, nic_power, parallel_clients } }`
//! - `{ sweep = { axis = "sender_rate", values = [...], data_bytes = N } }`
//!
//! Unknown keys anywhere are errors.

use serde::Deserialize;

use crate::fl::FederationConfig;
use crate::protocols::TransportParams;
use crate::wan::PathConfig;

use super::BenchError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub path: PathConfig,
    #[serde(default)]
    pub transport: TransportParams,
    pub workload: Workload,
    #[serde(default = "one")]
    pub repetitions: u32,
    /// Independent per-packet loss on top of bottleneck drops, drawn from the run seed.
    #[serde(default)]
    pub loss_probability: f64,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Workload {
    SingleBlob { data_bytes: u64 },
    Federation(FederationWorkload),
    Sweep(SweepSpec),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationWorkload {
    pub rounds: u32,
    pub clients: u32,
    pub model_bytes: u64,
    #[serde(default)]
    pub compute_time_per_round: f64,
    #[serde(default)]
    pub nic_power: Option<f64>,
    #[serde(default)]
    pub parallel_clients: bool,
}

impl FederationWorkload {
    pub fn config(&self, path: PathConfig, transport: TransportParams) -> FederationConfig {
        FederationConfig {
            rounds: self.rounds,
            clients: self.clients,
            model_bytes: self.model_bytes,
            compute_time_per_round: self.compute_time_per_round,
            transport,
            path,
            nic_power: self.nic_power,
            parallel_clients: self.parallel_clients,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SenderRate,
    Rtt,
    BaseChunkSize,
    DataBytes,
    ArtificialDelay,
    TcpWindow,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SenderRate => "sender_rate",
            SweepAxis::Rtt => "rtt",
            SweepAxis::BaseChunkSize => "base_chunk_size",
            SweepAxis::DataBytes => "data_bytes",
            SweepAxis::ArtificialDelay => "artificial_delay",
            SweepAxis::TcpWindow => "tcp_window",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub data_bytes: u64,
}

impl SweepSpec {
    /// Path, transport and blob size for one sweep point.
    pub fn apply(&self, value: f64, path: &PathConfig, transport: &TransportParams) -> (PathConfig, TransportParams, u64) {
        let (mut p, mut t, mut len) = (path.clone(), transport.clone(), self.data_bytes);
        match self.axis {
            SweepAxis::SenderRate => p.sender_rate = value,
            SweepAxis::Rtt => p.rtt = value,
            SweepAxis::BaseChunkSize => t.base_chunk_size = value as u64,
            SweepAxis::DataBytes => len = value as u64,
            SweepAxis::ArtificialDelay => t.artificial_delay = value,
            SweepAxis::TcpWindow => t.tcp_window = value as u64,
        }
        (p, t, len)
    }
}

impl Scenario {
    fn validate(&self, idx: usize) -> Result<(), BenchError> {
        let key = |k: &str| format!("scenario[{idx}].{k}");
        let bad = |k: &str, msg: String| BenchError::ConfigParse(format!("{}: {msg}", key(k)));
        if self.id.trim().is_empty() {
            return Err(bad("id", "must not be empty".into()));
        }
        if self.repetitions == 0 {
            return Err(bad("repetitions", "must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(bad("loss_probability", "must lie in [0, 1]".into()));
        }
        self.path.validate().map_err(|e| bad("path", e.to_string()))?;
        self.transport.validate().map_err(|e| bad("transport", e.to_string()))?;
        match &self.workload {
            Workload::SingleBlob { .. } => {}
            Workload::Federation(f) => {
                f.config(self.path.clone(), self.transport.clone())
                    .validate()
                    .map_err(|e| bad("workload.federation", e.to_string()))?;
            }
            Workload::Sweep(s) => {
                if s.values.is_empty() {
                    return Err(bad("workload.sweep.values", "must list at least one value".into()));
                }
                for &v in &s.values {
                    let (p, t, _) = s.apply(v, &self.path, &self.transport);
                    if !(v >= 0.0) || p.validate().is_err() || t.validate().is_err() {
                        return Err(bad("workload.sweep.values", format!("{v} is not a valid {}", s.axis.name())));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, BenchError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| BenchError::ConfigParse(e.to_string()))?;
    if file.scenario.is_empty() {
        return Err(BenchError::ConfigParse("scenario: must list at least one scenario".into()));
    }
    for (i, s) in file.scenario.iter().enumerate() {
        s.validate(i)?;
    }
    Ok(file.scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::TransportKind;

    const GOOD: &str = r#"
        [[scenario]]
        id = "a"
        path = { sender_rate = 2e9 }
        transport = { kind = "TcpLike" }
        workload = { single_blob = { data_bytes = 1000 } }

        [[scenario]]
        id = "b"
        repetitions = 2
        workload = { sweep = { axis = "base_chunk_size", values = [1e6, 4e6], data_bytes = 8000000 } }

        [[scenario]]
        id = "c"
        [scenario.workload.federation]
        rounds = 2
        clients = 2
        model_bytes = 10
    "#;

    #[test]
    fn parses_all_workloads() {
        let s = parse_scenarios(GOOD).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].transport.kind, TransportKind::TcpLike);
        assert_eq!(s[0].path.sender_rate, 2e9);
        assert_eq!(s[0].path.rtt, 0.020);
        assert_eq!(s[1].repetitions, 2);
        assert!(matches!(s[1].workload, Workload::Sweep(SweepSpec { axis: SweepAxis::BaseChunkSize, .. })));
        assert!(matches!(s[2].workload, Workload::Federation(FederationWorkload { rounds: 2, .. })));
    }

    #[test]
    fn empty_list_is_an_error() {
        let err = parse_scenarios("scenario = []").unwrap_err();
        assert!(err.to_string().contains("scenario"), "{err}");
        let err = parse_scenarios("").unwrap_err();
        assert!(err.to_string().contains("scenario"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = GOOD.replace("sender_rate = 2e9", "sender_rate = 2e9, drain = 1");
        let err = parse_scenarios(&text).unwrap_err();
        assert!(matches!(err, BenchError::ConfigParse(_)));
        assert!(err.to_string().contains("drain"), "{err}");
    }

    #[test]
    fn invalid_values_name_the_key() {
        let text = GOOD.replace("repetitions = 2", "repetitions = 0");
        assert!(parse_scenarios(&text).unwrap_err().to_string().contains("scenario[1].repetitions"));
        let text = GOOD.replace("id = \"a\"", "id = \"\"");
        assert!(parse_scenarios(&text).unwrap_err().to_string().contains("scenario[0].id"));
        let text = GOOD.replace("[1e6, 4e6]", "[]");
        assert!(parse_scenarios(&text).unwrap_err().to_string().contains("values"));
    }
}
