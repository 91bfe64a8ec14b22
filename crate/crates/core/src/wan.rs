//! Deterministic model of a WAN path: a rate-limited sender, symmetric
//! propagation delay, and one burst-absorbing bottleneck node with tail
//! drop and a cold-start state.
//!
//! The bottleneck is a fluid reservoir. Injected bytes fill it, it empties
//! at `bottleneck_drain_rate`, and a packet that would overflow the current
//! capacity is dropped. Admitted packets are forwarded without queueing
//! delay, so the node behaves like a token-bucket policer: it decides
//! *whether* traffic passes, while timing is set by sender serialization
//! plus propagation. An unprimed node only offers `cold_buffer`; a
//! drop-free burst primes it and unlocks `bottleneck_buffer`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{GBPS, MIB};

// float slack when comparing fluid occupancy against capacity
const FLUID_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("invalid path config: {0}")]
    InvalidConfig(&'static str),
    #[error("chunk size must be positive")]
    ZeroChunkSize,
    #[error("bandwidth must be positive")]
    ZeroBandwidth,
}

/// Path parameters. Rates are bits/s, times seconds, sizes bytes.
///
/// The defaults are calibration choices for a 20 ms RTT cross-domain path:
/// a 3.5 Gbit/s drain with a 4 MiB reservoir (1 MiB while cold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathConfig {
    pub sender_rate: f64,
    pub rtt: f64,
    pub bottleneck_drain_rate: f64,
    pub bottleneck_buffer: u64,
    pub cold_buffer: u64,
    pub mtu: u64,
    /// Per-packet header bytes on the wire (Ethernet + IPv4 + UDP + BTH + ICRC + FCS).
    pub packet_framing: u64,
    pub ack_timeout: f64,
    pub per_chunk_overhead: f64,
    pub seed: u64,
}

impl Default for PathConfig {
    fn default() -> Self {
        let rtt = 0.020;
        Self {
            sender_rate: 10.0 * GBPS,
            rtt,
            bottleneck_drain_rate: 3.5 * GBPS,
            bottleneck_buffer: 4 * MIB,
            cold_buffer: MIB,
            mtu: 1500,
            packet_framing: 62,
            ack_timeout: 3.0 * rtt,
            per_chunk_overhead: 0.0,
            seed: 0,
        }
    }
}

impl PathConfig {
    pub fn with_rate(sender_rate: f64) -> Self {
        Self {
            sender_rate,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PathError> {
        let bad = PathError::InvalidConfig;
        if !(self.sender_rate > 0.0) {
            return Err(bad("sender_rate must be positive"));
        }
        if !(self.bottleneck_drain_rate > 0.0) {
            return Err(bad("bottleneck_drain_rate must be positive"));
        }
        if !(self.rtt >= 0.0) || !(self.ack_timeout > 0.0) || !(self.per_chunk_overhead >= 0.0) {
            return Err(bad("rtt, ack_timeout and per_chunk_overhead must be non-negative"));
        }
        if self.mtu < 64 {
            return Err(bad("mtu must be at least 64"));
        }
        if self.cold_buffer < self.mtu + self.packet_framing {
            return Err(bad("cold_buffer must hold one full packet"));
        }
        if self.bottleneck_buffer < self.cold_buffer {
            return Err(bad("bottleneck_buffer must be at least cold_buffer"));
        }
        Ok(())
    }

    pub fn one_way(&self) -> f64 {
        self.rtt / 2.0
    }

    pub fn wire_bytes(&self, payload: u64) -> u64 {
        payload + self.packet_framing
    }

    /// Seconds to serialize `bytes` at the sender rate.
    pub fn serialization(&self, bytes: u64) -> f64 {
        bytes as f64 * 8.0 / self.sender_rate
    }
}

/// Mutable condition of the path between events.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathState {
    /// Earliest time the next transfer may start.
    pub clock: f64,
    /// Fluid reservoir level in bytes, valid at `queue_stamp`.
    pub queue_occupancy: f64,
    pub queue_stamp: f64,
    pub warmed: bool,
    /// Packets dropped.
    pub drops: u64,
    pub dropped_bytes: u64,
    pub delivered_bytes: u64,
    pub injected_bytes: u64,
}

impl PathState {
    pub fn effective_buffer(&self, cfg: &PathConfig) -> u64 {
        if self.warmed {
            cfg.bottleneck_buffer
        } else {
            cfg.cold_buffer
        }
    }

    fn drain_to(&mut self, cfg: &PathConfig, t: f64) {
        if t > self.queue_stamp {
            let drained = (t - self.queue_stamp) * cfg.bottleneck_drain_rate / 8.0;
            self.queue_occupancy = (self.queue_occupancy - drained).max(0.0);
            self.queue_stamp = t;
        }
    }

    /// Offers one packet of `wire` bytes, fully injected at time `t`.
    /// Returns whether the node admitted it.
    pub fn offer(&mut self, cfg: &PathConfig, t: f64, wire: u64) -> bool {
        self.drain_to(cfg, t);
        self.injected_bytes += wire;
        let cap = self.effective_buffer(cfg) as f64;
        if self.queue_occupancy + wire as f64 <= cap + FLUID_EPS {
            self.queue_occupancy += wire as f64;
            self.delivered_bytes += wire;
            true
        } else {
            self.drops += 1;
            self.dropped_bytes += wire;
            false
        }
    }

    /// Records a packet lost to injected impairment (not the node).
    pub fn record_impairment(&mut self, wire: u64) {
        self.injected_bytes += wire;
        self.drops += 1;
        self.dropped_bytes += wire;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstOutcome {
    pub dropped: f64,
    /// Time from injection start until the last admitted byte reaches the receiver.
    pub completion_time: f64,
}

/// Closed-form fluid evaluation of one burst of `burst_len` bytes injected at
/// `sender_rate` starting at `st.clock`.
pub fn path_burst(cfg: &PathConfig, st: &PathState, burst_len: u64) -> (PathState, BurstOutcome) {
    let mut next = st.clone();
    next.drain_to(cfg, st.clock);
    let injection = cfg.serialization(burst_len);
    let len = burst_len as f64;
    let cap = next.effective_buffer(cfg) as f64;
    let ratio = cfg.bottleneck_drain_rate / cfg.sender_rate;

    let dropped = if ratio >= 1.0 {
        next.queue_occupancy = (next.queue_occupancy - len * (ratio - 1.0)).max(0.0);
        0.0
    } else {
        let fill_per_byte = 1.0 - ratio;
        let space = (cap - next.queue_occupancy).max(0.0);
        let peak = len * fill_per_byte;
        if peak <= space + FLUID_EPS {
            next.queue_occupancy += peak;
            0.0
        } else {
            next.queue_occupancy = cap;
            peak - space
        }
    };

    next.queue_stamp = st.clock + injection;
    next.clock = st.clock + injection;
    next.injected_bytes += burst_len;
    next.dropped_bytes += dropped.round() as u64;
    next.delivered_bytes += burst_len - dropped.round() as u64;
    (
        next,
        BurstOutcome {
            dropped,
            completion_time: injection + cfg.one_way(),
        },
    )
}

/// Sends a primer burst over the path. The node counts as primed once the
/// primer crosses it without loss.
pub fn warm_up(cfg: &PathConfig, st: &PathState, primer_len: u64) -> (PathState, BurstOutcome) {
    let (mut next, outcome) = path_burst(cfg, st, primer_len);
    if outcome.dropped <= 0.0 {
        next.warmed = true;
    }
    (next, outcome)
}

/// Latency of an ACK-gated, one-chunk-in-flight transfer with no pipelining:
/// each chunk costs its serialization plus one round trip plus a fixed
/// per-chunk overhead; the last chunk is prorated.
pub fn analytic_chunked_latency(
    total: u64,
    s: u64,
    bw: f64,
    rtt: f64,
    per_chunk_overhead: f64,
) -> Result<f64, PathError> {
    if s == 0 {
        return Err(PathError::ZeroChunkSize);
    }
    if !(bw > 0.0) {
        return Err(PathError::ZeroBandwidth);
    }
    let n = total.div_ceil(s).max(1);
    let last = total - (n - 1) * s;
    let per = |bytes: u64| bytes as f64 * 8.0 / bw + rtt + per_chunk_overhead;
    Ok((n - 1) as f64 * per(s) + per(last))
}

/// Impairment applied before the bottleneck, on top of node drops.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LossModel {
    #[default]
    None,
    /// Drop the listed packet transmissions, numbered from 0 across the
    /// lifetime of the path.
    Scripted(BTreeSet<u64>),
    /// Independent loss with the given probability, drawn from the path seed.
    Bernoulli(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub seq: u64,
    pub offset: u64,
    pub len: u64,
    pub wire_bytes: u64,
    pub dropped: bool,
}

/// One simulation instance: configuration, evolving state, impairment, and
/// an optional transmission trace.
#[derive(Debug, Clone)]
pub struct Path {
    pub cfg: PathConfig,
    pub state: PathState,
    loss: LossModel,
    rng: ChaCha8Rng,
    transmissions: u64,
    trace: Option<Vec<TraceEvent>>,
}

impl Path {
    pub fn new(cfg: PathConfig) -> Result<Self, PathError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self {
            cfg,
            state: PathState::default(),
            loss: LossModel::None,
            rng,
            transmissions: 0,
            trace: None,
        })
    }

    pub fn with_loss(mut self, loss: LossModel) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Puts one packet on the wire, fully serialized at `t_end`. Returns
    /// true when it survives impairment and the bottleneck.
    pub(crate) fn transmit(&mut self, t_end: f64, seq: u64, offset: u64, len: u64) -> bool {
        let idx = self.transmissions;
        self.transmissions += 1;
        let wire = self.cfg.wire_bytes(len);
        let impaired = match &self.loss {
            LossModel::None => false,
            LossModel::Scripted(set) => set.contains(&idx),
            LossModel::Bernoulli(p) => self.rng.gen_bool(p.clamp(0.0, 1.0)),
        };
        let admitted = if impaired {
            self.state.record_impairment(wire);
            false
        } else {
            self.state.offer(&self.cfg, t_end, wire)
        };
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent {
                time: t_end,
                seq,
                offset,
                len,
                wire_bytes: wire,
                dropped: !admitted,
            });
        }
        admitted
    }

    /// Lets the path sit idle for `secs`.
    pub fn idle(&mut self, secs: f64) {
        self.state.clock += secs;
    }
}
