//! Go-Back-N reliable delivery of one-sided writes over a [`Path`].
//!
//! [`GbnState`] is the pure sender state machine; [`gbn_send_writes`] drives
//! it against the path model with cumulative ACKs and a single
//! retransmission timer. The receiver accepts only the next expected packet
//! and discards anything out of order, so every loss costs the lost packet
//! plus everything sent after it.

use std::collections::VecDeque;

use thiserror::Error;

use crate::mr::MrError;
use crate::wan::Path;

pub const DEFAULT_RETRY_LIMIT: u32 = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GbnError {
    #[error("ack {ack} outside the acceptable range (base {base}, sent {high_water})")]
    ProtocolViolation { ack: u64, base: u64, high_water: u64 },
    #[error("timeout fired with nothing outstanding")]
    SpuriousTimeout,
    #[error("window must be at least 1")]
    ZeroWindow,
    #[error("receiver rejected a write: {0}")]
    Receiver(#[from] MrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbnEvent {
    /// Cumulative ack: packets `0..=k` have been received.
    Ack(u64),
    Timeout,
    /// The link can take another packet.
    SendCredit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbnAction {
    Transmit { seq: u64, retransmit: bool },
    Idle,
    Advanced,
    Duplicate,
    Complete,
    Rewound { to: u64 },
    Fail,
}

/// Sender-side Go-Back-N state. Packet numbers are 0-based.
///
/// The retry budget covers the whole transfer: a timeout burns one retry and
/// ACK progress does not refill it.
#[derive(Debug, Clone, PartialEq)]
pub struct GbnState {
    pub base: u64,
    pub next_seq: u64,
    /// One past the highest packet ever transmitted.
    pub high_water: u64,
    pub total: u64,
    pub window: u64,
    pub retries_remaining: u32,
    pub timer_deadline: Option<f64>,
    pub timeout: f64,
}

impl GbnState {
    pub fn new(total: u64, window: u64, retry_limit: u32, timeout: f64) -> Self {
        Self {
            base: 0,
            next_seq: 0,
            high_water: 0,
            total,
            window: window.max(1),
            retries_remaining: retry_limit,
            timer_deadline: None,
            timeout,
        }
    }

    pub fn can_send(&self) -> bool {
        self.next_seq < self.total && self.next_seq < self.base.saturating_add(self.window)
    }

    pub fn is_complete(&self) -> bool {
        self.base == self.total
    }

    pub fn step(&mut self, now: f64, event: GbnEvent) -> Result<GbnAction, GbnError> {
        match event {
            GbnEvent::Ack(k) => {
                if k.saturating_add(1) == self.base {
                    return Ok(GbnAction::Duplicate);
                }
                if k < self.base || k >= self.high_water {
                    return Err(GbnError::ProtocolViolation {
                        ack: k,
                        base: self.base,
                        high_water: self.high_water,
                    });
                }
                self.base = k + 1;
                // acks for packets sent before a rewind can overtake next_seq
                self.next_seq = self.next_seq.max(self.base);
                if self.is_complete() {
                    self.timer_deadline = None;
                    return Ok(GbnAction::Complete);
                }
                self.timer_deadline = (self.base < self.next_seq).then_some(now + self.timeout);
                Ok(GbnAction::Advanced)
            }
            GbnEvent::Timeout => {
                if self.timer_deadline.is_none() {
                    return Err(GbnError::SpuriousTimeout);
                }
                if self.retries_remaining == 0 {
                    self.timer_deadline = None;
                    return Ok(GbnAction::Fail);
                }
                self.retries_remaining -= 1;
                self.next_seq = self.base;
                self.timer_deadline = None;
                Ok(GbnAction::Rewound { to: self.base })
            }
            GbnEvent::SendCredit => {
                if !self.can_send() {
                    return Ok(GbnAction::Idle);
                }
                let seq = self.next_seq;
                let retransmit = seq < self.high_water;
                self.next_seq += 1;
                self.high_water = self.high_water.max(self.next_seq);
                if self.timer_deadline.is_none() {
                    self.timer_deadline = Some(now + self.timeout);
                }
                Ok(GbnAction::Transmit { seq, retransmit })
            }
        }
    }
}

/// Payload of one write: real bytes, or only a length for timing-only runs.
#[derive(Debug, Clone, Copy)]
pub enum Payload<'a> {
    Bytes(&'a [u8]),
    Elided(u64),
}

impl Payload<'_> {
    pub fn len(&self) -> u64 {
        match self {
            Payload::Bytes(b) => b.len() as u64,
            Payload::Elided(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A one-sided write of `data` at `offset` in the remote region.
#[derive(Debug, Clone, Copy)]
pub struct WriteReq<'a> {
    pub offset: u64,
    pub data: Payload<'a>,
}

/// Where accepted packets land. `at` is the arrival time at the receiver;
/// `data` is `None` for elided payloads.
pub trait Receiver {
    fn deliver(&mut self, at: f64, offset: u64, len: u64, data: Option<&[u8]>) -> Result<(), MrError>;
}

/// An MTU-sized piece of a write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub offset: u64,
    pub len: u64,
    pub seq: u64,
    write: usize,
    start: u64,
}

/// Splits writes into packets of at most `mtu` payload bytes. A zero-length
/// write still takes one (header-only) packet.
pub fn segment_writes(writes: &[WriteReq<'_>], mtu: u64) -> Vec<Segment> {
    let mut out = Vec::new();
    for (w, req) in writes.iter().enumerate() {
        let len = req.data.len();
        let mut start = 0;
        loop {
            let n = (len - start).min(mtu);
            out.push(Segment {
                offset: req.offset + start,
                len: n,
                seq: out.len() as u64,
                write: w,
                start,
            });
            start += n;
            if start >= len {
                break;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferResult {
    Success,
    TransmissionFailure,
}

impl TransferResult {
    pub fn is_success(self) -> bool {
        self == TransferResult::Success
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutcome {
    pub result: TransferResult,
    pub latency: f64,
    pub bytes_on_wire: u64,
    pub retransmissions: u64,
    pub retransmitted_bytes: u64,
    pub drops: u64,
    /// Largest number of sent-but-unacked payload bytes at any instant.
    pub peak_unacked_bytes: u64,
    pub packets: u64,
    /// Timeouts that burned a retry.
    pub retries_used: u32,
}

/// Sends `writes` as one packet stream, starting at the path clock, and
/// returns when the last packet is acked or the retry budget is spent.
/// On return the path clock sits at the completion (or failure) instant.
pub fn gbn_send_writes(
    path: &mut Path,
    writes: &[WriteReq<'_>],
    window: u64,
    retry_limit: u32,
    rx: &mut dyn Receiver,
) -> Result<TransferOutcome, GbnError> {
    if window == 0 {
        return Err(GbnError::ZeroWindow);
    }
    let cfg = path.cfg.clone();
    let segs = segment_writes(writes, cfg.mtu);
    let mut prefix = Vec::with_capacity(segs.len() + 1);
    prefix.push(0u64);
    for s in &segs {
        prefix.push(prefix.last().unwrap() + s.len);
    }

    let t0 = path.state.clock;
    let drops_before = path.state.drops;
    let mut gbn = GbnState::new(segs.len() as u64, window, retry_limit, cfg.ack_timeout);
    let mut now = t0;
    let mut link_free = t0;
    let mut acks: VecDeque<(f64, u64)> = VecDeque::new();
    let mut rx_expected = 0u64;

    let mut bytes_on_wire = 0u64;
    let mut retransmissions = 0u64;
    let mut retransmitted_bytes = 0u64;
    let mut peak_unacked = 0u64;
    let mut packets = 0u64;

    let result = loop {
        let ack_at = acks.front().map(|a| a.0);
        let send_at = gbn.can_send().then(|| link_free.max(now));
        let timer_at = gbn.timer_deadline;

        // ties resolve ack, then timer, then send
        let earliest = [ack_at, timer_at, send_at]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
        if !earliest.is_finite() {
            // nothing outstanding, nothing to send: only reachable when complete
            break TransferResult::Success;
        }
        now = earliest;

        if ack_at == Some(earliest) {
            let (_, k) = acks.pop_front().unwrap();
            match gbn.step(now, GbnEvent::Ack(k))? {
                GbnAction::Complete => break TransferResult::Success,
                _ => continue,
            }
        }
        if timer_at == Some(earliest) {
            match gbn.step(now, GbnEvent::Timeout)? {
                GbnAction::Fail => break TransferResult::TransmissionFailure,
                _ => continue,
            }
        }

        let GbnAction::Transmit { seq, retransmit } = gbn.step(now, GbnEvent::SendCredit)? else {
            continue;
        };
        let seg = segs[seq as usize];
        let wire = cfg.wire_bytes(seg.len);
        let t_end = now + cfg.serialization(wire);
        link_free = t_end;
        packets += 1;
        bytes_on_wire += wire;
        if retransmit {
            retransmissions += 1;
            retransmitted_bytes += wire;
        }
        peak_unacked = peak_unacked.max(prefix[gbn.next_seq as usize] - prefix[gbn.base as usize]);

        if path.transmit(t_end, seq, seg.offset, seg.len) && seq == rx_expected {
            let arrival = t_end + cfg.one_way();
            let data = match writes[seg.write].data {
                Payload::Bytes(b) => Some(&b[seg.start as usize..(seg.start + seg.len) as usize]),
                Payload::Elided(_) => None,
            };
            rx.deliver(arrival, seg.offset, seg.len, data)?;
            rx_expected += 1;
            acks.push_back((arrival + cfg.one_way(), seq));
        }
    };

    path.state.clock = now;
    let drops = path.state.drops - drops_before;
    if result.is_success() && drops == 0 {
        path.state.warmed = true;
    }
    Ok(TransferOutcome {
        result,
        latency: now - t0,
        bytes_on_wire,
        retransmissions,
        retransmitted_bytes,
        drops,
        peak_unacked_bytes: peak_unacked,
        packets,
        retries_used: retry_limit - gbn.retries_remaining,
    })
}

/// Writes `data` at `dest_offset` of the receiver with an unbounded-by-default
/// window of `window` packets.
pub fn gbn_send(
    path: &mut Path,
    dest_offset: u64,
    data: &[u8],
    window: u64,
    retry_limit: u32,
    rx: &mut dyn Receiver,
) -> Result<TransferOutcome, GbnError> {
    let writes = [WriteReq {
        offset: dest_offset,
        data: Payload::Bytes(data),
    }];
    gbn_send_writes(path, &writes, window, retry_limit, rx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ack_of_last_outstanding_completes() {
        let mut s = GbnState::new(3, 8, 7, 1.0);
        for _ in 0..3 {
            s.step(0.0, GbnEvent::SendCredit).unwrap();
        }
        assert_eq!(s.step(0.1, GbnEvent::Ack(0)).unwrap(), GbnAction::Advanced);
        assert_eq!(s.step(0.2, GbnEvent::Ack(1)).unwrap(), GbnAction::Advanced);
        assert_eq!(s.base, s.next_seq - 1);
        assert_eq!(s.step(0.3, GbnEvent::Ack(2)).unwrap(), GbnAction::Complete);
        assert_eq!(s.timer_deadline, None);
    }

    #[test]
    fn timeout_without_retries_fails() {
        let mut s = GbnState::new(3, 8, 0, 1.0);
        s.step(0.0, GbnEvent::SendCredit).unwrap();
        assert_eq!(s.step(1.0, GbnEvent::Timeout).unwrap(), GbnAction::Fail);
    }

    #[test]
    fn timeout_rewinds_and_burns_a_retry() {
        let mut s = GbnState::new(5, 8, 2, 1.0);
        for _ in 0..5 {
            s.step(0.0, GbnEvent::SendCredit).unwrap();
        }
        s.step(0.5, GbnEvent::Ack(1)).unwrap();
        assert_eq!(s.step(1.5, GbnEvent::Timeout).unwrap(), GbnAction::Rewound { to: 2 });
        assert_eq!((s.next_seq, s.retries_remaining), (2, 1));
        assert_eq!(
            s.step(1.5, GbnEvent::SendCredit).unwrap(),
            GbnAction::Transmit {
                seq: 2,
                retransmit: true
            }
        );
    }

    #[test]
    fn stale_and_future_acks_are_violations() {
        let mut s = GbnState::new(10, 10, 7, 1.0);
        for _ in 0..6 {
            s.step(0.0, GbnEvent::SendCredit).unwrap();
        }
        s.step(0.1, GbnEvent::Ack(3)).unwrap();
        assert_eq!(s.base, 4);
        assert_eq!(s.step(0.2, GbnEvent::Ack(3)).unwrap(), GbnAction::Duplicate);
        assert!(matches!(
            s.step(0.2, GbnEvent::Ack(1)),
            Err(GbnError::ProtocolViolation { .. })
        ));
        assert!(matches!(
            s.step(0.2, GbnEvent::Ack(6)),
            Err(GbnError::ProtocolViolation { .. })
        ));
    }

    #[test]
    fn window_limits_sending() {
        let mut s = GbnState::new(10, 2, 7, 1.0);
        assert!(matches!(s.step(0.0, GbnEvent::SendCredit).unwrap(), GbnAction::Transmit { .. }));
        assert!(matches!(s.step(0.0, GbnEvent::SendCredit).unwrap(), GbnAction::Transmit { .. }));
        assert_eq!(s.step(0.0, GbnEvent::SendCredit).unwrap(), GbnAction::Idle);
        s.step(0.1, GbnEvent::Ack(0)).unwrap();
        assert!(s.can_send());
    }

    #[test]
    fn segmentation() {
        let data = vec![0u8; 3001];
        let writes = [
            WriteReq {
                offset: 100,
                data: Payload::Bytes(&data),
            },
            WriteReq {
                offset: 0,
                data: Payload::Elided(0),
            },
        ];
        let segs = segment_writes(&writes, 1500);
        let shape: Vec<_> = segs.iter().map(|s| (s.offset, s.len)).collect();
        assert_eq!(shape, [(100, 1500), (1600, 1500), (3100, 1), (0, 0)]);
    }
}
