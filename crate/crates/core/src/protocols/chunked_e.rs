use crate::gbn::{gbn_send_writes, Payload, Receiver, WriteReq};
use crate::mr::{MemoryRegion, MrError, MrPool};
use crate::wan::Path;
use crate::wire::{crc32, encode_header, Blob, ChunkHeader, ChunkPlan, FLAG_CARRIES_TOTAL, HEADER_LEN};

use super::{apply_link_enable, Primer, ProtocolError, TransferReport, TransportKind, TransportParams};

const WINDOW: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WriteOrder {
    BackToFront,
    #[cfg_attr(not(test), allow(dead_code))]
    FrontToBack,
}

/// Receiver side of a FedRdmaE transfer: the region plus a periodic poll of
/// its first 32 bytes, interleaved with packet arrivals in time order.
struct PollingReceiver<'a> {
    region: &'a mut MemoryRegion,
    period: f64,
    next_poll: f64,
    expected: Option<&'a [u8]>,
    detected_at: Option<f64>,
    sound: Option<bool>,
    decodes: u64,
}

impl PollingReceiver<'_> {
    fn poll(&mut self) {
        let at = self.next_poll;
        self.next_poll += self.period;
        if let Some(h) = self.region.poll_header() {
            self.decodes += 1;
            self.detected_at = Some(at);
            self.sound = self.expected.map(|want| {
                let got = self.region.read(HEADER_LEN as u64, h.total_payload_len);
                matches!(got, Ok(bytes) if bytes == want)
            });
        }
    }

    /// Polls every tick strictly before `t`.
    fn poll_until(&mut self, t: f64) {
        while self.detected_at.is_none() && self.next_poll < t {
            self.poll();
        }
    }
}

impl Receiver for PollingReceiver<'_> {
    fn deliver(&mut self, at: f64, offset: u64, len: u64, data: Option<&[u8]>) -> Result<(), MrError> {
        self.poll_until(at);
        self.region.deliver(at, offset, len, data)
    }
}

/// Chunks written in place into a pooled receive region, last chunk first.
///
/// Chunk `i` lands at `32 + (i - 1) * s`. The single header goes out with
/// chunk 1 as its own trailing segment, so it is the last thing to land: a
/// valid header at offset 0 therefore means the whole payload is present.
/// Each chunk waits for the previous ack; there is no extra pacing delay.
pub fn fedrdma_e_transfer(
    blob: &Blob,
    path: &mut Path,
    params: &TransportParams,
    pool: &mut MrPool,
) -> Result<TransferReport, ProtocolError> {
    run(blob, path, params, pool, WriteOrder::BackToFront)
}

pub(crate) fn run(
    blob: &Blob,
    path: &mut Path,
    params: &TransportParams,
    pool: &mut MrPool,
    order: WriteOrder,
) -> Result<TransferReport, ProtocolError> {
    let hdr = HEADER_LEN as u64;
    let needed = blob.len() + hdr;
    if pool.region_capacity() < needed {
        return Err(ProtocolError::RegionTooSmall {
            capacity: pool.region_capacity(),
            needed,
        });
    }
    let plan = ChunkPlan::new(blob.len(), params.base_chunk_size)?;
    let primer = apply_link_enable(params, &path.cfg, &plan);
    let mut report = TransferReport::new(TransportKind::FedRdmaE, params, blob);
    report.chunk_bytes = params.base_chunk_size;
    report.num_chunks = plan.num_chunks;
    report.primer_used = primer.is_used();
    report.peak_extra_memory = hdr + pool.bookkeeping_bytes();

    let header = ChunkHeader {
        flags: FLAG_CARRIES_TOTAL,
        seq: 1,
        total: plan.num_chunks,
        payload_len: plan.len_of(1) as u32,
        total_payload_len: plan.total_len,
        payload_crc32: blob.crc(),
    };
    let header_bytes = encode_header(&header);
    report.header_ops = 1;

    let t0 = path.state.clock;
    let period = params.poll_period.unwrap_or(path.cfg.rtt / 4.0).max(1e-6);
    let (_, region) = pool.acquire_next();
    let mut rx = PollingReceiver {
        region,
        period,
        next_poll: t0 + period,
        expected: blob.content(),
        detected_at: None,
        sound: None,
        decodes: 0,
    };
    let mut budget = params.retry_limit;

    if let Primer::Probe { len } = primer {
        // lands in the payload area and is overwritten later; offset 0 stays zero
        let len = len.min(rx.region.capacity() - hdr);
        let writes = [WriteReq { offset: hdr, data: Payload::Elided(len) }];
        let out = gbn_send_writes(path, &writes, WINDOW, budget, &mut rx)?;
        budget = report.absorb(&out, budget);
    }

    let seqs: Vec<u32> = match order {
        WriteOrder::BackToFront => (1..=plan.num_chunks).rev().collect(),
        WriteOrder::FrontToBack => (1..=plan.num_chunks).collect(),
    };
    for seq in seqs {
        if !report.is_success() {
            break;
        }
        let start = plan.offset_of(seq);
        let len = plan.len_of(seq);
        let data = match blob.content() {
            Some(c) => Payload::Bytes(&c[start as usize..(start + len) as usize]),
            None => Payload::Elided(len),
        };
        let payload = WriteReq { offset: hdr + start, data };
        let out = if seq == 1 {
            let writes = [payload, WriteReq { offset: 0, data: Payload::Bytes(&header_bytes) }];
            gbn_send_writes(path, &writes, WINDOW, budget, &mut rx)?
        } else {
            gbn_send_writes(path, &[payload], WINDOW, budget, &mut rx)?
        };
        budget = report.absorb(&out, budget);
        path.idle(path.cfg.per_chunk_overhead);
    }

    let sender_done = path.state.clock;
    if report.is_success() {
        rx.poll_until(f64::INFINITY);
        report.header_decodes = rx.decodes;
        report.completion_sound = rx.sound;
        if let (Some(want), Some(h)) = (blob.content(), rx.region.poll_header()) {
            let got = rx.region.read(hdr, h.total_payload_len)?;
            report.delivered_intact = Some(got == want && crc32(got) == h.payload_crc32);
        }
        if let Some(at) = rx.detected_at {
            path.state.clock = sender_done.max(at);
        }
    }
    report.finish(path.state.clock - t0);
    Ok(report)
}
