use crate::gbn::{gbn_send_writes, Payload, WriteReq};
use crate::mr::register_mr;
use crate::wan::Path;
use crate::wire::{
    crc32, decode_header, encode_header, reassemble, Blob, Chunk, ChunkHeader, ChunkPlan,
    FLAG_CARRIES_TOTAL, FLAG_PRIMER, HEADER_LEN,
};

use super::{apply_link_enable, Primer, ProtocolError, TransferReport, TransportKind, TransportParams};

const WINDOW: u64 = u64::MAX;

/// Split, frame every chunk with its own header, send one chunk at a time
/// (the next only after the previous is acked and `artificial_delay` has
/// passed), and reassemble from a receiver-side temporary store.
pub fn fedrdma_v1_transfer(
    blob: &Blob,
    path: &mut Path,
    params: &TransportParams,
) -> Result<TransferReport, ProtocolError> {
    let plan = ChunkPlan::new(blob.len(), params.base_chunk_size)?;
    let primer = apply_link_enable(params, &path.cfg, &plan);
    let mut report = TransferReport::new(TransportKind::FedRdmaV1, params, blob);
    report.chunk_bytes = params.base_chunk_size;
    report.num_chunks = plan.num_chunks;
    report.primer_used = primer.is_used();

    let hdr = HEADER_LEN as u64;
    let probe_len = match primer {
        Primer::Probe { len } => len.max(hdr),
        _ => 0,
    };
    // the receiver's landing area for one framed chunk
    let mut staging = register_mr((plan.max_chunk_len() + hdr).max(probe_len))?;
    let mut store: Vec<Chunk> = Vec::new();
    let mut stored_bytes = 0u64;

    let t0 = path.state.clock;
    // one retry budget for the whole transfer, shared by every chunk
    let mut budget = params.retry_limit;

    if let Primer::Probe { .. } = primer {
        let probe = ChunkHeader {
            flags: FLAG_PRIMER,
            seq: 1,
            total: 1,
            payload_len: (probe_len - hdr) as u32,
            total_payload_len: probe_len - hdr,
            payload_crc32: crc32(&vec![0u8; (probe_len - hdr) as usize]),
        };
        // a constant frame, not a chunk header, so it is not counted in header_ops
        let frame = encode_header(&probe);
        let writes = [
            WriteReq { offset: 0, data: Payload::Bytes(&frame) },
            WriteReq { offset: hdr, data: Payload::Elided(probe_len - hdr) },
        ];
        let out = gbn_send_writes(path, &writes, WINDOW, budget, &mut staging)?;
        budget = report.absorb(&out, budget);
    }

    let order: Vec<u32> = if primer == Primer::LastChunk {
        std::iter::once(plan.num_chunks).chain(1..plan.num_chunks).collect()
    } else {
        (1..=plan.num_chunks).collect()
    };

    let last = order.last().copied();
    for seq in order {
        if !report.is_success() {
            break;
        }
        let start = plan.offset_of(seq);
        let len = plan.len_of(seq);
        let payload = blob.content().map(|c| &c[start as usize..(start + len) as usize]);
        let header = ChunkHeader {
            flags: FLAG_CARRIES_TOTAL,
            seq,
            total: plan.num_chunks,
            payload_len: len as u32,
            total_payload_len: plan.total_len,
            payload_crc32: payload.map_or(0, crc32),
        };
        let frame_header = encode_header(&header);
        report.header_ops += 1;

        let writes = [
            WriteReq { offset: 0, data: Payload::Bytes(&frame_header) },
            WriteReq {
                offset: hdr,
                data: payload.map_or(Payload::Elided(len), Payload::Bytes),
            },
        ];
        let out = gbn_send_writes(path, &writes, WINDOW, budget, &mut staging)?;
        budget = report.absorb(&out, budget);
        if !out.result.is_success() {
            break;
        }

        // receiver: parse the header, move the payload into the temp store
        let parsed = decode_header(staging.read(0, hdr)?)?;
        report.header_decodes += 1;
        let body = match payload {
            Some(_) => staging.read(hdr, u64::from(parsed.payload_len))?.to_vec(),
            None => Vec::new(),
        };
        stored_bytes += u64::from(parsed.payload_len) + hdr;
        store.push(Chunk { header: Some(parsed), payload: body });

        let pause = if Some(seq) == last { 0.0 } else { params.artificial_delay };
        path.idle(pause + path.cfg.per_chunk_overhead);
    }

    report.peak_extra_memory = stored_bytes;
    if report.is_success() {
        if let Some(content) = blob.content() {
            let rebuilt = reassemble(store)?;
            report.delivered_intact = Some(rebuilt.content() == Some(content));
        }
    }
    report.finish(path.state.clock - t0);
    Ok(report)
}
