use crate::gbn::{gbn_send_writes, Payload, WriteReq};
use crate::mr::register_mr;
use crate::wan::Path;
use crate::wire::{Blob, HEADER_LEN};

use super::{ProtocolError, TransferReport, TransportKind, TransportParams};

/// The whole blob as a single one-sided write, blasted at line rate with an
/// unbounded Go-Back-N window.
pub fn naive_rdma_transfer(
    blob: &Blob,
    path: &mut Path,
    params: &TransportParams,
) -> Result<TransferReport, ProtocolError> {
    let mut report = TransferReport::new(TransportKind::NaiveRdma, params, blob);
    let mut region = register_mr(blob.len().max(HEADER_LEN as u64))?;
    let data = match blob.content() {
        Some(bytes) => Payload::Bytes(bytes),
        None => Payload::Elided(blob.len()),
    };
    let t0 = path.state.clock;
    let out = gbn_send_writes(
        path,
        &[WriteReq { offset: 0, data }],
        u64::MAX,
        params.retry_limit,
        &mut region,
    )?;
    report.absorb(&out, params.retry_limit);
    if report.is_success() {
        report.delivered_intact = blob
            .content()
            .map(|bytes| region.read(0, blob.len()).map(|got| got == bytes))
            .transpose()?;
    }
    report.finish(path.state.clock - t0);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{GBPS, MB};
    use crate::wan::PathConfig;

    #[test]
    fn slow_sender_succeeds() {
        let mut path = Path::new(PathConfig::with_rate(2.0 * GBPS)).unwrap();
        let blob = Blob::random(3 * MB as usize, 4);
        let params = TransportParams::new(TransportKind::NaiveRdma);
        let r = naive_rdma_transfer(&blob, &mut path, &params).unwrap();
        assert!(r.is_success());
        assert_eq!(r.retransmissions, 0);
        assert_eq!(r.delivered_intact, Some(true));
        assert_eq!(r.header_ops, 0);
    }

    #[test]
    fn empty_blob_is_one_header_only_packet() {
        let mut path = Path::new(PathConfig::default()).unwrap();
        let params = TransportParams::new(TransportKind::NaiveRdma);
        let r = naive_rdma_transfer(&Blob::from_bytes(vec![]), &mut path, &params).unwrap();
        assert!(r.is_success());
        assert_eq!(r.bytes_on_wire, path.cfg.packet_framing);
        assert!((r.latency - path.cfg.rtt).abs() < 1e-6);
    }
}
