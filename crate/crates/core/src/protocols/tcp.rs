use crate::gbn::TransferResult;
use crate::wan::Path;
use crate::wire::Blob;

use super::{ProtocolError, TransferReport, TransportKind, TransportParams};

/// Initial congestion window, in MTUs.
const INITIAL_WINDOW_MTUS: u64 = 10;

/// Window-limited stream model of a TCP-derived RPC channel.
///
/// The congestion window starts at ten MTUs and doubles every RTT until it
/// reaches `tcp_window`; from then on goodput is the smaller of the sender
/// rate and one window per RTT. Loss recovery is abstracted away, so the
/// transfer always completes.
pub fn tcp_like_transfer(
    blob: &Blob,
    path: &mut Path,
    params: &TransportParams,
) -> Result<TransferReport, ProtocolError> {
    if params.tcp_window == 0 {
        return Err(ProtocolError::InvalidParams("tcp_window must be positive"));
    }
    let cfg = &path.cfg;
    let mut report = TransferReport::new(TransportKind::TcpLike, params, blob);

    let line_rate = params
        .pacing_rate
        .map_or(cfg.sender_rate, |cap| cap.min(cfg.sender_rate));
    let window_rate = if cfg.rtt > 0.0 {
        params.tcp_window as f64 * 8.0 / cfg.rtt
    } else {
        f64::INFINITY
    };
    let goodput = line_rate.min(window_rate);

    let mut remaining = blob.len();
    let mut cwnd = INITIAL_WINDOW_MTUS * cfg.mtu;
    let mut elapsed = 0.0;
    while remaining > 0 && cwnd < params.tcp_window {
        let sent = cwnd.min(remaining);
        elapsed += cfg.rtt.max(sent as f64 * 8.0 / line_rate);
        remaining -= sent;
        cwnd *= 2;
    }
    elapsed += remaining as f64 * 8.0 / goodput + cfg.rtt;

    let packets = blob.len().div_ceil(cfg.mtu).max(1);
    report.bytes_on_wire = blob.len() + packets * cfg.packet_framing;
    // send and receive socket buffers each hold a window
    report.peak_extra_memory = 2 * params.tcp_window;
    report.peak_in_flight = params.tcp_window.min(blob.len());
    report.result = TransferResult::Success;
    report.delivered_intact = blob.content().map(|_| true);
    path.state.clock += elapsed;
    report.finish(elapsed);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{GB, GBPS};
    use crate::wan::PathConfig;

    fn run(rate: f64, window: u64, len: u64) -> TransferReport {
        let mut path = Path::new(PathConfig::with_rate(rate)).unwrap();
        let mut params = TransportParams::new(TransportKind::TcpLike);
        params.tcp_window = window;
        tcp_like_transfer(&Blob::elided(len), &mut path, &params).unwrap()
    }

    #[test]
    fn calibrated_window_gives_table_latency() {
        let r = run(10.0 * GBPS, 812_500, GB);
        assert!((r.latency - 24.6).abs() / 24.6 < 0.10, "{}", r.latency);
    }

    #[test]
    fn bandwidth_limited_regime() {
        let r = run(GBPS, u64::MAX / 4, GB);
        // 8 s of serialization plus a handful of slow-start rounds
        assert!(r.latency > 8.0 && r.latency < 8.5, "{}", r.latency);
    }

    #[test]
    fn empty_blob_costs_one_rtt() {
        let r = run(10.0 * GBPS, 812_500, 0);
        assert!((r.latency - 0.020).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_window() {
        let mut path = Path::new(PathConfig::default()).unwrap();
        let mut params = TransportParams::new(TransportKind::TcpLike);
        params.tcp_window = 0;
        assert!(tcp_like_transfer(&Blob::elided(1), &mut path, &params).is_err());
    }
}
