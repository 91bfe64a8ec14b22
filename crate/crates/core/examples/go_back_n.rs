//! Go-Back-N under scripted loss, with the packet trace printed.

use fedrdma::gbn::gbn_send;
use fedrdma::mr::register_mr;
use fedrdma::units::GBPS;
use fedrdma::wan::{LossModel, Path, PathConfig};

fn main() {
    let cfg = PathConfig {
        mtu: 1000,
        ..PathConfig::with_rate(GBPS)
    };
    let data: Vec<u8> = (0..6_000u32).map(|i| i as u8).collect();
    let mut path = Path::new(cfg)
        .unwrap()
        .with_loss(LossModel::Scripted([2, 7].into()))
        .with_trace();
    let mut mr = register_mr(data.len() as u64).unwrap();

    let out = gbn_send(&mut path, 0, &data, 4, 7, &mut mr).unwrap();
    for ev in path.trace().unwrap() {
        println!(
            "t={:>9.6}s packet {} at offset {:>5}{}",
            ev.time,
            ev.seq,
            ev.offset,
            if ev.dropped { "  DROPPED" } else { "" }
        );
    }
    println!(
        "{:?} after {:.3}s, {} retransmissions",
        out.result, out.latency, out.retransmissions
    );
    assert_eq!(mr.read(0, data.len() as u64).unwrap(), &data[..]);
}
