//! 1 GB across a 10 Gbit/s, 20 ms path with each transport.

use fedrdma::prelude::*;

fn main() {
    let cfg = PathConfig::with_rate(10.0 * GBPS);
    let blob = Blob::elided(GB);
    println!(
        "{:<10} {:>20} {:>9} {:>8} {:>12} {:>8} {:>9}",
        "transport", "result", "time (s)", "retx", "memory (B)", "headers", "energy (J)"
    );
    for kind in TransportKind::ALL {
        let params = TransportParams::new(kind);
        let mut path = Path::new(cfg.clone()).unwrap();
        let mut pool = pool_for(&params, blob.len()).unwrap();
        let r = transfer(&blob, &mut path, &params, Some(&mut pool)).unwrap();
        println!(
            "{:<10} {:>20} {:>9.3} {:>8} {:>12} {:>8} {:>9.1}",
            kind.name(),
            format!("{:?}", r.result),
            r.latency,
            r.retransmissions,
            r.peak_extra_memory,
            r.header_ops,
            r.energy
        );
    }
}
