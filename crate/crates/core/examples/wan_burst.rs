//! How much of one burst the bottleneck drops, cold and primed, as the
//! sender rate climbs past the drain rate.

use fedrdma::units::{GBPS, MB};
use fedrdma::wan::{path_burst, warm_up, PathConfig, PathState};

fn main() {
    println!("{:>6} {:>8} {:>14} {:>14}", "Gbps", "burst", "dropped cold", "dropped warm");
    for g in [2.0, 4.0, 5.0, 10.0, 100.0] {
        let cfg = PathConfig::with_rate(g * GBPS);
        let cold = PathState::default();
        let (warm, primer) = warm_up(&cfg, &cold, cfg.mtu);
        assert_eq!(primer.dropped, 0.0);
        for burst in [4 * MB, 12 * MB, 16 * MB] {
            let (_, c) = path_burst(&cfg, &cold, burst);
            let (_, w) = path_burst(&cfg, &warm, burst);
            println!("{g:>6} {:>6}MB {:>14.0} {:>14.0}", burst / MB, c.dropped, w.dropped);
        }
    }
}
