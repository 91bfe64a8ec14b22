//! Link-Enable: what the policy decides, and what happens without it.

use fedrdma::prelude::*;

fn main() {
    for g in [2.0, 3.0, 4.0, 5.0, 10.0] {
        let cfg = PathConfig::with_rate(g * GBPS);
        for policy in [LinkEnablePolicy::Auto, LinkEnablePolicy::Off] {
            let mut params = TransportParams::new(TransportKind::FedRdmaE);
            params.link_enable_policy = policy;
            let plan = ChunkPlan::new(GB, params.base_chunk_size).unwrap();
            let decision = apply_link_enable(&params, &cfg, &plan);
            let mut path = Path::new(cfg.clone()).unwrap();
            let mut pool = pool_for(&params, GB).unwrap();
            let r = fedrdma_e_transfer(&Blob::elided(GB), &mut path, &params, &mut pool).unwrap();
            println!(
                "{g:>4} Gbps {:<5} -> {:<20} {:?} in {:.3}s",
                format!("{policy:?}"),
                format!("{decision:?}"),
                r.result,
                r.latency
            );
        }
    }
}
