//! Five FedAvg rounds, two clients, a 117 M-parameter fp32 model.

use fedrdma::prelude::*;

fn main() {
    for kind in [TransportKind::TcpLike, TransportKind::FedRdmaV1, TransportKind::FedRdmaE] {
        let mut cfg = FederationConfig::new(
            5,
            2,
            468_500_000,
            TransportParams::new(kind),
            PathConfig::with_rate(10.0 * GBPS),
        );
        cfg.compute_time_per_round = 56.2;
        let r = run_federation(&cfg).unwrap();
        println!(
            "{:<10} traffic {:.2} GB, comm {:>7.2}s, compute {:.1}s, comm share {:>5.1}%, {:.0} J",
            kind.name(),
            r.total_traffic as f64 / 1e9,
            r.comm_time,
            r.compute_time,
            100.0 * r.comm_fraction,
            r.energy
        );
    }

    for rank in fedrdma::fl::LORA_RANKS {
        let bytes = lora_payload_bytes(rank).unwrap();
        let plan = ChunkPlan::new(bytes, 4 * MB).unwrap();
        println!("LoRA rank {rank:>4}: {:>6.1} MB per update, {:>2} chunks", bytes as f64 / 1e6, plan.num_chunks);
    }
}
