//! The receive-region pool: round-robin hand-out, and why the header prefix
//! is zeroed on every acquisition.

use fedrdma::mr::MrPool;
use fedrdma::protocols::{fedrdma_e_transfer, TransportKind, TransportParams};
use fedrdma::units::{GBPS, KB};
use fedrdma::wan::{Path, PathConfig};
use fedrdma::wire::Blob;

fn main() {
    let mut pool = MrPool::new(3, 64 * KB).unwrap();
    let order: Vec<usize> = (0..7).map(|_| pool.acquire_next().0).collect();
    println!("acquisition order: {order:?}");

    let params = TransportParams::new(TransportKind::FedRdmaE).with_chunk(8 * KB);
    let mut path = Path::new(PathConfig::with_rate(10.0 * GBPS)).unwrap();
    let mut pool = MrPool::new(2, 64 * KB).unwrap();
    for t in 0..4 {
        let blob = Blob::random(20_000 + t * 1_000, t as u64);
        let r = fedrdma_e_transfer(&blob, &mut path, &params, &mut pool).unwrap();
        println!(
            "transfer {t}: {} chunks, {:.1} ms, intact {:?}, next region {}",
            r.num_chunks,
            r.latency * 1e3,
            r.delivered_intact,
            pool.cursor()
        );
    }
    println!("pool bookkeeping: {} bytes", pool.bookkeeping_bytes());
}
