//! Chunk plans and the split / reassemble pair.

use fedrdma::units::MB;
use fedrdma::wire::{reassemble, split_blob, Blob, ChunkPlan};

fn main() {
    for (len, s) in [(1_000 * MB, 4 * MB), (9 * MB, 4 * MB), (0, 4 * MB), (4_500_000, 4 * MB)] {
        let p = ChunkPlan::new(len, s).unwrap();
        println!("{len:>13} B in {s} B chunks -> {} chunks, last {} B", p.num_chunks, p.last_chunk_size);
    }

    let blob = Blob::random(3 * MB as usize + 17, 42);
    let (plan, mut chunks) = split_blob(&blob, 256 * 1024).unwrap();
    chunks.reverse();
    let back = reassemble(chunks.clone()).unwrap();
    assert_eq!(back, blob);
    println!("{} chunks reassembled out of order, crc {:08x}", plan.num_chunks, back.crc());

    chunks[3].payload[0] ^= 1;
    println!("one flipped bit: {:?}", reassemble(chunks).unwrap_err());
}
