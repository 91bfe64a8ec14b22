//! Encode a chunk header, look at its bytes, and see what polling a region
//! reports as the header lands piece by piece.

use fedrdma::mr::register_mr;
use fedrdma::wire::{decode_header, encode_header, ChunkHeader, FLAG_CARRIES_TOTAL};

fn main() {
    let h = ChunkHeader {
        flags: FLAG_CARRIES_TOTAL,
        seq: 1,
        total: 250,
        payload_len: 4_000_000,
        total_payload_len: 1_000_000_000,
        payload_crc32: 0xdead_beef,
    };
    let bytes = encode_header(&h);
    println!("header bytes: {:02x?}", bytes);
    assert_eq!(decode_header(&bytes).unwrap(), h);

    println!("32 zero bytes: {:?}", decode_header(&[0u8; 32]));
    let mut bad = bytes;
    bad[8..12].copy_from_slice(&0u32.to_le_bytes());
    println!("seq = 0:       {:?}", decode_header(&bad));

    let mut mr = register_mr(64).unwrap();
    mr.remote_write(16, &bytes[16..]).unwrap();
    println!("tail landed:   {:?}", mr.poll_header());
    mr.remote_write(0, &bytes[..16]).unwrap();
    println!("all landed:    {:?}", mr.poll_header());
}
