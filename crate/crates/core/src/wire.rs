//! Wire-level data model: payload blobs, the fixed 32-byte chunk header,
//! chunk planning/splitting and receiver-side reassembly.
//!
//! Header layout (little-endian, 32 bytes):
//!
//! ```text
//!  0..4   magic "FRDM"
//!  4..6   version (= 1)
//!  6..8   flags (bit0 carries-total, bit1 primer)
//!  8..12  seq (1-based)
//! 12..16  total
//! 16..20  payload_len
//! 20..28  total_payload_len
//! 28..32  payload_crc32
//! ```

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const HEADER_LEN: usize = 32;
pub const MAGIC: [u8; 4] = *b"FRDM";
pub const VERSION: u16 = 1;

pub const FLAG_CARRIES_TOTAL: u16 = 0b01;
pub const FLAG_PRIMER: u16 = 0b10;
const KNOWN_FLAGS: u16 = FLAG_CARRIES_TOTAL | FLAG_PRIMER;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("buffer holds {0} bytes, a header needs 32")]
    TooShort(usize),
    #[error("bad magic")]
    InvalidMagic,
    #[error("unsupported header version {0}")]
    InvalidVersion(u16),
    #[error("inconsistent header fields: {0}")]
    InconsistentFields(&'static str),
    #[error("chunk size must be positive")]
    ZeroChunkSize,
    #[error("blob content is elided, only its size is known")]
    ContentElided,
    #[error("chunk without header cannot be reassembled")]
    MissingHeader,
    #[error("missing chunk {0}")]
    MissingChunk(u32),
    #[error("chunk {0} received twice")]
    DuplicateSeq(u32),
    #[error("checksum mismatch in chunk {0}")]
    CrcMismatch(u32),
    #[error("chunks disagree on transfer totals")]
    TotalMismatch,
}

pub fn crc32(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

/// An opaque payload standing in for model weights.
///
/// A blob either owns its bytes or is *elided*: only its length is known.
/// Elided blobs drive timing-only runs at table scale (1 GB and up) where
/// materialising the content would dominate memory; protocol timing and
/// memory accounting are identical for both forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blob {
    len: u64,
    content: Option<Vec<u8>>,
    crc: u32,
}

impl Blob {
    pub fn from_bytes(content: Vec<u8>) -> Self {
        let crc = crc32(&content);
        Self {
            len: content.len() as u64,
            content: Some(content),
            crc,
        }
    }

    /// Deterministic pseudo-random content.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut content = vec![0u8; len];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut content);
        Self::from_bytes(content)
    }

    pub fn elided(len: u64) -> Self {
        Self {
            len,
            content: None,
            crc: 0,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn content(&self) -> Option<&[u8]> {
        self.content.as_deref()
    }

    pub fn crc(&self) -> u32 {
        self.crc
    }

    pub fn is_elided(&self) -> bool {
        self.content.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChunkHeader {
    pub flags: u16,
    pub seq: u32,
    pub total: u32,
    pub payload_len: u32,
    pub total_payload_len: u64,
    pub payload_crc32: u32,
}

impl ChunkHeader {
    pub fn validate(&self) -> Result<(), WireError> {
        if self.flags & !KNOWN_FLAGS != 0 {
            return Err(WireError::InconsistentFields("unknown flag bits"));
        }
        // an empty transfer is still one chunk, so total is never zero
        if self.total == 0 {
            return Err(WireError::InconsistentFields("total is zero"));
        }
        if self.seq == 0 || self.seq > self.total {
            return Err(WireError::InconsistentFields("seq outside 1..=total"));
        }
        if u64::from(self.payload_len) > self.total_payload_len {
            return Err(WireError::InconsistentFields(
                "payload_len exceeds total_payload_len",
            ));
        }
        Ok(())
    }

    pub fn is_primer(&self) -> bool {
        self.flags & FLAG_PRIMER != 0
    }
}

pub fn encode_header(h: &ChunkHeader) -> [u8; HEADER_LEN] {
    let mut out = [0u8; HEADER_LEN];
    out[0..4].copy_from_slice(&MAGIC);
    out[4..6].copy_from_slice(&VERSION.to_le_bytes());
    out[6..8].copy_from_slice(&h.flags.to_le_bytes());
    out[8..12].copy_from_slice(&h.seq.to_le_bytes());
    out[12..16].copy_from_slice(&h.total.to_le_bytes());
    out[16..20].copy_from_slice(&h.payload_len.to_le_bytes());
    out[20..28].copy_from_slice(&h.total_payload_len.to_le_bytes());
    out[28..32].copy_from_slice(&h.payload_crc32.to_le_bytes());
    out
}

/// Parses the first 32 bytes of `b`. A zeroed region, or one whose leading
/// bytes have not landed yet, comes back as an error; header polling relies
/// on that as its completion test.
pub fn decode_header(b: &[u8]) -> Result<ChunkHeader, WireError> {
    if b.len() < HEADER_LEN {
        return Err(WireError::TooShort(b.len()));
    }
    if b[0..4] != MAGIC {
        return Err(WireError::InvalidMagic);
    }
    let version = u16::from_le_bytes([b[4], b[5]]);
    if version != VERSION {
        return Err(WireError::InvalidVersion(version));
    }
    let u32_at = |i: usize| u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
    let mut total_payload_len = [0u8; 8];
    total_payload_len.copy_from_slice(&b[20..28]);
    let h = ChunkHeader {
        flags: u16::from_le_bytes([b[6], b[7]]),
        seq: u32_at(8),
        total: u32_at(12),
        payload_len: u32_at(16),
        total_payload_len: u64::from_le_bytes(total_payload_len),
        payload_crc32: u32_at(28),
    };
    h.validate()?;
    Ok(h)
}

/// How a blob of a given length divides into chunks of base size `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkPlan {
    pub total_len: u64,
    pub base_chunk_size: u64,
    pub num_chunks: u32,
    pub last_chunk_size: u64,
}

impl ChunkPlan {
    pub fn new(total_len: u64, base_chunk_size: u64) -> Result<Self, WireError> {
        if base_chunk_size == 0 {
            return Err(WireError::ZeroChunkSize);
        }
        if total_len == 0 {
            return Ok(Self {
                total_len,
                base_chunk_size,
                num_chunks: 1,
                last_chunk_size: 0,
            });
        }
        let n = total_len.div_ceil(base_chunk_size);
        let num_chunks = u32::try_from(n)
            .map_err(|_| WireError::InconsistentFields("chunk count exceeds u32"))?;
        Ok(Self {
            total_len,
            base_chunk_size,
            num_chunks,
            last_chunk_size: total_len - (n - 1) * base_chunk_size,
        })
    }

    /// Byte offset of chunk `seq` (1-based) within the payload.
    pub fn offset_of(&self, seq: u32) -> u64 {
        u64::from(seq - 1) * self.base_chunk_size
    }

    pub fn len_of(&self, seq: u32) -> u64 {
        if seq == self.num_chunks {
            self.last_chunk_size
        } else {
            self.base_chunk_size
        }
    }

    /// Size of the largest chunk in the plan.
    pub fn max_chunk_len(&self) -> u64 {
        self.base_chunk_size.min(self.total_len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub header: Option<ChunkHeader>,
    pub payload: Vec<u8>,
}

pub fn split_blob(x: &Blob, s: u64) -> Result<(ChunkPlan, Vec<Chunk>), WireError> {
    let plan = ChunkPlan::new(x.len(), s)?;
    let content = x.content().ok_or(WireError::ContentElided)?;
    let chunks = (1..=plan.num_chunks)
        .map(|seq| {
            let start = plan.offset_of(seq) as usize;
            let payload = content[start..start + plan.len_of(seq) as usize].to_vec();
            Chunk {
                header: Some(ChunkHeader {
                    flags: FLAG_CARRIES_TOTAL,
                    seq,
                    total: plan.num_chunks,
                    payload_len: payload.len() as u32,
                    total_payload_len: plan.total_len,
                    payload_crc32: crc32(&payload),
                }),
                payload,
            }
        })
        .collect();
    Ok((plan, chunks))
}

pub fn reassemble(chunks: Vec<Chunk>) -> Result<Blob, WireError> {
    let mut totals: Option<(u32, u64)> = None;
    let mut by_seq = BTreeMap::new();
    for chunk in chunks {
        let h = chunk.header.ok_or(WireError::MissingHeader)?;
        h.validate()?;
        match totals {
            None => totals = Some((h.total, h.total_payload_len)),
            Some(t) if t != (h.total, h.total_payload_len) => return Err(WireError::TotalMismatch),
            Some(_) => {}
        }
        if chunk.payload.len() != h.payload_len as usize {
            return Err(WireError::InconsistentFields("payload_len disagrees with payload"));
        }
        if crc32(&chunk.payload) != h.payload_crc32 {
            return Err(WireError::CrcMismatch(h.seq));
        }
        if by_seq.insert(h.seq, chunk.payload).is_some() {
            return Err(WireError::DuplicateSeq(h.seq));
        }
    }
    let (total, total_payload_len) = totals.ok_or(WireError::MissingChunk(1))?;
    if let Some(seq) = (1..=total).find(|s| !by_seq.contains_key(s)) {
        return Err(WireError::MissingChunk(seq));
    }
    let mut content = Vec::with_capacity(total_payload_len as usize);
    for payload in by_seq.into_values() {
        content.extend_from_slice(&payload);
    }
    if content.len() as u64 != total_payload_len {
        return Err(WireError::TotalMismatch);
    }
    Ok(Blob::from_bytes(content))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(seq: u32, total: u32) -> ChunkHeader {
        ChunkHeader {
            flags: FLAG_CARRIES_TOTAL,
            seq,
            total,
            payload_len: 0,
            total_payload_len: 0,
            payload_crc32: 0,
        }
    }

    #[test]
    fn header_prefix_bytes() {
        let bytes = encode_header(&header(1, 1));
        assert_eq!(&bytes[..8], &[0x46, 0x52, 0x44, 0x4D, 0x01, 0x00, 0x01, 0x00]);
    }

    #[test]
    fn seq_is_little_endian() {
        let bytes = encode_header(&header(250, 250));
        assert_eq!(&bytes[8..12], &[0xFA, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &[0xFA, 0, 0, 0]);
    }

    #[test]
    fn decode_rejects_bad_input() {
        assert_eq!(decode_header(&[0u8; 32]), Err(WireError::InvalidMagic));
        assert_eq!(decode_header(&[0u8; 31]), Err(WireError::TooShort(31)));

        let mut bytes = encode_header(&header(1, 3));
        bytes[8] = 0;
        assert!(matches!(
            decode_header(&bytes),
            Err(WireError::InconsistentFields(_))
        ));

        let mut bytes = encode_header(&header(1, 3));
        bytes[4] = 2;
        assert_eq!(decode_header(&bytes), Err(WireError::InvalidVersion(2)));

        let mut h = header(1, 1);
        h.payload_len = 10;
        assert!(decode_header(&encode_header(&h)).is_err());
    }

    #[test]
    fn torn_header_is_invalid() {
        let full = encode_header(&header(1, 4));
        let mut torn = [0u8; 32];
        torn[16..].copy_from_slice(&full[16..]);
        assert_eq!(decode_header(&torn), Err(WireError::InvalidMagic));
    }

    #[test]
    fn plan_arithmetic() {
        let p = ChunkPlan::new(1_000_000_000, 4_000_000).unwrap();
        assert_eq!((p.num_chunks, p.last_chunk_size), (250, 4_000_000));

        let p = ChunkPlan::new(9_000_000, 4_000_000).unwrap();
        assert_eq!((p.num_chunks, p.last_chunk_size), (3, 1_000_000));
        assert_eq!(p.offset_of(3), 8_000_000);

        let p = ChunkPlan::new(0, 4_000_000).unwrap();
        assert_eq!((p.num_chunks, p.last_chunk_size), (1, 0));

        assert_eq!(ChunkPlan::new(10, 0), Err(WireError::ZeroChunkSize));
    }

    #[test]
    fn split_shapes() {
        let blob = Blob::random(9_000_000, 1);
        let (_, chunks) = split_blob(&blob, 4_000_000).unwrap();
        let lens: Vec<_> = chunks.iter().map(|c| c.payload.len()).collect();
        assert_eq!(lens, [4_000_000, 4_000_000, 1_000_000]);

        let (plan, chunks) = split_blob(&Blob::from_bytes(vec![]), 4_000_000).unwrap();
        assert_eq!(plan.num_chunks, 1);
        assert_eq!(chunks[0].header.unwrap().payload_len, 0);

        assert_eq!(
            split_blob(&Blob::elided(10), 4).unwrap_err(),
            WireError::ContentElided
        );
    }

    #[test]
    fn reassemble_errors() {
        let blob = Blob::random(3_000, 9);
        let (_, chunks) = split_blob(&blob, 1_000).unwrap();

        let partial = vec![chunks[0].clone(), chunks[2].clone()];
        assert_eq!(reassemble(partial), Err(WireError::MissingChunk(2)));

        let mut dup = chunks.clone();
        dup.push(chunks[1].clone());
        assert_eq!(reassemble(dup), Err(WireError::DuplicateSeq(2)));

        let mut flipped = chunks.clone();
        flipped[1].payload[17] ^= 0x01;
        assert_eq!(reassemble(flipped), Err(WireError::CrcMismatch(2)));

        let mut mixed = chunks.clone();
        let h = mixed[2].header.as_mut().unwrap();
        h.total = 4;
        assert_eq!(reassemble(mixed), Err(WireError::TotalMismatch));

        let mut reversed = chunks;
        reversed.reverse();
        assert_eq!(reassemble(reversed).unwrap(), blob);
    }
}
