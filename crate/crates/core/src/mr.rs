//! Registered memory regions, one-sided writes, and the receive-region pool.

use thiserror::Error;

use crate::gbn::Receiver;
use crate::wire::{decode_header, ChunkHeader, HEADER_LEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MrError {
    #[error("region capacity {0} is below the 32-byte minimum")]
    CapacityTooSmall(u64),
    #[error("write of {len} bytes at {offset} exceeds capacity {capacity}")]
    OutOfBounds { offset: u64, len: u64, capacity: u64 },
    #[error("region is not registered")]
    Unregistered,
    #[error("pool needs at least one region")]
    EmptyPool,
}

#[derive(Debug, Clone)]
pub struct MemoryRegion {
    storage: Vec<u8>,
    registered: bool,
}

pub fn register_mr(capacity: u64) -> Result<MemoryRegion, MrError> {
    if capacity < HEADER_LEN as u64 {
        return Err(MrError::CapacityTooSmall(capacity));
    }
    Ok(MemoryRegion {
        storage: vec![0u8; capacity as usize],
        registered: true,
    })
}

impl MemoryRegion {
    pub fn capacity(&self) -> u64 {
        self.storage.len() as u64
    }

    pub fn is_registered(&self) -> bool {
        self.registered
    }

    pub fn deregister(&mut self) {
        self.registered = false;
    }

    fn check(&self, offset: u64, len: u64) -> Result<(), MrError> {
        if !self.registered {
            return Err(MrError::Unregistered);
        }
        match offset.checked_add(len) {
            Some(end) if end <= self.capacity() => Ok(()),
            _ => Err(MrError::OutOfBounds {
                offset,
                len,
                capacity: self.capacity(),
            }),
        }
    }

    /// One-sided write: lands `data` at `offset`, nothing runs on the owner's side.
    pub fn remote_write(&mut self, offset: u64, data: &[u8]) -> Result<(), MrError> {
        self.check(offset, data.len() as u64)?;
        let start = offset as usize;
        self.storage[start..start + data.len()].copy_from_slice(data);
        Ok(())
    }

    pub fn read(&self, offset: u64, len: u64) -> Result<&[u8], MrError> {
        self.check(offset, len)?;
        Ok(&self.storage[offset as usize..(offset + len) as usize])
    }

    /// Returns the header at offset 0 only if it decodes cleanly.
    pub fn poll_header(&self) -> Option<ChunkHeader> {
        if !self.registered {
            return None;
        }
        decode_header(&self.storage[..HEADER_LEN]).ok()
    }

    pub(crate) fn clear_header(&mut self) {
        self.storage[..HEADER_LEN].fill(0);
    }
}

impl Receiver for MemoryRegion {
    fn deliver(&mut self, _at: f64, offset: u64, len: u64, data: Option<&[u8]>) -> Result<(), MrError> {
        match data {
            Some(bytes) => self.remote_write(offset, bytes),
            None => self.check(offset, len),
        }
    }
}

/// Receive regions handed out round-robin.
#[derive(Debug, Clone)]
pub struct MrPool {
    regions: Vec<MemoryRegion>,
    cursor: usize,
}

impl MrPool {
    pub fn new(k: usize, capacity: u64) -> Result<Self, MrError> {
        if k == 0 {
            return Err(MrError::EmptyPool);
        }
        let regions = (0..k).map(|_| register_mr(capacity)).collect::<Result<_, _>>()?;
        Ok(Self { regions, cursor: 0 })
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn region_capacity(&self) -> u64 {
        self.regions[0].capacity()
    }

    pub fn region(&self, idx: usize) -> &MemoryRegion {
        &self.regions[idx]
    }

    /// Hands out the region under the cursor and advances it.
    ///
    /// The header prefix is zeroed first: a header left over from the
    /// transfer `k` acquisitions ago would otherwise read as completion.
    pub fn acquire_next(&mut self) -> (usize, &mut MemoryRegion) {
        let idx = self.cursor;
        self.cursor = (self.cursor + 1) % self.regions.len();
        let region = &mut self.regions[idx];
        region.clear_header();
        (idx, region)
    }

    /// Bytes of bookkeeping the pool keeps beside the regions themselves.
    pub fn bookkeeping_bytes(&self) -> u64 {
        (std::mem::size_of::<usize>() * (1 + 2 * self.regions.len())) as u64
    }
}
