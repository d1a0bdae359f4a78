//! Bit strings of fixed length and parity.

use rand::Rng;

use crate::error::{invalid, Result};

/// All bit strings of length `size` whose bits add up to `l` modulo 2.
///
/// Members are stored as bit masks, bit `i` being position `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParitySet {
    l: u8,
    size: usize,
}

impl ParitySet {
    pub const MAX_SIZE: usize = 63;

    pub fn new(l: u8, size: usize) -> Result<Self> {
        if size == 0 || size > Self::MAX_SIZE {
            return Err(invalid("size", format!("{size} is not in 1..={}", Self::MAX_SIZE)));
        }
        if l > 1 {
            return Err(invalid("l", "must be a bit"));
        }
        Ok(Self { l, size })
    }

    pub fn parity(&self) -> u8 {
        self.l
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `2^(size - 1)`.
    pub fn len(&self) -> u64 {
        1 << (self.size - 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, mask: u64) -> bool {
        mask >> self.size == 0 && (mask.count_ones() % 2) as u8 == self.l
    }

    /// Members in increasing order of their masks.
    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        (0..1u64 << self.size).filter(move |&m| self.contains(m))
    }

    /// Uniform member: free bits for all positions but the last, which fixes the parity.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let free = if self.size == 1 {
            0
        } else {
            rng.gen::<u64>() & ((1u64 << (self.size - 1)) - 1)
        };
        let last = u64::from((free.count_ones() % 2) as u8 ^ self.l);
        free | (last << (self.size - 1))
    }
}

/// Bit `i` of a mask.
pub fn bit(mask: u64, i: usize) -> u8 {
    ((mask >> i) & 1) as u8
}
