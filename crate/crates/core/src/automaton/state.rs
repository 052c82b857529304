use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A z-polarization, `|−1⟩` or `|+1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn value(self) -> i32 {
        match self {
            Spin::Down => -1,
            Spin::Up => 1,
        }
    }

    pub fn from_value(v: i32) -> Result<Spin> {
        match v {
            -1 => Ok(Spin::Down),
            1 => Ok(Spin::Up),
            _ => Err(Error::Domain(format!("spin value must be ±1, got {v}"))),
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Down => Spin::Up,
            Spin::Up => Spin::Down,
        }
    }
}

#[inline]
pub(crate) fn low_mask(len: u64) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// One bit per site, set for spin up. Bit `i` of the state is bit `i % 64`
/// of word `i / 64`.
///
/// The word vector carries one trailing zero word so a 64-bit window can be
/// read at any in-range offset without a bounds special case.
#[derive(Clone, PartialEq, Eq)]
pub struct SpinState {
    words: Vec<u64>,
    len: u64,
}

impl std::fmt::Debug for SpinState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpinState")
            .field("len", &self.len)
            .field("up", &self.count_up())
            .finish()
    }
}

impl SpinState {
    pub fn all_down(len: u64) -> Self {
        let words = vec![0; (len.div_ceil(64) + 1) as usize];
        SpinState { words, len }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, id: u64) -> Spin {
        debug_assert!(id < self.len);
        if (self.words[(id >> 6) as usize] >> (id & 63)) & 1 == 1 {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    #[inline]
    pub fn set(&mut self, id: u64, spin: Spin) {
        assert!(id < self.len, "site id {id} out of range {}", self.len);
        let w = &mut self.words[(id >> 6) as usize];
        match spin {
            Spin::Up => *w |= 1 << (id & 63),
            Spin::Down => *w &= !(1 << (id & 63)),
        }
    }

    #[inline]
    pub fn flip(&mut self, id: u64) {
        assert!(id < self.len, "site id {id} out of range {}", self.len);
        self.words[(id >> 6) as usize] ^= 1 << (id & 63);
    }

    /// Reads `len ≤ 64` bits starting at bit `start`.
    #[inline]
    pub(crate) fn read_bits(&self, start: u64, len: u64) -> u64 {
        if len == 0 {
            return 0;
        }
        let w = (start >> 6) as usize;
        let sh = start & 63;
        let lo = self.words[w] >> sh;
        let v = if sh == 0 {
            lo
        } else {
            lo | (self.words[w + 1] << (64 - sh))
        };
        v & low_mask(len)
    }

    /// XORs the low `len` bits of `bits` in at bit `start`.
    #[inline]
    pub(crate) fn xor_bits(&mut self, start: u64, len: u64, bits: u64) {
        debug_assert!(start + len <= self.len);
        let bits = bits & low_mask(len);
        let w = (start >> 6) as usize;
        let sh = start & 63;
        self.words[w] ^= bits << sh;
        if sh != 0 && sh + len > 64 {
            self.words[w + 1] ^= bits >> (64 - sh);
        }
    }

    pub fn count_up(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Up spins among ids in `range`.
    pub fn count_up_range(&self, range: std::ops::Range<u64>) -> u64 {
        let mut total = 0;
        let mut i = range.start;
        while i < range.end {
            let n = (range.end - i).min(64);
            total += self.read_bits(i, n).count_ones() as u64;
            i += n;
        }
        total
    }

    /// Net magnetization `Σ s_i = 2·up − N`.
    pub fn magnetization(&self) -> i64 {
        2 * self.count_up() as i64 - self.len as i64
    }

    pub fn words(&self) -> &[u64] {
        &self.words[..self.len.div_ceil(64) as usize]
    }

    /// Bitwise XOR against a state of equal length.
    pub fn difference(&self, other: &SpinState) -> SpinState {
        assert_eq!(self.len, other.len);
        SpinState {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
            len: self.len,
        }
    }

    pub fn iter_up(&self) -> impl Iterator<Item = u64> + '_ {
        self.words().iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(wi as u64 * 64 + b)
            })
        })
    }

    /// Little-endian encoding: the site count as `u64`, then the words.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.words().len() * 8);
        out.extend_from_slice(&self.len.to_le_bytes());
        for w in self.words() {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || !bytes.len().is_multiple_of(8) {
            return Err(Error::Serialization("spin state byte length is not a multiple of 8".into()));
        }
        let len = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let n_words = len.div_ceil(64) as usize;
        if bytes.len() != 8 + 8 * n_words {
            return Err(Error::Serialization(format!(
                "expected {} bytes for {len} sites, got {}",
                8 + 8 * n_words,
                bytes.len()
            )));
        }
        let mut state = SpinState::all_down(len);
        for (i, chunk) in bytes[8..].chunks_exact(8).enumerate() {
            state.words[i] = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        if len % 64 != 0 && n_words > 0 && state.words[n_words - 1] >> (len % 64) != 0 {
            return Err(Error::Serialization("bits set beyond the site count".into()));
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn windows_cross_word_boundaries() {
        let mut s = SpinState::all_down(200);
        for id in [0, 63, 64, 65, 127, 128, 199] {
            s.set(id, Spin::Up);
        }
        assert_eq!(s.read_bits(60, 8), 0b0011_1000);
        assert_eq!(s.read_bits(63, 3), 0b111);
        assert_eq!(s.count_up_range(60..130), 5);
        s.xor_bits(62, 4, 0b1111);
        assert_eq!(s.read_bits(62, 4), 0b0001);
        assert_eq!(s.count_up(), 5);
        assert_eq!(s.magnetization(), 2 * 5 - 200);
    }

    #[test]
    fn rejects_garbage_bytes() {
        assert!(SpinState::from_bytes(&[1, 2, 3]).is_err());
        let mut b = SpinState::all_down(3).to_bytes();
        b[8] = 0xff;
        assert!(SpinState::from_bytes(&b).is_err());
    }

    proptest! {
        #[test]
        fn byte_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..500)) {
            let mut s = SpinState::all_down(bits.len() as u64);
            for (i, b) in bits.iter().enumerate() {
                if *b { s.set(i as u64, Spin::Up); }
            }
            let back = SpinState::from_bytes(&s.to_bytes()).unwrap();
            prop_assert_eq!(&back, &s);
            let ups: Vec<u64> = back.iter_up().collect();
            let expect: Vec<u64> = bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i as u64).collect();
            prop_assert_eq!(ups, expect);
        }

        #[test]
        fn xor_window_matches_per_bit_flips(len in 1u64..300, start_frac in 0.0f64..1.0, w in 1u64..=64, bits in any::<u64>()) {
            let start = ((len - 1) as f64 * start_frac) as u64;
            let w = w.min(len - start);
            let mut a = SpinState::all_down(len);
            let mut b = SpinState::all_down(len);
            a.xor_bits(start, w, bits);
            for i in 0..w {
                if (bits >> i) & 1 == 1 { b.flip(start + i); }
            }
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.read_bits(start, w), bits & low_mask(w));
        }
    }
}
