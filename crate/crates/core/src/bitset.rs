//! Membership bitset over `[1, limit]`.
//!
//! Member `n` lives at bit `(n - 1) % 64` of word `(n - 1) / 64`, which is
//! also the LSB-first layout of the NSET payload.

use crate::error::{invalid, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct SetBitset {
    limit: u64,
    words: Vec<u64>,
}

impl std::fmt::Debug for SetBitset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SetBitset")
            .field("limit", &self.limit)
            .field("len", &self.len())
            .finish()
    }
}

impl SetBitset {
    pub fn empty(limit: u64) -> Self {
        Self {
            limit,
            words: vec![0; limit.div_ceil(64) as usize],
        }
    }

    pub fn full(limit: u64) -> Self {
        let mut s = Self::empty(limit);
        s.words.iter_mut().for_each(|w| *w = u64::MAX);
        s.clear_tail();
        s
    }

    pub fn from_members(limit: u64, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut s = Self::empty(limit);
        for n in members {
            if n == 0 || n > limit {
                return Err(invalid(format!("member {n} outside [1, {limit}]")));
            }
            s.insert(n);
        }
        Ok(s)
    }

    pub fn from_predicate(limit: u64, mut pred: impl FnMut(u64) -> bool) -> Self {
        let mut s = Self::empty(limit);
        for n in 1..=limit {
            if pred(n) {
                s.insert(n);
            }
        }
        s
    }

    /// Build from raw LSB-first words. Bits past `limit` are cleared.
    pub fn from_words(limit: u64, mut words: Vec<u64>) -> Self {
        words.resize(limit.div_ceil(64) as usize, 0);
        let mut s = Self { limit, words };
        s.clear_tail();
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.limit % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        if n == 0 || n > self.limit {
            return false;
        }
        let i = n - 1;
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    /// Panics if `n` is outside `[1, limit]`.
    #[inline]
    pub fn insert(&mut self, n: u64) {
        assert!(n >= 1 && n <= self.limit, "{n} outside [1, {}]", self.limit);
        let i = n - 1;
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, n: u64) {
        assert!(n >= 1 && n <= self.limit, "{n} outside [1, {}]", self.limit);
        let i = n - 1;
        self.words[(i / 64) as usize] &= !(1 << (i % 64));
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Members in `[1, n]`.
    pub fn count_upto(&self, n: u64) -> u64 {
        let n = n.min(self.limit);
        let full = (n / 64) as usize;
        let mut c: u64 = self.words[..full].iter().map(|w| u64::from(w.count_ones())).sum();
        let rem = n % 64;
        if rem != 0 {
            c += u64::from((self.words[full] & ((1u64 << rem) - 1)).count_ones());
        }
        c
    }

    pub fn density(&self) -> f64 {
        if self.limit == 0 {
            0.0
        } else {
            self.len() as f64 / self.limit as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let base = wi as u64 * 64 + 1;
            BitIter(w).map(move |b| base + b)
        })
    }

    /// 64 membership bits starting at `pos`: bit `j` is `contains(pos + j)`.
    #[inline]
    pub fn window64(&self, pos: u64) -> u64 {
        debug_assert!(pos >= 1);
        let i = pos - 1;
        let wi = (i / 64) as usize;
        let sh = i % 64;
        let lo = self.words.get(wi).copied().unwrap_or(0) >> sh;
        if sh == 0 {
            lo
        } else {
            let hi = self.words.get(wi + 1).copied().unwrap_or(0);
            lo | (hi << (64 - sh))
        }
    }

    /// Number of `n` in `[start, start + count)` for which the XOR of the
    /// bits at `n + o` over all `o` in `shifts` is 1.
    pub fn xor_parity_count(&self, shifts: &[u64], start: u64, count: u64) -> u64 {
        let mut total = 0u64;
        let mut pos = start;
        let end = start + count;
        while pos < end {
            let take = (end - pos).min(64);
            let mut w = 0u64;
            for &o in shifts {
                w ^= self.window64(pos + o);
            }
            if take < 64 {
                w &= (1u64 << take) - 1;
            }
            total += u64::from(w.count_ones());
            pos += take;
        }
        total
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(u64::from(b))
    }
}
