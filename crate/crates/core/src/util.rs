use std::collections::HashMap;

use rand::Rng;

/// Derives a child seed from a parent seed and a stream index (SplitMix64 finalizer).
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sampling without replacement from `0..len`, one draw at a time.
///
/// A Fisher-Yates shuffle whose swaps live in a hash map, so memory grows with
/// the number of draws rather than with `len`.
#[derive(Debug, Clone, Default)]
pub struct LazyPermutation {
    len: usize,
    drawn: usize,
    swaps: HashMap<usize, usize>,
}

impl LazyPermutation {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            drawn: 0,
            swaps: HashMap::new(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.len - self.drawn
    }

    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        if self.drawn == self.len {
            return None;
        }
        let i = self.drawn;
        let j = rng.random_range(i..self.len);
        let at_j = self.swaps.get(&j).copied().unwrap_or(j);
        let at_i = self.swaps.get(&i).copied().unwrap_or(i);
        self.swaps.insert(j, at_i);
        self.swaps.remove(&i);
        self.drawn += 1;
        Some(at_j)
    }
}

pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lazy_permutation_is_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for len in [0usize, 1, 2, 7, 100] {
            let mut p = LazyPermutation::new(len);
            let mut seen: Vec<usize> = std::iter::from_fn(|| p.next(&mut rng)).collect();
            assert_eq!(seen.len(), len);
            seen.sort_unstable();
            assert_eq!(seen, (0..len).collect::<Vec<_>>());
            assert_eq!(p.remaining(), 0);
        }
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(499), 9);
        assert_eq!(ceil_log2(512), 9);
        assert_eq!(ceil_log2(513), 10);
    }

    #[test]
    fn mix_seed_separates_streams() {
        assert_ne!(mix_seed(1, 0), mix_seed(1, 1));
        assert_ne!(mix_seed(0, 1), mix_seed(1, 0));
        assert_eq!(mix_seed(42, 7), mix_seed(42, 7));
    }
}
