use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// ChaCha8 seeded from a 64-bit value; its output stream is fixed by the
/// algorithm, so sequences match across platforms.
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        uniform_inclusive(&mut self.0, lo, hi)
    }
}

/// Uniform integer in `[lo, hi]` by rejection sampling.
///
/// Raw 64-bit draws at or above the largest multiple of the range width are
/// discarded, the rest are reduced modulo the width. No modulo bias.
pub fn uniform_inclusive<R: RngCore + ?Sized>(rng: &mut R, lo: u64, hi: u64) -> u64 {
    assert!(lo <= hi, "empty range [{lo}, {hi}]");
    let width = (hi - lo).wrapping_add(1);
    if width == 0 {
        return rng.next_u64();
    }
    // 2^64 mod width
    let excess = (u64::MAX % width + 1) % width;
    loop {
        let x = rng.next_u64();
        if excess == 0 || x < u64::MAX - excess + 1 {
            return lo + x % width;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Scripted(Vec<u64>);
    impl RngCore for Scripted {
        fn next_u32(&mut self) -> u32 {
            self.next_u64() as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0.remove(0)
        }
        fn fill_bytes(&mut self, _: &mut [u8]) {
            unimplemented!()
        }
    }

    #[test]
    fn rejects_the_biased_tail() {
        // width 3: 2^64 mod 3 == 1, so only u64::MAX is rejected
        let mut rng = Scripted(vec![u64::MAX, 7]);
        assert_eq!(uniform_inclusive(&mut rng, 10, 12), 10 + 7 % 3);
        let mut rng = Scripted(vec![u64::MAX - 1]);
        assert_eq!(uniform_inclusive(&mut rng, 0, 2), (u64::MAX - 1) % 3);
        // power-of-two widths never reject
        let mut rng = Scripted(vec![u64::MAX]);
        assert_eq!(uniform_inclusive(&mut rng, 0, 7), 7);
    }

    #[test]
    fn degenerate_and_full_ranges() {
        let mut rng = SeededRng::new(1);
        assert!((0..100).all(|_| rng.range(5, 5) == 5));
        let mut rng = Scripted(vec![42]);
        assert_eq!(uniform_inclusive(&mut rng, 0, u64::MAX), 42);
    }

    #[test]
    fn stream_is_pinned() {
        let mut a = SeededRng::new(2024);
        let mut b = SeededRng::new(2024);
        let xs: Vec<u64> = (0..8).map(|_| a.range(1, 1000)).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.range(1, 1000)).collect();
        assert_eq!(xs, ys);
        assert_ne!(
            xs,
            (0..8)
                .map(|_| SeededRng::new(2025).range(1, 1000))
                .collect::<Vec<_>>()
        );
    }
}
