//! Deterministic sampling for validation sweeps and property checks.

use alloc::vec::Vec;

/// Seed used by every built-in validation sweep.
pub const VALIDATION_SEED: u64 = 0x5EED;

/// SplitMix64: tiny, stateless-jump PRNG with reproducible output on every
/// platform. Good enough for sampling validation points; not for statistics.
#[derive(Debug, Clone)]
pub struct SampleRng {
    state: u64,
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        SampleRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn point_in_box(&mut self, bounds: &[(f64, f64)]) -> Vec<f64> {
        bounds.iter().map(|&(lo, hi)| self.in_range(lo, hi)).collect()
    }
}
