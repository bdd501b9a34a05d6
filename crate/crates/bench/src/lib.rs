//! Fixtures shared by the benchmarks.

use hyperperc::sampling::{sample_ppp, ColoredConfig};
use hyperperc::RngStream;

/// A planar sample of intensity 1 in the ball of hyperbolic radius `radius`.
pub fn config(seed: u64, radius: f64) -> ColoredConfig {
    sample_ppp(1.0, radius, 2, &RngStream::new(seed)).expect("valid sampling parameters")
}

/// Majority of `m` bits as a truth table.
pub fn majority(m: usize) -> Vec<u8> {
    (0..1u32 << m).map(|i| (2 * i.count_ones() as usize > m) as u8).collect()
}
