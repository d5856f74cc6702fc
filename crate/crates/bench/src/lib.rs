//! Fixed inputs shared by the benchmarks.

use mildbank::corpus::{corpus, DEFAULT_SEED};
use mildbank::{Grid, SampledFunction};

/// The default grid: `h = 1/16`, `N = 1024`, window `[-32, 32)`.
pub fn default_grid() -> Grid {
    Grid::line(1.0 / 16.0, 1024).expect("valid grid")
}

/// A self-dual grid of `n` samples, `h = n^-1/2`.
pub fn self_dual(n: usize) -> Grid {
    Grid::line(1.0 / (n as f64).sqrt(), n).expect("valid grid")
}

/// The first corpus function on `grid`, a real Gaussian mixture.
pub fn mixture(grid: &Grid) -> SampledFunction {
    corpus(grid, DEFAULT_SEED, 1).remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        assert!(self_dual(256).is_self_dual());
        assert_eq!(mixture(&default_grid()).values().len(), 1024);
    }
}
