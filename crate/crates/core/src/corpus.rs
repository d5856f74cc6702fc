//! Seeded test corpora: the fixed battery used to compare distributions in
//! action, random Gaussian-mixture pairs and random bounded measures.
//!
//! All draws come from a ChaCha8 stream, so a seed reproduces the same
//! functions on every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{sample, Generator, Grid, MixtureTerm, SampledFunction};
use crate::measures::{BoundedMeasure, PointMass};

pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real Gaussian mixture with 1 to 3 terms, centres in [-2, 2], widths in [0.6, 1.4].
pub fn real_mixture(rng: &mut ChaCha8Rng) -> Generator {
    let terms = rng.gen_range(1..=3);
    Generator::GaussianMixture(
        (0..terms)
            .map(|_| MixtureTerm {
                weight: rng.gen_range(-1.0..1.0),
                center: rng.gen_range(-2.0..2.0),
                width: rng.gen_range(0.6..1.4),
                omega: 0.0,
            })
            .collect(),
    )
}

/// One modulated Gaussian with `|omega| <= 1.5`.
pub fn modulated_gaussian(rng: &mut ChaCha8Rng) -> Generator {
    Generator::GaussianMixture(vec![MixtureTerm {
        weight: rng.gen_range(0.5..1.0),
        center: rng.gen_range(-2.0..2.0),
        width: rng.gen_range(0.6..1.4),
        omega: rng.gen_range(-1.5..1.5),
    }])
}

/// Tent of width `w` centred at `c`: `max(1 - 2|t - c| / w, 0)`.
pub fn shifted_tent(grid: &Grid, c: f64, w: f64) -> SampledFunction {
    SampledFunction::from_fn(grid, move |t| {
        Complex64::new((1.0 - 2.0 * (t[0] - c).abs() / w).max(0.0), 0.0)
    })
    .with_label(format!("tent(c={c}, w={w})"))
}

/// The fixed battery: 32 real Gaussian mixtures, 8 tents and 8 modulated
/// Gaussians on a one-dimensional grid.
pub fn battery(grid: &Grid, seed: u64) -> Vec<SampledFunction> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(48);
    for i in 0..32 {
        let g = real_mixture(&mut r);
        out.push(sample(&g, grid).expect("valid mixture").with_label(format!("mixture{i}")));
    }
    let h = grid.axis(0).spacing;
    for _ in 0..8 {
        // centre and kinks on nodes, widths at least 1 so every tent is Lipschitz with constant <= 2
        let c = (r.gen_range(-2.0..2.0) / h).round() * h;
        let w = (r.gen_range(1.0..3.0) / (2.0 * h)).round() * 2.0 * h;
        out.push(shifted_tent(grid, c, w));
    }
    for i in 0..8 {
        let g = modulated_gaussian(&mut r);
        out.push(sample(&g, grid).expect("valid mixture").with_label(format!("modulated{i}")));
    }
    out
}

/// `count` pairs of real Gaussian mixtures.
pub fn mixture_pairs(grid: &Grid, seed: u64, count: usize) -> Vec<(SampledFunction, SampledFunction)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let a = sample(&real_mixture(&mut r), grid).expect("valid mixture");
            let b = sample(&real_mixture(&mut r), grid).expect("valid mixture");
            (a, b)
        })
        .collect()
}

/// Mixed corpus of `count` functions: real and modulated mixtures, and tents.
pub fn corpus(grid: &Grid, seed: u64, count: usize) -> Vec<SampledFunction> {
    let mut r = rng(seed);
    let h = grid.axis(0).spacing;
    (0..count)
        .map(|i| match i % 3 {
            0 => sample(&real_mixture(&mut r), grid).expect("valid mixture"),
            1 => sample(&modulated_gaussian(&mut r), grid).expect("valid mixture"),
            _ => {
                let c = (r.gen_range(-2.0..2.0) / h).round() * h;
                let w = (r.gen_range(1.0..3.0) / (2.0 * h)).round() * 2.0 * h;
                shifted_tent(grid, c, w)
            }
        })
        .collect()
}

/// Random measure: 1 to 4 point masses on grid nodes in [-4, 4] with complex
/// weights, plus a Gaussian-mixture density.
pub fn random_measure(grid: &Grid, r: &mut ChaCha8Rng) -> BoundedMeasure {
    let h = grid.axis(0).spacing;
    let atoms = (0..r.gen_range(1..=4))
        .map(|_| PointMass {
            x: vec![(r.gen_range(-4.0..4.0) / h).round() * h],
            c: Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)),
        })
        .collect();
    let density = sample(&real_mixture(r), grid).expect("valid mixture");
    BoundedMeasure::new(1, atoms, Some(density)).expect("one-dimensional measure")
}
