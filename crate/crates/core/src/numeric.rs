//! Small numerical helpers shared across modules.

use num_complex::Complex64;

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// `exp(2 pi i turns)`, with the argument reduced to `[-1/2, 1/2]` first so
/// that large dyadic phases stay exact.
#[inline]
pub fn cis_turns(turns: f64) -> Complex64 {
    let r = turns - turns.round();
    Complex64::from_polar(1.0, TAU * r)
}

/// Returns `Some(k)` when `x` is within a relative `1e-9` of the integer `k`.
#[inline]
pub fn as_integer(x: f64) -> Option<i64> {
    let k = x.round();
    if (x - k).abs() <= 1e-9 * k.abs().max(1.0) {
        Some(k as i64)
    } else {
        None
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
