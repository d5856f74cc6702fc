//! Shannon sampling on the line: band limiting, reconstruction windows with a
//! prescribed spectral transition, and the sinc and windowed series.
//!
//! The designed kernel is the trigonometric polynomial defined by its spectrum
//! on the frequency grid, so it is periodic with the window length. Evaluated
//! with all in-window samples, the windowed series reproduces band-limited
//! grid functions up to round-off.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feichtinger::{s0_norm, S0Variant};
use crate::fourier::{fourier, ift_to};
use crate::grid::{sinc, Field, Grid, SampledFunction};
use crate::numeric::{as_integer, cis_turns};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    /// band `I = [-b, b]`
    pub b: f64,
    /// sampling rate; the lattice is `alpha Z` with `alpha = 1 / beta`
    pub beta: f64,
}

impl BandSpec {
    pub fn new(b: f64, beta: f64) -> Result<BandSpec> {
        if !(b > 0.0 && beta.is_finite()) {
            return Err(Error::BadParams(format!("band edge {b} must be positive")));
        }
        if b >= beta / 2.0 {
            return Err(Error::NoTransitionRoom { b, half_beta: beta / 2.0 });
        }
        Ok(BandSpec { b, beta })
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.beta
    }
}

fn line_only(grid: &Grid) -> Result<()> {
    if grid.dim() == 1 {
        Ok(())
    } else {
        Err(Error::BadGrid("sampling is one-dimensional".into()))
    }
}

/// Inverse transform of `F f` cut to `|s| <= b`.
pub fn bandlimit(f: &SampledFunction, spec: &BandSpec) -> Result<SampledFunction> {
    line_only(f.grid())?;
    let spectrum = fourier(f)?;
    let b = spec.b * (1.0 + 1e-12);
    let cut = SampledFunction::from_values(
        spectrum.grid(),
        spectrum
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| if spectrum.grid().point(j)[0].abs() <= b { *v } else { Complex64::new(0.0, 0.0) })
            .collect(),
    )?;
    Ok(ift_to(&cut, f.grid())?.without_source())
}

/// Transition of the window spectrum from 1 at `|s| = b` to 0 at `|s| = beta/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `(1 + cos(pi x)) / 2`
    RaisedCosine,
    /// `1 - S_r(x)` with `S_r` the polynomial smoothstep whose first `r - 1` derivatives vanish at both ends
    Smoothstep(u32),
}

impl Profile {
    /// Order `r` of the junctions: the profile is `C^{r-1}` there.
    pub fn order(&self) -> u32 {
        match self {
            Profile::RaisedCosine => 2,
            Profile::Smoothstep(r) => *r,
        }
    }

    /// Profile value at `x` in `[0, 1]`.
    pub fn at(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            Profile::RaisedCosine => 0.5 * (1.0 + (std::f64::consts::PI * x).cos()),
            Profile::Smoothstep(r) => {
                let r = (*r).max(1) as u64;
                let mut binom = 1.0;
                let mut sum = 0.0;
                for k in 0..r {
                    if k > 0 {
                        binom *= (r - 1 + k) as f64 / k as f64;
                    }
                    sum += binom * (1.0 - x).powi(k as i32);
                }
                1.0 - x.powi(r as i32) * sum
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Profile::RaisedCosine => "raised_cosine".into(),
            Profile::Smoothstep(r) => format!("smoothstep({r})"),
        }
    }
}

/// Measured tail behaviour of a reconstruction window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `r` in `|g(t)| <= C (1 + |t|)^-r`
    pub order: u32,
    /// `max |g(t)| (1 + |t|)^r` over the central half-window
    pub constant: f64,
    /// mean octave decay rate of the envelope on `2 <= |t| < L/4`
    pub exponent: f64,
}

#[derive(Debug, Clone)]
pub struct ReconWindow {
    pub spec: BandSpec,
    pub profile: Profile,
    pub g: SampledFunction,
    pub spectrum: SampledFunction,
    pub decay: DecayFit,
}

/// Periodic trigonometric polynomial `ds sum_m c_m exp(2 pi i s_m t)` with no cut-off.
fn periodic_field(spectrum: &SampledFunction) -> Field {
    let a = *spectrum.grid().axis(0);
    let coeffs: Arc<Vec<Complex64>> = Arc::new(spectrum.values().to_vec());
    Arc::new(move |t: &[f64]| {
        coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * cis_turns(a.node(m as i64) * t[0]))
            .sum::<Complex64>()
            * a.spacing
    })
}

fn fit_decay(g: &SampledFunction, order: u32) -> DecayFit {
    let grid = g.grid();
    let quarter = grid.axis(0).length() / 4.0;
    let mut constant: f64 = 0.0;
    for (j, v) in g.values().iter().enumerate() {
        let t = grid.point(j)[0].abs();
        if t < quarter {
            constant = constant.max(v.norm() * (1.0 + t).powi(order as i32));
        }
    }
    let envelope = |lo: f64| {
        g.values()
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let t = grid.point(*j)[0].abs();
                t >= lo && t < 2.0 * lo
            })
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    };
    let mut rates = Vec::new();
    let mut lo = 2.0;
    while 4.0 * lo <= quarter {
        let (m1, m2) = (envelope(lo), envelope(2.0 * lo));
        if m1 > 0.0 && m2 > 0.0 {
            rates.push((m1 / m2).log2());
        }
        lo *= 2.0;
    }
    let exponent = if rates.is_empty() { f64::INFINITY } else { rates.iter().sum::<f64>() / rates.len() as f64 };
    DecayFit {
        order,
        constant,
        exponent,
    }
}

/// Window with spectrum 1 on `[-b, b]`, the profile on `b <= |s| <= beta/2`
/// and 0 beyond, sampled on `grid`'s frequency grid.
pub fn design_window(spec: &BandSpec, profile: Profile, grid: &Grid) -> Result<ReconWindow> {
    line_only(grid)?;
    let spec = BandSpec::new(spec.b, spec.beta)?;
    let freq = grid.dual()?;
    let (b, edge) = (spec.b, spec.beta / 2.0);
    if edge >= freq.axis(0).radius() {
        return Err(Error::BadGrid(format!("beta/2 = {edge} lies outside the frequency window")));
    }
    let spectrum = SampledFunction::from_fn(&freq, move |s| {
        let a = s[0].abs();
        let v = if a <= b {
            1.0
        } else if a >= edge {
            0.0
        } else {
            profile.at((a - b) / (edge - b))
        };
        Complex64::new(v, 0.0)
    });
    let g = ift_to(&spectrum, grid)?.with_source(periodic_field(&spectrum));
    let decay = fit_decay(&g, profile.order());
    Ok(ReconWindow {
        spec,
        profile,
        g,
        spectrum,
        decay,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum Kernel<'a> {
    Sinc,
    Window(&'a ReconWindow),
}

/// Samples `(alpha k, f(alpha k))` for every lattice point in the window.
pub fn sample_lattice(f: &SampledFunction, alpha: f64) -> Result<Vec<(f64, Complex64)>> {
    line_only(f.grid())?;
    let a = f.grid().axis(0);
    let step = as_integer(alpha / a.spacing)
        .filter(|&m| m > 0)
        .ok_or_else(|| Error::BadParams(format!("alpha = {alpha} is not a multiple of the spacing")))?;
    let origin = a.index_of(0.0).ok_or_else(|| Error::BadGrid("0 is not a node".into()))?;
    Ok((0..a.count as i64)
        .filter(|j| (j - origin).rem_euclid(step) == 0)
        .map(|j| (a.node(j), f.values()[j as usize]))
        .collect())
}

/// `f(t) = alpha sum_k f(alpha k) g(t - alpha k)` over the given samples, on every node of `eval_grid`.
pub fn reconstruct(
    samples: &[(f64, Complex64)],
    alpha: f64,
    kernel: Kernel<'_>,
    eval_grid: &Grid,
) -> Result<SampledFunction> {
    line_only(eval_grid)?;
    for &(t, _) in samples {
        if as_integer(t / alpha).is_none() {
            return Err(Error::BadParams(format!("sample point {t} is off the lattice {alpha} Z")));
        }
    }
    let ea = *eval_grid.axis(0);
    let values: Vec<Complex64> = match kernel {
        Kernel::Sinc => {
            if (alpha - 1.0).abs() > 1e-12 {
                return Err(Error::BadParams("the sinc series needs alpha = 1".into()));
            }
            (0..ea.count as i64)
                .map(|i| {
                    let t = ea.node(i);
                    samples.iter().map(|(tk, v)| v * sinc(t - tk)).sum()
                })
                .collect()
        }
        Kernel::Window(w) => {
            if (alpha * w.spec.beta - 1.0).abs() > 1e-12 {
                return Err(Error::BadParams(format!(
                    "window designed for beta = {} used with alpha = {alpha}",
                    w.spec.beta
                )));
            }
            let ga = *w.g.grid().axis(0);
            let origin = as_integer(ga.origin / ga.spacing);
            let n = ga.count as i64;
            // on common nodes the periodic kernel is a table lookup
            let lookup = |u: f64| -> Complex64 {
                match (origin, as_integer(u / ga.spacing)) {
                    (Some(o), Some(m)) if (ea.spacing - ga.spacing).abs() <= 1e-12 * ga.spacing => {
                        w.g.values()[(m - o).rem_euclid(n) as usize]
                    }
                    _ => w.g.eval(&[u]),
                }
            };
            (0..ea.count as i64)
                .map(|i| {
                    let t = ea.node(i);
                    samples.iter().map(|(tk, v)| v * lookup(t - tk)).sum::<Complex64>() * alpha
                })
                .collect()
        }
    };
    SampledFunction::from_values(eval_grid, values)
}

/// Spectral mass of `f` on `|s| >= beta/2`.
pub fn out_of_band_mass(f: &SampledFunction, spec: &BandSpec) -> Result<f64> {
    line_only(f.grid())?;
    let spectrum = fourier(f)?;
    let a = *spectrum.grid().axis(0);
    let edge = spec.beta / 2.0;
    Ok(spectrum
        .values()
        .iter()
        .enumerate()
        .filter(|(j, _)| a.node(*j as i64).abs() >= edge)
        .map(|(_, v)| v.norm())
        .sum::<f64>()
        * a.spacing)
}

/// Samples `f` at rate `beta` after checking that its spectrum fits inside `(-beta/2, beta/2)`.
pub fn sample_checked(f: &SampledFunction, spec: &BandSpec) -> Result<Vec<(f64, Complex64)>> {
    let mass = out_of_band_mass(f, spec)?;
    if mass > 1e-10 {
        return Err(Error::NyquistViolation {
            mass,
            half_beta: spec.beta / 2.0,
        });
    }
    sample_lattice(f, spec.alpha())
}

/// `max |(Shah_beta * F f) g^ - F f|` on the frequency grid.
pub fn alias_residual(f: &SampledFunction, window: &ReconWindow) -> Result<f64> {
    let spectrum = fourier(f)?;
    spectrum.grid().check_same(window.spectrum.grid())?;
    let a = *spectrum.grid().axis(0);
    let shift = as_integer(window.spec.beta / a.spacing)
        .ok_or_else(|| Error::BadParams("beta is not a multiple of the frequency spacing".into()))?;
    let n = a.count as i64;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut periodized = Complex64::new(0.0, 0.0);
        let mut k = -(n / shift.max(1)) - 1;
        while k * shift <= n {
            let src = j - k * shift;
            if (0..n).contains(&src) {
                periodized += spectrum.values()[src as usize];
            }
            k += 1;
        }
        let lhs = periodized * window.spectrum.values()[j as usize];
        worst = worst.max((lhs - spectrum.values()[j as usize]).norm());
    }
    Ok(worst)
}

/// Largest deviation on the central half of the window.
pub fn central_error(recon: &SampledFunction, reference: &SampledFunction) -> Result<f64> {
    recon.grid().check_same(reference.grid())?;
    let quarter = recon.grid().axis(0).length() / 4.0;
    Ok(recon
        .values()
        .iter()
        .zip(reference.values())
        .enumerate()
        .filter(|(j, _)| recon.grid().point(*j)[0].abs() < quarter)
        .map(|(_, (a, b))| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Error of the series built from the samples with `|alpha k| <= radius`,
/// measured on the nodes with `|t| <= radius / 2`.
pub fn truncated_error(f: &SampledFunction, alpha: f64, kernel: Kernel<'_>, radius: f64) -> Result<f64> {
    let samples: Vec<(f64, Complex64)> = sample_lattice(f, alpha)?
        .into_iter()
        .filter(|(t, _)| t.abs() <= radius)
        .collect();
    let recon = reconstruct(&samples, alpha, kernel, f.grid())?;
    Ok(recon
        .values()
        .iter()
        .zip(f.values())
        .enumerate()
        .filter(|(j, _)| f.grid().point(*j)[0].abs() <= radius / 2.0)
        .map(|(_, (a, b))| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Membership in the band-limited class, decided from the spectrum alone and
/// from S0 membership together with the spectral support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandMembership {
    pub by_spectrum: bool,
    pub by_s0: bool,
}

pub fn band_membership(f: &SampledFunction, b: f64) -> Result<BandMembership> {
    line_only(f.grid())?;
    let spectrum = fourier(f)?;
    let a = *spectrum.grid().axis(0);
    let sup = spectrum.sup();
    let edge = b + a.spacing;
    let by_spectrum = spectrum
        .values()
        .iter()
        .enumerate()
        .filter(|(j, _)| a.node(*j as i64).abs() > edge)
        .all(|(_, v)| v.norm() <= 1e-12 * sup);
    let in_s0 = s0_norm(f, S0Variant::L1, 4).map(|n| n.is_finite()).unwrap_or(false);
    Ok(BandMembership {
        by_spectrum,
        by_s0: in_s0 && by_spectrum,
    })
}
