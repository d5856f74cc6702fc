//! Named verification suites: each runs one module's identities and bounds on
//! seeded corpora and records measured residuals against tolerances.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bupu::{envelope, tent_bupu, Envelope};
use crate::corpus::{battery, corpus, mixture_pairs, random_measure, rng, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::feichtinger::{s0_norm, stft, tensor, S0Variant};
use crate::fourier::{fourier, identity_residuals, poisson, poisson_gauss};
use crate::grid::{act, gaussian, mul, norms, pairing, sample, sample_named, tent, Action, Grid, LatticeMatrix, SampledFunction};
use crate::measures::{
    measure_act, measure_bupu_decompose, measure_convolve, measure_norm, BoundedMeasure, MeasureAction,
};
use crate::mild::{dist_act, dist_apply, dist_convolve, dist_ft, dist_multiply, wstar_gap, Component, MildDistribution};
use crate::numeric::{cis_turns, max_abs_diff};
use crate::sampling::{
    alias_residual, bandlimit, central_error, design_window, reconstruct, sample_checked, sample_lattice, BandSpec,
    Kernel, Profile,
};
use crate::systems::{
    central_gap, chirp_fourier_constant, diagonal_delta, kernel_apply, kernel_apply_dist, kernel_build,
    kernel_compose, norm_witness, tils_apply, tils_checked, KernelKind, KernelOperator, Path, Tils,
};
use crate::wiener::{wiener_norm, Variant};

/// Suite names in report order.
pub const SUITES: [&str; 8] = [
    "feichtinger",
    "fourier",
    "measures",
    "mild",
    "poisson",
    "sampling",
    "systems",
    "wiener",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub h: f64,
    pub n: usize,
    /// Left end of the window; `None` centres it.
    pub t0: Option<f64>,
    /// Replaces the tolerance of every residual check.
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            h: 1.0 / 16.0,
            n: 1024,
            t0: None,
            tol: None,
            seed: DEFAULT_SEED,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.t0, self.h, self.n, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t >= f64::EPSILON) {
                return Err(Error::BadParams(format!("tolerance {t} is below machine epsilon")));
            }
        }
        self.grid().map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Residual of an identity; `--tol` overrides the tolerance.
    Residual,
    /// Measured quantity against a fixed limit.
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    /// `None` when the computation itself failed.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub anchor: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub h: f64,
    pub n: usize,
    pub t0: f64,
    pub seed: u64,
    pub tol: Option<f64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub timestamp: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub pass: bool,
    pub environment: Environment,
    pub suites: Vec<SuiteReport>,
    pub timing: Timing,
}

impl Report {
    /// The report with its timing block zeroed, for comparing runs.
    pub fn without_timing(&self) -> Report {
        Report {
            timing: Timing {
                timestamp: 0,
                wall_seconds: 0.0,
            },
            ..self.clone()
        }
    }

    pub fn checks(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.suites.iter().flat_map(|s| s.checks.iter().map(move |c| (s.name.as_str(), c)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

struct Suite {
    tol: Option<f64>,
    checks: Vec<Check>,
}

impl Suite {
    fn new(config: &RunConfig) -> Suite {
        Suite {
            tol: config.tol,
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, anchor: &str, kind: CheckKind, tolerance: f64, r: Result<f64>) {
        let tolerance = match (kind, self.tol) {
            (CheckKind::Residual, Some(t)) => t,
            _ => tolerance,
        };
        let (measured, error) = match r {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = measured.is_some_and(|v| v <= tolerance);
        self.checks.push(Check {
            name: name.into(),
            kind,
            measured,
            tolerance,
            pass,
            anchor: anchor.into(),
            error,
        });
    }

    fn residual(&mut self, name: &str, anchor: &str, tolerance: f64, r: Result<f64>) {
        self.push(name, anchor, CheckKind::Residual, tolerance, r)
    }

    fn bound(&mut self, name: &str, anchor: &str, limit: f64, r: Result<f64>) {
        self.push(name, anchor, CheckKind::Bound, limit, r)
    }

    fn finish(self, name: &str) -> SuiteReport {
        SuiteReport {
            name: name.into(),
            pass: self.checks.iter().all(|c| c.pass),
            checks: self.checks,
        }
    }
}

/// Largest ratio of consecutive gaps; below one iff the gaps strictly decrease.
fn decrease_ratio(gaps: &[f64]) -> f64 {
    gaps.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

/// Limit for strictly decreasing sequences.
const STRICT: f64 = 1.0 - f64::EPSILON;

fn max_over<T>(items: &[T], f: impl Fn(&T) -> Result<f64>) -> Result<f64> {
    items.iter().try_fold(0.0f64, |acc, x| Ok(acc.max(f(x)?)))
}

fn self_dual() -> Grid {
    Grid::line(1.0 / 16.0, 256).expect("valid grid")
}

fn smooth(b: &[SampledFunction]) -> Vec<SampledFunction> {
    b.iter().filter(|f| !f.label().unwrap_or("").starts_with("tent")).cloned().collect()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn run_suite(name: &str, config: &RunConfig) -> Result<SuiteReport> {
    let g = config.grid()?;
    let mut s = Suite::new(config);
    match name {
        "wiener" => wiener_suite(&mut s, &g, config.seed),
        "measures" => measures_suite(&mut s, &g, config.seed),
        "fourier" => fourier_suite(&mut s, &g, config.seed),
        "poisson" => poisson_suite(&mut s, &g, config.seed),
        "feichtinger" => feichtinger_suite(&mut s, &g, config.seed),
        "mild" => mild_suite(&mut s, config.seed),
        "sampling" => sampling_suite(&mut s, &g),
        "systems" => systems_suite(&mut s, &g, config.seed),
        other => return Err(Error::UnknownSuite(other.into())),
    }
    Ok(s.finish(name))
}

/// Runs one suite, or every suite for `all`; suites run on separate threads
/// and the report lists them by name.
pub fn run_verify(suite: &str, config: &RunConfig) -> Result<Report> {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(Error::UnknownSuite(other.into())),
    };
    config.validate()?;
    let grid = config.grid()?;
    let start = Instant::now();
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let results: Vec<Result<SuiteReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = names.iter().map(|n| scope.spawn(move || run_suite(n, config))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    let suites = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Report {
        suite: suite.into(),
        pass: suites.iter().all(|s| s.pass),
        environment: Environment {
            h: config.h,
            n: config.n,
            t0: grid.axis(0).origin,
            seed: config.seed,
            tol: config.tol,
            version: env!("CARGO_PKG_VERSION").into(),
        },
        suites,
        timing: Timing {
            timestamp,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

fn wiener_suite(s: &mut Suite, g: &Grid, seed: u64) {
    let b = tent_bupu(g);
    let nw = |u: &SampledFunction| wiener_norm(u, &b, Variant::Bupu).map(|r| r.norm);
    let fs = corpus(g, seed, 30);
    let pairs: Vec<(&SampledFunction, &SampledFunction)> = fs.iter().zip(fs.iter().cycle().skip(1)).collect();
    s.residual(
        "tent_norm",
        "Wiener norm of the tent is 3/2",
        1e-9,
        nw(&tent(g)).map(|v| (v - 1.5).abs()),
    );
    s.bound(
        "solidity",
        "solidity: |h| <= |f| pointwise implies ||h||_W <= ||f||_W",
        1e-12,
        max_over(&fs, |f| {
            let wf = nw(f)?;
            let parts = [f.abs(), f.map(|v| c(v.re)), f.map(|v| c(v.im))];
            max_over(&parts, |p| Ok(nw(p)? - wf)).map(|v| v.max(f.sup() - wf))
        }),
    );
    s.bound(
        "ideal_bound",
        "||h f||_W <= ||h||_inf ||f||_W",
        1.0 + 1e-12,
        max_over(&pairs, |(f, h)| Ok(nw(&mul(h, f)?)? / (h.sup() * nw(f)?))),
    );
    s.bound(
        "algebra_bound",
        "||h f||_W <= ||h||_W ||f||_W",
        1.0 + 1e-12,
        max_over(&pairs, |(f, h)| Ok(nw(&mul(h, f)?)? / (nw(h)? * nw(f)?))),
    );
    s.residual(
        "modulation_isometry",
        "||M_w f||_W = ||f||_W",
        1e-12,
        max_over(&fs, |f| {
            let wf = nw(f)?;
            let m = act(f, &Action::Modulate(vec![0.37]))?;
            Ok((nw(&m)? - wf).abs() / wf)
        }),
    );
    let h = g.axis(0).spacing;
    s.bound(
        "translation_ratio",
        "||T_x f||_W <= 4^d ||f||_W",
        4.0,
        max_over(&fs, |f| {
            let wf = nw(f)?;
            max_over(&[-40i64, -7, 5, 24], |m| Ok(nw(&act(f, &Action::Translate(vec![*m as f64 * h]))?)? / wf))
        }),
    );
    let sandwich = |f: &SampledFunction| -> Result<f64> { Ok(nw(&envelope(f, Envelope::LocalMax)?)? / nw(f)?) };
    s.bound(
        "maximal_sandwich_lower",
        "||f||_W <= ||f#||_W",
        1e-12,
        max_over(&fs, |f| Ok(1.0 - sandwich(f)?)),
    );
    s.bound(
        "maximal_sandwich_upper",
        "||f#||_W <= 8^d ||f||_W",
        8.0,
        max_over(&fs, sandwich),
    );
}

fn measures_suite(s: &mut Suite, g: &Grid, seed: u64) {
    let psi = tent_bupu(g);
    let mut r = rng(seed);
    let mus: Vec<BoundedMeasure> = (0..10).map(|_| random_measure(g, &mut r)).collect();
    s.residual(
        "bupu_decomposition_norm",
        "sum_n ||mu psi_n|| = ||mu||",
        1e-12,
        max_over(&mus, |mu| {
            let total: f64 = measure_bupu_decompose(mu, &psi)?.iter().map(|(_, m)| measure_norm(m)).sum();
            Ok((total - measure_norm(mu)).abs() / measure_norm(mu))
        }),
    );
    let fs = corpus(g, seed, 10);
    let h = g.axis(0).spacing;
    s.bound(
        "dirac_convolution_exact",
        "delta_x * f = T_x f",
        0.0,
        max_over(&fs, |f| {
            max_over(&[-13i64, 1, 40], |k| {
                let x = *k as f64 * h;
                let lhs = measure_convolve(&BoundedMeasure::dirac(&[x]), f)?;
                Ok(max_abs_diff(lhs.values(), act(f, &Action::Translate(vec![x]))?.values()))
            })
        }),
    );
    s.bound(
        "multiplier_bound",
        "||h mu|| <= ||h||_inf ||mu||",
        1.0 + 1e-12,
        max_over(&mus.iter().zip(&fs).collect::<Vec<_>>(), |(mu, f)| {
            Ok(measure_norm(&measure_act(mu, &MeasureAction::MulBy((*f).clone()))?) / (f.sup() * measure_norm(mu)))
        }),
    );
}

fn fourier_suite(s: &mut Suite, g: &Grid, seed: u64) {
    let g0 = gaussian(g);
    s.residual(
        "gaussian_invariance",
        "the Gaussian is invariant under the Fourier transform",
        1e-9,
        fourier(&g0).map(|h| max_abs_diff(h.values(), gaussian(h.grid()).values())),
    );
    let g2 = Grid::new(None, 1.0 / 16.0, 256, 2).expect("valid grid");
    s.residual(
        "gaussian_invariance_2d",
        "the Gaussian is invariant under the Fourier transform",
        1e-9,
        fourier(&gaussian(&g2)).map(|h| max_abs_diff(h.values(), gaussian(h.grid()).values())),
    );
    let reports: Result<Vec<_>> = mixture_pairs(g, seed, 20).iter().map(|(f, h)| identity_residuals(f, h)).collect();
    let field = |pick: fn(&crate::fourier::ResidualReport) -> f64| {
        reports.clone().map(|rs| rs.iter().map(pick).fold(0.0, f64::max))
    };
    s.residual("fundamental_identity", "int f g^ = int f^ g", 1e-8, field(|r| r.fundamental));
    s.residual("convolution_theorem", "(f * g)^ = f^ g^", 1e-8, field(|r| r.convolution));
    s.residual("parseval", "<f^, g^> = <f, g>", 1e-8, field(|r| r.parseval.max(r.parseval_conjugated)));
    s.residual("inversion", "F^-1 F f = f", 1e-8, field(|r| r.inversion));
    s.bound(
        "riemann_lebesgue",
        "||f^||_inf <= ||f||_1",
        1.0 + 1e-12,
        max_over(&corpus(g, seed, 12), |f| Ok(fourier(f)?.sup() / norms(f).l1)),
    );
}

fn poisson_suite(s: &mut Suite, g: &Grid, seed: u64) {
    let id = LatticeMatrix::identity(1);
    for (a, name) in [(0.5, "theta_a_half"), (2.0, "theta_a_2"), (3.0, "theta_a_3")] {
        s.residual(
            name,
            "sum_k f(k) = sum_k f^(k) for f = exp(-pi a t^2)",
            1e-12,
            sample_named("gaussian", &[a], g).and_then(|f| poisson(&f, &id, 0, &[0.0], &[0.0])).map(|p| p.residual()),
        );
    }
    let mut r = rng(seed);
    let shifts: Vec<(f64, f64)> = (0..5)
        .map(|_| {
            use rand::Rng;
            (r.gen_range(-16i64..=16) as f64 / 16.0, r.gen_range(-12i64..=12) as f64 / 16.0)
        })
        .collect();
    let half = LatticeMatrix::new(&[0.5]).expect("invertible");
    let g0 = gaussian(g);
    s.residual(
        "shifted_form",
        "sum_k e^{2 pi i w.Ak} f(Ak - x) = e^{2 pi i w.x} |det A|^-1 sum_k e^{-2 pi i A'k.x} f^(A'k - w)",
        1e-10,
        max_over(&shifts, |(x, w)| Ok(poisson(&g0, &half, 0, &[*x], &[*w])?.residual())),
    );
    s.residual(
        "gaussian_theta_series",
        "theta series of the shifted Gaussian Poisson identity",
        1e-12,
        max_over(&shifts, |(x, w)| {
            let t = poisson_gauss(&half, &[*x], &[*w])?;
            Ok(t.residual() / t.lhs.norm().max(1.0))
        }),
    );
    let g2 = Grid::new(None, 1.0 / 16.0, 256, 2).expect("valid grid");
    s.residual(
        "partial_form",
        "int sum_k f(x, k) dx = sum_k f^(0, k) on g0 (x) g0",
        1e-10,
        poisson(&gaussian(&g2), &LatticeMatrix::identity(2), 1, &[0.0, 0.0], &[0.0, 0.0]).map(|p| p.residual()),
    );
}

fn feichtinger_suite(s: &mut Suite, g: &Grid, seed: u64) {
    let g0 = gaussian(g);
    s.residual(
        "gaussian_s0_norm",
        "||g0||_S0 = sqrt 2",
        1e-6,
        s0_norm(&g0, S0Variant::L1, 4).map(|n| (n - 2f64.sqrt()).abs()),
    );
    s.residual(
        "stft_origin_value",
        "V_g0 g0(0, 0) = 2^-1/2",
        1e-9,
        stft(&g0, &g0, 4).and_then(|p| {
            let xi = p.axes()[0].index_of(0.0).ok_or_else(|| Error::BadGrid("0 is not a lattice point".into()))?;
            let wi = p.axes()[1].index_of(0.0).ok_or_else(|| Error::BadGrid("0 is not a frequency".into()))?;
            Ok((p.value(&[xi as usize], &[wi as usize]) - c(0.5f64.sqrt())).norm())
        }),
    );
    let sd = self_dual();
    let fs = smooth(&corpus(&sd, seed, 30));
    let norm = |f: &SampledFunction| s0_norm(f, S0Variant::L1, 1);
    s.residual(
        "tf_shift_invariance",
        "||M_w T_x f||_S0 = ||f||_S0",
        1e-6,
        max_over(&fs, |f| {
            let shifted = act(&act(f, &Action::Translate(vec![0.5]))?, &Action::Modulate(vec![0.75]))?;
            Ok((norm(&shifted)? / norm(f)? - 1.0).abs())
        }),
    );
    s.residual(
        "fourier_invariance",
        "||f^||_S0 = ||f||_S0",
        1e-6,
        max_over(&fs, |f| Ok((norm(&fourier(f)?)? / norm(f)? - 1.0).abs())),
    );
    s.bound(
        "norm_domination",
        "||f||_1 + ||f||_inf <= 2 ||f||_S0",
        1.0 + 1e-12,
        max_over(&fs, |f| {
            let n = norm(f)?;
            Ok((norms(f).l1 / n).max(f.sup() / n))
        }),
    );
    s.bound(
        "product_bound",
        "||f h||_S0 <= C ||f||_S0 ||h||_S0",
        2.0,
        max_over(&fs.iter().zip(fs.iter().skip(1)).collect::<Vec<_>>(), |(f, h)| {
            Ok(norm(&mul(f, h)?)? / (norm(f)? * norm(h)?))
        }),
    );
    let small = Grid::line(1.0 / 8.0, 64).expect("valid grid");
    let gs = gaussian(&small);
    s.residual(
        "tensor_norm",
        "||g0 (x) g0||_S0 = ||g0||_S0^2",
        1e-6,
        tensor(&gs, &gs).and_then(|t| s0_norm(&t, S0Variant::L1, 4)).map(|n| (n - 2.0).abs()),
    );
}

fn mild_samples(g: &Grid) -> Vec<MildDistribution> {
    let mix = sample_named("gaussian_mixture", &[0.8, 0.5, 0.9, 0.0, -0.3, -1.0, 1.2, 0.0], g).expect("valid mixture");
    let chirp = MildDistribution::chirp(0.25, 1);
    vec![
        MildDistribution::dirac(&[0.3]),
        MildDistribution::shah(&LatticeMatrix::identity(1)),
        MildDistribution::truncated_shah(&LatticeMatrix::new(&[0.5]).expect("invertible"), 3),
        MildDistribution::pure_frequency(&[0.75]),
        chirp.clone(),
        MildDistribution::regular(&mix),
        dist_ft(&chirp).expect("chirp transform"),
        dist_multiply(&chirp, &gaussian(g)).expect("product"),
    ]
}

/// Whether a check on `s` (or on its transform) meets the spectra of the
/// test functions; those checks use the smooth part of the battery.
fn spectral(s: &MildDistribution, transformed: bool) -> bool {
    s.components().iter().any(|c| match c {
        Component::Fourier(inner) => matches!(**inner, Component::Chirp { .. } | Component::Comb { truncation: None, .. }),
        Component::Chirp { .. } | Component::Comb { truncation: None, .. } => transformed,
        _ => false,
    })
}

fn pairing_consistency(seed: u64) -> Result<f64> {
    let g = self_dual();
    let bat = battery(&g, seed);
    let soft = smooth(&bat);
    let wide = smooth(&battery(&Grid::line(1.0 / 16.0, 1024)?, seed));
    let actions = [
        Action::Translate(vec![0.5]),
        Action::Modulate(vec![0.25]),
        Action::Flip,
        Action::Conjugate,
    ];
    let mut worst: f64 = 0.0;
    for s in mild_samples(&g) {
        let set = if spectral(&s, false) { &soft } else { &bat };
        for f in set {
            for a in &actions {
                let lhs = dist_apply(&dist_act(a, &s)?, f)?;
                let rhs = match a {
                    Action::Translate(z) => dist_apply(&s, &act(f, &Action::Translate(vec![-z[0]]))?)?,
                    Action::Conjugate => dist_apply(&s, &act(f, a)?)?.conj(),
                    _ => dist_apply(&s, &act(f, a)?)?,
                };
                worst = worst.max((lhs - rhs).norm());
            }
        }
        let fts = dist_ft(&s)?;
        let set = if spectral(&s, true) { &soft } else { &bat };
        for f in set {
            worst = worst.max((dist_apply(&fts, f)? - dist_apply(&s, &fourier(f)?)?).norm());
        }
        let wrapped = matches!(s.components()[0], Component::Fourier(_));
        let b = LatticeMatrix::new(&[if wrapped { 2.0 } else { 0.5 }])?;
        for f in &wide {
            let lhs = dist_apply(&dist_act(&Action::MatrixDilate(b.clone()), &s)?, f)?;
            let rhs = dist_apply(&s, &act(f, &Action::MatrixDilate(b.inverse()))?)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

fn exchange_identities(seed: u64) -> Result<f64> {
    let g = self_dual();
    let soft = smooth(&battery(&g, seed));
    let h = sample_named("gaussian_mixture", &[1.0, 0.25, 0.9, 0.0], &g)?;
    let hh = fourier(&h)?;
    let mut worst: f64 = 0.0;
    for s in mild_samples(&g) {
        let lhs = dist_ft(&MildDistribution::regular(&dist_convolve(&s, &h)?))?;
        let rhs = dist_multiply(&dist_ft(&s)?, &hh)?;
        worst = worst.max(wstar_gap(&lhs, &rhs, &soft)?);
        let lhs = dist_ft(&dist_multiply(&s, &h)?)?;
        let rhs = MildDistribution::regular(&dist_convolve(&dist_ft(&s)?, &hh)?);
        worst = worst.max(wstar_gap(&lhs, &rhs, &soft)?);
    }
    Ok(worst)
}

/// Battery gaps along the three designated weak-* convergent sequences.
pub fn weak_star_gaps(seed: u64) -> Result<[Vec<f64>; 3]> {
    let g = Grid::line(1.0 / 128.0, 4096)?;
    let bat = battery(&g, seed);
    let d0 = MildDistribution::dirac(&[0.0]);
    let g0 = gaussian(&g);
    let dilations = [0.5, 0.25, 0.125, 0.0625, 0.03125]
        .iter()
        .map(|&rho| wstar_gap(&MildDistribution::regular(&act(&g0, &Action::Stretch(rho))?), &d0, &bat))
        .collect::<Result<Vec<_>>>()?;
    let diracs = (1..=5)
        .map(|n| wstar_gap(&MildDistribution::dirac(&[0.5f64.powi(n)]), &d0, &bat))
        .collect::<Result<Vec<_>>>()?;
    let id = LatticeMatrix::identity(1);
    let shah = MildDistribution::shah(&id);
    let combs = (1..=5u32)
        .map(|k| wstar_gap(&MildDistribution::truncated_shah(&id, k), &shah, &bat))
        .collect::<Result<Vec<_>>>()?;
    Ok([dilations, diracs, combs])
}

fn mild_suite(s: &mut Suite, seed: u64) {
    let g = self_dual();
    let bat = battery(&g, seed);
    s.residual(
        "dual_pairing_consistency",
        "extended operators act by the transpose: (T sigma)(f) = sigma(T' f)",
        1e-9,
        pairing_consistency(seed),
    );
    let fd = dist_ft(&MildDistribution::dirac(&[0.0]));
    s.residual(
        "fourier_of_dirac",
        "F delta_0 = 1",
        1e-12,
        fd.and_then(|fd| max_over(&bat, |f| Ok((dist_apply(&fd, f)? - crate::grid::integrate(f)).norm()))),
    );
    s.residual(
        "fourier_of_comb",
        "F Shah_2 = (1/2) Shah_(1/2)",
        1e-10,
        (|| {
            // (F Shah_2)(f) = Shah_2(f^), evaluated on the sampled spectrum
            let two = MildDistribution::shah(&LatticeMatrix::new(&[2.0])?);
            let half = MildDistribution::shah(&LatticeMatrix::new(&[0.5])?).scale(c(0.5));
            let rewritten = wstar_gap(&dist_ft(&two)?, &half, &smooth(&bat))?;
            max_over(&smooth(&bat), |f| Ok((dist_apply(&two, &fourier(f)?)? - dist_apply(&half, f)?).norm()))
                .map(|v| v.max(rewritten))
        })(),
    );
    s.residual(
        "period_four",
        "F^4 = id",
        1e-8,
        max_over(&mild_samples(&g), |d| {
            let mut t = d.clone();
            for _ in 0..4 {
                t = dist_ft(&t)?;
            }
            let set = if spectral(d, true) { smooth(&bat) } else { bat.clone() };
            wstar_gap(d, &t, &set)
        }),
    );
    s.residual(
        "exchange_identities",
        "F(sigma * h) = F sigma . F h and F(sigma . h) = F sigma * F h",
        1e-9,
        exchange_identities(seed),
    );
    match weak_star_gaps(seed) {
        Ok(gaps) => {
            for (name, v) in ["weak_star_dilations", "weak_star_diracs", "weak_star_combs"].iter().zip(gaps) {
                s.bound(name, "weak-* convergence: battery gaps strictly decrease", STRICT, Ok(decrease_ratio(&v)));
            }
        }
        Err(e) => {
            for name in ["weak_star_dilations", "weak_star_diracs", "weak_star_combs"] {
                s.bound(name, "weak-* convergence: battery gaps strictly decrease", STRICT, Err(e.clone()));
            }
        }
    }
}

fn sampling_suite(s: &mut Suite, g: &Grid) {
    let run = || -> Result<(f64, f64, f64)> {
        let sc = sample_named("sinc", &[], g)?;
        let sinc = central_error(&reconstruct(&sample_lattice(&sc, 1.0)?, 1.0, Kernel::Sinc, g)?, &sc)?;
        let spec = BandSpec::new(0.4, 1.0)?;
        let f = bandlimit(&gaussian(g), &spec)?;
        let w = design_window(&spec, Profile::RaisedCosine, g)?;
        let windowed = central_error(&reconstruct(&sample_checked(&f, &spec)?, 1.0, Kernel::Window(&w), g)?, &f)?;
        Ok((windowed, sinc, alias_residual(&f, &w)?))
    };
    let r = run();
    let pick = |k: usize| r.clone().map(|t| [t.0, t.1, t.2][k]);
    s.residual(
        "windowed_reconstruction",
        "f = sum_k f(alpha k) T_(alpha k) g for band-limited f",
        1e-8,
        pick(0),
    );
    s.residual(
        "sinc_reconstruction",
        "sinc series reconstructs sinc, limited by truncation",
        1e-3,
        pick(1),
    );
    s.residual("alias_identity", "(Shah_alpha f) * g = f in the spectrum", 1e-10, pick(2));
}

fn systems_suite(s: &mut Suite, g: &Grid, seed: u64) {
    let fs = corpus(g, seed, 10);
    s.bound(
        "dirac_system_exact",
        "delta_x * f = T_x f",
        0.0,
        Tils::new(MildDistribution::dirac(&[0.5])).and_then(|sys| {
            max_over(&fs, |f| {
                let t = tils_apply(&sys, f, Path::Time)?;
                Ok(max_abs_diff(t.values(), act(f, &Action::Translate(vec![0.5]))?.values()))
            })
        }),
    );
    let smooth_sys = Tils::new(MildDistribution::regular(&gaussian(g)));
    s.residual(
        "path_agreement",
        "sigma * f = F^-1(sigma^ f^)",
        1e-8,
        smooth_sys.clone().and_then(|sys| max_over(&fs, |f| Ok(tils_checked(&sys, f, f64::INFINITY)?.1))),
    );
    let chirp_grid = Grid::line(1.0 / 64.0, 1024).expect("valid grid");
    s.residual(
        "chirp_path_agreement",
        "convolution by a chirp through both paths",
        1e-6,
        Tils::new(MildDistribution::chirp(1.0, 1))
            .and_then(|sys| tils_checked(&sys, &gaussian(&chirp_grid), f64::INFINITY).map(|r| r.1)),
    );
    let fine = Grid::line(1.0 / 32.0, 2048).expect("valid grid");
    s.residual(
        "chirp_fourier_constant",
        "F(e^{i pi t^2}) = e^{i pi/4} e^{-i pi s^2}",
        1e-6,
        chirp_fourier_constant(1.0, &smooth(&battery(&fine, seed)))
            .map(|(k, spread)| (k - cis_turns(0.125)).norm().max(spread)),
    );
    s.residual(
        "translation_covariance",
        "T(T_x f) = T_x T(f)",
        1e-12,
        smooth_sys.clone().and_then(|sys| {
            max_over(&fs, |f| {
                let x = Action::Translate(vec![0.75]);
                let lhs = tils_apply(&sys, &act(f, &x)?, Path::Time)?;
                Ok(central_gap(&lhs, &act(&tils_apply(&sys, f, Path::Time)?, &x)?))
            })
        }),
    );
    let h = sample_named("gaussian_mixture", &[1.0, 0.25, 0.8, 0.0], g);
    s.residual(
        "convolution_covariance",
        "T(g * f) = g * T(f)",
        1e-10,
        smooth_sys.clone().and_then(|sys| {
            let h = h?;
            max_over(&fs, |f| {
                let lhs = tils_apply(&sys, &crate::fourier::convolve(&h, f)?, Path::Time)?;
                Ok(central_gap(&lhs, &crate::fourier::convolve(&h, &tils_apply(&sys, f, Path::Time)?)?))
            })
        }),
    );
    s.bound(
        "norm_witness_stability",
        "sup|Tf| / ||f||_S0 is stable under refinement",
        1e-2,
        (|| {
            let coarse = Grid::line(g.axis(0).spacing, g.axis(0).count)?;
            let refined = Grid::line(g.axis(0).spacing / 2.0, 2 * g.axis(0).count)?;
            let w = |grid: &Grid, stride: usize| {
                norm_witness(&Tils::new(MildDistribution::regular(&gaussian(grid)))?, &corpus(grid, seed, 6), stride)
            };
            Ok((w(&coarse, 4)? / w(&refined, 8)? - 1.0).abs())
        })(),
    );

    let sd = self_dual();
    s.residual("kernel_composition", "(K2 o K1) u = K2(K1 u) on rank-one triples", 1e-10, kernel_composition(&sd, seed));
    s.residual(
        "kernel_associativity",
        "(K3 o K2) o K1 = K3 o (K2 o K1)",
        1e-10,
        kernel_associativity(&sd, seed),
    );
    s.residual(
        "fourier_kernel_identity",
        "int e^{2 pi i x y} int e^{-2 pi i y z} f(z) dz dy = f(x)",
        1e-8,
        (|| {
            let id = kernel_compose(&kernel_build(KernelKind::Ift, &sd)?, &kernel_build(KernelKind::Ft, &sd)?)?;
            max_over(&corpus(&sd, seed, 7), |f| Ok(max_abs_diff(kernel_apply(&id, f)?.values(), f.values())))
        })(),
    );
    s.residual(
        "kernel_from_dirac",
        "K(x, y) = (T delta_y)(x)",
        1e-12,
        (|| {
            let ft = kernel_build(KernelKind::Ft, &sd)?;
            max_over(&[-1.5, 0.25, 3.0], |y| {
                let y = *y;
                let col = kernel_apply_dist(&ft, &MildDistribution::dirac(&[y]))?;
                let pure = SampledFunction::from_fn(&sd, move |x| cis_turns(-x[0] * y));
                Ok(max_abs_diff(col.values(), pure.values()))
            })
        })(),
    );
    s.residual(
        "diagonal_delta",
        "delta_diag(f (x) g) = int f g",
        1e-10,
        max_over(&corpus(&sd, seed, 6).windows(2).collect::<Vec<_>>(), |w| {
            Ok((diagonal_delta(&tensor(&w[0], &w[1])?)? - pairing(&w[0], &w[1])?).norm())
        }),
    );
    s.bound(
        "kernel_weak_star_to_norm",
        "regularising kernels map weak-* convergent sequences to norm convergent ones",
        STRICT,
        kernel_weak_star(),
    );
}

fn rank_one_triples(g: &Grid, seed: u64) -> Vec<[KernelOperator; 3]> {
    let mut r = rng(seed ^ 0x5eed);
    let mut one = || {
        let a = sample(&crate::corpus::real_mixture(&mut r), g).expect("valid mixture");
        let b = sample(&crate::corpus::modulated_gaussian(&mut r), g).expect("valid mixture");
        kernel_build(KernelKind::RankOne(a, b), g).expect("one-dimensional grid")
    };
    (0..3).map(|_| [one(), one(), one()]).collect()
}

fn kernel_composition(g: &Grid, seed: u64) -> Result<f64> {
    let u = corpus(g, seed, 1).remove(0);
    max_over(&rank_one_triples(g, seed), |[k1, k2, _]| {
        let once = kernel_apply(&kernel_compose(k2, k1)?, &u)?;
        let twice = kernel_apply(k2, &kernel_apply(k1, &u)?)?;
        Ok(max_abs_diff(once.values(), twice.values()))
    })
}

fn kernel_associativity(g: &Grid, seed: u64) -> Result<f64> {
    max_over(&rank_one_triples(g, seed), |[k1, k2, k3]| {
        let lhs = kernel_compose(&kernel_compose(k3, k2)?, k1)?;
        let rhs = kernel_compose(k3, &kernel_compose(k2, k1)?)?;
        Ok(max_abs_diff(lhs.kernel().values(), rhs.kernel().values()))
    })
}

/// Largest consecutive-gap ratio of `sup|T sigma_n - T sigma|` over the three
/// designated sequences, for `K(x, y) = g0(x - y) g0(x)`.
fn kernel_weak_star() -> Result<f64> {
    let g = Grid::line(1.0 / 32.0, 512)?;
    let g0 = gaussian(&g);
    let plane = Grid::from_axes(vec![*g.axis(0), *g.axis(0)])?;
    let k = KernelOperator::from_kernel(SampledFunction::from_fn(&plane, |p| {
        c((-std::f64::consts::PI * ((p[0] - p[1]).powi(2) + p[0] * p[0])).exp())
    }))?;
    let ratio = |seq: Vec<MildDistribution>, limit: MildDistribution| -> Result<f64> {
        let target = kernel_apply_dist(&k, &limit)?;
        let gaps = seq
            .iter()
            .map(|s| Ok(max_abs_diff(kernel_apply_dist(&k, s)?.values(), target.values())))
            .collect::<Result<Vec<f64>>>()?;
        Ok(decrease_ratio(&gaps))
    };
    let d0 = MildDistribution::dirac(&[0.0]);
    let dil = [0.5, 0.25, 0.125, 0.0625]
        .iter()
        .map(|&r| Ok(MildDistribution::regular(&act(&g0, &Action::Stretch(r))?)))
        .collect::<Result<Vec<_>>>()?;
    let id = LatticeMatrix::identity(1);
    Ok(ratio(dil, d0.clone())?
        .max(ratio((1..=5).map(|n| MildDistribution::dirac(&[0.5f64.powi(n)])).collect(), d0)?)
        .max(ratio(
            (1..=4u32).map(|k| MildDistribution::truncated_shah(&id, k)).collect(),
            MildDistribution::truncated_shah(&id, 7),
        )?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_verify("nosuch", &RunConfig::default()), Err(Error::UnknownSuite(_))));
        let bad = RunConfig {
            tol: Some(1e-20),
            ..RunConfig::default()
        };
        assert!(matches!(run_verify("poisson", &bad), Err(Error::BadParams(_))));
    }

    #[test]
    fn poisson_suite_passes_and_round_trips() {
        let r = run_verify("poisson", &RunConfig::default()).unwrap();
        assert!(r.pass, "{}", r.to_json());
        let max = r.checks().filter_map(|(_, c)| c.measured).fold(0.0, f64::max);
        assert!(max <= 1e-10);
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn tolerance_override_applies_to_residuals() {
        let cfg = RunConfig {
            tol: Some(f64::EPSILON),
            ..RunConfig::default()
        };
        let r = run_verify("sampling", &cfg).unwrap();
        assert!(!r.pass);
        assert!(r.checks().all(|(_, c)| c.tolerance == f64::EPSILON));
    }

    #[test]
    fn decrease_ratio_detects_stalls() {
        assert!(decrease_ratio(&[1.0, 0.5, 0.25]) < STRICT);
        assert!(decrease_ratio(&[1.0, 0.5, 0.5]) > STRICT);
    }
}
