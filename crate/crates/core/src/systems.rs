//! Translation-invariant systems, applied through the impulse response or the
//! transfer function, and integral operators given by sampled kernels.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feichtinger::{check_decay, s0_norm, S0Variant};
use crate::fourier::{fourier, ift_to};
use crate::grid::{Field, Grid, SampledFunction};
use crate::mild::{dist_apply, dist_apply_unguarded, dist_convolve, dist_ft, Component, MildDistribution};
use crate::numeric::cis_turns;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    /// `(sigma * f)(x) = sigma(T_x f^flip)`
    Time,
    /// `F^-1(sigma^ F f)`
    Freq,
}

/// Convolution operator with impulse response `sigma` and transfer function `F sigma`.
#[derive(Debug, Clone)]
pub struct Tils {
    impulse: MildDistribution,
    transfer: MildDistribution,
}

impl Tils {
    pub fn new(impulse: MildDistribution) -> Result<Tils> {
        let transfer = dist_ft(&impulse)?;
        Ok(Tils { impulse, transfer })
    }

    pub fn impulse(&self) -> &MildDistribution {
        &self.impulse
    }

    pub fn transfer(&self) -> &MildDistribution {
        &self.transfer
    }

    /// Transfer function sampled on `freq`; chirps are measured as the
    /// transform of their samples on `time`.
    pub fn transfer_samples(&self, time: &Grid, freq: &Grid) -> Result<SampledFunction> {
        let d = freq.dim();
        let mut acc = vec![Complex64::new(0.0, 0.0); freq.len()];
        for c in self.transfer.components() {
            let part: SampledFunction = match c {
                Component::PureFrequency { x, c } => {
                    let (x, c) = (x.clone(), *c);
                    SampledFunction::from_fn(freq, move |s| c * cis_turns(x.iter().zip(s).map(|(a, b)| a * b).sum()))
                }
                Component::Regular(g) => {
                    if g.grid() == freq {
                        g.clone()
                    } else {
                        match g.source() {
                            Some(src) => SampledFunction::from_field(freq, src.clone()),
                            None => return Err(Error::GridMismatch("transfer function off the frequency grid".into())),
                        }
                    }
                }
                Component::Fourier(inner) => match &**inner {
                    Component::Chirp { alpha, center, freq: eta, c } => {
                        let h = time.axes().iter().map(|a| a.spacing).fold(0.0, f64::max);
                        let r = time.axes().iter().map(|a| a.radius()).fold(0.0, f64::max);
                        if alpha.abs() * h * r > 0.25 {
                            return Err(Error::PhaseUnresolved(format!(
                                "alpha h R = {} on the sampling window (rule: alpha h R <= 1/4)",
                                alpha.abs() * h * r
                            )));
                        }
                        fourier(&chirp_samples(*alpha, center, eta, *c, time))?
                    }
                    other => {
                        return Err(Error::BadKind(format!(
                            "the transform of a {} component is not a function",
                            other.kind()
                        )))
                    }
                },
                other => {
                    return Err(Error::BadKind(format!("transfer component {} is not a function", other.kind())))
                }
            };
            if part.grid().dim() != d {
                return Err(Error::GridMismatch("transfer dimension".into()));
            }
            acc.iter_mut().zip(part.values()).for_each(|(a, v)| *a += v);
        }
        SampledFunction::from_values(freq, acc)
    }
}

/// `c exp(2 pi i eta . t) exp(i pi alpha |t - z|^2)` on `grid`.
pub fn chirp_samples(alpha: f64, center: &[f64], eta: &[f64], c: Complex64, grid: &Grid) -> SampledFunction {
    let (z, e) = (center.to_vec(), eta.to_vec());
    SampledFunction::from_fn(grid, move |t| {
        let r2: f64 = t.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
        let lin: f64 = t.iter().zip(&e).map(|(a, b)| a * b).sum();
        c * cis_turns(lin + 0.5 * alpha * r2)
    })
}

pub fn tils_apply(sys: &Tils, f: &SampledFunction, path: Path) -> Result<SampledFunction> {
    check_decay(f)?;
    match path {
        Path::Time => dist_convolve(&sys.impulse, f),
        Path::Freq => {
            let spectrum = fourier(f)?;
            let h = sys.transfer_samples(f.grid(), spectrum.grid())?;
            let product: Vec<Complex64> = spectrum.values().iter().zip(h.values()).map(|(a, b)| a * b).collect();
            Ok(ift_to(&SampledFunction::from_values(spectrum.grid(), product)?, f.grid())?.without_source())
        }
    }
}

/// Both paths, their largest disagreement on the central half-window, and
/// `PathDisagreement` when it exceeds `tol`.
pub fn tils_checked(sys: &Tils, f: &SampledFunction, tol: f64) -> Result<(SampledFunction, f64)> {
    let time = tils_apply(sys, f, Path::Time)?;
    let freq = tils_apply(sys, f, Path::Freq)?;
    let residual = central_gap(&time, &freq);
    if residual > tol {
        return Err(Error::PathDisagreement { residual, tolerance: tol });
    }
    Ok((time, residual))
}

/// `max |a - b|` over nodes in the central half of every axis.
pub fn central_gap(a: &SampledFunction, b: &SampledFunction) -> f64 {
    let grid = a.grid();
    let d = grid.dim();
    a.values()
        .iter()
        .zip(b.values())
        .enumerate()
        .filter(|(j, _)| {
            let p = grid.point(*j);
            (0..d).all(|k| (p[k] - grid.axis(k).origin - grid.axis(k).length() / 2.0).abs() < grid.axis(k).length() / 4.0)
        })
        .map(|(_, (x, y))| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max_f sup|T f| / ||f||_S0` over the corpus.
pub fn norm_witness(sys: &Tils, corpus: &[SampledFunction], stride: usize) -> Result<f64> {
    corpus.iter().try_fold(0.0f64, |acc, f| {
        let out = tils_apply(sys, f, Path::Time)?;
        Ok(acc.max(out.sup() / s0_norm(f, S0Variant::L1, stride)?))
    })
}

/// Constant `c` with `F(chirp_alpha) = c |alpha|^-1/2 chirp_{-1/alpha}`, measured in
/// action on the battery; returns the mean ratio and its largest deviation.
pub fn chirp_fourier_constant(alpha: f64, battery: &[SampledFunction]) -> Result<(Complex64, f64)> {
    if battery.is_empty() {
        return Err(Error::EmptyBattery);
    }
    let d = battery[0].grid().dim();
    let fc = dist_ft(&MildDistribution::chirp(alpha, d))?;
    let reference = MildDistribution::chirp(-1.0 / alpha, d).scale(Complex64::new(alpha.abs().powf(-0.5 * d as f64), 0.0));
    let mut ratios = Vec::new();
    for f in battery {
        let den = dist_apply(&reference, f)?;
        if den.norm() > 1e-8 {
            ratios.push(dist_apply(&fc, f)? / den);
        }
    }
    if ratios.is_empty() {
        return Err(Error::EmptyBattery);
    }
    let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
    Ok((mean, spread))
}

/// Chirp convolution of `f g0(t / w)` for growing damping widths `w`; the
/// regularised route to inputs that do not decay. Returns `(w, output)` pairs.
pub fn regularized_chirp(alpha: f64, f: &SampledFunction, widths: &[f64]) -> Result<Vec<(f64, SampledFunction)>> {
    let sys = Tils::new(MildDistribution::chirp(alpha, f.grid().dim()))?;
    widths
        .iter()
        .map(|&w| {
            let damped = f.map(|v| v).without_source();
            let values = damped
                .values()
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let p = f.grid().point(j);
                    let r2: f64 = p[..f.grid().dim()].iter().map(|t| (t / w) * (t / w)).sum();
                    v * (-std::f64::consts::PI * r2).exp()
                })
                .collect();
            let fw = SampledFunction::from_values(f.grid(), values)?;
            Ok((w, tils_apply(&sys, &fw, Path::Time)?))
        })
        .collect()
}

/// Integral operator with kernel `K(x, y)` sampled on `grid x grid`.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    line: Grid,
    kernel: SampledFunction,
}

#[derive(Debug, Clone)]
pub enum KernelKind {
    /// `f(x) g(y)`
    RankOne(SampledFunction, SampledFunction),
    /// `exp(-2 pi i x y)`
    Ft,
    /// `exp(2 pi i x y)`
    Ift,
    Zero,
}

impl KernelOperator {
    pub fn from_kernel(kernel: SampledFunction) -> Result<KernelOperator> {
        let g = kernel.grid();
        if g.dim() != 2 || g.axis(0) != g.axis(1) {
            return Err(Error::GridMismatch("a kernel lives on grid x grid".into()));
        }
        let line = Grid::from_axes(vec![*g.axis(0)])?;
        Ok(KernelOperator { line, kernel })
    }

    pub fn line(&self) -> &Grid {
        &self.line
    }

    pub fn kernel(&self) -> &SampledFunction {
        &self.kernel
    }

    fn n(&self) -> usize {
        self.line.len()
    }

    fn row(&self, i: usize) -> &[Complex64] {
        let n = self.n();
        &self.kernel.values()[i * n..(i + 1) * n]
    }
}

pub fn kernel_build(kind: KernelKind, grid: &Grid) -> Result<KernelOperator> {
    if grid.dim() != 1 {
        return Err(Error::GridMismatch("kernels act on one-dimensional grids".into()));
    }
    let plane = Grid::from_axes(vec![*grid.axis(0), *grid.axis(0)])?;
    let kernel = match kind {
        KernelKind::RankOne(f, g) => {
            f.grid().check_same(grid)?;
            g.grid().check_same(grid)?;
            crate::feichtinger::tensor(&f, &g)?
        }
        KernelKind::Ft => SampledFunction::from_field(&plane, Arc::new(|p: &[f64]| cis_turns(-p[0] * p[1])) as Field),
        KernelKind::Ift => SampledFunction::from_field(&plane, Arc::new(|p: &[f64]| cis_turns(p[0] * p[1])) as Field),
        KernelKind::Zero => SampledFunction::zeros(&plane),
    };
    KernelOperator::from_kernel(kernel)
}

/// `T u(x) = int K(x, y) u(y) dy`.
pub fn kernel_apply(k: &KernelOperator, u: &SampledFunction) -> Result<SampledFunction> {
    u.grid().check_same(&k.line)?;
    let h = k.line.cell_volume();
    let values = (0..k.n())
        .map(|i| k.row(i).iter().zip(u.values()).map(|(a, b)| a * b).sum::<Complex64>() * h)
        .collect();
    SampledFunction::from_values(&k.line, values)
}

/// `T sigma(x) = sigma(K(x, .))`.
pub fn kernel_apply_dist(k: &KernelOperator, sigma: &MildDistribution) -> Result<SampledFunction> {
    if sigma.dim() != 1 {
        return Err(Error::GridMismatch("kernels act on one-dimensional distributions".into()));
    }
    let values = (0..k.n())
        .map(|i| {
            let row = SampledFunction::from_values(&k.line, k.row(i).to_vec())?;
            dist_apply_unguarded(sigma, &row)
        })
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::from_values(&k.line, values)
}

/// `K(x, z) = int K2(x, y) K1(y, z) dy`.
pub fn kernel_compose(k2: &KernelOperator, k1: &KernelOperator) -> Result<KernelOperator> {
    k2.line.check_same(&k1.line)?;
    let n = k1.n();
    let h = k1.line.cell_volume();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for (y, a) in k2.row(i).iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = a * h;
            for (o, b) in row.iter_mut().zip(k1.row(y)) {
                *o += w * b;
            }
        }
    }
    KernelOperator::from_kernel(SampledFunction::from_values(k1.kernel.grid(), out)?)
}

/// `int F(x, x) dx` for `F` on a square grid.
pub fn diagonal_delta(f: &SampledFunction) -> Result<Complex64> {
    let g = f.grid();
    if g.dim() != 2 || g.axis(0) != g.axis(1) {
        return Err(Error::GridMismatch("the diagonal needs a square grid".into()));
    }
    let n = g.axis(0).count;
    Ok((0..n).map(|i| f.values()[i * n + i]).sum::<Complex64>() * g.axis(0).spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{battery, corpus, DEFAULT_SEED};
    use crate::fourier::convolve;
    use crate::grid::{act, gaussian, pairing, sample_named, tent, Action};
    use crate::numeric::max_abs_diff;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn self_dual() -> Grid {
        Grid::line(1.0 / 16.0, 256).unwrap()
    }

    #[test]
    fn dirac_and_gaussian_systems() {
        let g = Grid::line(1.0 / 16.0, 1024).unwrap();
        let fs = corpus(&g, DEFAULT_SEED, 10);
        let shift = Tils::new(MildDistribution::dirac(&[0.5])).unwrap();
        for f in &fs {
            let expect = act(f, &Action::Translate(vec![0.5])).unwrap();
            let t = tils_apply(&shift, f, Path::Time).unwrap();
            assert_eq!(t.values(), expect.values());
            let w = tils_apply(&shift, f, Path::Freq).unwrap();
            assert!(central_gap(&w, &expect) < 1e-12);
        }
        let smooth = Tils::new(MildDistribution::regular(&gaussian(&g))).unwrap();
        for f in &fs {
            let (_, r) = tils_checked(&smooth, f, 1e-9).unwrap();
            assert!(r < 1e-9);
        }
    }

    #[test]
    fn chirp_system() {
        let g = Grid::line(1.0 / 64.0, 1024).unwrap();
        let sys = Tils::new(MildDistribution::chirp(1.0, 1)).unwrap();
        let (_, r) = tils_checked(&sys, &gaussian(&g), 1e-6).unwrap();
        assert!(r < 1e-6, "{r}");
        let coarse = Grid::line(1.0 / 4.0, 64).unwrap();
        assert!(matches!(
            tils_apply(&sys, &gaussian(&coarse), Path::Freq),
            Err(Error::PhaseUnresolved(_))
        ));
        assert!(matches!(
            tils_apply(&sys, &sample_named("sinc", &[], &g).unwrap(), Path::Time),
            Err(Error::TailTooFat(_))
        ));
        // fine on both sides so the chirp and its transform are resolved
        let fine = Grid::line(1.0 / 32.0, 2048).unwrap();
        let bat: Vec<SampledFunction> = battery(&fine, DEFAULT_SEED)
            .into_iter()
            .filter(|f| !f.label().unwrap_or("").starts_with("tent"))
            .collect();
        let (k, spread) = chirp_fourier_constant(1.0, &bat).unwrap();
        assert!((k - cis_turns(0.125)).norm() < 1e-6 && spread < 1e-6, "{k} {spread}");
    }

    #[test]
    fn covariance_of_systems() {
        let g = self_dual();
        let fs = corpus(&g, DEFAULT_SEED, 6);
        let h = sample_named("gaussian_mixture", &[1.0, 0.25, 0.8, 0.0], &g).unwrap();
        let sys = Tils::new(
            MildDistribution::regular(&gaussian(&g))
                .plus(&MildDistribution::dirac(&[-0.25]))
                .unwrap(),
        )
        .unwrap();
        for f in &fs {
            let x = Action::Translate(vec![0.75]);
            let lhs = tils_apply(&sys, &act(f, &x).unwrap(), Path::Time).unwrap();
            let rhs = act(&tils_apply(&sys, f, Path::Time).unwrap(), &x).unwrap();
            assert!(central_gap(&lhs, &rhs) < 1e-12);
            let lhs = tils_apply(&sys, &convolve(&h, f).unwrap(), Path::Time).unwrap();
            let rhs = convolve(&h, &tils_apply(&sys, f, Path::Time).unwrap()).unwrap();
            assert!(central_gap(&lhs, &rhs) < 1e-10);
        }
        // the norm witness is stable under refinement
        let fine = Grid::line(1.0 / 32.0, 512).unwrap();
        let w1 = norm_witness(&Tils::new(MildDistribution::regular(&gaussian(&g))).unwrap(), &corpus(&g, 3, 6), 2).unwrap();
        let w2 =
            norm_witness(&Tils::new(MildDistribution::regular(&gaussian(&fine))).unwrap(), &corpus(&fine, 3, 6), 4).unwrap();
        assert!(w1.is_finite() && (w1 / w2 - 1.0).abs() < 1e-2, "{w1} {w2}");
    }

    #[test]
    fn kernel_examples() {
        let g = self_dual();
        let g0 = gaussian(&g);
        let u = sample_named("gaussian_mixture", &[1.0, 0.5, 0.9, 0.0], &g).unwrap();
        let zero = kernel_build(KernelKind::Zero, &g).unwrap();
        assert!(kernel_apply(&zero, &u).unwrap().values().iter().all(|v| *v == c(0.0)));
        let r = kernel_build(KernelKind::RankOne(g0.clone(), g0.clone()), &g).unwrap();
        let expect = g0.scale(pairing(&g0, &u).unwrap());
        assert!(max_abs_diff(kernel_apply(&r, &u).unwrap().values(), expect.values()) < 1e-15);
        let ft = kernel_build(KernelKind::Ft, &g).unwrap();
        assert!(max_abs_diff(kernel_apply(&ft, &g0).unwrap().values(), g0.values()) < 1e-8);
        // K(x, y) = (T delta_y)(x)
        let y = 0.5;
        let col = kernel_apply_dist(&r, &MildDistribution::dirac(&[y])).unwrap();
        assert!(max_abs_diff(col.values(), g0.scale(g0.eval(&[y])).values()) < 1e-12);
        let col = kernel_apply_dist(&ft, &MildDistribution::dirac(&[y])).unwrap();
        let pure = SampledFunction::from_fn(&g, move |x| cis_turns(-x[0] * y));
        assert!(max_abs_diff(col.values(), pure.values()) < 1e-12);
        assert!(kernel_apply_dist(&ft, &MildDistribution::zero(1)).unwrap().sup() == 0.0);
        // regular distributions reduce to the function case
        let a = kernel_apply_dist(&ft, &MildDistribution::regular(&u)).unwrap();
        assert!(max_abs_diff(a.values(), kernel_apply(&ft, &u).unwrap().values()) < 1e-12);
    }

    #[test]
    fn composition() {
        let g = self_dual();
        let g0 = gaussian(&g);
        let r = kernel_build(KernelKind::RankOne(g0.clone(), g0.clone()), &g).unwrap();
        let rr = kernel_compose(&r, &r).unwrap();
        let scaled = r.kernel().scale(c(2f64.powf(-0.5)));
        assert!(max_abs_diff(rr.kernel().values(), scaled.values()) < 1e-14);
        let zero = kernel_build(KernelKind::Zero, &g).unwrap();
        assert_eq!(kernel_compose(&r, &zero).unwrap().kernel().sup(), 0.0);

        let id = kernel_compose(&kernel_build(KernelKind::Ift, &g).unwrap(), &kernel_build(KernelKind::Ft, &g).unwrap()).unwrap();
        let mut inputs = vec![g0.clone(), tent(&g)];
        inputs.extend(corpus(&g, 11, 15).into_iter().step_by(3));
        for f in &inputs {
            assert!(max_abs_diff(kernel_apply(&id, f).unwrap().values(), f.values()) < 1e-8);
        }

        let mut rng = crate::corpus::rng(5);
        let mut rank_one = || {
            let a = crate::grid::sample(&crate::corpus::real_mixture(&mut rng), &g).unwrap();
            let b = crate::grid::sample(&crate::corpus::modulated_gaussian(&mut rng), &g).unwrap();
            kernel_build(KernelKind::RankOne(a, b), &g).unwrap()
        };
        let (k1, k2, k3) = (rank_one(), rank_one(), rank_one());
        let lhs = kernel_compose(&kernel_compose(&k3, &k2).unwrap(), &k1).unwrap();
        let rhs = kernel_compose(&k3, &kernel_compose(&k2, &k1).unwrap()).unwrap();
        assert!(max_abs_diff(lhs.kernel().values(), rhs.kernel().values()) < 1e-10);
        let k21 = kernel_compose(&k2, &k1).unwrap();
        let once = kernel_apply(&k21, &u_of(&g)).unwrap();
        let twice = kernel_apply(&k2, &kernel_apply(&k1, &u_of(&g)).unwrap()).unwrap();
        assert!(max_abs_diff(once.values(), twice.values()) < 1e-10);
    }

    fn u_of(g: &Grid) -> SampledFunction {
        sample_named("gaussian_mixture", &[0.7, -0.5, 1.1, 0.4], g).unwrap()
    }

    #[test]
    fn diagonal_pairing() {
        let g = self_dual();
        let f = u_of(&g);
        let h = sample_named("gaussian_mixture", &[1.0, 0.3, 0.8, 0.0], &g).unwrap();
        let t = crate::feichtinger::tensor(&f, &h).unwrap();
        assert!((diagonal_delta(&t).unwrap() - pairing(&f, &h).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn regularizing_kernel_maps_weak_star_to_norm() {
        let g = Grid::line(1.0 / 32.0, 512).unwrap();
        let g0 = gaussian(&g);
        let plane = Grid::from_axes(vec![*g.axis(0), *g.axis(0)]).unwrap();
        let k = KernelOperator::from_kernel(SampledFunction::from_fn(&plane, |p| {
            c((-std::f64::consts::PI * ((p[0] - p[1]).powi(2) + p[0] * p[0])).exp())
        }))
        .unwrap();
        let decreasing = |seq: Vec<MildDistribution>, limit: MildDistribution| {
            let target = kernel_apply_dist(&k, &limit).unwrap();
            let gaps: Vec<f64> = seq
                .iter()
                .map(|s| max_abs_diff(kernel_apply_dist(&k, s).unwrap().values(), target.values()))
                .collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        };
        let d0 = MildDistribution::dirac(&[0.0]);
        decreasing(
            [0.5, 0.25, 0.125, 0.0625]
                .iter()
                .map(|&r| MildDistribution::regular(&act(&g0, &Action::Stretch(r)).unwrap()))
                .collect(),
            d0.clone(),
        );
        decreasing((1..=5).map(|n| MildDistribution::dirac(&[0.5f64.powi(n)])).collect(), d0);
        let lat = crate::grid::LatticeMatrix::identity(1);
        decreasing(
            [1u32, 2, 3, 4].iter().map(|&k| MildDistribution::truncated_shah(&lat, k)).collect(),
            MildDistribution::truncated_shah(&lat, 7),
        );
    }
}
