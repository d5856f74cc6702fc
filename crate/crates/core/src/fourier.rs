//! The continuous Fourier transform `f^(s) = int f(t) exp(-2 pi i s.t) dt`
//! approximated by an FFT with analytic origin phases, direct-quadrature
//! convolution, and the residuals of the classical Fourier identities
//! (fundamental identity, convolution theorem, Parseval, inversion, Poisson).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Field, Grid, LatticeMatrix, SampledFunction};
use crate::numeric::{as_integer, cis_turns};

/// Samples of a transform on the frequency grid `xi_k = k / (N h)`.
pub type Spectrum = SampledFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

struct AxisPlan {
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl AxisPlan {
    // sum_j x_j exp(sigma 2 pi i (a + j p)(b + k q)) p  with  p q N = 1
    fn new(input: &Axis, output: &Axis, dir: Direction, planner: &mut FftPlanner<f64>) -> Self {
        let n = input.count;
        let s = dir.sign();
        let (a, p, b, q) = (input.origin, input.spacing, output.origin, output.spacing);
        let pre = (0..n).map(|j| cis_turns(s * j as f64 * p * b)).collect();
        let post = (0..n)
            .map(|k| cis_turns(s * (a * b + a * k as f64 * q)) * p)
            .collect();
        let fft = match dir {
            Direction::Forward => planner.plan_fft(n, FftDirection::Forward),
            Direction::Inverse => planner.plan_fft(n, FftDirection::Inverse),
        };
        AxisPlan { fft, pre, post }
    }

    fn run(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        for (v, w) in buf.iter_mut().zip(&self.pre) {
            *v *= w;
        }
        self.fft.process_with_scratch(buf, scratch);
        for (v, w) in buf.iter_mut().zip(&self.post) {
            *v *= w;
        }
    }
}

/// A reusable transform between a grid and its reciprocal grid.
pub struct FourierPlan {
    input: Grid,
    output: Grid,
    direction: Direction,
    axes: Vec<AxisPlan>,
}

impl FourierPlan {
    /// Forward transform from `input` to `input.dual()`.
    pub fn forward(input: &Grid) -> Result<FourierPlan> {
        FourierPlan::between(input, &input.dual()?, Direction::Forward)
    }

    /// Inverse transform from `time.dual()` back to `time`.
    pub fn inverse_to(time: &Grid) -> Result<FourierPlan> {
        FourierPlan::between(&time.dual()?, time, Direction::Inverse)
    }

    /// General transform; every axis pair must satisfy `N h_in h_out = 1`.
    pub fn between(input: &Grid, output: &Grid, direction: Direction) -> Result<FourierPlan> {
        if input.dim() != output.dim() {
            return Err(Error::BadGrid("input and output dimensions differ".into()));
        }
        let mut planner = FftPlanner::new();
        let mut axes = Vec::new();
        for (i, o) in input.axes().iter().zip(output.axes()) {
            let pqn = i.spacing * o.spacing * i.count as f64;
            if i.count != o.count || (pqn - 1.0).abs() > 1e-12 {
                return Err(Error::BadGrid(format!(
                    "axes {i:?} and {o:?} are not reciprocal"
                )));
            }
            axes.push(AxisPlan::new(i, o, direction, &mut planner));
        }
        Ok(FourierPlan {
            input: input.clone(),
            output: output.clone(),
            direction,
            axes,
        })
    }

    pub fn input_grid(&self) -> &Grid {
        &self.input
    }

    pub fn output_grid(&self) -> &Grid {
        &self.output
    }

    /// Transforms raw row-major values in place.
    pub fn apply_in_place(&self, data: &mut [Complex64]) {
        let scratch_len = self
            .axes
            .iter()
            .map(|a| a.fft.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        match self.axes.len() {
            1 => self.axes[0].run(data, &mut scratch),
            _ => {
                let (n0, n1) = (self.input.axis(0).count, self.input.axis(1).count);
                for row in data.chunks_mut(n1) {
                    self.axes[1].run(row, &mut scratch);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n0];
                for c in 0..n1 {
                    for r in 0..n0 {
                        col[r] = data[r * n1 + c];
                    }
                    self.axes[0].run(&mut col, &mut scratch);
                    for r in 0..n0 {
                        data[r * n1 + c] = col[r];
                    }
                }
            }
        }
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        f.grid().check_same(&self.input)?;
        let mut data = f.values().to_vec();
        self.apply_in_place(&mut data);
        let source = direct_sum_field(f, &self.output, self.direction);
        Ok(SampledFunction::from_parts(self.output.clone(), data, Some(source)))
    }
}

/// Direct evaluation of the transform sum at an arbitrary point, cut off to
/// the half-open box covered by `support`.
fn direct_sum_field(f: &SampledFunction, support: &Grid, dir: Direction) -> Field {
    let grid = f.grid().clone();
    let values: Arc<Vec<Complex64>> = Arc::new(f.values().to_vec());
    let boxes: Vec<(f64, f64)> = support.axes().iter().map(|a| (a.origin, a.end())).collect();
    let s = dir.sign();
    Arc::new(move |xi: &[f64]| {
        if xi.iter().zip(&boxes).any(|(&x, &(lo, hi))| x < lo || x >= hi) {
            return Complex64::new(0.0, 0.0);
        }
        direct_sum(&grid, &values, xi, s)
    })
}

fn direct_sum(grid: &Grid, values: &[Complex64], xi: &[f64], sign: f64) -> Complex64 {
    let d = grid.dim();
    // separable phases: exp(sigma 2 pi i xi_k t_k) per axis
    let phases: Vec<Vec<Complex64>> = (0..d)
        .map(|k| {
            let a = grid.axis(k);
            (0..a.count)
                .map(|j| cis_turns(sign * xi[k] * a.node(j as i64)))
                .collect()
        })
        .collect();
    let acc: Complex64 = if d == 1 {
        values.iter().zip(&phases[0]).map(|(v, p)| v * p).sum()
    } else {
        let n1 = grid.axis(1).count;
        values
            .chunks(n1)
            .zip(&phases[0])
            .map(|(row, p0)| row.iter().zip(&phases[1]).map(|(v, p)| v * p).sum::<Complex64>() * p0)
            .sum()
    };
    acc * grid.cell_volume()
}

/// Transform of the samples evaluated at one arbitrary frequency.
pub fn ft_at(f: &SampledFunction, xi: &[f64]) -> Complex64 {
    direct_sum(f.grid(), f.values(), xi, -1.0)
}

/// Forward transform onto the frequency grid, or inverse transform from the
/// frequency grid back onto the symmetric time grid it is dual to.
pub fn ft(f: &SampledFunction, direction: Direction) -> Result<SampledFunction> {
    match direction {
        Direction::Forward => FourierPlan::forward(f.grid())?.apply(f),
        Direction::Inverse => {
            let time = f.grid().dual()?;
            FourierPlan::between(f.grid(), &time, Direction::Inverse)?.apply(f)
        }
    }
}

/// Inverse transform onto a prescribed time grid (`spectrum` must live on `time.dual()`).
pub fn ift_to(spectrum: &SampledFunction, time: &Grid) -> Result<SampledFunction> {
    FourierPlan::inverse_to(time)?.apply(spectrum)
}

pub fn fourier(f: &SampledFunction) -> Result<Spectrum> {
    ft(f, Direction::Forward)
}

/// `(f * g)(t_i) = h^d sum_j f(t_j) g(t_i - t_j)` at every node of f's grid;
/// g is read through its source where the difference leaves its window.
pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    let grid = f.grid();
    if grid.dim() != g.grid().dim() {
        return Err(Error::GridMismatch("dimensions differ".into()));
    }
    let d = grid.dim();
    // node offset of g at t_i - t_j = (i - j) h, when the grids line up
    let mut offset = [0i64; 2];
    let mut aligned = true;
    for k in 0..d {
        let (fa, ga) = (grid.axis(k), g.grid().axis(k));
        match as_integer(-ga.origin / ga.spacing) {
            Some(m) if (fa.spacing - ga.spacing).abs() <= 1e-12 * fa.spacing => offset[k] = m,
            _ => aligned = false,
        }
    }
    let nz: Vec<(usize, [i64; 2], Complex64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
        .map(|(j, &v)| (j, grid.multi_index(j), v))
        .collect();
    let w = grid.cell_volume();
    let values = (0..grid.len())
        .map(|i| {
            let ii = grid.multi_index(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, jj, v) in &nz {
                let gv = if aligned {
                    let idx = [ii[0] - jj[0] + offset[0], ii[1] - jj[1] + offset[1]];
                    g.value_at(&idx[..d])
                } else {
                    let (pi, pj) = (grid.point(i), grid.point(*j));
                    let diff = [pi[0] - pj[0], pi[1] - pj[1]];
                    g.eval(&diff[..d])
                };
                acc += v * gv;
            }
            acc * w
        })
        .collect();
    Ok(SampledFunction::from_parts(grid.clone(), values, None))
}

/// Residuals of the Fourier identities for one pair of functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `|int f g^ - int f^ g|`
    pub fundamental: f64,
    /// `sup |(f * g)^ - f^ g^|`
    pub convolution: f64,
    /// `|int f^ conj(g^) - int f g|`
    pub parseval: f64,
    /// `|int f^ conj(g^) - int f conj(g)|`
    pub parseval_conjugated: f64,
    /// `sup |ift(ft f) - f|`
    pub inversion: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [
            self.fundamental,
            self.convolution,
            self.parseval,
            self.parseval_conjugated,
            self.inversion,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn identity_residuals(f: &SampledFunction, g: &SampledFunction) -> Result<ResidualReport> {
    f.grid().check_same(g.grid())?;
    let plan = FourierPlan::forward(f.grid())?;
    let fh = plan.apply(f)?;
    let gh = plan.apply(g)?;
    let freq = fh.grid().clone();
    let dxi = freq.cell_volume();
    let dt = f.grid().cell_volume();

    // both sides of the fundamental identity live where the spectra do
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    for (j, p) in freq.points().iter().enumerate() {
        let x = &p[..freq.dim()];
        lhs += f.eval(x) * gh.values()[j];
        rhs += fh.values()[j] * g.eval(x);
    }
    let fundamental = ((lhs - rhs) * dxi).norm();

    let conv = convolve(f, g)?;
    let conv_hat = plan.apply(&conv)?;
    let convolution = conv_hat
        .values()
        .iter()
        .zip(fh.values().iter().zip(gh.values()))
        .map(|(c, (a, b))| (c - a * b).norm())
        .fold(0.0, f64::max);

    let spec_side: Complex64 = fh
        .values()
        .iter()
        .zip(gh.values())
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        * dxi;
    let plain: Complex64 = f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum::<Complex64>() * dt;
    let conjugated: Complex64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        * dt;

    let back = FourierPlan::between(&freq, f.grid(), Direction::Inverse)?.apply(&fh)?;
    let inversion = crate::numeric::max_abs_diff(back.values(), f.values());

    Ok(ResidualReport {
        fundamental,
        convolution,
        parseval: (spec_side - plain).norm(),
        parseval_conjugated: (spec_side - conjugated).norm(),
        inversion,
    })
}

/// Both sides of a Poisson-type identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonSides {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl PoissonSides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

fn tail_check(f: &SampledFunction, what: &str) -> Result<()> {
    let sup = f.sup();
    let edge = f.edge_sup(f.grid().axis(0).spacing * 2.0);
    if sup > 0.0 && edge > 1e-14 * sup.max(1.0) {
        return Err(Error::TailTooFat(format!(
            "{what} reaches {edge:e} at the window edge"
        )));
    }
    Ok(())
}

/// Poisson summation in the general form
/// `int_{R^m} sum_k f(A(x,k)) dx = |det A|^-1 sum_k f^(A^dagger (0,k))`
/// and, for `(x, omega) != 0` with `m = 0`, the shifted form
/// `sum_k e^{2 pi i omega.Ak} f(Ak - x) = e^{2 pi i omega.x} |det A|^-1 sum_k e^{-2 pi i A^dagger k.x} f^(A^dagger k - omega)`.
///
/// Lattice sums run over the time window and over exactly one period of the
/// frequency grid; both must have converged there.
pub fn poisson(
    f: &SampledFunction,
    a: &LatticeMatrix,
    m: usize,
    x: &[f64],
    omega: &[f64],
) -> Result<PoissonSides> {
    let grid = f.grid();
    let d = grid.dim();
    if a.dim() != d || m > d || x.len() != d || omega.len() != d {
        return Err(Error::BadParams(format!(
            "need a {d}x{d} matrix, 0 <= m <= {d} and {d}-vectors"
        )));
    }
    let shifted = x.iter().chain(omega).any(|v| *v != 0.0);
    if shifted && m != 0 {
        return Err(Error::BadParams("the shifted form is stated for m = 0".into()));
    }
    tail_check(f, "f")?;
    let fh = fourier(f)?;
    tail_check(&fh, "f^")?;
    let freq = fh.grid();
    let at = a.inv_transpose();
    let det = a.det().abs();

    let (lo, hi): (Vec<f64>, Vec<f64>) = grid.axes().iter().map(|ax| (ax.origin, ax.end())).unzip();
    let (flo, fhi): (Vec<f64>, Vec<f64>) = freq.axes().iter().map(|ax| (ax.origin, ax.end())).unzip();

    if m == 0 {
        let mut lhs = Complex64::new(0.0, 0.0);
        for (_, p) in a.lattice_points_in(&lo, &hi) {
            let mut q = [0.0; 2];
            for k in 0..d {
                q[k] = p[k] - x[k];
            }
            let phase = cis_turns((0..d).map(|k| omega[k] * p[k]).sum());
            lhs += phase * f.eval(&q[..d]);
        }
        let mut rhs = Complex64::new(0.0, 0.0);
        for (_, p) in at.lattice_points_in(&flo, &fhi) {
            let mut q = [0.0; 2];
            for k in 0..d {
                q[k] = p[k] - omega[k];
            }
            let phase = cis_turns(-(0..d).map(|k| p[k] * x[k]).sum::<f64>());
            rhs += phase * ft_at(f, &q[..d]);
        }
        let pre = cis_turns((0..d).map(|k| omega[k] * x[k]).sum()) / det;
        return Ok(PoissonSides { lhs, rhs: rhs * pre });
    }
    if m == d {
        // no lattice left: int f(Ax) dx = |det A|^-1 f^(0)
        return Ok(PoissonSides {
            lhs: crate::grid::integrate(f) / det,
            rhs: ft_at(f, &vec![0.0; d]) / det,
        });
    }
    // d = 2, m = 1: integrate the first coordinate, sum over the second
    let norm_inf = |m: &LatticeMatrix| m.entries().iter().map(|v| v.abs()).sum::<f64>();
    let radius = |l: &[f64], h: &[f64]| l.iter().chain(h).map(|v| v.abs()).fold(0.0, f64::max);
    let kt = (norm_inf(&a.inverse()) * radius(&lo, &hi)).ceil() as i64 + 1;
    let kf = (norm_inf(&a.transpose()) * radius(&flo, &fhi)).ceil() as i64 + 1;
    let ax0 = grid.axis(0);
    let mut lhs = Complex64::new(0.0, 0.0);
    for k in -kt..=kt {
        for i in 0..ax0.count {
            let p = a.apply(&[ax0.node(i as i64), k as f64]);
            if (0..d).all(|c| p[c] >= lo[c] && p[c] < hi[c]) {
                lhs += f.eval(&p[..2]) * ax0.spacing;
            }
        }
    }
    let mut rhs = Complex64::new(0.0, 0.0);
    for k in -kf..=kf {
        let p = at.apply(&[0.0, k as f64]);
        if (0..d).all(|c| p[c] >= flo[c] && p[c] < fhi[c]) {
            rhs += ft_at(f, &p[..2]);
        }
    }
    Ok(PoissonSides { lhs, rhs: rhs / det })
}

/// Both theta series of the Gaussian Poisson identity
/// `sum_k exp(-pi(Ak.Ak - 2Ak.(x + i omega))) = exp(pi (x + i omega)^2) / |det A| * sum_k exp(-pi(A^dagger k.A^dagger k - 2 A^dagger k.(omega - i x)))`,
/// summed directly until the terms fall below `1e-18` of the peak.
pub fn poisson_gauss(a: &LatticeMatrix, x: &[f64], omega: &[f64]) -> Result<PoissonSides> {
    let d = a.dim();
    if x.len() != d || omega.len() != d {
        return Err(Error::BadParams(format!("need {d}-vectors")));
    }
    let radius = 7.0;
    let cdot = |u: &[Complex64], v: &[Complex64]| -> Complex64 { u.iter().zip(v).map(|(p, q)| p * q).sum() };
    let z: Vec<Complex64> = (0..d).map(|k| Complex64::new(x[k], omega[k])).collect();
    let w: Vec<Complex64> = (0..d).map(|k| Complex64::new(omega[k], -x[k])).collect();
    let series = |m: &LatticeMatrix, centre: &[f64], v: &[Complex64]| -> Complex64 {
        let lo: Vec<f64> = centre.iter().map(|c| c - radius).collect();
        let hi: Vec<f64> = centre.iter().map(|c| c + radius).collect();
        m.lattice_points_in(&lo, &hi)
            .into_iter()
            .map(|(_, p)| {
                let pc: Vec<Complex64> = p[..d].iter().map(|&r| Complex64::new(r, 0.0)).collect();
                let e = cdot(&pc, &pc) - cdot(&pc, v) * 2.0;
                (-std::f64::consts::PI * e).exp()
            })
            .sum()
    };
    let lhs = series(a, x, &z);
    let at = a.inv_transpose();
    let pre = (std::f64::consts::PI * cdot(&z, &z)).exp() / a.det().abs();
    let rhs = series(&at, omega, &w) * pre;
    Ok(PoissonSides { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{act, gaussian, sample_named, tent, Action};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn default_line() -> Grid {
        Grid::line(1.0 / 16.0, 1024).unwrap()
    }

    #[test]
    fn gaussian_is_fourier_invariant() {
        let g = default_line();
        let g0 = gaussian(&g);
        let hat = fourier(&g0).unwrap();
        let expect = gaussian(hat.grid());
        let err = crate::numeric::max_abs_diff(hat.values(), expect.values());
        assert!(err < 1e-12, "{err}");
        let zero = fourier(&SampledFunction::zeros(&g)).unwrap();
        assert!(zero.values().iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn tent_spectrum_closed_form() {
        // the sampled sum is a Fejer kernel 2h^2 sin^2(pi s/2) / sin^2(pi s h), with the
        // tent's (1/2) sinc^2(s/2) as its h -> 0 limit
        let fejer = |s: f64, h: f64| {
            if s == 0.0 {
                0.5
            } else {
                let pi = std::f64::consts::PI;
                2.0 * h * h * (pi * s / 2.0).sin().powi(2) / (pi * s * h).sin().powi(2)
            }
        };
        let g = default_line();
        let hat = fourier(&tent(&g)).unwrap();
        let grid = hat.grid().clone();
        for j in (0..grid.len()).step_by(grid.len() / 64) {
            let s = grid.point(j)[0];
            assert!((hat.values()[j] - c(fejer(s, 1.0 / 16.0))).norm() < 1e-12, "s = {s}");
        }
        let mut prev = f64::INFINITY;
        for n in [1024usize, 2048, 4096] {
            let h = 64.0 / n as f64;
            let t = tent(&Grid::line(h, n).unwrap());
            let err = (ft_at(&t, &[1.0]) - c(0.5 * crate::grid::sinc(0.5).powi(2))).norm();
            assert!(err < prev / 3.5);
            prev = err;
        }
    }

    #[test]
    fn inverse_is_exact_on_asymmetric_windows() {
        let g = Grid::new(Some(-10.0), 1.0 / 8.0, 256, 1).unwrap();
        let f = sample_named("gaussian_mixture", &[1.0, 1.0, 0.7, 0.5, 0.5, -2.0, 1.1, -1.0], &g).unwrap();
        let back = ift_to(&fourier(&f).unwrap(), &g).unwrap();
        assert!(crate::numeric::max_abs_diff(back.values(), f.values()) < 1e-13);
    }

    #[test]
    fn riemann_lebesgue_bound() {
        let g = default_line();
        let f = sample_named("gaussian_mixture", &[1.0, 0.3, 0.8, 1.2, -0.7, -1.0, 1.1, 0.0], &g).unwrap();
        let hat = fourier(&f).unwrap();
        assert!(hat.sup() <= crate::grid::norms(&f).l1 + 1e-12);
    }

    #[test]
    fn identities_for_gaussians() {
        let g = default_line();
        let g0 = gaussian(&g);
        let r = identity_residuals(&g0, &g0).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
        let z = SampledFunction::zeros(&g);
        assert_eq!(identity_residuals(&z, &z).unwrap().max(), 0.0);
    }

    #[test]
    fn exchange_rules() {
        let g = default_line();
        let f = sample_named("gaussian_mixture", &[1.0, 0.5, 0.9, 0.0, 0.4, -1.0, 0.7, 0.6], &g).unwrap();
        let fh = fourier(&f).unwrap();
        let x = 0.75;
        let w = 5.0 / 64.0 * 8.0;
        let lhs = fourier(&act(&f, &Action::Translate(vec![x])).unwrap()).unwrap();
        let rhs = act(&fh, &Action::Modulate(vec![-x])).unwrap();
        assert!(crate::numeric::max_abs_diff(lhs.values(), rhs.values()) < 1e-10);
        let lhs = fourier(&act(&f, &Action::Modulate(vec![w])).unwrap()).unwrap();
        let rhs = act(&fh, &Action::Translate(vec![w])).unwrap();
        assert!(crate::numeric::max_abs_diff(lhs.values(), rhs.values()) < 1e-10);
    }

    #[test]
    fn stretch_becomes_value_dilation() {
        let g = default_line();
        let g0 = gaussian(&g);
        let hat = fourier(&g0).unwrap();
        for rho in [2.0, 4.0] {
            let lhs = fourier(&act(&g0, &Action::Stretch(rho)).unwrap()).unwrap();
            let rhs = act(&hat, &Action::ValueDilate(rho)).unwrap();
            assert!(crate::numeric::max_abs_diff(lhs.values(), rhs.values()) < 1e-9);
        }
    }

    #[test]
    fn theta_identities() {
        let g = default_line();
        let id = LatticeMatrix::identity(1);
        for a in [0.5, 1.0, 2.0, 3.0] {
            let f = sample_named("gaussian", &[a], &g).unwrap();
            let sides = poisson(&f, &id, 0, &[0.0], &[0.0]).unwrap();
            // independent oracle: truncated theta sums on both sides
            let oracle: f64 = (-20..=20).map(|k: i64| (-std::f64::consts::PI * a * (k * k) as f64).exp()).sum();
            let dual: f64 = (-20..=20).map(|k: i64| (-std::f64::consts::PI * (k * k) as f64 / a).exp()).sum::<f64>() / a.sqrt();
            assert!((oracle - dual).abs() < 1e-13);
            assert!((sides.lhs - c(oracle)).norm() < 1e-13);
            assert!(sides.residual() < 1e-12, "a = {a}: {sides:?}");
        }
    }

    #[test]
    fn shifted_poisson_and_gauss_series() {
        let g = default_line();
        let g0 = gaussian(&g);
        let two = LatticeMatrix::new(&[0.5]).unwrap();
        for (x, w) in [(0.25, 0.125), (-0.5, 0.75), (1.0, -0.375)] {
            let s = poisson(&g0, &two, 0, &[x], &[w]).unwrap();
            assert!(s.residual() < 1e-10, "{s:?}");
            let t = poisson_gauss(&two, &[x], &[w]).unwrap();
            assert!(t.residual() < 1e-12 * t.lhs.norm().max(1.0), "{t:?}");
            // the Gaussian form is the shifted form times exp(pi x^2)
            let scale = (std::f64::consts::PI * x * x).exp();
            assert!((t.lhs - s.lhs * scale).norm() < 1e-10 * scale);
        }
        let a2 = LatticeMatrix::new(&[1.0, 0.5, 0.0, 2.0]).unwrap();
        let t = poisson_gauss(&a2, &[0.3, -0.2], &[0.1, 0.4]).unwrap();
        assert!(t.residual() < 1e-12 * t.lhs.norm().max(1.0));
    }

    #[test]
    fn partial_poisson_on_product() {
        let g2 = Grid::new(None, 1.0 / 8.0, 128, 2).unwrap();
        let f = gaussian(&g2);
        let s = poisson(&f, &LatticeMatrix::identity(2), 1, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let theta: f64 = (-20..=20).map(|k: i64| (-std::f64::consts::PI * (k * k) as f64).exp()).sum();
        assert!((s.lhs - c(theta)).norm() < 1e-10);
        assert!(s.residual() < 1e-10);
    }

    #[test]
    fn fat_tails_are_rejected() {
        let g = Grid::line(1.0 / 16.0, 256).unwrap();
        let f = sample_named("sinc", &[], &g).unwrap();
        assert!(matches!(
            poisson(&f, &LatticeMatrix::identity(1), 0, &[0.0], &[0.0]),
            Err(Error::TailTooFat(_))
        ));
    }

    #[test]
    fn two_dimensional_transform_factorizes() {
        let g2 = Grid::new(None, 1.0 / 8.0, 128, 2).unwrap();
        let f = SampledFunction::from_fn(&g2, |t| {
            c((-std::f64::consts::PI * (t[0] * t[0] + 1.5 * t[1] * t[1])).exp())
        });
        let hat = fourier(&f).unwrap();
        for (j, p) in hat.grid().points().iter().enumerate().step_by(37) {
            let expect = (-std::f64::consts::PI * (p[0] * p[0] + p[1] * p[1] / 1.5)).exp() / 1.5f64.sqrt();
            assert!((hat.values()[j] - c(expect)).norm() < 1e-12);
            assert!((ft_at(&f, &p[..2]) - hat.values()[j]).norm() < 1e-12);
        }
    }
}
