//! Short-time Fourier transform with Gaussian window, the S0 norm in its
//! integral and amalgam forms, tensor products and the structure maps
//! (sampling, periodisation, partial integration, restriction).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierPlan;
use crate::grid::{gaussian, Axis, Field, Grid, SampledFunction};
use crate::numeric::as_integer;
use crate::wiener::{amalgam_norm, restrict, Variant};

/// Samples of `V_g f(x, omega)` on a stride lattice in time times the full frequency grid.
#[derive(Debug, Clone)]
pub struct TfPlane {
    dim: usize,
    stride: usize,
    /// `d` time axes followed by `d` frequency axes, values row-major in that order
    axes: Vec<Axis>,
    values: Vec<Complex64>,
}

impl TfPlane {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Plane quadrature weight `(s h)^d (1 / (N h))^d`.
    pub fn cell_weight(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    /// Value at time-lattice index `xi` and frequency index `wi` (one entry per axis).
    pub fn value(&self, xi: &[usize], wi: &[usize]) -> Complex64 {
        let mut flat = 0usize;
        for (a, &i) in self.axes.iter().zip(xi.iter().chain(wi)) {
            flat = flat * a.count + i;
        }
        self.values[flat]
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.cell_weight()
    }

    /// Amalgam norm over the plane with the tent partition of spacing 1/2.
    pub fn wiener(&self) -> f64 {
        amalgam_norm(&self.axes, &self.values, 0.5, Variant::Bupu).norm
    }
}

/// `V_g f(x, omega) = F(f conj(T_x g))(omega)` for `x` on every `stride`-th
/// node; the window is translated cyclically within the grid.
pub fn stft(f: &SampledFunction, g: &SampledFunction, stride: usize) -> Result<TfPlane> {
    f.grid().check_same(g.grid())?;
    let grid = f.grid();
    let d = grid.dim();
    if stride == 0 || grid.axes().iter().any(|a| a.count % stride != 0) {
        return Err(Error::BadParams(format!("stride {stride} must divide the grid size")));
    }
    let mut origin_nodes = [0i64; 2];
    for k in 0..d {
        let a = grid.axis(k);
        origin_nodes[k] = as_integer(a.origin / a.spacing)
            .ok_or_else(|| Error::BadGrid("window origin must be a node multiple".into()))?;
    }
    let plan = FourierPlan::forward(grid)?;
    let freq = plan.output_grid().clone();
    let mut axes: Vec<Axis> = grid
        .axes()
        .iter()
        .map(|a| Axis {
            origin: a.origin,
            spacing: a.spacing * stride as f64,
            count: a.count / stride,
        })
        .collect();
    axes.extend(freq.axes().iter().copied());
    let lattice: Vec<[usize; 2]> = if d == 1 {
        (0..axes[0].count).map(|i| [i, 0]).collect()
    } else {
        (0..axes[0].count)
            .flat_map(|i| (0..axes[1].count).map(move |j| [i, j]))
            .collect()
    };
    let n = grid.len();
    let conj_g: Vec<Complex64> = g.values().iter().map(|v| v.conj()).collect();
    let counts: Vec<i64> = grid.axes().iter().map(|a| a.count as i64).collect();
    let mut values = Vec::with_capacity(lattice.len() * n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for x in &lattice {
        // node index of t_j - x in g's grid: j - x*stride - origin/h, taken cyclically
        for (j, slot) in buf.iter_mut().enumerate() {
            let idx = grid.multi_index(j);
            let mut flat = 0usize;
            for k in 0..d {
                let m = (idx[k] - (x[k] * stride) as i64 - origin_nodes[k]).rem_euclid(counts[k]);
                flat = flat * counts[k] as usize + m as usize;
            }
            *slot = f.values()[j] * conj_g[flat];
        }
        plan.apply_in_place(&mut buf);
        values.extend_from_slice(&buf);
    }
    Ok(TfPlane {
        dim: d,
        stride,
        axes,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S0Variant {
    /// `int int |V_{g0} f|` over the plane.
    L1,
    /// Amalgam norm of `V_{g0} f` over the plane.
    Wiener,
}

/// Fails with `TailTooFat` unless |f| is below `1e-10 sup|f|` on the outer two nodes.
pub fn check_decay(f: &SampledFunction) -> Result<()> {
    let sup = f.sup();
    let edge = f.edge_sup(2.0 * f.grid().axis(0).spacing);
    if sup > 0.0 && edge > 1e-10 * sup {
        return Err(Error::TailTooFat(format!(
            "|f| = {edge:e} at the window edge (sup {sup:e})"
        )));
    }
    Ok(())
}

/// S0 norm with the standard Gaussian window `g0`.
pub fn s0_norm(f: &SampledFunction, variant: S0Variant, stride: usize) -> Result<f64> {
    check_decay(f)?;
    let plane = stft(f, &gaussian(f.grid()), stride)?;
    Ok(match variant {
        S0Variant::L1 => plane.l1(),
        S0Variant::Wiener => plane.wiener(),
    })
}

/// `(f1 (x) f2)(x, y) = f1(x) f2(y)`.
pub fn tensor(f1: &SampledFunction, f2: &SampledFunction) -> Result<SampledFunction> {
    if f1.grid().dim() != 1 || f2.grid().dim() != 1 {
        return Err(Error::GridMismatch("tensor factors must be one-dimensional".into()));
    }
    let grid = Grid::from_axes(vec![*f1.grid().axis(0), *f2.grid().axis(0)])?;
    let values = f1
        .values()
        .iter()
        .flat_map(|a| f2.values().iter().map(move |b| a * b))
        .collect();
    let source = match (f1.source(), f2.source()) {
        (Some(s1), Some(s2)) => {
            let (s1, s2) = (s1.clone(), s2.clone());
            Some(std::sync::Arc::new(move |t: &[f64]| s1(&t[..1]) * s2(&t[1..2])) as Field)
        }
        _ => None,
    };
    Ok(SampledFunction::from_parts(grid, values, source))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureKind {
    /// `(f(k))_k` over the integers in the window.
    SampleL1,
    /// `sum_k f(x + k p)` on one period `[0, p)`.
    Periodize(f64),
    /// `int f(x, y) dy`.
    PartialIntegral,
    /// `f(x, 0)`.
    Restrict,
}

#[derive(Debug, Clone)]
pub enum StructureOutput {
    Sequence {
        points: Vec<f64>,
        values: Vec<Complex64>,
        l1: f64,
    },
    Periodic {
        period: f64,
        nodes: Vec<f64>,
        values: Vec<Complex64>,
        /// `c_n = p^-1 int_0^p P f(x) e^{-2 pi i n x / p} dx`, n = 0, 1, ..., then negative n
        coefficients: Vec<Complex64>,
        /// `sum_n |c_n|`
        coefficient_l1: f64,
    },
    Function(SampledFunction),
}

pub fn structure_map(f: &SampledFunction, kind: StructureKind) -> Result<StructureOutput> {
    let grid = f.grid();
    match kind {
        StructureKind::SampleL1 => {
            if grid.dim() != 1 {
                return Err(Error::BadKind("sampling is implemented on the line".into()));
            }
            check_decay(f)?;
            let a = grid.axis(0);
            let (lo, hi) = (a.origin.ceil() as i64, (a.end() - a.spacing).floor() as i64);
            let points: Vec<f64> = (lo..=hi).map(|k| k as f64).collect();
            let values: Vec<Complex64> = points.iter().map(|&k| f.eval(&[k])).collect();
            let l1 = values.iter().map(|v| v.norm()).sum();
            Ok(StructureOutput::Sequence { points, values, l1 })
        }
        StructureKind::Periodize(p) => {
            if grid.dim() != 1 {
                return Err(Error::BadKind("periodisation is implemented on the line".into()));
            }
            let a = grid.axis(0);
            let per = as_integer(p / a.spacing)
                .filter(|&m| m >= 1)
                .ok_or_else(|| Error::BadParams(format!("period {p} is not a node multiple")))?
                as usize;
            if a.length() < 4.0 * p {
                return Err(Error::BadKind(format!("window shorter than four periods of {p}")));
            }
            check_decay(f)?;
            let start = a.index_of(0.0).ok_or_else(|| Error::BadGrid("0 is not a node".into()))?;
            let mut values = vec![Complex64::new(0.0, 0.0); per];
            for j in 0..a.count {
                let r = (j as i64 - start).rem_euclid(per as i64) as usize;
                values[r] += f.values()[j];
            }
            let nodes: Vec<f64> = (0..per).map(|r| r as f64 * a.spacing).collect();
            let coefficients: Vec<Complex64> = (0..per)
                .map(|n| {
                    let nn = if n <= per / 2 { n as f64 } else { n as f64 - per as f64 };
                    values
                        .iter()
                        .zip(&nodes)
                        .map(|(v, x)| v * crate::numeric::cis_turns(-nn * x / p))
                        .sum::<Complex64>()
                        * (a.spacing / p)
                })
                .collect();
            let coefficient_l1 = coefficients.iter().map(|c| c.norm()).sum();
            Ok(StructureOutput::Periodic {
                period: p,
                nodes,
                values,
                coefficients,
                coefficient_l1,
            })
        }
        StructureKind::PartialIntegral => {
            if grid.dim() != 2 {
                return Err(Error::BadKind("partial integration needs two variables".into()));
            }
            let line = Grid::from_axes(vec![*grid.axis(0)])?;
            let (n1, h1) = (grid.axis(1).count, grid.axis(1).spacing);
            let values = f
                .values()
                .chunks(n1)
                .map(|row| row.iter().sum::<Complex64>() * h1)
                .collect();
            Ok(StructureOutput::Function(SampledFunction::from_values(&line, values)?))
        }
        StructureKind::Restrict => Ok(StructureOutput::Function(restrict(f, 1)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{act, sample_named, tent, Action};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn self_dual() -> Grid {
        Grid::line(1.0 / 16.0, 256).unwrap()
    }

    #[test]
    fn gaussian_stft_closed_form() {
        let g = self_dual();
        let g0 = gaussian(&g);
        let v = stft(&g0, &g0, 4).unwrap();
        let x0 = v.axes()[0].index_of(0.0).unwrap() as usize;
        let w0 = v.axes()[1].index_of(0.0).unwrap() as usize;
        assert!((v.value(&[x0], &[w0]) - c(2f64.powf(-0.5))).norm() < 1e-12);
        for (xi, wi) in [(x0 + 1, w0), (x0 - 3, w0 + 7), (x0 + 4, w0 - 20), (x0 - 6, w0 + 33)] {
            let (x, w) = (v.axes()[0].node(xi as i64), v.axes()[1].node(wi as i64));
            let expect = 2f64.powf(-0.5) * (-std::f64::consts::PI * (x * x + w * w) / 2.0).exp();
            assert!((v.value(&[xi], &[wi]).norm() - expect).abs() < 1e-12);
        }
        let z = stft(&SampledFunction::zeros(&g), &g0, 4).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn gaussian_s0_norm() {
        let g = Grid::line(1.0 / 16.0, 1024).unwrap();
        let n = s0_norm(&gaussian(&g), S0Variant::L1, 4).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-9, "{n}");
    }

    #[test]
    fn covariance_under_time_frequency_shifts() {
        let g = self_dual();
        let g0 = gaussian(&g);
        let f = sample_named("gaussian_mixture", &[1.0, 0.5, 0.8, 0.3, -0.4, -1.0, 1.1, 0.0], &g).unwrap();
        let (mx, mw) = (3i64, 5i64);
        let x = mx as f64 / 16.0;
        let w = mw as f64 / 16.0;
        let shifted = act(&act(&f, &Action::Translate(vec![x])).unwrap(), &Action::Modulate(vec![w])).unwrap();
        let a = stft(&shifted, &g0, 1).unwrap();
        let b = stft(&f, &g0, 1).unwrap();
        let mut worst: f64 = 0.0;
        for ti in 20..236usize {
            for si in (20..236usize).step_by(7) {
                let (t, s) = (a.axes()[0].node(ti as i64), a.axes()[1].node(si as i64));
                let phase = crate::numeric::cis_turns(x * (w - s));
                let rhs = b.value(&[(ti as i64 - mx) as usize], &[(si as i64 - mw) as usize]) * phase;
                let _ = t;
                worst = worst.max((a.value(&[ti], &[si]) - rhs).norm());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn isometries_on_self_dual_grid() {
        let g = self_dual();
        let f = sample_named("gaussian_mixture", &[1.0, 0.5, 0.8, 0.3, -0.4, -1.0, 1.1, 0.7], &g).unwrap();
        let n = s0_norm(&f, S0Variant::L1, 1).unwrap();
        let shifted = act(&act(&f, &Action::Translate(vec![0.5])).unwrap(), &Action::Modulate(vec![0.75])).unwrap();
        assert!((s0_norm(&shifted, S0Variant::L1, 1).unwrap() / n - 1.0).abs() < 1e-10);
        let hat = crate::fourier::fourier(&f).unwrap();
        assert!((s0_norm(&hat, S0Variant::L1, 1).unwrap() / n - 1.0).abs() < 1e-10);
        for k in [Action::Conjugate, Action::Flip] {
            let m = s0_norm(&act(&f, &k).unwrap(), S0Variant::L1, 1).unwrap();
            assert!((m / n - 1.0).abs() < 1e-10);
        }
        // norm domination and variant equivalence
        assert!(crate::grid::norms(&f).l1 <= n && f.sup() <= n);
        let w = s0_norm(&f, S0Variant::Wiener, 1).unwrap();
        assert!(w > 0.0 && w / n < 16.0 && n / w < 16.0);
    }

    #[test]
    fn tensor_examples() {
        let g = Grid::line(1.0 / 8.0, 64).unwrap();
        let g0 = gaussian(&g);
        let t = tensor(&g0, &g0).unwrap();
        let g2 = gaussian(t.grid());
        assert!(crate::numeric::max_abs_diff(t.values(), g2.values()) < 1e-15);
        let z = tensor(&g0, &SampledFunction::zeros(&g)).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
        let n2 = s0_norm(&t, S0Variant::L1, 4).unwrap();
        assert!((n2 - 2.0).abs() < 1e-6, "{n2}");
    }

    #[test]
    fn stft_factorizes_on_tensors() {
        let g = Grid::line(1.0 / 4.0, 32).unwrap();
        let g0 = gaussian(&g);
        let f1 = sample_named("gaussian_mixture", &[1.0, 0.5, 0.8, 0.3], &g).unwrap();
        let f2 = sample_named("gaussian_mixture", &[0.7, -0.5, 1.1, -0.6], &g).unwrap();
        let v = stft(&tensor(&f1, &f2).unwrap(), &tensor(&g0, &g0).unwrap(), 2).unwrap();
        let (v1, v2) = (stft(&f1, &g0, 2).unwrap(), stft(&f2, &g0, 2).unwrap());
        let mut worst: f64 = 0.0;
        for x1 in 0..16 {
            for x2 in (0..16).step_by(3) {
                for w1 in (0..32).step_by(5) {
                    for w2 in 0..32 {
                        let lhs = v.value(&[x1, x2], &[w1, w2]);
                        let rhs = v1.value(&[x1], &[w1]) * v2.value(&[x2], &[w2]);
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn structure_map_examples() {
        let g = Grid::line(1.0 / 16.0, 256).unwrap();
        let g0 = gaussian(&g);
        match structure_map(&g0, StructureKind::SampleL1).unwrap() {
            StructureOutput::Sequence { values, l1, .. } => {
                let theta: f64 = (-8..=8).map(|k: i64| (-std::f64::consts::PI * (k * k) as f64).exp()).sum();
                let s: Complex64 = values.iter().sum();
                assert!((s - c(theta)).norm() < 1e-14);
                assert!(l1 <= s0_norm(&g0, S0Variant::L1, 4).unwrap() * 4.0);
            }
            _ => unreachable!(),
        }
        match structure_map(&tent(&g), StructureKind::Periodize(1.0)).unwrap() {
            StructureOutput::Periodic { values, coefficients, coefficient_l1, .. } => {
                assert_eq!(values[0], c(1.0));
                assert_eq!(values[4], c(0.5));
                // c_0 = int_0^1 P f = int f = 1/2
                assert!((coefficients[0] - c(0.5)).norm() < 1e-14);
                assert!(coefficient_l1.is_finite());
            }
            _ => unreachable!(),
        }
        let g2 = Grid::new(None, 1.0 / 8.0, 64, 2).unwrap();
        match structure_map(&gaussian(&g2), StructureKind::PartialIntegral).unwrap() {
            StructureOutput::Function(p) => {
                let expect = gaussian(p.grid());
                assert!(crate::numeric::max_abs_diff(p.values(), expect.values()) < 1e-10);
            }
            _ => unreachable!(),
        }
        assert!(matches!(
            structure_map(&g0, StructureKind::PartialIntegral),
            Err(Error::BadKind(_))
        ));
    }

    fn params() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((-1.0f64..1.0, -2.0f64..2.0, 0.6f64..1.4, -1.5f64..1.5), 1..3)
            .prop_map(|v| v.into_iter().flat_map(|(a, b, c, d)| [a, b, c, d]).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn algebra_inequalities(p in params(), q in params()) {
            let g = self_dual();
            let f1 = sample_named("gaussian_mixture", &p, &g).unwrap();
            let f2 = sample_named("gaussian_mixture", &q, &g).unwrap();
            let n1 = s0_norm(&f1, S0Variant::L1, 2).unwrap();
            let n2 = s0_norm(&f2, S0Variant::L1, 2).unwrap();
            let prod = crate::grid::mul(&f1, &f2).unwrap();
            prop_assert!(s0_norm(&prod, S0Variant::L1, 2).unwrap() <= n1 * n2 * (1.0 + 1e-9));
            let conv = crate::fourier::convolve(&f1, &f2).unwrap();
            prop_assert!(s0_norm(&conv, S0Variant::L1, 2).unwrap() <= n1 * n2 * (1.0 + 1e-9));
        }
    }
}
