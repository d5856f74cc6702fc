//! Bounded uniform partitions of unity `psi_n(t) = psi_0(t - gamma n)`, the
//! spline-type quasi-interpolation built on them, and the oscillation and
//! local maximal envelopes of a sampled function.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, SampledFunction};
use crate::numeric::as_integer;

#[derive(Clone)]
pub enum BupuKind {
    /// Product of `max(1 - |t_j|/gamma, 0)`: half-integer translates of the tent for gamma = 1/2.
    Tent,
    /// Lattice translates of a nonnegative, compactly supported base window.
    Custom(SampledFunction),
}

/// A partition of unity by lattice translates of one window, adapted to a grid.
#[derive(Clone)]
pub struct Bupu {
    grid: Grid,
    gamma: f64,
    /// lattice step in grid nodes, per axis
    step: [i64; 2],
    base: Field,
    /// base window sampled at node offsets `-reach..=reach` around zero, per axis product
    base_taps: Vec<f64>,
    reach: i64,
    radius: f64,
    indices: Vec<(i64, i64)>,
}

impl std::fmt::Debug for Bupu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bupu")
            .field("gamma", &self.gamma)
            .field("radius", &self.radius)
            .field("indices", &self.indices)
            .finish()
    }
}

/// `make_bupu`: builds the partition and checks `sum_n psi_n = 1` on the interior.
pub fn make_bupu(kind: BupuKind, gamma: Option<f64>, grid: &Grid) -> Result<Bupu> {
    let gamma = gamma.unwrap_or(0.5);
    let d = grid.dim();
    let mut step = [0i64; 2];
    for k in 0..d {
        step[k] = match as_integer(gamma / grid.axis(k).spacing) {
            Some(s) if s >= 1 => s,
            _ => {
                return Err(Error::BadParams(format!(
                    "lattice spacing {gamma} is not a multiple of the grid spacing"
                )))
            }
        };
    }
    let h = grid.axis(0).spacing;
    let (base, radius): (Field, f64) = match kind {
        BupuKind::Tent => (
            Arc::new(move |t: &[f64]| {
                Complex64::new(t.iter().map(|x| (1.0 - x.abs() / gamma).max(0.0)).product(), 0.0)
            }),
            gamma,
        ),
        BupuKind::Custom(window) => {
            if window.grid().dim() != d {
                return Err(Error::GridMismatch("window dimension".into()));
            }
            if let Some(v) = window
                .values()
                .iter()
                .find(|v| v.re < -1e-15 || v.im.abs() > 1e-15)
            {
                return Err(Error::NegativeWindow(if v.re < 0.0 { v.re } else { -v.im.abs() }));
            }
            let radius = window.effective_radius(1e-15);
            let field: Field = match window.source() {
                Some(src) => src.clone(),
                None => {
                    let w = window.clone();
                    Arc::new(move |t: &[f64]| w.eval(t))
                }
            };
            (field, radius)
        }
    };
    let reach = (radius / h).ceil() as i64 + 1;
    let taps_1d = (2 * reach + 1) as usize;
    let mut base_taps = vec![0.0; taps_1d.pow(d as u32)];
    let mut p = [0.0; 2];
    for (j, tap) in base_taps.iter_mut().enumerate() {
        let off = [(j / if d == 2 { taps_1d } else { 1 }) as i64 - reach, (j % taps_1d) as i64 - reach];
        if d == 1 {
            p[0] = off[1] as f64 * h;
        } else {
            p[0] = off[0] as f64 * h;
            p[1] = off[1] as f64 * grid.axis(1).spacing;
        }
        let v = base(&p[..d]);
        if v.re < -1e-15 {
            return Err(Error::NegativeWindow(v.re));
        }
        *tap = v.re;
    }
    let indices = grid
        .axes()
        .iter()
        .map(|a| {
            (
                ((a.origin - radius) / gamma).floor() as i64,
                ((a.end() + radius) / gamma).ceil() as i64,
            )
        })
        .collect();
    let bupu = Bupu {
        grid: grid.clone(),
        gamma,
        step,
        base,
        base_taps,
        reach,
        radius,
        indices,
    };
    let dev = bupu.partition_defect();
    if dev > 1e-9 {
        return Err(Error::NotAPartition(dev));
    }
    Ok(bupu)
}

/// The standard tent partition with lattice spacing 1/2.
pub fn tent_bupu(grid: &Grid) -> Bupu {
    make_bupu(BupuKind::Tent, None, grid).expect("tent partition on a valid grid")
}

impl Bupu {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Inclusive range of active lattice indices per axis.
    pub fn indices(&self) -> &[(i64, i64)] {
        &self.indices
    }

    /// Lattice node `t_n = gamma n`.
    pub fn node(&self, n: &[i64]) -> [f64; 2] {
        let mut t = [0.0; 2];
        for (k, &v) in n.iter().enumerate() {
            t[k] = self.gamma * v as f64;
        }
        t
    }

    /// Grid index of the lattice node `t_n` (possibly outside the window).
    pub fn node_index(&self, n: &[i64]) -> [i64; 2] {
        let mut idx = [0i64; 2];
        for k in 0..n.len() {
            let a = self.grid.axis(k);
            let origin_nodes = as_integer(a.origin / a.spacing).unwrap_or(0);
            idx[k] = n[k] * self.step[k] - origin_nodes;
        }
        idx
    }

    /// `psi_0` at an arbitrary point.
    pub fn base(&self, t: &[f64]) -> f64 {
        (self.base)(t).re
    }

    /// `psi_n` at the grid node with multi-index `idx` (exact tap lookup).
    #[inline]
    pub fn psi_at(&self, n: &[i64], idx: &[i64]) -> f64 {
        let centre = self.node_index(n);
        let taps = (2 * self.reach + 1) as usize;
        let mut flat = 0usize;
        for k in 0..n.len() {
            let off = idx[k] - centre[k];
            if off.abs() > self.reach {
                return 0.0;
            }
            flat = flat * taps + (off + self.reach) as usize;
        }
        self.base_taps[flat]
    }

    /// Lattice indices `n` whose window can be nonzero at the grid node `idx`.
    pub fn covering(&self, idx: &[i64]) -> Vec<([i64; 2], f64)> {
        let d = idx.len();
        let mut ranges = [(0i64, 0i64); 2];
        for k in 0..d {
            let a = self.grid.axis(k);
            let t = a.node(idx[k]);
            ranges[k] = (
                ((t - self.radius) / self.gamma).floor() as i64,
                ((t + self.radius) / self.gamma).ceil() as i64,
            );
        }
        let mut out = Vec::new();
        for n0 in ranges[0].0..=ranges[0].1 {
            let hi1 = if d == 2 { ranges[1].1 } else { 0 };
            let lo1 = if d == 2 { ranges[1].0 } else { 0 };
            for n1 in lo1..=hi1 {
                let n = [n0, n1];
                let v = self.psi_at(&n[..d], idx);
                if v != 0.0 {
                    out.push((n, v));
                }
            }
        }
        out
    }

    /// Largest deviation of `sum_n psi_n` from 1 on nodes at least `radius + gamma` inside the window.
    pub fn partition_defect(&self) -> f64 {
        let d = self.grid.dim();
        let inner = self.grid.interior_mask(self.radius + self.gamma);
        let mut worst: f64 = 0.0;
        for (j, ok) in inner.iter().enumerate() {
            if !ok {
                continue;
            }
            let idx = self.grid.multi_index(j);
            let s: f64 = self.covering(&idx[..d]).iter().map(|(_, v)| v).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// All active lattice indices.
    pub fn lattice(&self) -> Vec<[i64; 2]> {
        let (lo0, hi0) = self.indices[0];
        let (lo1, hi1) = self.indices.get(1).copied().unwrap_or((0, 0));
        let mut out = Vec::new();
        for n0 in lo0..=hi0 {
            for n1 in lo1..=hi1 {
                out.push([n0, n1]);
            }
        }
        out
    }

    /// `psi_n` sampled on the grid.
    pub fn window(&self, n: &[i64]) -> SampledFunction {
        let d = self.grid.dim();
        let values = (0..self.grid.len())
            .map(|j| Complex64::new(self.psi_at(n, &self.grid.multi_index(j)[..d]), 0.0))
            .collect();
        let base = self.base.clone();
        let t_n = self.node(n);
        let source: Field = Arc::new(move |t: &[f64]| {
            let mut u = [0.0; 2];
            for k in 0..t.len() {
                u[k] = t[k] - t_n[k];
            }
            base(&u[..t.len()])
        });
        SampledFunction::from_parts(self.grid.clone(), values, Some(source))
    }
}

/// `Sp f(t) = sum_n f(t_n) psi_n(t)` with `t_n = gamma n`.
pub fn quasi_interpolate(f: &SampledFunction, psi: &Bupu) -> Result<SampledFunction> {
    f.grid().check_same(psi.grid())?;
    let grid = f.grid();
    let d = grid.dim();
    let values = (0..grid.len())
        .map(|j| {
            let idx = grid.multi_index(j);
            psi.covering(&idx[..d])
                .into_iter()
                .map(|(n, w)| f.value_at(&psi.node_index(&n[..d])[..d]) * w)
                .sum()
        })
        .collect();
    Ok(SampledFunction::from_parts(grid.clone(), values, None))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `osc_delta f(x) = max_{|y| <= delta} |f(x) - f(x + y)|`
    Oscillation(f64),
    /// `f#(x) = max_{|y| <= 1} |f(x + y)|`
    LocalMax,
}

/// Grid offsets `m` (in nodes) with `|m h| <= r`.
fn offsets(grid: &Grid, r: f64) -> Vec<[i64; 2]> {
    let d = grid.dim();
    let reach: Vec<i64> = grid
        .axes()
        .iter()
        .map(|a| (r / a.spacing + 1e-9).floor() as i64)
        .collect();
    let mut out = Vec::new();
    let r1 = if d == 2 { reach[1] } else { 0 };
    for m0 in -reach[0]..=reach[0] {
        for m1 in -r1..=r1 {
            let mut len2 = (m0 as f64 * grid.axis(0).spacing).powi(2);
            if d == 2 {
                len2 += (m1 as f64 * grid.axis(1).spacing).powi(2);
            }
            if len2.sqrt() <= r * (1.0 + 1e-12) {
                out.push([m0, m1]);
            }
        }
    }
    out
}

/// Oscillation or local maximal envelope; `f` is extended by zero outside its window.
pub fn envelope(f: &SampledFunction, kind: Envelope) -> Result<SampledFunction> {
    let grid = f.grid();
    let d = grid.dim();
    let read = |idx: &[i64]| match grid.flat_index(idx) {
        Some(j) => f.values()[j],
        None => Complex64::new(0.0, 0.0),
    };
    let (radius, osc) = match kind {
        Envelope::Oscillation(delta) => {
            let h = grid.axis(0).spacing;
            if !(delta >= h * (1.0 - 1e-12)) || as_integer(delta / h).is_none() {
                return Err(Error::BadDelta { delta, spacing: h });
            }
            (delta, true)
        }
        Envelope::LocalMax => (1.0, false),
    };
    let offs = offsets(grid, radius);
    let values = (0..grid.len())
        .map(|j| {
            let idx = grid.multi_index(j);
            let here = f.values()[j];
            let mut best: f64 = 0.0;
            for m in &offs {
                let q = [idx[0] + m[0], idx[1] + m[1]];
                let v = read(&q[..d]);
                best = best.max(if osc { (here - v).norm() } else { v.norm() });
            }
            Complex64::new(best, 0.0)
        })
        .collect();
    Ok(SampledFunction::from_parts(grid.clone(), values, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{act, gaussian, sample_named, tent, Action};
    use proptest::prelude::*;

    fn line() -> Grid {
        Grid::line(1.0 / 16.0, 256).unwrap()
    }

    #[test]
    fn tent_partition_sums_to_one() {
        let g = line();
        let b = tent_bupu(&g);
        assert!(b.partition_defect() < 1e-15);
        // off-grid probes through the closed form
        for i in 0..1000 {
            let t = -5.0 + 10.0 * (i as f64 + 0.37) / 1000.0;
            let s: f64 = (-20..=20).map(|n| b.base(&[t - 0.5 * n as f64])).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let g2 = Grid::new(None, 1.0 / 8.0, 64, 2).unwrap();
        assert!(tent_bupu(&g2).partition_defect() < 1e-15);
    }

    #[test]
    fn custom_windows() {
        let g = line();
        let bx = sample_named("box", &[0.5], &g).unwrap();
        assert!(make_bupu(BupuKind::Custom(bx), Some(0.5), &g).is_ok());
        let g0 = gaussian(&g);
        assert!(matches!(
            make_bupu(BupuKind::Custom(g0.clone()), Some(0.5), &g),
            Err(Error::NotAPartition(_))
        ));
        let neg = g0.scale(Complex64::new(-1.0, 0.0));
        assert!(matches!(
            make_bupu(BupuKind::Custom(neg), Some(0.5), &g),
            Err(Error::NegativeWindow(_))
        ));
    }

    #[test]
    fn quasi_interpolation_examples() {
        let g = line();
        let b = tent_bupu(&g);
        let t = tent(&g);
        let sp = quasi_interpolate(&t, &b).unwrap();
        assert_eq!(sp.values(), t.values());
        let c = SampledFunction::constant(&g, Complex64::new(0.5, -2.0));
        let spc = quasi_interpolate(&c, &b).unwrap();
        let inner = g.interior_mask(1.0);
        for (j, v) in spc.values().iter().enumerate() {
            if inner[j] {
                assert!((v - Complex64::new(0.5, -2.0)).norm() < 1e-15);
            }
        }
        let g0 = gaussian(&g);
        let mut prev = f64::INFINITY;
        for gamma in [0.5, 0.25, 0.125, 0.0625] {
            let b = make_bupu(BupuKind::Tent, Some(gamma), &g).unwrap();
            let sp = quasi_interpolate(&g0, &b).unwrap();
            assert!(sp.sup() <= g0.sup() + 1e-15);
            let err = crate::numeric::max_abs_diff(sp.values(), g0.values());
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn envelope_examples() {
        let g = line();
        let c = SampledFunction::constant(&g, Complex64::new(1.0, 0.0));
        let osc = envelope(&c, Envelope::Oscillation(0.25)).unwrap();
        let inner = g.interior_mask(0.25);
        assert!(osc.values().iter().zip(&inner).all(|(v, i)| !i || v.norm() == 0.0));
        let g0 = gaussian(&g);
        let zero = g.axis(0).index_of(0.0).unwrap() as usize;
        for delta in [0.5, 0.25, 0.125] {
            let o = envelope(&g0, Envelope::Oscillation(delta)).unwrap();
            let expect = 1.0 - (-std::f64::consts::PI * delta * delta).exp();
            assert!((o.values()[zero].re - expect).abs() < 1e-15);
        }
        assert!(matches!(
            envelope(&g0, Envelope::Oscillation(0.01)),
            Err(Error::BadDelta { .. })
        ));
        let shifted = act(&g0, &Action::Translate(vec![1.5])).unwrap();
        let a = envelope(&shifted, Envelope::LocalMax).unwrap();
        let b = act(&envelope(&g0, Envelope::LocalMax).unwrap(), &Action::Translate(vec![1.5])).unwrap();
        let inner = g.interior_mask(3.0);
        for j in 0..g.len() {
            if inner[j] {
                assert_eq!(a.values()[j], b.values()[j]);
            }
        }
    }

    #[test]
    fn oscillation_decays_for_gaussian() {
        let g0 = gaussian(&line());
        let mut prev = f64::INFINITY;
        for delta in [0.5, 0.25, 0.125, 0.0625] {
            let s = envelope(&g0, Envelope::Oscillation(delta)).unwrap().sup();
            assert!(s < prev);
            prev = s;
        }
    }

    fn mixture(grid: &Grid, p: &[f64]) -> SampledFunction {
        sample_named("gaussian_mixture", p, grid).unwrap()
    }

    fn params() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((-1.0f64..1.0, -2.0f64..2.0, 0.4f64..1.5, -2.0f64..2.0), 1..4)
            .prop_map(|v| v.into_iter().flat_map(|(a, b, c, d)| [a, b, c, d]).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn pointwise_envelope_estimates(p1 in params(), p2 in params(), k in 1i64..5) {
            let g = line();
            let (f1, f2) = (mixture(&g, &p1), mixture(&g, &p2));
            let delta = k as f64 / 16.0;
            let sum = crate::grid::add(&f1, &f2).unwrap();
            let o1 = envelope(&f1, Envelope::Oscillation(delta)).unwrap();
            let o2 = envelope(&f2, Envelope::Oscillation(delta)).unwrap();
            let os = envelope(&sum, Envelope::Oscillation(delta)).unwrap();
            let m1 = envelope(&f1, Envelope::LocalMax).unwrap();
            let m2 = envelope(&f2, Envelope::LocalMax).unwrap();
            let ms = envelope(&sum, Envelope::LocalMax).unwrap();
            let inner = g.interior_mask(1.0);
            for j in 0..g.len() {
                if !inner[j] { continue; }
                prop_assert!(o1.values()[j].re <= 2.0 * m1.values()[j].re + 1e-15);
                prop_assert!(os.values()[j].re <= o1.values()[j].re + o2.values()[j].re + 1e-14);
                prop_assert!(ms.values()[j].re <= m1.values()[j].re + m2.values()[j].re + 1e-14);
            }
            // |Re f| <= |f| pointwise, so the maximal functions are ordered
            let re = f1.map(|v| Complex64::new(v.re, 0.0));
            let mr = envelope(&re, Envelope::LocalMax).unwrap();
            for j in 0..g.len() {
                prop_assert!(mr.values()[j].re <= m1.values()[j].re);
            }
        }

        #[test]
        fn envelopes_commute_with_translation(p in params(), m in -16i64..16, k in 1i64..5) {
            let g = line();
            let f = mixture(&g, &p);
            let x = m as f64 / 16.0;
            let delta = k as f64 / 16.0;
            let tf = act(&f, &Action::Translate(vec![x])).unwrap();
            let inner = g.interior_mask(2.0 + x.abs());
            for kind in [Envelope::Oscillation(delta), Envelope::LocalMax] {
                let a = envelope(&tf, kind).unwrap();
                let b = act(&envelope(&f, kind).unwrap(), &Action::Translate(vec![x])).unwrap();
                for j in 0..g.len() {
                    if inner[j] {
                        prop_assert_eq!(a.values()[j], b.values()[j]);
                    }
                }
            }
        }
    }
}
