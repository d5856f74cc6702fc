//! Uniform grids on R or R^2, complex samples living on them, closed-form
//! generators, Riemann quadrature and the elementary operators (translation,
//! modulation, flip, conjugation and the three kinds of dilation).
//!
//! A [`SampledFunction`] optionally carries its closed-form *source*. Operators
//! propagate the source so that exact re-evaluation stays available after
//! translating or dilating, and out-of-window nodes can still be read.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{as_integer, cis_turns};

/// Closed-form function of a point in R^d.
pub type Field = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// One axis of a uniform grid: nodes `origin + i * spacing`, `0 <= i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub origin: f64,
    pub spacing: f64,
    pub count: usize,
}

impl Axis {
    #[inline]
    pub fn node(&self, i: i64) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    /// Right end of the half-open window `[origin, origin + count * spacing)`.
    pub fn end(&self) -> f64 {
        self.node(self.count as i64)
    }

    pub fn length(&self) -> f64 {
        self.count as f64 * self.spacing
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.origin && t < self.end()
    }

    /// Index of the node at `t`, if `t` is (numerically) a node; may lie outside `0..count`.
    pub fn index_of(&self, t: f64) -> Option<i64> {
        as_integer((t - self.origin) / self.spacing)
    }

    /// Frequency axis: spacing `1/(count * spacing)`, symmetric about zero.
    pub fn dual(&self) -> Axis {
        let spacing = 1.0 / (self.count as f64 * self.spacing);
        Axis {
            origin: -(self.count as f64 / 2.0) * spacing,
            spacing,
            count: self.count,
        }
    }

    /// Half-width of the window when centred; otherwise the largest |t| reached.
    pub fn radius(&self) -> f64 {
        self.origin.abs().max(self.end().abs())
    }

    fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) || !self.spacing.is_finite() || !self.origin.is_finite() {
            return Err(Error::BadGrid(format!(
                "spacing {} / origin {} invalid",
                self.spacing, self.origin
            )));
        }
        if self.count < 8 || !self.count.is_power_of_two() {
            return Err(Error::BadCount(self.count));
        }
        let ratio = 1.0 / (2.0 * self.spacing);
        if as_integer(ratio).is_none_or(|k| k < 1) {
            return Err(Error::NonCommensurateSpacing {
                spacing: self.spacing,
                ratio,
            });
        }
        Ok(())
    }

    fn same_as(&self, other: &Axis) -> bool {
        self.count == other.count
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && (self.origin - other.origin).abs() <= 1e-12 * self.spacing.max(self.origin.abs())
    }
}

/// Uniform grid on R^d, d in {1, 2}; values are stored row-major (axis 0 slowest).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| a.same_as(b))
    }
}

impl Grid {
    /// `make_grid`: `n` nodes of spacing `h` per axis starting at `t0`
    /// (default `-n h / 2`, a window symmetric about zero).
    pub fn new(t0: Option<f64>, h: f64, n: usize, d: usize) -> Result<Grid> {
        if !(1..=2).contains(&d) {
            return Err(Error::BadGrid(format!("dimension {d} not in {{1, 2}}")));
        }
        let origin = t0.unwrap_or(-(n as f64) * h / 2.0);
        Grid::from_axes(vec![
            Axis {
                origin,
                spacing: h,
                count: n
            };
            d
        ])
    }

    pub fn from_axes(axes: Vec<Axis>) -> Result<Grid> {
        if !(1..=2).contains(&axes.len()) {
            return Err(Error::BadGrid(format!(
                "dimension {} not in {{1, 2}}",
                axes.len()
            )));
        }
        for a in &axes {
            a.validate()?;
        }
        Ok(Grid { axes })
    }

    /// The common 1-D grid with window `[-n h / 2, n h / 2)`.
    pub fn line(h: f64, n: usize) -> Result<Grid> {
        Grid::new(None, h, n, 1)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    /// Frequency grid of the continuous Fourier transform sampled on this grid.
    pub fn dual(&self) -> Result<Grid> {
        Grid::from_axes(self.axes.iter().map(Axis::dual).collect())
    }

    /// True when the frequency grid coincides with this grid (`n h^2 = 1`, centred).
    pub fn is_self_dual(&self) -> bool {
        self.dual().map(|g| &g == self).unwrap_or(false)
    }

    pub fn multi_index(&self, flat: usize) -> [i64; 2] {
        match self.axes.len() {
            1 => [flat as i64, 0],
            _ => {
                let n1 = self.axes[1].count;
                [(flat / n1) as i64, (flat % n1) as i64]
            }
        }
    }

    /// Flat index of a multi-index, `None` when outside the window.
    pub fn flat_index(&self, idx: &[i64]) -> Option<usize> {
        let mut flat = 0usize;
        for (a, &i) in self.axes.iter().zip(idx) {
            if i < 0 || i as usize >= a.count {
                return None;
            }
            flat = flat * a.count + i as usize;
        }
        Some(flat)
    }

    /// Coordinates of a (possibly out-of-window) multi-index.
    pub fn coords(&self, idx: &[i64], out: &mut [f64]) {
        for (k, a) in self.axes.iter().enumerate() {
            out[k] = a.node(idx[k]);
        }
    }

    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.multi_index(flat);
        let mut p = [0.0; 2];
        self.coords(&idx[..self.dim()], &mut p[..self.dim()]);
        p
    }

    /// All node coordinates, one `[f64; 2]` per node (unused trailing entries are zero).
    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    /// Mask of nodes at distance at least `margin` from every window edge.
    pub fn interior_mask(&self, margin: f64) -> Vec<bool> {
        (0..self.len())
            .map(|j| {
                let p = self.point(j);
                self.axes
                    .iter()
                    .enumerate()
                    .all(|(k, a)| p[k] - a.origin >= margin && a.end() - a.spacing - p[k] >= margin)
            })
            .collect()
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// Index offsets for a grid-commensurate shift vector.
    pub fn shift_in_nodes(&self, x: &[f64]) -> Result<[i64; 2]> {
        if x.len() != self.dim() {
            return Err(Error::BadParams(format!(
                "shift has {} components, grid has {}",
                x.len(),
                self.dim()
            )));
        }
        let mut m = [0i64; 2];
        for (k, a) in self.axes.iter().enumerate() {
            m[k] = as_integer(x[k] / a.spacing).ok_or(Error::NonCommensurateShift {
                shift: x[k],
                spacing: a.spacing,
            })?;
        }
        Ok(m)
    }
}

/// Invertible d x d matrix together with its inverse and inverse transpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeMatrix {
    dim: usize,
    entries: [f64; 4],
    inverse: [f64; 4],
    det: f64,
}

impl LatticeMatrix {
    /// Row-major entries: one value for d = 1, four for d = 2.
    pub fn new(entries: &[f64]) -> Result<LatticeMatrix> {
        match entries.len() {
            1 => {
                let a = entries[0];
                if a.abs() < 1e-14 || !a.is_finite() {
                    return Err(Error::SingularMatrix(a));
                }
                Ok(LatticeMatrix {
                    dim: 1,
                    entries: [a, 0.0, 0.0, 0.0],
                    inverse: [1.0 / a, 0.0, 0.0, 0.0],
                    det: a,
                })
            }
            4 => {
                let [a, b, c, d] = [entries[0], entries[1], entries[2], entries[3]];
                let det = a * d - b * c;
                if det.abs() < 1e-14 || !det.is_finite() {
                    return Err(Error::SingularMatrix(det));
                }
                Ok(LatticeMatrix {
                    dim: 2,
                    entries: [a, b, c, d],
                    inverse: [d / det, -b / det, -c / det, a / det],
                    det,
                })
            }
            n => Err(Error::BadParams(format!(
                "matrix needs 1 or 4 entries, got {n}"
            ))),
        }
    }

    pub fn identity(dim: usize) -> LatticeMatrix {
        LatticeMatrix::scalar(dim, 1.0).expect("identity is invertible")
    }

    pub fn scalar(dim: usize, a: f64) -> Result<LatticeMatrix> {
        match dim {
            1 => LatticeMatrix::new(&[a]),
            2 => LatticeMatrix::new(&[a, 0.0, 0.0, a]),
            _ => Err(Error::BadParams(format!("dimension {dim}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries[..self.dim * self.dim]
    }

    pub fn inverse(&self) -> LatticeMatrix {
        LatticeMatrix {
            dim: self.dim,
            entries: self.inverse,
            inverse: self.entries,
            det: 1.0 / self.det,
        }
    }

    pub fn transpose(&self) -> LatticeMatrix {
        let t = |m: [f64; 4]| [m[0], m[2], m[1], m[3]];
        LatticeMatrix {
            dim: self.dim,
            entries: t(self.entries),
            inverse: t(self.inverse),
            det: self.det,
        }
    }

    /// `A^dagger`, the inverse transpose.
    pub fn inv_transpose(&self) -> LatticeMatrix {
        self.inverse().transpose()
    }

    pub fn apply(&self, x: &[f64]) -> [f64; 2] {
        Self::mul(&self.entries, self.dim, x)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> [f64; 2] {
        Self::mul(&self.inverse, self.dim, x)
    }

    pub fn compose(&self, other: &LatticeMatrix) -> LatticeMatrix {
        let (a, b) = (&self.entries, &other.entries);
        if self.dim == 1 {
            LatticeMatrix::new(&[a[0] * b[0]]).expect("product of invertibles")
        } else {
            LatticeMatrix::new(&[
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ])
            .expect("product of invertibles")
        }
    }

    fn mul(m: &[f64; 4], dim: usize, x: &[f64]) -> [f64; 2] {
        if dim == 1 {
            [m[0] * x[0], 0.0]
        } else {
            [m[0] * x[0] + m[1] * x[1], m[2] * x[0] + m[3] * x[1]]
        }
    }

    /// Integer vectors `k` with `A k` inside the box `lo <= . < hi`.
    pub fn lattice_points_in(&self, lo: &[f64], hi: &[f64]) -> Vec<([i64; 2], [f64; 2])> {
        let d = self.dim;
        // bounding box of A^{-1}(box) in k-space
        let mut kmin = [i64::MAX; 2];
        let mut kmax = [i64::MIN; 2];
        let corners: Vec<[f64; 2]> = if d == 1 {
            vec![[lo[0], 0.0], [hi[0], 0.0]]
        } else {
            vec![[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]]
        };
        for c in &corners {
            let k = self.apply_inverse(&c[..d]);
            for j in 0..d {
                kmin[j] = kmin[j].min(k[j].floor() as i64 - 1);
                kmax[j] = kmax[j].max(k[j].ceil() as i64 + 1);
            }
        }
        let inside = |p: &[f64; 2]| (0..d).all(|j| p[j] >= lo[j] && p[j] < hi[j]);
        let mut out = Vec::new();
        if d == 1 {
            for k in kmin[0]..=kmax[0] {
                let p = self.apply(&[k as f64]);
                if inside(&p) {
                    out.push(([k, 0], p));
                }
            }
        } else {
            for k0 in kmin[0]..=kmax[0] {
                for k1 in kmin[1]..=kmax[1] {
                    let p = self.apply(&[k0 as f64, k1 as f64]);
                    if inside(&p) {
                        out.push(([k0, k1], p));
                    }
                }
            }
        }
        out
    }
}

/// Complex samples on a [`Grid`], optionally with their closed-form source.
#[derive(Clone)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
    source: Option<Field>,
    label: Option<String>,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("grid", &self.grid)
            .field("len", &self.values.len())
            .field("has_source", &self.source.is_some())
            .field("label", &self.label)
            .finish()
    }
}

impl SampledFunction {
    /// Samples `field` at every node and keeps it as the source.
    pub fn from_field(grid: &Grid, field: Field) -> SampledFunction {
        let d = grid.dim();
        let mut p = [0.0; 2];
        let values = (0..grid.len())
            .map(|j| {
                let idx = grid.multi_index(j);
                grid.coords(&idx[..d], &mut p[..d]);
                field(&p[..d])
            })
            .collect();
        SampledFunction {
            grid: grid.clone(),
            values,
            source: Some(field),
            label: None,
        }
    }

    pub fn from_fn<F>(grid: &Grid, f: F) -> SampledFunction
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::from_field(grid, Arc::new(f))
    }

    /// Plain samples without a source.
    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<SampledFunction> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::BadParams(format!("non-finite sample {v}")));
        }
        Ok(SampledFunction {
            grid: grid.clone(),
            values,
            source: None,
            label: None,
        })
    }

    pub(crate) fn from_parts(
        grid: Grid,
        values: Vec<Complex64>,
        source: Option<Field>,
    ) -> SampledFunction {
        SampledFunction {
            grid,
            values,
            source,
            label: None,
        }
    }

    pub fn zeros(grid: &Grid) -> SampledFunction {
        Self::from_fn(grid, |_| Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: &Grid, c: Complex64) -> SampledFunction {
        Self::from_fn(grid, move |_| c)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn without_source(mut self) -> Self {
        self.source = None;
        self
    }

    pub fn with_source(mut self, source: Field) -> Self {
        self.source = Some(source);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn source(&self) -> Option<&Field> {
        self.source.as_ref()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Value at a multi-index; outside the window the source is evaluated at
    /// the (virtual) node, or zero when there is no source.
    #[inline]
    pub fn value_at(&self, idx: &[i64]) -> Complex64 {
        match self.grid.flat_index(idx) {
            Some(j) => self.values[j],
            None => match &self.source {
                Some(src) => {
                    let mut p = [0.0; 2];
                    let d = self.grid.dim();
                    self.grid.coords(idx, &mut p[..d]);
                    src(&p[..d])
                }
                None => Complex64::new(0.0, 0.0),
            },
        }
    }

    /// Point evaluation: the source if present, the sample at a node, and
    /// multilinear interpolation between nodes otherwise (zero outside).
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        if let Some(src) = &self.source {
            return src(x);
        }
        let d = self.grid.dim();
        let mut base = [0i64; 2];
        let mut frac = [0.0; 2];
        for k in 0..d {
            let a = self.grid.axis(k);
            let u = (x[k] - a.origin) / a.spacing;
            if let Some(i) = as_integer(u) {
                base[k] = i;
                frac[k] = 0.0;
            } else {
                base[k] = u.floor() as i64;
                frac[k] = u - u.floor();
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = [0i64; 2];
            for k in 0..d {
                let up = (corner >> k) & 1 == 1;
                idx[k] = base[k] + up as i64;
                w *= if up { frac[k] } else { 1.0 - frac[k] };
            }
            if w != 0.0 {
                acc += self.value_at(&idx[..d]) * w;
            }
        }
        acc
    }

    /// Elementwise map of values and source.
    pub fn map<F>(&self, f: F) -> SampledFunction
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + Clone + 'static,
    {
        let values = self.values.iter().map(|&v| f(v)).collect();
        let source = self.source.clone().map(|src| {
            let f = f.clone();
            Arc::new(move |x: &[f64]| f(src(x))) as Field
        });
        SampledFunction::from_parts(self.grid.clone(), values, source)
    }

    pub fn scale(&self, c: Complex64) -> SampledFunction {
        self.map(move |v| v * c)
    }

    pub fn abs(&self) -> SampledFunction {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest |value| on nodes within `margin` of the window edge.
    pub fn edge_sup(&self, margin: f64) -> f64 {
        let inner = self.grid.interior_mask(margin);
        self.values
            .iter()
            .zip(inner)
            .filter(|(_, i)| !i)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Radius of the smallest centred box outside which |f| <= rel * sup(f).
    pub fn effective_radius(&self, rel: f64) -> f64 {
        let cut = rel * self.sup();
        let d = self.grid.dim();
        let mut r: f64 = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            if v.norm() > cut {
                let p = self.grid.point(j);
                for &c in &p[..d] {
                    r = r.max(c.abs());
                }
            }
        }
        r
    }
}

/// Closed-form functions available through [`sample_named`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Generator {
    /// `prod_j max(1 - 2|t_j|/width, 0)`; width 1 is the standard tent.
    Tent { width: f64 },
    /// `exp(-pi a |t|^2)`; a = 1 is the Fourier invariant Gaussian.
    Gaussian { a: f64 },
    /// `prod_j sin(pi t_j)/(pi t_j)`.
    Sinc,
    /// Indicator of the half-open cube `[-width/2, width/2)^d`.
    Box { width: f64 },
    /// `exp(i pi alpha |t|^2)`.
    Chirp { alpha: f64 },
    /// `exp(2 pi i x . t)`.
    PureFrequency { freq: Vec<f64> },
    /// 1 on `|s| <= b`, raised-cosine roll-off to 0 at `|s| = beta/2` (product over axes).
    RaisedCosineSpectrum { b: f64, beta: f64 },
    /// Sum of modulated, shifted and dilated Gaussians (d = 1).
    GaussianMixture(Vec<MixtureTerm>),
}

/// `weight * exp(2 pi i omega t) * exp(-pi ((t - center)/width)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureTerm {
    pub weight: f64,
    pub center: f64,
    pub width: f64,
    pub omega: f64,
}

pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        let x = std::f64::consts::PI * t;
        x.sin() / x
    }
}

pub fn raised_cosine(s: f64, b: f64, beta: f64) -> f64 {
    let s = s.abs();
    let edge = beta / 2.0;
    if s <= b {
        1.0
    } else if s >= edge {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (s - b) / (edge - b)).cos())
    }
}

impl Generator {
    /// Parses a generator name and its parameter list.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Generator> {
        let bad = |msg: &str| Error::BadParams(format!("{name}: {msg}"));
        let opt = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        let g = match name {
            "tent" => Generator::Tent { width: opt(0, 1.0) },
            "gaussian" => Generator::Gaussian { a: opt(0, 1.0) },
            "sinc" => Generator::Sinc,
            "box" => Generator::Box { width: opt(0, 1.0) },
            "chirp" => Generator::Chirp { alpha: opt(0, 1.0) },
            "pure_frequency" => Generator::PureFrequency {
                freq: params.to_vec(),
            },
            "raised_cosine_spectrum" => {
                if params.len() != 2 {
                    return Err(bad("expects [b, beta]"));
                }
                Generator::RaisedCosineSpectrum {
                    b: params[0],
                    beta: params[1],
                }
            }
            "gaussian_mixture" => {
                if params.is_empty() || params.len() % 4 != 0 {
                    return Err(bad("expects groups of [weight, center, width, omega]"));
                }
                Generator::GaussianMixture(
                    params
                        .chunks(4)
                        .map(|c| MixtureTerm {
                            weight: c[0],
                            center: c[1],
                            width: c[2],
                            omega: c[3],
                        })
                        .collect(),
                )
            }
            other => return Err(Error::UnknownGenerator(other.to_string())),
        };
        g.validate(None)?;
        Ok(g)
    }

    fn validate(&self, dim: Option<usize>) -> Result<()> {
        let bad = |msg: String| Err(Error::BadParams(msg));
        match self {
            Generator::Tent { width } | Generator::Box { width } if !(*width > 0.0) => {
                bad(format!("width {width} must be positive"))
            }
            Generator::Gaussian { a } if !(*a > 0.0) => bad(format!("a = {a} must be positive")),
            Generator::Chirp { alpha } if !alpha.is_finite() => bad("alpha not finite".into()),
            Generator::PureFrequency { freq } if dim.is_some_and(|d| d != freq.len()) => bad(
                format!("pure_frequency needs {} components", dim.unwrap_or(0)),
            ),
            Generator::RaisedCosineSpectrum { b, beta } if !(*b >= 0.0 && *b < beta / 2.0) => {
                bad(format!("need 0 <= b < beta/2, got b = {b}, beta = {beta}"))
            }
            Generator::GaussianMixture(terms) => {
                if dim.is_some_and(|d| d != 1) {
                    return bad("gaussian_mixture is one-dimensional".into());
                }
                if terms.iter().any(|t| !(t.width > 0.0)) {
                    return bad("mixture widths must be positive".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The closed form as a [`Field`] on R^dim.
    pub fn field(&self, dim: usize) -> Result<Field> {
        self.validate(Some(dim))?;
        let c = |re: f64| Complex64::new(re, 0.0);
        Ok(match self.clone() {
            Generator::Tent { width } => Arc::new(move |t: &[f64]| {
                c(t.iter()
                    .map(|&x| (1.0 - 2.0 * x.abs() / width).max(0.0))
                    .product())
            }),
            Generator::Gaussian { a } => Arc::new(move |t: &[f64]| {
                let r2: f64 = t.iter().map(|x| x * x).sum();
                c((-std::f64::consts::PI * a * r2).exp())
            }),
            Generator::Sinc => Arc::new(move |t: &[f64]| c(t.iter().map(|&x| sinc(x)).product())),
            Generator::Box { width } => Arc::new(move |t: &[f64]| {
                let inside = t.iter().all(|&x| x >= -width / 2.0 && x < width / 2.0);
                c(if inside { 1.0 } else { 0.0 })
            }),
            Generator::Chirp { alpha } => Arc::new(move |t: &[f64]| {
                let r2: f64 = t.iter().map(|x| x * x).sum();
                cis_turns(0.5 * alpha * r2)
            }),
            Generator::PureFrequency { freq } => Arc::new(move |t: &[f64]| {
                cis_turns(freq.iter().zip(t).map(|(w, x)| w * x).sum())
            }),
            Generator::RaisedCosineSpectrum { b, beta } => Arc::new(move |t: &[f64]| {
                c(t.iter().map(|&s| raised_cosine(s, b, beta)).product())
            }),
            Generator::GaussianMixture(terms) => Arc::new(move |t: &[f64]| {
                terms
                    .iter()
                    .map(|m| {
                        let u = (t[0] - m.center) / m.width;
                        cis_turns(m.omega * t[0])
                            * (m.weight * (-std::f64::consts::PI * u * u).exp())
                    })
                    .sum()
            }),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Tent { .. } => "tent",
            Generator::Gaussian { .. } => "gaussian",
            Generator::Sinc => "sinc",
            Generator::Box { .. } => "box",
            Generator::Chirp { .. } => "chirp",
            Generator::PureFrequency { .. } => "pure_frequency",
            Generator::RaisedCosineSpectrum { .. } => "raised_cosine_spectrum",
            Generator::GaussianMixture(_) => "gaussian_mixture",
        }
    }
}

/// Samples a generator on `grid`, keeping the closed form as the source.
pub fn sample(generator: &Generator, grid: &Grid) -> Result<SampledFunction> {
    let field = generator.field(grid.dim())?;
    Ok(SampledFunction::from_field(grid, field).with_label(generator.name()))
}

pub fn sample_named(name: &str, params: &[f64], grid: &Grid) -> Result<SampledFunction> {
    sample(&Generator::from_name(name, params)?, grid)
}

/// The standard Gaussian `exp(-pi |t|^2)`.
pub fn gaussian(grid: &Grid) -> SampledFunction {
    sample(&Generator::Gaussian { a: 1.0 }, grid).expect("gaussian is always valid")
}

/// The standard tent `max(1 - 2|t|, 0)` (product over axes).
pub fn tent(grid: &Grid) -> SampledFunction {
    sample(&Generator::Tent { width: 1.0 }, grid).expect("tent is always valid")
}

/// Riemann sum `h^d * sum of values`.
pub fn integrate(f: &SampledFunction) -> Complex64 {
    f.values.iter().sum::<Complex64>() * f.grid.cell_volume()
}

/// `<f, g> = h^d sum f conj(g)`.
pub fn inner(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    f.grid.check_same(&g.grid)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        * f.grid.cell_volume())
}

/// Bilinear pairing `h^d sum f g` (no conjugation).
pub fn pairing(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    f.grid.check_same(&g.grid)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b)
        .sum::<Complex64>()
        * f.grid.cell_volume())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub sup: f64,
    pub l1: f64,
    pub l2: f64,
}

pub fn norms(f: &SampledFunction) -> Norms {
    let w = f.grid.cell_volume();
    let (mut sup, mut l1, mut l2) = (0.0f64, 0.0, 0.0);
    for v in &f.values {
        let a = v.norm();
        sup = sup.max(a);
        l1 += a;
        l2 += a * a;
    }
    Norms {
        sup,
        l1: l1 * w,
        l2: (l2 * w).sqrt(),
    }
}

/// Elementary operators acting on functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// `T_x f(t) = f(t - x)`; x must be a multiple of the spacing.
    Translate(Vec<f64>),
    /// `E_w f(t) = exp(2 pi i w . t) f(t)`.
    Modulate(Vec<f64>),
    /// `f(-t)`.
    Flip,
    Conjugate,
    /// `S_rho f(t) = rho^-d f(t / rho)`.
    Stretch(f64),
    /// `D_rho f(t) = f(rho t)`.
    ValueDilate(f64),
    /// `alpha_A f(t) = |det A|^(1/2) f(A t)`.
    MatrixDilate(LatticeMatrix),
}

impl Action {
    /// Parses an operator name with its real parameters; a matrix takes 1 or 4 entries.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Action> {
        let one = || {
            params
                .first()
                .copied()
                .ok_or_else(|| Error::BadParams(format!("`{name}` needs a parameter")))
        };
        Ok(match name {
            "translate" => Action::Translate(params.to_vec()),
            "modulate" => Action::Modulate(params.to_vec()),
            "flip" => Action::Flip,
            "conjugate" => Action::Conjugate,
            "stretch" => Action::Stretch(one()?),
            "value_dilate" => Action::ValueDilate(one()?),
            "matrix_dilate" => Action::MatrixDilate(LatticeMatrix::new(params)?),
            other => return Err(Error::BadKind(format!("unknown operator `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Action::Translate(_) => "translate",
            Action::Modulate(_) => "modulate",
            Action::Flip => "flip",
            Action::Conjugate => "conjugate",
            Action::Stretch(_) => "stretch",
            Action::ValueDilate(_) => "value_dilate",
            Action::MatrixDilate(_) => "matrix_dilate",
        }
    }
}

/// Resamples `t -> scale * f(map(t))`, exactly through the source when
/// available, by multilinear interpolation otherwise.
fn resample<M>(f: &SampledFunction, scale: f64, map: M) -> SampledFunction
where
    M: Fn(&[f64]) -> [f64; 2] + Send + Sync + Clone + 'static,
{
    let d = f.grid.dim();
    match &f.source {
        Some(src) => {
            let src = src.clone();
            let field: Field = Arc::new(move |t: &[f64]| src(&map(t)[..t.len()]) * scale);
            SampledFunction::from_field(&f.grid, field)
        }
        None => {
            let values = (0..f.grid.len())
                .map(|j| {
                    let p = f.grid.point(j);
                    f.eval(&map(&p[..d])[..d]) * scale
                })
                .collect();
            SampledFunction::from_parts(f.grid.clone(), values, None)
        }
    }
}

/// Applies an elementary operator.
pub fn act(f: &SampledFunction, action: &Action) -> Result<SampledFunction> {
    let grid = &f.grid;
    let d = grid.dim();
    let out = match action {
        Action::Translate(x) => {
            let m = grid.shift_in_nodes(x)?;
            let values = (0..grid.len())
                .map(|j| {
                    let idx = grid.multi_index(j);
                    let src = [idx[0] - m[0], idx[1] - m[1]];
                    f.value_at(&src[..d])
                })
                .collect();
            let source = f.source.clone().map(|src| {
                let x = x.clone();
                Arc::new(move |t: &[f64]| {
                    let mut u = [0.0; 2];
                    for k in 0..t.len() {
                        u[k] = t[k] - x[k];
                    }
                    src(&u[..t.len()])
                }) as Field
            });
            SampledFunction::from_parts(grid.clone(), values, source)
        }
        Action::Modulate(w) => {
            if w.len() != d {
                return Err(Error::BadParams(format!("modulation needs {d} components")));
            }
            let w2 = w.clone();
            let phase = move |t: &[f64]| cis_turns(w2.iter().zip(t).map(|(a, b)| a * b).sum());
            let values = (0..grid.len())
                .map(|j| {
                    let p = grid.point(j);
                    f.values[j] * phase(&p[..d])
                })
                .collect();
            let source = f.source.clone().map(|src| {
                let phase = phase.clone();
                Arc::new(move |t: &[f64]| src(t) * phase(t)) as Field
            });
            SampledFunction::from_parts(grid.clone(), values, source)
        }
        Action::Flip => {
            // node(-t_j) is again a node when -2 origin / h is an integer
            let mirror: Option<Vec<i64>> = grid
                .axes()
                .iter()
                .map(|a| as_integer(-2.0 * a.origin / a.spacing))
                .collect();
            match mirror {
                Some(mirror) => {
                    let values = (0..grid.len())
                        .map(|j| {
                            let idx = grid.multi_index(j);
                            let src = [mirror[0] - idx[0], mirror.get(1).map_or(0, |m| m - idx[1])];
                            f.value_at(&src[..d])
                        })
                        .collect();
                    let source = f.source.clone().map(|src| {
                        Arc::new(move |t: &[f64]| {
                            let mut u = [0.0; 2];
                            for k in 0..t.len() {
                                u[k] = -t[k];
                            }
                            src(&u[..t.len()])
                        }) as Field
                    });
                    SampledFunction::from_parts(grid.clone(), values, source)
                }
                None => resample(f, 1.0, |t: &[f64]| {
                    let mut u = [0.0; 2];
                    for k in 0..t.len() {
                        u[k] = -t[k];
                    }
                    u
                }),
            }
        }
        Action::Conjugate => f.map(|v| v.conj()),
        Action::Stretch(rho) => {
            let rho = positive(*rho)?;
            resample(f, rho.powi(-(d as i32)), move |t: &[f64]| {
                let mut u = [0.0; 2];
                for k in 0..t.len() {
                    u[k] = t[k] / rho;
                }
                u
            })
        }
        Action::ValueDilate(rho) => {
            let rho = positive(*rho)?;
            resample(f, 1.0, move |t: &[f64]| {
                let mut u = [0.0; 2];
                for k in 0..t.len() {
                    u[k] = t[k] * rho;
                }
                u
            })
        }
        Action::MatrixDilate(a) => {
            if a.dim() != d {
                return Err(Error::BadParams(format!(
                    "{}x{} matrix on a {d}-dimensional grid",
                    a.dim(),
                    a.dim()
                )));
            }
            let a = a.clone();
            let scale = a.det().abs().sqrt();
            resample(f, scale, move |t: &[f64]| a.apply(t))
        }
    };
    Ok(match &f.label {
        Some(l) => out.with_label(format!("{}({l})", action.name())),
        None => out,
    })
}

fn positive(rho: f64) -> Result<f64> {
    if rho > 0.0 && rho.is_finite() {
        Ok(rho)
    } else {
        Err(Error::BadParams(format!("dilation factor {rho} must be positive")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pointwise {
    Mul,
    Add,
    Sub,
}

/// Elementwise product, sum or difference on a common grid.
pub fn pointwise(f: &SampledFunction, g: &SampledFunction, kind: Pointwise) -> Result<SampledFunction> {
    f.grid.check_same(&g.grid)?;
    let op = move |a: Complex64, b: Complex64| match kind {
        Pointwise::Mul => a * b,
        Pointwise::Add => a + b,
        Pointwise::Sub => a - b,
    };
    let values = f.values.iter().zip(&g.values).map(|(&a, &b)| op(a, b)).collect();
    let source = match (&f.source, &g.source) {
        (Some(fs), Some(gs)) => {
            let (fs, gs) = (fs.clone(), gs.clone());
            Some(Arc::new(move |t: &[f64]| op(fs(t), gs(t))) as Field)
        }
        _ => None,
    };
    Ok(SampledFunction::from_parts(f.grid.clone(), values, source))
}

pub fn mul(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    pointwise(f, g, Pointwise::Mul)
}

pub fn add(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    pointwise(f, g, Pointwise::Add)
}

pub fn sub(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    pointwise(f, g, Pointwise::Sub)
}

/// `sup |f - g|` on a common grid.
pub fn sup_distance(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    f.grid.check_same(&g.grid)?;
    Ok(crate::numeric::max_abs_diff(&f.values, &g.values))
}
