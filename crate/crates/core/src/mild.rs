//! Mild distributions: bounded linear functionals on S0, represented as sums
//! of symbolic components whose actions on sampled test functions are exact
//! up to quadrature.
//!
//! Pairings are bilinear, `iota(k)(f) = int k f`, so that an extended operator
//! acts through the transpose of the operator on test functions.

use std::borrow::Cow;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feichtinger::{check_decay, s0_norm, S0Variant};
use crate::fourier::fourier;
use crate::grid::{act, mul, pairing, Action, Grid, LatticeMatrix, SampledFunction};
use crate::measures::BoundedMeasure;
use crate::numeric::cis_turns;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub enum Component {
    /// `c f(x)`.
    Atom { x: Vec<f64>, c: Complex64 },
    /// `c sum_k exp(2 pi i omega . A k) f(A k + shift)`, optionally only over `|k|_inf <= K`.
    Comb {
        lattice: LatticeMatrix,
        shift: Vec<f64>,
        modulation: Vec<f64>,
        c: Complex64,
        truncation: Option<u32>,
    },
    /// `c f^(-x) = c int f(t) exp(2 pi i x . t) dt`.
    PureFrequency { x: Vec<f64>, c: Complex64 },
    /// `c int f(t) exp(2 pi i freq . t) exp(i pi alpha |t - center|^2) dt`.
    Chirp {
        alpha: f64,
        center: Vec<f64>,
        freq: Vec<f64>,
        c: Complex64,
    },
    /// `int g f`.
    Regular(SampledFunction),
    /// `sigma(F f)`.
    Fourier(Box<Component>),
    /// `sigma(g f)`.
    Multiplied(Box<Component>, SampledFunction),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

fn plus(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `g` sampled on `grid`: borrowed when already there, resampled through its source otherwise.
fn on_grid<'a>(g: &'a SampledFunction, grid: &Grid) -> Result<Cow<'a, SampledFunction>> {
    if g.grid() == grid {
        return Ok(Cow::Borrowed(g));
    }
    match g.source() {
        Some(src) if g.grid().dim() == grid.dim() => Ok(Cow::Owned(SampledFunction::from_field(grid, src.clone()))),
        _ => Err(Error::GridMismatch("function has no closed form to resample onto the test grid".into())),
    }
}

/// Integer vectors in the cube `|k|_inf <= k_max`.
fn cube(dim: usize, k_max: i64) -> Vec<[i64; 2]> {
    if dim == 1 {
        (-k_max..=k_max).map(|k| [k, 0]).collect()
    } else {
        (-k_max..=k_max)
            .flat_map(|a| (-k_max..=k_max).map(move |b| [a, b]))
            .collect()
    }
}

/// Local frequency of the chirp over the essential support of `f` must stay
/// below a quarter of the sampling rate.
fn check_phase(alpha: f64, center: &[f64], freq: &[f64], f: &SampledFunction) -> Result<()> {
    let h = f.grid().axes().iter().map(|a| a.spacing).fold(0.0, f64::max);
    let r = f.effective_radius(1e-16);
    let z = center.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let eta = freq.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let local = alpha.abs() * (r + z) * (f.grid().dim() as f64).sqrt() + eta;
    if local * h > 0.25 {
        return Err(Error::PhaseUnresolved(format!(
            "local frequency {local:.4} times spacing {h} exceeds 1/4 (rule: alpha h R <= 1/4)"
        )));
    }
    Ok(())
}

impl Component {
    pub fn dim(&self) -> usize {
        match self {
            Component::Atom { x, .. } | Component::PureFrequency { x, .. } => x.len(),
            Component::Comb { lattice, .. } => lattice.dim(),
            Component::Chirp { center, .. } => center.len(),
            Component::Regular(g) => g.grid().dim(),
            Component::Fourier(inner) | Component::Multiplied(inner, _) => inner.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Component::Atom { .. } => "atom",
            Component::Comb { .. } => "comb",
            Component::PureFrequency { .. } => "pure_frequency",
            Component::Chirp { .. } => "chirp",
            Component::Regular(_) => "regular",
            Component::Fourier(_) => "fourier",
            Component::Multiplied(..) => "multiplied",
        }
    }

    pub fn scale(&self, s: Complex64) -> Component {
        match self {
            Component::Atom { x, c } => Component::Atom { x: x.clone(), c: c * s },
            Component::Comb {
                lattice,
                shift,
                modulation,
                c,
                truncation,
            } => Component::Comb {
                lattice: lattice.clone(),
                shift: shift.clone(),
                modulation: modulation.clone(),
                c: c * s,
                truncation: *truncation,
            },
            Component::PureFrequency { x, c } => Component::PureFrequency { x: x.clone(), c: c * s },
            Component::Chirp { alpha, center, freq, c } => Component::Chirp {
                alpha: *alpha,
                center: center.clone(),
                freq: freq.clone(),
                c: c * s,
            },
            Component::Regular(g) => Component::Regular(g.scale(s)),
            Component::Fourier(inner) => Component::Fourier(Box::new(inner.scale(s))),
            Component::Multiplied(inner, g) => Component::Multiplied(Box::new(inner.scale(s)), g.clone()),
        }
    }

    /// Action on `f`; `checked` enables the decay and phase-resolution guards.
    fn apply(&self, f: &SampledFunction, checked: bool) -> Result<Complex64> {
        if f.grid().dim() != self.dim() {
            return Err(Error::GridMismatch(format!(
                "{}-dimensional component on a {}-dimensional grid",
                self.dim(),
                f.grid().dim()
            )));
        }
        match self {
            Component::Atom { x, c } => Ok(c * f.eval(x)),
            Component::Comb {
                lattice,
                shift,
                modulation,
                c,
                truncation,
            } => {
                let d = lattice.dim();
                let points: Vec<([i64; 2], [f64; 2])> = match truncation {
                    Some(k) => cube(d, *k as i64)
                        .into_iter()
                        .map(|k| {
                            let kf = [k[0] as f64, k[1] as f64];
                            (k, lattice.apply(&kf[..d]))
                        })
                        .collect(),
                    None => {
                        if checked {
                            check_decay(f)?;
                        }
                        let grid = f.grid();
                        let lo: Vec<f64> = grid.axes().iter().zip(shift).map(|(a, y)| a.origin - y).collect();
                        let hi: Vec<f64> = grid.axes().iter().zip(shift).map(|(a, y)| a.end() - y).collect();
                        lattice.lattice_points_in(&lo, &hi)
                    }
                };
                let sum: Complex64 = points
                    .iter()
                    .map(|(_, p)| {
                        let at = plus(&p[..d], shift);
                        cis_turns(dot(modulation, &p[..d])) * f.eval(&at)
                    })
                    .sum();
                Ok(c * sum)
            }
            Component::PureFrequency { x, c } => Ok(c * crate::fourier::ft_at(f, &neg(x))),
            Component::Chirp { alpha, center, freq, c } => {
                if checked {
                    check_decay(f)?;
                    check_phase(*alpha, center, freq, f)?;
                }
                let grid = f.grid();
                let d = grid.dim();
                let sum: Complex64 = f
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let t = grid.point(j);
                        let r2: f64 = (0..d).map(|k| (t[k] - center[k]).powi(2)).sum();
                        v * cis_turns(dot(freq, &t[..d]) + 0.5 * alpha * r2)
                    })
                    .sum();
                Ok(c * sum * grid.cell_volume())
            }
            Component::Regular(g) => pairing(&*on_grid(g, f.grid())?, f),
            Component::Fourier(inner) => inner.apply(&fourier(f)?, checked),
            Component::Multiplied(inner, g) => inner.apply(&mul(&*on_grid(g, f.grid())?, f)?, checked),
        }
    }

    fn ft(&self) -> Result<Vec<Component>> {
        Ok(match self {
            Component::Atom { x, c } => vec![Component::PureFrequency { x: neg(x), c: *c }],
            Component::PureFrequency { x, c } => vec![Component::Atom { x: x.clone(), c: *c }],
            Component::Comb {
                lattice,
                shift,
                modulation,
                c,
                truncation: None,
            } => vec![Component::Comb {
                lattice: lattice.inv_transpose(),
                shift: modulation.clone(),
                modulation: neg(shift),
                c: c * cis_turns(-dot(modulation, shift)) / lattice.det().abs(),
                truncation: None,
            }],
            Component::Comb {
                lattice,
                shift,
                modulation,
                c,
                truncation: Some(k),
            } => {
                let d = lattice.dim();
                cube(d, *k as i64)
                    .into_iter()
                    .map(|k| {
                        let kf = [k[0] as f64, k[1] as f64];
                        let p = lattice.apply(&kf[..d]);
                        Component::PureFrequency {
                            x: neg(&plus(&p[..d], shift)),
                            c: c * cis_turns(dot(modulation, &p[..d])),
                        }
                    })
                    .collect()
            }
            Component::Regular(g) => vec![Component::Regular(fourier(g)?)],
            Component::Fourier(inner) => vec![inner.act(&Action::Flip)?],
            Component::Chirp { .. } | Component::Multiplied(..) => vec![Component::Fourier(Box::new(self.clone()))],
        })
    }

    /// Extended operator: `(T sigma)(f) = sigma(T' f)` with `T'` the transpose of `T`.
    fn act(&self, action: &Action) -> Result<Component> {
        let d = self.dim();
        let vector = |v: &Vec<f64>| -> Result<Vec<f64>> {
            if v.len() == d {
                Ok(v.clone())
            } else {
                Err(Error::BadParams(format!("operator needs {d} components")))
            }
        };
        let matrix = |b: &LatticeMatrix| -> Result<LatticeMatrix> {
            if b.dim() == d {
                Ok(b.clone())
            } else {
                Err(Error::BadParams(format!("{0}x{0} matrix for a {d}-dimensional distribution", b.dim())))
            }
        };
        if matches!(action, Action::Stretch(_) | Action::ValueDilate(_)) {
            return Err(Error::BadKind(format!(
                "`{}` has no extension here; use matrix_dilate",
                action.name()
            )));
        }
        Ok(match self {
            Component::Atom { x, c } => match action {
                Action::Translate(z) => Component::Atom { x: plus(x, &vector(z)?), c: *c },
                Action::Modulate(w) => Component::Atom {
                    x: x.clone(),
                    c: c * cis_turns(dot(&vector(w)?, x)),
                },
                Action::Flip => Component::Atom { x: neg(x), c: *c },
                Action::Conjugate => Component::Atom { x: x.clone(), c: c.conj() },
                Action::MatrixDilate(b) => {
                    let b = matrix(b)?;
                    Component::Atom {
                        x: b.apply_inverse(x)[..d].to_vec(),
                        c: c / b.det().abs().sqrt(),
                    }
                }
                _ => unreachable!(),
            },
            Component::Comb {
                lattice,
                shift,
                modulation,
                c,
                truncation,
            } => {
                let (mut a, mut y, mut w, mut c) = (lattice.clone(), shift.clone(), modulation.clone(), *c);
                match action {
                    Action::Translate(z) => y = plus(&y, &vector(z)?),
                    Action::Modulate(eta) => {
                        let eta = vector(eta)?;
                        c *= cis_turns(dot(&eta, &y));
                        w = plus(&w, &eta);
                    }
                    Action::Flip => {
                        y = neg(&y);
                        w = neg(&w);
                    }
                    Action::Conjugate => {
                        w = neg(&w);
                        c = c.conj();
                    }
                    Action::MatrixDilate(b) => {
                        let b = matrix(b)?;
                        let binv = b.inverse();
                        a = binv.compose(&a);
                        y = binv.apply(&y)[..d].to_vec();
                        w = b.transpose().apply(&w)[..d].to_vec();
                        c /= b.det().abs().sqrt();
                    }
                    _ => unreachable!(),
                }
                Component::Comb {
                    lattice: a,
                    shift: y,
                    modulation: w,
                    c,
                    truncation: *truncation,
                }
            }
            Component::PureFrequency { x, c } => match action {
                Action::Translate(z) => Component::PureFrequency {
                    x: x.clone(),
                    c: c * cis_turns(-dot(x, &vector(z)?)),
                },
                Action::Modulate(w) => Component::PureFrequency { x: plus(x, &vector(w)?), c: *c },
                Action::Flip => Component::PureFrequency { x: neg(x), c: *c },
                Action::Conjugate => Component::PureFrequency { x: neg(x), c: c.conj() },
                Action::MatrixDilate(b) => {
                    let b = matrix(b)?;
                    Component::PureFrequency {
                        x: b.transpose().apply(x)[..d].to_vec(),
                        c: c * b.det().abs().sqrt(),
                    }
                }
                _ => unreachable!(),
            },
            Component::Chirp { alpha, center, freq, c } => {
                let (mut alpha, mut z, mut eta, mut c) = (*alpha, center.clone(), freq.clone(), *c);
                match action {
                    Action::Translate(a) => {
                        let a = vector(a)?;
                        c *= cis_turns(-dot(&eta, &a));
                        z = plus(&z, &a);
                    }
                    Action::Modulate(w) => eta = plus(&eta, &vector(w)?),
                    Action::Flip => {
                        z = neg(&z);
                        eta = neg(&eta);
                    }
                    Action::Conjugate => {
                        alpha = -alpha;
                        eta = neg(&eta);
                        c = c.conj();
                    }
                    Action::MatrixDilate(b) => {
                        let b = matrix(b)?;
                        let e = b.entries();
                        let s = e[0];
                        if e.len() == 4 && (e[1] != 0.0 || e[2] != 0.0 || e[3] != s) {
                            return Err(Error::BadParams("chirps dilate only by scalar matrices".into()));
                        }
                        alpha *= s * s;
                        z = z.iter().map(|v| v / s).collect();
                        eta = eta.iter().map(|v| v * s).collect();
                        c *= b.det().abs().sqrt();
                    }
                    _ => unreachable!(),
                }
                Component::Chirp {
                    alpha,
                    center: z,
                    freq: eta,
                    c,
                }
            }
            Component::Regular(g) => Component::Regular(act(g, action)?),
            Component::Fourier(inner) => {
                let moved = match action {
                    Action::Translate(z) => inner.act(&Action::Modulate(z.clone()))?,
                    Action::Modulate(w) => inner.act(&Action::Translate(neg(w)))?,
                    Action::Flip => inner.act(&Action::Flip)?,
                    Action::Conjugate => inner.act(&Action::Conjugate)?.act(&Action::Flip)?,
                    Action::MatrixDilate(b) => inner.act(&Action::MatrixDilate(matrix(b)?.inv_transpose()))?,
                    _ => unreachable!(),
                };
                Component::Fourier(Box::new(moved))
            }
            Component::Multiplied(inner, g) => {
                let (sigma, g) = match action {
                    Action::Translate(_) => (inner.act(action)?, act(g, action)?),
                    Action::Modulate(_) => (inner.act(action)?, g.clone()),
                    Action::Flip => (inner.act(action)?, act(g, action)?),
                    Action::Conjugate => (inner.act(action)?, act(g, action)?),
                    Action::MatrixDilate(b) => {
                        let b = matrix(b)?;
                        let k = Complex64::new(1.0 / b.det().abs().sqrt(), 0.0);
                        (inner.act(action)?, act(g, action)?.scale(k))
                    }
                    _ => unreachable!(),
                };
                Component::Multiplied(Box::new(sigma), g)
            }
        })
    }
}

/// Finite sum of symbolic components.
#[derive(Debug, Clone)]
pub struct MildDistribution {
    dim: usize,
    components: Vec<Component>,
}

impl MildDistribution {
    pub fn new(dim: usize, components: Vec<Component>) -> Result<Self> {
        if let Some(c) = components.iter().find(|c| c.dim() != dim) {
            return Err(Error::BadParams(format!(
                "{}-dimensional {} in a {dim}-dimensional distribution",
                c.dim(),
                c.kind()
            )));
        }
        Ok(MildDistribution { dim, components })
    }

    pub fn zero(dim: usize) -> Self {
        MildDistribution { dim, components: Vec::new() }
    }

    fn single(c: Component) -> Self {
        MildDistribution {
            dim: c.dim(),
            components: vec![c],
        }
    }

    /// `delta_x`.
    pub fn dirac(x: &[f64]) -> Self {
        Self::single(Component::Atom {
            x: x.to_vec(),
            c: Complex64::new(1.0, 0.0),
        })
    }

    /// `Shah_A = sum_k delta_{A k}`.
    pub fn shah(a: &LatticeMatrix) -> Self {
        Self::single(Component::Comb {
            lattice: a.clone(),
            shift: vec![0.0; a.dim()],
            modulation: vec![0.0; a.dim()],
            c: Complex64::new(1.0, 0.0),
            truncation: None,
        })
    }

    /// `sum_{|k|_inf <= k_max} delta_{A k}`.
    pub fn truncated_shah(a: &LatticeMatrix, k_max: u32) -> Self {
        Self::single(Component::Comb {
            lattice: a.clone(),
            shift: vec![0.0; a.dim()],
            modulation: vec![0.0; a.dim()],
            c: Complex64::new(1.0, 0.0),
            truncation: Some(k_max),
        })
    }

    /// Acts by `f -> f^(-x)`, the embedded character `exp(2 pi i x . t)`.
    pub fn pure_frequency(x: &[f64]) -> Self {
        Self::single(Component::PureFrequency {
            x: x.to_vec(),
            c: Complex64::new(1.0, 0.0),
        })
    }

    /// The embedded chirp `exp(i pi alpha |t|^2)`.
    pub fn chirp(alpha: f64, dim: usize) -> Self {
        Self::single(Component::Chirp {
            alpha,
            center: vec![0.0; dim],
            freq: vec![0.0; dim],
            c: Complex64::new(1.0, 0.0),
        })
    }

    /// Embedding of a test function, `f -> int g f`.
    pub fn regular(g: &SampledFunction) -> Self {
        Self::single(Component::Regular(g.clone()))
    }

    /// Atoms become point evaluations and the density a regular component.
    pub fn from_measure(mu: &BoundedMeasure) -> Self {
        let mut components: Vec<Component> = mu
            .atoms()
            .iter()
            .map(|a| Component::Atom { x: a.x.clone(), c: a.c })
            .collect();
        if let Some(g) = mu.density() {
            components.push(Component::Regular(g.clone()));
        }
        MildDistribution {
            dim: mu.dim(),
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn plus(&self, other: &MildDistribution) -> Result<MildDistribution> {
        if self.dim != other.dim {
            return Err(Error::BadParams("distributions of different dimension".into()));
        }
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Ok(MildDistribution { dim: self.dim, components })
    }

    pub fn scale(&self, c: Complex64) -> MildDistribution {
        MildDistribution {
            dim: self.dim,
            components: self.components.iter().map(|k| k.scale(c)).collect(),
        }
    }

    fn apply(&self, f: &SampledFunction, checked: bool) -> Result<Complex64> {
        if f.grid().dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "{}-dimensional distribution on a {}-dimensional grid",
                self.dim,
                f.grid().dim()
            )));
        }
        self.components
            .iter()
            .try_fold(ZERO, |acc, c| Ok(acc + c.apply(f, checked)?))
    }
}

/// `sigma(f)` without the decay and phase guards, for test functions that are
/// only locally meaningful (kernel rows, reflected translates).
pub fn dist_apply_unguarded(sigma: &MildDistribution, f: &SampledFunction) -> Result<Complex64> {
    sigma.apply(f, false)
}

/// `sigma(f)`.
pub fn dist_apply(sigma: &MildDistribution, f: &SampledFunction) -> Result<Complex64> {
    sigma.apply(f, true)
}

/// `(F sigma)(f) = sigma(F f)`, rewritten component by component.
pub fn dist_ft(sigma: &MildDistribution) -> Result<MildDistribution> {
    let mut components = Vec::with_capacity(sigma.components.len());
    for c in &sigma.components {
        components.extend(c.ft()?);
    }
    Ok(MildDistribution {
        dim: sigma.dim,
        components,
    })
}

/// Extension of an elementary operator to distributions.
pub fn dist_act(action: &Action, sigma: &MildDistribution) -> Result<MildDistribution> {
    Ok(MildDistribution {
        dim: sigma.dim,
        components: sigma.components.iter().map(|c| c.act(action)).collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Conv,
    Mul,
}

#[derive(Debug, Clone)]
pub enum Combined {
    Function(SampledFunction),
    Distribution(MildDistribution),
}

/// `(sigma * g)(t) = sigma(T_t g^flip)` at every node of g's grid.
pub fn dist_convolve(sigma: &MildDistribution, g: &SampledFunction) -> Result<SampledFunction> {
    let grid = g.grid();
    if grid.dim() != sigma.dim {
        return Err(Error::GridMismatch("distribution and function dimensions differ".into()));
    }
    let d = grid.dim();
    let mut out = vec![ZERO; grid.len()];
    let mut generic: Vec<&Component> = Vec::new();
    for c in &sigma.components {
        match c {
            Component::Regular(k) => {
                let k = on_grid(k, grid)?;
                let part = crate::fourier::convolve(&k, g)?;
                out.iter_mut().zip(part.values()).for_each(|(o, v)| *o += v);
            }
            Component::Atom { x, c } => {
                let part = match grid.shift_in_nodes(x) {
                    Ok(_) => act(g, &Action::Translate(x.clone()))?,
                    Err(_) => SampledFunction::from_values(
                        grid,
                        (0..grid.len())
                            .map(|j| {
                                let p = grid.point(j);
                                let u: Vec<f64> = (0..d).map(|k| p[k] - x[k]).collect();
                                g.eval(&u)
                            })
                            .collect(),
                    )?,
                };
                out.iter_mut().zip(part.values()).for_each(|(o, v)| *o += v * c);
            }
            other => generic.push(other),
        }
    }
    if !generic.is_empty() {
        // node index of t_i - u_j = (i - j) h is i - j - origin / h
        let offsets: Option<Vec<i64>> = grid
            .axes()
            .iter()
            .map(|a| crate::numeric::as_integer(-a.origin / a.spacing))
            .collect();
        for i in 0..grid.len() {
            let ii = grid.multi_index(i);
            let values: Vec<Complex64> = (0..grid.len())
                .map(|j| {
                    let jj = grid.multi_index(j);
                    match &offsets {
                        Some(o) => {
                            let idx = [ii[0] - jj[0] + o[0], ii[1] - jj[1] + o.get(1).copied().unwrap_or(0)];
                            g.value_at(&idx[..d])
                        }
                        None => {
                            let (p, q) = (grid.point(i), grid.point(j));
                            let u: Vec<f64> = (0..d).map(|k| p[k] - q[k]).collect();
                            g.eval(&u)
                        }
                    }
                })
                .collect();
            let reflected = match g.source() {
                Some(src) => {
                    let src = src.clone();
                    let t = grid.point(i);
                    SampledFunction::from_values(grid, values)?.with_source(std::sync::Arc::new(move |u: &[f64]| {
                        let mut w = [0.0; 2];
                        for k in 0..u.len() {
                            w[k] = t[k] - u[k];
                        }
                        src(&w[..u.len()])
                    }))
                }
                None => SampledFunction::from_values(grid, values)?,
            };
            for c in &generic {
                out[i] += c.apply(&reflected, false)?;
            }
        }
    }
    SampledFunction::from_values(grid, out)
}

/// `(sigma g)(f) = sigma(g f)`.
pub fn dist_multiply(sigma: &MildDistribution, g: &SampledFunction) -> Result<MildDistribution> {
    if g.grid().dim() != sigma.dim {
        return Err(Error::GridMismatch("distribution and function dimensions differ".into()));
    }
    let components = sigma
        .components
        .iter()
        .map(|c| {
            Ok(match c {
                Component::Atom { x, c } => Component::Atom {
                    x: x.clone(),
                    c: c * g.eval(x),
                },
                Component::Regular(k) => Component::Regular(mul(k, &*on_grid(g, k.grid())?)?),
                other => Component::Multiplied(Box::new(other.clone()), g.clone()),
            })
        })
        .collect::<Result<_>>()?;
    Ok(MildDistribution {
        dim: sigma.dim,
        components,
    })
}

pub fn dist_combine(sigma: &MildDistribution, g: &SampledFunction, kind: Combine) -> Result<Combined> {
    match kind {
        Combine::Conv => dist_convolve(sigma, g).map(Combined::Function),
        Combine::Mul => dist_multiply(sigma, g).map(Combined::Distribution),
    }
}

/// `max_f |sigma1(f) - sigma2(f)|` over the battery.
pub fn wstar_gap(
    sigma1: &MildDistribution,
    sigma2: &MildDistribution,
    battery: &[SampledFunction],
) -> Result<f64> {
    if battery.is_empty() {
        return Err(Error::EmptyBattery);
    }
    battery.iter().try_fold(0.0f64, |acc, f| {
        Ok(acc.max((dist_apply(sigma1, f)? - dist_apply(sigma2, f)?).norm()))
    })
}

/// Lower bound for the functional norm: `max_f |sigma(f)| / ||f||_S0` over the battery.
pub fn bound_witness(sigma: &MildDistribution, battery: &[SampledFunction], stride: usize) -> Result<f64> {
    if battery.is_empty() {
        return Err(Error::EmptyBattery);
    }
    battery.iter().try_fold(0.0f64, |acc, f| {
        let n = s0_norm(f, S0Variant::L1, stride)?;
        Ok(if n > 0.0 { acc.max(dist_apply(sigma, f)?.norm() / n) } else { acc })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{battery, DEFAULT_SEED};
    use crate::grid::{gaussian, sample_named};
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn self_dual() -> Grid {
        Grid::line(1.0 / 16.0, 256).unwrap()
    }

    fn theta(a: f64) -> f64 {
        (-40..=40).map(|k: i64| (-PI * a * (k * k) as f64).exp()).sum()
    }

    fn smooth(b: &[SampledFunction]) -> Vec<SampledFunction> {
        b.iter().filter(|f| !f.label().unwrap_or("").starts_with("tent")).cloned().collect()
    }

    /// Whether the distribution meets the spectrum of every battery function,
    /// directly or after one transform: tent spectra are not resolved in the
    /// frequency window, so those checks run on the smooth part of the battery.
    fn spectral(s: &MildDistribution, transformed: bool) -> bool {
        s.components().iter().any(|c| match c {
            Component::Fourier(inner) => matches!(**inner, Component::Chirp { .. } | Component::Comb { truncation: None, .. }),
            Component::Chirp { .. } | Component::Comb { truncation: None, .. } => transformed,
            _ => false,
        })
    }

    fn samples() -> Vec<MildDistribution> {
        let g = self_dual();
        let mix = sample_named("gaussian_mixture", &[0.8, 0.5, 0.9, 0.0, -0.3, -1.0, 1.2, 0.0], &g).unwrap();
        vec![
            MildDistribution::dirac(&[0.3]),
            MildDistribution::shah(&LatticeMatrix::new(&[1.0]).unwrap()),
            MildDistribution::truncated_shah(&LatticeMatrix::new(&[0.5]).unwrap(), 3),
            // a node of the grid: off-node values of a tent are not recovered from its sampled spectrum
            MildDistribution::pure_frequency(&[0.75]),
            MildDistribution::chirp(0.25, 1),
            MildDistribution::regular(&mix),
            dist_ft(&MildDistribution::chirp(0.25, 1)).unwrap(),
            dist_multiply(&MildDistribution::chirp(0.25, 1), &gaussian(&g)).unwrap(),
        ]
    }

    #[test]
    fn atom_and_comb_actions() {
        let g = Grid::line(1.0 / 16.0, 1024).unwrap();
        let g0 = gaussian(&g);
        let f = sample_named("gaussian_mixture", &[1.0, 0.3, 0.8, 0.2], &g).unwrap();
        assert_eq!(dist_apply(&MildDistribution::dirac(&[0.3]), &f).unwrap(), f.eval(&[0.3]));
        let shah = MildDistribution::shah(&LatticeMatrix::identity(1));
        assert!((dist_apply(&shah, &g0).unwrap() - c(theta(1.0))).norm() < 1e-12);
        for s in samples() {
            assert_eq!(dist_apply(&s, &SampledFunction::zeros(&self_dual())).unwrap(), ZERO);
        }
        assert!(matches!(
            dist_apply(&shah, &sample_named("sinc", &[], &g).unwrap()),
            Err(Error::TailTooFat(_))
        ));
        assert!(matches!(
            dist_apply(&MildDistribution::chirp(4.0, 1), &g0),
            Err(Error::PhaseUnresolved(_))
        ));
    }

    #[test]
    fn fourier_rewrites() {
        let g = self_dual();
        let bat = battery(&g, DEFAULT_SEED);
        // F delta_0 acts as integration
        let fd = dist_ft(&MildDistribution::dirac(&[0.0])).unwrap();
        for f in &bat {
            let lhs = dist_apply(&fd, f).unwrap();
            assert!((lhs - crate::grid::integrate(f)).norm() < 1e-12);
        }
        // F Shah_2 = (1/2) Shah_{1/2}
        let two = LatticeMatrix::new(&[2.0]).unwrap();
        let half = MildDistribution::shah(&LatticeMatrix::new(&[0.5]).unwrap()).scale(c(0.5));
        let gap = wstar_gap(&dist_ft(&MildDistribution::shah(&two)).unwrap(), &half, &smooth(&bat)).unwrap();
        assert!(gap < 1e-10, "{gap}");
        let rg = dist_ft(&MildDistribution::regular(&gaussian(&g))).unwrap();
        match &rg.components()[0] {
            Component::Regular(h) => assert!(crate::numeric::max_abs_diff(h.values(), gaussian(&g).values()) < 1e-13),
            _ => unreachable!(),
        }
    }

    #[test]
    fn dual_pairing_consistency() {
        let g = self_dual();
        let bat = battery(&g, DEFAULT_SEED);
        let soft = smooth(&bat);
        let wide = smooth(&battery(&Grid::line(1.0 / 16.0, 1024).unwrap(), DEFAULT_SEED));
        let actions = [
            Action::Translate(vec![0.5]),
            Action::Modulate(vec![0.25]),
            Action::Flip,
            Action::Conjugate,
        ];
        let mut worst: f64 = 0.0;
        for s in samples() {
            let set = if spectral(&s, false) { &soft } else { &bat };
            for f in set {
                for a in &actions {
                    let lhs = dist_apply(&dist_act(a, &s).unwrap(), f).unwrap();
                    let rhs = match a {
                        Action::Translate(z) => dist_apply(&s, &act(f, &Action::Translate(neg(z))).unwrap()).unwrap(),
                        Action::Conjugate => dist_apply(&s, &act(f, a).unwrap()).unwrap().conj(),
                        _ => dist_apply(&s, &act(f, a).unwrap()).unwrap(),
                    };
                    worst = worst.max((lhs - rhs).norm());
                }
            }
            let fts = dist_ft(&s).unwrap();
            let set = if spectral(&s, true) { &soft } else { &bat };
            for f in set {
                let lhs = dist_apply(&fts, f).unwrap();
                let rhs = dist_apply(&s, &fourier(f).unwrap()).unwrap();
                worst = worst.max((lhs - rhs).norm());
            }
            // contract on the side where a chirp meets the test function, keeping its phase resolved
            let wrapped = matches!(s.components()[0], Component::Fourier(_));
            let b = LatticeMatrix::new(&[if wrapped { 2.0 } else { 0.5 }]).unwrap();
            for f in &wide {
                let lhs = dist_apply(&dist_act(&Action::MatrixDilate(b.clone()), &s).unwrap(), f).unwrap();
                let rhs = dist_apply(&s, &act(f, &Action::MatrixDilate(b.inverse())).unwrap()).unwrap();
                worst = worst.max((lhs - rhs).norm());
            }
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn period_four_and_linearity() {
        let g = self_dual();
        let bat = battery(&g, DEFAULT_SEED);
        for s in samples() {
            let mut t = s.clone();
            for _ in 0..4 {
                t = dist_ft(&t).unwrap();
            }
            let set = if spectral(&s, true) { smooth(&bat) } else { bat.clone() };
            assert!(wstar_gap(&s, &t, &set).unwrap() < 1e-8);
        }
        let (s1, s2) = (MildDistribution::dirac(&[0.25]), MildDistribution::pure_frequency(&[-0.5]));
        let (a, b) = (Complex64::new(0.5, -1.0), c(2.0));
        let mix = s1.scale(a).plus(&s2.scale(b)).unwrap();
        for f in &bat {
            let lhs = dist_apply(&mix, f).unwrap();
            let rhs = a * dist_apply(&s1, f).unwrap() + b * dist_apply(&s2, f).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn extension_and_measures() {
        let g = self_dual();
        let bat = battery(&g, DEFAULT_SEED);
        let k = sample_named("gaussian_mixture", &[1.0, 0.5, 1.0, 0.0], &g).unwrap();
        for a in [Action::Translate(vec![0.75]), Action::Modulate(vec![0.3]), Action::Flip, Action::Conjugate] {
            let lhs = dist_act(&a, &MildDistribution::regular(&k)).unwrap();
            let rhs = MildDistribution::regular(&act(&k, &a).unwrap());
            assert!(wstar_gap(&lhs, &rhs, &bat).unwrap() < 1e-10);
        }
        let moved = dist_act(&Action::Translate(vec![0.5]), &MildDistribution::dirac(&[0.25])).unwrap();
        match &moved.components()[0] {
            Component::Atom { x, .. } => assert_eq!(x, &vec![0.75]),
            _ => unreachable!(),
        }
        let mut r = crate::corpus::rng(7);
        let mu = crate::corpus::random_measure(&g, &mut r);
        let sigma = MildDistribution::from_measure(&mu);
        for f in &bat {
            let lhs = dist_apply(&sigma, f).unwrap();
            let rhs = crate::measures::measure_apply(&mu, f).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn products_and_convolutions() {
        let g = self_dual();
        let bat = battery(&g, DEFAULT_SEED);
        let g0 = gaussian(&g);
        let d0 = dist_convolve(&MildDistribution::dirac(&[0.0]), &g0).unwrap();
        assert_eq!(d0.values(), g0.values());
        let big = Grid::line(1.0 / 16.0, 1024).unwrap();
        let per = dist_convolve(&MildDistribution::shah(&LatticeMatrix::identity(1)), &gaussian(&big)).unwrap();
        let zero = big.axis(0).index_of(0.0).unwrap() as usize;
        assert!((per.values()[zero] - c(theta(1.0))).norm() < 1e-12);
        let vanish = SampledFunction::from_fn(&g, |t| c((PI * t[0]).sin().powi(2)));
        let killed = dist_multiply(&MildDistribution::shah(&LatticeMatrix::identity(1)), &vanish).unwrap();
        for f in &bat {
            assert!(dist_apply(&killed, f).unwrap().norm() < 1e-12);
        }
        // exchange identities in action
        let soft = smooth(&bat);
        let h = sample_named("gaussian_mixture", &[1.0, 0.25, 0.9, 0.0], &g).unwrap();
        let hh = fourier(&h).unwrap();
        let mut worst: f64 = 0.0;
        for s in samples() {
            let lhs = dist_ft(&MildDistribution::regular(&dist_convolve(&s, &h).unwrap())).unwrap();
            let rhs = dist_multiply(&dist_ft(&s).unwrap(), &hh).unwrap();
            let lhs2 = dist_ft(&dist_multiply(&s, &h).unwrap()).unwrap();
            let rhs2 = MildDistribution::regular(&dist_convolve(&dist_ft(&s).unwrap(), &hh).unwrap());
            worst = worst.max(wstar_gap(&lhs, &rhs, &soft).unwrap());
            worst = worst.max(wstar_gap(&lhs2, &rhs2, &soft).unwrap());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn weak_star_sequences() {
        let g = Grid::line(1.0 / 128.0, 4096).unwrap();
        let bat = battery(&g, DEFAULT_SEED);
        let d0 = MildDistribution::dirac(&[0.0]);
        let g0 = gaussian(&g);
        let gaps: Vec<f64> = [0.5, 0.25, 0.125, 0.0625]
            .iter()
            .map(|&rho| {
                let s = MildDistribution::regular(&act(&g0, &Action::Stretch(rho)).unwrap());
                wstar_gap(&s, &d0, &bat).unwrap()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        let gaps: Vec<f64> = (1..=5)
            .map(|n| wstar_gap(&MildDistribution::dirac(&[0.5f64.powi(n)]), &d0, &bat).unwrap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        let shah = MildDistribution::shah(&LatticeMatrix::identity(1));
        let gaps: Vec<f64> = [1u32, 2, 4, 8]
            .iter()
            .map(|&k| wstar_gap(&MildDistribution::truncated_shah(&LatticeMatrix::identity(1), k), &shah, &bat).unwrap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert_eq!(wstar_gap(&shah, &shah, &bat).unwrap(), 0.0);
        assert!(matches!(wstar_gap(&shah, &shah, &[]), Err(Error::EmptyBattery)));
    }
}
