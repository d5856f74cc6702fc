//! Bounded measures represented as finitely many point masses plus an
//! integrable density: application to functions, total variation norm,
//! elementary actions, convolution with functions and the decomposition
//! along a partition of unity.

use num_complex::Complex64;

use crate::bupu::Bupu;
use crate::error::{Error, Result};
use crate::fourier::convolve;
use crate::grid::{act, integrate, mul, norms, Action, LatticeMatrix, SampledFunction};
use crate::numeric::cis_turns;

/// A weighted point mass `c delta_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    pub x: Vec<f64>,
    pub c: Complex64,
}

/// `sum_k c_k delta_{x_k} + mu_g`, with `mu_g(f) = int g f`.
#[derive(Debug, Clone)]
pub struct BoundedMeasure {
    dim: usize,
    atoms: Vec<PointMass>,
    density: Option<SampledFunction>,
}

impl BoundedMeasure {
    /// Builds a measure, merging atoms at coinciding positions and dropping zero weights.
    pub fn new(dim: usize, atoms: Vec<PointMass>, density: Option<SampledFunction>) -> Result<Self> {
        if let Some(g) = &density {
            if g.grid().dim() != dim {
                return Err(Error::GridMismatch("density dimension".into()));
            }
        }
        let mut merged: Vec<PointMass> = Vec::new();
        for a in atoms {
            if a.x.len() != dim {
                return Err(Error::BadParams(format!("atom position needs {dim} coordinates")));
            }
            match merged
                .iter_mut()
                .find(|m| m.x.iter().zip(&a.x).all(|(p, q)| (p - q).abs() <= 1e-12))
            {
                Some(m) => m.c += a.c,
                None => merged.push(a),
            }
        }
        merged.retain(|a| a.c != Complex64::new(0.0, 0.0));
        Ok(BoundedMeasure {
            dim,
            atoms: merged,
            density,
        })
    }

    pub fn zero(dim: usize) -> Self {
        BoundedMeasure {
            dim,
            atoms: Vec::new(),
            density: None,
        }
    }

    /// `delta_x`.
    pub fn dirac(x: &[f64]) -> Self {
        BoundedMeasure {
            dim: x.len(),
            atoms: vec![PointMass {
                x: x.to_vec(),
                c: Complex64::new(1.0, 0.0),
            }],
            density: None,
        }
    }

    /// The embedding `g -> mu_g`.
    pub fn embed(g: &SampledFunction) -> Self {
        BoundedMeasure {
            dim: g.grid().dim(),
            atoms: Vec::new(),
            density: Some(g.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[PointMass] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&SampledFunction> {
        self.density.as_ref()
    }

    /// Sum of two measures; densities must share a grid.
    pub fn plus(&self, other: &BoundedMeasure) -> Result<BoundedMeasure> {
        let density = match (&self.density, &other.density) {
            (Some(a), Some(b)) => Some(crate::grid::add(a, b)?),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        let atoms = self.atoms.iter().chain(&other.atoms).cloned().collect();
        BoundedMeasure::new(self.dim, atoms, density)
    }
}

/// `mu(f) = sum_k c_k f(x_k) + int g f`.
pub fn measure_apply(mu: &BoundedMeasure, f: &SampledFunction) -> Result<Complex64> {
    let mut acc: Complex64 = mu.atoms.iter().map(|a| a.c * f.eval(&a.x)).sum();
    if let Some(g) = &mu.density {
        acc += integrate(&mul(g, f)?);
    }
    Ok(acc)
}

/// Total variation `sum_k |c_k| + ||g||_1`.
pub fn measure_norm(mu: &BoundedMeasure) -> f64 {
    mu.atoms.iter().map(|a| a.c.norm()).sum::<f64>() + mu.density.as_ref().map_or(0.0, |g| norms(g).l1)
}

#[derive(Debug, Clone)]
pub enum MeasureAction {
    Conjugate,
    Flip,
    Translate(Vec<f64>),
    Modulate(Vec<f64>),
    /// Adjoint of `alpha_A` on functions: `delta_x -> |det A|^(-1/2) delta_{A^-1 x}`, `mu_g -> mu_{alpha_A g}`.
    MatrixDilate(LatticeMatrix),
    /// `(mu h)(f) = mu(h f)`.
    MulBy(SampledFunction),
}

pub fn measure_act(mu: &BoundedMeasure, action: &MeasureAction) -> Result<BoundedMeasure> {
    let d = mu.dim;
    let check = |v: &[f64]| {
        if v.len() == d {
            Ok(())
        } else {
            Err(Error::BadParams(format!("need {d} coordinates")))
        }
    };
    let (atoms, density): (Vec<PointMass>, Option<SampledFunction>) = match action {
        MeasureAction::Conjugate => (
            mu.atoms
                .iter()
                .map(|a| PointMass { x: a.x.clone(), c: a.c.conj() })
                .collect(),
            mu.density.as_ref().map(|g| act(g, &Action::Conjugate)).transpose()?,
        ),
        MeasureAction::Flip => (
            mu.atoms
                .iter()
                .map(|a| PointMass { x: a.x.iter().map(|v| -v).collect(), c: a.c })
                .collect(),
            mu.density.as_ref().map(|g| act(g, &Action::Flip)).transpose()?,
        ),
        MeasureAction::Translate(y) => {
            check(y)?;
            (
                mu.atoms
                    .iter()
                    .map(|a| PointMass { x: a.x.iter().zip(y).map(|(p, q)| p + q).collect(), c: a.c })
                    .collect(),
                mu.density
                    .as_ref()
                    .map(|g| act(g, &Action::Translate(y.clone())))
                    .transpose()?,
            )
        }
        MeasureAction::Modulate(w) => {
            check(w)?;
            (
                mu.atoms
                    .iter()
                    .map(|a| PointMass {
                        x: a.x.clone(),
                        c: a.c * cis_turns(a.x.iter().zip(w).map(|(p, q)| p * q).sum()),
                    })
                    .collect(),
                mu.density
                    .as_ref()
                    .map(|g| act(g, &Action::Modulate(w.clone())))
                    .transpose()?,
            )
        }
        MeasureAction::MatrixDilate(a) => {
            if a.dim() != d {
                return Err(Error::BadParams(format!("need a {d}x{d} matrix")));
            }
            let scale = a.det().abs().powf(-0.5);
            (
                mu.atoms
                    .iter()
                    .map(|p| PointMass { x: a.apply_inverse(&p.x)[..d].to_vec(), c: p.c * scale })
                    .collect(),
                mu.density
                    .as_ref()
                    .map(|g| act(g, &Action::MatrixDilate(a.clone())))
                    .transpose()?,
            )
        }
        MeasureAction::MulBy(h) => (
            mu.atoms
                .iter()
                .map(|p| PointMass { x: p.x.clone(), c: p.c * h.eval(&p.x) })
                .collect(),
            mu.density.as_ref().map(|g| mul(g, h)).transpose()?,
        ),
    };
    BoundedMeasure::new(d, atoms, density)
}

/// `(mu * f)(x) = mu(T_x f^check)` at every node of f's grid.
///
/// Point masses on grid nodes shift samples by whole indices, so `delta_x * f`
/// reproduces `T_x f` bit for bit.
pub fn measure_convolve(mu: &BoundedMeasure, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = f.grid();
    let zero = Complex64::new(0.0, 0.0);
    let mut values = vec![zero; grid.len()];
    for a in &mu.atoms {
        let shifted = match grid.shift_in_nodes(&a.x) {
            Ok(_) => act(f, &Action::Translate(a.x.clone()))?,
            Err(_) => {
                let d = grid.dim();
                let vals = (0..grid.len())
                    .map(|j| {
                        let p = grid.point(j);
                        let mut q = [0.0; 2];
                        for k in 0..d {
                            q[k] = p[k] - a.x[k];
                        }
                        f.eval(&q[..d])
                    })
                    .collect();
                SampledFunction::from_values(grid, vals)?
            }
        };
        let one = a.c == Complex64::new(1.0, 0.0);
        for (v, s) in values.iter_mut().zip(shifted.values()) {
            *v += if one { *s } else { a.c * s };
        }
    }
    if let Some(g) = &mu.density {
        let part = convolve(&g_on(g, f)?, f)?;
        for (v, s) in values.iter_mut().zip(part.values()) {
            *v += s;
        }
    }
    SampledFunction::from_values(grid, values)
}

fn g_on(g: &SampledFunction, f: &SampledFunction) -> Result<SampledFunction> {
    g.grid().check_same(f.grid())?;
    Ok(g.clone())
}

/// The pieces `mu psi_n` of the partition decomposition, keyed by lattice index.
pub fn measure_bupu_decompose(mu: &BoundedMeasure, psi: &Bupu) -> Result<Vec<(Vec<i64>, BoundedMeasure)>> {
    let d = mu.dim;
    if psi.grid().dim() != d {
        return Err(Error::GridMismatch("partition dimension".into()));
    }
    if let Some(g) = &mu.density {
        g.grid().check_same(psi.grid())?;
    }
    let mut out = Vec::new();
    for n in psi.lattice() {
        let n = &n[..d];
        let t_n = psi.node(n);
        let atoms: Vec<PointMass> = mu
            .atoms
            .iter()
            .filter_map(|a| {
                let mut u = [0.0; 2];
                for k in 0..d {
                    u[k] = a.x[k] - t_n[k];
                }
                let w = psi.base(&u[..d]);
                (w != 0.0).then(|| PointMass { x: a.x.clone(), c: a.c * w })
            })
            .collect();
        let density = match &mu.density {
            Some(g) => {
                let piece = mul(g, &psi.window(n))?;
                (piece.sup() > 0.0).then_some(piece)
            }
            None => None,
        };
        if !atoms.is_empty() || density.is_some() {
            out.push((n.to_vec(), BoundedMeasure::new(d, atoms, density)?));
        }
    }
    Ok(out)
}

/// `p = sum_{|n|_inf <= radius} psi_n`, a plateau function equal to 1 near the origin.
pub fn plateau(psi: &Bupu, radius: i64) -> SampledFunction {
    let grid = psi.grid();
    let d = grid.dim();
    let values = (0..grid.len())
        .map(|j| {
            let idx = grid.multi_index(j);
            let s: f64 = psi
                .covering(&idx[..d])
                .into_iter()
                .filter(|(n, _)| n[..d].iter().all(|v| v.abs() <= radius))
                .map(|(_, w)| w)
                .sum();
            Complex64::new(s, 0.0)
        })
        .collect();
    SampledFunction::from_values(grid, values).expect("finite plateau")
}
