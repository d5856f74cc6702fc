//! Demo series: CSV rows for external plotting plus a JSON summary.

use mildbank::corpus::corpus;
use mildbank::fourier::ift_to;
use mildbank::grid::{gaussian, sample_named, Grid, SampledFunction};
use mildbank::mild::MildDistribution;
use mildbank::sampling::{bandlimit, central_error, design_window, reconstruct, sample_checked, BandSpec, Kernel, Profile};
use mildbank::systems::{
    central_gap, kernel_apply, kernel_build, kernel_compose, regularized_chirp, tils_apply, KernelKind, Path, Tils,
};
use mildbank::verify::weak_star_gaps;
use mildbank::{Error, Result};
use serde_json::{json, Value};

/// Grid options as given on the command line; unset fields take the demo's defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridArgs {
    pub h: Option<f64>,
    pub n: Option<usize>,
    pub t0: Option<f64>,
}

impl GridArgs {
    fn grid(&self, h: f64, n: usize) -> Result<Grid> {
        Grid::new(self.t0, self.h.unwrap_or(h), self.n.unwrap_or(n), 1)
    }
}

pub struct DemoOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Value,
}

pub enum Cell {
    Num(f64),
    Text(String),
}

fn series_rows(label: Option<&str>, out: &SampledFunction, reference: &SampledFunction) -> Vec<Vec<Cell>> {
    out.values()
        .iter()
        .zip(reference.values())
        .enumerate()
        .map(|(j, (v, r))| {
            let mut row = Vec::with_capacity(7);
            if let Some(l) = label {
                row.push(Cell::Text(l.into()));
            }
            row.extend(
                [out.grid().point(j)[0], v.re, v.im, r.re, r.im, (v - r).norm()]
                    .into_iter()
                    .map(Cell::Num),
            );
            row
        })
        .collect()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn run_demo(name: &str, grid: GridArgs, seed: u64) -> Result<DemoOutput> {
    match name {
        "shannon" => shannon(grid),
        "dirac_approx" => dirac_approx(seed),
        "chirp" => chirp(grid),
        "kernel_identity" => kernel_identity(grid, seed),
        other => Err(Error::UnknownDemo(other.into())),
    }
}

fn shannon(args: GridArgs) -> Result<DemoOutput> {
    let g = args.grid(1.0 / 16.0, 1024)?;
    let spec = BandSpec::new(0.4, 1.0)?;
    let f = bandlimit(&gaussian(&g), &spec)?;
    let w = design_window(&spec, Profile::RaisedCosine, &g)?;
    let recon = reconstruct(&sample_checked(&f, &spec)?, spec.alpha(), Kernel::Window(&w), &g)?;
    Ok(DemoOutput {
        header: header(&["t", "recon_re", "recon_im", "ref_re", "ref_im", "abs_error"]),
        rows: series_rows(None, &recon, &f),
        summary: json!({
            "band_edge": spec.b,
            "beta": spec.beta,
            "alpha": spec.alpha(),
            "profile": Profile::RaisedCosine.name(),
            "central_error": central_error(&recon, &f)?,
            "window_decay": w.decay,
        }),
    })
}

fn dirac_approx(seed: u64) -> Result<DemoOutput> {
    let [dilations, _, _] = weak_star_gaps(seed)?;
    let rhos = [0.5, 0.25, 0.125, 0.0625, 0.03125];
    Ok(DemoOutput {
        header: header(&["rho", "gap"]),
        rows: rhos
            .iter()
            .zip(&dilations)
            .map(|(r, g)| vec![Cell::Num(*r), Cell::Num(*g)])
            .collect(),
        summary: json!({
            "sequence": "S_rho g0 -> delta_0",
            "grid": {"h": 1.0 / 128.0, "n": 4096},
            "rho": rhos,
            "gap": dilations,
        }),
    })
}

fn chirp(args: GridArgs) -> Result<DemoOutput> {
    let g = args.grid(1.0 / 64.0, 1024)?;
    let sys = Tils::new(MildDistribution::chirp(1.0, 1))?;
    let g0 = gaussian(&g);
    let freq = tils_apply(&sys, &g0, Path::Freq)?;
    let time = tils_apply(&sys, &g0, Path::Time)?;
    // sinc does not decay: damp it, convolve, and watch the outputs settle
    let sinc = sample_named("sinc", &[], &g)?;
    let steps = regularized_chirp(1.0, &sinc, &[1.0, 1.5, 2.0])?;
    let changes: Vec<f64> = steps.windows(2).map(|w| central_gap(&w[0].1, &w[1].1)).collect();
    Ok(DemoOutput {
        header: header(&["t", "time_re", "time_im", "freq_re", "freq_im", "abs_error"]),
        rows: series_rows(None, &time, &freq),
        summary: json!({
            "alpha": 1.0,
            "path_residual": central_gap(&time, &freq),
            "regularized_widths": steps.iter().map(|s| s.0).collect::<Vec<_>>(),
            "regularized_changes": changes,
        }),
    })
}

fn kernel_identity(args: GridArgs, seed: u64) -> Result<DemoOutput> {
    let g = args.grid(1.0 / 16.0, 256)?;
    let id = kernel_compose(&kernel_build(KernelKind::Ift, &g)?, &kernel_build(KernelKind::Ft, &g)?)?;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, f) in corpus(&g, seed, 7).iter().enumerate() {
        let out = kernel_apply(&id, f)?;
        errors.push(mildbank::numeric::max_abs_diff(out.values(), f.values()));
        rows.extend(series_rows(Some(&format!("f{i}")), &out, f));
    }
    // the same operator through the FFT, for comparison
    let g0 = gaussian(&g);
    let via_fft = ift_to(&mildbank::fourier::fourier(&g0)?, &g)?;
    let fft_gap = mildbank::numeric::max_abs_diff(via_fft.values(), g0.values());
    Ok(DemoOutput {
        header: header(&["function", "t", "re", "im", "ref_re", "ref_im", "abs_error"]),
        rows,
        summary: json!({
            "self_dual": g.is_self_dual(),
            "max_errors": errors,
            "fft_roundtrip_error": fft_gap,
        }),
    })
}
