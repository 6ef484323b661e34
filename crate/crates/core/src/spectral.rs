//! Spectral diagnostics built on Prüfer trajectories: Bernstein–Szegő densities,
//! interval masses, tail oscillation of `log r_n` and power-law drift at candidate points.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::{self, Write};

use crate::phase_sets::circular_distance;
use crate::pruefer::{distance_to_2pi_z, log_bs_denominator_from_state, run_trajectory, Coefficients, PruferState, SINGULAR_TOL};
use crate::{Error, Model, Result};

/// Density approximant on a grid of `eta` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureProbe {
    pub model: Model,
    pub n: usize,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

fn final_state(coeffs: &Coefficients, eta: f64, n: usize) -> Result<PruferState> {
    run_trajectory(coeffs, eta, n, |_| {})
}

/// OPUC: `1/(2 pi r_n^2)`. OPRL: `1/(pi (a_n^2 p_n^2 + p_{n-1}^2))` at `x = 2 cos(eta/2)`,
/// with the denominator recovered from `(r_n, theta_n)`.
pub fn density_probe(coeffs: &Coefficients, n: usize, grid: &[f64]) -> Result<MeasureProbe> {
    let model = coeffs.model();
    if model == Model::Oprl {
        if let Some(&eta) = grid.iter().find(|&&e| distance_to_2pi_z(e) < SINGULAR_TOL) {
            return Err(Error::Singularity {
                phase: eta,
                tol: SINGULAR_TOL,
                context: "OPRL density grid point".into(),
            });
        }
    }
    let table = coeffs.tabulated(n + 1);
    let density = grid
        .par_iter()
        .map(|&eta| {
            let s = final_state(&table, eta, n)?;
            Ok(match model {
                Model::Opuc => (-2.0 * s.log_r).exp() / (2.0 * PI),
                Model::Oprl => (-log_bs_denominator_from_state(&s, eta)?).exp() / PI,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MeasureProbe {
        model,
        n,
        grid: grid.to_vec(),
        density,
    })
}

/// Agreement required between the two finest Simpson estimates.
pub const MASS_TOL: f64 = 1e-8;

/// Mass of `(lo, hi)` under the probe's approximant, by composite Simpson on the probe grid.
///
/// `lo` and `hi` must be grid points of a uniform grid. Strides `1, 2, 4, ...` are tried;
/// the finest two admissible estimates must agree to [`MASS_TOL`]. OPRL masses are in `x`,
/// i.e. the integrand carries the factor `|dx/d eta| = sin(eta/2)`.
pub fn interval_mass(probe: &MeasureProbe, lo: f64, hi: f64) -> Result<f64> {
    let g = &probe.grid;
    let resolution = |reason: String| Error::Resolution { estimate: f64::NAN, reason };
    if g.len() < 3 {
        return Err(resolution("probe grid has fewer than 3 points".into()));
    }
    let h = (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64;
    if !(h > 0.0) || g.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(resolution("probe grid is not uniform and increasing".into()));
    }
    let locate = |x: f64| -> Option<usize> {
        let i = ((x - g[0]) / h).round();
        (i >= 0.0 && (i as usize) < g.len() && (g[i as usize] - x).abs() <= 1e-9 * h).then_some(i as usize)
    };
    let (i0, i1) = match (locate(lo), locate(hi)) {
        (Some(a), Some(b)) if a <= b => (a, b),
        _ => return Err(resolution(format!("interval ({lo}, {hi}) does not start and end on grid points"))),
    };
    if i0 == i1 {
        return Ok(0.0);
    }
    let f = |i: usize| {
        let w = match probe.model {
            Model::Opuc => 1.0,
            Model::Oprl => (g[i] / 2.0).sin().abs(),
        };
        probe.density[i] * w
    };
    let span = i1 - i0;
    let mut estimates = Vec::new();
    let mut stride = 1;
    while 2 * stride <= span {
        if span % (2 * stride) == 0 {
            let mut acc = f(i0) + f(i1);
            let m = span / stride;
            for k in 1..m {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(i0 + k * stride);
            }
            estimates.push(acc * h * stride as f64 / 3.0);
        }
        stride *= 2;
    }
    match estimates.as_slice() {
        [] => Err(resolution(format!("{span} grid intervals cannot carry Simpson's rule"))),
        [only] => Err(Error::Resolution {
            estimate: *only,
            reason: "only one Simpson stride fits the interval".into(),
        }),
        [fine, coarse, ..] => {
            if (fine - coarse).abs() < MASS_TOL {
                Ok(*fine)
            } else {
                Err(Error::Resolution {
                    estimate: *fine,
                    reason: format!("successive refinements differ by {:e}", (fine - coarse).abs()),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converging,
    /// `log r_n -> +infinity` on the grid.
    DivergingPlus,
    /// `log r_n -> -infinity` on the grid.
    DivergingMinus,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub interval: (f64, f64),
    pub grid_points: usize,
    pub checkpoints: Vec<usize>,
    /// For each checkpoint `N`: sup over the grid of `max |log r_m - log r_n|`, `N <= m, n <= N_last`.
    pub sup_tail_osc: Vec<f64>,
    /// Smallest `|log r_N|` over the grid at each checkpoint.
    pub min_abs_log_r: Vec<f64>,
    /// Grid spacing times the largest finite-difference slope of `log r_{N_last}` in `eta`.
    pub lipschitz_margin: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

pub const DEFAULT_OSC_THRESHOLD: f64 = 1e-2;

/// Tail oscillation of `log r_n` on a uniform grid over `interval`.
///
/// `avoid` lists phases (exceptional points) the interval must keep a positive distance from.
/// The verdict is `converging` when the oscillation from the second-to-last checkpoint on is
/// below `threshold`, `diverging` when `log r_N` has one sign on the whole grid and its smallest
/// modulus grows strictly through the checkpoints, and `inconclusive` otherwise.
pub fn convergence_diagnostic(
    coeffs: &Coefficients,
    interval: (f64, f64),
    grid_points: usize,
    checkpoints: &[usize],
    avoid: &[f64],
    threshold: f64,
) -> Result<ConvergenceReport> {
    let (lo, hi) = interval;
    if !(lo < hi) || grid_points < 2 {
        return Err(Error::Parameter(format!("need lo < hi and at least 2 grid points, got ({lo}, {hi}) and {grid_points}")));
    }
    if checkpoints.len() < 2 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("need at least two strictly increasing checkpoints".into()));
    }
    let grid = uniform_grid(lo, hi, grid_points);
    for &a in avoid {
        let d = grid.iter().map(|&e| circular_distance(e, a)).fold(f64::INFINITY, f64::min);
        let inside = (lo..=hi).contains(&a) || (lo..=hi).contains(&(a + 2.0 * PI)) || (lo..=hi).contains(&(a - 2.0 * PI));
        if inside || d < SINGULAR_TOL {
            return Err(Error::Parameter(format!("interval ({lo}, {hi}) meets the excluded phase {a}")));
        }
    }
    let n_last = *checkpoints.last().unwrap();
    let table = coeffs.tabulated(n_last + 1);
    let nc = checkpoints.len();
    let rows = grid
        .par_iter()
        .map(|&eta| {
            let mut hi_v = vec![f64::NEG_INFINITY; nc];
            let mut lo_v = vec![f64::INFINITY; nc];
            let mut at = vec![0.0; nc];
            run_trajectory(&table, eta, n_last, |s| {
                for c in 0..nc {
                    if s.n >= checkpoints[c] {
                        hi_v[c] = hi_v[c].max(s.log_r);
                        lo_v[c] = lo_v[c].min(s.log_r);
                    }
                    if s.n == checkpoints[c] {
                        at[c] = s.log_r;
                    }
                }
            })?;
            let osc: Vec<f64> = hi_v.iter().zip(&lo_v).map(|(h, l)| h - l).collect();
            Ok((osc, at))
        })
        .collect::<Result<Vec<_>>>()?;
    let sup_tail_osc: Vec<f64> = (0..nc).map(|c| rows.iter().map(|r| r.0[c]).fold(0.0, f64::max)).collect();
    let min_abs_log_r: Vec<f64> = (0..nc)
        .map(|c| rows.iter().map(|r| r.1[c].abs()).fold(f64::INFINITY, f64::min))
        .collect();
    let finals: Vec<f64> = rows.iter().map(|r| r.1[nc - 1]).collect();
    // spacing times the largest difference quotient
    let lipschitz_margin = finals.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let one_sign = finals.iter().all(|&v| v > 0.0) || finals.iter().all(|&v| v < 0.0);
    let growing = min_abs_log_r.windows(2).all(|w| w[1] > w[0]);
    let verdict = if sup_tail_osc[nc - 2] < threshold {
        Verdict::Converging
    } else if one_sign && growing {
        if finals[0] > 0.0 {
            Verdict::DivergingPlus
        } else {
            Verdict::DivergingMinus
        }
    } else {
        Verdict::Inconclusive
    };
    Ok(ConvergenceReport {
        interval,
        grid_points,
        checkpoints: checkpoints.to_vec(),
        sup_tail_osc,
        min_abs_log_r,
        lipschitz_margin,
        threshold,
        verdict,
    })
}

/// Smallest `N` accepted by [`resonance_scan`].
pub const MIN_RESONANCE_N: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonancePoint {
    pub eta: f64,
    /// The candidate this point belongs to; equal to `eta` for the candidate itself.
    pub candidate: f64,
    pub offset: f64,
    pub is_candidate: bool,
    /// Least-squares slope of `log r_n` against `log n` over `[N/10, N]`.
    pub slope: f64,
    /// Twice the standard error of the slope.
    pub ci: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub n: usize,
    pub points: Vec<ResonancePoint>,
    /// Points that could not be run, with the reason.
    pub skipped: Vec<(f64, String)>,
}

impl ResonanceReport {
    /// Control slopes for a given candidate.
    pub fn controls(&self, candidate: f64) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| !p.is_candidate && p.candidate == candidate)
            .map(|p| p.slope)
            .collect()
    }
}

/// `(slope, 2 * standard error)` of the least-squares line through `(x, y)`.
fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - my - slope * (x - mx);
            r * r
        })
        .sum();
    let se = (ssr / (m - 2.0) / sxx).sqrt();
    (slope, 2.0 * se)
}

/// Power-law drift of `r_n` at every candidate and at `candidate + offset` for each offset.
pub fn resonance_scan(coeffs: &Coefficients, candidates: &[f64], offsets: &[f64], n: usize) -> Result<ResonanceReport> {
    if n < MIN_RESONANCE_N {
        return Err(Error::Parameter(format!("resonance scans need N >= {MIN_RESONANCE_N}, got {n}")));
    }
    let mut jobs = Vec::new();
    for &c in candidates {
        jobs.push((c, c, 0.0, true));
        for &o in offsets {
            jobs.push((c + o, c, o, false));
        }
    }
    let table = coeffs.tabulated(n + 1);
    let lo = n / 10;
    let results: Vec<std::result::Result<ResonancePoint, (f64, String)>> = jobs
        .par_iter()
        .map(|&(eta, candidate, offset, is_candidate)| {
            let mut xs = Vec::with_capacity(n - lo + 1);
            let mut ys = Vec::with_capacity(n - lo + 1);
            let run = run_trajectory(&table, eta, n, |s| {
                if s.n >= lo.max(1) {
                    xs.push((s.n as f64).ln());
                    ys.push(s.log_r);
                }
            });
            match run {
                Ok(_) => {
                    let (slope, ci) = fit(&xs, &ys);
                    Ok(ResonancePoint {
                        eta,
                        candidate,
                        offset,
                        is_candidate,
                        slope,
                        ci,
                    })
                }
                Err(e) => Err((eta, e.to_string())),
            }
        })
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(s) => skipped.push(s),
        }
    }
    Ok(ResonanceReport { n, points, skipped })
}

pub fn write_density_csv<W: Write>(probe: &MeasureProbe, mut out: W) -> io::Result<()> {
    writeln!(out, "eta,density")?;
    for (e, d) in probe.grid.iter().zip(&probe.density) {
        writeln!(out, "{e},{d}")?;
    }
    Ok(())
}

pub fn write_resonance_csv<W: Write>(report: &ResonanceReport, mut out: W) -> io::Result<()> {
    writeln!(out, "eta,slope,ci,is_candidate")?;
    for p in &report.points {
        writeln!(out, "{},{},{},{}", p.eta, p.slope, p.ci, p.is_candidate)?;
    }
    Ok(())
}
