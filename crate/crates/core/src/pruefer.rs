//! Prüfer variables `(r_n, theta_n)` for OPUC and OPRL.
//!
//! Both models are driven by one step,
//!
//! ```text
//! r_{n+1}/r_n e^{i(theta_{n+1} - theta_n)} = (1 - c a - conj(a) e^{-i[(n+1) eta + 2 theta_n]}) / sqrt(|1 - c a|^2 - |a|^2)
//! ```
//!
//! with `c = 0` and `a` the Verblunsky coefficient for OPUC, and `c = 1` and
//! `a = alpha_n(eta)` built from the Jacobi parameters for OPRL. Radial
//! quantities are kept as `log r`.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequence::CoeffSequence;
use crate::Model;

/// Distance to `2 pi Z` below which a phase counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Largest `n` accepted by [`direct_polynomial_prufer`].
pub const DIRECT_GUARD: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruferState {
    pub n: usize,
    pub log_r: f64,
    /// Continuously unwrapped phase.
    pub theta: f64,
}

impl PruferState {
    /// `r_0 = 1`, `theta_0 = 0`.
    pub fn initial() -> Self {
        Self {
            n: 0,
            log_r: 0.0,
            theta: 0.0,
        }
    }
}

/// Distance from `eta` to the nearest multiple of `2 pi`.
pub fn distance_to_2pi_z(eta: f64) -> f64 {
    let r = eta.rem_euclid(TAU);
    r.min(TAU - r)
}

fn check_singular(eta: f64, context: &str) -> Result<()> {
    if distance_to_2pi_z(eta) <= SINGULAR_TOL || !eta.is_finite() {
        return Err(Error::Singularity {
            phase: eta,
            tol: SINGULAR_TOL,
            context: context.to_string(),
        });
    }
    Ok(())
}

/// `alpha_n(eta) = (a_n^2 - 1 + e^{i eta/2} b_{n+1}) / (e^{i eta} - 1)`.
pub fn alpha_eta(a_n: f64, b_next: f64, eta: f64) -> Result<Complex64> {
    check_singular(eta, "alpha_eta denominator e^{i eta} - 1")?;
    let num = Complex64::new(a_n * a_n - 1.0, 0.0) + Complex64::from_polar(b_next, eta / 2.0);
    Ok(num / (Complex64::from_polar(1.0, eta) - 1.0))
}

/// The three forms of one step: the complex ratio, its modulus computed
/// separately, and the phase ratio `e^{2i(theta_{n+1} - theta_n)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepQuantities {
    pub ratio: Complex64,
    pub modulus: f64,
    pub phase_ratio: Complex64,
    pub radicand: f64,
}

/// Evaluates all step forms at `(alpha, eta, theta, n, c)` without the domain checks.
pub fn step_quantities(alpha: Complex64, eta: f64, theta: f64, n: usize, model: Model) -> StepQuantities {
    let c = model.c() as f64;
    let w = Complex64::from_polar(1.0, (n as f64 + 1.0) * eta + 2.0 * theta);
    let one = Complex64::new(1.0, 0.0);
    let radicand = (one - c * alpha).norm_sqr() - alpha.norm_sqr();
    let numer = one - c * alpha - alpha.conj() * w.conj();
    let other = one - alpha * w - c * alpha.conj();
    StepQuantities {
        ratio: numer / radicand.sqrt(),
        modulus: other.norm() / radicand.sqrt(),
        phase_ratio: numer / other,
        radicand,
    }
}

/// Advances the Prüfer state by one step.
///
/// `theta` moves by `arg(numerator)` taken in `(-pi, pi]`.
pub fn unified_prufer_step(state: &PruferState, alpha: Complex64, eta: f64, model: Model) -> Result<PruferState> {
    let c = model.c() as f64;
    let one = Complex64::new(1.0, 0.0);
    let radicand = (one - c * alpha).norm_sqr() - alpha.norm_sqr();
    if !(radicand > 0.0) {
        return Err(Error::StepDomain {
            n: state.n,
            alpha,
            radicand,
        });
    }
    let w_bar = Complex64::from_polar(1.0, -((state.n as f64 + 1.0) * eta + 2.0 * state.theta));
    let numer = one - c * alpha - alpha.conj() * w_bar;
    let modulus = numer.norm();
    if modulus == 0.0 || !modulus.is_finite() {
        return Err(Error::DegenerateStep { n: state.n, alpha });
    }
    let mut dtheta = numer.arg();
    if dtheta <= -PI {
        dtheta = PI;
    }
    Ok(PruferState {
        n: state.n + 1,
        log_r: state.log_r + modulus.ln() - 0.5 * radicand.ln(),
        theta: state.theta + dtheta,
    })
}

/// Verblunsky coefficients `alpha_n`, `n >= 0`.
#[derive(Debug, Clone)]
pub struct VerblunskyCoeffs {
    seq: CoeffSequence,
}

impl VerblunskyCoeffs {
    pub fn new(seq: CoeffSequence) -> Result<Self> {
        if seq.start() != 0 {
            return Err(Error::Parameter(format!(
                "Verblunsky coefficients start at index 0, got {}",
                seq.start()
            )));
        }
        Ok(Self { seq })
    }

    pub fn free() -> Self {
        Self {
            seq: CoeffSequence::zero(0),
        }
    }

    pub fn at(&self, n: usize) -> Complex64 {
        self.seq.at(n)
    }

    pub fn seq(&self) -> &CoeffSequence {
        &self.seq
    }
}

type RealFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Jacobi parameters `a_n > 0`, `b_n`, `n >= 1`; `a_0` is taken to be 1.
#[derive(Clone)]
pub struct JacobiCoeffs {
    a: RealFn,
    b: RealFn,
}

impl std::fmt::Debug for JacobiCoeffs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobiCoeffs").finish_non_exhaustive()
    }
}

impl JacobiCoeffs {
    pub fn new<A, B>(a: A, b: B) -> Self
    where
        A: Fn(usize) -> f64 + Send + Sync + 'static,
        B: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            a: Arc::new(a),
            b: Arc::new(b),
        }
    }

    /// `a_n = 1`, `b_n = 0`: the free Jacobi matrix.
    pub fn free() -> Self {
        Self::new(|_| 1.0, |_| 0.0)
    }

    /// Builds `a_n = 1 + Re(a_minus_one_n)` and `b_n = Re(b_seq_n)`.
    pub fn from_sequences(a_minus_one: &CoeffSequence, b: &CoeffSequence) -> Self {
        let (am, bs) = (a_minus_one.clone(), b.clone());
        Self::new(move |n| 1.0 + am.at(n).re, move |n| bs.at(n).re)
    }

    /// Discrete Schrödinger operator with potential `b_n = V_n`.
    pub fn schrodinger(v: &CoeffSequence) -> Self {
        Self::from_sequences(&CoeffSequence::zero(0), v)
    }

    pub fn a(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            (self.a)(n)
        }
    }

    pub fn b(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            (self.b)(n)
        }
    }
}

/// Recursion coefficients of either model.
#[derive(Debug, Clone)]
pub enum Coefficients {
    Verblunsky(VerblunskyCoeffs),
    Jacobi(JacobiCoeffs),
}

impl Coefficients {
    pub fn model(&self) -> Model {
        match self {
            Coefficients::Verblunsky(_) => Model::Opuc,
            Coefficients::Jacobi(_) => Model::Oprl,
        }
    }

    pub fn free(model: Model) -> Self {
        match model {
            Model::Opuc => Coefficients::Verblunsky(VerblunskyCoeffs::free()),
            Model::Oprl => Coefficients::Jacobi(JacobiCoeffs::free()),
        }
    }

    /// The step coefficient at index `n`: `alpha_n` or `alpha_n(eta)`.
    pub fn alpha(&self, n: usize, eta: f64) -> Result<Complex64> {
        match self {
            Coefficients::Verblunsky(v) => Ok(v.at(n)),
            Coefficients::Jacobi(j) => {
                let a = j.a(n);
                if !(a > 0.0) {
                    return Err(Error::Parameter(format!("a_{n} = {a} is not positive")));
                }
                alpha_eta(a, j.b(n + 1), eta)
            }
        }
    }

    /// Copies the first `len` coefficients into memory, so that repeated
    /// trajectories do not re-evaluate expensive sequences.
    pub fn tabulated(&self, len: usize) -> Coefficients {
        match self {
            Coefficients::Verblunsky(v) => {
                let vals: Vec<Complex64> = (0..len).map(|n| v.at(n)).collect();
                let tail = v.seq.clone();
                let vals = Arc::new(vals);
                let seq = CoeffSequence::new(0, move |n| match vals.get(n) {
                    Some(x) => *x,
                    None => tail.at(n),
                });
                Coefficients::Verblunsky(VerblunskyCoeffs { seq })
            }
            Coefficients::Jacobi(j) => {
                let a: Arc<Vec<f64>> = Arc::new((0..=len).map(|n| j.a(n)).collect());
                let b: Arc<Vec<f64>> = Arc::new((0..=len + 1).map(|n| j.b(n)).collect());
                let (fa, fb) = (j.a.clone(), j.b.clone());
                Coefficients::Jacobi(JacobiCoeffs::new(
                    move |n| a.get(n).copied().unwrap_or_else(|| fa(n)),
                    move |n| b.get(n).copied().unwrap_or_else(|| fb(n)),
                ))
            }
        }
    }
}

/// Runs the recursion to step `n_max`, handing every state (including the initial one) to `visit`.
pub fn run_trajectory<F>(coeffs: &Coefficients, eta: f64, n_max: usize, mut visit: F) -> Result<PruferState>
where
    F: FnMut(&PruferState),
{
    if coeffs.model() == Model::Oprl {
        check_singular(eta, "OPRL trajectory requires eta outside 2 pi Z")?;
    }
    let model = coeffs.model();
    let mut state = PruferState::initial();
    visit(&state);
    for n in 0..n_max {
        let alpha = coeffs.alpha(n, eta)?;
        state = unified_prufer_step(&state, alpha, eta, model)?;
        visit(&state);
    }
    Ok(state)
}

/// States for `n = 0..=n_max`.
pub fn prufer_trajectory(coeffs: &Coefficients, eta: f64, n_max: usize) -> Result<Vec<PruferState>> {
    let mut out = Vec::with_capacity(n_max + 1);
    run_trajectory(coeffs, eta, n_max, |s| out.push(*s))?;
    Ok(out)
}

/// Writes `n,log_r,theta` rows for every `stride`-th state and the last one.
pub fn write_trajectory_csv<W: Write>(states: &[PruferState], stride: usize, mut out: W) -> io::Result<()> {
    let stride = stride.max(1);
    writeln!(out, "n,log_r,theta")?;
    for (i, s) in states.iter().enumerate() {
        if s.n % stride == 0 || i + 1 == states.len() {
            writeln!(out, "{},{},{}", s.n, s.log_r, s.theta)?;
        }
    }
    Ok(())
}

/// Values extracted from the orthogonal polynomials themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectPrufer {
    pub log_r: f64,
    /// `theta_n` reduced to `[0, 2 pi)`.
    pub theta_mod: f64,
    pub detail: DirectDetail,
}

/// Renormalized polynomial values; true values are these times `e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectDetail {
    Opuc {
        phi: Complex64,
        phi_star: Complex64,
        log_scale: f64,
    },
    Oprl {
        a_n: f64,
        p_n: f64,
        p_prev: f64,
        x: f64,
        log_scale: f64,
    },
}

impl DirectPrufer {
    /// `|r_n^2 - (a^2 p_n^2 - a x p_n p_{n-1} + p_{n-1}^2)|` relative to `a^2 p_n^2 + p_{n-1}^2`.
    pub fn quadratic_form_residual(&self) -> Option<f64> {
        match self.detail {
            DirectDetail::Oprl {
                a_n,
                p_n,
                p_prev,
                x,
                log_scale,
            } => {
                let r2 = (2.0 * (self.log_r - log_scale)).exp();
                let q = a_n * a_n * p_n * p_n - a_n * x * p_n * p_prev + p_prev * p_prev;
                let s = a_n * a_n * p_n * p_n + p_prev * p_prev;
                Some((r2 - q).abs() / s)
            }
            DirectDetail::Opuc { .. } => None,
        }
    }

    /// `log(a_n^2 p_n^2 + p_{n-1}^2)` for OPRL.
    pub fn log_bs_denominator(&self) -> Option<f64> {
        match self.detail {
            DirectDetail::Oprl {
                a_n,
                p_n,
                p_prev,
                log_scale,
                ..
            } => Some((a_n * a_n * p_n * p_n + p_prev * p_prev).ln() + 2.0 * log_scale),
            DirectDetail::Opuc { .. } => None,
        }
    }
}

/// Computes `r_n`, `theta_n` from `phi_n(e^{i eta})` or from `p_n(2 cos(eta/2))`.
pub fn direct_polynomial_prufer(coeffs: &Coefficients, eta: f64, n: usize) -> Result<DirectPrufer> {
    if n > DIRECT_GUARD {
        return Err(Error::Range {
            n,
            guard: DIRECT_GUARD,
        });
    }
    match coeffs {
        Coefficients::Verblunsky(v) => {
            let z = Complex64::from_polar(1.0, eta);
            let (mut phi, mut phi_star) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
            let mut log_scale = 0.0;
            for k in 0..n {
                let a = v.at(k);
                let rho2 = 1.0 - a.norm_sqr();
                if !(rho2 > 0.0) {
                    return Err(Error::StepDomain {
                        n: k,
                        alpha: a,
                        radicand: rho2,
                    });
                }
                let rho = rho2.sqrt();
                let next = (z * phi - a.conj() * phi_star) / rho;
                let next_star = (phi_star - a * z * phi) / rho;
                let m = next.norm().max(next_star.norm());
                phi = next / m;
                phi_star = next_star / m;
                log_scale += m.ln();
            }
            let theta = (phi.arg() - (n as f64) * eta).rem_euclid(TAU);
            Ok(DirectPrufer {
                log_r: phi.norm().ln() + log_scale,
                theta_mod: if theta >= TAU { 0.0 } else { theta },
                detail: DirectDetail::Opuc {
                    phi,
                    phi_star,
                    log_scale,
                },
            })
        }
        Coefficients::Jacobi(j) => {
            check_singular(eta, "OPRL direct polynomials require eta outside 2 pi Z")?;
            let x = 2.0 * (eta / 2.0).cos();
            let (mut p, mut p_prev) = (1.0f64, 0.0f64);
            let mut log_scale = 0.0;
            for k in 0..n {
                let a_next = j.a(k + 1);
                if !(a_next > 0.0) {
                    return Err(Error::Parameter(format!("a_{} = {a_next} is not positive", k + 1)));
                }
                let next = ((x - j.b(k + 1)) * p - j.a(k) * p_prev) / a_next;
                let m = next.abs().max(p.abs());
                p_prev = p / m;
                p = next / m;
                log_scale += m.ln();
            }
            let a_n = j.a(n);
            let zval = Complex64::new(a_n * p, 0.0) - Complex64::from_polar(p_prev, -eta / 2.0);
            let theta = (zval.arg() - (n as f64) * eta / 2.0).rem_euclid(TAU);
            Ok(DirectPrufer {
                log_r: zval.norm().ln() + log_scale,
                theta_mod: if theta >= TAU { 0.0 } else { theta },
                detail: DirectDetail::Oprl {
                    a_n,
                    p_n: p,
                    p_prev,
                    x,
                    log_scale,
                },
            })
        }
    }
}

/// `log(a_n^2 p_n^2 + p_{n-1}^2)` recovered from an OPRL Prüfer state.
///
/// With `z = r_n e^{i[n eta/2 + theta_n]} = a_n p_n - p_{n-1} e^{-i eta/2}` the
/// imaginary part gives `p_{n-1}` and the real part then gives `a_n p_n`.
pub fn log_bs_denominator_from_state(state: &PruferState, eta: f64) -> Result<f64> {
    check_singular(eta, "OPRL density requires eta outside 2 pi Z")?;
    let u = Complex64::from_polar(1.0, state.n as f64 * eta / 2.0 + state.theta);
    let (s, c) = (eta / 2.0).sin_cos();
    let p_prev = u.im / s;
    let ap = u.re + p_prev * c;
    Ok(2.0 * state.log_r + (ap * ap + p_prev * p_prev).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn alpha_eta_examples() {
        assert_eq!(alpha_eta(1.0, 0.0, 1.3).unwrap(), c(0.0, 0.0));
        let v = alpha_eta(1.0, 1.0, PI).unwrap();
        assert_abs_diff_eq!((v - c(0.0, -0.5)).norm(), 0.0, epsilon = 1e-15);
        let v = alpha_eta(2f64.sqrt(), 0.0, PI).unwrap();
        assert_abs_diff_eq!((v - c(-0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert!(matches!(alpha_eta(1.0, 0.0, TAU), Err(Error::Singularity { .. })));
        assert!(matches!(alpha_eta(1.0, 0.0, 1e-13), Err(Error::Singularity { .. })));
    }

    #[test]
    fn free_step_is_identity() {
        let s = PruferState {
            n: 7,
            log_r: 0.3,
            theta: -1.1,
        };
        for model in [Model::Opuc, Model::Oprl] {
            let t = unified_prufer_step(&s, c(0.0, 0.0), 2.2, model).unwrap();
            assert_eq!((t.n, t.log_r, t.theta), (8, 0.3, -1.1));
        }
    }

    #[test]
    fn half_alpha_on_resonance() {
        // choose eta, theta with (n+1) eta + 2 theta = 0
        let s = PruferState {
            n: 0,
            log_r: 0.0,
            theta: -0.35,
        };
        let t = unified_prufer_step(&s, c(0.5, 0.0), 0.7, Model::Opuc).unwrap();
        assert_abs_diff_eq!(t.log_r, -(3f64.sqrt()).ln(), epsilon = 1e-15);
    }

    #[test]
    fn step_domain_errors() {
        let s = PruferState::initial();
        let err = unified_prufer_step(&s, c(1.0, 0.0), 0.5, Model::Opuc).unwrap_err();
        assert!(matches!(err, Error::StepDomain { n: 0, .. }));
        let err = unified_prufer_step(&s, c(0.5, 0.0), 0.5, Model::Oprl).unwrap_err();
        assert!(matches!(err, Error::StepDomain { .. }));
        assert!(unified_prufer_step(&s, c(0.25, 0.0), 0.0, Model::Oprl).is_ok());
    }

    #[test]
    fn vanishing_numerator_sits_on_the_domain_boundary() {
        // 1 - a - conj(a) w_bar = 0 forces |1 - a| = |a|, i.e. Re a = 1/2
        let alpha = c(0.5, 0.3);
        let target = (c(1.0, 0.0) - alpha) / alpha.conj();
        // need w_bar = target, w = e^{i[(n+1) eta + 2 theta]}
        let eta = 0.4;
        let theta = (-target.arg() - eta) / 2.0;
        let s = PruferState {
            n: 0,
            log_r: 0.0,
            theta,
        };
        // the radicand is 1 - 2 Re a = 0 here, so the domain error fires first
        assert!(matches!(
            unified_prufer_step(&s, alpha, eta, Model::Oprl),
            Err(Error::StepDomain { .. })
        ));
    }

    #[test]
    fn opuc_single_coefficient_step() {
        let seq = CoeffSequence::from_values(0, vec![c(0.5, 0.0)]);
        let coeffs = Coefficients::Verblunsky(VerblunskyCoeffs::new(seq).unwrap());
        let eta = 0.9;
        let traj = prufer_trajectory(&coeffs, eta, 3).unwrap();
        let want = (c(1.0, 0.0) - Complex64::from_polar(0.5, -eta)).norm() / (0.75f64).sqrt();
        assert_abs_diff_eq!(traj[1].log_r, want.ln(), epsilon = 1e-15);
        assert_eq!(traj[2].log_r, traj[1].log_r);
    }

    #[test]
    fn free_trajectories_stay_flat() {
        for model in [Model::Opuc, Model::Oprl] {
            let coeffs = Coefficients::free(model);
            let traj = prufer_trajectory(&coeffs, 1.7, 10_000).unwrap();
            assert!(traj.iter().all(|s| s.log_r.abs() < 1e-12), "{model}");
        }
    }

    #[test]
    fn free_oprl_matches_chebyshev() {
        let coeffs = Coefficients::free(Model::Oprl);
        let d = direct_polynomial_prufer(&coeffs, PI, 2).unwrap();
        assert_abs_diff_eq!(d.log_r, 0.0, epsilon = 1e-15);
        match d.detail {
            DirectDetail::Oprl { p_n, p_prev, log_scale, .. } => {
                assert_abs_diff_eq!(p_n * log_scale.exp(), -1.0, epsilon = 1e-15);
                assert_abs_diff_eq!(p_prev, 0.0, epsilon = 1e-15);
            }
            _ => unreachable!(),
        }
        for n in 0..=100 {
            let d = direct_polynomial_prufer(&coeffs, 2.1, n).unwrap();
            assert_abs_diff_eq!(d.log_r, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn direct_guard() {
        let coeffs = Coefficients::free(Model::Opuc);
        assert_eq!(
            direct_polynomial_prufer(&coeffs, 1.0, 1001).unwrap_err(),
            Error::Range { n: 1001, guard: 1000 }
        );
        assert_abs_diff_eq!(direct_polynomial_prufer(&coeffs, 1.0, 1000).unwrap().log_r, 0.0, epsilon = 1e-12);
    }

    fn random_verblunsky(rng: &mut ChaCha8Rng) -> Coefficients {
        let vals: Vec<Complex64> = (0..200)
            .map(|n| Complex64::from_polar(rng.random_range(0.0..0.8) / (n as f64 + 1.0).sqrt(), rng.random_range(0.0..TAU)))
            .collect();
        Coefficients::Verblunsky(VerblunskyCoeffs::new(CoeffSequence::from_values(0, vals)).unwrap())
    }

    fn random_jacobi(rng: &mut ChaCha8Rng) -> Coefficients {
        let a: Vec<f64> = (0..205).map(|n| 1.0 + rng.random_range(-0.4..0.4) / (n as f64 + 1.0).sqrt()).collect();
        let b: Vec<f64> = (0..205).map(|n| rng.random_range(-0.6..0.6) / (n as f64 + 1.0).sqrt()).collect();
        Coefficients::Jacobi(JacobiCoeffs::new(move |n| a[n], move |n| b[n]))
    }

    #[test]
    fn recursion_matches_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            for coeffs in [random_verblunsky(&mut rng), random_jacobi(&mut rng)] {
                let eta = rng.random_range(0.3..TAU - 0.3);
                let traj = prufer_trajectory(&coeffs, eta, 150).unwrap();
                for n in [1usize, 10, 75, 150] {
                    let d = direct_polynomial_prufer(&coeffs, eta, n).unwrap();
                    let s = traj[n];
                    assert!((s.log_r - d.log_r).abs() <= 1e-8 * s.log_r.abs().max(1.0));
                    assert!(crate::phase_sets::circular_distance(s.theta, d.theta_mod) < 1e-8);
                    if let Some(res) = d.quadratic_form_residual() {
                        assert!(res < 1e-10);
                    }
                    if let Some(lb) = d.log_bs_denominator() {
                        let from_state = log_bs_denominator_from_state(&s, eta).unwrap();
                        assert!((lb - from_state).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn oprl_alpha_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = rng.random_range(0.2..2.0);
            let b = rng.random_range(-2.0..2.0);
            let eta = rng.random_range(0.01..TAU - 0.01);
            let al = alpha_eta(a, b, eta).unwrap();
            assert!((2.0 * al.re - (1.0 - a * a)).abs() < 1e-12 * (1.0 + a * a).max(al.norm()));
            let rot = al * Complex64::from_polar(1.0, eta / 2.0);
            assert!((2.0 * rot.re - b).abs() < 1e-12 * (1.0 + b.abs()).max(al.norm()));
        }
    }

    #[test]
    fn csv_format() {
        let coeffs = Coefficients::free(Model::Opuc);
        let traj = prufer_trajectory(&coeffs, 1.0, 5).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,log_r,theta");
        assert_eq!(lines.iter().skip(1).map(|l| l.split(',').next().unwrap()).collect::<Vec<_>>(), ["0", "2", "4", "5"]);
    }

    proptest! {
        #[test]
        fn step_forms_agree(
            r in 0.0f64..0.95, arg in 0.0f64..TAU, eta in 0.01f64..6.27,
            theta in -50.0f64..50.0, n in 0usize..100_000, oprl in any::<bool>(),
        ) {
            let model = if oprl { Model::Oprl } else { Model::Opuc };
            let alpha = Complex64::from_polar(if oprl { r * 0.5 } else { r }, arg);
            let q = step_quantities(alpha, eta, theta, n, model);
            prop_assume!(q.radicand > 1e-6);
            prop_assert!((q.ratio.norm() - q.modulus).abs() <= 1e-12 * q.modulus.max(1.0));
            prop_assert!((q.phase_ratio.norm() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn opuc_step_is_szego_ratio(r in 0.0f64..0.95, arg in 0.0f64..TAU, eta in 0.0f64..TAU, theta in -10.0f64..10.0, n in 0usize..1000) {
            let alpha = Complex64::from_polar(r, arg);
            let s = PruferState { n, log_r: 0.0, theta };
            let t = unified_prufer_step(&s, alpha, eta, Model::Opuc).unwrap();
            let w_bar = Complex64::from_polar(1.0, -((n as f64 + 1.0) * eta + 2.0 * theta));
            let direct = (Complex64::new(1.0, 0.0) - alpha.conj() * w_bar) / (1.0 - r * r).sqrt();
            let got = Complex64::from_polar(t.log_r.exp(), t.theta - theta);
            prop_assert!((got - direct).norm() <= 1e-12 * direct.norm().max(1.0));
            prop_assert!((t.theta - theta).abs() <= PI);
        }
    }
}
