//! Coefficient sequences of rotated and generalized bounded variation.
//!
//! A sequence is a deterministic evaluator `n -> beta_n` defined for
//! `n >= start`. Infinite objects are probed over finite windows; families
//! built by the constructors here also carry an analytic bound on the tail of
//! their rotated variation, which is what makes a component *certified*.

mod algebra;
mod extract;
mod shift;
mod spec;

pub use algebra::{gbv_algebra_check, AlgebraCheck, AlgebraReport, ComponentCheck};
pub use extract::{extract_component, extract_component_with_tol, Extraction, ResidualReport};
pub use shift::{apply_shift_poly, bezout_coprime, BezoutPair, ShiftPolynomial, DEFAULT_COPRIME_TOL};
pub use spec::{L1Tail, PowerTerm, SequenceSpec, WvnTerm};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cutoff for windowed certification of rotated variation.
pub const DEFAULT_CERT_WINDOW: usize = 1_000_000;

pub type Evaluator = Arc<dyn Fn(usize) -> Complex64 + Send + Sync>;

/// Bound on the remaining rotated variation `sum_{n >= m} |e^{i phi} b_{n+1} - b_n|`.
pub type TailBound = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// A complex sequence `{beta_n}_{n >= start}` given by an evaluator.
#[derive(Clone)]
pub struct CoeffSequence {
    start: usize,
    eval: Evaluator,
    bound: Option<f64>,
}

impl fmt::Debug for CoeffSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoeffSequence")
            .field("start", &self.start)
            .field("bound", &self.bound)
            .finish_non_exhaustive()
    }
}

impl CoeffSequence {
    pub fn new<F>(start: usize, eval: F) -> Self
    where
        F: Fn(usize) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            start,
            eval: Arc::new(eval),
            bound: None,
        }
    }

    /// Declares `|beta_n| <= bound` for all n.
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn zero(start: usize) -> Self {
        Self::new(start, |_| Complex64::new(0.0, 0.0)).with_bound(0.0)
    }

    pub fn constant(start: usize, value: Complex64) -> Self {
        Self::new(start, move |_| value).with_bound(value.norm())
    }

    /// Finitely supported sequence: `values[k]` sits at index `start + k`, zero afterwards.
    pub fn from_values(start: usize, values: Vec<Complex64>) -> Self {
        let bound = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let values = Arc::new(values);
        Self::new(start, move |n| {
            values
                .get(n - start)
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0))
        })
        .with_bound(bound)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    /// Checked evaluation.
    pub fn get(&self, n: usize) -> Result<Complex64> {
        if n < self.start {
            return Err(Error::Domain {
                index: n,
                min: self.start,
            });
        }
        Ok((self.eval)(n))
    }

    /// Evaluation with zero extension below the start index.
    #[inline]
    pub fn at(&self, n: usize) -> Complex64 {
        if n < self.start {
            Complex64::new(0.0, 0.0)
        } else {
            (self.eval)(n)
        }
    }

    pub fn window(&self, from: usize, to: usize) -> Vec<Complex64> {
        (from..to).map(|n| self.at(n)).collect()
    }

    /// `(sum_{n=from}^{to-1} |beta_n|^p)^{1/p}`; `p = inf` gives the sup norm.
    pub fn lp_norm(&self, from: usize, to: usize, p: f64) -> f64 {
        if p.is_infinite() {
            return (from..to).map(|n| self.at(n).norm()).fold(0.0, f64::max);
        }
        (from..to)
            .map(|n| self.at(n).norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Verifies the declared bound on `[from, to)`. Sequences without a bound pass.
    pub fn respects_bound(&self, from: usize, to: usize) -> bool {
        match self.bound {
            None => true,
            Some(m) => (from.max(self.start)..to).all(|n| self.at(n).norm() <= m * (1.0 + 1e-12)),
        }
    }

    pub fn add(&self, other: &CoeffSequence) -> CoeffSequence {
        let (a, b) = (self.clone(), other.clone());
        let mut out = CoeffSequence::new(self.start.min(other.start), move |n| a.at(n) + b.at(n));
        if let (Some(x), Some(y)) = (self.bound, other.bound) {
            out.bound = Some(x + y);
        }
        out
    }

    pub fn sub(&self, other: &CoeffSequence) -> CoeffSequence {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &CoeffSequence) -> CoeffSequence {
        let (a, b) = (self.clone(), other.clone());
        let mut out = CoeffSequence::new(self.start.max(other.start), move |n| a.at(n) * b.at(n));
        if let (Some(x), Some(y)) = (self.bound, other.bound) {
            out.bound = Some(x * y);
        }
        out
    }

    pub fn scale(&self, z: Complex64) -> CoeffSequence {
        let a = self.clone();
        let mut out = CoeffSequence::new(self.start, move |n| z * a.at(n));
        out.bound = self.bound.map(|m| m * z.norm());
        out
    }

    pub fn conj(&self) -> CoeffSequence {
        let a = self.clone();
        let mut out = CoeffSequence::new(self.start, move |n| a.at(n).conj());
        out.bound = self.bound;
        out
    }

    /// Sum of many sequences, evaluated term by term.
    pub fn sum_of(seqs: &[CoeffSequence]) -> CoeffSequence {
        let start = seqs.iter().map(|s| s.start).min().unwrap_or(0);
        let bound = seqs
            .iter()
            .map(|s| s.bound)
            .try_fold(0.0, |acc, b| b.map(|b| acc + b));
        let seqs = seqs.to_vec();
        let mut out = CoeffSequence::new(start, move |n| seqs.iter().map(|s| s.at(n)).sum());
        out.bound = bound;
        out
    }
}

/// A sequence paired with the phase in which it has rotated bounded variation.
#[derive(Clone)]
pub struct RotatedBVComponent {
    pub seq: CoeffSequence,
    pub phase: f64,
    budget: Option<f64>,
    tail: Option<TailBound>,
}

impl fmt::Debug for RotatedBVComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RotatedBVComponent")
            .field("seq", &self.seq)
            .field("phase", &self.phase)
            .field("budget", &self.budget)
            .field("has_tail", &self.tail.is_some())
            .finish()
    }
}

/// Outcome of checking a component's rotated variation against its budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub window_end: usize,
    pub measured: f64,
    pub tail_bound: Option<f64>,
    pub budget: Option<f64>,
    pub max_modulus: f64,
    /// `max |beta_n| <= |beta_N| + budget` (triangle inequality bound).
    pub bounded: bool,
    pub certified: bool,
}

impl RotatedBVComponent {
    /// Uncertified component: a phase without a declared budget.
    pub fn new(seq: CoeffSequence, phase: f64) -> Self {
        Self {
            seq,
            phase,
            budget: None,
            tail: None,
        }
    }

    /// Component with a total variation budget and an analytic tail bound.
    pub fn certified(seq: CoeffSequence, phase: f64, budget: f64, tail: TailBound) -> Self {
        Self {
            seq,
            phase,
            budget: Some(budget),
            tail: Some(tail),
        }
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    pub fn tail_bound(&self, m: usize) -> Option<f64> {
        self.tail.as_ref().map(|t| t(m))
    }

    /// `sup_n |beta_n| <= |beta_N| + budget`.
    pub fn sup_bound(&self) -> Option<f64> {
        let first = self.seq.at(self.seq.start()).norm();
        match (self.budget, self.seq.bound()) {
            (Some(b), Some(m)) => Some(m.min(first + b)),
            (Some(b), None) => Some(first + b),
            (None, m) => m,
        }
    }

    pub fn rotated_variation(&self, from: usize, to: usize) -> Result<f64> {
        rotated_variation(self, from, to)
    }

    /// Checks measured variation on `[start, window_end)` plus the analytic
    /// tail against the declared budget.
    pub fn certify(&self, window_end: usize) -> Result<Certificate> {
        let start = self.seq.start();
        let window_end = window_end.max(start);
        let rot = Complex64::from_polar(1.0, self.phase);
        let mut measured = 0.0;
        let mut max_modulus: f64 = 0.0;
        let mut prev = self.seq.at(start);
        for n in start..window_end {
            let next = self.seq.at(n + 1);
            measured += (rot * next - prev).norm();
            max_modulus = max_modulus.max(prev.norm());
            prev = next;
        }
        max_modulus = max_modulus.max(prev.norm());
        let tail_bound = self.tail_bound(window_end);
        let first = self.seq.at(start).norm();
        let slack = 1e-12;
        let bounded = match self.budget {
            Some(b) => max_modulus <= (first + b) * (1.0 + slack) + slack,
            None => max_modulus <= first + measured + slack,
        };
        let certified = match (self.budget, tail_bound) {
            (Some(b), Some(t)) => {
                // each step rounds the angle n*phase, whose ulp grows with n
                let steps = (window_end - start + 1) as f64;
                let angle = 1.0 + window_end as f64 * self.phase.abs();
                let slack = 1e-10 * b + 4.0 * f64::EPSILON * steps * angle * max_modulus.max(1.0);
                measured + t <= b + slack && bounded
            }
            _ => false,
        };
        Ok(Certificate {
            window_end,
            measured,
            tail_bound,
            budget: self.budget,
            max_modulus,
            bounded,
            certified,
        })
    }

    pub fn scaled(&self, z: Complex64) -> RotatedBVComponent {
        let k = z.norm();
        RotatedBVComponent {
            seq: self.seq.scale(z),
            phase: self.phase,
            budget: self.budget.map(|b| b * k),
            tail: self.tail.clone().map(|t| -> TailBound { Arc::new(move |m| k * t(m)) }),
        }
    }

    /// Complex conjugate; rotated variation is preserved with phase `-phi`.
    pub fn conj(&self) -> RotatedBVComponent {
        RotatedBVComponent {
            seq: self.seq.conj(),
            phase: -self.phase,
            budget: self.budget,
            tail: self.tail.clone(),
        }
    }

    /// Pointwise product, with phase `phi + psi`.
    ///
    /// The budget and tail follow from
    /// `|e^{i(phi+psi)} b_{n+1} g_{n+1} - b_n g_n| <= |g_{n+1}| var_b(n) + |b_n| var_g(n)`.
    pub fn product(&self, other: &RotatedBVComponent) -> RotatedBVComponent {
        let seq = self.seq.mul(&other.seq);
        let phase = self.phase + other.phase;
        match (
            self.budget,
            other.budget,
            self.sup_bound(),
            other.sup_bound(),
            self.tail.clone(),
            other.tail.clone(),
        ) {
            (Some(vb), Some(vg), Some(mb), Some(mg), Some(tb), Some(tg)) => {
                let budget = mg * vb + mb * vg;
                let tail: TailBound = Arc::new(move |m| mg * tb(m) + mb * tg(m));
                let seq = seq.with_bound(mb * mg);
                RotatedBVComponent::certified(seq, phase, budget, tail)
            }
            _ => RotatedBVComponent::new(seq, phase),
        }
    }
}

/// `sum_{n=from}^{to-1} |e^{i phi} beta_{n+1} - beta_n|`.
pub fn rotated_variation(comp: &RotatedBVComponent, from: usize, to: usize) -> Result<f64> {
    let start = comp.seq.start();
    if from < start {
        return Err(Error::Domain {
            index: from,
            min: start,
        });
    }
    if to < from {
        return Err(Error::Domain {
            index: to,
            min: from,
        });
    }
    let rot = Complex64::from_polar(1.0, comp.phase);
    let mut acc = 0.0;
    let mut prev = comp.seq.at(from);
    for n in from..to {
        let next = comp.seq.at(n + 1);
        acc += (rot * next - prev).norm();
        prev = next;
    }
    Ok(acc)
}

/// A finite sum of rotated-BV components representing one sequence.
#[derive(Debug, Clone, Default)]
pub struct GBVDecomposition {
    pub components: Vec<RotatedBVComponent>,
}

impl GBVDecomposition {
    pub fn new(components: Vec<RotatedBVComponent>) -> Self {
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.phase).collect()
    }

    /// `alpha_n = sum_l beta^{(l)}_n`.
    pub fn represented(&self) -> CoeffSequence {
        let seqs: Vec<_> = self.components.iter().map(|c| c.seq.clone()).collect();
        CoeffSequence::sum_of(&seqs)
    }

    /// Largest pointwise gap between the represented sum and `target` on `[from, to)`.
    pub fn reconstruction_error(&self, target: &CoeffSequence, from: usize, to: usize) -> f64 {
        let rep = self.represented();
        (from..to)
            .map(|n| (rep.at(n) - target.at(n)).norm())
            .fold(0.0, f64::max)
    }

    pub fn conj(&self) -> GBVDecomposition {
        GBVDecomposition::new(self.components.iter().map(|c| c.conj()).collect())
    }

    pub fn union(&self, other: &GBVDecomposition) -> GBVDecomposition {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        GBVDecomposition::new(components)
    }
}

/// `beta_n = z e^{-i n phi} (n + shift)^{-exponent}` for `n >= n0`, zero below;
/// the sequence starts at index 0.
///
/// The modulus is monotone, so the rotated variation telescopes: the budget is
/// `2 |z| (n0 + shift)^{-exponent}` and the tail from `m >= n0` is `|z| (m + shift)^{-exponent}`.
pub fn rotated_power(
    z: Complex64,
    phase: f64,
    exponent: f64,
    n0: usize,
    shift: usize,
) -> Result<RotatedBVComponent> {
    if exponent <= 0.0 || !exponent.is_finite() {
        return Err(Error::Parameter(format!(
            "decay exponent must be positive, got {exponent}"
        )));
    }
    if n0 + shift == 0 {
        return Err(Error::Parameter("n0 + shift must be at least 1".into()));
    }
    let modulus = move |n: usize| (n as f64 + shift as f64).powf(-exponent);
    let seq = CoeffSequence::new(0, move |n| {
        if n < n0 {
            Complex64::new(0.0, 0.0)
        } else {
            z * Complex64::from_polar(modulus(n), -(n as f64) * phase)
        }
    })
    .with_bound(z.norm() * modulus(n0));
    let head = z.norm() * modulus(n0);
    let zn = z.norm();
    let tail: TailBound = Arc::new(move |m| {
        if m < n0 {
            2.0 * head
        } else {
            zn * modulus(m)
        }
    });
    Ok(RotatedBVComponent::certified(seq, phase, 2.0 * head, tail))
}

/// `beta_n = z e^{-i n phi} n^{-1/(p-1)}` for `n >= n0`, zero below; lies in `l^p`.
pub fn power_law_rotated(z: Complex64, phase: f64, p: u32, n0: usize) -> Result<RotatedBVComponent> {
    if p < 2 {
        return Err(Error::Parameter(format!("p must be >= 2, got {p}")));
    }
    if n0 < 1 {
        return Err(Error::Parameter("n0 must be >= 1".into()));
    }
    rotated_power(z, phase, 1.0 / (p as f64 - 1.0), n0, 0)
}

/// `beta_n = e^{-i n phi} / (n + 2)^{1/2}` for `n >= 0`; every term has modulus below 1,
/// so it is an admissible Verblunsky sequence outside `l^2`.
pub fn harmonic_counterexample(phase: f64) -> RotatedBVComponent {
    rotated_power(Complex64::new(1.0, 0.0), phase, 0.5, 0, 2).expect("valid parameters")
}

/// Wigner–von Neumann type potential
/// `V_n = sum_k lambda_k cos(n phi_k + alpha_k) / n^{gamma_k} + W_n` for `n >= n0`.
///
/// Returns the directly evaluated sequence together with its decomposition:
/// each cosine splits into `lambda/2 e^{-i(n phi + alpha)} n^{-gamma}` (phase `phi`)
/// plus its conjugate (phase `-phi`); the tail is one phase-0 component.
pub fn wigner_von_neumann(
    terms: &[WvnTerm],
    tail: Option<&L1Tail>,
    n0: usize,
) -> Result<(CoeffSequence, GBVDecomposition)> {
    if n0 < 1 {
        return Err(Error::Parameter("n0 must be >= 1".into()));
    }
    for t in terms {
        if !(t.gamma > 0.0) {
            return Err(Error::Parameter(format!(
                "gamma must be positive, got {}",
                t.gamma
            )));
        }
    }
    let mut components = Vec::with_capacity(2 * terms.len() + 1);
    for t in terms {
        let z = Complex64::from_polar(0.5 * t.lambda, -t.alpha);
        let c = rotated_power(z, t.phi, t.gamma, n0, 0)?;
        components.push(c.clone());
        components.push(c.conj());
    }
    let tail_component = match tail {
        Some(w) => Some(w.component(n0)?),
        None => None,
    };
    if let Some(c) = &tail_component {
        components.push(c.clone());
    }

    let owned: Vec<WvnTerm> = terms.to_vec();
    let tail_seq = tail_component.map(|c| c.seq);
    let bound: f64 = terms
        .iter()
        .map(|t| t.lambda.abs() * (n0 as f64).powf(-t.gamma))
        .sum::<f64>()
        + tail_seq.as_ref().and_then(|s| s.bound()).unwrap_or(0.0);
    let seq = CoeffSequence::new(0, move |n| {
        if n < n0 {
            return Complex64::new(0.0, 0.0);
        }
        let x = n as f64;
        let v: f64 = owned
            .iter()
            .map(|t| t.lambda * (x * t.phi + t.alpha).cos() / x.powf(t.gamma))
            .sum();
        let w = tail_seq.as_ref().map(|s| s.at(n)).unwrap_or_default();
        Complex64::new(v, 0.0) + w
    })
    .with_bound(bound);
    Ok((seq, GBVDecomposition::new(components)))
}
