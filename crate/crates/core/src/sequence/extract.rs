//! Isolating one rotated component of a GBV sequence, modulo summable errors.

use num_complex::Complex64;

use super::shift::{bezout_coprime, BezoutPair, ShiftPolynomial, DEFAULT_COPRIME_TOL};
use super::CoeffSequence;
use crate::error::{Error, Result};

/// Result of filtering out all but one phase.
#[derive(Debug, Clone)]
pub struct Extraction {
    /// `Q(T) alpha` with `Q = prod_{l != target} (e^{i phi_l} T - 1)`.
    pub filtered: CoeffSequence,
    /// `U(T) Q(T) alpha`, which agrees with the target component up to an `l^1` sequence.
    pub reconstructed: CoeffSequence,
    pub bezout: BezoutPair,
    pub window: (usize, usize),
    pub p: f64,
    /// Partial `l^p` norm of the reconstruction over the window.
    pub norm_estimate: f64,
}

/// Pointwise comparison of a reconstruction with a known component.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub l1: f64,
    pub linf: f64,
    /// `||rec - truth||_2 / ||truth||_2` over the window.
    pub l2_relative: f64,
    pub truth_norm: f64,
    /// `| ||rec||_p - ||truth||_p | / ||truth||_p`.
    pub norm_relative_error: f64,
}

impl Extraction {
    pub fn compare(&self, truth: &CoeffSequence) -> ResidualReport {
        let (from, to) = self.window;
        let (mut l1, mut linf, mut d2, mut t2) = (0.0, 0.0f64, 0.0, 0.0);
        for n in from..to {
            let t = truth.at(n);
            let d = (self.reconstructed.at(n) - t).norm();
            l1 += d;
            linf = linf.max(d);
            d2 += d * d;
            t2 += t.norm_sqr();
        }
        let truth_norm = truth.lp_norm(from, to, self.p);
        ResidualReport {
            l1,
            linf,
            l2_relative: if t2 > 0.0 { (d2 / t2).sqrt() } else { d2.sqrt() },
            truth_norm,
            norm_relative_error: if truth_norm > 0.0 {
                (self.norm_estimate - truth_norm).abs() / truth_norm
            } else {
                self.norm_estimate
            },
        }
    }
}

/// Applies the filter and Bézout reconstruction for `phases[target]`.
pub fn extract_component(
    alpha: &CoeffSequence,
    phases: &[f64],
    target: usize,
    window: (usize, usize),
    p: f64,
) -> Result<Extraction> {
    extract_component_with_tol(alpha, phases, target, window, p, DEFAULT_COPRIME_TOL)
}

pub fn extract_component_with_tol(
    alpha: &CoeffSequence,
    phases: &[f64],
    target: usize,
    window: (usize, usize),
    p: f64,
    tol: f64,
) -> Result<Extraction> {
    if target >= phases.len() {
        return Err(Error::Parameter(format!(
            "target {target} out of range for {} phases",
            phases.len()
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("p must be >= 1, got {p}")));
    }
    if window.1 < window.0 || window.0 < alpha.start() {
        return Err(Error::Domain {
            index: window.0.min(window.1),
            min: alpha.start(),
        });
    }
    for (i, a) in phases.iter().enumerate() {
        for b in &phases[i + 1..] {
            let sep = (Complex64::from_polar(1.0, *a) - Complex64::from_polar(1.0, *b)).norm();
            if sep <= tol {
                return Err(Error::NotCoprime {
                    root: Complex64::from_polar(1.0, -a),
                    separation: sep,
                });
            }
        }
    }
    let q = ShiftPolynomial::rotation_product(
        phases
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != target)
            .map(|(_, &phi)| phi),
    );
    let r = ShiftPolynomial::rotation(phases[target]);
    let bezout = bezout_coprime(&q, &r, tol)?;
    let filtered = q.apply(alpha);
    let reconstructed = bezout.u.apply(&filtered);
    let norm_estimate = reconstructed.lp_norm(window.0, window.1, p);
    Ok(Extraction {
        filtered,
        reconstructed,
        bezout,
        window,
        p,
        norm_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{rotated_power, GBVDecomposition};
    use std::f64::consts::PI;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn single_phase_is_left_untouched() {
        let b = rotated_power(one(), 0.9, 1.0, 1, 0).unwrap();
        let ex = extract_component(&b.seq, &[0.9], 0, (1, 100), 2.0).unwrap();
        for n in 1..100 {
            assert_eq!(ex.filtered.at(n), b.seq.at(n));
            assert_eq!(ex.reconstructed.at(n), b.seq.at(n));
        }
    }

    #[test]
    fn two_harmonic_components_separate() {
        let b1 = rotated_power(one(), 1.0, 1.0, 1, 0).unwrap();
        let b2 = rotated_power(one(), 2.0, 1.0, 1, 0).unwrap();
        let alpha = GBVDecomposition::new(vec![b1.clone(), b2]).represented();
        let ex = extract_component(&alpha, &[1.0, 2.0], 0, (100, 10_000), 2.0).unwrap();
        let rep = ex.compare(&b1.seq);
        assert!(rep.l2_relative < 0.05, "{rep:?}");
        // the error is summable: its l1 mass over the window stays O(1)
        assert!(rep.l1 < 1.0, "{rep:?}");
    }

    #[test]
    fn norm_estimate_for_opposite_phases() {
        let b0 = rotated_power(one(), 0.0, 0.5, 1, 0).unwrap();
        let b1 = rotated_power(Complex64::new(0.3, 0.4), PI, 0.5, 1, 0).unwrap();
        let alpha = b0.seq.add(&b1.seq);
        let ex = extract_component(&alpha, &[0.0, PI], 1, (10, 10_000), 2.0).unwrap();
        let rep = ex.compare(&b1.seq);
        assert!(rep.norm_relative_error < 0.05, "{rep:?}");
    }

    #[test]
    fn repeated_phase_is_rejected() {
        let alpha = CoeffSequence::zero(0);
        let err = extract_component(&alpha, &[1.0, 1.0 + 2.0 * PI], 0, (0, 10), 2.0).unwrap_err();
        assert!(matches!(err, Error::NotCoprime { .. }));
    }
}
