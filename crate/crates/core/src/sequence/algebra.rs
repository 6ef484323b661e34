//! Numerical checks of the closure properties of GBV classes.

use num_complex::Complex64;
use serde::Serialize;

use super::{GBVDecomposition, RotatedBVComponent};
use crate::phase_sets::PhaseSet;

/// Which closure property to verify.
#[derive(Debug, Clone, Copy)]
pub enum AlgebraCheck<'a> {
    /// Pointwise product of two components has phase `phi + psi`.
    Product(&'a RotatedBVComponent, &'a RotatedBVComponent),
    /// Sum of two decompositions uses the union of phases.
    Sum(&'a GBVDecomposition, &'a GBVDecomposition),
    /// Conjugation negates phases.
    Conjugate(&'a GBVDecomposition),
    /// Given `a - 1` in `GBV(A)`, `a^2 - 1` lies in `GBV((A + A) u A)`.
    SquareShift(&'a GBVDecomposition),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCheck {
    pub phase: f64,
    pub measured_variation: f64,
    pub tail_bound: Option<f64>,
    pub budget: Option<f64>,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraReport {
    pub kind: &'static str,
    pub window_end: usize,
    pub phases: Vec<f64>,
    pub components: Vec<ComponentCheck>,
    /// Largest pointwise gap between the combined decomposition and the direct computation.
    pub reconstruction_error: f64,
    /// Phases of the result lie in the predicted set.
    pub phases_ok: bool,
    pub passed: bool,
    pub notes: Vec<String>,
}

const RECON_TOL: f64 = 1e-12;

fn check_components(comps: &[RotatedBVComponent], window_end: usize, notes: &mut Vec<String>) -> Vec<ComponentCheck> {
    comps
        .iter()
        .map(|c| match c.certify(window_end) {
            Ok(cert) => ComponentCheck {
                phase: c.phase,
                measured_variation: cert.measured,
                tail_bound: cert.tail_bound,
                budget: cert.budget,
                certified: cert.certified,
            },
            Err(e) => {
                notes.push(format!("phase {}: {e}", c.phase));
                ComponentCheck {
                    phase: c.phase,
                    measured_variation: f64::NAN,
                    tail_bound: None,
                    budget: c.budget(),
                    certified: false,
                }
            }
        })
        .collect()
}

/// Runs the requested check over indices up to `window_end`; failures are reported, never raised.
pub fn gbv_algebra_check(kind: AlgebraCheck<'_>, window_end: usize) -> AlgebraReport {
    let mut notes = Vec::new();
    let (name, result, predicted, recon): (&'static str, GBVDecomposition, PhaseSet, f64) = match kind {
        AlgebraCheck::Product(b, g) => {
            let prod = b.product(g);
            let start = prod.seq.start();
            let err = (start..window_end)
                .map(|n| (prod.seq.at(n) - b.seq.at(n) * g.seq.at(n)).norm())
                .fold(0.0, f64::max);
            let predicted = PhaseSet::from_phases([b.phase + g.phase]);
            ("product", GBVDecomposition::new(vec![prod]), predicted, err)
        }
        AlgebraCheck::Sum(x, y) => {
            let sum = x.union(y);
            let direct = x.represented().add(&y.represented());
            let start = direct.start();
            let predicted = PhaseSet::from_phases(x.phases().into_iter().chain(y.phases()));
            let err = sum.reconstruction_error(&direct, start, window_end);
            ("sum", sum, predicted, err)
        }
        AlgebraCheck::Conjugate(x) => {
            let conj = x.conj();
            let direct = x.represented().conj();
            let start = direct.start();
            let predicted = PhaseSet::from_phases(x.phases().into_iter().map(|p| -p));
            let err = conj.reconstruction_error(&direct, start, window_end);
            for (orig, c) in x.components.iter().zip(&conj.components) {
                let s = orig.seq.start();
                let (a, b) = (
                    orig.rotated_variation(s, window_end).unwrap_or(f64::NAN),
                    c.rotated_variation(s, window_end).unwrap_or(f64::NAN),
                );
                if (a - b).abs() > 1e-12 * a.max(1.0) {
                    notes.push(format!("conjugate variation mismatch at phase {}: {a} vs {b}", orig.phase));
                }
            }
            ("conjugate", conj, predicted, err)
        }
        AlgebraCheck::SquareShift(x) => {
            // (sum b_l)^2 + 2 sum b_l, grouped by unordered pairs
            let two = Complex64::new(2.0, 0.0);
            let mut comps = Vec::new();
            for (i, bi) in x.components.iter().enumerate() {
                for bj in &x.components[i..] {
                    let prod = bi.product(bj);
                    comps.push(if std::ptr::eq(bi, bj) { prod } else { prod.scaled(two) });
                }
            }
            for b in &x.components {
                comps.push(b.scaled(two));
            }
            let result = GBVDecomposition::new(comps);
            let a_minus_one = x.represented();
            let start = a_minus_one.start();
            let rep = result.represented();
            let err = (start..window_end)
                .map(|n| {
                    let a = Complex64::new(1.0, 0.0) + a_minus_one.at(n);
                    let direct = a * a - Complex64::new(1.0, 0.0);
                    (rep.at(n) - direct).norm()
                })
                .fold(0.0, f64::max);
            let base = PhaseSet::from_phases(x.phases());
            let predicted = base.minkowski_sum(&base).union(&base);
            ("square-shift", result, predicted, err)
        }
    };
    let components = check_components(&result.components, window_end, &mut notes);
    let got = PhaseSet::from_phases(result.phases());
    let phases_ok = got.is_subset_of(&predicted);
    if !phases_ok {
        notes.push("result phases escape the predicted set".into());
    }
    let recon_ok = recon <= RECON_TOL;
    if !recon_ok {
        notes.push(format!("reconstruction error {recon:e}"));
    }
    let certified = components.iter().all(|c| c.certified);
    if !certified {
        notes.push("some component failed certification".into());
    }
    let passed = phases_ok && recon_ok && certified && notes.is_empty();
    AlgebraReport {
        kind: name,
        window_end,
        phases: result.phases(),
        components,
        reconstruction_error: recon,
        phases_ok,
        passed,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{rotated_power, wigner_von_neumann, CoeffSequence, TailBound, WvnTerm};
    use std::sync::Arc;

    fn rotation(z: Complex64, phi: f64) -> RotatedBVComponent {
        let seq = CoeffSequence::new(0, move |n| z * Complex64::from_polar(1.0, -(n as f64) * phi)).with_bound(z.norm());
        let tail: TailBound = Arc::new(|_| 0.0);
        RotatedBVComponent::certified(seq, phi, 0.0, tail)
    }

    #[test]
    fn exact_rotations_compose() {
        let b = rotation(Complex64::new(0.5, 0.0), 0.7);
        let g = rotation(Complex64::new(0.0, 0.3), 1.1);
        let rep = gbv_algebra_check(AlgebraCheck::Product(&b, &g), 2000);
        assert!(rep.passed, "{rep:?}");
        assert!((rep.phases[0] - 1.8).abs() < 1e-15);
        assert!(rep.components[0].measured_variation < 1e-9);
    }

    #[test]
    fn harmonic_product_has_phase_three() {
        let b = rotated_power(Complex64::new(1.0, 0.0), 1.0, 1.0, 1, 0).unwrap();
        let g = rotated_power(Complex64::new(1.0, 0.0), 2.0, 1.0, 1, 0).unwrap();
        let rep = gbv_algebra_check(AlgebraCheck::Product(&b, &g), 100_000);
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.phases, vec![3.0]);
        let v = rep.components[0].measured_variation;
        assert!(v.is_finite() && v <= rep.components[0].budget.unwrap());
    }

    #[test]
    fn sum_and_conjugate() {
        let x = GBVDecomposition::new(vec![rotated_power(Complex64::new(0.2, 0.1), 0.5, 0.7, 2, 0).unwrap()]);
        let y = GBVDecomposition::new(vec![rotated_power(Complex64::new(-0.4, 0.0), 2.5, 1.2, 1, 0).unwrap()]);
        let rep = gbv_algebra_check(AlgebraCheck::Sum(&x, &y), 10_000);
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.phases, vec![0.5, 2.5]);
        let rep = gbv_algebra_check(AlgebraCheck::Conjugate(&x), 10_000);
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.phases, vec![-0.5]);
    }

    #[test]
    fn square_shift_of_cosine_perturbation() {
        let (_, d) = wigner_von_neumann(
            &[WvnTerm {
                lambda: 1.0,
                phi: 1.0,
                alpha: 0.0,
                gamma: 1.0,
            }],
            None,
            1,
        )
        .unwrap();
        let rep = gbv_algebra_check(AlgebraCheck::SquareShift(&d), 20_000);
        assert!(rep.passed, "{rep:?}");
        let allowed = PhaseSet::from_phases([2.0, -2.0, 1.0, -1.0, 0.0]);
        assert!(PhaseSet::from_phases(rep.phases.clone()).is_subset_of(&allowed));
    }
}
