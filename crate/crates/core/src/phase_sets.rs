//! Finite sets of phases modulo 2π, their Minkowski sums, and the exceptional sets built from them.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Model;

pub const DEFAULT_DEDUP_TOL: f64 = 1e-9;

/// Reduces a phase to `[0, 2pi)`.
pub fn canonical(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two phases on the circle `R / 2piZ`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// A stored phase together with the raw summands that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase {
    pub value: f64,
    pub terms: Vec<f64>,
}

/// Finite set of phases in `[0, 2pi)`; insertions within `tol` of an existing
/// element are merged into the first-seen representative.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSet {
    elems: Vec<Phase>,
    tol: f64,
}

impl Default for PhaseSet {
    fn default() -> Self {
        Self::empty(DEFAULT_DEDUP_TOL)
    }
}

impl PhaseSet {
    pub fn empty(tol: f64) -> Self {
        Self {
            elems: Vec::new(),
            tol,
        }
    }

    /// The additive identity `{0}`.
    pub fn zero(tol: f64) -> Self {
        let mut s = Self::empty(tol);
        s.insert(0.0, Vec::new());
        s
    }

    pub fn from_phases<I: IntoIterator<Item = f64>>(phases: I) -> Self {
        Self::from_phases_with_tol(phases, DEFAULT_DEDUP_TOL)
    }

    pub fn from_phases_with_tol<I: IntoIterator<Item = f64>>(phases: I, tol: f64) -> Self {
        let mut s = Self::empty(tol);
        for x in phases {
            s.insert(x, vec![x]);
        }
        s
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Inserts `x` unless a stored phase is within tolerance; returns whether it was added.
    pub fn insert(&mut self, x: f64, terms: Vec<f64>) -> bool {
        let value = canonical(x);
        if self.contains(value) {
            return false;
        }
        self.elems.push(Phase { value, terms });
        true
    }

    pub fn contains(&self, x: f64) -> bool {
        self.elems
            .iter()
            .any(|e| circular_distance(e.value, x) <= self.tol)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[Phase] {
        &self.elems
    }

    /// Stored values in insertion order.
    pub fn values(&self) -> Vec<f64> {
        self.elems.iter().map(|e| e.value).collect()
    }

    /// Stored values in increasing order.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn is_subset_of(&self, other: &PhaseSet) -> bool {
        self.elems.iter().all(|e| other.contains(e.value))
    }

    /// Mutual inclusion within tolerance.
    pub fn same_as(&self, other: &PhaseSet) -> bool {
        self.is_subset_of(other) && other.is_subset_of(self)
    }

    pub fn union(&self, other: &PhaseSet) -> PhaseSet {
        let mut out = self.clone();
        for e in &other.elems {
            out.insert(e.value, e.terms.clone());
        }
        out
    }

    pub fn negate(&self) -> PhaseSet {
        let mut out = PhaseSet::empty(self.tol);
        for e in &self.elems {
            out.insert(-e.value, e.terms.iter().map(|t| -t).collect());
        }
        out
    }

    /// `{a + b : a in self, b in other}`.
    pub fn minkowski_sum(&self, other: &PhaseSet) -> PhaseSet {
        let mut out = PhaseSet::empty(self.tol);
        for a in &self.elems {
            for b in &other.elems {
                let mut terms = a.terms.clone();
                terms.extend_from_slice(&b.terms);
                out.insert(a.value + b.value, terms);
            }
        }
        out
    }

    /// `{a - b : a in self, b in other}`.
    pub fn minkowski_difference(&self, other: &PhaseSet) -> PhaseSet {
        self.minkowski_sum(&other.negate())
    }

    /// `A + ... + A` (k times); `k = 0` gives `{0}`.
    pub fn k_fold_sum(&self, k: usize) -> PhaseSet {
        (0..k).fold(PhaseSet::zero(self.tol), |acc, _| acc.minkowski_sum(self))
    }
}

/// The sets `A_p` governing which phase combinations can resonate.
///
/// OPUC: `A_1 = {}`, `A_2 = A`, `A_{2q+1} = q(A) - (q-1)(A)`; other even `p` are rejected.
/// OPRL: `A_p = (p-1)(A u {0})`.
pub fn critical_set_ap(a: &PhaseSet, p: usize, model: Model) -> Result<PhaseSet> {
    if p == 0 {
        return Err(Error::Parameter("p must be at least 1".into()));
    }
    match model {
        Model::Opuc => match p {
            1 => Ok(PhaseSet::empty(a.tol)),
            2 => Ok(a.clone()),
            p if p % 2 == 1 => {
                let q = (p - 1) / 2;
                Ok(a.k_fold_sum(q).minkowski_difference(&a.k_fold_sum(q - 1)))
            }
            p => Err(Error::Parameter(format!(
                "OPUC critical sets are defined for odd p (and p = 2); got p = {p}"
            ))),
        },
        Model::Oprl => Ok(a.union(&PhaseSet::zero(a.tol)).k_fold_sum(p - 1)),
    }
}

/// Construction used for the exceptional set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SVariant {
    Thm11,
    Thm12Case1,
    Thm12Case2,
    Cor13,
}

impl std::str::FromStr for SVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm11" => Ok(SVariant::Thm11),
            "thm12-case1" => Ok(SVariant::Thm12Case1),
            "thm12-case2" => Ok(SVariant::Thm12Case2),
            "cor13" => Ok(SVariant::Cor13),
            other => Err(Error::Parameter(format!("unknown exceptional-set variant {other:?}"))),
        }
    }
}

/// A point of an exceptional set: `e^{i eta}` on the circle or `2 cos(eta/2)` on the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SPointValue {
    Real(f64),
    /// `[re, im]`.
    Circle([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SPoint {
    pub point: SPointValue,
    pub eta: f64,
    /// The point sits at the edge `x = +-2` of the free spectrum.
    pub boundary: bool,
    /// Raw summands of the generating phase.
    pub terms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceptionalSet {
    pub model: Model,
    pub points: Vec<SPoint>,
}

impl ExceptionalSet {
    fn from_phases(model: Model, set: &PhaseSet) -> Self {
        let points = set
            .elements()
            .iter()
            .map(|e| {
                let (point, boundary) = match model {
                    Model::Opuc => {
                        let z = Complex64::from_polar(1.0, e.value);
                        (SPointValue::Circle([z.re, z.im]), false)
                    }
                    Model::Oprl => (
                        SPointValue::Real(2.0 * (e.value / 2.0).cos()),
                        circular_distance(e.value, 0.0) <= set.tol(),
                    ),
                };
                SPoint {
                    point,
                    eta: e.value,
                    boundary,
                    terms: e.terms.clone(),
                }
            })
            .collect();
        Self { model, points }
    }

    /// Generating phases `eta` of the points.
    pub fn etas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.eta).collect()
    }

    /// Points strictly inside the free spectrum.
    pub fn interior(&self) -> impl Iterator<Item = &SPoint> {
        self.points.iter().filter(|p| !p.boundary)
    }
}

/// Builds the exceptional set `S` for the given variant.
pub fn exceptional_s(a: &PhaseSet, p: usize, model: Model, variant: SVariant) -> Result<ExceptionalSet> {
    let wrong_model = |want: Model| {
        Err(Error::Parameter(format!(
            "variant {variant:?} applies to {want:?}, not {model:?}"
        )))
    };
    if p == 0 {
        return Err(Error::Parameter("p must be at least 1".into()));
    }
    let zero = PhaseSet::zero(a.tol());
    let set = match variant {
        SVariant::Thm11 => {
            if model != Model::Opuc {
                return wrong_model(Model::Opuc);
            }
            critical_set_ap(a, p, Model::Opuc)?
        }
        SVariant::Thm12Case1 | SVariant::Thm12Case2 => {
            if model != Model::Oprl {
                return wrong_model(Model::Oprl);
            }
            let tilde = if variant == SVariant::Thm12Case1 {
                a.union(&zero)
            } else {
                a.minkowski_sum(a).union(a).union(&zero)
            };
            tilde.k_fold_sum(p - 1)
        }
        SVariant::Cor13 => {
            if model != Model::Oprl {
                return wrong_model(Model::Oprl);
            }
            (1..p).fold(PhaseSet::empty(a.tol()), |acc, k| acc.union(&a.k_fold_sum(k)))
        }
    };
    Ok(ExceptionalSet::from_phases(model, &set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn set(xs: &[f64]) -> PhaseSet {
        PhaseSet::from_phases(xs.iter().copied())
    }

    #[test]
    fn canonicalization() {
        assert_eq!(canonical(-1.0), TAU - 1.0);
        assert_eq!(canonical(TAU), 0.0);
        assert_eq!(canonical(canonical(-7.3)), canonical(-7.3));
        assert!(canonical(-1e-300) < TAU);
    }

    #[test]
    fn zero_is_identity() {
        let b = set(&[0.4, 2.0, 5.5]);
        assert!(PhaseSet::zero(DEFAULT_DEDUP_TOL).minkowski_sum(&b).same_as(&b));
    }

    #[test]
    fn two_fold_of_symmetric_pair() {
        let s = set(&[1.0, -1.0]).k_fold_sum(2);
        assert_eq!(s.len(), 3);
        assert!(s.same_as(&set(&[2.0, 0.0, TAU - 2.0])));
    }

    #[test]
    fn zero_fold_is_zero() {
        assert_eq!(set(&[1.0, 2.0]).k_fold_sum(0).values(), vec![0.0]);
        assert_eq!(PhaseSet::default().k_fold_sum(0).values(), vec![0.0]);
    }

    #[test]
    fn critical_sets() {
        let a = set(&[0.7, 2.9]);
        assert!(critical_set_ap(&a, 3, Model::Opuc).unwrap().same_as(&a));
        assert!(critical_set_ap(&a, 1, Model::Opuc).unwrap().is_empty());
        assert!(critical_set_ap(&a, 2, Model::Opuc).unwrap().same_as(&a));
        assert!(matches!(critical_set_ap(&a, 4, Model::Opuc), Err(Error::Parameter(_))));
        assert!(critical_set_ap(&a, 2, Model::Oprl)
            .unwrap()
            .same_as(&set(&[0.7, 2.9, 0.0])));
        assert_eq!(critical_set_ap(&a, 1, Model::Oprl).unwrap().values(), vec![0.0]);
        let sym = set(&[1.0, -1.0]);
        let a3 = critical_set_ap(&sym, 3, Model::Oprl).unwrap();
        assert!(a3.same_as(&set(&[2.0, 0.0, -2.0, 1.0, -1.0])));
    }

    #[test]
    fn opuc_a5_is_difference_of_folds() {
        let a = set(&[0.3, 1.1]);
        let a5 = critical_set_ap(&a, 5, Model::Opuc).unwrap();
        // 2(A) - A
        let expected = set(&[0.3 + 0.3 - 0.3, 0.3 + 0.3 - 1.1, 0.3 + 1.1 - 0.3, 0.3 + 1.1 - 1.1, 1.1 + 1.1 - 0.3, 1.1 + 1.1 - 1.1]);
        assert!(a5.same_as(&expected));
    }

    #[test]
    fn exceptional_thm11() {
        let s = exceptional_s(&set(&[0.9]), 3, Model::Opuc, SVariant::Thm11).unwrap();
        assert_eq!(s.points.len(), 1);
        let SPointValue::Circle([re, im]) = s.points[0].point else { panic!() };
        assert!((re - 0.9f64.cos()).abs() < 1e-15 && (im - 0.9f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn exceptional_thm12_symmetric_pair() {
        let phi = 1.2;
        let s = exceptional_s(&set(&[phi, -phi]), 2, Model::Oprl, SVariant::Thm12Case1).unwrap();
        let mut xs: Vec<(f64, bool)> = s
            .points
            .iter()
            .map(|p| match p.point {
                SPointValue::Real(x) => (x, p.boundary),
                _ => unreachable!(),
            })
            .collect();
        xs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let c = 2.0 * (phi / 2.0).cos();
        assert_eq!(xs.len(), 3);
        assert!((xs[0].0 + c).abs() < 1e-12 && !xs[0].1);
        assert!((xs[1].0 - c).abs() < 1e-12 && !xs[1].1);
        assert!((xs[2].0 - 2.0).abs() < 1e-15 && xs[2].1);
    }

    #[test]
    fn exceptional_cor13_drops_zero() {
        let phi = 1.2;
        let s = exceptional_s(&set(&[phi, -phi]), 2, Model::Oprl, SVariant::Cor13).unwrap();
        assert_eq!(s.points.len(), 2);
        assert!(s.points.iter().all(|p| !p.boundary));
        let s2 = exceptional_s(&set(&[phi]), 3, Model::Oprl, SVariant::Thm12Case2).unwrap();
        // ((A+A) u A u {0}) twice: {0, phi, 2phi, 3phi, 4phi}
        assert_eq!(s2.points.len(), 5);
    }

    #[test]
    fn variant_model_mismatch() {
        assert!(exceptional_s(&set(&[1.0]), 3, Model::Oprl, SVariant::Thm11).is_err());
        assert!(exceptional_s(&set(&[1.0]), 3, Model::Opuc, SVariant::Cor13).is_err());
        assert_eq!("thm12-case2".parse::<SVariant>().unwrap(), SVariant::Thm12Case2);
    }

    #[test]
    fn oprl_ap_contains_mixed_differences() {
        // with A = -A, A_p holds every i(A) - j(A), i >= 1, j >= 0, i + j < p
        for a in [vec![0.5, -0.5], vec![1.3, -1.3, 0.0], vec![PI / 3.0, -PI / 3.0]] {
            let a = set(&a);
            for p in 2..=5 {
                let ap = critical_set_ap(&a, p, Model::Oprl).unwrap();
                for i in 1..p {
                    for j in 0..(p - i) {
                        let d = a.k_fold_sum(i).minkowski_difference(&a.k_fold_sum(j));
                        assert!(d.is_subset_of(&ap), "p={p} i={i} j={j}");
                    }
                }
            }
        }
    }

    fn phases() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 0..4)
    }

    proptest! {
        #[test]
        fn stored_phases_are_separated(xs in prop::collection::vec(-20.0f64..20.0, 0..30)) {
            let s = set(&xs);
            let v = s.values();
            for i in 0..v.len() {
                prop_assert!((0.0..TAU).contains(&v[i]));
                for j in (i + 1)..v.len() {
                    prop_assert!(circular_distance(v[i], v[j]) > s.tol());
                }
            }
        }

        #[test]
        fn minkowski_commutes_and_associates(a in phases(), b in phases(), c in phases()) {
            let (a, b, c) = (set(&a), set(&b), set(&c));
            prop_assert!(a.minkowski_sum(&b).same_as(&b.minkowski_sum(&a)));
            let l = a.minkowski_sum(&b).minkowski_sum(&c);
            let r = a.minkowski_sum(&b.minkowski_sum(&c));
            prop_assert!(l.same_as(&r));
        }

        #[test]
        fn k_fold_is_monotone(a in phases(), extra in phases(), k in 0usize..4) {
            let small = set(&a);
            let big = small.union(&set(&extra));
            prop_assert!(small.k_fold_sum(k).is_subset_of(&big.k_fold_sum(k)));
        }

        #[test]
        fn k_fold_matches_brute_force(a in prop::collection::vec(-4.0f64..4.0, 1..4), k in 0usize..4) {
            let s = set(&a);
            let base = s.values();
            let mut tuples: Vec<f64> = vec![0.0];
            for _ in 0..k {
                tuples = tuples.iter().flat_map(|t| base.iter().map(move |b| t + b)).collect();
            }
            prop_assert!(tuples.len() <= base.len().pow(k as u32));
            let brute = set(&tuples);
            prop_assert!(brute.same_as(&s.k_fold_sum(k)));
        }
    }
}
