//! The recursive families `f, g, h, G, H` indexed by `(I, J, K, L)`.
//!
//! `f` starts from `xi` and collects `omega ⊙ g` from every strictly lower order;
//! `g = chi(K eta - sum x + sum y) f`, `h = f + g`, `G = K g`, `H = K h`.
//! Here `c` is formal: the methods of [`FamilyEvaluator`] return the coefficient of `c^L`,
//! the free functions multiply by `c^L`.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use super::chi;
use super::coeffs::{coeff_omega, coeff_xi};
use super::symfn::split_average;
use crate::pruefer::distance_to_2pi_z;
use crate::{Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 6;

type Key = (i64, i64, i64, i64, Vec<i64>, Vec<i64>);

fn rounded(v: &[f64]) -> Vec<i64> {
    let mut out: Vec<i64> = v.iter().map(|x| (x * 1e12).round() as i64).collect();
    out.sort_unstable();
    out
}

/// Memoizing evaluator at a fixed `eta`. Not shared between threads; use one per worker.
#[derive(Debug)]
pub struct FamilyEvaluator {
    eta: f64,
    max_order: usize,
    memo: RefCell<HashMap<Key, Complex64>>,
    min_chi: Cell<f64>,
}

impl FamilyEvaluator {
    pub fn new(eta: f64) -> Self {
        Self::with_max_order(eta, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(eta: f64, max_order: usize) -> Self {
        FamilyEvaluator {
            eta,
            max_order,
            memo: RefCell::new(HashMap::new()),
            min_chi: Cell::new(f64::INFINITY),
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Smallest distance to `2 pi Z` of any `chi` argument evaluated so far.
    pub fn min_chi_distance(&self) -> f64 {
        self.min_chi.get()
    }

    fn check(&self, i: i64, j: i64, xs: &[f64], ys: &[f64]) -> Result<()> {
        if xs.len() as i64 != i.max(0) || ys.len() as i64 != j.max(0) {
            return Err(Error::Parameter(format!(
                "expected {i} x-phases and {j} y-phases, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        let order = (i + j).max(0) as usize;
        if order > self.max_order {
            return Err(Error::OrderLimit {
                order,
                max: self.max_order,
            });
        }
        Ok(())
    }

    pub fn f(&self, i: i64, j: i64, k: i64, l: i64, xs: &[f64], ys: &[f64]) -> Result<Complex64> {
        self.check(i, j, xs, ys)?;
        if i < 0 || j < 0 || k < 0 || l < 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let key = (i, j, k, l, rounded(xs), rounded(ys));
        if let Some(v) = self.memo.borrow().get(&key) {
            return Ok(*v);
        }
        let mut val = Complex64::new(coeff_xi(i, j, k, l).to_f64().unwrap(), 0.0);
        for a in 0..=i {
            for d in 0..=(i - a) {
                for b in 0..=j {
                    for g in 0..=(j - b) {
                        if a + b + g + d == 0 || l - b - d < 0 || k + g - a < 0 {
                            continue;
                        }
                        let w = coeff_omega(k, a, b, g, d);
                        if w == 0 {
                            continue;
                        }
                        let (si, sj) = (i - a - d, j - b - g);
                        let avg = split_average(xs, ys, si as usize, sj as usize, |s, _, t, _| {
                            self.g(si, sj, k + g - a, l - b - d, s, t)
                        })?;
                        val += w as f64 * avg;
                    }
                }
            }
        }
        self.memo.borrow_mut().insert(key, val);
        Ok(val)
    }

    /// `K eta - sum x + sum y`.
    pub fn chi_argument(&self, k: i64, xs: &[f64], ys: &[f64]) -> f64 {
        k as f64 * self.eta - xs.iter().sum::<f64>() + ys.iter().sum::<f64>()
    }

    pub fn g(&self, i: i64, j: i64, k: i64, l: i64, xs: &[f64], ys: &[f64]) -> Result<Complex64> {
        let f = self.f(i, j, k, l, xs, ys)?;
        if f == Complex64::new(0.0, 0.0) {
            return Ok(f);
        }
        let arg = self.chi_argument(k, xs, ys);
        self.min_chi.set(self.min_chi.get().min(distance_to_2pi_z(arg)));
        let x = chi(arg).map_err(|e| match e {
            Error::Singularity { phase, tol, .. } => Error::Singularity {
                phase,
                tol,
                context: format!("g_{{{i},{j},{k},{l}}} at eta = {}, x = {xs:?}, y = {ys:?}", self.eta),
            },
            other => other,
        })?;
        Ok(x * f)
    }

    pub fn h(&self, i: i64, j: i64, k: i64, l: i64, xs: &[f64], ys: &[f64]) -> Result<Complex64> {
        Ok(self.f(i, j, k, l, xs, ys)? + self.g(i, j, k, l, xs, ys)?)
    }

    pub fn big_g(&self, i: i64, j: i64, k: i64, l: i64, xs: &[f64], ys: &[f64]) -> Result<Complex64> {
        if k <= 0 {
            self.check(i, j, xs, ys)?;
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(k as f64 * self.g(i, j, k, l, xs, ys)?)
    }

    pub fn big_h(&self, i: i64, j: i64, k: i64, l: i64, xs: &[f64], ys: &[f64]) -> Result<Complex64> {
        if k <= 0 {
            self.check(i, j, xs, ys)?;
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(k as f64 * self.h(i, j, k, l, xs, ys)?)
    }
}

fn c_power(c: u8, l: i64) -> Result<f64> {
    if c > 1 {
        return Err(Error::Parameter(format!("model constant c must be 0 or 1, got {c}")));
    }
    Ok(if l == 0 { 1.0 } else { c as f64 })
}

type Idx = (i64, i64, i64, i64);

pub fn eval_f(idx: Idx, eta: f64, xs: &[f64], ys: &[f64], c: u8) -> Result<Complex64> {
    let (i, j, k, l) = idx;
    Ok(c_power(c, l)? * FamilyEvaluator::new(eta).f(i, j, k, l, xs, ys)?)
}

pub fn eval_g(idx: Idx, eta: f64, xs: &[f64], ys: &[f64], c: u8) -> Result<Complex64> {
    let (i, j, k, l) = idx;
    Ok(c_power(c, l)? * FamilyEvaluator::new(eta).g(i, j, k, l, xs, ys)?)
}

pub fn eval_big_g(idx: Idx, eta: f64, xs: &[f64], ys: &[f64], c: u8) -> Result<Complex64> {
    let (i, j, k, l) = idx;
    Ok(c_power(c, l)? * FamilyEvaluator::new(eta).big_g(i, j, k, l, xs, ys)?)
}

pub fn eval_big_h(idx: Idx, eta: f64, xs: &[f64], ys: &[f64], c: u8) -> Result<Complex64> {
    let (i, j, k, l) = idx;
    Ok(c_power(c, l)? * FamilyEvaluator::new(eta).big_h(i, j, k, l, xs, ys)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn first_order() {
        let ev = FamilyEvaluator::new(1.3);
        let phi = 0.4;
        assert_eq!(ev.f(1, 0, 1, 0, &[phi], &[]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(close(ev.g(1, 0, 1, 0, &[phi], &[]).unwrap(), chi(1.3 - phi).unwrap(), 1e-15));
        assert_eq!(ev.g(0, 0, 1, 0, &[], &[]).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(ev.big_g(0, 0, 1, 0, &[], &[]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn low_order_real_part_vanishes() {
        for (eta, phi) in [(1.0, 0.3), (2.7, -1.4), (-0.8, 2.2)] {
            let f = eval_f((1, 1, 0, 0), eta, &[phi], &[phi], 0).unwrap();
            let want = Complex64::new(-0.5, 0.0) - chi(eta - phi).unwrap();
            assert!(close(f, want, 1e-14));
            assert!(f.re.abs() < 1e-14);
        }
    }

    #[test]
    fn second_order_is_chi_product() {
        let (eta, p1, p2) = (1.0, 0.3, 0.7);
        let g = eval_big_g((2, 0, 2, 0), eta, &[p1, p2], &[], 0).unwrap();
        let want = chi(eta - p1).unwrap() * chi(eta - p2).unwrap();
        assert!(close(g, want, 1e-13), "{g} vs {want}");
    }

    #[test]
    fn k2_singularity_is_removable() {
        // g_{2,0,2,0} near eta = (phi1 + phi2)/2 + pi stays bounded
        let (p1, p2) = (0.3, 1.1);
        let center = (p1 + p2) / 2.0 + PI;
        let mut last = 0.0;
        for e in 1..10 {
            let eta = center + 10f64.powi(-e);
            let g = eval_g((2, 0, 2, 0), eta, &[p1, p2], &[], 0).unwrap();
            assert!(g.norm() < 10.0, "{eta}: {g}");
            last = g.norm();
        }
        let limit = (chi(center - p1).unwrap() * chi(center - p2).unwrap()).norm() / 2.0;
        assert!((last - limit).abs() < 1e-6);
    }

    #[test]
    fn ratio_relation() {
        let ev = FamilyEvaluator::new(0.9);
        let xs = [0.23, 2.17];
        let ys = [-0.61];
        for (k, l) in [(1, 0), (2, 1), (3, 0), (1, 2)] {
            let g = ev.big_g(2, 1, k, l, &xs, &ys).unwrap();
            let h = ev.big_h(2, 1, k, l, &xs, &ys).unwrap();
            let arg = ev.chi_argument(k, &xs, &ys);
            assert!(close(h, g * Complex64::from_polar(1.0, -arg), 1e-12));
        }
    }

    #[test]
    fn support_and_limits() {
        let ev = FamilyEvaluator::with_max_order(0.5, 2);
        assert_eq!(ev.f(-1, 0, 1, 0, &[], &[]).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(ev.f(1, 0, -1, 0, &[0.1], &[]).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(ev.f(2, 1, 1, 0, &[0.1, 0.2], &[0.3]), Err(Error::OrderLimit { order: 3, max: 2 })));
        assert!(matches!(ev.f(1, 0, 1, 0, &[], &[]), Err(Error::Parameter(_))));
        assert_eq!(eval_f((0, 1, 0, 1), 0.5, &[], &[0.2], 0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn singular_point_reported() {
        let err = eval_g((1, 0, 1, 0), 0.5, &[0.5], &[], 0).unwrap_err();
        match err {
            Error::Singularity { context, .. } => assert!(context.contains("g_{1,0,1,0}")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn permutation_invariance() {
        let ev = FamilyEvaluator::new(1.7);
        let a = ev.f(3, 1, 2, 1, &[0.1, 0.9, -1.3], &[0.4]).unwrap();
        let b = FamilyEvaluator::new(1.7).f(3, 1, 2, 1, &[-1.3, 0.1, 0.9], &[0.4]).unwrap();
        assert!(close(a, b, 1e-13));
    }
}
