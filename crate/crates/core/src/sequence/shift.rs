//! Polynomials in the index shift `T`, with Bézout pairs for coprime ones.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::CoeffSequence;
use crate::error::{Error, Result};

/// Root separation below which two polynomials count as sharing a root.
pub const DEFAULT_COPRIME_TOL: f64 = 1e-9;

/// `P(T) = sum_k c_k T^k`, acting by `(P(T) z)_n = sum_k c_k z_{n+k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPolynomial {
    coeffs: Vec<Complex64>,
}

impl ShiftPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// The shift `T` itself.
    pub fn shift() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    /// `e^{i phi} T - 1`, which annihilates `e^{-i n phi}` times a constant.
    pub fn rotation(phase: f64) -> Self {
        Self::new(vec![Complex64::new(-1.0, 0.0), Complex64::from_polar(1.0, phase)])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == Complex64::new(0.0, 0.0) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(Complex64::new(0.0, 0.0));
        }
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * z).collect())
    }

    /// Product of `e^{i phi} T - 1` over the given phases; empty gives 1.
    pub fn rotation_product<I: IntoIterator<Item = f64>>(phases: I) -> Self {
        phases
            .into_iter()
            .fold(Self::one(), |acc, phi| &acc * &Self::rotation(phi))
    }

    /// Complex roots via Durand–Kerner, polished with Newton steps.
    pub fn roots(&self) -> Vec<Complex64> {
        let d = self.degree();
        if d == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[d];
        let monic: Vec<Complex64> = self.coeffs.iter().map(|c| c / lead).collect();
        if d == 1 {
            return vec![-monic[0]];
        }
        let radius = 1.0 + monic[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..d)
            .map(|k| Complex64::from_polar(0.5 * radius, std::f64::consts::TAU * k as f64 / d as f64 + 0.4))
            .collect();
        let p = Self::new(monic.clone());
        for _ in 0..1000 {
            let mut delta: f64 = 0.0;
            for i in 0..d {
                let denom: Complex64 = (0..d)
                    .filter(|&j| j != i)
                    .map(|j| z[i] - z[j])
                    .product();
                if denom.norm() == 0.0 {
                    z[i] += Complex64::new(1e-8, 1e-8);
                    delta = f64::INFINITY;
                    continue;
                }
                let step = p.eval(z[i]) / denom;
                z[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-15 * radius {
                break;
            }
        }
        let dp = p.derivative();
        for zi in z.iter_mut() {
            for _ in 0..3 {
                let dv = dp.eval(*zi);
                if dv.norm() == 0.0 {
                    break;
                }
                *zi -= p.eval(*zi) / dv;
            }
        }
        z
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(Complex64::new(0.0, 0.0));
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// `P(T) z`.
    pub fn apply(&self, z: &CoeffSequence) -> CoeffSequence {
        apply_shift_poly(self, z)
    }
}

impl Add for &ShiftPolynomial {
    type Output = ShiftPolynomial;
    fn add(self, rhs: &ShiftPolynomial) -> ShiftPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        ShiftPolynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero) + rhs.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }
}

impl Sub for &ShiftPolynomial {
    type Output = ShiftPolynomial;
    fn sub(self, rhs: &ShiftPolynomial) -> ShiftPolynomial {
        self + &rhs.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &ShiftPolynomial {
    type Output = ShiftPolynomial;
    fn mul(self, rhs: &ShiftPolynomial) -> ShiftPolynomial {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ShiftPolynomial::new(out)
    }
}

/// `(P(T) z)_n = sum_k c_k z_{n+k}`; the result keeps the start index of `z`.
pub fn apply_shift_poly(p: &ShiftPolynomial, z: &CoeffSequence) -> CoeffSequence {
    let coeffs = Arc::new(p.coeffs.clone());
    let z = z.clone();
    let start = z.start();
    let bound = z
        .bound()
        .map(|m| m * coeffs.iter().map(|c| c.norm()).sum::<f64>());
    let out = CoeffSequence::new(start, move |n| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * z.at(n + k))
            .sum()
    });
    match bound {
        Some(m) => out.with_bound(m),
        None => out,
    }
}

/// `U, V` with `U Q + V R = 1`, `deg U < deg R`, `deg V < deg Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BezoutPair {
    pub u: ShiftPolynomial,
    pub v: ShiftPolynomial,
    /// Largest coefficient of `U Q + V R - 1`.
    pub residual: f64,
}

/// Solves the Bézout identity for coprime `q` and `r` through the Sylvester system.
pub fn bezout_coprime(q: &ShiftPolynomial, r: &ShiftPolynomial, tol: f64) -> Result<BezoutPair> {
    if q.is_zero() || r.is_zero() {
        return Err(Error::Parameter("Bézout inputs must be nonzero polynomials".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let (dq, dr) = (q.degree(), r.degree());

    let q_roots = q.roots();
    let r_roots = r.roots();
    for a in &q_roots {
        for b in &r_roots {
            let sep = (a - b).norm();
            if sep <= tol {
                return Err(Error::NotCoprime {
                    root: *a,
                    separation: sep,
                });
            }
        }
    }

    let (u, v) = if dq == 0 {
        (ShiftPolynomial::constant(q.coeffs[0].inv()), ShiftPolynomial::constant(zero))
    } else if dr == 0 {
        (ShiftPolynomial::constant(zero), ShiftPolynomial::constant(r.coeffs[0].inv()))
    } else {
        // unknowns: u_0..u_{dr-1}, v_0..v_{dq-1}; equations: coefficients 0..dq+dr-1
        let size = dq + dr;
        let mut m = DMatrix::<Complex64>::zeros(size, size);
        for j in 0..dr {
            for (k, c) in q.coeffs.iter().enumerate() {
                m[(j + k, j)] = *c;
            }
        }
        for j in 0..dq {
            for (k, c) in r.coeffs.iter().enumerate() {
                m[(j + k, dr + j)] = *c;
            }
        }
        let mut rhs = DVector::<Complex64>::zeros(size);
        rhs[0] = Complex64::new(1.0, 0.0);
        let sol = m.lu().solve(&rhs).ok_or_else(|| Error::NotCoprime {
            root: q_roots.first().copied().unwrap_or(zero),
            separation: 0.0,
        })?;
        (
            ShiftPolynomial::new(sol.iter().take(dr).copied().collect()),
            ShiftPolynomial::new(sol.iter().skip(dr).copied().collect()),
        )
    };

    let check = &(&(&u * q) + &(&v * r)) - &ShiftPolynomial::one();
    let residual = check.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(BezoutPair { u, v, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shift_and_identity() {
        let z = CoeffSequence::new(0, |n| c(n as f64, -(n as f64).sqrt()));
        let t = apply_shift_poly(&ShiftPolynomial::shift(), &z);
        let id = apply_shift_poly(&ShiftPolynomial::one(), &z);
        for n in 0..30 {
            assert_eq!(t.at(n), z.at(n + 1));
            assert_eq!(id.at(n), z.at(n));
        }
    }

    #[test]
    fn rotation_polynomial_differences_the_envelope() {
        let phi = 0.77;
        let gamma = |n: usize| c(1.0 / (n as f64 + 1.0), 0.3 * (n as f64).sin());
        let beta = CoeffSequence::new(0, move |n| Complex64::from_polar(1.0, -(n as f64) * phi) * gamma(n));
        let out = apply_shift_poly(&ShiftPolynomial::rotation(phi), &beta);
        for n in [0usize, 3, 17, 101] {
            let want = Complex64::from_polar(1.0, -(n as f64) * phi) * (gamma(n + 1) - gamma(n));
            assert_abs_diff_eq!((out.at(n) - want).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn bezout_hand_example() {
        let q = ShiftPolynomial::new(vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        let r = ShiftPolynomial::new(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let b = bezout_coprime(&q, &r, DEFAULT_COPRIME_TOL).unwrap();
        assert_abs_diff_eq!((b.u.coeffs()[0] - c(-0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((b.v.coeffs()[0] - c(0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert!(b.residual < 1e-15);
    }

    #[test]
    fn bezout_unit_factor() {
        let r = ShiftPolynomial::rotation(1.3);
        let b = bezout_coprime(&ShiftPolynomial::one(), &r, DEFAULT_COPRIME_TOL).unwrap();
        assert_eq!(b.u, ShiftPolynomial::one());
        assert!(b.v.is_zero());
    }

    #[test]
    fn bezout_rejects_shared_root() {
        let q = ShiftPolynomial::rotation(0.4);
        let err = bezout_coprime(&q, &q.clone(), DEFAULT_COPRIME_TOL).unwrap_err();
        match err {
            Error::NotCoprime { root, separation } => {
                assert!(separation <= DEFAULT_COPRIME_TOL);
                assert_abs_diff_eq!((root - Complex64::from_polar(1.0, -0.4)).norm(), 0.0, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn roots_of_rotation_products() {
        let phases = [0.3, 1.7, -2.4, 3.0];
        let p = ShiftPolynomial::rotation_product(phases);
        assert_eq!(p.degree(), 4);
        let roots = p.roots();
        for phi in phases {
            let want = Complex64::from_polar(1.0, -phi);
            let best = roots.iter().map(|r| (r - want).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "phase {phi}: {best}");
        }
    }

    #[test]
    fn bezout_with_higher_degree() {
        let q = ShiftPolynomial::rotation_product([0.5, 1.5, 2.5]);
        let r = ShiftPolynomial::rotation(-1.0);
        let b = bezout_coprime(&q, &r, DEFAULT_COPRIME_TOL).unwrap();
        assert!(b.u.degree() < r.degree().max(1));
        assert!(b.v.degree() < q.degree());
        assert!(b.residual < 1e-12);
    }

    proptest! {
        #[test]
        fn shift_application_matches_direct_sum(
            coeffs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..6),
            n in 0usize..200,
        ) {
            let p = ShiftPolynomial::new(coeffs.iter().map(|&(a, b)| c(a, b)).collect());
            let z = CoeffSequence::new(0, |k| c((k as f64 * 0.37).cos(), 1.0 / (k as f64 + 1.0)));
            let got = apply_shift_poly(&p, &z).at(n);
            let want: Complex64 = coeffs.iter().enumerate().map(|(k, &(a, b))| c(a, b) * z.at(n + k)).sum();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn shift_application_is_linear(
            coeffs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..5),
            n in 0usize..100,
        ) {
            let p = ShiftPolynomial::new(coeffs.iter().map(|&(a, b)| c(a, b)).collect());
            let z = CoeffSequence::new(0, |k| c((k as f64).sin(), 0.0));
            let w = CoeffSequence::new(0, |k| c(0.0, 1.0 / (1.0 + k as f64)));
            let lhs = apply_shift_poly(&p, &z.add(&w)).at(n);
            let rhs = apply_shift_poly(&p, &z).at(n) + apply_shift_poly(&p, &w).at(n);
            prop_assert!((lhs - rhs).norm() <= 1e-13);
        }

        #[test]
        fn bezout_residual_small_for_separated_phases(
            a in 0.1f64..2.0, b in 2.3f64..4.0, t in -3.0f64..-0.2,
        ) {
            let q = ShiftPolynomial::rotation_product([a, b]);
            let r = ShiftPolynomial::rotation(t);
            let bz = bezout_coprime(&q, &r, DEFAULT_COPRIME_TOL).unwrap();
            prop_assert!(bz.residual < 1e-10);
        }
    }
}
