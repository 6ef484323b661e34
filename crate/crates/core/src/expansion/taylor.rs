//! Taylor polynomials `P_{k,l}` of `e^{2ik(theta_{n+1}-theta_n)} - 1` in powers of `alpha`.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use std::ops::Neg;

use super::coeffs::binom;

fn p_generic<T>(k: i64, l: i64, a: Complex<T>, w: Complex<T>, c: u8, lift: impl Fn(i128) -> T) -> Complex<T>
where
    T: Clone + Num + Neg<Output = T>,
{
    let cc = Complex::new(lift(c as i128), T::zero());
    let big_a = a.clone() * w.clone() + cc.clone() * a.conj();
    let big_b = a.conj() * w.conj() + cc * a;
    let top = (l - 1).max(0) as usize;
    let mut pa = vec![Complex::<T>::one()];
    let mut pb = vec![Complex::<T>::one()];
    for i in 1..=top {
        pa.push(pa[i - 1].clone() * big_a.clone());
        pb.push(pb[i - 1].clone() * big_b.clone());
    }
    let mut out = Complex::<T>::zero();
    for u in 0..=top {
        for v in 0..=(top - u) {
            if u + v == 0 {
                continue;
            }
            let (ui, vi) = (u as i64, v as i64);
            let mut coef = binom(k + ui - 1, ui) * binom(k, vi);
            if coef == 0 {
                continue;
            }
            if v % 2 == 1 {
                coef = -coef;
            }
            let term = pa[u].clone() * pb[v].clone();
            out = out + Complex::new(term.re * lift(coef), term.im * lift(coef));
        }
    }
    out
}

/// `P_{k,l}(alpha, e^{i omega})`: the sum over `u, v >= 0`, `0 < u+v < l` of
/// `(-1)^v C(k+u-1, u) C(k, v) (alpha w + c conj(alpha))^u (conj(alpha) conj(w) + c alpha)^v`.
pub fn eval_p(k: i64, l: i64, alpha: Complex64, omega_phase: f64, c: u8) -> Complex64 {
    p_generic(k, l, alpha, Complex64::from_polar(1.0, omega_phase), c, |x| x as f64)
}

type CRat = Complex<BigRational>;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact remainder `|ratio^k - 1 - P_{k,l}|` with `ratio = (1 - conj(a) conj(w) - c a)/(1 - a w - c conj(a))`.
fn exact_remainder(k: i64, l: i64, a: &CRat, w: &CRat, c: u8) -> f64 {
    let cc = Complex::new(BigRational::from_integer(BigInt::from(c)), BigRational::zero());
    let one = CRat::one();
    let num = one.clone() - a.conj() * w.conj() - cc.clone() * a.clone();
    let den = one.clone() - a.clone() * w.clone() - cc * a.conj();
    let ratio = num / den;
    let mut pow = one.clone();
    for _ in 0..k {
        pow = pow * ratio.clone();
    }
    let p = p_generic(k, l, a.clone(), w.clone(), c, |x| BigRational::from_integer(BigInt::from(x)));
    let r = pow - one - p;
    let sq = r.re.clone() * r.re + r.im.clone() * r.im;
    sq.to_f64().unwrap_or(f64::NAN).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderFit {
    pub k: i64,
    pub l: i64,
    pub c: u8,
    /// `(log |alpha|, log |remainder|)` samples.
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope of the samples; infinite when the remainder vanishes identically.
    pub slope: f64,
}

/// Magnitudes `|alpha|` used by [`remainder_slope`], as `numerator / 10^4`, spanning `[1e-4, 1e-2]`.
pub const REMAINDER_STEPS: [i64; 7] = [1, 2, 5, 10, 20, 50, 100];

/// Log-log slope of the Taylor remainder along `alpha = t (3+4i)/5`, `w = (5+12i)/13`,
/// computed in exact rational arithmetic.
pub fn remainder_slope(k: i64, l: i64, c: u8) -> RemainderFit {
    let w = Complex::new(rat(5, 13), rat(12, 13));
    let mut points = Vec::new();
    let mut vanished = false;
    for &m in &REMAINDER_STEPS {
        let t = rat(m, 10_000);
        let a = Complex::new(t.clone() * rat(3, 5), t.clone() * rat(4, 5));
        let rem = exact_remainder(k, l, &a, &w, c);
        if rem == 0.0 {
            vanished = true;
        }
        points.push((t.to_f64().unwrap().ln(), rem.ln()));
    }
    let slope = if vanished { f64::INFINITY } else { ls_slope(&points) };
    RemainderFit { k, l, c, points, slope }
}

fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // the (alpha, beta, gamma, delta) expansion of the same polynomial
    fn eval_p_expanded(k: i64, l: i64, a: Complex64, omega: f64, c: u8) -> Complex64 {
        let w = Complex64::from_polar(1.0, omega);
        let mut out = Complex64::new(0.0, 0.0);
        for al in 0..l {
            for be in 0..l {
                for ga in 0..l {
                    for de in 0..l {
                        let s = al + be + ga + de;
                        if s == 0 || s >= l {
                            continue;
                        }
                        let sign = if (ga + de) % 2 == 0 { 1.0 } else { -1.0 };
                        let coef = sign
                            * (binom(k + al + be - 1, al + be) * binom(al + be, al) * binom(k, ga + de) * binom(ga + de, ga)) as f64;
                        let cpow = if be + de == 0 { 1.0 } else { (c as f64).powi((be + de) as i32) };
                        out += coef * a.powi((al + de) as i32) * a.conj().powi((be + ga) as i32) * w.powi((al - ga) as i32) * cpow;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn p11_vanishes() {
        for (a, om) in [(Complex64::new(0.3, -0.2), 1.0), (Complex64::new(-0.7, 0.1), -2.0)] {
            assert_eq!(eval_p(1, 1, a, om, 0), Complex64::new(0.0, 0.0));
            assert_eq!(eval_p(1, 1, a, om, 1), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zero_alpha_gives_zero() {
        for k in 1..4 {
            for l in 1..6 {
                assert_eq!(eval_p(k, l, Complex64::new(0.0, 0.0), 0.4, 1).norm(), 0.0);
            }
        }
    }

    #[test]
    fn first_order_opuc() {
        let a = Complex64::new(0.2, 0.35);
        let om = 0.8;
        let w = Complex64::from_polar(1.0, om);
        let want = a * w - a.conj() * w.conj();
        assert!((eval_p(1, 2, a, om, 0) - want).norm() < 1e-15);
    }

    #[test]
    fn remainder_orders() {
        for k in 1..=3 {
            for l in 1..=4 {
                for c in [0, 1] {
                    let fit = remainder_slope(k, l, c);
                    assert!(fit.slope >= l as f64 - 0.1, "{fit:?}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn expanded_form_agrees(k in 1i64..5, l in 1i64..6, re in -0.5f64..0.5, im in -0.5f64..0.5, om in -3.2f64..3.2, c in 0u8..2) {
            let a = Complex64::new(re, im);
            let d = eval_p(k, l, a, om, c) - eval_p_expanded(k, l, a, om, c);
            prop_assert!(d.norm() < 1e-12);
        }
    }
}
