//! Functions of `eta` and two groups of phases, symmetric within each group.

use itertools::Itertools;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use super::coeffs::binom;

type SymEval = Arc<dyn Fn(f64, &[f64], &[f64]) -> Complex64 + Send + Sync>;

/// A function of `(eta; x_1..x_I; y_1..y_J)`.
#[derive(Clone)]
pub struct SymFn {
    pub i: usize,
    pub j: usize,
    eval: SymEval,
}

impl fmt::Debug for SymFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymFn({}, {})", self.i, self.j)
    }
}

impl SymFn {
    pub fn new(i: usize, j: usize, eval: impl Fn(f64, &[f64], &[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        SymFn { i, j, eval: Arc::new(eval) }
    }

    /// A constant of the given arity.
    pub fn constant(i: usize, j: usize, value: Complex64) -> Self {
        SymFn::new(i, j, move |_, _, _| value)
    }

    /// Panics if the argument counts do not match the arity.
    pub fn eval(&self, eta: f64, xs: &[f64], ys: &[f64]) -> Complex64 {
        assert_eq!((xs.len(), ys.len()), (self.i, self.j), "arity mismatch");
        (self.eval)(eta, xs, ys)
    }
}

/// Calls `visit(chosen, rest)` for every subset of `xs` of size `k`.
pub(crate) fn for_each_split(xs: &[f64], k: usize, mut visit: impl FnMut(&[f64], &[f64])) {
    let mut chosen = Vec::with_capacity(k);
    let mut rest = Vec::with_capacity(xs.len().saturating_sub(k));
    for idx in (0..xs.len()).combinations(k) {
        chosen.clear();
        rest.clear();
        let mut it = idx.iter().peekable();
        for (n, &x) in xs.iter().enumerate() {
            if it.peek() == Some(&&n) {
                chosen.push(x);
                it.next();
            } else {
                rest.push(x);
            }
        }
        visit(&chosen, &rest);
    }
}

/// Average of `term(S, X\S, T, Y\T)` over subsets `S` of `xs` of size `i` and `T` of `ys` of size `j`.
pub(crate) fn split_average<E>(
    xs: &[f64],
    ys: &[f64],
    i: usize,
    j: usize,
    mut term: impl FnMut(&[f64], &[f64], &[f64], &[f64]) -> Result<Complex64, E>,
) -> Result<Complex64, E> {
    if i > xs.len() || j > ys.len() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut err = None;
    for_each_split(xs, i, |s, xr| {
        for_each_split(ys, j, |t, yr| {
            if err.is_some() {
                return;
            }
            match term(s, xr, t, yr) {
                Ok(v) => acc += v,
                Err(e) => err = Some(e),
            }
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    let count = binom(xs.len() as i64, i as i64) * binom(ys.len() as i64, j as i64);
    Ok(acc / count as f64)
}

/// Symmetric product: the permutation average of `p(x_sigma, y_tau) q(rest)`, evaluated by
/// enumerating which arguments feed `p`.
pub fn sym_product(p: &SymFn, q: &SymFn) -> SymFn {
    let (p, q) = (p.clone(), q.clone());
    SymFn::new(p.i + q.i, p.j + q.j, move |eta, xs, ys| {
        split_average::<()>(xs, ys, p.i, p.j, |s, xr, t, yr| Ok(p.eval(eta, s, t) * q.eval(eta, xr, yr))).unwrap()
    })
}
