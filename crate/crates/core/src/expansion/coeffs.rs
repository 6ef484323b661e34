//! Exact integer and rational coefficient families.
//!
//! All functions accept arbitrary integer indices and vanish outside their
//! support; binomials follow the combinatorial convention (zero unless `0 <= k <= n`).

use num_rational::Ratio;

pub type Rat = Ratio<i128>;

/// `n! / (k! (n-k)!)` for `0 <= k <= n`, else 0.
pub fn binom(n: i64, k: i64) -> i128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Kronecker delta `delta_n`.
pub fn kronecker(n: i64) -> i128 {
    (n == 0) as i128
}

fn sign(e: i64) -> i128 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Coefficient `xi_{I,J,K,L}` of `alpha^I conj(alpha)^J e^{iK psi} c^L` in the expansion
/// `log(r_{n+1}/r_n) ~ -Re sum xi * monomial`, with `psi = (n+1) eta + 2 theta_n` and
/// `c` treated as a formal variable.
///
/// For `K > 0` this is `delta_{I-K} delta_{J-L} C(K+L, K)/(K+L)`. For `K = 0` it combines
/// the `(c conj(alpha))^L / L` term of the logarithm of the numerator with the
/// expansion of `-1/2 log((1 - c alpha)(1 - c conj(alpha)) - |alpha|^2)`.
pub fn coeff_xi(i: i64, j: i64, k: i64, l: i64) -> Rat {
    if i < 0 || j < 0 || k < 0 || l < 0 {
        return Rat::from_integer(0);
    }
    if k > 0 {
        if i == k && j == l {
            return Rat::new(binom(k + l, k), (k + l) as i128);
        }
        return Rat::from_integer(0);
    }
    let mut out = Rat::from_integer(0);
    if i == 0 && j == l && l > 0 {
        out += Rat::new(1, l as i128);
    }
    // 1/2 sum_{k',m} C(k'+m, k')/(k'+m) (c alpha + c conj(alpha))^{k'} ((1 - c^2) |alpha|^2)^m:
    // alpha^a conj(alpha)^{k'-a} from the first power, c^{2b} from the second.
    for m in 0..=i.min(j) {
        let kk = i + j - 2 * m;
        if kk + m == 0 {
            continue;
        }
        let a = i - m;
        let rest = l - kk;
        if rest < 0 || rest % 2 != 0 {
            continue;
        }
        let b = rest / 2;
        let term = binom(kk + m, kk) * binom(kk, a) * binom(m, b) * sign(b);
        if term != 0 {
            out -= Rat::new(term, 2 * (kk + m) as i128);
        }
    }
    out
}

/// `xi` evaluated at a concrete model constant: `c^L xi_{I,J,K,L}`.
pub fn coeff_xi_at(i: i64, j: i64, k: i64, l: i64, c: u8) -> Rat {
    if c == 0 && l != 0 {
        return Rat::from_integer(0);
    }
    coeff_xi(i, j, k, l)
}

/// `Xi_{I,J,K,L} = delta_{I-K} delta_{J-L} C(K+L-1, K-1)`.
pub fn coeff_big_xi(i: i64, j: i64, k: i64, l: i64) -> i128 {
    kronecker(i - k) * kronecker(j - l) * binom(k + l - 1, k - 1)
}

/// `omega_{K,a,b,g,d} = (-1)^{g+d} C(K+g+b-1, a+b) C(K+g-a, g+d) C(a+b, a) C(g+d, g)`.
pub fn coeff_omega(k: i64, a: i64, b: i64, g: i64, d: i64) -> i128 {
    if a < 0 || b < 0 || g < 0 || d < 0 {
        return 0;
    }
    sign(g + d) * binom(k + g + b - 1, a + b) * binom(k + g - a, g + d) * binom(a + b, a) * binom(g + d, g)
}

/// `Omega_{K,a,b,g,d} = (-1)^{g+d} C(K+g+b-1, K-1) C(K, a+d) C(a+d, a) C(b+g, b)`.
pub fn coeff_big_omega(k: i64, a: i64, b: i64, g: i64, d: i64) -> i128 {
    if a < 0 || b < 0 || g < 0 || d < 0 {
        return 0;
    }
    sign(g + d) * binom(k + g + b - 1, k - 1) * binom(k, a + d) * binom(a + d, a) * binom(b + g, b)
}
