//! Machine checks of the combinatorial and functional identities of the coefficient algebra.
//!
//! Integer identities are checked exactly over index ranges; functional identities are
//! evaluated at seeded random points whose `chi` arguments all stay at distance
//! [`MIN_CHI_DISTANCE`] from `2 pi Z`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::str::FromStr;

use super::chi;
use super::coeffs::{binom, coeff_big_omega, coeff_big_xi, coeff_omega, coeff_xi, kronecker, Rat};
use super::family::FamilyEvaluator;
use super::symfn::split_average;
use crate::pruefer::distance_to_2pi_z;
use crate::{Error, Result};

/// Random points are redrawn until every `chi` argument is at least this far from `2 pi Z`.
pub const MIN_CHI_DISTANCE: f64 = 0.1;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// `sum_i delta_{i-k} delta_{I-i-(K-k)} = delta_{I-K}`
    KroneckerConvolution,
    /// `sum_k C(m,k) C(n,l-k) = C(m+n,l)`
    Vandermonde,
    /// `sum_k C(m+k,m) C(n+l-k,n) = C(l+m+n+1, m+n+1)`
    SubsetCount,
    /// `sum Xi ⊙ Xi = Xi` for `0 < k < K`
    XiConvolution,
    /// `sum Omega ⊙ Omega = Omega` for `0 < k < K`
    OmegaConvolution,
    /// `Xi = K xi` and `(K + g - a) Omega = K omega`
    Scaling,
    /// `sum G ⊙ G` equals `G` for `0 < k < K` and vanishes otherwise
    KeyIdentity,
    /// `sum Xi ⊙ G = sum_{a >= g + k} Omega ⊙ G`
    XiGExchange,
    /// `H = Xi + sum Omega ⊙ G`
    HRecursion,
    /// `H = G exp(-i(K eta - sum x + sum y))`
    HgRatio,
    /// `(1 + chi(eta - a) + chi(eta - b)) chi(2 eta - a - b) = chi(eta - a) chi(eta - b)`
    ChiProduct,
    /// `Re(1/2 + chi) = 0`
    ChiRealPart,
    /// `Re f_{I,I,0,0}(eta; phi..; phi..) = 0` for `c = 0`
    LowOrderVanishing,
}

impl Identity {
    pub const ALL: [Identity; 13] = [
        Identity::KroneckerConvolution,
        Identity::Vandermonde,
        Identity::SubsetCount,
        Identity::XiConvolution,
        Identity::OmegaConvolution,
        Identity::Scaling,
        Identity::KeyIdentity,
        Identity::XiGExchange,
        Identity::HRecursion,
        Identity::HgRatio,
        Identity::ChiProduct,
        Identity::ChiRealPart,
        Identity::LowOrderVanishing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::KroneckerConvolution => "kronecker-convolution",
            Identity::Vandermonde => "vandermonde",
            Identity::SubsetCount => "subset-count",
            Identity::XiConvolution => "xi-convolution",
            Identity::OmegaConvolution => "omega-convolution",
            Identity::Scaling => "scaling",
            Identity::KeyIdentity => "key-identity",
            Identity::XiGExchange => "xi-g-exchange",
            Identity::HRecursion => "h-recursion",
            Identity::HgRatio => "hg-ratio",
            Identity::ChiProduct => "chi-product",
            Identity::ChiRealPart => "chi-real-part",
            Identity::LowOrderVanishing => "low-order-vanishing",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(
            self,
            Identity::KroneckerConvolution
                | Identity::Vandermonde
                | Identity::SubsetCount
                | Identity::XiConvolution
                | Identity::OmegaConvolution
                | Identity::Scaling
        )
    }
}

impl FromStr for Identity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown identity {s:?}")))
    }
}

/// Ranges and sampling for [`verify_identity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    /// Upper bound for every index of the binomial and Kronecker identities.
    pub binomial_max: i64,
    /// Upper bound for the indices of the `Xi`/`Omega` convolutions.
    pub convolution_max: i64,
    /// The scaling relations are checked on `[box_lo, box_hi]` in every index.
    pub box_lo: i64,
    pub box_hi: i64,
    /// Functional identities: `I + J <= order_max`, `K <= k_max`, `L <= l_max`.
    pub order_max: i64,
    pub k_max: i64,
    pub l_max: i64,
    pub points: usize,
    pub seed: u64,
    pub numeric_tol: f64,
    pub chi_tol: f64,
    pub vanishing_tol: f64,
    pub ratio_tol: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            binomial_max: 12,
            convolution_max: 5,
            box_lo: -2,
            box_hi: 6,
            order_max: 4,
            k_max: 3,
            l_max: 2,
            points: 100,
            seed: 0,
            numeric_tol: 1e-9,
            chi_tol: 1e-12,
            vanishing_tol: 1e-10,
            ratio_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub params: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: &'static str,
    pub exact: bool,
    pub ranges: String,
    pub checked: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Instances whose residual exceeds the tolerance.
    pub failures: Vec<Instance>,
    pub instances: Vec<Instance>,
    pub notes: Vec<String>,
}

fn report(which: Identity, ranges: String, tolerance: f64, instances: Vec<Instance>, notes: Vec<String>) -> IdentityReport {
    let max_residual = instances.iter().map(|i| i.residual).fold(0.0, f64::max);
    let failures: Vec<Instance> = instances
        .iter()
        .filter(|i| !(i.residual <= tolerance))
        .cloned()
        .collect();
    IdentityReport {
        identity: which.name(),
        exact: which.is_exact(),
        ranges,
        checked: instances.len(),
        max_residual,
        tolerance,
        passed: failures.is_empty() && !instances.is_empty() && notes.is_empty(),
        failures,
        instances,
        notes,
    }
}

fn exact_instance(params: String, lhs: i128, rhs: i128) -> Instance {
    Instance {
        params,
        residual: (lhs - rhs).unsigned_abs() as f64,
    }
}

fn rat_instance(params: String, lhs: Rat, rhs: Rat) -> Instance {
    let d = lhs - rhs;
    Instance {
        params,
        residual: (*d.numer() as f64 / *d.denom() as f64).abs(),
    }
}

pub fn verify_identity(which: Identity, params: &VerifyParams) -> IdentityReport {
    let p = params;
    match which {
        Identity::KroneckerConvolution => {
            let mut inst = Vec::new();
            for big_i in 0..=p.binomial_max {
                for big_k in 0..=p.binomial_max {
                    for k in 0..=big_k {
                        let lhs: i128 = (0..=big_i).map(|i| kronecker(i - k) * kronecker(big_i - i - (big_k - k))).sum();
                        inst.push(exact_instance(format!("I={big_i},K={big_k},k={k}"), lhs, kronecker(big_i - big_k)));
                    }
                }
            }
            report(which, format!("0 <= I, K <= {}, 0 <= k <= K", p.binomial_max), 0.0, inst, vec![])
        }
        Identity::Vandermonde | Identity::SubsetCount => {
            let mut inst = Vec::new();
            let r = p.binomial_max;
            for l in 0..=r {
                for m in 0..=r {
                    for n in 0..=r {
                        let (lhs, rhs): (i128, i128) = if which == Identity::Vandermonde {
                            ((0..=l).map(|k| binom(m, k) * binom(n, l - k)).sum(), binom(m + n, l))
                        } else {
                            (
                                (0..=l).map(|k| binom(m + k, m) * binom(n + l - k, n)).sum(),
                                binom(l + m + n + 1, m + n + 1),
                            )
                        };
                        inst.push(exact_instance(format!("l={l},m={m},n={n}"), lhs, rhs));
                    }
                }
            }
            report(which, format!("0 <= l, m, n <= {r}"), 0.0, inst, vec![])
        }
        Identity::XiConvolution => {
            // the Xi are constants, so ⊙ is an ordinary product
            let r = p.convolution_max;
            let mut inst = Vec::new();
            for big_k in 2..=r {
                for k in 1..big_k {
                    for big_i in 0..=r {
                        for big_j in 0..=r {
                            for big_l in 0..=r {
                                let mut lhs = 0i128;
                                for i in 0..=big_i {
                                    for j in 0..=big_j {
                                        for l in 0..=big_l {
                                            lhs += coeff_big_xi(i, j, k, l) * coeff_big_xi(big_i - i, big_j - j, big_k - k, big_l - l);
                                        }
                                    }
                                }
                                let rhs = coeff_big_xi(big_i, big_j, big_k, big_l);
                                inst.push(exact_instance(format!("I={big_i},J={big_j},K={big_k},L={big_l},k={k}"), lhs, rhs));
                            }
                        }
                    }
                }
            }
            report(which, format!("0 < k < K <= {r}, 0 <= I, J, L <= {r}"), 0.0, inst, vec![])
        }
        Identity::OmegaConvolution => {
            let r = p.convolution_max;
            let mut inst = Vec::new();
            for big_k in 2..=r + 1 {
                for k in 1..big_k {
                    for a in 0..=r {
                        for b in 0..=r {
                            for c in 0..=r {
                                for d in 0..=r {
                                    let mut lhs = 0i128;
                                    for x in 0..=a {
                                        for y in 0..=b {
                                            for z in 0..=c {
                                                for w in 0..=d {
                                                    lhs += coeff_big_omega(big_k - k, a - x, b - y, c - z, d - w)
                                                        * coeff_big_omega(k, x, y, z, w);
                                                }
                                            }
                                        }
                                    }
                                    let rhs = coeff_big_omega(big_k, a, b, c, d);
                                    inst.push(exact_instance(format!("K={big_k},k={k},A={a},B={b},C={c},D={d}"), lhs, rhs));
                                }
                            }
                        }
                    }
                }
            }
            report(which, format!("0 < k < K <= {}, 0 <= A, B, C, D <= {r}", r + 1), 0.0, inst, vec![])
        }
        Identity::Scaling => {
            let (lo, hi) = (p.box_lo, p.box_hi);
            let mut inst = Vec::new();
            for k in lo..=hi {
                for a in lo..=hi {
                    for b in lo..=hi {
                        for g in lo..=hi {
                            for d in lo..=hi {
                                inst.push(exact_instance(
                                    format!("omega K={k},a={a},b={b},g={g},d={d}"),
                                    (k + g - a) as i128 * coeff_big_omega(k, a, b, g, d),
                                    k as i128 * coeff_omega(k, a, b, g, d),
                                ));
                            }
                            inst.push(rat_instance(
                                format!("xi I={a},J={b},K={k},L={g}"),
                                Rat::from_integer(coeff_big_xi(a, b, k, g)),
                                coeff_xi(a, b, k, g) * Rat::from_integer(k as i128),
                            ));
                        }
                    }
                }
            }
            report(which, format!("all indices in [{lo}, {hi}]"), 0.0, inst, vec![])
        }
        Identity::KeyIdentity | Identity::XiGExchange | Identity::HRecursion | Identity::HgRatio => functional(which, p),
        Identity::ChiProduct | Identity::ChiRealPart => chi_identity(which, p),
        Identity::LowOrderVanishing => low_order(p),
    }
}

/// Runs every identity with the same parameters.
pub fn verify_all(params: &VerifyParams) -> Vec<IdentityReport> {
    Identity::ALL.iter().map(|&w| verify_identity(w, params)).collect()
}

fn point_rng(seed: u64, which: Identity, point: usize) -> ChaCha8Rng {
    let tag = Identity::ALL.iter().position(|&w| w == which).unwrap() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (tag << 48));
    rng.set_stream(point as u64);
    rng
}

type Idx = (i64, i64, i64, i64);

fn index_cases(which: Identity, p: &VerifyParams) -> Vec<(Idx, i64)> {
    let mut out = Vec::new();
    for big_i in 0..=p.order_max {
        for big_j in 0..=(p.order_max - big_i) {
            for big_k in 0..=p.k_max {
                for big_l in 0..=p.l_max {
                    let idx = (big_i, big_j, big_k, big_l);
                    match which {
                        // k runs one step past both ends, into the vanishing branches
                        Identity::KeyIdentity => out.extend((-1..=big_k + 1).map(|k| (idx, k))),
                        Identity::XiGExchange => out.extend((1..=p.k_max).map(|k| (idx, k))),
                        _ => out.push((idx, 0)),
                    }
                }
            }
        }
    }
    out
}

fn sym_pair(
    ev: &FamilyEvaluator,
    left: impl Fn(&FamilyEvaluator, &[f64], &[f64]) -> Result<Complex64>,
    (i, j): (i64, i64),
    right: Idx,
    xs: &[f64],
    ys: &[f64],
) -> Result<Complex64> {
    if i < 0 || j < 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    split_average(xs, ys, i as usize, j as usize, |s, xr, t, yr| {
        let r = ev.big_g(right.0, right.1, right.2, right.3, xr, yr)?;
        if r == Complex64::new(0.0, 0.0) {
            return Ok(r);
        }
        Ok(left(ev, s, t)? * r)
    })
}

/// `(lhs, rhs)` of a functional identity at one point.
fn functional_sides(which: Identity, ev: &FamilyEvaluator, idx: Idx, k: i64, xs: &[f64], ys: &[f64]) -> Result<(Complex64, Complex64)> {
    let (big_i, big_j, big_k, big_l) = idx;
    let zero = Complex64::new(0.0, 0.0);
    match which {
        Identity::KeyIdentity => {
            let mut lhs = zero;
            for i in 0..=big_i {
                for j in 0..=big_j {
                    for l in 0..=big_l {
                        let left = |ev: &FamilyEvaluator, s: &[f64], t: &[f64]| ev.big_g(i, j, k, l, s, t);
                        lhs += sym_pair(ev, left, (i, j), (big_i - i, big_j - j, big_k - k, big_l - l), xs, ys)?;
                    }
                }
            }
            let rhs = if 0 < k && k < big_k { ev.big_g(big_i, big_j, big_k, big_l, xs, ys)? } else { zero };
            Ok((lhs, rhs))
        }
        Identity::XiGExchange => {
            let mut lhs = zero;
            for l in 0..=big_l {
                let xi = coeff_big_xi(k, l, k, l) as f64;
                if xi == 0.0 {
                    continue;
                }
                let left = move |_: &FamilyEvaluator, _: &[f64], _: &[f64]| Ok(Complex64::new(xi, 0.0));
                lhs += sym_pair(ev, left, (k, l), (big_i - k, big_j - l, big_k - k, big_l - l), xs, ys)?;
            }
            let mut rhs = zero;
            for a in 0..=big_i {
                for d in 0..=(big_i - a) {
                    for b in 0..=big_j {
                        for g in 0..=(big_j - b) {
                            if a < g + k {
                                continue;
                            }
                            let w = coeff_big_omega(k, a, b, g, d) as f64;
                            if w == 0.0 {
                                continue;
                            }
                            let left = move |_: &FamilyEvaluator, _: &[f64], _: &[f64]| Ok(Complex64::new(w, 0.0));
                            rhs += sym_pair(ev, left, (a + d, b + g), (big_i - a - d, big_j - b - g, big_k + g - a, big_l - b - d), xs, ys)?;
                        }
                    }
                }
            }
            Ok((lhs, rhs))
        }
        Identity::HRecursion => {
            let lhs = ev.big_h(big_i, big_j, big_k, big_l, xs, ys)?;
            let mut rhs = Complex64::new(coeff_big_xi(big_i, big_j, big_k, big_l) as f64, 0.0);
            for a in 0..=big_i {
                for d in 0..=(big_i - a) {
                    for b in 0..=big_j {
                        for g in 0..=(big_j - b) {
                            let w = coeff_big_omega(big_k, a, b, g, d) as f64;
                            if w == 0.0 {
                                continue;
                            }
                            let left = move |_: &FamilyEvaluator, _: &[f64], _: &[f64]| Ok(Complex64::new(w, 0.0));
                            rhs += sym_pair(ev, left, (a + d, b + g), (big_i - a - d, big_j - b - g, big_k + g - a, big_l - b - d), xs, ys)?;
                        }
                    }
                }
            }
            Ok((lhs, rhs))
        }
        Identity::HgRatio => {
            let lhs = ev.big_h(big_i, big_j, big_k, big_l, xs, ys)?;
            let g = ev.big_g(big_i, big_j, big_k, big_l, xs, ys)?;
            Ok((lhs, g * Complex64::from_polar(1.0, -ev.chi_argument(big_k, xs, ys))))
        }
        _ => unreachable!("not a family identity"),
    }
}

fn functional(which: Identity, p: &VerifyParams) -> IdentityReport {
    let cases = index_cases(which, p);
    let n = p.order_max.max(0) as usize;
    let tol = if which == Identity::HgRatio { p.ratio_tol } else { p.numeric_tol };
    let per_point: Vec<std::result::Result<(Vec<f64>, usize), String>> = (0..p.points)
        .into_par_iter()
        .map(|point| {
            let mut rng = point_rng(p.seed, which, point);
            for _ in 0..MAX_ATTEMPTS {
                let eta = rng.random_range(0.0..TAU);
                let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
                let ys: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
                let ev = FamilyEvaluator::new(eta);
                let mut residuals = Vec::with_capacity(cases.len());
                let mut failed = false;
                for &(idx, k) in &cases {
                    match functional_sides(which, &ev, idx, k, &xs[..idx.0 as usize], &ys[..idx.1 as usize]) {
                        Ok((lhs, rhs)) => residuals.push((lhs - rhs).norm() / rhs.norm().max(1.0)),
                        Err(Error::Singularity { .. }) => {
                            failed = true;
                            break;
                        }
                        Err(e) => return Err(e.to_string()),
                    }
                }
                if !failed && ev.min_chi_distance() >= MIN_CHI_DISTANCE {
                    return Ok((residuals, point));
                }
            }
            Err(format!("no valid sample point after {MAX_ATTEMPTS} attempts"))
        })
        .collect();
    let mut notes = Vec::new();
    let mut worst = vec![0.0f64; cases.len()];
    for r in per_point {
        match r {
            Ok((res, _)) => {
                for (w, r) in worst.iter_mut().zip(res) {
                    *w = if r.is_nan() { f64::NAN } else { w.max(r) };
                }
            }
            Err(e) => notes.push(e),
        }
    }
    let instances = cases
        .iter()
        .zip(worst)
        .map(|(&((i, j, kk, l), k), residual)| Instance {
            params: if which == Identity::KeyIdentity || which == Identity::XiGExchange {
                format!("I={i},J={j},K={kk},L={l},k={k}")
            } else {
                format!("I={i},J={j},K={kk},L={l}")
            },
            residual,
        })
        .collect();
    let ranges = format!(
        "I+J <= {}, 0 <= K <= {}, 0 <= L <= {}, {} random points (max residual over points per instance)",
        p.order_max, p.k_max, p.l_max, p.points
    );
    report(which, ranges, tol, instances, notes)
}

fn valid(args: &[f64]) -> bool {
    args.iter().all(|&a| distance_to_2pi_z(a) >= MIN_CHI_DISTANCE)
}

fn chi_identity(which: Identity, p: &VerifyParams) -> IdentityReport {
    let mut inst = Vec::new();
    let mut notes = Vec::new();
    for point in 0..p.points {
        let mut rng = point_rng(p.seed, which, point);
        let mut done = false;
        for _ in 0..MAX_ATTEMPTS {
            let eta = rng.random_range(0.0..TAU);
            let a = rng.random_range(0.0..TAU);
            let b = rng.random_range(0.0..TAU);
            let residual = match which {
                Identity::ChiProduct => {
                    if !valid(&[eta - a, eta - b, 2.0 * eta - a - b]) {
                        continue;
                    }
                    let (ca, cb) = (chi(eta - a).unwrap(), chi(eta - b).unwrap());
                    let lhs = (1.0 + ca + cb) * chi(2.0 * eta - a - b).unwrap();
                    let rhs = ca * cb;
                    (lhs - rhs).norm() / rhs.norm().max(1.0)
                }
                _ => {
                    if !valid(&[eta - a]) {
                        continue;
                    }
                    (0.5 + chi(eta - a).unwrap()).re.abs()
                }
            };
            inst.push(Instance {
                params: format!("eta={eta:.6},phi_l={a:.6},phi_m={b:.6}"),
                residual,
            });
            done = true;
            break;
        }
        if !done {
            notes.push(format!("point {point}: no valid sample"));
        }
    }
    report(which, format!("{} random points", p.points), p.chi_tol, inst, notes)
}

fn low_order(p: &VerifyParams) -> IdentityReport {
    let which = Identity::LowOrderVanishing;
    let mut inst = Vec::new();
    let mut notes = Vec::new();
    for point in 0..p.points {
        let mut rng = point_rng(p.seed, which, point);
        let mut done = false;
        for _ in 0..MAX_ATTEMPTS {
            let eta = rng.random_range(0.0..TAU);
            let phi = rng.random_range(0.0..TAU);
            let ev = FamilyEvaluator::new(eta);
            let mut row = Vec::new();
            let mut ok = true;
            for big_i in 1..=2 {
                let xs = vec![phi; big_i as usize];
                match ev.f(big_i, big_i, 0, 0, &xs, &xs) {
                    Ok(f) => row.push((big_i, f.re.abs())),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok || ev.min_chi_distance() < MIN_CHI_DISTANCE {
                continue;
            }
            for (big_i, residual) in row {
                inst.push(Instance {
                    params: format!("I={big_i},eta={eta:.6},phi={phi:.6}"),
                    residual,
                });
            }
            done = true;
            break;
        }
        if !done {
            notes.push(format!("point {point}: no valid sample"));
        }
    }
    report(which, format!("I in {{1, 2}}, c = 0, {} random points", p.points), p.vanishing_tol, inst, notes)
}
