//! Coefficient algebra of the Taylor expansion of `log(r_{n+1}/r_n)`.
//!
//! Exact integer families live in [`coeffs`], the Taylor polynomials of the Prüfer phase
//! increment in [`taylor`], symmetric functions in [`symfn`] and the recursive families
//! `f, g, h, G, H` in [`family`]. [`identities`] checks the relations between them.

pub mod coeffs;
pub mod family;
pub mod identities;
pub mod symfn;
pub mod taylor;

use num_complex::Complex64;

use crate::pruefer::{distance_to_2pi_z, SINGULAR_TOL};
use crate::{Error, Result};

pub use coeffs::{binom, coeff_big_omega, coeff_big_xi, coeff_omega, coeff_xi, coeff_xi_at, kronecker, Rat};
pub use family::{eval_big_g, eval_big_h, eval_f, eval_g, FamilyEvaluator, DEFAULT_MAX_ORDER};
pub use identities::{verify_identity, Identity, IdentityReport, Instance, VerifyParams};
pub use symfn::{sym_product, SymFn};
pub use taylor::{eval_p, remainder_slope, RemainderFit};

/// `chi(eta) = 1/(e^{-i eta} - 1) = -1/2 + (i/2) cot(eta/2)`.
pub fn chi(eta: f64) -> Result<Complex64> {
    if distance_to_2pi_z(eta) < SINGULAR_TOL {
        return Err(Error::Singularity {
            phase: eta,
            tol: SINGULAR_TOL,
            context: "chi".into(),
        });
    }
    Ok(Complex64::new(-0.5, 0.5 / (eta / 2.0).tan()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn chi_values() {
        let z = chi(PI).unwrap();
        assert!((z - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        let z = chi(PI / 2.0).unwrap();
        assert!((z - Complex64::new(-0.5, 0.5)).norm() < 1e-15);
        for eta in [0.1, 1.0, 2.5, -3.0, 7.0] {
            let direct = 1.0 / (Complex64::from_polar(1.0, -eta) - 1.0);
            assert!((chi(eta).unwrap() - direct).norm() < 1e-13);
            assert!((chi(eta).unwrap().re + 0.5).abs() < 1e-15);
        }
        assert!(matches!(chi(0.0), Err(Error::Singularity { .. })));
        assert!(matches!(chi(4.0 * PI + 1e-13), Err(Error::Singularity { .. })));
    }
}
