//! Orthogonal polynomials with recursion coefficients of generalized bounded variation.
//!
//! The crate covers four layers:
//!
//! * [`sequence`]: coefficient sequences, rotated variation, shift polynomials and
//!   the Bézout filter that isolates one phase of a decomposition;
//! * [`pruefer`]: Prüfer variables for OPUC and OPRL, evolved in log domain and
//!   cross-checked against the polynomials themselves;
//! * [`phase_sets`] and [`expansion`]: the combinatorics of exceptional phases and
//!   the coefficient families of the Taylor expansion of `log r_n`;
//! * [`spectral`]: density approximants, convergence and resonance diagnostics.

pub mod error;
pub mod expansion;
pub mod phase_sets;
pub mod pruefer;
pub mod sequence;
pub mod spectral;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Which family of orthogonal polynomials is meant; `c` is 0 for OPUC and 1 for OPRL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Opuc,
    Oprl,
}

impl Model {
    pub fn c(self) -> u8 {
        match self {
            Model::Opuc => 0,
            Model::Oprl => 1,
        }
    }

    pub fn from_c(c: u8) -> Result<Model> {
        match c {
            0 => Ok(Model::Opuc),
            1 => Ok(Model::Oprl),
            other => Err(Error::Parameter(format!("model constant c must be 0 or 1, got {other}"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Opuc => "opuc",
            Model::Oprl => "oprl",
        })
    }
}
