//! JSON descriptions of coefficient sequences.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{rotated_power, wigner_von_neumann, CoeffSequence, GBVDecomposition, RotatedBVComponent, TailBound};
use crate::error::{Error, Result};

/// One cosine term `lambda cos(n phi + alpha) / n^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WvnTerm {
    pub lambda: f64,
    pub phi: f64,
    #[serde(default)]
    pub alpha: f64,
    pub gamma: f64,
}

/// One term `(re + i im) e^{-i n phi} (n + shift)^{-exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub phi: f64,
    pub exponent: f64,
    #[serde(default)]
    pub shift: usize,
}

/// A real summable perturbation `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum L1Tail {
    /// `W_{start + k} = values[k]`, zero elsewhere.
    Finite { start: usize, values: Vec<f64> },
    /// `W_n = amplitude / n^exponent` with `exponent > 1`.
    PowerDecay { amplitude: f64, exponent: f64 },
}

impl L1Tail {
    /// The tail as a phase-0 component, supported on `n >= n0`.
    ///
    /// Its rotated variation is at most `2 ||W||_1`.
    pub fn component(&self, n0: usize) -> Result<RotatedBVComponent> {
        match self {
            L1Tail::Finite { start, values } => {
                let first = (*start).max(n0);
                let vals: Vec<f64> = (first..start + values.len())
                    .map(|n| values[n - start])
                    .collect();
                let l1: f64 = vals.iter().map(|v| v.abs()).sum();
                let bound = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let owned = Arc::new(vals);
                let seq_vals = owned.clone();
                let seq = CoeffSequence::new(0, move |n| {
                    if n < first {
                        return Complex64::new(0.0, 0.0);
                    }
                    Complex64::new(seq_vals.get(n - first).copied().unwrap_or(0.0), 0.0)
                })
                .with_bound(bound);
                // each step n -> n+1 costs at most |W_n| + |W_{n+1}|
                let tail: TailBound = Arc::new(move |m| {
                    let from = m.saturating_sub(first);
                    2.0 * owned.iter().skip(from).map(|v| v.abs()).sum::<f64>()
                });
                Ok(RotatedBVComponent::certified(seq, 0.0, 2.0 * l1, tail))
            }
            L1Tail::PowerDecay {
                amplitude,
                exponent,
            } => {
                if !(*exponent > 1.0) {
                    return Err(Error::Parameter(format!(
                        "tail exponent must exceed 1 for summability, got {exponent}"
                    )));
                }
                let n0 = n0.max(1);
                let (a, q) = (*amplitude, *exponent);
                let seq = CoeffSequence::new(0, move |n| {
                    if n < n0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(a * (n as f64).powf(-q), 0.0)
                    }
                })
                .with_bound(a.abs() * (n0 as f64).powf(-q));
                // sum_{n >= m} n^{-q} <= m^{-q} + m^{1-q}/(q-1)
                let l1_from = move |m: usize| {
                    let m = m.max(n0) as f64;
                    a.abs() * (m.powf(-q) + m.powf(1.0 - q) / (q - 1.0))
                };
                let tail: TailBound = Arc::new(move |m| 2.0 * l1_from(m));
                Ok(RotatedBVComponent::certified(seq, 0.0, 2.0 * l1_from(n0), tail))
            }
        }
    }
}

/// A sequence description as found in experiment files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// Wigner–von Neumann potential with optional summable tail.
    Wvn {
        terms: Vec<WvnTerm>,
        #[serde(default = "one")]
        n0: usize,
        #[serde(default)]
        tail: Option<L1Tail>,
    },
    /// Sum of rotated power laws.
    RotatedPower {
        terms: Vec<PowerTerm>,
        #[serde(default = "one")]
        n0: usize,
    },
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Zero,
}

fn one() -> usize {
    1
}

impl SequenceSpec {
    /// Evaluates the description into a sequence and its decomposition.
    pub fn build(&self) -> Result<(CoeffSequence, GBVDecomposition)> {
        match self {
            SequenceSpec::Wvn { terms, n0, tail } => wigner_von_neumann(terms, tail.as_ref(), *n0),
            SequenceSpec::RotatedPower { terms, n0 } => {
                let comps = terms
                    .iter()
                    .map(|t| rotated_power(Complex64::new(t.re, t.im), t.phi, t.exponent, *n0, t.shift))
                    .collect::<Result<Vec<_>>>()?;
                let d = GBVDecomposition::new(comps);
                Ok((d.represented(), d))
            }
            SequenceSpec::Constant { re, im } => {
                let seq = CoeffSequence::constant(0, Complex64::new(*re, *im));
                let tail: TailBound = Arc::new(|_| 0.0);
                let comp = RotatedBVComponent::certified(seq.clone(), 0.0, 0.0, tail);
                Ok((seq, GBVDecomposition::new(vec![comp])))
            }
            SequenceSpec::Zero => Ok((CoeffSequence::zero(0), GBVDecomposition::default())),
        }
    }

    /// Phases of the decomposition this description produces.
    pub fn phases(&self) -> Result<Vec<f64>> {
        Ok(self.build()?.1.phases())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_wvn_form() {
        let s: SequenceSpec = serde_json::from_str(
            r#"{"type":"wvn","terms":[{"lambda":1.0,"phi":1.5707963267948966,"alpha":0.0,"gamma":1.0}],"n0":1}"#,
        )
        .unwrap();
        let (v, d) = s.build().unwrap();
        assert!((v.at(2).re + 0.5).abs() < 1e-15);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn rejects_unknown_fields() {
        let r: std::result::Result<SequenceSpec, _> =
            serde_json::from_str(r#"{"type":"wvn","terms":[],"nO":1}"#);
        assert!(r.is_err());
        let r: std::result::Result<SequenceSpec, _> = serde_json::from_str(
            r#"{"type":"wvn","terms":[{"lambda":1,"phi":1,"gamma":1,"beta":2}]}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn rotated_power_roundtrip() {
        let s = SequenceSpec::RotatedPower {
            terms: vec![PowerTerm {
                re: 0.5,
                im: 0.0,
                phi: 1.0,
                exponent: 1.0,
                shift: 0,
            }],
            n0: 2,
        };
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains(r#""type":"rotated_power""#));
        let back: SequenceSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let (seq, _) = back.build().unwrap();
        assert_eq!(seq.at(1), Complex64::new(0.0, 0.0));
        assert!((seq.at(2).norm() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn tails_certify() {
        for tail in [
            L1Tail::Finite {
                start: 3,
                values: vec![1.0, -2.0, 0.5],
            },
            L1Tail::PowerDecay {
                amplitude: -0.7,
                exponent: 2.0,
            },
        ] {
            let c = tail.component(1).unwrap();
            let cert = c.certify(20_000).unwrap();
            assert!(cert.certified, "{tail:?}: {cert:?}");
        }
        assert!(L1Tail::PowerDecay {
            amplitude: 1.0,
            exponent: 1.0
        }
        .component(1)
        .is_err());
    }
}
