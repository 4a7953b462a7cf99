use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::scalar::{one_plus_r_ln1p_minus_r, r_minus_ln1p, CompensatedSum, Scalar};

/// Reference function `h` generating the Bregman distance of the proximal step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceFn {
    /// `h(x) = ||x||^2 / 2`.
    SquaredEuclidean,
    /// `h(x) = sum x_i ln x_i` on the nonnegative orthant (`0 ln 0 = 0`).
    Entropy,
    /// `h(x) = -sum ln x_i` on the positive orthant.
    Burg,
    /// `h = 0`; the proximal step collapses to linear minimization.
    Zero,
}

impl fmt::Display for ReferenceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ReferenceFn {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SquaredEuclidean => "squared-euclidean",
            Self::Entropy => "entropy",
            Self::Burg => "burg",
            Self::Zero => "zero",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// Whether `x` lies in the domain on which `h` is finite.
    pub fn in_domain<S: Scalar>(&self, x: &Vector<S>) -> bool {
        match self {
            Self::SquaredEuclidean | Self::Zero => x.is_finite(),
            Self::Entropy => x.iter().all(|&v| v >= S::zero() && v.is_finite()),
            Self::Burg => x.iter().all(|&v| v > S::zero() && v.is_finite()),
        }
    }

    /// Whether `x` lies in the interior where `grad h` exists.
    pub fn in_gradient_domain<S: Scalar>(&self, x: &Vector<S>) -> bool {
        match self {
            Self::Entropy => x.iter().all(|&v| v > S::zero() && v.is_finite()),
            _ => self.in_domain(x),
        }
    }

    fn domain_error(&self) -> Error {
        Error::Domain(format!("reference function `{}`", self.name()))
    }

    pub fn value<S: Scalar>(&self, x: &Vector<S>) -> Result<S> {
        if !self.in_domain(x) {
            return Err(self.domain_error());
        }
        let mut acc = CompensatedSum::new();
        match self {
            Self::SquaredEuclidean => {
                for &v in x.iter() {
                    acc.add(v * v / S::lit(2.0));
                }
            }
            Self::Entropy => {
                for &v in x.iter() {
                    if v > S::zero() {
                        acc.add(v * v.ln());
                    }
                }
            }
            Self::Burg => {
                for &v in x.iter() {
                    acc.add(-v.ln());
                }
            }
            Self::Zero => {}
        }
        Ok(acc.value())
    }

    pub fn gradient<S: Scalar>(&self, x: &Vector<S>) -> Result<Vector<S>> {
        if !self.in_gradient_domain(x) {
            return Err(self.domain_error());
        }
        Ok(match self {
            Self::SquaredEuclidean => x.clone(),
            Self::Entropy => x.map(|v| S::one() + v.ln()),
            Self::Burg => x.map(|v| -v.recip()),
            Self::Zero => Vector::zeros(x.dim()),
        })
    }

    /// Bregman distance `D_h(s, z) = h(s) - h(z) - <grad h(z), s - z>`.
    ///
    /// Evaluated coordinatewise in a form that avoids cancellation when `s`
    /// is close to `z`.
    pub fn bregman<S: Scalar>(&self, s: &Vector<S>, z: &Vector<S>) -> Result<S> {
        z.check_dim(s.dim())?;
        if !self.in_domain(s) || !self.in_gradient_domain(z) {
            return Err(self.domain_error());
        }
        let mut acc = CompensatedSum::new();
        match self {
            Self::SquaredEuclidean => {
                for (&a, &b) in s.iter().zip(z.iter()) {
                    let d = a - b;
                    acc.add(d * d / S::lit(2.0));
                }
            }
            Self::Entropy => {
                for (&a, &b) in s.iter().zip(z.iter()) {
                    if a == S::zero() {
                        acc.add(b);
                    } else {
                        acc.add(b * one_plus_r_ln1p_minus_r((a - b) / b));
                    }
                }
            }
            Self::Burg => {
                for (&a, &b) in s.iter().zip(z.iter()) {
                    acc.add(r_minus_ln1p((a - b) / b));
                }
            }
            Self::Zero => {}
        }
        Ok(acc.value())
    }
}
