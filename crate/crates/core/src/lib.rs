//! Finite-truncation models of Banach Poisson–Lie structures on restricted
//! operator groups: Iwasawa Manin triples, Poisson tensors of unitary and
//! triangular groups, triangular truncation growth, and the Bruhat–Poisson
//! structure of the finite Grassmannian `Gr(N, 2N)` with its Schubert cells.

pub mod error;
pub mod grassmannian;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod operator;
pub mod poisson;
pub mod rng;
pub mod truncation;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use operator::{Op, SchattenExponent, Sign, Tolerance, Window};

/// An absolute residual together with the magnitude it should be compared to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(value: f64, scale: f64) -> Self {
        Self { value, scale }
    }

    pub fn zero() -> Self {
        Self {
            value: 0.0,
            scale: 0.0,
        }
    }

    /// `value / scale`, with an exact zero staying zero.
    pub fn normalized(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.value / self.scale.max(f64::MIN_POSITIVE)
        }
    }

    /// The residual with the larger normalized value.
    pub fn max(self, other: Residual) -> Residual {
        if other.normalized() > self.normalized() {
            other
        } else {
            self
        }
    }
}
