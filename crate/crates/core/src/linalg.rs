//! Dense singular value decompositions, delegated to `faer`.
//!
//! The complex SVD in `nalgebra` loses accuracy on rank-deficient matrices with
//! repeated singular values (projector complements, truncated witnesses), so
//! every decomposition in this crate goes through these wrappers.

use faer::Mat;
use nalgebra::DMatrix;

use crate::operator::{CMat, C64};

fn to_faer<T: Copy>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// `m = U diag(s) V*` with `s` nonincreasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

/// Full SVD of a complex matrix.
pub fn svd(m: &CMat) -> Svd {
    if m.is_empty() {
        return Svd {
            u: CMat::identity(m.nrows(), m.nrows()),
            s: Vec::new(),
            v: CMat::identity(m.ncols(), m.ncols()),
        };
    }
    let f = to_faer(m);
    let d = f.svd().expect("SVD of a finite matrix converges");
    let u = d.U();
    let v = d.V();
    let s = d
        .S()
        .column_vector()
        .iter()
        .copied()
        .map(|z: C64| z.re)
        .collect();
    Svd {
        u: CMat::from_fn(u.nrows(), u.ncols(), |r, c| u[(r, c)]),
        s,
        v: CMat::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)]),
    }
}

/// Singular values of a complex matrix, nonincreasing.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m)
        .singular_values()
        .expect("SVD of a finite matrix converges")
}

/// Singular values of a real matrix, nonincreasing.
pub fn singular_values_real(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m)
        .singular_values()
        .expect("SVD of a finite matrix converges")
}
