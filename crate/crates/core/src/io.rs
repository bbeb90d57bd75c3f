//! Matrix exchange format: `{"N": half_size, "rows": [[[re, im], …], …]}`.
//!
//! Operators are `2N × 2N`; Grassmannian frames are `2N × N`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{CMat, Op, Window, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(n: usize, m: &CMat) -> Self {
        let rows = (0..m.nrows())
            .map(|r| {
                (0..m.ncols())
                    .map(|c| [m[(r, c)].re, m[(r, c)].im])
                    .collect()
            })
            .collect();
        Self { n, rows }
    }

    pub fn from_op(op: &Op) -> Self {
        Self::from_matrix(op.window().half_size(), op.matrix())
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(self.n)
    }

    /// Dense matrix; every row must have the same length.
    pub fn to_matrix(&self) -> Result<CMat> {
        let nrows = self.rows.len();
        let ncols = self.rows.first().map(|r| r.len()).unwrap_or(0);
        if nrows == 0 || ncols == 0 {
            return Err(Error::InvalidInput("matrix file has no entries".into()));
        }
        if self.rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidInput("ragged rows in matrix file".into()));
        }
        Ok(CMat::from_fn(nrows, ncols, |r, c| {
            C64::new(self.rows[r][c][0], self.rows[r][c][1])
        }))
    }

    pub fn to_op(&self) -> Result<Op> {
        Op::new(self.window()?, self.to_matrix()?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad matrix file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}
