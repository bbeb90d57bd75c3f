//! Triangular truncations, Iwasawa projections, and the truncation growth experiment.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::operator::{
    schatten_norm, singular_values, CMat, Op, SchattenExponent, Sign, Window, C64, I,
};

/// Entry masks in the `⟨m|T(A)|n⟩` semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TruncationKind {
    /// `T_-`: keeps `m ≤ n` (lower triangle with diagonal).
    Lower,
    /// `T_{++}`: keeps `m > n`.
    StrictUpper,
    /// `T_+ = T_{++} + D`.
    Upper,
    /// `T_{--} = T_- - D`.
    StrictLower,
    /// `D`.
    Diagonal,
}

impl TruncationKind {
    pub const ALL: [TruncationKind; 5] = [
        Self::Lower,
        Self::StrictUpper,
        Self::Upper,
        Self::StrictLower,
        Self::Diagonal,
    ];

    /// Whether stored position `(r, c)` survives.
    fn keeps(self, r: usize, c: usize) -> bool {
        match self {
            Self::Lower => r >= c,
            Self::StrictUpper => r < c,
            Self::Upper => r <= c,
            Self::StrictLower => r > c,
            Self::Diagonal => r == c,
        }
    }

    /// Adjoint under the trace pairing: `Tr(T(A) B) = Tr(A T'(B))`.
    pub fn trace_dual(self) -> Self {
        match self {
            Self::Lower => Self::Upper,
            Self::Upper => Self::Lower,
            Self::StrictUpper => Self::StrictLower,
            Self::StrictLower => Self::StrictUpper,
            Self::Diagonal => Self::Diagonal,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Lower => "lower",
            Self::StrictUpper => "strict_upper",
            Self::Upper => "upper",
            Self::StrictLower => "strict_lower",
            Self::Diagonal => "diagonal",
        }
    }
}

pub fn truncate_matrix(m: &CMat, k: TruncationKind) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| {
        if k.keeps(r, c) {
            m[(r, c)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn truncate(a: &Op, k: TruncationKind) -> Op {
    Op::new(a.window(), truncate_matrix(a.matrix(), k)).expect("shape preserved")
}

/// `p_{u,+}(A) = T_{--}(A) - T_{--}(A)* + ½(D(A) - D(A)*)`, and the mirror image for `-`.
pub fn project_u(a: &Op, sign: Sign) -> Op {
    let off = match sign {
        Sign::Plus => TruncationKind::StrictLower,
        Sign::Minus => TruncationKind::StrictUpper,
    };
    let t = truncate(a, off);
    let d = truncate(a, TruncationKind::Diagonal);
    let half_skew = (&d - &d.adjoint()).scale_re(0.5);
    &(&t - &t.adjoint()) + &half_skew
}

/// Complement `A - p_u(A)`: triangular per sign with real diagonal.
pub fn project_b(a: &Op, sign: Sign) -> Op {
    a - &project_u(a, sign)
}

/// `A = u_part + b_part` with `u_part ∈ u`, `b_part ∈ b^±`.
#[derive(Clone, Debug, PartialEq)]
pub struct IwasawaSplit {
    pub u_part: Op,
    pub b_part: Op,
    pub sign: Sign,
}

pub fn iwasawa_split(a: &Op, sign: Sign) -> IwasawaSplit {
    let u_part = project_u(a, sign);
    let b_part = a - &u_part;
    IwasawaSplit {
        u_part,
        b_part,
        sign,
    }
}

/// Exact membership in `b^±`: zero opposite triangle, real diagonal.
pub fn is_in_b(a: &Op, sign: Sign, tol: f64) -> bool {
    let m = a.matrix();
    let n = m.nrows();
    (0..n).all(|r| {
        (0..n).all(|c| {
            let z = m[(r, c)];
            let wrong_side = match sign {
                Sign::Plus => r > c,
                Sign::Minus => r < c,
            };
            if wrong_side {
                z.norm() <= tol
            } else if r == c {
                z.im.abs() <= tol
            } else {
                true
            }
        })
    })
}

/// `∥T(A)∥_e / ∥A∥_e`.
pub fn truncation_operator_ratio(a: &Op, k: TruncationKind, e: SchattenExponent) -> Result<f64> {
    let den = schatten_norm(a, e)?;
    if den == 0.0 {
        return Err(Error::Domain(
            "ratio undefined for the zero operator".into(),
        ));
    }
    Ok(schatten_norm(&truncate(a, k), e)? / den)
}

/// Skew Cauchy matrix `a_{jk} = 1/(j-k)` for `j ≠ k` over the window indices.
pub fn cauchy_witness(window: Window) -> Op {
    Op::from_fn(window, |j, k| {
        if j == k {
            C64::new(0.0, 0.0)
        } else {
            C64::new(1.0 / (j - k) as f64, 0.0)
        }
    })
}

/// Rank-one trace-class partner of the Cauchy witness for truncation `k`.
///
/// With `σ, u, v` the leading singular triple of `T'(C)` (`T'` the trace dual of
/// `k`), `A = v u*` has `∥A∥_1 = 1` and `Tr(T(A) C) = σ`, so
/// `∥T(A)∥_1 ≥ σ / ∥C∥_∞`.
pub fn cauchy_dual_witness(window: Window, k: TruncationKind) -> Op {
    let c = cauchy_witness(window);
    let t = truncate(&c, k.trace_dual()).into_matrix();
    let d = svd(&t);
    let u = d.u.column(0).into_owned();
    let v = d.v.column(0).into_owned();
    Op::new(window, &v * u.adjoint()).expect("shape preserved")
}

/// The test family evaluated by the growth experiment.
pub fn witness_family(window: Window, k: TruncationKind) -> Vec<(&'static str, Op)> {
    vec![
        ("cauchy", cauchy_witness(window)),
        ("cauchy_dual", cauchy_dual_witness(window, k)),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub ratio: f64,
    pub norm_kind: String,
    pub trunc_kind: String,
    pub seed: u64,
}

/// Max over the witness family of `∥T(A)∥_e/∥A∥_e` for each window half size.
pub fn growth_experiment(
    n_list: &[usize],
    e: SchattenExponent,
    k: TruncationKind,
    seed: u64,
) -> Result<Vec<GrowthRow>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "N list must be strictly ascending".into(),
        ));
    }
    let ratios: Vec<Result<f64>> = n_list
        .par_iter()
        .map(|&n| {
            let w = Window::new(n)?;
            let mut best = f64::NEG_INFINITY;
            for (_, a) in witness_family(w, k) {
                best = best.max(truncation_operator_ratio(&a, k, e)?);
            }
            Ok(best)
        })
        .collect();
    n_list
        .iter()
        .zip(ratios)
        .map(|(&n, r)| {
            Ok(GrowthRow {
                n,
                ratio: r?,
                norm_kind: e.label(),
                trunc_kind: k.label().into(),
                seed,
            })
        })
        .collect()
}

/// Commutator form of the unboundedness witness on `H+` of dimension `2m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorWitness {
    pub m: usize,
    /// `∥T_+([x,y]|_{H+})∥_1`
    pub truncated_commutator_norm: f64,
    /// `2∥T_+(K)∥_1`
    pub twice_truncated_k_norm: f64,
    /// `∥x|_{H+}∥_1 = 2∥K∥_1`
    pub x_norm: f64,
}

/// Hermitian Hilbert-type matrix `i·C` of size `m`.
pub fn hermitian_cauchy(m: usize) -> CMat {
    CMat::from_fn(m, m, |r, c| {
        if r == c {
            C64::new(0.0, 0.0)
        } else {
            // Positions list decreasing indices, so j - k = c - r.
            I * (1.0 / (c as f64 - r as f64))
        }
    })
}

/// Builds `x|_{H+} = [[0, uK], [-K*u*, 0]]` and `y = u` on the source sublattice,
/// where `H+` (dimension `2m`, positions in decreasing index order) splits into
/// sources `|2j⟩` and targets `|2j+1⟩` with the half shift `u|2j⟩ = |2j+1⟩`.
/// Then `[x,y]|_{H+} = diag(uK*u*, -K*)` and `T_+` acts blockwise.
pub fn commutator_witness(m: usize) -> Result<CommutatorWitness> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let dim = 2 * m;
    let k = hermitian_cauchy(m);
    // Indices n = 2m-1 … 0 at positions 0 … 2m-1. Target |2j+1⟩ sits at
    // position 2(m-1-j), source |2j⟩ at 2(m-1-j)+1; both sublattices keep the
    // decreasing order, and sublattice position p ↔ j = m-1-p.
    let tgt = |p: usize| 2 * p;
    let src = |p: usize| 2 * p + 1;
    let zero = C64::new(0.0, 0.0);
    let mut x = CMat::from_element(dim, dim, zero);
    let mut y = CMat::from_element(dim, dim, zero);
    let uk = &k; // u identifies source and target sublattices position-wise.
    let neg_kstar = -k.adjoint();
    for a in 0..m {
        y[(tgt(a), src(a))] = C64::new(1.0, 0.0);
        for b in 0..m {
            x[(tgt(a), src(b))] = uk[(a, b)];
            x[(src(a), tgt(b))] = neg_kstar[(a, b)];
        }
    }
    let comm = &x * &y - &y * &x;
    let trace_norm = |mm: &CMat| singular_values(mm).iter().sum::<f64>();
    Ok(CommutatorWitness {
        m,
        truncated_commutator_norm: trace_norm(&truncate_matrix(&comm, TruncationKind::Upper)),
        twice_truncated_k_norm: 2.0 * trace_norm(&truncate_matrix(&k, TruncationKind::Upper)),
        x_norm: trace_norm(&x),
    })
}
