//! The finite restricted Grassmannian `Gr(N, 2N)`: points, the quotient Poisson
//! tensor, the actions of the unitary and upper triangular groups, Schubert
//! cells, and the `Γ+` multiplication operators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::operator::{phase_fixed_qr, singular_values, CMat, Op, Window, C64};
use crate::poisson::{
    pi_r_bres, pi_r_ures, GroupElement, GroupKind, QuotientCovector, QuotientKind,
};
use crate::{Residual, Sign};

/// An `N`-dimensional subspace of `C^{2N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassPoint {
    window: Window,
    frame: CMat,
    projection: CMat,
}

impl GrassPoint {
    /// Column space of `m` (2N × N, full column rank), re-orthonormalized.
    pub fn from_columns(window: Window, m: &CMat) -> Result<Self> {
        let n = window.half_size();
        if m.nrows() != window.dim() || m.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "frame must be {}x{}, got {}x{}",
                window.dim(),
                n,
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("frame has non-finite entries".into()));
        }
        let s = singular_values(m);
        if s.last().copied().unwrap_or(0.0) <= 1e-12 * s[0].max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidInput(
                "frame columns are linearly dependent".into(),
            ));
        }
        let (q, _) = phase_fixed_qr(m);
        let projection = &q * q.adjoint();
        Ok(Self {
            window,
            frame: q,
            projection,
        })
    }

    /// `H_S = span{|s⟩ : s ∈ S}`.
    pub fn basepoint(window: Window, s: &CellIndex) -> Result<Self> {
        s.validate(window)?;
        let mut m = CMat::zeros(window.dim(), window.half_size());
        for (col, &k) in s.elements().iter().enumerate() {
            m[(window.pos(k), col)] = C64::new(1.0, 0.0);
        }
        Self::from_columns(window, &m)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn projection(&self) -> &CMat {
        &self.projection
    }

    /// `∥P − P'∥_2` (Frobenius).
    pub fn distance(&self, other: &GrassPoint) -> f64 {
        (&self.projection - &other.projection).norm()
    }
}

fn require(g: &GroupElement, kind: GroupKind) -> Result<()> {
    if g.kind() != kind {
        return Err(Error::Domain(format!(
            "expected a {} element, got {}",
            kind.name(),
            g.kind().name()
        )));
    }
    Ok(())
}

/// `gH`: the image of `H+` under `g`, i.e. the first `N` columns.
pub fn point_from_unitary(g: &GroupElement) -> Result<GrassPoint> {
    require(g, GroupKind::URes)?;
    let w = g.window();
    let cols = g.matrix().matrix().columns(0, w.half_size()).into_owned();
    GrassPoint::from_columns(w, &cols)
}

/// Left translation `W ↦ g1 W`.
pub fn act_unitary(g1: &GroupElement, w: &GrassPoint) -> Result<GrassPoint> {
    require(g1, GroupKind::URes)?;
    GrassPoint::from_columns(w.window, &(g1.matrix().matrix() * &w.frame))
}

/// Right action `W·b = b⁻¹W`.
pub fn act_b(b: &GroupElement, w: &GrassPoint) -> Result<GrassPoint> {
    require(b, GroupKind::BResPlus)?;
    GrassPoint::from_columns(w.window, &(b.inverse_matrix().matrix() * &w.frame))
}

/// Left multiplication by an arbitrary invertible operator, e.g. a `Γ+` element.
pub fn act_left(m: &Op, w: &GrassPoint) -> Result<GrassPoint> {
    if m.window() != w.window {
        return Err(Error::WindowMismatch(
            m.window().half_size(),
            w.window.half_size(),
        ));
    }
    GrassPoint::from_columns(w.window, &(m.matrix() * &w.frame))
}

/// `b(Z) = [[0, Z], [0, 0]]`, an element of `h⁰` lying in `b^+`.
pub fn upper_right(window: Window, z: &CMat) -> Result<Op> {
    let n = window.half_size();
    if z.nrows() != n || z.ncols() != n {
        return Err(Error::InvalidInput(format!("block must be {n}x{n}")));
    }
    let zero = CMat::zeros(n, n);
    Op::from_blocks(&zero, z, &zero, &zero)
}

/// Right-trivialized class `[g b(Z) g⁻¹]` modulo `u`.
fn spatial_covector(g: &GroupElement, z: &CMat) -> Result<QuotientCovector> {
    let x = upper_right(g.window(), z)?;
    let m = &(g.matrix() * &x) * &g.inverse_matrix();
    Ok(QuotientCovector::canonical(
        &m,
        QuotientKind::ModU(Sign::Plus),
    ))
}

/// `π^Gr_{gH}(α, β) = Π_r^{U_res}(g)([g b(Z1) g⁻¹], [g b(Z2) g⁻¹])`, where the
/// cotangent vectors are left-trivialized by the blocks `Z_i` (`x_i = b(Z_i) ∈ h⁰`).
///
/// Under `g ↦ g·diag(h1, h2)` the same cotangent vector has block `h1* Z h2`.
pub fn pi_grassmannian(g: &GroupElement, z1: &CMat, z2: &CMat) -> Result<f64> {
    require(g, GroupKind::URes)?;
    pi_r_ures(g, &spatial_covector(g, z1)?, &spatial_covector(g, z2)?)
}

/// `|π^Gr(g·h, h1*Z1h2, h1*Z2h2) − π^Gr(g, Z1, Z2)|` for `h = diag(h1, h2)` unitary.
pub fn h_invariance_residual(
    g: &GroupElement,
    h1: &CMat,
    h2: &CMat,
    z1: &CMat,
    z2: &CMat,
) -> Result<Residual> {
    let w = g.window();
    let zero = CMat::zeros(w.half_size(), w.half_size());
    let h = GroupElement::new(GroupKind::URes, Op::from_blocks(h1, &zero, &zero, h2)?)?;
    let gh = g.mul(&h)?;
    let moved = |z: &CMat| h1.adjoint() * z * h2;
    let a = pi_grassmannian(&gh, &moved(z1), &moved(z2))?;
    let b = pi_grassmannian(g, z1, z2)?;
    Ok(Residual::new((a - b).abs(), a.abs() + b.abs()))
}

/// `m = g1·p1` with `g1` unitary and `p1` upper triangular (hence in `P_res`).
pub fn iwasawa_factor(m: &Op) -> Result<(GroupElement, Op)> {
    let (q, r) = phase_fixed_qr(m.matrix());
    let g1 = GroupElement::new(GroupKind::URes, Op::new(m.window(), q)?)?;
    Ok((g1, Op::new(m.window(), r)?))
}

/// Terms of the Poisson action identity for `B^+` on the Grassmannian:
/// `π^Gr_{b⁻¹gP}(α,β) = π^Gr_{gH}(L*α, L*β) + Π_r^{B^+}(b)([g b(Z1) g⁻¹], [g b(Z2) g⁻¹])`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionTerms {
    pub lhs: f64,
    pub grassmannian_term: f64,
    pub group_term: f64,
}

impl ActionTerms {
    pub fn residual(&self) -> Residual {
        Residual::new(
            (self.lhs - self.grassmannian_term - self.group_term).abs(),
            self.lhs.abs() + self.grassmannian_term.abs() + self.group_term.abs(),
        )
    }
}

pub fn poisson_action_terms(
    b: &GroupElement,
    g: &GroupElement,
    z1: &CMat,
    z2: &CMat,
) -> Result<ActionTerms> {
    require(b, GroupKind::BResPlus)?;
    require(g, GroupKind::URes)?;
    let w = g.window();
    let m = &b.inverse_matrix() * g.matrix();
    let m_inv = m.inverse()?;
    let (g1, _) = iwasawa_factor(&m)?;
    // Pulled-back covectors at b⁻¹g, right-trivialized at g1.
    let pulled = |z: &CMat| -> Result<QuotientCovector> {
        let x = upper_right(w, z)?;
        Ok(QuotientCovector::canonical(
            &(&(&m * &x) * &m_inv),
            QuotientKind::ModU(Sign::Plus),
        ))
    };
    let lhs = pi_r_ures(&g1, &pulled(z1)?, &pulled(z2)?)?;
    let grassmannian_term = pi_grassmannian(g, z1, z2)?;
    let b_cov = |z: &CMat| -> Result<QuotientCovector> {
        let x = upper_right(w, z)?;
        let spatial = &(g.matrix() * &x) * &g.inverse_matrix();
        Ok(QuotientCovector::canonical(
            &spatial,
            QuotientKind::ModB(Sign::Plus),
        ))
    };
    let group_term = pi_r_bres(b, &b_cov(z1)?, &b_cov(z2)?)?;
    Ok(ActionTerms {
        lhs,
        grassmannian_term,
        group_term,
    })
}

pub fn poisson_action_residual(
    b: &GroupElement,
    g: &GroupElement,
    z1: &CMat,
    z2: &CMat,
) -> Result<Residual> {
    Ok(poisson_action_terms(b, g, z1, z2)?.residual())
}

/// A subset `S` of the window with `|S| = N`, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex(Vec<i64>);

impl CellIndex {
    pub fn new(mut s: Vec<i64>) -> Self {
        s.sort_unstable();
        s.dedup();
        Self(s)
    }

    pub fn elements(&self) -> &[i64] {
        &self.0
    }

    pub fn contains(&self, k: i64) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    pub fn validate(&self, window: Window) -> Result<()> {
        if self.0.len() != window.half_size() {
            return Err(Error::InvalidInput(format!(
                "cell index needs {} elements, got {}",
                window.half_size(),
                self.0.len()
            )));
        }
        if let Some(k) = self.0.iter().find(|&&k| !window.contains(k)) {
            return Err(Error::InvalidInput(format!("index {k} outside the window")));
        }
        Ok(())
    }

    /// `{0, …, N−1}`: the basepoint `H+`.
    pub fn top(window: Window) -> Self {
        Self((0..window.half_size() as i64).collect())
    }

    /// Image under `n ↦ −1−n`, which swaps `H+` and `H−`.
    pub fn reflected(&self) -> Self {
        Self::new(self.0.iter().map(|s| -1 - s).collect())
    }

    /// All `C(2N, N)` subsets, in lexicographic order.
    pub fn enumerate(window: Window) -> Vec<CellIndex> {
        let idx: Vec<i64> = window.indices().collect();
        let n = window.half_size();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn rec(idx: &[i64], start: usize, n: usize, cur: &mut Vec<i64>, out: &mut Vec<CellIndex>) {
            if cur.len() == n {
                out.push(CellIndex(cur.clone()));
                return;
            }
            for i in start..idx.len() {
                if idx.len() - i < n - cur.len() {
                    break;
                }
                cur.push(idx[i]);
                rec(idx, i + 1, n, cur, out);
                cur.pop();
            }
        }
        rec(&idx, 0, n, &mut cur, &mut out);
        out
    }
}

/// Default rank tolerance relative to the leading singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// `S = {k : dim(W ∩ F_k) > dim(W ∩ F_{k+1})}` with `F_k = span{|m⟩ : m ≥ k}`.
///
/// `dim(W ∩ F_k) = N − rank` of the frame rows outside `F_k`.
pub fn cell_index_of(w: &GrassPoint, rank_tol: f64) -> Result<CellIndex> {
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidInput(
            "rank tolerance must be positive".into(),
        ));
    }
    let window = w.window;
    let n = window.half_size();
    let smax = singular_values(&w.frame)[0];
    let tol = rank_tol * smax;
    // dims[k + N] = dim(W ∩ F_k) for k = −N … N.
    let mut dims = Vec::with_capacity(2 * n + 1);
    for k in window.indices().chain(std::iter::once(n as i64)) {
        // Rows outside F_k are positions N−k … 2N−1.
        let first = (n as i64 - k) as usize;
        let rank = if first >= 2 * n {
            0
        } else {
            let sub = w.frame.rows(first, 2 * n - first).into_owned();
            let mut r = 0;
            for s in singular_values(&sub) {
                if s > tol / 10.0 && s < tol * 10.0 {
                    return Err(Error::AmbiguousCell { sigma: s, tol });
                }
                if s >= tol * 10.0 {
                    r += 1;
                }
            }
            r
        };
        dims.push(n - rank.min(n));
    }
    let s: Vec<i64> = window
        .indices()
        .filter(|&k| dims[(k + n as i64) as usize] > dims[(k + n as i64 + 1) as usize])
        .collect();
    let idx = CellIndex(s);
    idx.validate(window)?;
    Ok(idx)
}

/// Pairs `(s, m)` with `s ∈ S`, `m ∉ S`, `m > s`: complex dimension of the cell.
pub fn cell_dimension(s: &CellIndex, window: Window) -> usize {
    window
        .indices()
        .filter(|m| !s.contains(*m))
        .map(|m| s.elements().iter().filter(|&&x| m > x).count())
        .sum()
}

/// Pairs with `m < s`: codimension of the cell, the dimension of the stratum.
pub fn stratum_codim_complement(s: &CellIndex, window: Window) -> usize {
    window
        .indices()
        .filter(|m| !s.contains(*m))
        .map(|m| s.elements().iter().filter(|&&x| m < x).count())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transversality {
    pub dim_plus: usize,
    pub dim_minus: usize,
    pub intersection_dim: usize,
}

/// Orthonormal basis of `W⊥`.
fn complement_frame(w: &GrassPoint) -> CMat {
    let n = w.window.half_size();
    let dim = w.window.dim();
    let comp = CMat::identity(dim, dim) - &w.projection;
    let u = svd(&comp).u;
    CMat::from_fn(dim, n, |r, c| u[(r, c)])
}

fn complex_rank(rows: &[Vec<C64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = CMat::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
    let s = singular_values(&m);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > tol * smax.max(1.0)).count()
}

/// Tangent vectors `Q⊥* ξ F` of the orbit through `W` for the complexified Lie
/// algebra of `B^±`, spanned by `E_{ab}` with `a ≥ b` (`+`) or `a ≤ b` (`−`).
fn orbit_tangents(w: &GrassPoint, comp: &CMat, sign: Sign) -> Vec<Vec<C64>> {
    let window = w.window;
    let dim = window.dim();
    let mut out = Vec::new();
    for r in 0..dim {
        for c in 0..dim {
            // Index a at row r, b at column c; a ≥ b ⟺ r ≤ c.
            let keep = match sign {
                Sign::Plus => r <= c,
                Sign::Minus => r >= c,
            };
            if !keep {
                continue;
            }
            // Q⊥* E_{rc} F = (row r of Q⊥*)ᵀ ⊗ (row c of F).
            let mut v = Vec::with_capacity(comp.ncols() * w.frame.ncols());
            for i in 0..comp.ncols() {
                for j in 0..w.frame.ncols() {
                    v.push(comp[(r, i)].conj() * w.frame[(c, j)]);
                }
            }
            out.push(v);
        }
    }
    out
}

/// Tangent dimensions at `H_S` of the `B^+` and `B^−` orbits and of their intersection.
pub fn transversality_check(s: &CellIndex, window: Window) -> Result<Transversality> {
    let w = GrassPoint::basepoint(window, s)?;
    Ok(tangent_dimensions(&w))
}

pub fn tangent_dimensions(w: &GrassPoint) -> Transversality {
    let comp = complement_frame(w);
    let plus = orbit_tangents(w, &comp, Sign::Plus);
    let minus = orbit_tangents(w, &comp, Sign::Minus);
    let tol = 1e-10;
    let dim_plus = complex_rank(&plus, tol);
    let dim_minus = complex_rank(&minus, tol);
    let joint: Vec<Vec<C64>> = plus.into_iter().chain(minus).collect();
    let joint_rank = complex_rank(&joint, tol);
    Transversality {
        dim_plus,
        dim_minus,
        intersection_dim: dim_plus + dim_minus - joint_rank,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "S")]
    pub s: Vec<i64>,
    pub dim: usize,
    pub dim_minus: usize,
    pub intersection_dim: usize,
}

pub fn census(window: Window) -> Result<Vec<CellRecord>> {
    CellIndex::enumerate(window)
        .into_iter()
        .map(|s| {
            let t = transversality_check(&s, window)?;
            Ok(CellRecord {
                n: window.half_size(),
                s: s.elements().to_vec(),
                dim: cell_dimension(&s, window),
                dim_minus: t.dim_minus,
                intersection_dim: t.intersection_dim,
            })
        })
        .collect()
}

/// `exp(T_f)` with `(T_f)|n⟩ = Σ_k f_k |n+k⟩` truncated to the window.
///
/// `T_f` is strictly upper triangular, so the exponential series terminates and
/// is summed exactly.
pub fn gamma_plus_operator(coeffs: &[C64], window: Window) -> Result<GroupElement> {
    let dim = window.dim();
    if coeffs.len() >= dim {
        return Err(Error::InvalidInput(format!(
            "need fewer than {dim} coefficients, got {}",
            coeffs.len()
        )));
    }
    let mut t = CMat::zeros(dim, dim);
    for (k, f) in coeffs.iter().enumerate() {
        let shift = k + 1;
        for c in shift..dim {
            t[(c - shift, c)] = *f;
        }
    }
    let mut sum = CMat::identity(dim, dim);
    let mut term = CMat::identity(dim, dim);
    for j in 1..dim {
        term = &term * &t / C64::new(j as f64, 0.0);
        if term.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            break;
        }
        sum += &term;
    }
    GroupElement::new(GroupKind::BResPlus, Op::new(window, sum)?)
}

/// `max |(M_f M_{f'} − M_{f+f'})_{rc}|` over the upper-left `(2N−K)²` block.
pub fn gamma_homomorphism_error(f: &[C64], f2: &[C64], window: Window) -> Result<f64> {
    let k = f.len().max(f2.len());
    let mut sum = vec![C64::new(0.0, 0.0); k];
    for (i, z) in f.iter().enumerate() {
        sum[i] += z;
    }
    for (i, z) in f2.iter().enumerate() {
        sum[i] += z;
    }
    let a = gamma_plus_operator(f, window)?;
    let b = gamma_plus_operator(f2, window)?;
    let c = gamma_plus_operator(&sum, window)?;
    let prod = a.matrix().matrix() * b.matrix().matrix();
    let keep = window.dim() - k;
    let diff: DMatrix<C64> = (prod - c.matrix().matrix())
        .view((0, 0), (keep, keep))
        .into_owned();
    Ok(diff.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
