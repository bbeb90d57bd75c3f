//! Iwasawa Manin triples `gl = u ⊕ b^±` with the pairing `Im Tr(xy)`,
//! coadjoint actions, the bialgebra cocycle condition, and Lie–Poisson brackets.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::singular_values_real;
use crate::operator::{
    bracket, random_op, schatten_norm, CMat, Ensemble, Op, SchattenExponent, Sign, Window, C64, I,
};
use crate::rng;
use crate::truncation::{is_in_b, project_b, project_u};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingKind {
    /// `Im Tr(xy)`
    ImTr,
    /// `Tr(xy)`
    ReTrC,
}

/// `Tr(xy)` without forming the product.
pub fn trace_product(x: &CMat, y: &CMat) -> C64 {
    let n = x.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += x[(i, j)] * y[(j, i)];
        }
    }
    s
}

pub fn im_tr(x: &Op, y: &Op) -> f64 {
    trace_product(x.matrix(), y.matrix()).im
}

/// `ImTr` returns a real value in the real part.
pub fn pairing(x: &Op, y: &Op, kind: PairingKind) -> Result<C64> {
    x.check_window(y)?;
    let t = trace_product(x.matrix(), y.matrix());
    Ok(match kind {
        PairingKind::ImTr => C64::new(t.im, 0.0),
        PairingKind::ReTrC => t,
    })
}

fn membership_tol(a: &Op) -> f64 {
    1e-9 * (1.0 + a.max_abs())
}

fn require_u(x: &Op, what: &str) -> Result<()> {
    if x.is_skew_hermitian(membership_tol(x)) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be skew-Hermitian")))
    }
}

fn require_b(a: &Op, sign: Sign, what: &str) -> Result<()> {
    if is_in_b(a, sign, membership_tol(a)) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what} must be triangular ({sign:?}) with real diagonal"
        )))
    }
}

/// `ad*_α x = p_u([x, α])` for `α ∈ b^±`, `x ∈ u`.
pub fn coadjoint_b_on_u(alpha: &Op, x: &Op, sign: Sign) -> Result<Op> {
    alpha.check_window(x)?;
    require_b(alpha, sign, "alpha")?;
    require_u(x, "x")?;
    Ok(project_u(&bracket(x, alpha), sign))
}

/// `ad*_x α = p_b([α, x])` for `x ∈ u`, `α ∈ b^±`.
pub fn coadjoint_u_on_b(x: &Op, alpha: &Op, sign: Sign) -> Result<Op> {
    alpha.check_window(x)?;
    require_b(alpha, sign, "alpha")?;
    require_u(x, "x")?;
    Ok(project_b(&bracket(alpha, x), sign))
}

/// Which subalgebra plays `g+` (elements `x, y`) and which its dual `g-` (`α, β`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Roles {
    /// `g+ = u`, `g- = b^±`.
    PlusU,
    /// `g+ = b^±`, `g- = u`.
    PlusB,
    /// Full matrix algebra paired with itself by the complex trace.
    FullTrace,
}

impl Roles {
    pub fn pairing_kind(self) -> PairingKind {
        match self {
            Roles::FullTrace => PairingKind::ReTrC,
            _ => PairingKind::ImTr,
        }
    }

    pub fn project_plus(self, a: &Op, sign: Sign) -> Op {
        match self {
            Roles::PlusU => project_u(a, sign),
            Roles::PlusB => project_b(a, sign),
            Roles::FullTrace => a.clone(),
        }
    }

    pub fn project_minus(self, a: &Op, sign: Sign) -> Op {
        match self {
            Roles::PlusU => project_b(a, sign),
            Roles::PlusB => project_u(a, sign),
            Roles::FullTrace => a.clone(),
        }
    }

    fn check_plus(self, a: &Op, sign: Sign, what: &str) -> Result<()> {
        match self {
            Roles::PlusU => require_u(a, what),
            Roles::PlusB => require_b(a, sign, what),
            Roles::FullTrace => Ok(()),
        }
    }

    fn check_minus(self, a: &Op, sign: Sign, what: &str) -> Result<()> {
        match self {
            Roles::PlusU => require_b(a, sign, what),
            Roles::PlusB => require_u(a, what),
            Roles::FullTrace => Ok(()),
        }
    }

    pub fn ensemble_plus(self, sign: Sign) -> Ensemble {
        match self {
            Roles::PlusU => Ensemble::SkewHermitian,
            Roles::PlusB => Ensemble::TriangularRealDiag(sign),
            Roles::FullTrace => Ensemble::Ginibre,
        }
    }

    pub fn ensemble_minus(self, sign: Sign) -> Ensemble {
        match self {
            Roles::PlusU => Ensemble::TriangularRealDiag(sign),
            Roles::PlusB => Ensemble::SkewHermitian,
            Roles::FullTrace => Ensemble::Ginibre,
        }
    }
}

fn pair(x: &Op, y: &Op, roles: Roles) -> C64 {
    let t = trace_product(x.matrix(), y.matrix());
    match roles.pairing_kind() {
        PairingKind::ImTr => C64::new(t.im, 0.0),
        PairingKind::ReTrC => t,
    }
}

/// `ad*_α x = p_{g+}([x, α])`, the coadjoint action of `g-` on `g+`.
pub fn ad_star_on_plus(alpha: &Op, x: &Op, roles: Roles, sign: Sign) -> Op {
    roles.project_plus(&bracket(x, alpha), sign)
}

/// `ad*_x α = p_{g-}([α, x])`, the coadjoint action of `g+` on `g-`.
pub fn ad_star_on_minus(x: &Op, alpha: &Op, roles: Roles, sign: Sign) -> Op {
    roles.project_minus(&bracket(alpha, x), sign)
}

/// Both sides of the cocycle condition
/// `⟨[x,y],[α,β]⟩ = ⟨y,[ad*_x α, β]⟩ + ⟨y,[α, ad*_x β]⟩ − ⟨x,[ad*_y α, β]⟩ − ⟨x,[α, ad*_y β]⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CocycleSides {
    pub lhs: C64,
    pub rhs: C64,
    /// `∥x∥_2 ∥y∥_2 ∥α∥_2 ∥β∥_2`
    pub scale: f64,
}

impl CocycleSides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

pub fn cocycle_sides(
    x: &Op,
    y: &Op,
    alpha: &Op,
    beta: &Op,
    roles: Roles,
    sign: Sign,
) -> Result<CocycleSides> {
    for o in [y, alpha, beta] {
        x.check_window(o)?;
    }
    roles.check_plus(x, sign, "x")?;
    roles.check_plus(y, sign, "y")?;
    roles.check_minus(alpha, sign, "alpha")?;
    roles.check_minus(beta, sign, "beta")?;
    let ad = |p: &Op, a: &Op| ad_star_on_minus(p, a, roles, sign);
    let lhs = pair(&bracket(x, y), &bracket(alpha, beta), roles);
    let rhs = pair(y, &bracket(&ad(x, alpha), beta), roles)
        + pair(y, &bracket(alpha, &ad(x, beta)), roles)
        - pair(x, &bracket(&ad(y, alpha), beta), roles)
        - pair(x, &bracket(alpha, &ad(y, beta)), roles);
    let scale = x.frobenius() * y.frobenius() * alpha.frobenius() * beta.frobenius();
    Ok(CocycleSides { lhs, rhs, scale })
}

/// `|LHS − RHS|` of the cocycle condition.
pub fn cocycle_residual_algebra(
    x: &Op,
    y: &Op,
    alpha: &Op,
    beta: &Op,
    roles: Roles,
    sign: Sign,
) -> Result<f64> {
    Ok(cocycle_sides(x, y, alpha, beta, roles, sign)?.residual())
}

/// Bracket on `g+ ⊕ g-`:
/// `[(x,α),(y,β)] = ([x,y] + ad*_β x − ad*_α y, [α,β] + ad*_y α − ad*_x β)`.
pub fn double_bracket(xa: (&Op, &Op), yb: (&Op, &Op), roles: Roles, sign: Sign) -> (Op, Op) {
    let (x, alpha) = xa;
    let (y, beta) = yb;
    let plus = &(&bracket(x, y) + &ad_star_on_plus(beta, x, roles, sign))
        - &ad_star_on_plus(alpha, y, roles, sign);
    let minus = &(&bracket(alpha, beta) + &ad_star_on_minus(y, alpha, roles, sign))
        - &ad_star_on_minus(x, beta, roles, sign);
    (plus, minus)
}

/// `⟨(x,α),(y,β)⟩ = ⟨x,β⟩ + ⟨y,α⟩`.
pub fn double_pairing(xa: (&Op, &Op), yb: (&Op, &Op), roles: Roles) -> C64 {
    pair(xa.0, yb.1, roles) + pair(yb.0, xa.1, roles)
}

/// `{f,h}(x) = ⟨x, [df, dh]⟩` for linear functions with gradients in `g-`.
pub fn lie_poisson_bracket(f_grad: &Op, h_grad: &Op, x: &Op, roles: Roles) -> Result<f64> {
    if roles == Roles::FullTrace {
        return Err(Error::Unsupported(
            "Lie-Poisson bracket needs an Iwasawa pairing".into(),
        ));
    }
    f_grad.check_window(h_grad)?;
    f_grad.check_window(x)?;
    Ok(im_tr(x, &bracket(f_grad, h_grad)))
}

/// `X_h(x) = −ad*_{dh} x`.
pub fn hamiltonian_vector_field(h_grad: &Op, x: &Op, roles: Roles, sign: Sign) -> Op {
    -&ad_star_on_plus(h_grad, x, roles, sign)
}

/// Real basis `{E_nm − E_mn, i(E_nm + E_mn), iE_nn}` of `u`.
pub fn u_basis(window: Window) -> Vec<Op> {
    let idx: Vec<i64> = window.indices().collect();
    let mut out = Vec::new();
    for (a, &n) in idx.iter().enumerate() {
        out.push(Op::basis(window, n, n).scale(I));
        for &m in &idx[..a] {
            let e = Op::basis(window, n, m);
            let f = Op::basis(window, m, n);
            out.push(&e - &f);
            out.push((&e + &f).scale(I));
        }
    }
    out
}

/// Real basis `{E_nm (n ≥ m), iE_nm (n > m)}` of `b^+`, mirrored for `b^-`.
pub fn b_basis(window: Window, sign: Sign) -> Vec<Op> {
    let idx: Vec<i64> = window.indices().collect();
    let mut out = Vec::new();
    for &n in &idx {
        for &m in &idx {
            let admissible = match sign {
                Sign::Plus => n >= m,
                Sign::Minus => n <= m,
            };
            if !admissible {
                continue;
            }
            out.push(Op::basis(window, n, m));
            if n != m {
                out.push(Op::basis(window, n, m).scale(I));
            }
        }
    }
    out
}

/// Residuals of the Manin triple axioms, each normalized by its operand norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManinReport {
    pub sign: Sign,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub invariance_residual: f64,
    pub isotropy_residual_u: f64,
    pub isotropy_residual_b: f64,
    pub decomposition_residual: f64,
    /// Failure of `u` and `b^±` to be closed under the bracket.
    pub closure_residual: f64,
    pub nondegeneracy_min_sv: f64,
}

impl ManinReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.invariance_residual,
            self.isotropy_residual_u,
            self.isotropy_residual_b,
            self.decomposition_residual,
            self.closure_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Smallest singular value of the `Im Tr` Gram matrix on the real basis
/// `{E_ab, iE_ab}` of the full matrix space, and of the `u × b^±` cross Gram.
pub fn nondegeneracy_min_sv(window: Window, sign: Sign) -> f64 {
    let n = window.dim();
    let dim = 2 * n * n;
    // Basis element k: E_ab with coefficient 1 (k < n²) or i.
    let coeff = |k: usize| -> (usize, usize, C64) {
        let base = k % (n * n);
        let c = if k < n * n { C64::new(1.0, 0.0) } else { I };
        (base / n, base % n, c)
    };
    let full = DMatrix::<f64>::from_fn(dim, dim, |p, q| {
        let (a, b, c1) = coeff(p);
        let (c, d, c2) = coeff(q);
        // Im Tr(c1 E_ab · c2 E_cd) = Im(c1 c2) δ_bc δ_da
        if b == c && d == a {
            (c1 * c2).im
        } else {
            0.0
        }
    });
    let full_min = singular_values_real(&full)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let u = u_basis(window);
    let b = b_basis(window, sign);
    let cross = DMatrix::<f64>::from_fn(u.len(), b.len(), |p, q| im_tr(&u[p], &b[q]));
    let cross_min = if u.len() == b.len() {
        singular_values_real(&cross)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    full_min.min(cross_min)
}

fn normalized(a: Op, p: SchattenExponent) -> Op {
    let s = schatten_norm(&a, p).unwrap_or(1.0);
    if s > 0.0 {
        a.scale_re(1.0 / s)
    } else {
        a
    }
}

struct TrialResiduals([f64; 5]);

fn manin_trial(
    window: Window,
    sign: Sign,
    p: SchattenExponent,
    seed: u64,
    t: u64,
) -> TrialResiduals {
    let mut r = rng::trial(seed, t);
    let draw = |e: Ensemble, r: &mut rng::Rng64| normalized(random_op(window, e, r), p);
    let x = draw(Ensemble::Ginibre, &mut r);
    let y = draw(Ensemble::Ginibre, &mut r);
    let z = draw(Ensemble::Ginibre, &mut r);
    let u1 = draw(Ensemble::SkewHermitian, &mut r);
    let u2 = draw(Ensemble::SkewHermitian, &mut r);
    let b1 = draw(Ensemble::TriangularRealDiag(sign), &mut r);
    let b2 = draw(Ensemble::TriangularRealDiag(sign), &mut r);
    let f = |a: &Op| a.frobenius();

    let inv =
        (im_tr(&bracket(&x, &y), &z) + im_tr(&y, &bracket(&x, &z))).abs() / (f(&x) * f(&y) * f(&z));
    let iso_u = im_tr(&u1, &u2).abs() / (f(&u1) * f(&u2));
    let iso_b = im_tr(&b1, &b2).abs() / (f(&b1) * f(&b2));

    let pu = project_u(&x, sign);
    let pb = project_b(&x, sign);
    let recon = (&(&x - &pu) - &pb).frobenius();
    let skew_defect = (&pu + &pu.adjoint()).frobenius();
    let tri_defect = (&pb - &project_b(&pb, sign)).frobenius();
    let decomp = recon.max(skew_defect).max(tri_defect) / f(&x);

    let cu = bracket(&u1, &u2);
    let cb = bracket(&b1, &b2);
    let closure = ((&cu + &cu.adjoint()).frobenius() / (f(&u1) * f(&u2)))
        .max((&cb - &project_b(&cb, sign)).frobenius() / (f(&b1) * f(&b2)));
    TrialResiduals([inv, iso_u, iso_b, decomp, closure])
}

/// Randomized check of the Manin triple `(gl, u, b^±)` with the `Im Tr` pairing.
/// Draws are normalized to unit Schatten `p`-norm.
pub fn verify_manin_triple(
    window: Window,
    sign: Sign,
    p: SchattenExponent,
    trials: usize,
    seed: u64,
) -> Result<ManinReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let per: Vec<TrialResiduals> = (0..trials as u64)
        .into_par_iter()
        .map(|t| manin_trial(window, sign, p, seed, t))
        .collect();
    let mut m = [0.0f64; 5];
    for tr in &per {
        for (acc, v) in m.iter_mut().zip(tr.0) {
            *acc = acc.max(v);
        }
    }
    Ok(ManinReport {
        sign,
        n: window.half_size(),
        trials,
        seed,
        invariance_residual: m[0],
        isotropy_residual_u: m[1],
        isotropy_residual_b: m[2],
        decomposition_residual: m[3],
        closure_residual: m[4],
        nondegeneracy_min_sv: nondegeneracy_min_sv(window, sign),
    })
}
