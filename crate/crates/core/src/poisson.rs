//! Poisson tensors of the unitary and triangular groups, right-trivialized as
//! `Π_r(g)`, with checks of the group cocycle law, the Jacobi identity, and the
//! tangent bialgebra at the identity.
//!
//! Every tensor here has the shape
//! `Π_r(g)(c1, c2) = ε Im Tr p_c(g⁻¹c1g) · p_g(g⁻¹c2g)`,
//! where `p_g` projects onto the group's Lie algebra, `p_c` onto the
//! complementary subalgebra holding the covector representatives, and
//! `ε = +1` for the restricted kinds, `−1` for the `L_p` kinds.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{b_basis, im_tr, trace_product, u_basis};
use crate::operator::{bracket, random_op, CMat, Ensemble, Op, Sign, Window};
use crate::truncation::{is_in_b, project_b, project_u};
use crate::Residual;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    UnitaryP,
    BPlus,
    BMinus,
    URes,
    BResPlus,
}

impl GroupKind {
    pub const ALL: [GroupKind; 5] = [
        Self::UnitaryP,
        Self::BPlus,
        Self::BMinus,
        Self::URes,
        Self::BResPlus,
    ];

    pub fn is_unitary(self) -> bool {
        matches!(self, Self::UnitaryP | Self::URes)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::UnitaryP => "UnitaryP",
            Self::BPlus => "BPlus",
            Self::BMinus => "BMinus",
            Self::URes => "URes",
            Self::BResPlus => "BResPlus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

/// A group kind together with the triangularity of the Iwasawa partner.
///
/// Only `UnitaryP` accepts both signs; the triangular kinds fix it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Structure {
    pub kind: GroupKind,
    pub sign: Sign,
}

impl Structure {
    pub fn new(kind: GroupKind) -> Self {
        let sign = if kind == GroupKind::BMinus {
            Sign::Minus
        } else {
            Sign::Plus
        };
        Self { kind, sign }
    }

    pub fn with_sign(kind: GroupKind, sign: Sign) -> Result<Self> {
        let s = Self::new(kind);
        if kind != GroupKind::UnitaryP && sign != s.sign {
            return Err(Error::Domain(format!(
                "{} fixes the sign to {:?}",
                kind.name(),
                s.sign
            )));
        }
        Ok(Self { kind, sign })
    }

    fn epsilon(&self) -> f64 {
        match self.kind {
            GroupKind::URes | GroupKind::BResPlus => 1.0,
            _ => -1.0,
        }
    }

    /// Projection onto the group's Lie algebra.
    pub fn project_group(&self, a: &Op) -> Op {
        if self.kind.is_unitary() {
            project_u(a, self.sign)
        } else {
            project_b(a, self.sign)
        }
    }

    /// Projection onto the subalgebra carrying covector representatives.
    pub fn project_covector(&self, a: &Op) -> Op {
        if self.kind.is_unitary() {
            project_b(a, self.sign)
        } else {
            project_u(a, self.sign)
        }
    }

    pub fn quotient_kind(&self) -> QuotientKind {
        if self.kind.is_unitary() {
            QuotientKind::ModU(self.sign)
        } else {
            QuotientKind::ModB(self.sign)
        }
    }

    /// Real basis of the group's Lie algebra.
    pub fn algebra_basis(&self, window: Window) -> Vec<Op> {
        if self.kind.is_unitary() {
            u_basis(window)
        } else {
            b_basis(window, self.sign)
        }
    }

    /// Real basis of the covector space (canonical representatives).
    pub fn covector_basis(&self, window: Window) -> Vec<QuotientCovector> {
        let raw = if self.kind.is_unitary() {
            b_basis(window, self.sign)
        } else {
            u_basis(window)
        };
        raw.into_iter()
            .map(|r| QuotientCovector {
                quotient_kind: self.quotient_kind(),
                representative: r,
            })
            .collect()
    }

    pub fn algebra_ensemble(&self) -> Ensemble {
        if self.kind.is_unitary() {
            Ensemble::SkewHermitian
        } else {
            Ensemble::TriangularRealDiag(self.sign)
        }
    }

    pub fn random_element(&self, window: Window, rng: &mut impl Rng) -> GroupElement {
        let ens = if self.kind.is_unitary() {
            Ensemble::Unitary
        } else {
            Ensemble::BGroup(self.sign)
        };
        GroupElement {
            kind: self.kind,
            matrix: random_op(window, ens, rng),
        }
    }

    pub fn random_covector(&self, window: Window, rng: &mut impl Rng) -> QuotientCovector {
        QuotientCovector::canonical(
            &random_op(window, Ensemble::Ginibre, rng),
            self.quotient_kind(),
        )
    }

    pub fn random_direction(&self, window: Window, rng: &mut impl Rng) -> Op {
        random_op(window, self.algebra_ensemble(), rng)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    kind: GroupKind,
    matrix: Op,
}

impl GroupElement {
    pub fn new(kind: GroupKind, matrix: Op) -> Result<Self> {
        let tol = 1e-10 * (1.0 + matrix.max_abs());
        if kind.is_unitary() {
            if !matrix.is_unitary(1e-10) {
                return Err(Error::Domain("group element must be unitary".into()));
            }
        } else {
            let sign = Structure::new(kind).sign;
            if !is_in_b(&matrix, sign, tol) {
                return Err(Error::Domain(
                    "group element must be triangular with real diagonal".into(),
                ));
            }
            let m = matrix.matrix();
            if (0..m.nrows()).any(|k| m[(k, k)].re <= 0.0) {
                return Err(Error::Domain(
                    "group element diagonal must be strictly positive".into(),
                ));
            }
        }
        Ok(Self { kind, matrix })
    }

    pub fn identity(kind: GroupKind, window: Window) -> Self {
        Self {
            kind,
            matrix: Op::identity(window),
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn matrix(&self) -> &Op {
        &self.matrix
    }

    pub fn window(&self) -> Window {
        self.matrix.window()
    }

    pub fn inverse_matrix(&self) -> Op {
        if self.kind.is_unitary() {
            self.matrix.adjoint()
        } else {
            self.matrix
                .inverse()
                .expect("triangular group elements with positive diagonal are invertible")
        }
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.kind != other.kind {
            return Err(Error::Domain("group kinds differ".into()));
        }
        self.matrix.check_window(&other.matrix)?;
        Ok(GroupElement {
            kind: self.kind,
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `exp(X)·g`, for `X` in the group's Lie algebra.
    pub fn left_exp(&self, x: &Op) -> GroupElement {
        GroupElement {
            kind: self.kind,
            matrix: &x.exp() * &self.matrix,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuotientKind {
    /// Classes modulo `b^±`; representative skew-Hermitian.
    ModB(Sign),
    /// Classes modulo `u`; representative in `b^±`.
    ModU(Sign),
}

/// Canonical representative of a class in `gl / b^±` or `gl / u`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientCovector {
    quotient_kind: QuotientKind,
    representative: Op,
}

impl QuotientCovector {
    /// Class of an arbitrary matrix `x`.
    pub fn canonical(x: &Op, quotient_kind: QuotientKind) -> Self {
        let representative = match quotient_kind {
            QuotientKind::ModB(s) => project_u(x, s),
            QuotientKind::ModU(s) => project_b(x, s),
        };
        Self {
            quotient_kind,
            representative,
        }
    }

    pub fn quotient_kind(&self) -> QuotientKind {
        self.quotient_kind
    }

    pub fn representative(&self) -> &Op {
        &self.representative
    }
}

fn check_covector(st: &Structure, c: &QuotientCovector) -> Result<()> {
    if c.quotient_kind != st.quotient_kind() {
        return Err(Error::Domain(format!(
            "covector kind {:?} does not match {}",
            c.quotient_kind,
            st.kind.name()
        )));
    }
    Ok(())
}

fn check_group(st: &Structure, g: &GroupElement) -> Result<()> {
    if g.kind != st.kind {
        return Err(Error::Domain(format!(
            "expected a {} element, got {}",
            st.kind.name(),
            g.kind.name()
        )));
    }
    Ok(())
}

/// Cached conjugate `A = g⁻¹ c g` and its two projections.
struct Conjugated {
    pc: CMat,
    pg: CMat,
}

fn conjugate(st: &Structure, g: &Op, g_inv: &Op, c: &Op) -> Conjugated {
    let a = &(g_inv * c) * g;
    Conjugated {
        pc: st.project_covector(&a).into_matrix(),
        pg: st.project_group(&a).into_matrix(),
    }
}

/// `Π_r(g)(c1, c2)` for any kind.
pub fn pi_r(
    st: &Structure,
    g: &GroupElement,
    c1: &QuotientCovector,
    c2: &QuotientCovector,
) -> Result<f64> {
    check_group(st, g)?;
    check_covector(st, c1)?;
    check_covector(st, c2)?;
    let gi = g.inverse_matrix();
    let a1 = conjugate(st, &g.matrix, &gi, &c1.representative);
    let a2 = conjugate(st, &g.matrix, &gi, &c2.representative);
    Ok(st.epsilon() * trace_product(&a1.pc, &a2.pg).im)
}

/// `Π_r^{B_p^±}(b)(x1,x2) = Im Tr p_b(b⁻¹x1b) · p_u(b⁻¹x2b)`, `x_i ∈ u`.
pub fn pi_r_bp(b: &GroupElement, x1: &Op, x2: &Op) -> Result<f64> {
    if !matches!(b.kind, GroupKind::BPlus | GroupKind::BMinus) {
        return Err(Error::Domain(
            "pi_r_bp needs a BPlus or BMinus element".into(),
        ));
    }
    for x in [x1, x2] {
        if !x.is_skew_hermitian(1e-9 * (1.0 + x.max_abs())) {
            return Err(Error::Domain("covectors must be skew-Hermitian".into()));
        }
    }
    let sign = Structure::new(b.kind).sign;
    let bi = b.inverse_matrix();
    let a1 = &(&bi * x1) * &b.matrix;
    let a2 = &(&bi * x2) * &b.matrix;
    Ok(im_tr(&project_b(&a1, sign), &project_u(&a2, sign)))
}

/// `Π_r^{U_p^±}(u)(b1,b2) = Im Tr p_u(u⁻¹b1u) · p_b(u⁻¹b2u)`, `b_i ∈ b^±`.
pub fn pi_r_up(u: &GroupElement, b1: &Op, b2: &Op, sign: Sign) -> Result<f64> {
    if u.kind != GroupKind::UnitaryP {
        return Err(Error::Domain("pi_r_up needs a UnitaryP element".into()));
    }
    for b in [b1, b2] {
        if !is_in_b(b, sign, 1e-9 * (1.0 + b.max_abs())) {
            return Err(Error::Domain("covectors must lie in b".into()));
        }
    }
    let ui = u.matrix.adjoint();
    let a1 = &(&ui * b1) * &u.matrix;
    let a2 = &(&ui * b2) * &u.matrix;
    Ok(im_tr(&project_u(&a1, sign), &project_b(&a2, sign)))
}

/// `Π_r(b)([x1],[x2]) = Im Tr (b⁻¹ p_u(x1) b) · p_b(b⁻¹ p_u(x2) b)`.
pub fn pi_r_bres(b: &GroupElement, c1: &QuotientCovector, c2: &QuotientCovector) -> Result<f64> {
    if b.kind != GroupKind::BResPlus {
        return Err(Error::Domain("pi_r_bres needs a BResPlus element".into()));
    }
    for c in [c1, c2] {
        if c.quotient_kind != QuotientKind::ModB(Sign::Plus) {
            return Err(Error::Domain("covectors must be classes modulo b^+".into()));
        }
    }
    let bi = b.inverse_matrix();
    let first = &(&bi * &project_u(&c1.representative, Sign::Plus)) * &b.matrix;
    let inner = &(&bi * &project_u(&c2.representative, Sign::Plus)) * &b.matrix;
    Ok(im_tr(&first, &project_b(&inner, Sign::Plus)))
}

/// `Π_r(g)([x1],[x2]) = Im Tr (g⁻¹ p_b(x1) g) · p_u(g⁻¹ p_b(x2) g)`.
pub fn pi_r_ures(g: &GroupElement, c1: &QuotientCovector, c2: &QuotientCovector) -> Result<f64> {
    if g.kind != GroupKind::URes {
        return Err(Error::Domain("pi_r_ures needs a URes element".into()));
    }
    for c in [c1, c2] {
        if c.quotient_kind != QuotientKind::ModU(Sign::Plus) {
            return Err(Error::Domain("covectors must be classes modulo u".into()));
        }
    }
    let gi = g.inverse_matrix();
    let first = &(&gi * &project_b(&c1.representative, Sign::Plus)) * &g.matrix;
    let inner = &(&gi * &project_b(&c2.representative, Sign::Plus)) * &g.matrix;
    Ok(im_tr(&first, &project_u(&inner, Sign::Plus)))
}

/// `Ad*(g)c`: conjugate the representative by `g`, then canonicalize.
pub fn coadjoint_group(st: &Structure, g: &GroupElement, c: &QuotientCovector) -> QuotientCovector {
    let a = &(&g.inverse_matrix() * &c.representative) * &g.matrix;
    QuotientCovector::canonical(&a, st.quotient_kind())
}

/// Matrix of `Π_r(g)` on a list of covectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorMatrix {
    pub values: DMatrix<f64>,
}

pub fn tensor_matrix(
    st: &Structure,
    g: &GroupElement,
    basis: &[QuotientCovector],
) -> Result<TensorMatrix> {
    check_group(st, g)?;
    for c in basis {
        check_covector(st, c)?;
    }
    let gi = g.inverse_matrix();
    let conj: Vec<Conjugated> = basis
        .iter()
        .map(|c| conjugate(st, &g.matrix, &gi, &c.representative))
        .collect();
    let eps = st.epsilon();
    let k = basis.len();
    let mut values = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            values[(i, j)] = eps * trace_product(&conj[i].pc, &conj[j].pg).im;
        }
    }
    Ok(TensorMatrix { values })
}

/// Group cocycle law `Π_r(gu) = Ad(g)**Π_r(u) + Π_r(g)` checked on all basis pairs.
///
/// The residual is the largest pairwise defect; the scale is the largest
/// pairwise sum of the three term magnitudes, taken over all pairs.
pub fn group_cocycle_residual(
    st: &Structure,
    g: &GroupElement,
    u: &GroupElement,
    basis: &[QuotientCovector],
) -> Result<Residual> {
    let gu = g.mul(u)?;
    let t_gu = tensor_matrix(st, &gu, basis)?;
    let moved: Vec<QuotientCovector> = basis.iter().map(|c| coadjoint_group(st, g, c)).collect();
    let t_u = tensor_matrix(st, u, &moved)?;
    let t_g = tensor_matrix(st, g, basis)?;
    let (mut value, mut scale) = (0.0f64, 0.0f64);
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            let (a, b, c) = (t_gu.values[(i, j)], t_u.values[(i, j)], t_g.values[(i, j)]);
            value = value.max((a - b - c).abs());
            scale = scale.max(a.abs() + b.abs() + c.abs());
        }
    }
    Ok(Residual::new(value, scale))
}

/// Closed-form `T_gΠ_r(R_g X)(c1, c2)`, the derivative of `Π_r` along `h ↦ exp(hX)g`.
///
/// With `Y = g⁻¹Xg` and `A_i = g⁻¹c_ig`, the conjugates move as `A_i − h[Y, A_i]`.
pub fn tangent_closed_form(
    st: &Structure,
    g: &GroupElement,
    x: &Op,
    c1: &QuotientCovector,
    c2: &QuotientCovector,
) -> Result<f64> {
    check_group(st, g)?;
    check_covector(st, c1)?;
    check_covector(st, c2)?;
    let gi = g.inverse_matrix();
    let y = &(&gi * x) * &g.matrix;
    let a1 = &(&gi * &c1.representative) * &g.matrix;
    let a2 = &(&gi * &c2.representative) * &g.matrix;
    let d1 = bracket(&y, &a1);
    let d2 = bracket(&y, &a2);
    let v = -im_tr(&st.project_covector(&d1), &st.project_group(&a2))
        - im_tr(&st.project_covector(&a1), &st.project_group(&d2));
    Ok(st.epsilon() * v)
}

/// Central difference `(Π_r(exp(hX)g) − Π_r(exp(−hX)g))(c1,c2) / 2h`.
pub fn tangent_finite_diff(
    st: &Structure,
    g: &GroupElement,
    x: &Op,
    c1: &QuotientCovector,
    c2: &QuotientCovector,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(
            "finite-difference step must be positive".into(),
        ));
    }
    let gp = g.left_exp(&x.scale_re(h));
    let gm = g.left_exp(&x.scale_re(-h));
    Ok((pi_r(st, &gp, c1, c2)? - pi_r(st, &gm, c1, c2)?) / (2.0 * h))
}

/// Interior product `i_cΠ_r(g) = −ε g p_g(g⁻¹cg) g⁻¹`, an element of the group's
/// Lie algebra with `Π_r(g)(c, c') = Im Tr(i_cΠ_r(g) · c')`.
pub fn interior_product(st: &Structure, g: &GroupElement, c: &QuotientCovector) -> Result<Op> {
    check_group(st, g)?;
    check_covector(st, c)?;
    let gi = g.inverse_matrix();
    let a = &(&gi * &c.representative) * &g.matrix;
    Ok((&(&g.matrix * &st.project_group(&a)) * &gi).scale_re(-st.epsilon()))
}

/// How `T_gΠ_r` is evaluated inside the Jacobi expression.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Derivative {
    ClosedForm,
    FiniteDiff(f64),
}

/// Cyclic sum over `(c1,c2,c3)` of
/// `T_gΠ_r(R_g i_{c1}Π_r(g))(c2, c3) + ⟨c1, [i_{c3}Π_r(g), i_{c2}Π_r(g)]⟩`.
pub fn jacobi_residual(
    st: &Structure,
    g: &GroupElement,
    cs: [&QuotientCovector; 3],
    derivative: Derivative,
) -> Result<Residual> {
    let z: Vec<Op> = cs
        .iter()
        .map(|c| interior_product(st, g, c))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    let mut scale = 0.0;
    for i in 0..3 {
        let (a, b, c) = (i, (i + 1) % 3, (i + 2) % 3);
        let t = match derivative {
            Derivative::ClosedForm => tangent_closed_form(st, g, &z[a], cs[b], cs[c])?,
            Derivative::FiniteDiff(h) => tangent_finite_diff(st, g, &z[a], cs[b], cs[c], h)?,
        };
        let p = im_tr(&cs[a].representative, &bracket(&z[c], &z[b]));
        total += t + p;
        scale += t.abs() + p.abs();
    }
    Ok(Residual::new(total.abs(), scale))
}

/// `T_eΠ_r(X)(c1,c2) = ε Im Tr X[c1, c2]`.
pub fn tangent_at_identity_closed_form(
    st: &Structure,
    x: &Op,
    c1: &QuotientCovector,
    c2: &QuotientCovector,
) -> Result<f64> {
    check_covector(st, c1)?;
    check_covector(st, c2)?;
    Ok(st.epsilon() * im_tr(x, &bracket(&c1.representative, &c2.representative)))
}

/// `(closed_form, finite_diff)` for the derivative of `Π_r` at the identity along `X`.
pub fn tangent_bracket_check(
    st: &Structure,
    x: &Op,
    c1: &QuotientCovector,
    c2: &QuotientCovector,
    h: f64,
) -> Result<(f64, f64)> {
    let e = GroupElement::identity(st.kind, x.window());
    let closed = tangent_at_identity_closed_form(st, x, c1, c2)?;
    let fd = tangent_finite_diff(st, &e, x, c1, c2, h)?;
    Ok((closed, fd))
}

/// Covector bracket induced by `T_eΠ_r`: the unique `[c1,c2]_*` with
/// `⟨X, [c1,c2]_*⟩ = T_eΠ_r(X)(c1,c2)` for all `X` in the Lie algebra,
/// recovered by solving against the pairing Gram matrix.
pub fn induced_covector_bracket(
    st: &Structure,
    c1: &QuotientCovector,
    c2: &QuotientCovector,
) -> Result<QuotientCovector> {
    let window = c1.representative.window();
    let xs = st.algebra_basis(window);
    let cs = st.covector_basis(window);
    let k = xs.len();
    if cs.len() != k {
        return Err(Error::Domain(
            "algebra and covector bases differ in dimension".into(),
        ));
    }
    let gram = DMatrix::<f64>::from_fn(k, k, |i, j| im_tr(&xs[i], &cs[j].representative));
    let rhs = nalgebra::DVector::<f64>::from_iterator(
        k,
        xs.iter()
            .map(|x| tangent_at_identity_closed_form(st, x, c1, c2))
            .collect::<Result<Vec<_>>>()?,
    );
    let coeffs = gram.lu().solve(&rhs).ok_or(Error::Singular)?;
    let mut rep = Op::zeros(window);
    for (c, a) in cs.iter().zip(coeffs.iter()) {
        rep = &rep + &c.representative.scale_re(*a);
    }
    Ok(QuotientCovector {
        quotient_kind: st.quotient_kind(),
        representative: rep,
    })
}
