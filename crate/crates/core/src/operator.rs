//! Finite truncations of operators on `H = H+ ⊕ H-`.
//!
//! The window of half size `N` holds the basis vectors `|n⟩` for
//! `n ∈ {-N, …, N-1}`, listed by decreasing `n`: position `pos(n) = N-1-n`.
//! With that ordering an operator mapping each `|n⟩` into `span{|m⟩ : m ≥ n}`
//! is upper triangular in the ordinary matrix sense.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Index window `{-N, …, N-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    half_size: usize,
}

impl Window {
    pub fn new(half_size: usize) -> Result<Self> {
        if half_size == 0 {
            return Err(Error::InvalidInput(
                "window half size must be positive".into(),
            ));
        }
        Ok(Self { half_size })
    }

    pub fn half_size(&self) -> usize {
        self.half_size
    }

    /// Matrix dimension `2N`.
    pub fn dim(&self) -> usize {
        2 * self.half_size
    }

    pub fn contains(&self, n: i64) -> bool {
        let h = self.half_size as i64;
        (-h..h).contains(&n)
    }

    /// Matrix position of basis index `n`. Panics outside the window.
    pub fn pos(&self, n: i64) -> usize {
        assert!(
            self.contains(n),
            "index {n} outside window of half size {}",
            self.half_size
        );
        (self.half_size as i64 - 1 - n) as usize
    }

    /// Basis index stored at matrix position `p`.
    pub fn index(&self, p: usize) -> i64 {
        assert!(p < self.dim(), "position {p} outside window");
        self.half_size as i64 - 1 - p as i64
    }

    /// Indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let h = self.half_size as i64;
        -h..h
    }

    fn check_same(&self, other: &Window) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::WindowMismatch(self.half_size, other.half_size))
        }
    }
}

/// A dense `2N × 2N` complex matrix tagged with its window.
///
/// Entry `(pos(m), pos(n))` is `⟨m|A|n⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Op {
    window: Window,
    m: CMat,
}

impl Op {
    pub fn new(window: Window, m: CMat) -> Result<Self> {
        if m.nrows() != window.dim() || m.ncols() != window.dim() {
            return Err(Error::InvalidOperator(format!(
                "shape {}x{} does not match window dimension {}",
                m.nrows(),
                m.ncols(),
                window.dim()
            )));
        }
        Ok(Self { window, m })
    }

    /// Wraps a square matrix of even dimension.
    pub fn from_matrix(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::InvalidOperator(format!(
                "expected a nonempty square matrix of even size, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let w = Window::new(m.nrows() / 2)?;
        Self::new(w, m)
    }

    pub fn zeros(window: Window) -> Self {
        Self {
            window,
            m: CMat::zeros(window.dim(), window.dim()),
        }
    }

    pub fn identity(window: Window) -> Self {
        Self {
            window,
            m: CMat::identity(window.dim(), window.dim()),
        }
    }

    /// `E_{nm} = |n⟩⟨m|`.
    pub fn basis(window: Window, n: i64, m: i64) -> Self {
        let mut op = Self::zeros(window);
        op.m[(window.pos(n), window.pos(m))] = C64::new(1.0, 0.0);
        op
    }

    /// Builds from a function of basis indices `(m, n) ↦ ⟨m|A|n⟩`.
    pub fn from_fn(window: Window, mut f: impl FnMut(i64, i64) -> C64) -> Self {
        let m = CMat::from_fn(window.dim(), window.dim(), |r, c| {
            f(window.index(r), window.index(c))
        });
        Self { window, m }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    /// `⟨m|A|n⟩`.
    pub fn entry(&self, m: i64, n: i64) -> C64 {
        self.m[(self.window.pos(m), self.window.pos(n))]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            window: self.window,
            m: self.m.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            window: self.window,
            m: &self.m * s,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn map(&self, f: impl FnMut(C64) -> C64) -> Self {
        Self {
            window: self.window,
            m: self.m.map(f),
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `Tr p+A|H+ + Tr p-A|H-`; equals the full trace at finite truncation.
    pub fn restricted_trace(&self) -> C64 {
        let n = self.window.half_size;
        let plus: C64 = (0..n).map(|i| self.m[(i, i)]).sum();
        let minus: C64 = (n..2 * n).map(|i| self.m[(i, i)]).sum();
        plus + minus
    }

    pub fn frobenius(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Block `p_a A|_{H_b}` with `a, b ∈ {+, -}` as an `N × N` matrix.
    pub fn block(&self, row_plus: bool, col_plus: bool) -> CMat {
        let n = self.window.half_size;
        let r0 = if row_plus { 0 } else { n };
        let c0 = if col_plus { 0 } else { n };
        self.m.view((r0, c0), (n, n)).into_owned()
    }

    /// Assembles `[[a, b], [c, d]]` in the `(H+, H-)` block layout.
    pub fn from_blocks(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> Result<Self> {
        let n = a.nrows();
        for blk in [a, b, c, d] {
            if blk.nrows() != n || blk.ncols() != n {
                return Err(Error::InvalidOperator("blocks must all be N x N".into()));
            }
        }
        let w = Window::new(n)?;
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((0, n), (n, n)).copy_from(b);
        m.view_mut((n, 0), (n, n)).copy_from(c);
        m.view_mut((n, n), (n, n)).copy_from(d);
        Self::new(w, m)
    }

    pub fn check_window(&self, other: &Op) -> Result<()> {
        self.window.check_same(&other.window)
    }

    pub fn inverse(&self) -> Result<Op> {
        let inv = self.m.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(Self {
            window: self.window,
            m: inv,
        })
    }

    /// Matrix exponential (scaling and squaring with a Padé approximant).
    pub fn exp(&self) -> Op {
        Self {
            window: self.window,
            m: self.m.exp(),
        }
    }

    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        (&self.m + self.m.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let d = self.m.adjoint() * &self.m - CMat::identity(self.window.dim(), self.window.dim());
        d.iter().all(|z| z.norm() <= tol)
    }
}

impl Add for &Op {
    type Output = Op;
    fn add(self, rhs: &Op) -> Op {
        assert_eq!(self.window, rhs.window, "window mismatch");
        Op {
            window: self.window,
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &Op {
    type Output = Op;
    fn sub(self, rhs: &Op) -> Op {
        assert_eq!(self.window, rhs.window, "window mismatch");
        Op {
            window: self.window,
            m: &self.m - &rhs.m,
        }
    }
}

impl Mul for &Op {
    type Output = Op;
    fn mul(self, rhs: &Op) -> Op {
        assert_eq!(self.window, rhs.window, "window mismatch");
        Op {
            window: self.window,
            m: &self.m * &rhs.m,
        }
    }
}

impl Neg for &Op {
    type Output = Op;
    fn neg(self) -> Op {
        Op {
            window: self.window,
            m: -&self.m,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Op {
            type Output = Op;
            fn $f(self, rhs: Op) -> Op {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Op> for Op {
            type Output = Op;
            fn $f(self, rhs: &Op) -> Op {
                (&self).$f(rhs)
            }
        }
        impl $tr<Op> for &Op {
            type Output = Op;
            fn $f(self, rhs: Op) -> Op {
                self.$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// `[A, B] = AB - BA`.
pub fn commutator(a: &Op, b: &Op) -> Result<Op> {
    a.check_window(b)?;
    Ok(Op {
        window: a.window,
        m: &a.m * &b.m - &b.m * &a.m,
    })
}

/// Unchecked commutator for callers that already share a window.
pub(crate) fn bracket(a: &Op, b: &Op) -> Op {
    Op {
        window: a.window,
        m: &a.m * &b.m - &b.m * &a.m,
    }
}

/// `d = i(p+ - p-)`.
pub fn split_operator_d(window: Window) -> Op {
    let n = window.half_size();
    let mut m = CMat::zeros(window.dim(), window.dim());
    for p in 0..window.dim() {
        m[(p, p)] = if p < n { I } else { -I };
    }
    Op { window, m }
}

/// Schatten exponents and the two restricted norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SchattenExponent {
    One,
    Two,
    P(f64),
    Inf,
    /// `∥A∥_∞ + ∥[d,A]∥_2`
    Res,
    /// `∥p+A|H+∥_1 + ∥p-A|H-∥_1 + ∥[d,A]∥_2`
    OneTwo,
}

impl SchattenExponent {
    pub fn label(&self) -> String {
        match self {
            Self::One => "1".into(),
            Self::Two => "2".into(),
            Self::P(p) => format!("{p}"),
            Self::Inf => "inf".into(),
            Self::Res => "res".into(),
            Self::OneTwo => "1,2".into(),
        }
    }
}

impl std::str::FromStr for SchattenExponent {
    type Err = Error;

    /// Accepts `1`, `2`, `inf`, `res`, `1,2`, or any real `p ≥ 1`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(Self::One),
            "2" => Ok(Self::Two),
            "inf" | "∞" => Ok(Self::Inf),
            "res" => Ok(Self::Res),
            "1,2" => Ok(Self::OneTwo),
            other => match other.parse::<f64>() {
                Ok(p) if p >= 1.0 && p.is_finite() => Ok(Self::P(p)),
                _ => Err(Error::InvalidInput(format!(
                    "unknown Schatten exponent '{s}'"
                ))),
            },
        }
    }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    crate::linalg::singular_values(m)
}

fn schatten_of(m: &CMat, p: f64) -> f64 {
    let s = singular_values(m);
    if p.is_infinite() {
        return s.first().copied().unwrap_or(0.0);
    }
    if p == 1.0 {
        return s.iter().sum();
    }
    if p == 2.0 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0.0;
    }
    smax * s
        .iter()
        .map(|x| (x / smax).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn schatten_norm(a: &Op, e: SchattenExponent) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidOperator("non-finite entries".into()));
    }
    let d_comm = || bracket(&split_operator_d(a.window), a).frobenius();
    Ok(match e {
        SchattenExponent::One => schatten_of(&a.m, 1.0),
        SchattenExponent::Two => a.frobenius(),
        SchattenExponent::P(p) => {
            if !(p > 1.0) || !p.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "finite Schatten exponent must lie in (1, inf), got {p}"
                )));
            }
            schatten_of(&a.m, p)
        }
        SchattenExponent::Inf => schatten_of(&a.m, f64::INFINITY),
        SchattenExponent::Res => schatten_of(&a.m, f64::INFINITY) + d_comm(),
        SchattenExponent::OneTwo => {
            schatten_of(&a.block(true, true), 1.0)
                + schatten_of(&a.block(false, false), 1.0)
                + d_comm()
        }
    })
}

/// Triangularity selector: `Plus` for `b^+` (upper), `Minus` for `b^-` (lower).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Random ensembles for structured operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ensemble {
    Ginibre,
    SkewHermitian,
    /// Triangular per sign with real diagonal (an element of `b^±`).
    TriangularRealDiag(Sign),
    Unitary,
    /// Identity plus a small `b^±` element, diagonal clamped to be ≥ 0.1.
    BGroup(Sign),
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn ginibre_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    // Row-major fill so draws do not depend on nalgebra's storage order.
    let mut m = CMat::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = gaussian(rng);
        }
    }
    m
}

/// QR with the `R` diagonal made real positive; `Q` is the unitary factor.
pub fn phase_fixed_qr(m: &CMat) -> (CMat, CMat) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for k in 0..r.nrows().min(r.ncols()) {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let col = q.column(k) * ph;
        q.set_column(k, &col);
        let row = r.row(k) * ph.conj();
        r.set_row(k, &row);
    }
    (q, r)
}

pub fn random_unitary_matrix(n: usize, rng: &mut impl Rng) -> CMat {
    phase_fixed_qr(&ginibre_matrix(n, n, rng)).0
}

fn triangularize(m: &mut CMat, sign: Sign) {
    let n = m.nrows();
    for r in 0..n {
        for c in 0..n {
            let keep = match sign {
                Sign::Plus => c >= r,
                Sign::Minus => c <= r,
            };
            if !keep {
                m[(r, c)] = C64::new(0.0, 0.0);
            } else if r == c {
                m[(r, c)].im = 0.0;
            }
        }
    }
}

pub fn random_op(window: Window, ensemble: Ensemble, rng: &mut impl Rng) -> Op {
    let n = window.dim();
    let m = match ensemble {
        Ensemble::Ginibre => ginibre_matrix(n, n, rng),
        Ensemble::SkewHermitian => {
            let g = ginibre_matrix(n, n, rng);
            (&g - g.adjoint()) * C64::new(0.5, 0.0)
        }
        Ensemble::TriangularRealDiag(sign) => {
            let mut g = ginibre_matrix(n, n, rng);
            triangularize(&mut g, sign);
            g
        }
        Ensemble::Unitary => random_unitary_matrix(n, rng),
        Ensemble::BGroup(sign) => {
            let mut g = ginibre_matrix(n, n, rng);
            triangularize(&mut g, sign);
            let eps = 0.3 / (n as f64).sqrt();
            let mut b = CMat::identity(n, n) + g * C64::new(eps, 0.0);
            for k in 0..n {
                b[(k, k)] = C64::new(b[(k, k)].re.max(0.1), 0.0);
            }
            b
        }
    };
    Op { window, m }
}

/// Comparison tolerance `abs + rel · scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn bound(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.bound(scale)
    }
}
