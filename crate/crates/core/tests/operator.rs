use approx::assert_relative_eq;
use nalgebra::DMatrix;
use respl_core::operator::{
    commutator, random_op, schatten_norm, split_operator_d, CMat, Ensemble, Op, SchattenExponent,
    Sign, Window, C64, I,
};
use respl_core::rng;
use respl_core::Error;

fn w(n: usize) -> Window {
    Window::new(n).unwrap()
}

#[test]
fn window_ordering() {
    let win = w(3);
    assert_eq!(win.pos(2), 0);
    assert_eq!(win.pos(-3), 5);
    let mut seen: Vec<usize> = win.indices().map(|n| win.pos(n)).collect();
    seen.sort();
    assert_eq!(seen, (0..6).collect::<Vec<_>>());
    for p in 0..6 {
        assert_eq!(win.pos(win.index(p)), p);
    }
    assert!(Window::new(0).is_err());
}

#[test]
fn upper_triangular_convention_is_matrix_upper() {
    // A|n⟩ ∈ span{|m⟩ : m ≥ n}: E_{mn} with m ≥ n.
    let win = w(3);
    for m in win.indices() {
        for n in win.indices() {
            let e = Op::basis(win, m, n);
            let (r, c) = (win.pos(m), win.pos(n));
            assert_eq!(e.matrix()[(r, c)], C64::new(1.0, 0.0));
            assert_eq!(m >= n, r <= c);
        }
    }
}

#[test]
fn norm_examples() {
    let win = w(2);
    let id = Op::identity(win);
    assert_relative_eq!(
        schatten_norm(&id, SchattenExponent::Two).unwrap(),
        2.0,
        epsilon = 1e-14
    );
    assert_relative_eq!(
        schatten_norm(&id, SchattenExponent::Res).unwrap(),
        1.0,
        epsilon = 1e-14
    );
    let e10 = Op::basis(win, 1, 0);
    for e in [
        SchattenExponent::One,
        SchattenExponent::Two,
        SchattenExponent::P(3.5),
        SchattenExponent::Inf,
    ] {
        assert_relative_eq!(schatten_norm(&e10, e).unwrap(), 1.0, epsilon = 1e-14);
    }
    // E_10 lies in H+ → H+, so it is block diagonal: ∥·∥_{1,2} = 1.
    assert_relative_eq!(
        schatten_norm(&e10, SchattenExponent::OneTwo).unwrap(),
        1.0,
        epsilon = 1e-14
    );
    // E_{0,-1} is off-diagonal: [d, E] = 2i E, so RES = 1 + 2.
    let off = Op::basis(win, 0, -1);
    assert_relative_eq!(
        schatten_norm(&off, SchattenExponent::Res).unwrap(),
        3.0,
        epsilon = 1e-14
    );
    assert_relative_eq!(
        schatten_norm(&off, SchattenExponent::OneTwo).unwrap(),
        2.0,
        epsilon = 1e-14
    );
}

#[test]
fn trace_norm_matches_eigen_oracle() {
    let mut r = rng::master(11);
    let a = random_op(w(4), Ensemble::Ginibre, &mut r);
    let m = a.matrix();
    let gram = m.adjoint() * m;
    let eig = gram.symmetric_eigen();
    let oracle: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    assert_relative_eq!(
        schatten_norm(&a, SchattenExponent::One).unwrap(),
        oracle,
        max_relative = 1e-10
    );
    let p = 3.0;
    let oracle_p: f64 = eig
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).powf(p / 2.0))
        .sum::<f64>()
        .powf(1.0 / p);
    assert_relative_eq!(
        schatten_norm(&a, SchattenExponent::P(p)).unwrap(),
        oracle_p,
        max_relative = 1e-10
    );
}

#[test]
fn non_finite_is_rejected() {
    let win = w(1);
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = C64::new(f64::NAN, 0.0);
    let a = Op::new(win, m).unwrap();
    assert!(matches!(
        schatten_norm(&a, SchattenExponent::Two),
        Err(Error::InvalidOperator(_))
    ));
    assert!(schatten_norm(&Op::identity(win), SchattenExponent::P(0.5)).is_err());
}

#[test]
fn restricted_trace_examples() {
    assert_eq!(Op::identity(w(3)).restricted_trace(), C64::new(6.0, 0.0));
    assert_eq!(
        split_operator_d(w(5)).restricted_trace(),
        C64::new(0.0, 0.0)
    );
    let win = w(2);
    let a = Op::from_fn(win, |m, n| {
        if m == n {
            C64::new((m + 3) as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let rev = Op::from_fn(win, |m, n| {
        if m == n {
            C64::new((-m - 1 + 3) as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    assert_eq!((&a - &rev).restricted_trace(), C64::new(0.0, 0.0));
}

#[test]
fn split_operator_properties() {
    let d = split_operator_d(w(3));
    assert!(d.is_skew_hermitian(0.0));
    let sq = &d * &d;
    assert_eq!(sq, Op::identity(w(3)).scale_re(-1.0));
    assert_eq!(d.entry(0, 0), I);
    assert_eq!(d.entry(-1, -1), -I);
}

#[test]
fn commutator_examples() {
    let win = w(1);
    let a = Op::basis(win, 0, -1);
    assert_eq!(commutator(&a, &a).unwrap(), Op::zeros(win));
    let e10 = Op::basis(win, 0, -1);
    let e01 = Op::basis(win, -1, 0);
    let expected = &Op::basis(win, 0, 0) - &Op::basis(win, -1, -1);
    assert_eq!(commutator(&e10, &e01).unwrap(), expected);
    assert!(matches!(
        commutator(&Op::zeros(w(1)), &Op::zeros(w(2))),
        Err(Error::WindowMismatch(1, 2))
    ));

    let mut r = rng::master(3);
    let x = random_op(w(5), Ensemble::Ginibre, &mut r);
    let y = random_op(w(5), Ensemble::Ginibre, &mut r);
    let tr = commutator(&x, &y).unwrap().trace().norm();
    assert!(tr < 1e-12 * x.frobenius() * y.frobenius());
}

#[test]
fn ensembles() {
    let win = w(4);
    let mut r = rng::master(5);
    let s = random_op(win, Ensemble::SkewHermitian, &mut r);
    assert_eq!(s.adjoint(), s.scale_re(-1.0));
    let u = random_op(win, Ensemble::Unitary, &mut r);
    assert!(u.is_unitary(1e-12));
    for sign in [Sign::Plus, Sign::Minus] {
        let b = random_op(win, Ensemble::BGroup(sign), &mut r);
        let inv = b.inverse().unwrap();
        let m = inv.matrix();
        for row in 0..8 {
            assert!(b.matrix()[(row, row)].re >= 0.1);
            assert_eq!(b.matrix()[(row, row)].im, 0.0);
            for col in 0..8 {
                let wrong = match sign {
                    Sign::Plus => row > col,
                    Sign::Minus => row < col,
                };
                if wrong {
                    assert!(m[(row, col)].norm() < 1e-14);
                    assert_eq!(b.matrix()[(row, col)], C64::new(0.0, 0.0));
                }
            }
        }
        let check = b.matrix() * m - DMatrix::identity(8, 8);
        assert!(check.iter().all(|z| z.norm() < 1e-12));
    }
}

#[test]
fn seeded_draws_are_reproducible() {
    let a = random_op(w(3), Ensemble::Ginibre, &mut rng::trial(9, 4));
    let b = random_op(w(3), Ensemble::Ginibre, &mut rng::trial(9, 4));
    let c = random_op(w(3), Ensemble::Ginibre, &mut rng::trial(9, 5));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn blocks_round_trip() {
    let mut r = rng::master(8);
    let a = random_op(w(3), Ensemble::Ginibre, &mut r);
    let back = Op::from_blocks(
        &a.block(true, true),
        &a.block(true, false),
        &a.block(false, true),
        &a.block(false, false),
    )
    .unwrap();
    assert_eq!(a, back);
}

#[test]
fn exponential_of_skew_is_unitary() {
    let mut r = rng::master(2);
    let x = random_op(w(3), Ensemble::SkewHermitian, &mut r);
    assert!(x.exp().is_unitary(1e-12));
    // exp(X)exp(−X) = Id
    let prod = &x.exp() * &x.scale_re(-1.0).exp();
    assert!((&prod - &Op::identity(w(3))).max_abs() < 1e-12);
}

#[test]
fn exponent_parsing_round_trips() {
    for e in [
        SchattenExponent::One,
        SchattenExponent::Two,
        SchattenExponent::Inf,
        SchattenExponent::Res,
        SchattenExponent::OneTwo,
        SchattenExponent::P(2.5),
    ] {
        assert_eq!(e.label().parse::<SchattenExponent>().unwrap(), e);
    }
    assert!("0.5".parse::<SchattenExponent>().is_err());
    assert!("two".parse::<SchattenExponent>().is_err());
}
