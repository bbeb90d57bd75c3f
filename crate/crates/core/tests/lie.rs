use respl_core::lie::{
    ad_star_on_minus, ad_star_on_plus, b_basis, coadjoint_b_on_u, coadjoint_u_on_b,
    cocycle_residual_algebra, cocycle_sides, double_bracket, double_pairing,
    hamiltonian_vector_field, im_tr, lie_poisson_bracket, nondegeneracy_min_sv, pairing, u_basis,
    verify_manin_triple, PairingKind, Roles,
};
use respl_core::operator::{
    commutator, random_op, split_operator_d, Ensemble, Op, SchattenExponent, Sign, Window,
};
use respl_core::{rng, Error};

fn w(n: usize) -> Window {
    Window::new(n).unwrap()
}

fn br(a: &Op, b: &Op) -> Op {
    commutator(a, b).unwrap()
}

const SIGNS: [Sign; 2] = [Sign::Plus, Sign::Minus];

#[test]
fn pairing_examples() {
    let win = w(2);
    let id = Op::identity(win);
    assert_eq!(pairing(&id, &id, PairingKind::ImTr).unwrap().re, 0.0);
    let d = split_operator_d(win);
    // Tr(d d) = -4, a real number.
    assert_eq!(im_tr(&d, &d), 0.0);
    assert_eq!(im_tr(&d, &id), 0.0);
    let id_i = id.scale(respl_core::operator::I);
    assert_eq!(im_tr(&id_i, &id), 4.0);
    assert!(pairing(&id, &Op::identity(w(3)), PairingKind::ImTr).is_err());
}

#[test]
fn bases_have_expected_dimensions() {
    for n in 1..=3 {
        let dim = 2 * n;
        assert_eq!(u_basis(w(n)).len(), dim * dim);
        for s in SIGNS {
            assert_eq!(b_basis(w(n), s).len(), dim * dim);
            assert!(nondegeneracy_min_sv(w(n), s) > 0.5);
        }
    }
}

#[test]
fn isotropy_over_bases() {
    let win = w(2);
    let u = u_basis(win);
    for a in &u {
        for b in &u {
            assert_eq!(im_tr(a, b), 0.0);
        }
    }
    for s in SIGNS {
        let bb = b_basis(win, s);
        for a in &bb {
            for b in &bb {
                assert_eq!(im_tr(a, b), 0.0);
            }
        }
    }
}

/// Brute-force duality over basis elements: the coadjoint actions are the
/// transposes of the bracket under the pairing.
#[test]
fn coadjoint_duality_over_bases() {
    let win = w(1);
    for sign in SIGNS {
        let ub = u_basis(win);
        let bb = b_basis(win, sign);
        for x in &ub {
            for alpha in &bb {
                let ad_a_x = coadjoint_b_on_u(alpha, x, sign).unwrap();
                let ad_x_a = coadjoint_u_on_b(x, alpha, sign).unwrap();
                assert!(ad_a_x.is_skew_hermitian(1e-15));
                for beta in &bb {
                    let lhs = im_tr(&ad_a_x, beta);
                    let rhs = im_tr(x, &br(alpha, beta));
                    assert!((lhs - rhs).abs() < 1e-14);
                }
                for y in &ub {
                    let lhs = im_tr(&ad_x_a, y);
                    let rhs = im_tr(&br(x, y), alpha);
                    assert!((lhs - rhs).abs() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn coadjoint_rejects_wrong_domain() {
    let win = w(1);
    let g = Op::basis(win, 0, -1);
    let x = u_basis(win)[0].clone();
    assert!(matches!(
        coadjoint_b_on_u(&g.adjoint(), &x, Sign::Plus),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        coadjoint_u_on_b(&g, &g, Sign::Plus),
        Err(Error::Domain(_))
    ));
}

#[test]
fn coadjoint_of_commuting_pair_vanishes() {
    // d commutes with every diagonal element.
    let win = w(2);
    let d = split_operator_d(win);
    let alpha = Op::basis(win, 1, 1);
    assert_eq!(
        coadjoint_b_on_u(&alpha, &d, Sign::Plus).unwrap(),
        Op::zeros(win)
    );
}

#[test]
fn cocycle_holds_for_iwasawa_roles() {
    let mut r = rng::master(17);
    for roles in [Roles::PlusU, Roles::PlusB] {
        for sign in SIGNS {
            for n in [1, 2, 4] {
                let x = random_op(w(n), roles.ensemble_plus(sign), &mut r);
                let y = random_op(w(n), roles.ensemble_plus(sign), &mut r);
                let a = random_op(w(n), roles.ensemble_minus(sign), &mut r);
                let b = random_op(w(n), roles.ensemble_minus(sign), &mut r);
                let sides = cocycle_sides(&x, &y, &a, &b, roles, sign).unwrap();
                assert!(
                    sides.residual() < 1e-11 * sides.scale,
                    "{roles:?} {sign:?} {n}"
                );
            }
        }
    }
}

#[test]
fn cocycle_is_zero_for_equal_arguments() {
    let mut r = rng::master(18);
    let x = random_op(w(2), Ensemble::SkewHermitian, &mut r);
    let a = random_op(w(2), Ensemble::TriangularRealDiag(Sign::Plus), &mut r);
    let b = random_op(w(2), Ensemble::TriangularRealDiag(Sign::Plus), &mut r);
    let s = cocycle_sides(&x, &x, &a, &b, Roles::PlusU, Sign::Plus).unwrap();
    assert!(s.lhs.norm() < 1e-14 && s.rhs.norm() < 1e-12);
}

#[test]
fn full_trace_control_doubles_rhs() {
    // With g+ = g- = gl and coadjoint maps equal to commutators, every RHS term
    // reduces to ⟨[x,y],[α,β]⟩ up to sign, giving RHS = 2 LHS.
    let mut r = rng::master(19);
    let draw = |r: &mut rng::Rng64| random_op(w(2), Ensemble::Ginibre, r);
    let (x, y, a, b) = (draw(&mut r), draw(&mut r), draw(&mut r), draw(&mut r));
    let s = cocycle_sides(&x, &y, &a, &b, Roles::FullTrace, Sign::Plus).unwrap();
    assert!((s.rhs - s.lhs * 2.0).norm() < 1e-11 * s.scale);
    assert!(cocycle_residual_algebra(&x, &y, &a, &b, Roles::FullTrace, Sign::Plus).unwrap() > 1e-3);
}

#[test]
fn double_bracket_is_matrix_commutator() {
    let mut r = rng::master(20);
    for roles in [Roles::PlusU, Roles::PlusB] {
        for sign in SIGNS {
            let x = random_op(w(2), roles.ensemble_plus(sign), &mut r);
            let y = random_op(w(2), roles.ensemble_plus(sign), &mut r);
            let a = random_op(w(2), roles.ensemble_minus(sign), &mut r);
            let b = random_op(w(2), roles.ensemble_minus(sign), &mut r);
            let (p, m) = double_bracket((&x, &a), (&y, &b), roles, sign);
            let direct = br(&(&x + &a), &(&y + &b));
            assert!((&(&p + &m) - &direct).max_abs() < 1e-12);
            assert!((&roles.project_plus(&direct, sign) - &p).max_abs() < 1e-12);

            // Invariance of the double pairing.
            let z = random_op(w(2), roles.ensemble_plus(sign), &mut r);
            let c = random_op(w(2), roles.ensemble_minus(sign), &mut r);
            let (p2, m2) = double_bracket((&x, &a), (&z, &c), roles, sign);
            let lhs = double_pairing((&p, &m), (&z, &c), roles);
            let rhs = double_pairing((&y, &b), (&p2, &m2), roles);
            assert!((lhs + rhs).norm() < 1e-11);
        }
    }
}

#[test]
fn lie_poisson_bracket_properties() {
    let mut r = rng::master(21);
    let sign = Sign::Plus;
    let roles = Roles::PlusU;
    let x = random_op(w(2), roles.ensemble_plus(sign), &mut r);
    let a = random_op(w(2), roles.ensemble_minus(sign), &mut r);
    let b = random_op(w(2), roles.ensemble_minus(sign), &mut r);
    let c = random_op(w(2), roles.ensemble_minus(sign), &mut r);
    let fg = lie_poisson_bracket(&a, &b, &x, roles).unwrap();
    assert!((fg + lie_poisson_bracket(&b, &a, &x, roles).unwrap()).abs() < 1e-13);
    // Linear functions close under the bracket with gradient [a, b].
    let jac = lie_poisson_bracket(&br(&a, &b), &c, &x, roles).unwrap()
        + lie_poisson_bracket(&br(&b, &c), &a, &x, roles).unwrap()
        + lie_poisson_bracket(&br(&c, &a), &b, &x, roles).unwrap();
    assert!(jac.abs() < 1e-12);
    // The Hamiltonian vector field reproduces the bracket: ⟨X_h(x), df⟩ = {f, h}(x).
    let xh = hamiltonian_vector_field(&b, &x, roles, sign);
    assert!((im_tr(&xh, &a) - fg).abs() < 1e-12);
    assert!(matches!(
        lie_poisson_bracket(&a, &b, &x, Roles::FullTrace),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn ad_star_variants_agree_with_checked_versions() {
    let mut r = rng::master(22);
    let x = random_op(w(2), Ensemble::SkewHermitian, &mut r);
    let a = random_op(w(2), Ensemble::TriangularRealDiag(Sign::Minus), &mut r);
    assert_eq!(
        ad_star_on_plus(&a, &x, Roles::PlusU, Sign::Minus),
        coadjoint_b_on_u(&a, &x, Sign::Minus).unwrap()
    );
    assert_eq!(
        ad_star_on_minus(&x, &a, Roles::PlusU, Sign::Minus),
        coadjoint_u_on_b(&x, &a, Sign::Minus).unwrap()
    );
}

#[test]
fn manin_report_small_window() {
    for sign in SIGNS {
        let rep = verify_manin_triple(w(2), sign, SchattenExponent::Two, 50, 42).unwrap();
        assert!(rep.max_residual() < 1e-13, "{rep:?}");
        assert!(rep.nondegeneracy_min_sv > 0.5);
        assert_eq!(
            rep,
            verify_manin_triple(w(2), sign, SchattenExponent::Two, 50, 42).unwrap()
        );
    }
    assert!(verify_manin_triple(w(2), Sign::Plus, SchattenExponent::Two, 0, 1).is_err());
}
