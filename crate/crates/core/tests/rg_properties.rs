//! Oracle-backed verification of the derivation machinery: hand-assembled
//! Taylor collection formulas, vanishing conjugacy residuals, gauge
//! identities, symmetry inheritance, and the secular-coefficient table
//! against direct integration of the regular perturbation chain.

mod common;

use common::{basis_of_dim, random_system, random_vector, rat, rng};
use num_complex::Complex64;
use rgflow::autonomous::conjugate_fields;
use rgflow::ode::{integrate, IntegratorConfig};
use rgflow::presets::{conjugate_to_real_matrices, forced_oscillator};
use rgflow::qp::{commutator, QpPoly, QpVector, TermKey};
use rgflow::rg::{
    apply_gauge, collect_order, conjugacy_residual, derive, derive_with_gauge, gauge_connector,
    regular_perturbation_table, PerturbedSystem,
};
use rgflow::scalar::{CRat, Scalar};
use rgflow::autonomous;

/// `sum_{j,l} (d^2 p / dy_j dy_l) u_j v_l`
fn d2_apply(
    p: &QpPoly<CRat>,
    u: &QpVector<CRat>,
    v: &QpVector<CRat>,
) -> QpPoly<CRat> {
    let n = p.n();
    let mut acc = QpPoly::zero(n, p.basis().clone());
    for j in 0..n {
        let dj = p.diff_y(j).unwrap();
        for l in 0..n {
            let djl = dj.diff_y(l).unwrap();
            acc = acc
                .add(&djl.mul(u.component(j)).unwrap().mul(v.component(l)).unwrap())
                .unwrap();
        }
    }
    acc
}

fn d3_apply(
    p: &QpPoly<CRat>,
    u: &QpVector<CRat>,
    v: &QpVector<CRat>,
    w: &QpVector<CRat>,
) -> QpPoly<CRat> {
    let n = p.n();
    let mut acc = QpPoly::zero(n, p.basis().clone());
    for j in 0..n {
        let dj = p.diff_y(j).unwrap();
        for l in 0..n {
            let djl = dj.diff_y(l).unwrap();
            for m in 0..n {
                let djlm = djl.diff_y(m).unwrap();
                acc = acc
                    .add(
                        &djlm
                            .mul(u.component(j))
                            .unwrap()
                            .mul(v.component(l))
                            .unwrap()
                            .mul(w.component(m))
                            .unwrap(),
                    )
                    .unwrap();
            }
        }
    }
    acc
}

fn scale(p: &QpPoly<CRat>, num: i64, den: i64) -> QpPoly<CRat> {
    p.scale(&CRat::from_ratio(num, den))
}

#[test]
fn taylor_collection_matches_hand_formulas_through_order_four() {
    let mut r = rng(42);
    for trial in 0..8 {
        let d = trial % 3;
        let sys = random_system(&mut r, 2, d, 4, 3);
        let basis = sys.basis().clone();
        let x1 = random_vector(&mut r, 2, &basis, 2, 2);
        let x2 = random_vector(&mut r, 2, &basis, 2, 2);
        let x3 = random_vector(&mut r, 2, &basis, 2, 2);
        let g = |p: usize| sys.order(p).unwrap().clone();
        // first order: the field itself
        assert_eq!(collect_order(&sys, &[], 1).unwrap(), g(1));
        // second: (dg1) x1 + g2
        let expect2 = g(1).jacobian_times(&x1).unwrap().add(&g(2)).unwrap();
        assert_eq!(collect_order(&sys, &[x1.clone()], 2).unwrap(), expect2);
        // third: 1/2 (d2 g1) x1^2 + (dg1) x2 + (dg2) x1 + g3
        let mut comps = Vec::new();
        for i in 0..2 {
            let a = scale(&d2_apply(g(1).component(i), &x1, &x1), 1, 2);
            comps.push(a);
        }
        let expect3 = QpVector::new(comps)
            .unwrap()
            .add(&g(1).jacobian_times(&x2).unwrap())
            .unwrap()
            .add(&g(2).jacobian_times(&x1).unwrap())
            .unwrap()
            .add(&g(3))
            .unwrap();
        assert_eq!(
            collect_order(&sys, &[x1.clone(), x2.clone()], 3).unwrap(),
            expect3
        );
        // fourth: 1/6 (d3 g1) x1^3 + (d2 g1) x1 x2 + (dg1) x3
        //         + 1/2 (d2 g2) x1^2 + (dg2) x2 + (dg3) x1 + g4
        let mut comps4 = Vec::new();
        for i in 0..2 {
            let mut a = scale(&d3_apply(g(1).component(i), &x1, &x1, &x1), 1, 6);
            a = a.add(&d2_apply(g(1).component(i), &x1, &x2)).unwrap();
            a = a
                .add(&scale(&d2_apply(g(2).component(i), &x1, &x1), 1, 2))
                .unwrap();
            comps4.push(a);
        }
        let expect4 = QpVector::new(comps4)
            .unwrap()
            .add(&g(1).jacobian_times(&x3).unwrap())
            .unwrap()
            .add(&g(2).jacobian_times(&x2).unwrap())
            .unwrap()
            .add(&g(3).jacobian_times(&x1).unwrap())
            .unwrap()
            .add(&g(4))
            .unwrap();
        assert_eq!(
            collect_order(&sys, &[x1, x2, x3], 4).unwrap(),
            expect4
        );
    }
}

#[test]
fn conjugacy_residual_vanishes_through_derivation_order() {
    // randomized systems over zero, one, and two frequencies
    let mut r = rng(7);
    for trial in 0..20 {
        let d = trial % 3;
        let n = 1 + trial % 2;
        let sys = random_system(&mut r, n, d, 2, 3);
        let res = derive(&sys, 2).unwrap();
        let resid = conjugacy_residual(&res, 3).unwrap();
        assert!(resid[0].is_zero(), "order-1 residual nonzero on trial {trial}");
        assert!(resid[1].is_zero(), "order-2 residual nonzero on trial {trial}");
    }
}

#[test]
fn benchmark_order_three_residual_is_bounded_on_the_polydisk() {
    let (f, sys) = forced_oscillator(rat(3, 1), rat(9, 5));
    let rotated = autonomous::autonomize(&f, &sys).unwrap();
    let res = derive(&rotated, 2).unwrap();
    let resid = conjugacy_residual(&res, 3).unwrap();
    assert!(resid[0].is_zero());
    assert!(resid[1].is_zero());
    let lead = &resid[2];
    assert!(!lead.is_zero());
    // dense grid over one period and sample states in the unit polydisk
    let mut sup = 0.0f64;
    let mut r = rng(5);
    use rand::Rng;
    for it in 0..32 {
        let t = 2.0 * std::f64::consts::PI * it as f64 / 32.0;
        for _ in 0..25 {
            let y = vec![
                Complex64::new(r.random_range(-0.7..0.7), r.random_range(-0.7..0.7)),
                Complex64::new(r.random_range(-0.7..0.7), r.random_range(-0.7..0.7)),
            ];
            let v = lead.eval(t, &y);
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            sup = sup.max(norm);
        }
    }
    assert!(sup > 0.0 && sup < 1e3, "leading remainder sup {sup}");
    println!("order-3 remainder sup over the polydisk: {sup:.6}");
}

#[test]
fn trivial_system_has_identically_zero_residual() {
    // time-independent first-order field only: the averaged equation is the
    // system itself at every order
    let basis = basis_of_dim(1);
    let g1 = QpVector::new(vec![QpPoly::from_terms(
        1,
        basis.clone(),
        vec![(CRat::from_ratio(2, 3), vec![2], vec![0])],
    )
    .unwrap()])
    .unwrap();
    let sys = PerturbedSystem::new(1, basis).with_order(1, g1).unwrap();
    let res = derive(&sys, 3).unwrap();
    for v in conjugacy_residual(&res, 5).unwrap() {
        assert!(v.is_zero());
    }
}

#[test]
fn gauge_changes_second_order_by_the_commutator() {
    let mut r = rng(23);
    for trial in 0..20 {
        let d = trial % 3;
        let sys = random_system(&mut r, 2, d, 2, 3);
        let res = derive(&sys, 2).unwrap();
        // random time-independent polynomial gauge at first order
        let b1 = random_vector(&mut r, 2, &basis_of_dim(0), 2, 2);
        // embed the d = 0 gauge into the system's basis
        let b1 = embed_autonomous(&b1, &sys);
        let zero = QpVector::zero(2, 2, sys.basis().clone());
        let gauged = apply_gauge(&res, &[b1.clone(), zero]).unwrap();
        assert_eq!(gauged.rg_term(1).unwrap(), res.rg_term(1).unwrap());
        let expected = res
            .rg_term(2)
            .unwrap()
            .sub(&commutator(&b1, res.rg_term(1).unwrap()).unwrap())
            .unwrap();
        assert_eq!(gauged.rg_term(2).unwrap(), &expected, "trial {trial}");
    }
}

fn embed_autonomous(v: &QpVector<CRat>, sys: &PerturbedSystem<CRat>) -> QpVector<CRat> {
    let d = sys.basis().dim();
    QpVector::new(
        v.components()
            .iter()
            .map(|p| {
                QpPoly::from_terms(
                    p.n(),
                    sys.basis().clone(),
                    p.terms()
                        .map(|(key, c)| (c.clone(), key.alpha.clone(), vec![0; d]))
                        .collect::<Vec<_>>(),
                )
                .unwrap()
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn third_order_gauge_shift_depends_only_on_lower_data() {
    // two systems sharing r_1, r_2, u_1, u_2 data shift identically at
    // third order? They cannot share everything without being equal, so the
    // checkable version is: the shift r3_gauged - r3 is reproduced when the
    // recursion is re-run with the same gauge on a system whose third-order
    // field differs, because the difference cancels in the shift.
    let mut r = rng(31);
    for _ in 0..6 {
        let base = random_system(&mut r, 2, 1, 2, 2);
        // sibling shares orders 1..2 and adds a third-order field
        let mut sibling = base.clone();
        sibling
            .set_order(3, random_vector(&mut r, 2, base.basis(), 2, 2))
            .unwrap();
        let b: Vec<QpVector<CRat>> = vec![
            embed_autonomous(&random_vector(&mut r, 2, &basis_of_dim(0), 2, 2), &base),
            embed_autonomous(&random_vector(&mut r, 2, &basis_of_dim(0), 2, 2), &base),
            QpVector::zero(2, 2, base.basis().clone()),
        ];
        let shift_of = |sys: &PerturbedSystem<CRat>| {
            let plain = derive(sys, 3).unwrap();
            let gauged = derive_with_gauge(sys, 3, &b).unwrap();
            gauged
                .rg_term(3)
                .unwrap()
                .sub(plain.rg_term(3).unwrap())
                .unwrap()
        };
        assert_eq!(shift_of(&base), shift_of(&sibling));
    }
}

#[test]
fn gauge_connector_is_time_independent() {
    let mut r = rng(57);
    for _ in 0..8 {
        let sys = random_system(&mut r, 2, 1, 2, 2);
        let res = derive(&sys, 2).unwrap();
        let b = vec![
            embed_autonomous(&random_vector(&mut r, 2, &basis_of_dim(0), 2, 2), &sys),
            embed_autonomous(&random_vector(&mut r, 2, &basis_of_dim(0), 2, 2), &sys),
        ];
        let gauged = derive_with_gauge(&sys, 2, &b).unwrap();
        let psi = gauge_connector(&res, &gauged).unwrap();
        // grade one of the connector is exactly the first gauge field
        assert_eq!(&psi[1], &b[0]);
        for grade in psi.iter().skip(1) {
            let avg = grade.average_t().unwrap();
            assert_eq!(&avg, grade, "connector depends on time");
        }
    }
}

#[test]
fn odd_fields_produce_odd_reductions() {
    // fields odd under y -> -y keep that symmetry in every derived order
    let mut r = rng(71);
    let basis = basis_of_dim(1);
    let odd_poly = |r: &mut rand_chacha::ChaCha8Rng| {
        // only odd total degree monomials
        let mut raw = Vec::new();
        for _ in 0..3 {
            use rand::Rng;
            let deg_pick = [vec![1, 0], vec![0, 1], vec![2, 1], vec![1, 2], vec![3, 0], vec![0, 3]];
            let alpha = deg_pick[r.random_range(0..deg_pick.len())].clone();
            let k = vec![r.random_range(-2..=2)];
            raw.push((common::random_coeff(r), alpha.iter().map(|&x| x as u32).collect::<Vec<u32>>(), k));
        }
        QpPoly::from_terms(2, basis.clone(), raw).unwrap()
    };
    for _ in 0..6 {
        let g1 = QpVector::new(vec![odd_poly(&mut r), odd_poly(&mut r)]).unwrap();
        let g2 = QpVector::new(vec![odd_poly(&mut r), odd_poly(&mut r)]).unwrap();
        let sys = PerturbedSystem::new(2, basis.clone())
            .with_order(1, g1)
            .unwrap()
            .with_order(2, g2)
            .unwrap();
        let res = derive(&sys, 3).unwrap();
        let all_odd = |v: &QpVector<CRat>| {
            v.components().iter().all(|p| {
                p.terms()
                    .all(|(key, _)| key.alpha.iter().sum::<u32>() % 2 == 1)
            })
        };
        for i in 1..=3 {
            assert!(all_odd(res.rg_term(i).unwrap()), "even term in averaged field {i}");
            assert!(all_odd(res.transform_term(i).unwrap()), "even term in transform {i}");
        }
    }
}

#[test]
fn secular_table_identities_and_chain_integration() {
    let mut r = rng(101);
    let sys = random_system(&mut r, 2, 1, 3, 2);
    let res = derive(&sys, 3).unwrap();
    let table = regular_perturbation_table(&res, 3).unwrap();
    // linear coefficient identity per order
    for i in 1..=3usize {
        let mut expect = res.rg_term(i).unwrap().clone();
        for k in 1..i {
            expect = expect
                .add(
                    &res.transform_term(k)
                        .unwrap()
                        .jacobian_times(res.rg_term(i - k).unwrap())
                        .unwrap(),
                )
                .unwrap();
        }
        assert_eq!(&table[i - 1][0], &expect);
    }
    // top coefficient recursion p^(i)_i = (1/i)(d p^(i-1)_{i-1}/dy) r_1
    for i in 2..=3usize {
        let prev = &table[i - 2][i - 2];
        let expect = prev
            .jacobian_times(res.rg_term(1).unwrap())
            .unwrap()
            .map(|p| p.scale(&CRat::from_ratio(1, i as i64)));
        assert_eq!(&table[i - 1][i - 1], &expect);
    }
    // numeric oracle: integrate the perturbation chain directly and compare
    // against u^{(k)}_t + sum_j p^{(k)}_j t^j
    let y0 = vec![Complex64::new(0.4, 0.0), Complex64::new(-0.3, 0.0)];
    let n = 2;
    let g = |p: usize| sys.order(p).unwrap().clone();
    let jac_eval = |v: &QpVector<CRat>, t: f64, at: &[Complex64]| -> Vec<Vec<Complex64>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| v.component(i).diff_y(j).unwrap().eval(t, at))
                    .collect()
            })
            .collect()
    };
    let hess_eval = |p: &QpPoly<CRat>, t: f64, at: &[Complex64]| -> Vec<Vec<Complex64>> {
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|l| p.diff_y(j).unwrap().diff_y(l).unwrap().eval(t, at))
                    .collect()
            })
            .collect()
    };
    let field = |t: f64, state: &[Complex64]| -> Vec<Complex64> {
        let x1 = &state[0..n];
        let x2 = &state[n..2 * n];
        let _x3 = &state[2 * n..3 * n];
        let mut out = Vec::with_capacity(3 * n);
        // dx1 = g1(t, y0)
        out.extend(g(1).eval(t, &y0));
        // dx2 = (dg1)(t,y0) x1 + g2(t,y0)
        let j1 = jac_eval(&g(1), t, &y0);
        let mut dx2 = g(2).eval(t, &y0);
        for i in 0..n {
            for j in 0..n {
                dx2[i] += j1[i][j] * x1[j];
            }
        }
        out.extend(dx2);
        // dx3 = 1/2 (d2 g1)[x1,x1] + (dg1) x2 + (dg2) x1 + g3
        let j2 = jac_eval(&g(2), t, &y0);
        let mut dx3 = g(3).eval(t, &y0);
        for i in 0..n {
            let h = hess_eval(g(1).component(i), t, &y0);
            let mut quad = Complex64::ZERO;
            for j in 0..n {
                for l in 0..n {
                    quad += h[j][l] * x1[j] * x1[l];
                }
            }
            dx3[i] += 0.5 * quad;
            for j in 0..n {
                dx3[i] += j1[i][j] * x2[j] + j2[i][j] * x1[j];
            }
        }
        out.extend(dx3);
        out
    };
    let mut init = Vec::new();
    for k in 1..=3 {
        init.extend(res.transform_term(k).unwrap().eval(0.0, &y0));
    }
    let cfg = IntegratorConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        ..Default::default()
    };
    let traj = integrate(&field, &init, 0.0, 6.0, &cfg).unwrap();
    for step in 0..=12 {
        let t = step as f64 * 0.5;
        let state = traj.eval(t);
        for k in 1..=3usize {
            let mut predict = res.transform_term(k).unwrap().eval(t, &y0);
            for (j, pkj) in table[k - 1].iter().enumerate() {
                let tj = t.powi(j as i32 + 1);
                for (pi, v) in predict.iter_mut().zip(pkj.eval(t, &y0)) {
                    *pi += tj * v;
                }
            }
            let got = &state[(k - 1) * n..k * n];
            for (a, b) in got.iter().zip(&predict) {
                assert!(
                    (a - b).norm() < 1e-6,
                    "chain mismatch at t={t}, order {k}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn float_mode_matches_exact_mode_on_the_benchmark() {
    let (f, sys) = forced_oscillator(rat(3, 1), rat(9, 5));
    let rotated = autonomous::autonomize(&f, &sys).unwrap();
    let exact = derive(&rotated, 2).unwrap();
    let float = derive(&rotated.to_float(), 2).unwrap();
    for i in 1..=2usize {
        let re = exact.rg_term(i).unwrap();
        let rf = float.rg_term(i).unwrap();
        for (pe, pf) in re.components().iter().zip(rf.components()) {
            for (key, c) in pe.terms() {
                let cf = pf.coeff(key).map(|v| v.to_complex64()).unwrap_or_default();
                assert!((c.to_complex64() - cf).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn transform_denominators_track_resonance_distances() {
    // the oscillatory transform of the forced oscillator carries the
    // reciprocal of (w - 1) at first order; near w = 2 the second-order
    // terms blow up like 1/(w - 2)
    let coeff_of = |omega: BigRationalAlias, which: usize| -> Vec<f64> {
        let (f, sys) = forced_oscillator(omega, rat(9, 5));
        let rotated = autonomous::autonomize(&f, &sys).unwrap();
        let res = derive(&rotated, 2).unwrap();
        res.transform_term(which)
            .unwrap()
            .components()
            .iter()
            .flat_map(|p| {
                p.terms()
                    .map(|(_, c)| c.to_complex64().norm())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    // frozen hand value: the forcing term of the first transform grade is
    // -k/(4(w-1)) e^{i(w-1)t}
    let check_forcing = |omega_int: i64| {
        let (f, sys) = forced_oscillator(rat(omega_int, 1), rat(9, 5));
        let rotated = autonomous::autonomize(&f, &sys).unwrap();
        let res = derive(&rotated, 1).unwrap();
        let u1 = res.transform_term(1).unwrap();
        let key = TermKey {
            k: vec![omega_int - 1],
            alpha: vec![0, 0],
        };
        let expected = CRat::new(rat(-9, 20 * (omega_int - 1)), rat(0, 1));
        assert_eq!(u1.component(0).coeff(&key), Some(&expected), "omega {omega_int}");
    };
    check_forcing(3);
    check_forcing(5);
    // pole growth toward w = 2: max coefficient of the second grade grows
    // like the reciprocal distance
    let mut maxima = Vec::new();
    for j in 1..=3 {
        let omega = rat(2, 1) + rat(1, 10i64.pow(j));
        let coeffs = coeff_of(omega, 2);
        maxima.push(coeffs.into_iter().fold(0.0f64, f64::max));
    }
    for w in maxima.windows(2) {
        let ratio = w[1] / w[0];
        assert!(
            (5.0..20.0).contains(&ratio),
            "expected ~10x growth per decade toward the resonance, got {ratio}"
        );
    }
}

type BigRationalAlias = num_rational::BigRational;

#[test]
fn real_coordinates_recover_known_second_order_equations() {
    // w = 2: second-order averaged field in real coordinates, including the
    // forcing-dependent linear part
    let (f, sys) = forced_oscillator(rat(2, 1), rat(9, 5));
    let rotated = autonomous::autonomize(&f, &sys).unwrap();
    let res = derive(&rotated, 2).unwrap();
    let (p, p_inv) = conjugate_to_real_matrices();
    let real = conjugate_fields(res.rg_terms(), &p, &p_inv).unwrap();
    assert!(real[0].is_zero());
    let r2 = &real[1];
    let k = rat(9, 5);
    // component one: (12 y1 - 9 y1^3 - 16 y1^2 y2 - 9 y1 y2^2 - 16 y2^3
    //                 - k(6 y1 + 4 y2))/24
    let c = |key: (u32, u32)| {
        r2.component(0)
            .coeff(&TermKey {
                k: vec![0],
                alpha: vec![key.0, key.1],
            })
            .cloned()
            .unwrap_or_else(<CRat as Scalar>::zero)
    };
    let expect_lin_y1 = CRat::new((rat(12, 1) - rat(6, 1) * k.clone()) / rat(24, 1), rat(0, 1));
    assert_eq!(c((1, 0)), expect_lin_y1);
    let expect_lin_y2 = CRat::new(-rat(4, 1) * k.clone() / rat(24, 1), rat(0, 1));
    assert_eq!(c((0, 1)), expect_lin_y2);
    assert_eq!(c((3, 0)), CRat::from_ratio(-9, 24));
    assert_eq!(c((2, 1)), CRat::from_ratio(-16, 24));
    assert_eq!(c((1, 2)), CRat::from_ratio(-9, 24));
    assert_eq!(c((0, 3)), CRat::from_ratio(-16, 24));
    // component two mirrors with the sign pattern of the known form
    let c2 = |key: (u32, u32)| {
        r2.component(1)
            .coeff(&TermKey {
                k: vec![0],
                alpha: vec![key.0, key.1],
            })
            .cloned()
            .unwrap_or_else(<CRat as Scalar>::zero)
    };
    assert_eq!(c2((0, 3)), CRat::from_ratio(-9, 24));
    assert_eq!(c2((1, 2)), CRat::from_ratio(16, 24));
    assert_eq!(c2((2, 1)), CRat::from_ratio(-9, 24));
    assert_eq!(c2((3, 0)), CRat::from_ratio(16, 24));
    let expect2_lin_y1 = CRat::new(-rat(4, 1) * k.clone() / rat(24, 1), rat(0, 1));
    assert_eq!(c2((1, 0)), expect2_lin_y1);
    let expect2_lin_y2 = CRat::new((rat(12, 1) + rat(6, 1) * k) / rat(24, 1), rat(0, 1));
    assert_eq!(c2((0, 1)), expect2_lin_y2);
}
