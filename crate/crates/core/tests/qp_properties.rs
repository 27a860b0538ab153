//! Ring laws and calculus identities for the quasi-periodic polynomial
//! algebra, on randomized inputs in both coefficient modes.

mod common;

use common::{basis_of_dim, random_poly, rng};
use num_complex::Complex64;
use proptest::prelude::*;
use rgflow::qp::{FrequencyBasis, QpPoly};
use rgflow::scalar::{C64, CRat, Scalar};

fn small_poly_strategy() -> impl Strategy<Value = QpPoly<CRat>> {
    // up to three terms over two state variables and one frequency
    prop::collection::vec(
        (
            -3i64..=3,
            1i64..=3,
            -3i64..=3,
            1i64..=3,
            prop::collection::vec(0u32..=2, 2),
            -2i64..=2,
        ),
        1..=3,
    )
    .prop_map(|raw| {
        let basis = FrequencyBasis::new(vec![num_rational::BigRational::from_integer(1.into())])
            .unwrap();
        let terms: Vec<_> = raw
            .into_iter()
            .map(|(pn, pd, qn, qd, alpha, k)| {
                (
                    CRat::new(
                        num_rational::BigRational::new(pn.into(), pd.into()),
                        num_rational::BigRational::new(qn.into(), qd.into()),
                    ),
                    alpha,
                    vec![k],
                )
            })
            .collect();
        QpPoly::from_terms(2, basis, terms).unwrap()
    })
}

proptest! {
    #[test]
    fn ring_laws_exact(a in small_poly_strategy(), b in small_poly_strategy(), c in small_poly_strategy()) {
        // commutativity
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        // associativity
        prop_assert_eq!(
            a.add(&b).unwrap().add(&c).unwrap(),
            a.add(&b.add(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            a.mul(&b).unwrap().mul(&c).unwrap(),
            a.mul(&b.mul(&c).unwrap()).unwrap()
        );
        // distributivity
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn average_is_projection(a in small_poly_strategy()) {
        let avg = a.average_t().unwrap();
        prop_assert_eq!(avg.average_t().unwrap(), avg);
    }

    #[test]
    fn antiderivative_inverts_time_derivative(a in small_poly_strategy()) {
        let mean_zero = a.sub(&a.average_t().unwrap()).unwrap();
        let anti = mean_zero.antiderivative_t().unwrap();
        prop_assert_eq!(anti.diff_t(), mean_zero);
        prop_assert!(anti.average_t().unwrap().is_zero());
    }
}

#[test]
fn ring_laws_float_relative() {
    let mut r = rng(11);
    let basis = basis_of_dim(1);
    for _ in 0..50 {
        let a = random_poly(&mut r, 2, &basis, 3, 3).map_scalars(|c| C64(c.to_complex64()));
        let b = random_poly(&mut r, 2, &basis, 3, 3).map_scalars(|c| C64(c.to_complex64()));
        let c = random_poly(&mut r, 2, &basis, 3, 3).map_scalars(|c| C64(c.to_complex64()));
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        // compare numerically at sample points with relative tolerance
        let y = [Complex64::new(0.37, -0.21), Complex64::new(-0.8, 0.44)];
        for t in [0.0, 0.9, 2.3] {
            let l = lhs.eval(t, &y);
            let rr = rhs.eval(t, &y);
            let scale = l.norm().max(rr.norm()).max(1.0);
            assert!((l - rr).norm() / scale < 1e-12);
        }
    }
}

#[test]
fn eval_is_an_algebra_homomorphism() {
    // evaluating an algebraic combination equals combining the evaluations
    let mut r = rng(17);
    let basis = basis_of_dim(2);
    for _ in 0..20 {
        let p = random_poly(&mut r, 3, &basis, 4, 3);
        let q = random_poly(&mut r, 3, &basis, 4, 3);
        let sum = p.add(&q).unwrap();
        let prod = p.mul(&q).unwrap();
        for trial in 0..2 {
            let t = 0.7 * trial as f64 + 0.13;
            let y: Vec<Complex64> = (0..3)
                .map(|i| Complex64::new(0.3 + 0.1 * i as f64, -0.2 + 0.05 * trial as f64))
                .collect();
            let pv = p.eval(t, &y);
            let qv = q.eval(t, &y);
            let scale = pv.norm().max(qv.norm()).max(1.0);
            assert!((sum.eval(t, &y) - (pv + qv)).norm() / scale < 1e-10);
            assert!((prod.eval(t, &y) - pv * qv).norm() / (scale * scale) < 1e-10);
        }
    }
}
