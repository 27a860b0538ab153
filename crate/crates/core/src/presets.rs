//! Built-in sample systems used by the shipped system files, the test
//! suites, and the Python smoke test.

use crate::autonomous::DiagonalLinearPart;
use crate::qp::{FrequencyBasis, QpPoly, QpVector};
use crate::rg::PerturbedSystem;
use crate::scalar::{CRat, Scalar};
use num_rational::BigRational;

fn term(c: CRat, alpha: Vec<u32>, k: Vec<i64>) -> (CRat, Vec<u32>, Vec<i64>) {
    (c, alpha, k)
}

fn big(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// Weakly nonlinear forced oscillator in complex conjugate coordinates
/// `z_1 = (x_1 - i x_2)/2, z_2 = conj(z_1)`:
///
/// ```text
/// dz1/dt =  i z1 + eps/2 (i (z1-z2)^2 - 2 z1^2 + 2 z1 z2 + k sin(w t)) + eps^2/2 (z1 - z2)
/// dz2/dt = -i z2 + eps/2 (-i (z1-z2)^2 - 2 z2^2 + 2 z1 z2 + k sin(w t)) - eps^2/2 (z1 - z2)
/// ```
///
/// Returned as the diagonal rotation `nu = (1, -1)` plus the perturbation
/// series over the single declared forcing frequency `w`.
pub fn forced_oscillator(
    omega: BigRational,
    k_amp: BigRational,
) -> (DiagonalLinearPart, PerturbedSystem<CRat>) {
    let basis = FrequencyBasis::new(vec![omega]).expect("nonzero forcing frequency");
    let f = DiagonalLinearPart::from_integers(&[1, -1]);
    let half = CRat::from_ratio(1, 2);
    let forcing = CRat::from_rationals(
        BigRational::from_integer(0.into()),
        -(&k_amp / BigRational::from_integer(4.into())),
    );
    // eps/2 (k sin wt) = -(i k/4) e^{iwt} + (i k/4) e^{-iwt}
    let g1_comp1 = QpPoly::from_terms(
        2,
        basis.clone(),
        vec![
            term(CRat::new(big(-1, 1), big(1, 2)), vec![2, 0], vec![0]),
            term(CRat::new(big(1, 1), big(-1, 1)), vec![1, 1], vec![0]),
            term(CRat::from_ratio_i(1, 2), vec![0, 2], vec![0]),
            term(forcing.clone(), vec![0, 0], vec![1]),
            term(forcing.neg(), vec![0, 0], vec![-1]),
        ],
    )
    .unwrap();
    let g1_comp2 = QpPoly::from_terms(
        2,
        basis.clone(),
        vec![
            term(CRat::from_ratio_i(-1, 2), vec![2, 0], vec![0]),
            term(CRat::new(big(1, 1), big(1, 1)), vec![1, 1], vec![0]),
            term(CRat::new(big(-1, 1), big(-1, 2)), vec![0, 2], vec![0]),
            term(forcing.clone(), vec![0, 0], vec![1]),
            term(forcing.neg(), vec![0, 0], vec![-1]),
        ],
    )
    .unwrap();
    let g2_comp1 = QpPoly::from_terms(
        2,
        basis.clone(),
        vec![
            term(half.clone(), vec![1, 0], vec![0]),
            term(half.neg(), vec![0, 1], vec![0]),
        ],
    )
    .unwrap();
    let g2_comp2 = g2_comp1.neg();
    let sys = PerturbedSystem::new(2, basis)
        .with_order(1, QpVector::new(vec![g1_comp1, g1_comp2]).unwrap())
        .unwrap()
        .with_order(2, QpVector::new(vec![g2_comp1, g2_comp2]).unwrap())
        .unwrap();
    (f, sys)
}

/// Critical-manifold chart for the planar enzyme-kinetics model
///
/// ```text
/// x1' = eps (-x1 + c x2 + x1 x2)
/// x2' = x1 - x2 - x1 x2
/// ```
///
/// whose fast field has the attracting manifold `x2 = x1/(1 + x1)`,
/// parametrized by `alpha = x1`.
pub fn enzyme_chart(c: f64) -> crate::gsp::CriticalManifoldChart {
    crate::gsp::CriticalManifoldChart {
        ambient_dim: 2,
        chart_dim: 1,
        chart: Box::new(|a: &[f64]| vec![a[0], a[0] / (1.0 + a[0])]),
        chart_jacobian: Some(Box::new(|a: &[f64]| {
            vec![vec![1.0], vec![1.0 / ((1.0 + a[0]) * (1.0 + a[0]))]]
        })),
        fast: Box::new(|x: &[f64]| vec![0.0, x[0] - x[1] - x[0] * x[1]]),
        fast_jacobian: Box::new(|x: &[f64]| {
            vec![vec![0.0, 0.0], vec![1.0 - x[1], -1.0 - x[0]]]
        }),
        slow1: Box::new(move |x: &[f64]| vec![-x[0] + c * x[1] + x[0] * x[1], 0.0]),
        slow1_jacobian: Some(Box::new(move |x: &[f64]| {
            vec![vec![-1.0 + x[1], c + x[0]], vec![0.0, 0.0]]
        })),
        slow2: None,
        gap: 0.4,
    }
}

/// Planar oscillator with an attracting unit circle:
/// `dr/dt = r(1 - r^2), dtheta/dt = 1` in Cartesian coordinates.
pub fn radial_oscillator() -> (
    impl Fn(&[f64]) -> Vec<f64> + Clone,
    impl Fn(&[f64]) -> Vec<Vec<f64>> + Clone,
) {
    let field = |x: &[f64]| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        vec![x[0] * (1.0 - r2) - x[1], x[1] * (1.0 - r2) + x[0]]
    };
    let jacobian = |x: &[f64]| {
        let (a, b) = (x[0], x[1]);
        let r2 = a * a + b * b;
        vec![
            vec![1.0 - r2 - 2.0 * a * a, -2.0 * a * b - 1.0],
            vec![-2.0 * a * b + 1.0, 1.0 - r2 - 2.0 * b * b],
        ]
    };
    (field, jacobian)
}

/// Change of coordinates from the conjugate pair to the real plane,
/// `x = P z` with `x_1 = z_1 + z_2, x_2 = i(z_1 - z_2)`.
pub fn conjugate_to_real_matrices() -> (Vec<Vec<CRat>>, Vec<Vec<CRat>>) {
    crate::autonomous::realification_matrices::<CRat>()
}
