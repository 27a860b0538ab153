//! Numeric round trips for the rotation-removal step and the polar
//! reduction.

mod common;

use common::{random_system, rat, rng};
use num_complex::Complex64;
use rand::Rng;
use rgflow::autonomous::{autonomize, polar_reduce, DiagonalLinearPart};
use rgflow::presets::forced_oscillator;
use rgflow::rg::derive;

#[test]
fn rotated_field_matches_conjugated_evaluation() {
    // field of the rotated system at (t, X) equals e^{-Ft} g(e^{Ft} X)
    let mut r = rng(303);
    for trial in 0..5 {
        let sys = random_system(&mut r, 3, 0, 2, 3);
        let nu: Vec<i64> = (0..3).map(|_| r.random_range(-3..=3i64)).collect();
        let f = DiagonalLinearPart::from_integers(&nu);
        let rotated = autonomize(&f, &sys).unwrap();
        let eps = 0.05;
        for _ in 0..4 {
            let t = r.random_range(0.0..6.0);
            let x: Vec<Complex64> = (0..3)
                .map(|_| Complex64::new(r.random_range(-0.8..0.8), r.random_range(-0.8..0.8)))
                .collect();
            let lhs = rotated.eval_field(eps, t, &x);
            // conjugate through the rotation
            let rotated_x: Vec<Complex64> = x
                .iter()
                .zip(&nu)
                .map(|(v, &n)| v * Complex64::new(0.0, n as f64 * t).exp())
                .collect();
            let g = sys.eval_field(eps, t, &rotated_x);
            let rhs: Vec<Complex64> = g
                .iter()
                .zip(&nu)
                .map(|(v, &n)| v * Complex64::new(0.0, -(n as f64) * t).exp())
                .collect();
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).norm() < 1e-12, "trial {trial}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn polar_form_reproduces_the_field_on_circles() {
    // on y = (r e^{i th}, r e^{-i th}) the first component of the averaged
    // field must equal e^{i th} (dr + i r dth)
    let (f, sys) = forced_oscillator(rat(3, 1), rat(9, 5));
    let res = derive(&autonomize(&f, &sys).unwrap(), 2).unwrap();
    let polar = polar_reduce(&f, &res).unwrap();
    let mut rr = rng(404);
    let eps = 0.02;
    for _ in 0..12 {
        let radius = rr.random_range(0.2..1.2);
        let theta = rr.random_range(0.0..(2.0 * std::f64::consts::PI));
        let y = vec![
            Complex64::from_polar(radius, theta),
            Complex64::from_polar(radius, -theta),
        ];
        let field = res.eval_rg_field(eps, &y);
        let dr = polar.eval_radial(eps, radius);
        let dth = polar.eval_angular(eps, radius);
        let expected = Complex64::from_polar(1.0, theta) * Complex64::new(dr, radius * dth);
        assert!(
            (field[0] - expected).norm() < 1e-12,
            "r={radius} th={theta}: {} vs {expected}",
            field[0]
        );
        // conjugate component mirrors
        assert!((field[1] - expected.conj()).norm() < 1e-12);
    }
}
