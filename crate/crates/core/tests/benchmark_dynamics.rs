//! Cross-validation of the reduced invariant sets against the full flow of
//! the forced-oscillator benchmark.

mod common;

use common::rat;
use num_complex::Complex64;
use rgflow::autonomous::{autonomize, conjugate_fields, polar_reduce, realification_matrices};
use rgflow::dynamics::{
    error_scan, find_fixed_points_of_fields, radial_orbits, seed_grid, DynamicsError, Stability,
};
use rgflow::ode::{integrate, IntegratorConfig};
use rgflow::presets::forced_oscillator;
use rgflow::rg::derive;
use rgflow::scalar::CRat;

#[test]
fn full_flow_shadows_the_predicted_invariant_circle() {
    // the reduced equation predicts an attracting circle; the full flow
    // started near its image must stay near the image family
    let (f, sys) = forced_oscillator(rat(3, 1), rat(9, 5));
    let rot = autonomize(&f, &sys).unwrap();
    let res = derive(&rot, 2).unwrap();
    let polar = polar_reduce(&f, &res).unwrap();
    let eps = 0.01;
    let orbits = radial_orbits(&polar, eps);
    assert_eq!(orbits.len(), 1);
    let r_star = orbits[0].radius;
    assert!(orbits[0].stable);
    let k = 1.8;
    let omega = 3.0;
    let image = |t: f64, theta: f64| -> (f64, f64) {
        let y = vec![
            Complex64::from_polar(r_star, theta),
            Complex64::from_polar(r_star, -theta),
        ];
        let x_cap = res.eval_transform(eps, t, &y);
        let z1 = Complex64::new(0.0, t).exp() * x_cap[0];
        let z2 = Complex64::new(0.0, -t).exp() * x_cap[1];
        ((z1 + z2).re, (Complex64::I * (z1 - z2)).re)
    };
    let (x10, x20) = image(0.0, 0.3);
    let full = move |t: f64, s: &[Complex64]| {
        let (x1, x2) = (s[0], s[1]);
        vec![
            x2 + eps * x2 * x2 + eps * k * Complex64::new((omega * t).sin(), 0.0),
            -x1 + eps * (x2 * x2 - x1 * x2) + eps * eps * x2,
        ]
    };
    let traj = integrate(
        &full,
        &[Complex64::new(x10 + 0.01, 0.0), Complex64::new(x20, 0.0)],
        0.0,
        5.0 / eps,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let mut sup = 0.0f64;
    for (idx, (t, s)) in traj.nodes().enumerate() {
        if idx % 3 != 0 {
            continue;
        }
        let mut best = f64::INFINITY;
        for i in 0..256 {
            let th = 2.0 * std::f64::consts::PI * i as f64 / 256.0;
            let (ix1, ix2) = image(t, th);
            let d = ((s[0].re - ix1).powi(2) + (s[1].re - ix2).powi(2)).sqrt();
            best = best.min(d);
        }
        sup = sup.max(best);
    }
    assert!(sup < 0.05, "distance to the predicted orbit family: {sup}");
}

#[test]
fn escaping_trajectories_are_dropped_and_reported() {
    let (f, sys) = forced_oscillator(rat(3, 1), rat(9, 5));
    let rot = autonomize(&f, &sys).unwrap();
    let res = derive(&rot, 1).unwrap();
    let y0 = vec![Complex64::new(0.2, -0.1), Complex64::new(0.2, 0.1)];
    // an escape radius below the trajectory scale invalidates every sample
    let err = error_scan(
        &res,
        &y0,
        5.0,
        &[0.04, 0.02],
        &IntegratorConfig::default(),
        1e-3,
    );
    assert!(matches!(err, Err(DynamicsError::AllPointsEscaped)));
}

#[test]
fn bistable_regime_has_two_stable_points_and_a_saddle() {
    // at this forcing amplitude the averaged planar equation carries a
    // symmetric pair of stable fixed points separated by a saddle at the
    // origin
    let (f, sys) = forced_oscillator(rat(2, 1), rat(9, 5));
    let res = derive(&autonomize(&f, &sys).unwrap(), 2).unwrap();
    let (p, p_inv) = realification_matrices::<CRat>();
    let real = conjugate_fields(res.rg_terms(), &p, &p_inv).unwrap();
    let fps = find_fixed_points_of_fields(&real, 0.01, &seed_grid(2, -3.0, 3.0, 13)).unwrap();
    let stable: Vec<_> = fps
        .iter()
        .filter(|fp| fp.stability == Stability::Stable)
        .collect();
    assert_eq!(stable.len(), 2, "{fps:?}");
    // symmetric pair
    assert!((stable[0].point[0].re + stable[1].point[0].re).abs() < 1e-8);
    assert!((stable[0].point[1].re + stable[1].point[1].re).abs() < 1e-8);
    assert!(fps
        .iter()
        .any(|fp| fp.stability == Stability::Saddle
            && fp.point.iter().map(|z| z.norm()).sum::<f64>() < 1e-6));
}
