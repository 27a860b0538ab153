//! Regenerate the shipped system-definition files under `systems/`.
//!
//! Run from the workspace root:
//!
//! ```text
//! cargo run -p rgflow --example write_systems
//! ```

use rgflow::io::{canonical_json, system_to_json, PolyTermJson, RationalFnJson, SystemFileJson};
use rgflow::presets::forced_oscillator;
use std::collections::BTreeMap;

fn rat(p: i64, q: i64) -> num_rational::BigRational {
    num_rational::BigRational::new(p.into(), q.into())
}

fn pterm(coeff: &str, alpha: &[u32]) -> PolyTermJson {
    PolyTermJson {
        coeff: coeff.to_string(),
        alpha: alpha.to_vec(),
    }
}

fn poly(terms: Vec<PolyTermJson>) -> RationalFnJson {
    RationalFnJson { num: terms, den: None }
}

fn main() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("systems");
    std::fs::create_dir_all(&root).expect("create systems directory");
    let write = |name: &str, value: &SystemFileJson| {
        let text = canonical_json(value).expect("serialize");
        let path = root.join(name);
        std::fs::write(&path, text).expect("write file");
        println!("wrote {}", path.display());
    };

    for omega in [3i64, 2, 1] {
        let (f, sys) = forced_oscillator(rat(omega, 1), rat(9, 5));
        let json = system_to_json("autonomous", &sys, Some(&f));
        write(&format!("forced_oscillator_omega{omega}.json"), &json);
    }

    // parametric oscillator x'' + (1 + 2 cos 2t) eps-scaled: first-order
    // matrix [[0, 1], [-1 - 2 cos 2t, 0]] over the base frequency 2
    let mathieu = SystemFileJson {
        mode: "linear".into(),
        n: 2,
        scalar_mode: "exact".into(),
        base_frequencies: vec!["2".into()],
        f_nu: None,
        orders: BTreeMap::from([(
            "1".to_string(),
            vec![
                rgflow::io::TermJson {
                    component: 1,
                    coeff_re: "1".into(),
                    coeff_im: "0".into(),
                    alpha: vec![0, 1],
                    k: vec![0],
                },
                rgflow::io::TermJson {
                    component: 2,
                    coeff_re: "-1".into(),
                    coeff_im: "0".into(),
                    alpha: vec![1, 0],
                    k: vec![-1],
                },
                rgflow::io::TermJson {
                    component: 2,
                    coeff_re: "-1".into(),
                    coeff_im: "0".into(),
                    alpha: vec![1, 0],
                    k: vec![0],
                },
                rgflow::io::TermJson {
                    component: 2,
                    coeff_re: "-1".into(),
                    coeff_im: "0".into(),
                    alpha: vec![1, 0],
                    k: vec![1],
                },
            ],
        )]),
        chart_dim: None,
        gap: None,
        fast: None,
        slow_orders: None,
        chart: None,
        cycle_seed: None,
        period_hint: None,
    };
    write("mathieu_linear.json", &mathieu);

    // enzyme kinetics on its critical manifold, c = 1/2
    let enzyme = SystemFileJson {
        mode: "critical_manifold".into(),
        n: 2,
        scalar_mode: "float".into(),
        base_frequencies: vec![],
        f_nu: None,
        orders: BTreeMap::new(),
        chart_dim: Some(1),
        gap: Some(0.4),
        fast: Some(vec![
            poly(vec![]),
            poly(vec![
                pterm("1", &[1, 0]),
                pterm("-1", &[0, 1]),
                pterm("-1", &[1, 1]),
            ]),
        ]),
        slow_orders: Some(BTreeMap::from([(
            "1".to_string(),
            vec![
                poly(vec![
                    pterm("-1", &[1, 0]),
                    pterm("1/2", &[0, 1]),
                    pterm("1", &[1, 1]),
                ]),
                poly(vec![]),
            ],
        )])),
        chart: Some(vec![
            poly(vec![pterm("1", &[1])]),
            RationalFnJson {
                num: vec![pterm("1", &[1])],
                den: Some(vec![pterm("1", &[0]), pterm("1", &[1])]),
            },
        ]),
        cycle_seed: None,
        period_hint: None,
    };
    write("enzyme_manifold.json", &enzyme);

    // planar oscillator with an attracting unit circle, tangential forcing
    let radial = SystemFileJson {
        mode: "phase".into(),
        n: 2,
        scalar_mode: "float".into(),
        base_frequencies: vec![],
        f_nu: None,
        orders: BTreeMap::new(),
        chart_dim: None,
        gap: None,
        fast: Some(vec![
            poly(vec![
                pterm("1", &[1, 0]),
                pterm("-1", &[3, 0]),
                pterm("-1", &[1, 2]),
                pterm("-1", &[0, 1]),
            ]),
            poly(vec![
                pterm("1", &[0, 1]),
                pterm("-1", &[2, 1]),
                pterm("-1", &[0, 3]),
                pterm("1", &[1, 0]),
            ]),
        ]),
        slow_orders: Some(BTreeMap::from([(
            "1".to_string(),
            vec![
                poly(vec![pterm("-1", &[0, 1])]),
                poly(vec![pterm("1", &[1, 0])]),
            ],
        )])),
        chart: None,
        cycle_seed: Some(vec![1.2, 0.0]),
        period_hint: Some(6.2),
    };
    write("radial_oscillator_phase.json", &radial);
}
