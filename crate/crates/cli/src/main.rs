//! File-driven front end: parse a system definition, run the requested
//! reduction or scan, and emit JSON results, rendered equations, or CSV.
//!
//! Exit codes: 0 success, 2 input error, 3 derivation/algebra error,
//! 4 numeric non-convergence.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rgflow::autonomous::{
    autonomize, conjugate_fields, equivariance_violations, polar_reduce, DiagonalLinearPart,
};
use rgflow::dynamics::{
    default_eps_grid, error_scan, find_fixed_points, find_fixed_points_of_fields, radial_orbits,
    seed_grid, Stability, DEFAULT_HORIZON,
};
use rgflow::floquet::{exponent_collisions, linear_rg, monodromy_numeric};
use rgflow::gsp::GspReduction;
use rgflow::io::{
    self, canonical_json, linear_result_json, parse_system_file, rg_result_json, AnyLinear,
    AnySystem, LoadedSystem,
};
use rgflow::ode::IntegratorConfig;
use rgflow::phase::phase_reduce;
use rgflow::qp::QpVector;
use rgflow::render::{fmt_f64, render_graded_equations, render_radial};
use rgflow::rg::{derive, RgResult};
use rgflow::scalar::Scalar;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rgflow",
    about = "Averaged equations, Floquet exponents, slow manifolds, and phase models for perturbed ODEs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonIo {
    /// System definition file
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output file; stdout when absent
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the averaged equations and the coordinate change
    Derive {
        #[command(flatten)]
        io: CommonIo,
        /// Truncation order (at least 1)
        #[arg(long)]
        order: usize,
        /// Also write a human-readable rendering next to the JSON
        #[arg(long, value_name = "FILE")]
        render: Option<PathBuf>,
        /// Conjugate a planar conjugate-pair result to the real plane
        #[arg(long)]
        real: bool,
    },
    /// Sup-norm error scan of the reduced model over an epsilon grid
    Verify {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        order: usize,
        /// Comma-separated epsilon grid
        #[arg(long, value_name = "E1,E2,...")]
        eps_grid: Option<String>,
        /// Horizon constant: trajectories run to horizon/eps
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: f64,
        /// Initial state as comma-separated re,im pairs
        #[arg(long, value_name = "RE,IM,...")]
        y0: Option<String>,
    },
    /// Fixed points of the truncated averaged field with stability
    FixedPoints {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        eps: f64,
        /// Seed grid as lo,hi,count per axis
        #[arg(long, value_name = "LO,HI,COUNT", default_value = "-6,6,7")]
        seeds: String,
        /// Work in real-plane coordinates (conjugate-pair systems)
        #[arg(long)]
        real: bool,
    },
    /// Radial orbits of an equivariant planar reduction
    Orbits {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Truncated Floquet exponents and monodromy cross-validation
    Floquet {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        eps: Option<f64>,
        /// Epsilon sweep as lo,hi,count producing CSV rows
        #[arg(long, value_name = "LO,HI,COUNT")]
        sweep: Option<String>,
    },
    /// Reduction onto a critical manifold chart
    Gsp {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Chart grid as lo,hi,count (one-dimensional charts)
        #[arg(long, value_name = "LO,HI,COUNT", default_value = "0.2,2,10")]
        alpha: String,
    },
    /// Phase model and averaged coupling of a forced oscillator
    Phase {
        #[command(flatten)]
        io: CommonIo,
    },
}

enum CliError {
    Input(String),
    Math(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Math(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Math(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        match e {
            io::IoError::File(_) | io::IoError::Json(_) | io::IoError::Invalid { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<rgflow::RgError> for CliError {
    fn from(e: rgflow::RgError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<rgflow::autonomous::AutonomousError> for CliError {
    fn from(e: rgflow::autonomous::AutonomousError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<rgflow::floquet::FloquetError> for CliError {
    fn from(e: rgflow::floquet::FloquetError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<rgflow::gsp::GspError> for CliError {
    fn from(e: rgflow::gsp::GspError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<rgflow::dynamics::DynamicsError> for CliError {
    fn from(e: rgflow::dynamics::DynamicsError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<rgflow::phase::PhaseError> for CliError {
    fn from(e: rgflow::phase::PhaseError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn write_output(target: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match target {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("malformed {what}: {p:?}")))
        })
        .collect()
}

fn parse_range(s: &str, what: &str) -> Result<(f64, f64, usize), CliError> {
    let parts = parse_f64_list(s, what)?;
    if parts.len() != 3 || parts[2] < 1.0 {
        return Err(CliError::Input(format!(
            "{what} must be lo,hi,count with count >= 1"
        )));
    }
    Ok((parts[0], parts[1], parts[2] as usize))
}

fn parse_y0(s: &Option<String>, n: usize) -> Result<Vec<Complex64>, CliError> {
    match s {
        None => Ok(vec![Complex64::new(0.2, 0.0); n]),
        Some(text) => {
            let vals = parse_f64_list(text, "y0")?;
            if vals.len() != 2 * n {
                return Err(CliError::Input(format!(
                    "y0 needs {} numbers (re,im per component), found {}",
                    2 * n,
                    vals.len()
                )));
            }
            Ok(vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
        }
    }
}

/// Nonzero derivation order or an input error.
fn checked_order(order: usize) -> Result<usize, CliError> {
    if order == 0 {
        return Err(CliError::Input(
            "order must be at least 1".to_string(),
        ));
    }
    Ok(order)
}

/// A derivation in either scalar mode together with the optional rotation
/// data needed for rendering and realification.
enum AnyDerivation {
    Exact(RgResult<rgflow::CRat>, Option<DiagonalLinearPart>),
    Float(RgResult<rgflow::C64>, Option<DiagonalLinearPart>),
}

fn derive_any(loaded: &LoadedSystem, order: usize) -> Result<AnyDerivation, CliError> {
    match loaded {
        LoadedSystem::Periodic { sys } => match sys {
            AnySystem::Exact(s) => Ok(AnyDerivation::Exact(derive(s, order)?, None)),
            AnySystem::Float(s) => Ok(AnyDerivation::Float(derive(s, order)?, None)),
        },
        LoadedSystem::Autonomous { linear_part, sys } => match sys {
            AnySystem::Exact(s) => {
                let rotated = autonomize(linear_part, s)?;
                Ok(AnyDerivation::Exact(
                    derive(&rotated, order)?,
                    Some(linear_part.clone()),
                ))
            }
            AnySystem::Float(s) => {
                let rotated = autonomize(linear_part, s)?;
                Ok(AnyDerivation::Float(
                    derive(&rotated, order)?,
                    Some(linear_part.clone()),
                ))
            }
        },
        _ => Err(CliError::Input(
            "this subcommand needs a periodic or autonomous system".to_string(),
        )),
    }
}

fn realify<S: Scalar>(
    res: &RgResult<S>,
    f: &Option<DiagonalLinearPart>,
) -> Result<Vec<QpVector<S>>, CliError> {
    if f.is_none() || res.n() != 2 {
        return Err(CliError::Input(
            "--real needs a planar autonomous conjugate-pair system".to_string(),
        ));
    }
    let (p, p_inv) = rgflow::autonomous::realification_matrices::<S>();
    Ok(conjugate_fields(res.rg_terms(), &p, &p_inv)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Derive {
            io: files,
            order,
            render,
            real,
        } => {
            let order = checked_order(order)?;
            let (_, loaded) = parse_system_file(&files.input)?;
            if let LoadedSystem::Linear { sys } = &loaded {
                let (json, rendered) = match sys {
                    AnyLinear::Exact(a) => {
                        let res = linear_rg(a, order)?;
                        (canonical_json(&linear_result_json(&res))?, render_linear(&res))
                    }
                    AnyLinear::Float(a) => {
                        let res = linear_rg(a, order)?;
                        (canonical_json(&linear_result_json(&res))?, render_linear(&res))
                    }
                };
                write_output(&files.output, &json)?;
                if let Some(path) = render {
                    write_output(&Some(path), &rendered)?;
                }
                return Ok(());
            }
            let derivation = derive_any(&loaded, order)?;
            let (json, rendered) = match &derivation {
                AnyDerivation::Exact(res, f) => render_derivation(res, f, real)?,
                AnyDerivation::Float(res, f) => render_derivation(res, f, real)?,
            };
            write_output(&files.output, &json)?;
            if let Some(path) = render {
                write_output(&Some(path), &rendered)?;
            }
            Ok(())
        }
        Command::Verify {
            io: files,
            order,
            eps_grid,
            horizon,
            y0,
        } => {
            let order = checked_order(order)?;
            let (_, loaded) = parse_system_file(&files.input)?;
            let derivation = derive_any(&loaded, order)?;
            let grid = match eps_grid {
                Some(s) => parse_f64_list(&s, "eps grid")?,
                None => default_eps_grid(),
            };
            let cfg = IntegratorConfig::default();
            let report = match &derivation {
                AnyDerivation::Exact(res, _) => {
                    let start = parse_y0(&y0, res.n())?;
                    error_scan(res, &start, horizon, &grid, &cfg, 1e6)?
                }
                AnyDerivation::Float(res, _) => {
                    let start = parse_y0(&y0, res.n())?;
                    error_scan(res, &start, horizon, &grid, &cfg, 1e6)?
                }
            };
            let mut csv = String::from("eps,sup_error\n");
            for s in &report.samples {
                if s.valid {
                    csv.push_str(&format!("{},{}\n", fmt_f64(s.eps), fmt_f64(s.sup_error)));
                } else {
                    csv.push_str(&format!("{},escaped\n", fmt_f64(s.eps)));
                }
            }
            csv.push_str(&format!("# fitted_slope = {}\n", fmt_f64(report.slope)));
            write_output(&files.output, &csv)
        }
        Command::FixedPoints {
            io: files,
            order,
            eps,
            seeds,
            real,
        } => {
            let order = checked_order(order)?;
            let (_, loaded) = parse_system_file(&files.input)?;
            let derivation = derive_any(&loaded, order)?;
            let (lo, hi, count) = parse_range(&seeds, "seeds")?;
            let points = match &derivation {
                AnyDerivation::Exact(res, f) => {
                    let grid = seed_grid(res.n(), lo, hi, count);
                    if real {
                        let fields = realify(res, f)?;
                        find_fixed_points_of_fields(&fields, eps, &grid)?
                    } else {
                        find_fixed_points(res, eps, &grid)?
                    }
                }
                AnyDerivation::Float(res, f) => {
                    let grid = seed_grid(res.n(), lo, hi, count);
                    if real {
                        let fields = realify(res, f)?;
                        find_fixed_points_of_fields(&fields, eps, &grid)?
                    } else {
                        find_fixed_points(res, eps, &grid)?
                    }
                }
            };
            let n = match &derivation {
                AnyDerivation::Exact(res, _) => res.n(),
                AnyDerivation::Float(res, _) => res.n(),
            };
            let mut csv = String::new();
            for i in 0..n {
                csv.push_str(&format!("x{}_re,x{}_im,", i + 1, i + 1));
            }
            for i in 0..n {
                csv.push_str(&format!("lambda{}_re,", i + 1));
            }
            csv.push_str("class\n");
            for fp in &points {
                for z in &fp.point {
                    csv.push_str(&format!("{},{},", fmt_f64(z.re), fmt_f64(z.im)));
                }
                for l in &fp.eigenvalues {
                    csv.push_str(&format!("{},", fmt_f64(l.re)));
                }
                csv.push_str(match fp.stability {
                    Stability::Stable => "stable\n",
                    Stability::Unstable => "unstable\n",
                    Stability::Saddle => "saddle\n",
                    Stability::NonHyperbolic => "non-hyperbolic\n",
                });
            }
            write_output(&files.output, &csv)
        }
        Command::Orbits {
            io: files,
            order,
            eps,
        } => {
            let order = checked_order(order)?;
            let (_, loaded) = parse_system_file(&files.input)?;
            let derivation = derive_any(&loaded, order)?;
            let orbits = match &derivation {
                AnyDerivation::Exact(res, f) => {
                    let f = f.as_ref().ok_or_else(|| {
                        CliError::Input("orbits needs an autonomous system".to_string())
                    })?;
                    radial_orbits(&polar_reduce(f, res)?, eps)
                }
                AnyDerivation::Float(res, f) => {
                    let f = f.as_ref().ok_or_else(|| {
                        CliError::Input("orbits needs an autonomous system".to_string())
                    })?;
                    radial_orbits(&polar_reduce(f, res)?, eps)
                }
            };
            let mut csv = String::from("radius,stable\n");
            for o in &orbits {
                csv.push_str(&format!("{},{}\n", fmt_f64(o.radius), o.stable));
            }
            write_output(&files.output, &csv)
        }
        Command::Floquet {
            io: files,
            order,
            eps,
            sweep,
        } => {
            let order = checked_order(order)?;
            let (_, loaded) = parse_system_file(&files.input)?;
            let LoadedSystem::Linear { sys } = &loaded else {
                return Err(CliError::Input(
                    "floquet needs a linear-mode system".to_string(),
                ));
            };
            let grid: Vec<f64> = match (&sweep, eps) {
                (Some(s), _) => {
                    let (lo, hi, count) = parse_range(s, "sweep")?;
                    (0..count)
                        .map(|i| lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64)
                        .collect()
                }
                (None, Some(e)) => vec![e],
                (None, None) => {
                    return Err(CliError::Input("floquet needs --eps or --sweep".to_string()))
                }
            };
            let cfg = IntegratorConfig {
                abs_tol: 1e-12,
                rel_tol: 1e-12,
                ..Default::default()
            };
            let csv = match sys {
                AnyLinear::Exact(a) => {
                    let res = linear_rg(a, order)?;
                    floquet_csv(a, &res, &grid, &cfg)?
                }
                AnyLinear::Float(a) => {
                    let res = linear_rg(a, order)?;
                    floquet_csv(a, &res, &grid, &cfg)?
                }
            };
            write_output(&files.output, &csv)
        }
        Command::Gsp {
            io: files,
            order,
            alpha,
        } => {
            let (_, loaded) = parse_system_file(&files.input)?;
            let LoadedSystem::CriticalManifold { chart } = &loaded else {
                return Err(CliError::Input(
                    "gsp needs a critical_manifold-mode system".to_string(),
                ));
            };
            if chart.chart_dim != 1 {
                return Err(CliError::Input(
                    "the grid front end covers one-dimensional charts; use the library for higher-dimensional ones"
                        .to_string(),
                ));
            }
            let (lo, hi, count) = parse_range(&alpha, "alpha")?;
            let red = GspReduction::new(chart, order)?;
            let mut csv = String::from("alpha,r1");
            for i in 0..chart.ambient_dim {
                csv.push_str(&format!(",h1_{}", i + 1));
            }
            if order == 2 {
                csv.push_str(",r2");
                for i in 0..chart.ambient_dim {
                    csv.push_str(&format!(",h2_{}", i + 1));
                }
            }
            csv.push('\n');
            for i in 0..count {
                let a = lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64;
                chart.validate_at(&[a]).map_err(|e| CliError::Math(e.to_string()))?;
                let at = red.reduce_at(&[a])?;
                csv.push_str(&fmt_f64(a));
                csv.push_str(&format!(",{}", fmt_f64(at.r1[0])));
                for v in &at.h1 {
                    csv.push_str(&format!(",{}", fmt_f64(*v)));
                }
                if let (Some(r2), Some(h2)) = (&at.r2, &at.h2) {
                    csv.push_str(&format!(",{}", fmt_f64(r2[0])));
                    for v in h2 {
                        csv.push_str(&format!(",{}", fmt_f64(*v)));
                    }
                }
                csv.push('\n');
            }
            write_output(&files.output, &csv)
        }
        Command::Phase { io: files } => {
            let (_, loaded) = parse_system_file(&files.input)?;
            let LoadedSystem::Phase { dynamics } = &loaded else {
                return Err(CliError::Input("phase needs a phase-mode system".to_string()));
            };
            let cfg = IntegratorConfig {
                abs_tol: 1e-12,
                rel_tol: 1e-11,
                ..Default::default()
            };
            let red = phase_reduce(
                &*dynamics.field,
                &*dynamics.jacobian,
                &*dynamics.forcing,
                &dynamics.cycle_seed,
                dynamics.period_hint,
                &cfg,
            )?;
            let n = dynamics.cycle_seed.len();
            let mut out = format!(
                "# period = {}\n# coupling = {}\n# normalization_residual = {}\n",
                fmt_f64(red.model.period),
                fmt_f64(red.coupling),
                fmt_f64(red.model.normalization_residual)
            );
            out.push_str("t");
            for i in 0..n {
                out.push_str(&format!(",u{}", i + 1));
            }
            for i in 0..n {
                out.push_str(&format!(",q{}", i + 1));
            }
            out.push('\n');
            // decimate the dense model to a readable table
            let stride = red.model.times.len() / 128;
            for idx in (0..red.model.times.len()).step_by(stride.max(1)) {
                out.push_str(&fmt_f64(red.model.times[idx]));
                for v in &red.model.orbit[idx] {
                    out.push_str(&format!(",{}", fmt_f64(*v)));
                }
                for v in &red.model.adjoint[idx] {
                    out.push_str(&format!(",{}", fmt_f64(*v)));
                }
                out.push('\n');
            }
            write_output(&files.output, &out)
        }
    }
}

fn render_derivation<S: Scalar>(
    res: &RgResult<S>,
    f: &Option<DiagonalLinearPart>,
    real: bool,
) -> Result<(String, String), CliError> {
    let mut json = rg_result_json(res, f.as_ref());
    let mut rendered = String::new();
    if real {
        let fields = realify(res, f)?;
        json.frame = Some("real_plane".to_string());
        json.r = fields
            .iter()
            .map(|v| {
                v.components()
                    .iter()
                    .map(rgflow::io::poly_terms_json)
                    .collect()
            })
            .collect();
        json.u.clear();
        rendered.push_str("# averaged equations, real plane\n");
        rendered.push_str(&render_graded_equations("y", &fields));
        rendered.push('\n');
    } else {
        rendered.push_str("# averaged equations\n");
        rendered.push_str(&render_graded_equations("y", res.rg_terms()));
        rendered.push('\n');
        rendered.push_str("# coordinate change grades\n");
        rendered.push_str(&render_graded_equations("u", res.transform_terms()));
        rendered.push('\n');
        if let Some(fp) = f {
            if equivariance_violations(fp, res).is_empty() {
                if let Ok(polar) = polar_reduce(fp, res) {
                    rendered.push_str("# polar form on the conjugate pair\n");
                    rendered.push_str(&render_radial("dr/dt", &polar.radial));
                    rendered.push('\n');
                    rendered.push_str(&render_radial("dtheta/dt", &polar.angular));
                    rendered.push('\n');
                }
            }
        }
    }
    Ok((canonical_json(&json)?, rendered))
}

fn render_linear<S: Scalar>(res: &rgflow::floquet::LinearRgResult<S>) -> String {
    let mut out = String::from("# averaged matrices per order\n");
    for i in 1..=res.order() {
        out.push_str(&format!("order {i}:\n"));
        for row in res.r_term(i) {
            let rendered: Vec<String> = row.iter().map(rgflow::render::render_poly).collect();
            out.push_str(&format!("  [ {} ]\n", rendered.join(", ")));
        }
    }
    out
}

fn floquet_csv<S: Scalar>(
    a: &rgflow::floquet::MatrixFourierSeries<S>,
    res: &rgflow::floquet::LinearRgResult<S>,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<String, CliError> {
    let n = a.n();
    let mut csv = String::from("eps,defect_norm");
    for i in 0..n {
        csv.push_str(&format!(",exponent_re_{},exponent_im_{}", i + 1, i + 1));
    }
    csv.push('\n');
    for &eps in grid {
        let rep = monodromy_numeric(a, res, eps, cfg)?;
        let mut ev = res.floquet_exponents(eps);
        ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        csv.push_str(&format!("{},{}", fmt_f64(eps), fmt_f64(rep.defect)));
        for l in &ev {
            csv.push_str(&format!(",{},{}", fmt_f64(l.re), fmt_f64(l.im)));
        }
        csv.push('\n');
    }
    let collisions = exponent_collisions(res, grid, 1e-6);
    if !collisions.is_empty() {
        csv.push_str(&format!(
            "# exponent paths within 1e-6 of each other at eps = {:?}; the truncated series may be near its validity edge\n",
            collisions
        ));
    }
    Ok(csv)
}
