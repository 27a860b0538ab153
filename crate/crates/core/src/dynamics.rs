//! Numerical consequences of a derived reduction: sup-norm error scans over
//! an epsilon grid, invariant-set detection by Newton iteration with the
//! exact symbolic Jacobian, and root finding for radial reductions.

use crate::autonomous::PolarReduction;
use crate::linalg::{self, eigenvalues};
use crate::ode::{integrate, IntegratorConfig, OdeError};
use crate::qp::{QpError, QpVector};
use crate::rg::{RgError, RgResult};
use crate::scalar::Scalar;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Algebra(#[from] QpError),
    #[error(transparent)]
    Derivation(#[from] RgError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("every epsilon sample escaped the integration domain")]
    AllPointsEscaped,
    #[error("slope fit requires at least two valid samples")]
    NotEnoughSamples,
}

/// Default epsilon grid for order scans.
pub fn default_eps_grid() -> Vec<f64> {
    vec![0.04, 0.02, 0.01, 0.005]
}

/// Time-horizon constant: trajectories are followed up to `T / eps`.
pub const DEFAULT_HORIZON: f64 = 5.0;

#[derive(Clone, Debug)]
pub struct ErrorSample {
    pub eps: f64,
    pub sup_error: f64,
    /// false when the trajectory left the escape radius and the point was
    /// dropped from the fit
    pub valid: bool,
}

#[derive(Clone, Debug)]
pub struct ErrorScanReport {
    pub samples: Vec<ErrorSample>,
    pub slope: f64,
    pub horizon: f64,
}

/// Least-squares slope of `log err` against `log eps` over valid samples.
fn fit_slope(samples: &[ErrorSample]) -> Result<f64, DynamicsError> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.valid && s.sup_error > 0.0)
        .map(|s| (s.eps.ln(), s.sup_error.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(DynamicsError::NotEnoughSamples);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Sup-norm error of the reduced model against the full flow.
///
/// For each eps the full system is integrated from `x(0) = alpha_0(y0)`
/// jointly with the reduced equation from `y0`, and
/// `sup_t ||x(t) - alpha_t(y(t))||` is taken over accepted step endpoints on
/// `0 <= t <= horizon/eps`.
pub fn error_scan<S: Scalar>(
    res: &RgResult<S>,
    y0: &[Complex64],
    horizon: f64,
    eps_grid: &[f64],
    cfg: &IntegratorConfig,
    escape_radius: f64,
) -> Result<ErrorScanReport, DynamicsError> {
    let mut samples = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        match sup_error_single(res, y0, horizon / eps, eps, cfg, escape_radius) {
            Ok(err) => samples.push(ErrorSample {
                eps,
                sup_error: err,
                valid: true,
            }),
            Err(DynamicsError::Ode(_)) => samples.push(ErrorSample {
                eps,
                sup_error: f64::NAN,
                valid: false,
            }),
            Err(e) => return Err(e),
        }
    }
    if samples.iter().all(|s| !s.valid) {
        return Err(DynamicsError::AllPointsEscaped);
    }
    let slope = fit_slope(&samples)?;
    Ok(ErrorScanReport {
        samples,
        slope,
        horizon,
    })
}

/// Sup error for a single eps over `0 <= t <= t_end`. Exposed for
/// long-interval boundedness checks where the horizon scales differently.
pub fn sup_error_single<S: Scalar>(
    res: &RgResult<S>,
    y0: &[Complex64],
    t_end: f64,
    eps: f64,
    cfg: &IntegratorConfig,
    escape_radius: f64,
) -> Result<f64, DynamicsError> {
    sup_error_mixed(res, res.order(), y0, t_end, eps, cfg, escape_radius)
}

/// Sup error with the transformation truncated at `transform_depth` while
/// the reduced flow keeps the full derivation order. Depth below the
/// derivation order gives the mixed approximations used on very long
/// horizons, where the flow must resolve the slow drift but the coordinate
/// change may stay low order.
#[allow(clippy::too_many_arguments)]
pub fn sup_error_mixed<S: Scalar>(
    res: &RgResult<S>,
    transform_depth: usize,
    y0: &[Complex64],
    t_end: f64,
    eps: f64,
    cfg: &IntegratorConfig,
    escape_radius: f64,
) -> Result<f64, DynamicsError> {
    if eps == 0.0 {
        return Ok(0.0);
    }
    let n = res.n();
    let sys = res.system();
    let x0 = res.eval_transform_truncated(transform_depth, eps, 0.0, y0);
    let mut joint0 = x0;
    joint0.extend_from_slice(y0);
    let field = move |t: f64, state: &[Complex64]| {
        let (x, y) = state.split_at(n);
        let mut out = sys.eval_field(eps, t, x);
        out.extend(res.eval_rg_field(eps, y));
        out
    };
    let traj = integrate(&field, &joint0, 0.0, t_end, cfg)?;
    let mut sup = 0.0f64;
    for (t, state) in traj.nodes() {
        let (x, y) = state.split_at(n);
        let x_norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if x_norm > escape_radius {
            return Err(DynamicsError::Ode(OdeError::NonFinite(t)));
        }
        let approx = res.eval_transform_truncated(transform_depth, eps, t, y);
        let err: f64 = x
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        sup = sup.max(err);
    }
    Ok(sup)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Saddle,
    /// Some eigenvalue real part within the hyperbolicity tolerance of zero:
    /// the truncated equation cannot decide.
    NonHyperbolic,
}

/// Tolerance on eigenvalue real parts below which no stability conclusion is
/// drawn from the truncation.
pub const HYPERBOLICITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct FixedPoint {
    pub point: Vec<Complex64>,
    pub eigenvalues: Vec<Complex64>,
    pub stability: Stability,
    pub residual: f64,
}

pub fn classify(eigenvalues: &[Complex64], tol: f64) -> Stability {
    if eigenvalues.iter().any(|l| l.re.abs() < tol) {
        return Stability::NonHyperbolic;
    }
    let unstable = eigenvalues.iter().filter(|l| l.re > 0.0).count();
    if unstable == 0 {
        Stability::Stable
    } else if unstable == eigenvalues.len() {
        Stability::Unstable
    } else {
        Stability::Saddle
    }
}

/// Newton iteration on the truncated averaged field from each seed, using
/// the exact symbolic Jacobian. Converged points are deduplicated and
/// classified by Jacobian spectrum.
pub fn find_fixed_points<S: Scalar>(
    res: &RgResult<S>,
    eps: f64,
    seeds: &[Vec<Complex64>],
) -> Result<Vec<FixedPoint>, DynamicsError> {
    find_fixed_points_of_fields(res.rg_terms(), eps, seeds)
}

/// Same Newton search on an explicit epsilon-graded family of
/// time-independent fields (entry `i` weighted by `eps^{i+1}`).
pub fn find_fixed_points_of_fields<S: Scalar>(
    fields: &[QpVector<S>],
    eps: f64,
    seeds: &[Vec<Complex64>],
) -> Result<Vec<FixedPoint>, DynamicsError> {
    let n = fields
        .first()
        .map(|v| v.len())
        .ok_or(DynamicsError::NotEnoughSamples)?;
    let eval_field = |y: &[Complex64]| -> Vec<Complex64> {
        let mut acc = vec![Complex64::ZERO; n];
        for (idx, r) in fields.iter().enumerate() {
            let w = eps.powi(idx as i32 + 1);
            for (a, v) in acc.iter_mut().zip(r.eval(0.0, y)) {
                *a += w * v;
            }
        }
        acc
    };
    let eval_jacobian = |y: &[Complex64]| -> Result<Vec<Vec<Complex64>>, QpError> {
        let mut jac = vec![vec![Complex64::ZERO; n]; n];
        for (idx, r) in fields.iter().enumerate() {
            let w = eps.powi(idx as i32 + 1);
            for i in 0..n {
                for j in 0..n {
                    jac[i][j] += w * r.component(i).diff_y(j)?.eval(0.0, y);
                }
            }
        }
        Ok(jac)
    };
    let mut found: Vec<FixedPoint> = Vec::new();
    let max_iter = 80;
    for seed in seeds {
        let mut y = seed.clone();
        let mut converged = false;
        for _ in 0..max_iter {
            let f = eval_field(&y);
            let fnorm: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !fnorm.is_finite() {
                break;
            }
            let jac = eval_jacobian(&y)?;
            let step = match linalg::solve(&jac, &f) {
                Ok(s) => s,
                Err(_) => break,
            };
            let step_norm: f64 = step.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for (yi, si) in y.iter_mut().zip(&step) {
                *yi -= si;
            }
            if step_norm < 1e-13 * (1.0 + vec_norm(&y)) {
                converged = true;
                break;
            }
        }
        if !converged {
            continue;
        }
        let resid = vec_norm(&eval_field(&y));
        if resid > 1e-10 {
            continue;
        }
        if found.iter().any(|fp| {
            fp.point
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                < 1e-7
        }) {
            continue;
        }
        let jac = eval_jacobian(&y)?;
        let eig = eigenvalues(&jac);
        let stability = classify(&eig, HYPERBOLICITY_TOL);
        found.push(FixedPoint {
            point: y,
            eigenvalues: eig,
            stability,
            residual: resid,
        });
    }
    Ok(found)
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A rectangular grid of real seeds.
pub fn seed_grid(n: usize, lo: f64, hi: f64, count: usize) -> Vec<Vec<Complex64>> {
    let mut seeds = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for base in &seeds {
            for i in 0..count {
                let v = lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64;
                let mut s: Vec<Complex64> = base.clone();
                s.push(Complex64::new(v, 0.0));
                next.push(s);
            }
        }
        seeds = next;
    }
    seeds
}

#[derive(Clone, Debug)]
pub struct RadialOrbit {
    pub radius: f64,
    pub stable: bool,
}

/// Positive roots of the radial equation `dr/dtau = 0` with sign-change
/// stability. Roots come from the companion matrix of the dense polynomial,
/// then get polished by Newton.
pub fn radial_orbits(polar: &PolarReduction, eps: f64) -> Vec<RadialOrbit> {
    let coeffs = polar.radial_polynomial(eps);
    let roots = positive_real_roots(&coeffs);
    let deriv_at = |r: f64| -> f64 {
        let mut acc = 0.0;
        for (deg, c) in coeffs.iter().enumerate().skip(1) {
            acc += *c * deg as f64 * r.powi(deg as i32 - 1);
        }
        acc
    };
    roots
        .into_iter()
        .map(|r| RadialOrbit {
            radius: r,
            stable: deriv_at(r) < 0.0,
        })
        .collect()
}

/// Real positive roots of a dense real polynomial `sum c_d r^d`.
pub fn positive_real_roots(coeffs: &[f64]) -> Vec<f64> {
    // strip leading/trailing zeros; factor out r^m
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|v| v.abs() < 1e-300) {
        c.pop();
    }
    let mut low = 0usize;
    while low < c.len() && c[low].abs() < 1e-300 {
        low += 1;
    }
    let c = &c[low..];
    if c.len() <= 1 {
        return vec![];
    }
    let deg = c.len() - 1;
    // companion matrix of the monic polynomial
    let lead = c[deg];
    let mut m = vec![vec![0.0f64; deg]; deg];
    for i in 1..deg {
        m[i][i - 1] = 1.0;
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[deg - 1] = -c[i] / lead;
    }
    let eig = linalg::eigenvalues_real(&m);
    let poly = |r: f64| -> f64 {
        c.iter()
            .enumerate()
            .map(|(d, v)| v * r.powi(d as i32))
            .sum()
    };
    let dpoly = |r: f64| -> f64 {
        c.iter()
            .enumerate()
            .skip(1)
            .map(|(d, v)| v * d as f64 * r.powi(d as i32 - 1))
            .sum()
    };
    let mut out: Vec<f64> = Vec::new();
    for lam in eig {
        if lam.im.abs() > 1e-8 || lam.re <= 1e-12 {
            continue;
        }
        // Newton polish to machine precision
        let mut r = lam.re;
        for _ in 0..60 {
            let f = poly(r);
            let d = dpoly(r);
            if d == 0.0 {
                break;
            }
            let next = r - f / d;
            if (next - r).abs() < 1e-16 * r.abs().max(1.0) {
                r = next;
                break;
            }
            r = next;
        }
        if r > 1e-12 && !out.iter().any(|x| (x - r).abs() < 1e-9) {
            out.push(r);
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}
