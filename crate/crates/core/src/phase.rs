//! Phase reduction of a perturbed oscillator: locate a stable hyperbolic
//! limit cycle by shooting, solve the adjoint equation backwards onto its
//! unique periodic solution, enforce the tangency normalization, and average
//! the forcing against the adjoint to obtain the scalar phase drift.

use crate::linalg;
use crate::ode::{integrate, IntegratorConfig, OdeError, Trajectory};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PhaseError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("shooting iteration failed to find a periodic orbit")]
    NoCycle,
    #[error("cycle is not attracting-hyperbolic; nontrivial Floquet multiplier {0}")]
    NotHyperbolic(f64),
    #[error("adjoint normalization residual {0} exceeds tolerance")]
    BadNormalization(f64),
}

type RealField<'a> = &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync);
type RealJacobian<'a> = &'a (dyn Fn(&[f64]) -> Vec<Vec<f64>> + Sync);

fn to_c(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

fn re(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

/// Flow together with the variational (monodromy) columns.
fn flow_with_variation(
    f: RealField,
    df: RealJacobian,
    x0: &[f64],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), PhaseError> {
    let n = x0.len();
    let field = move |_t: f64, state: &[Complex64]| {
        let x = re(&state[..n]);
        let fx = f(&x);
        let jac = df(&x);
        let mut out: Vec<Complex64> = to_c(&fx);
        for col in 0..n {
            let v = &state[n * (col + 1)..n * (col + 2)];
            for row in 0..n {
                let mut acc = Complex64::ZERO;
                for s in 0..n {
                    acc += jac[row][s] * v[s];
                }
                out.push(acc);
            }
        }
        out
    };
    let mut init = to_c(x0);
    for i in 0..n {
        for j in 0..n {
            init.push(if i == j { Complex64::ONE } else { Complex64::ZERO });
        }
    }
    let traj = integrate(&field, &init, 0.0, t_end, cfg)?;
    let fin = traj.final_state();
    let x = re(&fin[..n]);
    let mut m = vec![vec![0.0; n]; n];
    for col in 0..n {
        for row in 0..n {
            m[row][col] = fin[n * (col + 1) + row].re;
        }
    }
    Ok((x, m))
}

/// Periodic orbit found by shooting.
pub struct LimitCycle {
    pub anchor: Vec<f64>,
    pub period: f64,
    /// nontrivial Floquet multipliers (the trivial unit multiplier removed)
    pub multipliers: Vec<Complex64>,
}

/// Newton shooting for a periodic orbit near `seed` with an initial period
/// guess. The phase condition pins the correction orthogonal to the flow
/// direction at the anchor.
pub fn find_limit_cycle(
    f: RealField,
    df: RealJacobian,
    seed: &[f64],
    period_guess: f64,
    cfg: &IntegratorConfig,
) -> Result<LimitCycle, PhaseError> {
    let n = seed.len();
    let mut x = seed.to_vec();
    let mut t_per = period_guess;
    let mut converged = false;
    for _ in 0..40 {
        let (x_t, mono) = flow_with_variation(f, df, &x, t_per, cfg)?;
        let fx_t = f(&x_t);
        let fx_0 = f(&x);
        let mut resid: Vec<f64> = x_t.iter().zip(&x).map(|(a, b)| a - b).collect();
        let rnorm = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm < 1e-11 {
            converged = true;
            break;
        }
        // bordered Newton system: unknowns (dx, dT)
        let mut a = vec![vec![Complex64::ZERO; n + 1]; n + 1];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = Complex64::new(mono[i][j] - if i == j { 1.0 } else { 0.0 }, 0.0);
            }
            a[i][n] = Complex64::new(fx_t[i], 0.0);
        }
        for j in 0..n {
            a[n][j] = Complex64::new(fx_0[j], 0.0);
        }
        a[n][n] = Complex64::ZERO;
        resid.push(0.0);
        let rhs: Vec<Complex64> = to_c(&resid);
        let delta = linalg::solve(&a, &rhs)?;
        for i in 0..n {
            x[i] -= delta[i].re;
        }
        t_per -= delta[n].re;
        if !t_per.is_finite() || t_per <= 0.0 {
            return Err(PhaseError::NoCycle);
        }
    }
    if !converged {
        return Err(PhaseError::NoCycle);
    }
    let (_, mono) = flow_with_variation(f, df, &x, t_per, cfg)?;
    let mono_c: linalg::CMatrix = mono
        .iter()
        .map(|row| row.iter().map(|v| Complex64::new(*v, 0.0)).collect())
        .collect();
    let mut multipliers = linalg::eigenvalues(&mono_c);
    // drop the trivial multiplier closest to 1
    let (trivial_idx, _) = multipliers
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - Complex64::ONE)
                .norm()
                .total_cmp(&(b.1 - Complex64::ONE).norm())
        })
        .ok_or(PhaseError::NoCycle)?;
    multipliers.remove(trivial_idx);
    for m in &multipliers {
        if m.norm() >= 1.0 - 1e-6 {
            return Err(PhaseError::NotHyperbolic(m.norm()));
        }
    }
    Ok(LimitCycle {
        anchor: x,
        period: t_per,
        multipliers,
    })
}

/// Periodic orbit samples, adjoint samples, and the normalization residual.
pub struct PhaseModel {
    pub period: f64,
    /// uniform sample times over one period
    pub times: Vec<f64>,
    /// orbit samples `U(t)`
    pub orbit: Vec<Vec<f64>>,
    /// adjoint samples `Q(t)` with `Q^T U' = 1`
    pub adjoint: Vec<Vec<f64>>,
    /// sup over the period of `|Q^T U' - 1|`
    pub normalization_residual: f64,
}

/// Phase reduction against a forcing field: the phase model plus the
/// averaged drift coefficient `c` such that `dphase/dt = eps c`.
pub struct PhaseReduction {
    pub model: PhaseModel,
    pub coupling: f64,
}

/// Number of uniform samples per period used for quadrature and reporting.
const SAMPLES: usize = 2048;

/// Build the phase model and the averaged coupling of `forcing` against the
/// periodic adjoint.
pub fn phase_reduce(
    f: RealField,
    df: RealJacobian,
    forcing: RealField,
    seed: &[f64],
    period_guess: f64,
    cfg: &IntegratorConfig,
) -> Result<PhaseReduction, PhaseError> {
    let n = seed.len();
    let cycle = find_limit_cycle(f, df, seed, period_guess, cfg)?;
    let t_per = cycle.period;
    // orbit over one period with dense output
    let orbit_field = move |_t: f64, state: &[Complex64]| to_c(&f(&re(state)));
    let orbit_traj = integrate(&orbit_field, &to_c(&cycle.anchor), 0.0, t_per, cfg)?;
    // adjoint integrated backwards over several periods: the backward flow
    // contracts onto the unique periodic solution
    let warmup_periods = 6usize;
    let adjoint_field = build_adjoint_field(f, df, &orbit_traj, t_per, n);
    let q_guess = {
        let fx = f(&cycle.anchor);
        let norm2: f64 = fx.iter().map(|v| v * v).sum();
        fx.iter().map(|v| v / norm2).collect::<Vec<f64>>()
    };
    let mut q_end = to_c(&q_guess);
    for _ in 0..warmup_periods {
        let traj = integrate(&adjoint_field, &q_end, t_per, 0.0, cfg)?;
        q_end = traj.final_state().to_vec();
        // rescale to keep magnitudes tame; scale is fixed by normalization
        // later
        let nrm: f64 = q_end.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return Err(PhaseError::NoCycle);
        }
        for v in q_end.iter_mut() {
            *v /= nrm;
        }
    }
    // one clean backward period from the converged direction, rescaled so
    // Q^T f = 1 at the anchor
    let fx0 = f(&cycle.anchor);
    let dot0: f64 = q_end.iter().zip(&fx0).map(|(q, v)| q.re * v).sum();
    if dot0.abs() < 1e-12 {
        return Err(PhaseError::NoCycle);
    }
    for v in q_end.iter_mut() {
        *v /= dot0;
    }
    let adj_traj = integrate(&adjoint_field, &q_end, t_per, 0.0, cfg)?;
    // uniform sampling, quadrature, and the normalization check
    let mut times = Vec::with_capacity(SAMPLES + 1);
    let mut orbit = Vec::with_capacity(SAMPLES + 1);
    let mut adjoint = Vec::with_capacity(SAMPLES + 1);
    let mut resid = 0.0f64;
    let mut coupling_acc = 0.0f64;
    for i in 0..=SAMPLES {
        let t = t_per * i as f64 / SAMPLES as f64;
        let u = re(&orbit_traj.eval(t));
        let q = re(&adj_traj.eval(t));
        let udot = f(&u);
        let dot: f64 = q.iter().zip(&udot).map(|(a, b)| a * b).sum();
        resid = resid.max((dot - 1.0).abs());
        let g = forcing(&u);
        let qg: f64 = q.iter().zip(&g).map(|(a, b)| a * b).sum();
        // composite trapezoid; endpoints carry half weight
        let w = if i == 0 || i == SAMPLES { 0.5 } else { 1.0 };
        coupling_acc += w * qg;
        times.push(t);
        orbit.push(u);
        adjoint.push(q);
    }
    let coupling = coupling_acc / SAMPLES as f64;
    let model = PhaseModel {
        period: t_per,
        times,
        orbit,
        adjoint,
        normalization_residual: resid,
    };
    if model.normalization_residual > 1e-6 {
        return Err(PhaseError::BadNormalization(model.normalization_residual));
    }
    Ok(PhaseReduction { model, coupling })
}

fn build_adjoint_field<'a>(
    _f: RealField<'a>,
    df: RealJacobian<'a>,
    orbit: &'a Trajectory,
    t_per: f64,
    n: usize,
) -> impl Fn(f64, &[Complex64]) -> Vec<Complex64> + 'a {
    move |t: f64, q: &[Complex64]| {
        let tt = t.rem_euclid(t_per);
        let u = re(&orbit.eval(tt));
        let jac = df(&u);
        let mut out = vec![Complex64::ZERO; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for (j, qj) in q.iter().enumerate() {
                // dQ/dt = -Df^T Q
                acc -= jac[j][i] * qj;
            }
            *o = acc;
        }
        out
    }
}

/// Long-horizon phase drift of the perturbed system against the unperturbed
/// one, as a rate per unit time divided by eps. Used as an independent check
/// of the averaged coupling for planar oscillators, with the phase read off
/// as the unwrapped polar angle.
pub fn measured_phase_drift_rate(
    f: RealField,
    forcing: RealField,
    start: &[f64],
    eps: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<f64, PhaseError> {
    let perturbed = move |_t: f64, state: &[Complex64]| {
        let x = re(state);
        let mut v = f(&x);
        let g = forcing(&x);
        for (a, b) in v.iter_mut().zip(&g) {
            *a += eps * b;
        }
        to_c(&v)
    };
    let unperturbed = move |_t: f64, state: &[Complex64]| to_c(&f(&re(state)));
    let tp = integrate(&perturbed, &to_c(start), 0.0, t_end, cfg)?;
    let tu = integrate(&unperturbed, &to_c(start), 0.0, t_end, cfg)?;
    let unwrap = |traj: &Trajectory| -> f64 {
        let mut prev = f64::NAN;
        let mut total = 0.0;
        for (_t, y) in traj.nodes() {
            let th = y[1].re.atan2(y[0].re);
            if prev.is_nan() {
                prev = th;
            } else {
                let mut d = th - prev;
                while d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                }
                while d < -std::f64::consts::PI {
                    d += 2.0 * std::f64::consts::PI;
                }
                total += d;
                prev = th;
            }
        }
        total
    };
    Ok((unwrap(&tp) - unwrap(&tu)) / (eps * t_end))
}
