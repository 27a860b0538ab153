//! ODE integration over complex state vectors: fixed-step classic
//! Runge-Kutta and an adaptive embedded 5(4) pair with dense output.
//!
//! States are complex so the same integrator drives real systems, complex
//! conjugate-pair systems, and fundamental-matrix columns.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("maximum step count {0} exceeded")]
    MaxSteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classic fixed-step fourth-order Runge-Kutta.
    FixedRk4,
    /// Dormand-Prince 5(4) embedded pair with proportional step control.
    AdaptiveRk54,
}

#[derive(Clone, Debug)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step (FixedRk4) or initial step guess (AdaptiveRk54).
    pub step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    /// Upper bound on the step so trajectories are sampled densely enough
    /// for sup-norm measurements at accepted points.
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::AdaptiveRk54,
            step: 1e-3,
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_steps: 50_000_000,
            max_step: 0.25,
        }
    }
}

/// One accepted step with endpoint derivatives for Hermite interpolation.
#[derive(Clone, Debug)]
struct Segment {
    t0: f64,
    t1: f64,
    y0: Vec<Complex64>,
    y1: Vec<Complex64>,
    f0: Vec<Complex64>,
    f1: Vec<Complex64>,
}

/// Dense-output trajectory queryable at arbitrary times inside the span.
#[derive(Clone, Debug)]
pub struct Trajectory {
    segments: Vec<Segment>,
    t_start: f64,
    t_end: f64,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn final_state(&self) -> &[Complex64] {
        &self.segments.last().unwrap().y1
    }

    /// Accepted step endpoints `(t, y)`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[Complex64])> {
        let first = std::iter::once((self.segments[0].t0, self.segments[0].y0.as_slice()));
        first.chain(self.segments.iter().map(|s| (s.t1, s.y1.as_slice())))
    }

    /// Cubic Hermite interpolation on the containing step.
    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        let t = t.clamp(self.t_start.min(self.t_end), self.t_start.max(self.t_end));
        let idx = self
            .segments
            .partition_point(|s| (s.t1 - t) * (self.t_end - self.t_start).signum() < 0.0)
            .min(self.segments.len() - 1);
        let s = &self.segments[idx];
        let h = s.t1 - s.t0;
        if h == 0.0 {
            return s.y0.clone();
        }
        let u = (t - s.t0) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        s.y0.iter()
            .zip(&s.y1)
            .zip(s.f0.iter().zip(&s.f1))
            .map(|((y0, y1), (f0, f1))| {
                y0 * h00 + f0 * (h * h10) + y1 * h01 + f1 * (h * h11)
            })
            .collect()
    }
}

fn axpy(y: &[Complex64], terms: &[(f64, &[Complex64])], h: f64) -> Vec<Complex64> {
    let mut out = y.to_vec();
    for (w, k) in terms {
        for (o, v) in out.iter_mut().zip(*k) {
            *o += h * *w * v;
        }
    }
    out
}

fn finite(y: &[Complex64]) -> bool {
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrate `dy/dt = field(t, y)` over `[t0, t1]` (forward or backward).
pub fn integrate<F>(
    field: &F,
    y0: &[Complex64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64> + ?Sized,
{
    match cfg.method {
        Method::FixedRk4 => integrate_rk4(field, y0, t0, t1, cfg),
        Method::AdaptiveRk54 => integrate_dp54(field, y0, t0, t1, cfg),
    }
}

fn integrate_rk4<F>(
    field: &F,
    y0: &[Complex64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64> + ?Sized,
{
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let h_mag = cfg.step.abs().min(cfg.max_step).max(1e-12);
    let steps = (span / h_mag).ceil().max(1.0) as usize;
    if steps > cfg.max_steps {
        return Err(OdeError::MaxSteps(cfg.max_steps));
    }
    let h = dir * span / steps as f64;
    let mut segments = Vec::with_capacity(steps);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f_here = field(t, &y);
    for i in 0..steps {
        let k1 = f_here.clone();
        let k2 = field(t + 0.5 * h, &axpy(&y, &[(0.5, &k1)], h));
        let k3 = field(t + 0.5 * h, &axpy(&y, &[(0.5, &k2)], h));
        let k4 = field(t + h, &axpy(&y, &[(1.0, &k3)], h));
        let y1 = axpy(
            &y,
            &[
                (1.0 / 6.0, &k1),
                (1.0 / 3.0, &k2),
                (1.0 / 3.0, &k3),
                (1.0 / 6.0, &k4),
            ],
            h,
        );
        let t_next = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
        if !finite(&y1) {
            return Err(OdeError::NonFinite(t_next));
        }
        let f_next = field(t_next, &y1);
        segments.push(Segment {
            t0: t,
            t1: t_next,
            y0: y,
            y1: y1.clone(),
            f0: k1,
            f1: f_next.clone(),
        });
        t = t_next;
        y = y1;
        f_here = f_next;
    }
    Ok(Trajectory {
        segments,
        t_start: t0,
        t_end: t1,
    })
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

fn integrate_dp54<F>(
    field: &F,
    y0: &[Complex64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64> + ?Sized,
{
    let dir = (t1 - t0).signum();
    if dir == 0.0 {
        let f = field(t0, y0);
        return Ok(Trajectory {
            segments: vec![Segment {
                t0,
                t1,
                y0: y0.to_vec(),
                y1: y0.to_vec(),
                f0: f.clone(),
                f1: f,
            }],
            t_start: t0,
            t_end: t1,
        });
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f_here = field(t, &y);
    let mut h = dir * cfg.step.abs().min(cfg.max_step);
    let mut segments = Vec::new();
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(OdeError::MaxSteps(cfg.max_steps));
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow(t));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let k1 = f_here.clone();
        let k2 = field(t + C[0] * h, &axpy(&y, &[(A[0][0], &k1)], h));
        let k3 = field(t + C[1] * h, &axpy(&y, &[(A[1][0], &k1), (A[1][1], &k2)], h));
        let k4 = field(
            t + C[2] * h,
            &axpy(&y, &[(A[2][0], &k1), (A[2][1], &k2), (A[2][2], &k3)], h),
        );
        let k5 = field(
            t + C[3] * h,
            &axpy(
                &y,
                &[
                    (A[3][0], &k1),
                    (A[3][1], &k2),
                    (A[3][2], &k3),
                    (A[3][3], &k4),
                ],
                h,
            ),
        );
        let k6 = field(
            t + C[4] * h,
            &axpy(
                &y,
                &[
                    (A[4][0], &k1),
                    (A[4][1], &k2),
                    (A[4][2], &k3),
                    (A[4][3], &k4),
                    (A[4][4], &k5),
                ],
                h,
            ),
        );
        let y_next = axpy(
            &y,
            &[
                (A[5][0], &k1),
                (A[5][2], &k3),
                (A[5][3], &k4),
                (A[5][4], &k5),
                (A[5][5], &k6),
            ],
            h,
        );
        let k7 = field(t + h, &y_next);
        if !finite(&y_next) {
            // shrink and retry rather than bail: the attempted step may have
            // simply left the region of validity
            h *= 0.25;
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(OdeError::NonFinite(t));
            }
            continue;
        }
        // embedded error estimate
        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let e = h
                * (E[0] * k1[i]
                    + E[2] * k3[i]
                    + E[3] * k4[i]
                    + E[4] * k5[i]
                    + E[5] * k6[i]
                    + E[6] * k7[i]);
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(y_next[i].norm());
            err = err.max(e.norm() / scale);
        }
        if err <= 1.0 {
            segments.push(Segment {
                t0: t,
                t1: t + h,
                y0: std::mem::take(&mut y),
                y1: y_next.clone(),
                f0: k1,
                f1: k7.clone(),
            });
            t += h;
            y = y_next;
            f_here = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).clamp(-cfg.max_step, cfg.max_step);
        if h == 0.0 {
            h = dir * 1e-14;
        }
    }
    Ok(Trajectory {
        segments,
        t_start: t0,
        t_end: t1,
    })
}
