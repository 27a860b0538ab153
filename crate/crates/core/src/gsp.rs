//! Reduction onto critical manifolds of fixed points: split the perturbation
//! into tangent and stable components, reduce the slow drift to chart
//! coordinates, and build the perturbed invariant graph.
//!
//! Because the unperturbed flow is trivial on the manifold and exponential
//! along the stable directions, the reduction integrals collapse to linear
//! algebra; no quadrature in the fast time is needed.

use crate::dynamics::{classify, FixedPoint, HYPERBOLICITY_TOL};
use crate::linalg::eigenvalues_real;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GspError {
    #[error("chart point is not a fixed point of the fast field: |f(U(alpha))| = {0}")]
    NotCritical(f64),
    #[error("fast Jacobian does not have exactly {expected} zero eigenvalues (found {found})")]
    WrongKernelDimension { expected: usize, found: usize },
    #[error("fast Jacobian has an eigenvalue with real part {0} above the attracting gap -{1}")]
    GapViolated(f64, f64),
    #[error("tangent/stable solve is rank deficient")]
    RankDeficient,
    #[error("order {0} not supported; the reduction is implemented through order 2")]
    UnsupportedOrder(usize),
    #[error("second-order reduction requested but no Jacobian for the first slow field is available")]
    MissingSlowJacobian,
}

type VecFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatFn = Box<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// A parametrized manifold of fixed points of the fast field, together with
/// the slow perturbation fields.
pub struct CriticalManifoldChart {
    pub ambient_dim: usize,
    pub chart_dim: usize,
    /// parametrization `U: chart -> ambient`
    pub chart: VecFn,
    /// `DU(alpha)`, ambient_dim x chart_dim; finite differences when absent
    pub chart_jacobian: Option<MatFn>,
    /// fast field `f`
    pub fast: VecFn,
    /// ambient Jacobian `Df`
    pub fast_jacobian: MatFn,
    /// first-order slow field `g_1`
    pub slow1: VecFn,
    /// ambient Jacobian `Dg_1`; finite differences when absent
    pub slow1_jacobian: Option<MatFn>,
    /// optional second-order slow field `g_2`
    pub slow2: Option<VecFn>,
    /// attracting spectral gap: nonzero eigenvalues must have real part
    /// below `-gap`
    pub gap: f64,
}

const FD_REL_STEP: f64 = 1e-5;

fn fd_jacobian(f: &VecFn, x: &[f64], out_dim: usize) -> Vec<Vec<f64>> {
    let mut jac = vec![vec![0.0; x.len()]; out_dim];
    for j in 0..x.len() {
        let h = FD_REL_STEP * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..out_dim {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

impl CriticalManifoldChart {
    pub fn chart_jacobian_at(&self, alpha: &[f64]) -> Vec<Vec<f64>> {
        match &self.chart_jacobian {
            Some(j) => j(alpha),
            None => fd_jacobian(&self.chart, alpha, self.ambient_dim),
        }
    }

    /// Verify the chart invariants at one point: fixed-point residual and
    /// the spectral split of the fast Jacobian.
    pub fn validate_at(&self, alpha: &[f64]) -> Result<(), GspError> {
        let x = (self.chart)(alpha);
        let f = (self.fast)(&x);
        let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if fnorm > 1e-10 {
            return Err(GspError::NotCritical(fnorm));
        }
        let a = (self.fast_jacobian)(&x);
        let eig = eigenvalues_real(&a);
        let zeros = eig.iter().filter(|l| l.norm() < 1e-8).count();
        if zeros != self.chart_dim {
            return Err(GspError::WrongKernelDimension {
                expected: self.chart_dim,
                found: zeros,
            });
        }
        for l in &eig {
            if l.norm() >= 1e-8 && l.re > -self.gap {
                return Err(GspError::GapViolated(l.re, self.gap));
            }
        }
        Ok(())
    }
}

/// Decomposition `g = DU a + A w` with `w` in the stable subspace
/// (= range of `A`).
pub struct TangentStableSplit {
    m_lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    stable_basis: DMatrix<f64>,
    a_on_stable_svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
    k: usize,
}

pub struct SplitParts {
    /// chart coordinates of the tangent component
    pub tangent_coords: Vec<f64>,
    /// stable vector `w` solving `A w = stable component`
    pub stable_solution: Vec<f64>,
}

impl TangentStableSplit {
    /// Build the solver from the fast Jacobian `A` (n x n) and the chart
    /// Jacobian `DU` (n x k). The columns of `DU` must span `ker A`.
    pub fn new(a: &[Vec<f64>], du: &[Vec<f64>]) -> Result<Self, GspError> {
        let n = a.len();
        let k = du[0].len();
        let a_m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        // orthonormal basis of range A from column-pivoted QR
        let qr = a_m.clone().col_piv_qr();
        let q = qr.q();
        let r = qr.r();
        let rank = n - k;
        // rank check: the (rank-1)-th diagonal of R must dominate the rest
        let diag: Vec<f64> = (0..n.min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
        if rank > 0 && (diag.len() < rank || diag[rank - 1] < 1e-10 * diag[0].max(1e-300)) {
            return Err(GspError::RankDeficient);
        }
        if diag.len() > rank && diag[rank] > 1e-8 * diag[0].max(1e-300) {
            return Err(GspError::RankDeficient);
        }
        let stable_basis = q.columns(0, rank).into_owned();
        // M = [DU | S]
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..k {
                m[(i, j)] = du[i][j];
            }
            for j in 0..rank {
                m[(i, k + j)] = stable_basis[(i, j)];
            }
        }
        let m_lu = m.lu();
        if !m_lu.is_invertible() {
            return Err(GspError::RankDeficient);
        }
        // A restricted to the stable subspace, in the S-basis; full column
        // rank, solved in the least-squares sense
        let a_on_stable = &a_m * &stable_basis;
        let a_on_stable_svd = a_on_stable.svd(true, true);
        Ok(TangentStableSplit {
            m_lu,
            stable_basis,
            a_on_stable_svd,
            n,
            k,
        })
    }

    /// Split a vector: `g = DU a + A w`, returning `a` and `w`.
    pub fn split(&self, g: &[f64]) -> Result<SplitParts, GspError> {
        let rhs = DVector::from_fn(self.n, |i, _| g[i]);
        let sol = self.m_lu.solve(&rhs).ok_or(GspError::RankDeficient)?;
        let tangent_coords: Vec<f64> = (0..self.k).map(|i| sol[i]).collect();
        let rank = self.n - self.k;
        let b = DVector::from_fn(rank, |i, _| sol[self.k + i]);
        // stable component d = S b; solve A w = d with w = S c
        let d = &self.stable_basis * b;
        let c = self
            .a_on_stable_svd
            .solve(&d, 1e-13)
            .map_err(|_| GspError::RankDeficient)?;
        let w = &self.stable_basis * c;
        Ok(SplitParts {
            tangent_coords,
            stable_solution: w.iter().copied().collect(),
        })
    }
}

/// Per-order output of the reduction at a chart point.
#[derive(Clone, Debug)]
pub struct ReductionAt {
    /// chart velocity at first order
    pub r1: Vec<f64>,
    /// first graph correction
    pub h1: Vec<f64>,
    /// chart velocity at second order (order 2 only)
    pub r2: Option<Vec<f64>>,
    /// second graph correction (order 2 only)
    pub h2: Option<Vec<f64>>,
}

/// Reduction machinery bound to one chart.
pub struct GspReduction<'a> {
    chart: &'a CriticalManifoldChart,
    order: usize,
}

impl<'a> GspReduction<'a> {
    pub fn new(chart: &'a CriticalManifoldChart, order: usize) -> Result<Self, GspError> {
        if order == 0 || order > 2 {
            return Err(GspError::UnsupportedOrder(order));
        }
        Ok(GspReduction { chart, order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn split_at(&self, alpha: &[f64]) -> Result<TangentStableSplit, GspError> {
        let x = (self.chart.chart)(alpha);
        let a = (self.chart.fast_jacobian)(&x);
        let du = self.chart.chart_jacobian_at(alpha);
        TangentStableSplit::new(&a, &du)
    }

    /// First-order pieces: tangent drift and graph correction.
    pub fn first_order(&self, alpha: &[f64]) -> Result<(Vec<f64>, Vec<f64>), GspError> {
        let split = self.split_at(alpha)?;
        let x = (self.chart.chart)(alpha);
        let g1 = (self.chart.slow1)(&x);
        let parts = split.split(&g1)?;
        let h1 = parts.stable_solution.iter().map(|v| -v).collect();
        Ok((parts.tangent_coords, h1))
    }

    /// Full reduction at a chart point.
    pub fn reduce_at(&self, alpha: &[f64]) -> Result<ReductionAt, GspError> {
        let (r1, h1) = self.first_order(alpha)?;
        if self.order == 1 {
            return Ok(ReductionAt {
                r1,
                h1,
                r2: None,
                h2: None,
            });
        }
        let x = (self.chart.chart)(alpha);
        let dg1 = match &self.chart.slow1_jacobian {
            Some(j) => j(&x),
            None => fd_jacobian(&self.chart.slow1, &x, self.chart.ambient_dim),
        };
        // Dh1 by central differences in the chart variables
        let n = self.chart.ambient_dim;
        let k = self.chart.chart_dim;
        let mut dh1 = vec![vec![0.0; k]; n];
        for j in 0..k {
            let h = FD_REL_STEP * alpha[j].abs().max(1.0);
            let mut ap = alpha.to_vec();
            let mut am = alpha.to_vec();
            ap[j] += h;
            am[j] -= h;
            let (_, h1p) = self.first_order(&ap)?;
            let (_, h1m) = self.first_order(&am)?;
            for i in 0..n {
                dh1[i][j] = (h1p[i] - h1m[i]) / (2.0 * h);
            }
        }
        let mut m = vec![0.0; n];
        for i in 0..n {
            for (l, h1l) in h1.iter().enumerate() {
                m[i] += dg1[i][l] * h1l;
            }
            for (j, r1j) in r1.iter().enumerate() {
                m[i] -= dh1[i][j] * r1j;
            }
        }
        if let Some(g2) = &self.chart.slow2 {
            let v = g2(&x);
            for i in 0..n {
                m[i] += v[i];
            }
        }
        let split = self.split_at(alpha)?;
        let parts = split.split(&m)?;
        let h2 = parts.stable_solution.iter().map(|v| -v).collect();
        Ok(ReductionAt {
            r1,
            h1,
            r2: Some(parts.tangent_coords),
            h2: Some(h2),
        })
    }

    /// The perturbed invariant graph `x(alpha) = U + eps h1 [+ eps^2 h2]`.
    pub fn manifold_graph(&self, alpha: &[f64], eps: f64) -> Result<Vec<f64>, GspError> {
        let red = self.reduce_at(alpha)?;
        let mut x = (self.chart.chart)(alpha);
        for (i, v) in red.h1.iter().enumerate() {
            x[i] += eps * v;
        }
        if let Some(h2) = &red.h2 {
            for (i, v) in h2.iter().enumerate() {
                x[i] += eps * eps * v;
            }
        }
        Ok(x)
    }

    /// Reduced chart field `eps r1 [+ eps^2 r2]`.
    pub fn reduced_field(&self, alpha: &[f64], eps: f64) -> Result<Vec<f64>, GspError> {
        let red = self.reduce_at(alpha)?;
        let mut out: Vec<f64> = red.r1.iter().map(|v| eps * v).collect();
        if let Some(r2) = &red.r2 {
            for (i, v) in r2.iter().enumerate() {
                out[i] += eps * eps * v;
            }
        }
        Ok(out)
    }

    /// Residual of the graph-plus-drift ansatz in the full equation:
    /// `|| Dx(alpha) . alphadot - (f + eps g1 [+ eps^2 g2]) ||` at the graph
    /// point. Should shrink like `eps^{order+1}`.
    pub fn graph_defect(&self, alpha: &[f64], eps: f64) -> Result<f64, GspError> {
        let n = self.chart.ambient_dim;
        let k = self.chart.chart_dim;
        let alphadot = self.reduced_field(alpha, eps)?;
        // Dx by central differences of the full graph map
        let mut lhs = vec![0.0; n];
        for j in 0..k {
            let h = FD_REL_STEP * alpha[j].abs().max(1.0);
            let mut ap = alpha.to_vec();
            let mut am = alpha.to_vec();
            ap[j] += h;
            am[j] -= h;
            let xp = self.manifold_graph(&ap, eps)?;
            let xm = self.manifold_graph(&am, eps)?;
            for i in 0..n {
                lhs[i] += (xp[i] - xm[i]) / (2.0 * h) * alphadot[j];
            }
        }
        let x = self.manifold_graph(alpha, eps)?;
        let mut rhs = (self.chart.fast)(&x);
        let g1 = (self.chart.slow1)(&x);
        for i in 0..n {
            rhs[i] += eps * g1[i];
        }
        if let Some(g2) = &self.chart.slow2 {
            let v = g2(&x);
            for i in 0..n {
                rhs[i] += eps * eps * v[i];
            }
        }
        Ok(lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Fixed points of the reduced chart field with stability, by Newton
    /// iteration with finite-difference Jacobians.
    pub fn stability_on_manifold(
        &self,
        seeds: &[Vec<f64>],
        eps: f64,
    ) -> Result<Vec<FixedPoint>, GspError> {
        let k = self.chart.chart_dim;
        let mut found: Vec<FixedPoint> = Vec::new();
        for seed in seeds {
            let mut alpha = seed.clone();
            let mut converged = false;
            for _ in 0..60 {
                let f = self.reduced_field(&alpha, eps)?;
                let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !fnorm.is_finite() {
                    break;
                }
                let field = &|a: &[f64]| self.reduced_field(a, eps).unwrap_or(vec![f64::NAN; k]);
                let jac = fd_jacobian_plain(field, &alpha, k);
                let jm = DMatrix::from_fn(k, k, |i, j| jac[i][j]);
                let rhs = DVector::from_fn(k, |i, _| f[i]);
                let step = match jm.lu().solve(&rhs) {
                    Some(s) => s,
                    None => break,
                };
                for (a, s) in alpha.iter_mut().zip(step.iter()) {
                    *a -= s;
                }
                if step.norm() < 1e-12 * (1.0 + alpha.iter().map(|v| v * v).sum::<f64>().sqrt()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                continue;
            }
            if found.iter().any(|fp| {
                fp.point
                    .iter()
                    .zip(&alpha)
                    .map(|(a, b)| (a.re - b) * (a.re - b))
                    .sum::<f64>()
                    .sqrt()
                    < 1e-6
            }) {
                continue;
            }
            let field = &|a: &[f64]| self.reduced_field(a, eps).unwrap_or(vec![f64::NAN; k]);
            let jac = fd_jacobian_plain(field, &alpha, k);
            let eig = eigenvalues_real(&jac);
            let resid = self
                .reduced_field(&alpha, eps)?
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            let stability = classify(&eig, HYPERBOLICITY_TOL);
            found.push(FixedPoint {
                point: alpha.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
                eigenvalues: eig,
                stability,
                residual: resid,
            });
        }
        Ok(found)
    }
}

fn fd_jacobian_plain(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], out_dim: usize) -> Vec<Vec<f64>> {
    let mut jac = vec![vec![0.0; x.len()]; out_dim];
    for j in 0..x.len() {
        let h = FD_REL_STEP * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..out_dim {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}
