//! Linear periodic systems `dx/dt = eps A(t, eps) x`: the matrix form of the
//! averaged recursion, truncated Floquet exponents, and numeric monodromy
//! cross-validation.
//!
//! Entries are scalar Fourier series (quasi-periodic polynomials with no
//! state variables) over a single-generator basis, so the period is
//! `T = 2 pi / omega`.

use crate::linalg::{self, CMatrix};
use crate::ode::{integrate, IntegratorConfig};
use crate::qp::{FrequencyBasis, QpError, QpPoly};
use crate::rg::RgError;
use crate::scalar::{rat_to_f64, Scalar};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FloquetError {
    #[error(transparent)]
    Algebra(#[from] QpError),
    #[error(transparent)]
    Derivation(#[from] RgError),
    #[error(transparent)]
    Ode(#[from] crate::ode::OdeError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("matrix series requires a single-frequency basis, got {0} generators")]
    NeedSingleFrequency(usize),
    #[error("matrix order {0} is not square of size {1}")]
    NotSquare(usize, usize),
    #[error("order must be at least 1")]
    ZeroOrder,
}

/// Scalar Fourier series: a quasi-periodic polynomial with no state
/// variables.
pub type FourierScalar<S> = QpPoly<S>;

/// `eps`-graded matrix coefficients of a linear periodic system.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFourierSeries<S: Scalar> {
    n: usize,
    basis: FrequencyBasis,
    orders: BTreeMap<usize, Vec<Vec<FourierScalar<S>>>>,
}

impl<S: Scalar> MatrixFourierSeries<S> {
    pub fn new(n: usize, basis: FrequencyBasis) -> Result<Self, FloquetError> {
        if basis.dim() != 1 {
            return Err(FloquetError::NeedSingleFrequency(basis.dim()));
        }
        Ok(MatrixFourierSeries {
            n,
            basis,
            orders: BTreeMap::new(),
        })
    }

    pub fn set_order(
        &mut self,
        p: usize,
        matrix: Vec<Vec<FourierScalar<S>>>,
    ) -> Result<(), FloquetError> {
        if p == 0 {
            return Err(FloquetError::ZeroOrder);
        }
        if matrix.len() != self.n {
            return Err(FloquetError::NotSquare(matrix.len(), self.n));
        }
        for row in &matrix {
            if row.len() != self.n {
                return Err(FloquetError::NotSquare(row.len(), self.n));
            }
            for entry in row {
                if entry.n() != 0 || entry.basis() != &self.basis {
                    return Err(QpError::BasisMismatch.into());
                }
            }
        }
        self.orders.insert(p, matrix);
        Ok(())
    }

    pub fn with_order(
        mut self,
        p: usize,
        matrix: Vec<Vec<FourierScalar<S>>>,
    ) -> Result<Self, FloquetError> {
        self.set_order(p, matrix)?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &FrequencyBasis {
        &self.basis
    }

    pub fn orders(&self) -> impl Iterator<Item = (usize, &Vec<Vec<FourierScalar<S>>>)> {
        self.orders.iter().map(|(p, m)| (*p, m))
    }

    /// Fundamental period `2 pi / omega`.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / rat_to_f64(&self.basis.values()[0])
    }

    /// Numeric matrix `sum_p eps^p A_p(t)`.
    pub fn eval(&self, eps: f64, t: f64) -> CMatrix {
        let mut out = vec![vec![Complex64::ZERO; self.n]; self.n];
        for (p, m) in &self.orders {
            let w = eps.powi(*p as i32);
            for i in 0..self.n {
                for j in 0..self.n {
                    out[i][j] += w * m[i][j].eval(t, &[]);
                }
            }
        }
        out
    }

    fn zero_matrix(&self) -> Vec<Vec<FourierScalar<S>>> {
        (0..self.n)
            .map(|_| {
                (0..self.n)
                    .map(|_| QpPoly::zero(0, self.basis.clone()))
                    .collect()
            })
            .collect()
    }
}

fn sym_mat_mul<S: Scalar>(
    a: &[Vec<FourierScalar<S>>],
    b: &[Vec<FourierScalar<S>>],
) -> Result<Vec<Vec<FourierScalar<S>>>, QpError> {
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = QpPoly::zero(0, a[0][0].basis().clone());
            for (k, bk) in b.iter().enumerate() {
                acc = acc.add(&a[i][k].mul(&bk[j])?)?;
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(out)
}

fn sym_mat_add<S: Scalar>(
    a: &[Vec<FourierScalar<S>>],
    b: &[Vec<FourierScalar<S>>],
) -> Result<Vec<Vec<FourierScalar<S>>>, QpError> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| x.add(y))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

fn sym_mat_sub<S: Scalar>(
    a: &[Vec<FourierScalar<S>>],
    b: &[Vec<FourierScalar<S>>],
) -> Result<Vec<Vec<FourierScalar<S>>>, QpError> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| x.sub(y))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

fn sym_mat_map<S: Scalar, E>(
    a: &[Vec<FourierScalar<S>>],
    f: impl Fn(&FourierScalar<S>) -> Result<FourierScalar<S>, E>,
) -> Result<Vec<Vec<FourierScalar<S>>>, E> {
    a.iter()
        .map(|row| row.iter().map(&f).collect::<Result<Vec<_>, _>>())
        .collect()
}

/// Matrix analogue of the averaged recursion with zero integral constants:
/// constant matrices `r_i` and mean-zero periodic matrices `u_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRgResult<S: Scalar> {
    system: MatrixFourierSeries<S>,
    order: usize,
    r: Vec<Vec<Vec<FourierScalar<S>>>>,
    u: Vec<Vec<Vec<FourierScalar<S>>>>,
}

impl<S: Scalar> LinearRgResult<S> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn system(&self) -> &MatrixFourierSeries<S> {
        &self.system
    }

    pub fn r_term(&self, i: usize) -> &Vec<Vec<FourierScalar<S>>> {
        &self.r[i - 1]
    }

    pub fn u_term(&self, i: usize) -> &Vec<Vec<FourierScalar<S>>> {
        &self.u[i - 1]
    }

    /// Constant matrix `r_i` as numbers.
    pub fn r_matrix(&self, i: usize) -> CMatrix {
        self.r[i - 1]
            .iter()
            .map(|row| row.iter().map(|p| p.eval(0.0, &[])).collect())
            .collect()
    }

    /// Truncated exponent matrix `sum_{k<=m} eps^k r_k`.
    pub fn exponent_matrix(&self, eps: f64) -> CMatrix {
        let n = self.n();
        let mut out = vec![vec![Complex64::ZERO; n]; n];
        for (idx, r) in self.r.iter().enumerate() {
            let w = eps.powi(idx as i32 + 1);
            for i in 0..n {
                for j in 0..n {
                    out[i][j] += w * r[i][j].eval(0.0, &[]);
                }
            }
        }
        out
    }

    /// Periodic factor `alpha_t = id + sum eps^k u_k(t)` evaluated at `t`.
    pub fn periodic_factor(&self, eps: f64, t: f64) -> CMatrix {
        let n = self.n();
        let mut out = linalg::identity(n);
        for (idx, u) in self.u.iter().enumerate() {
            let w = eps.powi(idx as i32 + 1);
            for i in 0..n {
                for j in 0..n {
                    out[i][j] += w * u[i][j].eval(t, &[]);
                }
            }
        }
        out
    }

    /// Truncated Floquet exponents: eigenvalues of the exponent matrix.
    pub fn floquet_exponents(&self, eps: f64) -> Vec<Complex64> {
        linalg::eigenvalues(&self.exponent_matrix(eps))
    }
}

/// Matrix recursion with zero constants:
/// `r_i = avg(sum A_{i-k} u_k + A_i - sum u_k r_{i-k})`, antiderivative for
/// the periodic parts.
pub fn linear_rg<S: Scalar>(
    a: &MatrixFourierSeries<S>,
    order: usize,
) -> Result<LinearRgResult<S>, FloquetError> {
    if order == 0 {
        return Err(FloquetError::ZeroOrder);
    }
    let mut r: Vec<Vec<Vec<FourierScalar<S>>>> = Vec::with_capacity(order);
    let mut u: Vec<Vec<Vec<FourierScalar<S>>>> = Vec::with_capacity(order);
    for i in 1..=order {
        let mut integrand = a
            .orders
            .get(&i)
            .cloned()
            .unwrap_or_else(|| a.zero_matrix());
        for k in 1..i {
            if let Some(a_ik) = a.orders.get(&(i - k)) {
                integrand = sym_mat_add(&integrand, &sym_mat_mul(a_ik, &u[k - 1])?)?;
            }
            integrand = sym_mat_sub(&integrand, &sym_mat_mul(&u[k - 1], &r[i - k - 1])?)?;
        }
        let r_i = sym_mat_map(&integrand, |p| p.average_t())?;
        let u_i = sym_mat_map(&sym_mat_sub(&integrand, &r_i)?, |p| p.antiderivative_t())?;
        r.push(r_i);
        u.push(u_i);
    }
    Ok(LinearRgResult {
        system: a.clone(),
        order,
        r,
        u,
    })
}

/// Numerically integrated monodromy data over one period.
#[derive(Clone, Debug)]
pub struct MonodromyReport {
    pub eps: f64,
    /// `Phi(T)` for the fundamental matrix with `Phi(0) = id`.
    pub monodromy: CMatrix,
    /// `|| e^{R(eps) T} - alpha_0^{-1} Phi(T) alpha_0 ||_F`
    pub defect: f64,
}

/// Integrate the fundamental matrix over one period and compare with the
/// truncated factorization.
pub fn monodromy_numeric<S: Scalar>(
    a: &MatrixFourierSeries<S>,
    res: &LinearRgResult<S>,
    eps: f64,
    cfg: &IntegratorConfig,
) -> Result<MonodromyReport, FloquetError> {
    let n = a.n();
    let t_end = a.period();
    let field = |t: f64, state: &[Complex64]| {
        let m = a.eval(eps, t);
        // state holds the columns of Phi stacked
        let mut out = vec![Complex64::ZERO; n * n];
        for col in 0..n {
            let x = &state[col * n..(col + 1) * n];
            let dx = linalg::mat_vec(&m, x);
            out[col * n..(col + 1) * n].copy_from_slice(&dx);
        }
        out
    };
    let mut init = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        init[i * n + i] = Complex64::ONE;
    }
    let traj = integrate(&field, &init, 0.0, t_end, cfg)?;
    let fin = traj.final_state();
    let mut phi_t = vec![vec![Complex64::ZERO; n]; n];
    for col in 0..n {
        for row in 0..n {
            phi_t[row][col] = fin[col * n + row];
        }
    }
    // compare in the factorization frame: X(t) = alpha_t e^{Rt} has
    // X(0) = alpha_0, so X(0)^{-1} X(T) = alpha_0^{-1} Phi(T) alpha_0
    let alpha0 = res.periodic_factor(eps, 0.0);
    let alpha0_inv = linalg::inverse(&alpha0)?;
    let conjugated = linalg::mat_mul(&alpha0_inv, &linalg::mat_mul(&phi_t, &alpha0));
    let mut r_t = res.exponent_matrix(eps);
    for row in r_t.iter_mut() {
        for v in row.iter_mut() {
            *v *= t_end;
        }
    }
    let expected = linalg::expm(&r_t);
    let defect = linalg::frobenius_norm(&linalg::mat_sub(&expected, &conjugated));
    Ok(MonodromyReport {
        eps,
        monodromy: phi_t,
        defect,
    })
}

/// Eigenvalue-collision diagnostic along a real eps sweep: flags eps values
/// where two exponent paths approach within the tolerance. Not a proof of
/// anything, only a hint that the truncated series may be near its validity
/// edge.
pub fn exponent_collisions<S: Scalar>(
    res: &LinearRgResult<S>,
    eps_grid: &[f64],
    tol: f64,
) -> Vec<f64> {
    let mut flagged = Vec::new();
    for &eps in eps_grid {
        let ev = res.floquet_exponents(eps);
        'outer: for i in 0..ev.len() {
            for j in i + 1..ev.len() {
                if (ev[i] - ev[j]).norm() < tol {
                    flagged.push(eps);
                    break 'outer;
                }
            }
        }
    }
    flagged
}
