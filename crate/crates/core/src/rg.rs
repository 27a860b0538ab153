//! Derivation of RG (renormalization-group) equations and near-identity
//! transformations for systems `dx/dt = sum_p eps^p g_p(t, x)`.
//!
//! The perturbation parameter stays formal throughout the derivation; it only
//! becomes a number inside evaluators. Integral constants default to zero,
//! which pins a unique representative; other representatives are reached
//! through [`apply_gauge`].

use crate::qp::{commutator, FrequencyBasis, QpError, QpPoly, QpVector};
use crate::scalar::Scalar;
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum RgError {
    #[error(transparent)]
    Algebra(#[from] QpError),
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("system has no perturbation orders")]
    EmptySystem,
    #[error("expected {expected} gauge fields, found {found}")]
    GaugeArity { expected: usize, found: usize },
    #[error("gauge fields must be independent of time")]
    GaugeNotConstant,
    #[error("averaged part of the recursion shortcut failed to vanish at order {0}")]
    ShortcutViolated(usize),
    #[error("order {0} exceeds derived order {1}")]
    OrderOutOfRange(usize, usize),
}

/// The perturbation series `dx/dt = sum_p eps^p g_p(t, x)` with a declared
/// frequency basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedSystem<S: Scalar> {
    n: usize,
    basis: FrequencyBasis,
    orders: BTreeMap<usize, QpVector<S>>,
}

impl<S: Scalar> PerturbedSystem<S> {
    pub fn new(n: usize, basis: FrequencyBasis) -> Self {
        PerturbedSystem {
            n,
            basis,
            orders: BTreeMap::new(),
        }
    }

    pub fn with_order(mut self, p: usize, field: QpVector<S>) -> Result<Self, RgError> {
        self.set_order(p, field)?;
        Ok(self)
    }

    pub fn set_order(&mut self, p: usize, field: QpVector<S>) -> Result<(), RgError> {
        if p == 0 {
            return Err(RgError::ZeroOrder);
        }
        if field.len() != self.n {
            return Err(QpError::DimensionMismatch(field.len(), self.n).into());
        }
        for c in field.components() {
            if c.n() != self.n || c.basis() != &self.basis {
                return Err(QpError::BasisMismatch.into());
            }
        }
        self.orders.insert(p, field);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &FrequencyBasis {
        &self.basis
    }

    pub fn max_order(&self) -> usize {
        self.orders.keys().max().copied().unwrap_or(0)
    }

    pub fn order(&self, p: usize) -> Option<&QpVector<S>> {
        self.orders.get(&p)
    }

    pub fn orders(&self) -> impl Iterator<Item = (usize, &QpVector<S>)> {
        self.orders.iter().map(|(p, v)| (*p, v))
    }

    fn zero_vector(&self) -> QpVector<S> {
        QpVector::zero(self.n, self.n, self.basis.clone())
    }

    /// Numeric right-hand side `sum_p eps^p g_p(t, x)`.
    pub fn eval_field(&self, eps: f64, t: f64, x: &[Complex64]) -> Vec<Complex64> {
        let mut acc = vec![Complex64::ZERO; self.n];
        for (p, g) in &self.orders {
            let w = eps.powi(*p as i32);
            for (a, v) in acc.iter_mut().zip(g.eval(t, x)) {
                *a += w * v;
            }
        }
        acc
    }
}

/// Epsilon-graded vector series `v_0 + eps v_1 + ...` used to collect Taylor
/// coefficients exactly.
#[derive(Clone, Debug)]
pub(crate) struct GradedVector<S: Scalar> {
    pub grades: Vec<QpVector<S>>,
}

impl<S: Scalar> GradedVector<S> {
    fn component_series(&self, i: usize) -> GradedPoly<S> {
        GradedPoly {
            grades: self.grades.iter().map(|v| v.component(i).clone()).collect(),
        }
    }
}

#[derive(Clone, Debug)]
struct GradedPoly<S: Scalar> {
    grades: Vec<QpPoly<S>>,
}

impl<S: Scalar> GradedPoly<S> {
    fn zero_like(template: &QpPoly<S>, max_order: usize) -> Self {
        GradedPoly {
            grades: (0..=max_order)
                .map(|_| QpPoly::zero(template.n(), template.basis().clone()))
                .collect(),
        }
    }

    fn constant(c: QpPoly<S>, max_order: usize) -> Self {
        let mut g = GradedPoly::zero_like(&c, max_order);
        g.grades[0] = c;
        g
    }

    fn add(&self, other: &Self) -> Result<Self, QpError> {
        let mut grades = Vec::with_capacity(self.grades.len());
        for (a, b) in self.grades.iter().zip(&other.grades) {
            grades.push(a.add(b)?);
        }
        Ok(GradedPoly { grades })
    }

    /// Product truncated at the shared maximum order.
    fn mul(&self, other: &Self) -> Result<Self, QpError> {
        let max = self.grades.len() - 1;
        let mut out = GradedPoly::zero_like(&self.grades[0], max);
        for (i, a) in self.grades.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.grades.iter().enumerate() {
                if i + j > max {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                out.grades[i + j] = out.grades[i + j].add(&a.mul(b)?)?;
            }
        }
        Ok(out)
    }

    fn pow(&self, e: u32, max: usize) -> Result<Self, QpError> {
        let one = QpPoly::constant(self.grades[0].n(), self.grades[0].basis().clone(), S::one());
        let mut out = GradedPoly::constant(one, max);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }
}

/// Substitute the graded series `x(eps) = x_0 + eps x_1 + ...` into a
/// polynomial and truncate at `max_order`, keeping the time exponential of
/// every term.
fn substitute_graded<S: Scalar>(
    p: &QpPoly<S>,
    x: &GradedVector<S>,
    max_order: usize,
) -> Result<GradedPoly<S>, QpError> {
    let template = x.grades[0].component(0);
    let component_series: Vec<GradedPoly<S>> =
        (0..p.n()).map(|j| x.component_series(j)).collect();
    let mut out = GradedPoly::zero_like(template, max_order);
    for (key, c) in p.terms() {
        let mut term = GradedPoly::constant(
            QpPoly::constant(template.n(), template.basis().clone(), c.clone()),
            max_order,
        );
        for (j, &e) in key.alpha.iter().enumerate() {
            if e > 0 {
                term = term.mul(&component_series[j].pow(e, max_order)?)?;
            }
        }
        if !key.is_time_constant() {
            for g in term.grades.iter_mut() {
                *g = g.shift_lattice(&key.k);
            }
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Expand `sum_p eps^p g_p(t, x_0 + eps x_1 + ...)` and return the graded
/// coefficients up to `max_order`. Grade zero is always empty since every
/// order of the system carries at least one power of eps.
pub(crate) fn collect_graded<S: Scalar>(
    sys: &PerturbedSystem<S>,
    x: &GradedVector<S>,
    max_order: usize,
) -> Result<GradedVector<S>, RgError> {
    let out_n = x.grades[0].component(0).n();
    let out_basis = x.grades[0].component(0).basis().clone();
    let mut grades: Vec<QpVector<S>> =
        (0..=max_order).map(|_| QpVector::zero(sys.n, out_n, out_basis.clone())).collect();
    for (p, g) in &sys.orders {
        if *p > max_order {
            continue;
        }
        let inner_max = max_order - *p;
        for i in 0..sys.n {
            let expanded = substitute_graded(g.component(i), x, inner_max)?;
            for (j, poly) in expanded.grades.into_iter().enumerate() {
                if poly.is_zero() {
                    continue;
                }
                let target = &mut grades[p + j];
                let mut comps = target.components().to_vec();
                comps[i] = comps[i].add(&poly)?;
                *target = QpVector::new(comps)?;
            }
        }
    }
    Ok(GradedVector { grades })
}

/// The identity graded series in the system's own variables: `y + eps x_1 +
/// eps^2 x_2 + ...` for given substitutes.
fn identity_plus<S: Scalar>(
    sys: &PerturbedSystem<S>,
    subs: &[QpVector<S>],
    max_order: usize,
) -> Result<GradedVector<S>, RgError> {
    let mut id_components = Vec::with_capacity(sys.n);
    for j in 0..sys.n {
        id_components.push(QpPoly::variable(sys.n, sys.basis.clone(), j)?);
    }
    let mut grades = vec![QpVector::new(id_components)?];
    for v in subs.iter().take(max_order) {
        grades.push(v.clone());
    }
    while grades.len() <= max_order {
        grades.push(sys.zero_vector());
    }
    Ok(GradedVector { grades })
}

/// Taylor-collection operator: the coefficient of `eps^K` in
/// `sum_p eps^p g_p(t, y + eps x_1 + ... )` with the given substitutes.
pub fn collect_order<S: Scalar>(
    sys: &PerturbedSystem<S>,
    subs: &[QpVector<S>],
    order: usize,
) -> Result<QpVector<S>, RgError> {
    if order == 0 {
        return Err(RgError::ZeroOrder);
    }
    let x = identity_plus(sys, subs, order)?;
    let collected = collect_graded(sys, &x, order)?;
    Ok(collected.grades[order].clone())
}

/// Result of an RG derivation: per-order averaged fields (the RG equation)
/// and oscillatory transform grades (the RG transformation), plus the system
/// they came from and any gauge applied.
#[derive(Clone, Debug, PartialEq)]
pub struct RgResult<S: Scalar> {
    system: PerturbedSystem<S>,
    order: usize,
    /// `r[i]` is the coefficient of `eps^{i+1}` in the RG equation; each is
    /// independent of time.
    r: Vec<QpVector<S>>,
    /// `u[i]` is the grade-`i+1` part of the near-identity transformation.
    /// Mean-zero unless a gauge with nonzero constants was applied.
    u: Vec<QpVector<S>>,
    /// Gauge constants used in the derivation, empty for the zero-constant
    /// representative.
    gauge: Vec<QpVector<S>>,
}

impl<S: Scalar> RgResult<S> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn system(&self) -> &PerturbedSystem<S> {
        &self.system
    }

    pub fn rg_term(&self, i: usize) -> Result<&QpVector<S>, RgError> {
        self.r.get(i - 1).ok_or(RgError::OrderOutOfRange(i, self.order))
    }

    pub fn transform_term(&self, i: usize) -> Result<&QpVector<S>, RgError> {
        self.u.get(i - 1).ok_or(RgError::OrderOutOfRange(i, self.order))
    }

    pub fn rg_terms(&self) -> &[QpVector<S>] {
        &self.r
    }

    pub fn transform_terms(&self) -> &[QpVector<S>] {
        &self.u
    }

    pub fn gauge(&self) -> &[QpVector<S>] {
        &self.gauge
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn basis(&self) -> &FrequencyBasis {
        self.system.basis()
    }

    /// Numeric right-hand side of the RG equation at a fixed eps.
    pub fn eval_rg_field(&self, eps: f64, y: &[Complex64]) -> Vec<Complex64> {
        let mut acc = vec![Complex64::ZERO; self.n()];
        for (idx, r) in self.r.iter().enumerate() {
            let w = eps.powi(idx as i32 + 1);
            for (a, v) in acc.iter_mut().zip(r.eval(0.0, y)) {
                *a += w * v;
            }
        }
        acc
    }

    /// Exact Jacobian of the RG field evaluated numerically.
    pub fn eval_rg_jacobian(&self, eps: f64, y: &[Complex64]) -> Result<Vec<Vec<Complex64>>, RgError> {
        let n = self.n();
        let mut jac = vec![vec![Complex64::ZERO; n]; n];
        for (idx, r) in self.r.iter().enumerate() {
            let w = eps.powi(idx as i32 + 1);
            for i in 0..n {
                for j in 0..n {
                    jac[i][j] += w * r.component(i).diff_y(j)?.eval(0.0, y);
                }
            }
        }
        Ok(jac)
    }

    /// The near-identity map `y + sum_k eps^k u_k(t, y)` evaluated
    /// numerically.
    pub fn eval_transform(&self, eps: f64, t: f64, y: &[Complex64]) -> Vec<Complex64> {
        self.eval_transform_truncated(self.order, eps, t, y)
    }

    /// The transformation truncated below the derivation order: grades above
    /// `depth` are dropped.
    pub fn eval_transform_truncated(
        &self,
        depth: usize,
        eps: f64,
        t: f64,
        y: &[Complex64],
    ) -> Vec<Complex64> {
        let mut acc: Vec<Complex64> = y.to_vec();
        for (idx, u) in self.u.iter().take(depth).enumerate() {
            let w = eps.powi(idx as i32 + 1);
            for (a, v) in acc.iter_mut().zip(u.eval(t, y)) {
                *a += w * v;
            }
        }
        acc
    }
}

/// Derive the RG equation and transformation up to `order` with zero
/// integral constants.
///
/// The zero-constant shortcut (the averaged recursion correction vanishes,
/// so each averaged field equals the average of the collected Taylor term
/// alone) is asserted on every order as an internal consistency check.
pub fn derive<S: Scalar>(sys: &PerturbedSystem<S>, order: usize) -> Result<RgResult<S>, RgError> {
    derive_impl(sys, order, None)
}

/// Derive with explicit gauge constants `b[i]`, i.e. integral constants
/// `u_k(0)` mean parts. `b` must contain `order` time-independent fields.
pub fn derive_with_gauge<S: Scalar>(
    sys: &PerturbedSystem<S>,
    order: usize,
    b: &[QpVector<S>],
) -> Result<RgResult<S>, RgError> {
    if b.len() != order {
        return Err(RgError::GaugeArity {
            expected: order,
            found: b.len(),
        });
    }
    for v in b {
        for c in v.components() {
            if c.average_t()? != *c {
                return Err(RgError::GaugeNotConstant);
            }
        }
    }
    derive_impl(sys, order, Some(b))
}

fn derive_impl<S: Scalar>(
    sys: &PerturbedSystem<S>,
    order: usize,
    gauge: Option<&[QpVector<S>]>,
) -> Result<RgResult<S>, RgError> {
    if order == 0 {
        return Err(RgError::ZeroOrder);
    }
    if sys.orders.is_empty() {
        return Err(RgError::EmptySystem);
    }
    let mut r: Vec<QpVector<S>> = Vec::with_capacity(order);
    let mut u: Vec<QpVector<S>> = Vec::with_capacity(order);
    for i in 1..=order {
        let collected = collect_order(sys, &u, i)?;
        // correction sum_{k=1}^{i-1} (du_k/dy) r_{i-k}
        let mut correction = sys.zero_vector();
        for k in 1..i {
            correction = correction.add(&u[k - 1].jacobian_times(&r[i - k - 1])?)?;
        }
        let integrand = collected.sub(&correction)?;
        let r_i = integrand.average_t()?;
        if gauge.is_none() {
            // With zero constants the correction sum is mean-zero, so the
            // averaged field comes from the collected term alone.
            let direct = collected.average_t()?;
            if direct != r_i {
                return Err(RgError::ShortcutViolated(i));
            }
        }
        let mut u_i = integrand.sub(&r_i)?.antiderivative_t()?;
        if let Some(b) = gauge {
            u_i = u_i.add(&b[i - 1])?;
        }
        r.push(r_i);
        u.push(u_i);
    }
    Ok(RgResult {
        system: sys.clone(),
        order,
        r,
        u,
        gauge: gauge.map(|b| b.to_vec()).unwrap_or_default(),
    })
}

/// Re-derive with the given gauge constants and check the order-two change
/// of representative against the commutator identity
/// `r2_new = r2 - [b1, r1]`.
pub fn apply_gauge<S: Scalar>(
    res: &RgResult<S>,
    b: &[QpVector<S>],
) -> Result<RgResult<S>, RgError> {
    let gauged = derive_with_gauge(&res.system, res.order, b)?;
    // First averaged field never depends on the constants.
    debug_assert_eq!(gauged.r[0], res.r[0]);
    if res.order >= 2 {
        let expected = res.r[1].sub(&commutator(&b[0], &res.r[0])?)?;
        debug_assert_eq!(gauged.r[1], expected);
    }
    Ok(gauged)
}

/// Epsilon-graded residual of the conjugacy: transforms the system through
/// the derived map and subtracts the RG field, returning the expansion
/// orders `1..=max_order`. Orders up to the derivation order must vanish
/// identically; the next order is the leading remainder.
pub fn conjugacy_residual<S: Scalar>(
    res: &RgResult<S>,
    max_order: usize,
) -> Result<Vec<QpVector<S>>, RgError> {
    let sys = &res.system;
    // Right-hand side pulled back through the transformation.
    let alpha = identity_plus(sys, &res.u, max_order)?;
    let rhs = collect_graded(sys, &alpha, max_order)?;
    // Time derivative of the transformation grades.
    let mut w: Vec<QpVector<S>> = Vec::with_capacity(max_order + 1);
    w.push(sys.zero_vector());
    for k in 1..=max_order {
        let du_dt = if k <= res.order {
            res.u[k - 1].diff_t()
        } else {
            sys.zero_vector()
        };
        w.push(rhs.grades[k].sub(&du_dt)?);
    }
    // Solve (id + J(eps)) ydot = w order by order, where J is the graded
    // Jacobian of the transformation.
    let jac_times = |k: usize, v: &QpVector<S>| -> Result<QpVector<S>, RgError> {
        if k == 0 || k > res.order {
            return Ok(sys.zero_vector());
        }
        Ok(res.u[k - 1].jacobian_times(v)?)
    };
    let mut ydot: Vec<QpVector<S>> = vec![sys.zero_vector()];
    for k in 1..=max_order {
        let mut acc = w[k].clone();
        for j in 1..=k {
            let contrib = jac_times(j, &ydot[k - j])?;
            acc = acc.sub(&contrib)?;
        }
        ydot.push(acc);
    }
    // Subtract the RG field.
    let mut out = Vec::with_capacity(max_order);
    for k in 1..=max_order {
        let rk = if k <= res.order {
            res.r[k - 1].clone()
        } else {
            sys.zero_vector()
        };
        out.push(ydot[k].sub(&rk)?);
    }
    Ok(out)
}

/// The time-independent connector between two derivations of the same
/// system: grades of the map `psi` with `alpha(psi(y)) = alpha_tilde(y)` as
/// formal series, solved order by order.
///
/// When both results derive the same system with different integral
/// constants, every grade of `psi` must come out independent of time.
pub fn gauge_connector<S: Scalar>(
    a: &RgResult<S>,
    b: &RgResult<S>,
) -> Result<Vec<QpVector<S>>, RgError> {
    let sys = &a.system;
    let order = a.order.min(b.order);
    let mut id_components = Vec::with_capacity(sys.n);
    for j in 0..sys.n {
        id_components.push(QpPoly::variable(sys.n, sys.basis.clone(), j)?);
    }
    let identity = QpVector::new(id_components)?;
    let mut psi: Vec<QpVector<S>> = vec![identity];
    for k in 1..=order {
        // grade-k coefficient of sum_j eps^j u_j(psi(y)), using psi grades
        // below k only
        let mut padded = psi.clone();
        padded.push(sys.zero_vector());
        let x = GradedVector { grades: padded };
        let mut acc = sys.zero_vector();
        for j in 1..=k {
            let expanded = substitute_graded_vector(&a.u[j - 1], &x, k - j)?;
            acc = acc.add(&expanded[k - j])?;
        }
        psi.push(b.u[k - 1].sub(&acc)?);
    }
    Ok(psi)
}

fn substitute_graded_vector<S: Scalar>(
    v: &QpVector<S>,
    x: &GradedVector<S>,
    max_order: usize,
) -> Result<Vec<QpVector<S>>, RgError> {
    let mut per_grade: Vec<Vec<QpPoly<S>>> = vec![Vec::new(); max_order + 1];
    for comp in v.components() {
        let expanded = substitute_graded(comp, x, max_order)?;
        for (g, poly) in expanded.grades.into_iter().enumerate() {
            per_grade[g].push(poly);
        }
    }
    per_grade
        .into_iter()
        .map(|comps| Ok(QpVector::new(comps)?))
        .collect()
}

impl PerturbedSystem<crate::scalar::CRat> {
    /// Reinterpret exact coefficients in double precision.
    pub fn to_float(&self) -> PerturbedSystem<crate::scalar::C64> {
        let mut out = PerturbedSystem::new(self.n, self.basis.clone());
        for (p, v) in &self.orders {
            let comps: Vec<_> = v
                .components()
                .iter()
                .map(|poly| poly.map_scalars(|c| crate::scalar::C64(c.to_complex64())))
                .collect();
            out.orders
                .insert(*p, QpVector::new(comps).expect("same shape"));
        }
        out
    }
}

/// Secular-coefficient table of the regular perturbation expansion.
///
/// `table[i-1][j-1]` holds the coefficient of `t^j` in the i-th order
/// regular perturbation solution; entries with `j > i` vanish and are not
/// stored.
pub fn regular_perturbation_table<S: Scalar>(
    res: &RgResult<S>,
    depth: usize,
) -> Result<Vec<Vec<QpVector<S>>>, RgError> {
    if depth > res.order {
        return Err(RgError::OrderOutOfRange(depth, res.order));
    }
    let mut table: Vec<Vec<QpVector<S>>> = Vec::with_capacity(depth);
    for i in 1..=depth {
        let mut row: Vec<QpVector<S>> = Vec::with_capacity(i);
        // linear-in-t coefficient
        let mut p1 = res.r[i - 1].clone();
        for k in 1..i {
            p1 = p1.add(&res.u[k - 1].jacobian_times(&res.r[i - k - 1])?)?;
        }
        row.push(p1);
        // higher powers of t
        for j in 2..=i {
            let mut acc = res.system.zero_vector();
            for k in j - 1..i {
                let prev = &table[k - 1][j - 2];
                acc = acc.add(&prev.jacobian_times(&res.r[i - k - 1])?)?;
            }
            let inv_j = S::one().div_rat(&num_rational::BigRational::from_integer(
                num_bigint::BigInt::from(j as i64),
            ));
            row.push(acc.map(|c| c.scale(&inv_j)));
        }
        table.push(row);
    }
    Ok(table)
}
