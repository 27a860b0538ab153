//! Quasi-periodic polynomials: exact finite sums of terms
//! `c * y^alpha * e^{i lambda(k) t}` where `alpha` is a multi-index over the
//! state variables and `k` is an integer vector over a declared frequency
//! basis, `lambda(k) = sum_j k_j omega_j`.
//!
//! Keeping frequencies on an integer lattice makes "is this Fourier exponent
//! zero" decidable, which is what time averaging and antidifferentiation
//! need. Rationally dependent basis values are tolerated until a nonzero
//! lattice vector actually hits the zero exponent, which is a hard error.

use crate::scalar::{rat_to_f64, Scalar};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum QpError {
    #[error("frequency basis mismatch between operands")]
    BasisMismatch,
    #[error("state dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("variable index {0} out of range for dimension {1}")]
    VariableOutOfRange(usize, usize),
    #[error("antiderivative requires a mean-zero integrand; found a constant-frequency term")]
    MeanNotZero,
    #[error("nonzero lattice vector {k:?} has zero frequency; declared basis is rationally dependent at reachable order")]
    ZeroFrequencyCollision { k: Vec<i64> },
    #[error("substitution arity {0} does not match state dimension {1}")]
    SubstitutionArity(usize, usize),
    #[error("frequency {0} is not an integer multiple of the basis generator")]
    NotOnLattice(String),
    #[error("basis value must be nonzero")]
    ZeroBasisValue,
}

#[derive(Debug, PartialEq, Eq)]
struct BasisInner {
    omegas: Vec<BigRational>,
}

/// Declared frequency basis. Exponents of every polynomial live on the
/// integer lattice spanned by these values.
///
/// Cheap to clone; identity is by value, not by allocation.
#[derive(Clone, Debug)]
pub struct FrequencyBasis {
    inner: Arc<BasisInner>,
}

impl PartialEq for FrequencyBasis {
    fn eq(&self, other: &Self) -> bool {
        self.inner.omegas == other.inner.omegas
    }
}
impl Eq for FrequencyBasis {}

impl FrequencyBasis {
    pub fn new(omegas: Vec<BigRational>) -> Result<Self, QpError> {
        if omegas.iter().any(|w| w.is_zero()) {
            return Err(QpError::ZeroBasisValue);
        }
        Ok(FrequencyBasis {
            inner: Arc::new(BasisInner { omegas }),
        })
    }

    /// Autonomous basis: no frequencies at all.
    pub fn empty() -> Self {
        FrequencyBasis {
            inner: Arc::new(BasisInner { omegas: vec![] }),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.omegas.len()
    }

    pub fn values(&self) -> &[BigRational] {
        &self.inner.omegas
    }

    /// Exact Fourier exponent of a lattice vector.
    pub fn frequency_of(&self, k: &[i64]) -> BigRational {
        let mut acc = BigRational::zero();
        for (kj, wj) in k.iter().zip(self.inner.omegas.iter()) {
            if *kj != 0 {
                acc += wj * BigRational::from_integer((*kj).into());
            }
        }
        acc
    }

    /// A common period `2*pi/w` exists iff a single generator `w` spans the
    /// lattice; with `d = 1` that is the basis value itself.
    pub fn period_hint(&self) -> Option<BigRational> {
        match self.dim() {
            0 => None,
            1 => Some(self.inner.omegas[0].clone()),
            _ => {
                let mut g = self.inner.omegas[0].clone();
                for w in &self.inner.omegas[1..] {
                    g = crate::scalar::rational_gcd(&g, w);
                }
                // For a multi-dimensional basis we only report a generator
                // when all values are honestly commensurate.
                if self
                    .inner
                    .omegas
                    .iter()
                    .all(|w| (w / &g).is_integer())
                {
                    Some(g)
                } else {
                    None
                }
            }
        }
    }
}

/// Canonical term key, ordered lexicographically by `k` then `alpha` so that
/// serialized polynomials are reproducible byte-for-byte.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TermKey {
    pub k: Vec<i64>,
    pub alpha: Vec<u32>,
}

impl TermKey {
    pub fn constant(n: usize, d: usize) -> Self {
        TermKey {
            k: vec![0; d],
            alpha: vec![0; n],
        }
    }

    pub fn is_time_constant(&self) -> bool {
        self.k.iter().all(|&x| x == 0)
    }
}

/// Sparse quasi-periodic polynomial over `n` state variables.
#[derive(Clone, Debug, PartialEq)]
pub struct QpPoly<S: Scalar> {
    n: usize,
    basis: FrequencyBasis,
    terms: BTreeMap<TermKey, S>,
}

impl<S: Scalar> QpPoly<S> {
    pub fn zero(n: usize, basis: FrequencyBasis) -> Self {
        QpPoly {
            n,
            basis,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, basis: FrequencyBasis, c: S) -> Self {
        let mut p = QpPoly::zero(n, basis);
        if !c.is_zero() {
            let d = p.basis.dim();
            p.terms.insert(TermKey::constant(n, d), c);
        }
        p
    }

    /// The monomial `y_j`.
    pub fn variable(n: usize, basis: FrequencyBasis, j: usize) -> Result<Self, QpError> {
        if j >= n {
            return Err(QpError::VariableOutOfRange(j, n));
        }
        let mut alpha = vec![0u32; n];
        alpha[j] = 1;
        let d = basis.dim();
        let mut p = QpPoly::zero(n, basis);
        p.terms.insert(
            TermKey {
                k: vec![0; d],
                alpha,
            },
            S::one(),
        );
        Ok(p)
    }

    /// Build from raw terms; duplicate keys are accumulated, zeros dropped.
    pub fn from_terms(
        n: usize,
        basis: FrequencyBasis,
        terms: impl IntoIterator<Item = (S, Vec<u32>, Vec<i64>)>,
    ) -> Result<Self, QpError> {
        let d = basis.dim();
        let mut p = QpPoly::zero(n, basis);
        for (c, alpha, k) in terms {
            if alpha.len() != n {
                return Err(QpError::DimensionMismatch(alpha.len(), n));
            }
            if k.len() != d {
                return Err(QpError::DimensionMismatch(k.len(), d));
            }
            p.accumulate(TermKey { k, alpha }, c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &FrequencyBasis {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &TermKey) -> Option<&S> {
        self.terms.get(key)
    }

    fn accumulate(&mut self, key: TermKey, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(existing) => {
                let sum = existing.add(&c);
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), QpError> {
        if self.n != other.n {
            return Err(QpError::DimensionMismatch(self.n, other.n));
        }
        if self.basis != other.basis {
            return Err(QpError::BasisMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, QpError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (key, c) in &other.terms {
            out.accumulate(key.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QpError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (key, c) in &other.terms {
            out.accumulate(key.clone(), c.neg());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return QpPoly::zero(self.n, self.basis.clone());
        }
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (key, v) in &self.terms {
            out.accumulate(key.clone(), v.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, QpError> {
        self.check_compatible(other)?;
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = TermKey {
                    k: ka.k.iter().zip(&kb.k).map(|(a, b)| a + b).collect(),
                    alpha: ka.alpha.iter().zip(&kb.alpha).map(|(a, b)| a + b).collect(),
                };
                out.accumulate(key, ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self, QpError> {
        let mut out = QpPoly::constant(self.n, self.basis.clone(), S::one());
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Partial derivative with respect to state variable `j` (0-based).
    pub fn diff_y(&self, j: usize) -> Result<Self, QpError> {
        if j >= self.n {
            return Err(QpError::VariableOutOfRange(j, self.n));
        }
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (key, c) in &self.terms {
            let a = key.alpha[j];
            if a == 0 {
                continue;
            }
            let mut alpha = key.alpha.clone();
            alpha[j] = a - 1;
            out.accumulate(
                TermKey {
                    k: key.k.clone(),
                    alpha,
                },
                c.scale_int(a as i64),
            );
        }
        Ok(out)
    }

    /// Time derivative: multiplies each term by `i*lambda(k)`.
    pub fn diff_t(&self) -> Self {
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (key, c) in &self.terms {
            let lam = self.basis.frequency_of(&key.k);
            if lam.is_zero() {
                continue;
            }
            out.accumulate(key.clone(), c.mul_i().mul(&S::from_rationals(lam, BigRational::zero())));
        }
        out
    }

    /// Time average: the zero-frequency slice. Errors if a nonzero lattice
    /// vector evaluates to frequency zero, since the slice would then be
    /// ill-defined.
    pub fn average_t(&self) -> Result<Self, QpError> {
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (key, c) in &self.terms {
            if key.is_time_constant() {
                out.accumulate(key.clone(), c.clone());
            } else if self.basis.frequency_of(&key.k).is_zero() {
                return Err(QpError::ZeroFrequencyCollision { k: key.k.clone() });
            }
        }
        Ok(out)
    }

    /// Antiderivative in time with zero integral constant, defined for
    /// mean-zero inputs: each term is divided by `i*lambda(k)`.
    pub fn antiderivative_t(&self) -> Result<Self, QpError> {
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (key, c) in &self.terms {
            if key.is_time_constant() {
                return Err(QpError::MeanNotZero);
            }
            let lam = self.basis.frequency_of(&key.k);
            if lam.is_zero() {
                return Err(QpError::ZeroFrequencyCollision { k: key.k.clone() });
            }
            // 1/(i*lam) = -i/lam
            out.accumulate(key.clone(), c.mul_i().neg().div_rat(&lam));
        }
        Ok(out)
    }

    /// Exact composition `p(t, y_0 <- subs[0], ..., y_{n-1} <- subs[n-1])`.
    /// Exponentials carried by `p` multiply those introduced by the
    /// substitutes.
    pub fn substitute(&self, subs: &[QpPoly<S>]) -> Result<QpPoly<S>, QpError> {
        if subs.len() != self.n {
            return Err(QpError::SubstitutionArity(subs.len(), self.n));
        }
        let (out_n, out_basis) = match subs.first() {
            Some(s) => (s.n, s.basis.clone()),
            None => (0, self.basis.clone()),
        };
        for s in subs {
            if s.n != out_n || s.basis != out_basis {
                return Err(QpError::BasisMismatch);
            }
        }
        if self.basis != out_basis {
            return Err(QpError::BasisMismatch);
        }
        let mut out = QpPoly::zero(out_n, out_basis.clone());
        for (key, c) in &self.terms {
            let mut term = QpPoly::constant(out_n, out_basis.clone(), c.clone());
            // carry the exponential of the original term
            if !key.is_time_constant() {
                let mut shifted = QpPoly::zero(out_n, out_basis.clone());
                for (tk, tc) in term.terms {
                    let mut k2 = tk.k;
                    for (a, b) in k2.iter_mut().zip(&key.k) {
                        *a += b;
                    }
                    shifted.accumulate(TermKey { k: k2, alpha: tk.alpha }, tc);
                }
                term = shifted;
            }
            for (j, &e) in key.alpha.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&subs[j].pow(e)?)?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Numeric evaluation at time `t` and state `y`.
    pub fn eval(&self, t: f64, y: &[Complex64]) -> Complex64 {
        debug_assert_eq!(y.len(), self.n);
        let omega_f: Vec<f64> = self.basis.values().iter().map(rat_to_f64).collect();
        let mut acc = Complex64::ZERO;
        for (key, c) in &self.terms {
            let mut v = c.to_complex64();
            for (j, &e) in key.alpha.iter().enumerate() {
                for _ in 0..e {
                    v *= y[j];
                }
            }
            if !key.is_time_constant() {
                let lam: f64 = key
                    .k
                    .iter()
                    .zip(&omega_f)
                    .map(|(kj, wj)| *kj as f64 * wj)
                    .sum();
                v *= Complex64::new(0.0, lam * t).exp();
            }
            acc += v;
        }
        acc
    }

    /// Complex conjugate in the almost-periodic sense: coefficients are
    /// conjugated and lattice vectors negated, so that for real `t` the value
    /// is the pointwise conjugate when the state is substituted accordingly.
    pub fn conj_t(&self) -> Self {
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (key, c) in &self.terms {
            out.accumulate(
                TermKey {
                    k: key.k.iter().map(|x| -x).collect(),
                    alpha: key.alpha.clone(),
                },
                c.conj(),
            );
        }
        out
    }

    /// Shift the time lattice of every term by `dk` (multiplication by
    /// `e^{i lambda(dk) t}`).
    pub fn shift_lattice(&self, dk: &[i64]) -> Self {
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (key, c) in &self.terms {
            out.accumulate(
                TermKey {
                    k: key.k.iter().zip(dk).map(|(a, b)| a + b).collect(),
                    alpha: key.alpha.clone(),
                },
                c.clone(),
            );
        }
        out
    }

    /// Convert coefficients to another scalar type.
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> QpPoly<T> {
        let mut out = QpPoly::zero(self.n, self.basis.clone());
        for (key, c) in &self.terms {
            out.accumulate(key.clone(), f(c));
        }
        out
    }

    /// Maximum total degree in the state variables.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.alpha.iter().sum())
            .max()
            .unwrap_or(0)
    }
}

// Display goes through the shared renderer so tests and the CLI agree.
impl<S: Scalar> fmt::Display for QpPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::render::render_poly(self))
    }
}

/// Vector of quasi-periodic polynomials sharing dimension and basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QpVector<S: Scalar> {
    components: Vec<QpPoly<S>>,
}

impl<S: Scalar> QpVector<S> {
    pub fn new(components: Vec<QpPoly<S>>) -> Result<Self, QpError> {
        if let Some(first) = components.first() {
            for c in &components[1..] {
                first.check_compatible(c)?;
            }
        }
        Ok(QpVector { components })
    }

    pub fn zero(len: usize, n: usize, basis: FrequencyBasis) -> Self {
        QpVector {
            components: (0..len).map(|_| QpPoly::zero(n, basis.clone())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, i: usize) -> &QpPoly<S> {
        &self.components[i]
    }

    pub fn components(&self) -> &[QpPoly<S>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<QpPoly<S>> {
        self.components
    }

    pub fn map(&self, f: impl Fn(&QpPoly<S>) -> QpPoly<S>) -> Self {
        QpVector {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn try_map(
        &self,
        f: impl Fn(&QpPoly<S>) -> Result<QpPoly<S>, QpError>,
    ) -> Result<Self, QpError> {
        Ok(QpVector {
            components: self
                .components
                .iter()
                .map(f)
                .collect::<Result<Vec<_>, _>>()?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, QpError> {
        if self.len() != other.len() {
            return Err(QpError::DimensionMismatch(self.len(), other.len()));
        }
        Ok(QpVector {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect::<Result<Vec<_>, _>>()?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QpError> {
        if self.len() != other.len() {
            return Err(QpError::DimensionMismatch(self.len(), other.len()));
        }
        Ok(QpVector {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect::<Result<Vec<_>, _>>()?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn average_t(&self) -> Result<Self, QpError> {
        self.try_map(|p| p.average_t())
    }

    pub fn antiderivative_t(&self) -> Result<Self, QpError> {
        self.try_map(|p| p.antiderivative_t())
    }

    pub fn diff_t(&self) -> Self {
        self.map(|p| p.diff_t())
    }

    pub fn eval(&self, t: f64, y: &[Complex64]) -> Vec<Complex64> {
        self.components.iter().map(|p| p.eval(t, y)).collect()
    }

    /// Jacobian-vector product `(d self / d y) * v` done exactly.
    pub fn jacobian_times(&self, v: &QpVector<S>) -> Result<QpVector<S>, QpError> {
        let n = match self.components.first() {
            Some(p) => p.n,
            None => return Ok(self.clone()),
        };
        if v.len() != n {
            return Err(QpError::DimensionMismatch(v.len(), n));
        }
        self.try_map(|p| {
            let mut acc = QpPoly::zero(p.n, p.basis().clone());
            for j in 0..n {
                acc = acc.add(&p.diff_y(j)?.mul(v.component(j))?)?;
            }
            Ok(acc)
        })
    }

    /// Componentwise substitution.
    pub fn substitute(&self, subs: &[QpPoly<S>]) -> Result<QpVector<S>, QpError> {
        self.try_map(|p| p.substitute(subs))
    }
}

/// Commutator of time-independent polynomial vector fields:
/// `[b, r] = (db/dy) r - (dr/dy) b`.
pub fn commutator<S: Scalar>(b: &QpVector<S>, r: &QpVector<S>) -> Result<QpVector<S>, QpError> {
    b.jacobian_times(r)?.sub(&r.jacobian_times(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CRat;
    use num_bigint::BigInt;

    fn basis1() -> FrequencyBasis {
        FrequencyBasis::new(vec![BigRational::from_integer(BigInt::from(1))]).unwrap()
    }

    fn rat(p: i64, q: i64) -> CRat {
        CRat::from_ratio(p, q)
    }

    fn poly(terms: Vec<(CRat, Vec<u32>, Vec<i64>)>) -> QpPoly<CRat> {
        let n = terms[0].1.len();
        QpPoly::from_terms(n, basis1(), terms).unwrap()
    }

    #[test]
    fn add_cancels_opposite_terms() {
        let p = poly(vec![(rat(1, 1), vec![1, 0], vec![1])]);
        let q = poly(vec![(rat(-1, 1), vec![1, 0], vec![1])]);
        assert!(p.add(&q).unwrap().is_zero());
    }

    #[test]
    fn add_identity_and_constants() {
        let p = poly(vec![(rat(2, 1), vec![0, 0], vec![0])]);
        let q = poly(vec![(rat(3, 1), vec![0, 0], vec![0])]);
        let zero = QpPoly::zero(2, basis1());
        assert_eq!(p.add(&zero).unwrap(), p);
        let s = p.add(&q).unwrap();
        assert_eq!(
            s.coeff(&TermKey { k: vec![0], alpha: vec![0, 0] }),
            Some(&rat(5, 1))
        );
    }

    #[test]
    fn mul_adds_exponents() {
        let p = poly(vec![(rat(1, 1), vec![1, 0], vec![1])]);
        let q = poly(vec![(rat(2, 1), vec![0, 1], vec![-1])]);
        let r = p.mul(&q).unwrap();
        assert_eq!(r.num_terms(), 1);
        assert_eq!(
            r.coeff(&TermKey { k: vec![0], alpha: vec![1, 1] }),
            Some(&rat(2, 1))
        );
        let one = QpPoly::constant(2, basis1(), CRat::from_int(1));
        assert_eq!(p.mul(&one).unwrap(), p);
        let sq = p.mul(&p).unwrap();
        assert_eq!(
            sq.coeff(&TermKey { k: vec![2], alpha: vec![2, 0] }),
            Some(&rat(1, 1))
        );
    }

    #[test]
    fn diff_y_basics() {
        // d/dy1 (y1^2 e^{it}) = 2 y1 e^{it}
        let p = poly(vec![(rat(1, 1), vec![2, 0], vec![1])]);
        let d = p.diff_y(0).unwrap();
        assert_eq!(
            d.coeff(&TermKey { k: vec![1], alpha: vec![1, 0] }),
            Some(&rat(2, 1))
        );
        // d/dy2 (y1^2) = 0
        let q = poly(vec![(rat(1, 1), vec![2, 0], vec![0])]);
        assert!(q.diff_y(1).unwrap().is_zero());
        // d/dy1 (3 y1 y2) = 3 y2
        let r = poly(vec![(rat(3, 1), vec![1, 1], vec![0])]);
        assert_eq!(
            r.diff_y(0).unwrap().coeff(&TermKey { k: vec![0], alpha: vec![0, 1] }),
            Some(&rat(3, 1))
        );
    }

    #[test]
    fn average_keeps_zero_frequency_slice() {
        let p = poly(vec![
            (rat(1, 1), vec![1], vec![1]),
            (rat(2, 1), vec![1], vec![0]),
        ]);
        let avg = p.average_t().unwrap();
        assert_eq!(avg.num_terms(), 1);
        assert_eq!(
            avg.coeff(&TermKey { k: vec![0], alpha: vec![1] }),
            Some(&rat(2, 1))
        );
        let q = poly(vec![(rat(1, 1), vec![1], vec![2])]);
        assert!(q.average_t().unwrap().is_zero());
        let c = poly(vec![(rat(7, 1), vec![0], vec![0])]);
        assert_eq!(c.average_t().unwrap(), c);
        // idempotent projection
        assert_eq!(avg.average_t().unwrap(), avg);
    }

    #[test]
    fn average_matches_long_time_quadrature() {
        // trapezoid average over [0, T] at a fixed state approaches the k = 0 slice
        let p = poly(vec![
            (rat(1, 2), vec![1], vec![1]),
            (rat(1, 2), vec![1], vec![-1]),
            (rat(3, 4), vec![2], vec![0]),
        ]);
        let y = [Complex64::new(0.7, -0.2)];
        let t_big = 4000.0;
        let steps = 400_000usize;
        let h = t_big / steps as f64;
        let mut acc = 0.5 * (p.eval(0.0, &y) + p.eval(t_big, &y));
        for i in 1..steps {
            acc += p.eval(i as f64 * h, &y);
        }
        let quad = acc * h / t_big;
        let exact = p.average_t().unwrap().eval(0.0, &y);
        assert!((quad - exact).norm() < 1.0 / t_big * 10.0);
    }

    #[test]
    fn antiderivative_divides_by_frequency() {
        // a(y) e^{i t} -> a(y)/(i) e^{i t}
        let p = poly(vec![(rat(3, 1), vec![1], vec![1])]);
        let ad = p.antiderivative_t().unwrap();
        assert_eq!(
            ad.coeff(&TermKey { k: vec![1], alpha: vec![1] }),
            Some(&CRat::from_ratio_i(-3, 1))
        );
        assert!(QpPoly::<CRat>::zero(1, basis1())
            .antiderivative_t()
            .unwrap()
            .is_zero());
        // cos(w t) y1 -> sin(w t) y1 / w; check numerically
        let c = poly(vec![
            (rat(1, 2), vec![1], vec![1]),
            (rat(1, 2), vec![1], vec![-1]),
        ]);
        let ad = c.antiderivative_t().unwrap();
        let y = [Complex64::new(2.0, 0.0)];
        let t: f64 = 0.37;
        let expect = Complex64::new(t.sin() * 2.0, 0.0);
        assert!((ad.eval(t, &y) - expect).norm() < 1e-12);
        // mean not zero is rejected
        let bad = poly(vec![(rat(1, 1), vec![1], vec![0])]);
        assert_eq!(bad.antiderivative_t(), Err(QpError::MeanNotZero));
    }

    #[test]
    fn antiderivative_then_diff_t_roundtrip() {
        let p = poly(vec![
            (CRat::from_ratio_i(2, 3), vec![1, 1], vec![2]),
            (rat(-5, 7), vec![0, 2], vec![-1]),
        ]);
        assert_eq!(p.antiderivative_t().unwrap().diff_t(), p);
        assert!(p.antiderivative_t().unwrap().average_t().unwrap().is_zero());
    }

    #[test]
    fn zero_frequency_collision_detected() {
        // basis (1, 2) is rationally dependent; k = (2, -1) hits frequency 0
        let basis = FrequencyBasis::new(vec![
            BigRational::from_integer(BigInt::from(1)),
            BigRational::from_integer(BigInt::from(2)),
        ])
        .unwrap();
        let p = QpPoly::from_terms(1, basis, vec![(rat(1, 1), vec![1], vec![2, -1])]).unwrap();
        assert!(matches!(
            p.average_t(),
            Err(QpError::ZeroFrequencyCollision { .. })
        ));
        assert!(matches!(
            p.antiderivative_t(),
            Err(QpError::ZeroFrequencyCollision { .. })
        ));
    }

    #[test]
    fn substitution_binomial_and_identity() {
        // p = y1^2, y1 <- y1 + e^{it}
        let p = poly(vec![(rat(1, 1), vec![1], vec![0])]).pow(2).unwrap();
        let shift = poly(vec![
            (rat(1, 1), vec![1], vec![0]),
            (rat(1, 1), vec![0], vec![1]),
        ]);
        let q = p.substitute(&[shift]).unwrap();
        assert_eq!(q.num_terms(), 3);
        assert_eq!(
            q.coeff(&TermKey { k: vec![1], alpha: vec![1] }),
            Some(&rat(2, 1))
        );
        assert_eq!(
            q.coeff(&TermKey { k: vec![2], alpha: vec![0] }),
            Some(&rat(1, 1))
        );
        // identity substitution
        let idy = QpPoly::variable(1, basis1(), 0).unwrap();
        assert_eq!(p.substitute(&[idy]).unwrap(), p);
        // y1*y2 with y2 <- 0 is 0
        let pq = poly(vec![(rat(1, 1), vec![1, 1], vec![0])]);
        let y1 = QpPoly::variable(2, basis1(), 0).unwrap();
        let z = QpPoly::zero(2, basis1());
        assert!(pq.substitute(&[y1, z]).unwrap().is_zero());
    }

    #[test]
    fn substitution_carries_time_exponent() {
        // p = y1 e^{2it}, y1 <- y1 e^{-it}: result y1 e^{it}
        let p = poly(vec![(rat(1, 1), vec![1], vec![2])]);
        let s = poly(vec![(rat(1, 1), vec![1], vec![-1])]);
        let q = p.substitute(&[s]).unwrap();
        assert_eq!(
            q.coeff(&TermKey { k: vec![1], alpha: vec![1] }),
            Some(&rat(1, 1))
        );
    }

    #[test]
    fn eval_constant_and_monomial() {
        let five = QpPoly::constant(2, basis1(), CRat::from_int(5));
        assert_eq!(five.eval(1.3, &[Complex64::ZERO, Complex64::ZERO]), Complex64::new(5.0, 0.0));
        let p = poly(vec![(rat(1, 1), vec![1, 0], vec![1])]);
        let v = p.eval(0.0, &[Complex64::new(2.0, 0.0), Complex64::ZERO]);
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn conj_t_matches_pointwise_conjugate() {
        let p = poly(vec![
            (CRat::new(
                BigRational::new(BigInt::from(1), BigInt::from(3)),
                BigRational::new(BigInt::from(-2), BigInt::from(5)),
            ), vec![2, 1], vec![1]),
            (rat(1, 2), vec![0, 1], vec![-2]),
        ]);
        let y = [Complex64::new(0.3, 0.4), Complex64::new(-0.1, 0.9)];
        let yc: Vec<Complex64> = y.iter().map(|z| z.conj()).collect();
        let t = 0.77;
        let lhs = p.conj_t().eval(t, &yc);
        let rhs = p.eval(t, &y).conj();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn degenerate_dimensions_are_legal() {
        // n = 0: pure time series
        let basis = basis1();
        let p = QpPoly::from_terms(0, basis.clone(), vec![(rat(1, 1), vec![], vec![1])]).unwrap();
        assert!(p.average_t().unwrap().is_zero());
        // d = 0: autonomous; averaging is the identity
        let q = QpPoly::from_terms(1, FrequencyBasis::empty(), vec![(rat(2, 1), vec![3], vec![])])
            .unwrap();
        assert_eq!(q.average_t().unwrap(), q);
    }
}
