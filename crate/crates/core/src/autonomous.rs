//! Reduction of autonomous systems `dx/dt = F x + eps g(x, eps)` with
//! diagonal `F = i diag(nu_1, .., nu_n)` to the time-periodic standard form
//! via `x = e^{Ft} X`, plus normal forms and their rotational symmetry.
//!
//! Only diagonal `F` with exact rational `nu_j` is supported; every `nu_j`
//! and every declared frequency must sit on a single rational lattice so the
//! combined exponents stay decidable.

use crate::qp::{FrequencyBasis, QpError, QpPoly, QpVector, TermKey};
use crate::rg::{self, PerturbedSystem, RgError, RgResult};
use crate::scalar::{rational_gcd, Scalar};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AutonomousError {
    #[error(transparent)]
    Algebra(#[from] QpError),
    #[error(transparent)]
    Derivation(#[from] RgError),
    #[error("linear part dimension {0} does not match system dimension {1}")]
    DimensionMismatch(usize, usize),
    #[error("eigenvalue ratios are not rational multiples of a common generator")]
    NotLattice,
    #[error("frequency basis with {0} generators cannot be merged with the linear part; a single rational generator is required")]
    UnsupportedBasis(usize),
    #[error("polar reduction requires a two-dimensional conjugate-pair system with rotation numbers (1, -1)")]
    NotConjugatePair,
    #[error("polar reduction requires every term to satisfy the rotational resonance condition")]
    NotEquivariant,
}

/// Diagonal linear part: eigenvalues `i nu_j` with exact rational `nu_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalLinearPart {
    nu: Vec<BigRational>,
}

impl DiagonalLinearPart {
    pub fn new(nu: Vec<BigRational>) -> Self {
        DiagonalLinearPart { nu }
    }

    pub fn from_integers(nu: &[i64]) -> Self {
        DiagonalLinearPart {
            nu: nu
                .iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &[BigRational] {
        &self.nu
    }
}

/// Merged lattice data: a single-generator basis covering the original
/// frequencies and the rotation numbers.
struct MergedLattice {
    basis: FrequencyBasis,
    /// integer image of each original basis generator
    old_gen: Vec<i64>,
    /// integer image of each rotation number
    nu_int: Vec<i64>,
}

fn merge_lattice<S: Scalar>(
    f: &DiagonalLinearPart,
    sys: &PerturbedSystem<S>,
) -> Result<MergedLattice, AutonomousError> {
    let old = sys.basis();
    if old.dim() > 1 {
        return Err(AutonomousError::UnsupportedBasis(old.dim()));
    }
    let mut gen = BigRational::zero();
    for w in old.values() {
        gen = rational_gcd(&gen, w);
    }
    for nu in &f.nu {
        gen = rational_gcd(&gen, nu);
    }
    if gen.is_zero() {
        // all rotation numbers zero and no declared frequency: autonomous
        return Ok(MergedLattice {
            basis: FrequencyBasis::empty(),
            old_gen: vec![],
            nu_int: vec![0; f.n()],
        });
    }
    let to_int = |value: &BigRational| -> Result<i64, AutonomousError> {
        let q = value / &gen;
        if !q.is_integer() {
            return Err(AutonomousError::NotLattice);
        }
        q.to_integer().to_i64().ok_or(AutonomousError::NotLattice)
    };
    let old_gen = old
        .values()
        .iter()
        .map(to_int)
        .collect::<Result<Vec<_>, _>>()?;
    let nu_int = f.nu.iter().map(to_int).collect::<Result<Vec<_>, _>>()?;
    Ok(MergedLattice {
        basis: FrequencyBasis::new(vec![gen])?,
        old_gen,
        nu_int,
    })
}

/// Rotate out the linear part: a term `c x^alpha e^{i mu t}` in component `i`
/// becomes `c y^alpha e^{i (mu + alpha.nu - nu_i) t}`.
pub fn autonomize<S: Scalar>(
    f: &DiagonalLinearPart,
    sys: &PerturbedSystem<S>,
) -> Result<PerturbedSystem<S>, AutonomousError> {
    if f.n() != sys.n() {
        return Err(AutonomousError::DimensionMismatch(f.n(), sys.n()));
    }
    let lattice = merge_lattice(f, sys)?;
    let d_new = lattice.basis.dim();
    let mut out = PerturbedSystem::new(sys.n(), lattice.basis.clone());
    for (p, field) in sys.orders() {
        let mut comps = Vec::with_capacity(sys.n());
        for (i, poly) in field.components().iter().enumerate() {
            let mut shifted = QpPoly::zero(sys.n(), lattice.basis.clone());
            for (key, c) in poly.terms() {
                let mut freq: i64 = key
                    .k
                    .iter()
                    .zip(&lattice.old_gen)
                    .map(|(kj, gj)| kj * gj)
                    .sum();
                for (aj, nuj) in key.alpha.iter().zip(&lattice.nu_int) {
                    freq += *aj as i64 * nuj;
                }
                freq -= lattice.nu_int[i];
                let k_new = if d_new == 0 {
                    debug_assert_eq!(freq, 0);
                    vec![]
                } else {
                    vec![freq]
                };
                shifted = shifted.add(&QpPoly::from_terms(
                    sys.n(),
                    lattice.basis.clone(),
                    vec![(c.clone(), key.alpha.clone(), k_new)],
                )?)?;
            }
            comps.push(shifted);
        }
        out.set_order(p, QpVector::new(comps)?)?;
    }
    Ok(out)
}

/// Normal form of `dx/dt = Fx + eps g`: the averaged fields of the rotated
/// system, read back as the polynomial part of `dz/dt = Fz + sum eps^k r_k(z)`.
/// The composite change of coordinates is independent of time.
pub fn normal_form<S: Scalar>(
    f: &DiagonalLinearPart,
    sys: &PerturbedSystem<S>,
    order: usize,
) -> Result<RgResult<S>, AutonomousError> {
    let rotated = autonomize(f, sys)?;
    Ok(rg::derive(&rotated, order)?)
}

/// A term that breaks the rotational symmetry of a normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivarianceViolation {
    /// epsilon order (1-based)
    pub order: usize,
    /// component index (0-based)
    pub component: usize,
    pub key: TermKey,
}

/// Check `r_i(e^{F tau} y) = e^{F tau} r_i(y)` exactly: every term
/// `c y^alpha` in component `j` must satisfy `alpha . nu = nu_j`.
pub fn equivariance_violations<S: Scalar>(
    f: &DiagonalLinearPart,
    res: &RgResult<S>,
) -> Vec<EquivarianceViolation> {
    let mut out = Vec::new();
    for (idx, r) in res.rg_terms().iter().enumerate() {
        for (j, poly) in r.components().iter().enumerate() {
            for (key, _) in poly.terms() {
                let mut shift = -f.nu[j].clone();
                for (aj, nuj) in key.alpha.iter().zip(&f.nu) {
                    shift += nuj * BigRational::from_integer((*aj).into());
                }
                if !shift.is_zero() {
                    out.push(EquivarianceViolation {
                        order: idx + 1,
                        component: j,
                        key: key.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Radial/angular reduction of an equivariant planar system in conjugate
/// coordinates `y_1 = r e^{i theta}, y_2 = r e^{-i theta}`: per-order real
/// coefficient lists for `dr/dtau` and `dtheta/dtau`, indexed by the power
/// of `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarReduction {
    pub radial: Vec<Vec<BigRational>>,
    pub angular: Vec<Vec<BigRational>>,
}

impl PolarReduction {
    fn eval(per_order: &[Vec<BigRational>], eps: f64, r: f64) -> f64 {
        let mut acc = 0.0;
        for (idx, coeffs) in per_order.iter().enumerate() {
            let w = eps.powi(idx as i32 + 1);
            let mut poly = 0.0;
            for (deg, c) in coeffs.iter().enumerate() {
                poly += crate::scalar::rat_to_f64(c) * r.powi(deg as i32);
            }
            acc += w * poly;
        }
        acc
    }

    pub fn eval_radial(&self, eps: f64, r: f64) -> f64 {
        Self::eval(&self.radial, eps, r)
    }

    pub fn eval_angular(&self, eps: f64, r: f64) -> f64 {
        Self::eval(&self.angular, eps, r)
    }

    /// Radial polynomial at fixed eps, dense in powers of `r`.
    pub fn radial_polynomial(&self, eps: f64) -> Vec<f64> {
        let len = self.radial.iter().map(|c| c.len()).max().unwrap_or(0);
        let mut out = vec![0.0; len];
        for (idx, coeffs) in self.radial.iter().enumerate() {
            let w = eps.powi(idx as i32 + 1);
            for (deg, c) in coeffs.iter().enumerate() {
                out[deg] += w * crate::scalar::rat_to_f64(c);
            }
        }
        out
    }
}

/// Reduce an equivariant conjugate-pair normal form to polar coordinates.
///
/// Requires rotation numbers `(nu, -nu)` with component two the conjugate
/// mirror of component one; the resonance condition then forces every term
/// of component one to look like `c y_1^{b+1} y_2^b`.
pub fn polar_reduce<S: Scalar>(
    f: &DiagonalLinearPart,
    res: &RgResult<S>,
) -> Result<PolarReduction, AutonomousError> {
    if res.n() != 2 || f.n() != 2 {
        return Err(AutonomousError::NotConjugatePair);
    }
    if f.nu[0] != -f.nu[1].clone() || f.nu[0].is_zero() {
        return Err(AutonomousError::NotConjugatePair);
    }
    if !equivariance_violations(f, res).is_empty() {
        return Err(AutonomousError::NotEquivariant);
    }
    let mut radial = Vec::new();
    let mut angular = Vec::new();
    for r in res.rg_terms() {
        let comp1 = r.component(0);
        let comp2 = r.component(1);
        // conjugate-pair structure: comp2 must mirror comp1 with swapped
        // exponents and conjugated coefficients
        for (key, c) in comp1.terms() {
            let mirrored = TermKey {
                k: key.k.iter().map(|x| -x).collect(),
                alpha: vec![key.alpha[1], key.alpha[0]],
            };
            match comp2.coeff(&mirrored) {
                Some(cm) if *cm == c.conj() => {}
                _ => return Err(AutonomousError::NotConjugatePair),
            }
        }
        if comp1.num_terms() != comp2.num_terms() {
            return Err(AutonomousError::NotConjugatePair);
        }
        // dr/dtau = Re(sum c r^{a+b}), r dtheta/dtau = Im(sum c r^{a+b})
        let max_total: usize = comp1
            .terms()
            .map(|(k, _)| (k.alpha[0] + k.alpha[1]) as usize)
            .max()
            .unwrap_or(0);
        let mut dr = vec![BigRational::zero(); max_total + 1];
        let mut dth = vec![BigRational::zero(); max_total.max(1)];
        for (key, c) in comp1.terms() {
            if !key.is_time_constant() {
                return Err(AutonomousError::NotEquivariant);
            }
            let total = (key.alpha[0] + key.alpha[1]) as usize;
            let (re, im) = rational_parts(c);
            dr[total] = &dr[total] + re;
            // the angular equation divides by r; resonance guarantees
            // total >= 1
            debug_assert!(total >= 1);
            dth[total - 1] = &dth[total - 1] + im;
        }
        radial.push(dr);
        angular.push(dth);
    }
    Ok(PolarReduction { radial, angular })
}

// Exact real/imaginary parts when the scalar is rational-backed; double
// precision reinterpreted otherwise.
fn rational_parts<S: Scalar>(c: &S) -> (BigRational, BigRational) {
    if let Some(crat) = (c as &dyn std::any::Any).downcast_ref::<crate::scalar::CRat>() {
        (crat.re.clone(), crat.im.clone())
    } else {
        let z = c.to_complex64();
        (
            BigRational::from_float(z.re).unwrap_or_else(BigRational::zero),
            BigRational::from_float(z.im).unwrap_or_else(BigRational::zero),
        )
    }
}

/// Matrices of the conjugate-pair realification `x = P z` with
/// `x_1 = z_1 + z_2, x_2 = i(z_1 - z_2)`, in any scalar type.
pub fn realification_matrices<S: Scalar>() -> (Vec<Vec<S>>, Vec<Vec<S>>) {
    let zero = BigRational::from_integer(0.into());
    let one = BigRational::from_integer(1.into());
    let half = BigRational::new(1.into(), 2.into());
    let s = |re: &BigRational, im: &BigRational| S::from_rationals(re.clone(), im.clone());
    let neg = |v: &BigRational| -v.clone();
    let p = vec![
        vec![s(&one, &zero), s(&one, &zero)],
        vec![s(&zero, &one), s(&zero, &neg(&one))],
    ];
    let p_inv = vec![
        vec![s(&half, &zero), s(&zero, &neg(&half))],
        vec![s(&half, &zero), s(&zero, &half)],
    ];
    (p, p_inv)
}

/// Push a list of time-independent vector fields through an invertible
/// linear change of coordinates `x = P z`: each field `v(z)` becomes
/// `P v(P^{-1} x)` expressed in the new variables.
pub fn conjugate_fields<S: Scalar>(
    fields: &[QpVector<S>],
    p: &[Vec<S>],
    p_inv: &[Vec<S>],
) -> Result<Vec<QpVector<S>>, AutonomousError> {
    let n = p.len();
    let mut out = Vec::with_capacity(fields.len());
    for field in fields {
        if field.len() != n {
            return Err(AutonomousError::DimensionMismatch(field.len(), n));
        }
        let template = field.component(0);
        // rows of P^{-1} x as polynomials in the new variables
        let mut subs = Vec::with_capacity(n);
        for row in p_inv {
            let mut s = QpPoly::zero(n, template.basis().clone());
            for (j, coeff) in row.iter().enumerate() {
                let var = QpPoly::variable(n, template.basis().clone(), j)?;
                s = s.add(&var.scale(coeff))?;
            }
            subs.push(s);
        }
        let composed = field.substitute(&subs)?;
        let mut comps = Vec::with_capacity(n);
        for row in p {
            let mut acc = QpPoly::zero(n, template.basis().clone());
            for (j, coeff) in row.iter().enumerate() {
                acc = acc.add(&composed.component(j).scale(coeff))?;
            }
            comps.push(acc);
        }
        out.push(QpVector::new(comps)?);
    }
    Ok(out)
}
