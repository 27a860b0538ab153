//! Coefficient arithmetic for the quasi-periodic polynomial ring.
//!
//! Two coefficient fields are supported: exact complex rationals (the
//! default, so derived equations can be compared coefficient-for-coefficient)
//! and complex double precision for systems with irrational data. The mode is
//! fixed per system; all symbolic operations are generic over [`Scalar`].

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

/// Ring operations required of a coefficient type.
///
/// Division only ever happens by a nonzero rational (time antidifferentiation
/// divides by a frequency), so a full field interface is not needed.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiply by an integer (used by state-variable differentiation).
    fn scale_int(&self, k: i64) -> Self;
    /// Divide by a nonzero rational.
    fn div_rat(&self, r: &BigRational) -> Self;
    /// Multiply by the imaginary unit.
    fn mul_i(&self) -> Self;
    fn conj(&self) -> Self;
    fn from_rationals(re: BigRational, im: BigRational) -> Self;
    fn to_complex64(&self) -> Complex64;
    /// True when arithmetic in this type is exact (no rounding).
    fn exact() -> bool;
    /// Human-readable coefficient, rationals in lowest terms, i-terms
    /// collected. Deterministic: used for golden text comparisons.
    fn render(&self) -> String;
    /// Real/imaginary part strings for serialization: `p/q` in exact mode,
    /// 17 significant digits in float mode.
    fn part_strings(&self) -> (String, String);
    /// Parse from part strings; exact mode rejects non-rational input.
    fn from_part_strings(re: &str, im: &str) -> Result<Self, String>;
}

/// Gaussian rational: exact complex number with rational real and imaginary
/// parts.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl CRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        CRat { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        CRat {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// `p/q` as a real rational.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        CRat {
            re: BigRational::new(BigInt::from(p), BigInt::from(q)),
            im: BigRational::zero(),
        }
    }

    /// `(p/q) i` as a pure imaginary rational.
    pub fn from_ratio_i(p: i64, q: i64) -> Self {
        CRat {
            re: BigRational::zero(),
            im: BigRational::new(BigInt::from(p), BigInt::from(q)),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl Scalar for CRat {
    fn zero() -> Self {
        CRat::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        CRat::from_int(1)
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, other: &Self) -> Self {
        CRat::new(&self.re + &other.re, &self.im + &other.im)
    }

    fn sub(&self, other: &Self) -> Self {
        CRat::new(&self.re - &other.re, &self.im - &other.im)
    }

    fn mul(&self, other: &Self) -> Self {
        CRat::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    fn neg(&self) -> Self {
        CRat::new(-self.re.clone(), -self.im.clone())
    }

    fn scale_int(&self, k: i64) -> Self {
        let f = BigRational::from_integer(BigInt::from(k));
        CRat::new(&self.re * &f, &self.im * &f)
    }

    fn div_rat(&self, r: &BigRational) -> Self {
        CRat::new(&self.re / r, &self.im / r)
    }

    fn mul_i(&self) -> Self {
        CRat::new(-self.im.clone(), self.re.clone())
    }

    fn conj(&self) -> Self {
        CRat::new(self.re.clone(), -self.im.clone())
    }

    fn from_rationals(re: BigRational, im: BigRational) -> Self {
        CRat::new(re, im)
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    fn exact() -> bool {
        true
    }

    fn render(&self) -> String {
        use num_traits::One;
        let im_part = |im: &BigRational| {
            if im == &BigRational::one() {
                "i".to_string()
            } else if im == &-BigRational::one() {
                "-i".to_string()
            } else {
                format!("{im}i")
            }
        };
        if self.im.is_zero() {
            format!("{}", self.re)
        } else if self.re.is_zero() {
            im_part(&self.im)
        } else {
            let im = im_part(&self.im);
            if im.starts_with('-') {
                format!("({}{})", self.re, im)
            } else {
                format!("({}+{})", self.re, im)
            }
        }
    }

    fn part_strings(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }

    fn from_part_strings(re: &str, im: &str) -> Result<Self, String> {
        Ok(CRat::new(parse_rational(re)?, parse_rational(im)?))
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}i", self.re, self.im)
    }
}

/// Complex double-precision coefficient.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct C64(pub Complex64);

impl Scalar for C64 {
    fn zero() -> Self {
        C64(Complex64::ZERO)
    }

    fn one() -> Self {
        C64(Complex64::ONE)
    }

    fn is_zero(&self) -> bool {
        self.0 == Complex64::ZERO
    }

    fn add(&self, other: &Self) -> Self {
        C64(self.0 + other.0)
    }

    fn sub(&self, other: &Self) -> Self {
        C64(self.0 - other.0)
    }

    fn mul(&self, other: &Self) -> Self {
        C64(self.0 * other.0)
    }

    fn neg(&self) -> Self {
        C64(-self.0)
    }

    fn scale_int(&self, k: i64) -> Self {
        C64(self.0 * k as f64)
    }

    fn div_rat(&self, r: &BigRational) -> Self {
        C64(self.0 / rat_to_f64(r))
    }

    fn mul_i(&self) -> Self {
        C64(self.0 * Complex64::I)
    }

    fn conj(&self) -> Self {
        C64(self.0.conj())
    }

    fn from_rationals(re: BigRational, im: BigRational) -> Self {
        C64(Complex64::new(rat_to_f64(&re), rat_to_f64(&im)))
    }

    fn to_complex64(&self) -> Complex64 {
        self.0
    }

    fn exact() -> bool {
        false
    }

    fn render(&self) -> String {
        let fmt17 = |x: f64| format!("{x:.16e}");
        if self.0.im == 0.0 {
            fmt17(self.0.re)
        } else if self.0.re == 0.0 {
            format!("{}i", fmt17(self.0.im))
        } else if self.0.im < 0.0 {
            format!("({}{}i)", fmt17(self.0.re), fmt17(self.0.im))
        } else {
            format!("({}+{}i)", fmt17(self.0.re), fmt17(self.0.im))
        }
    }

    fn part_strings(&self) -> (String, String) {
        (format!("{:.16e}", self.0.re), format!("{:.16e}", self.0.im))
    }

    fn from_part_strings(re: &str, im: &str) -> Result<Self, String> {
        Ok(C64(Complex64::new(parse_float_or_rational(re)?, parse_float_or_rational(im)?)))
    }
}

/// Accept either a rational string or a decimal literal.
pub fn parse_float_or_rational(s: &str) -> Result<f64, String> {
    if let Ok(r) = parse_rational(s) {
        return Ok(rat_to_f64(&r));
    }
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("malformed number {s:?}"))
}

/// Rational to double, exact for small numerators/denominators.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out-of-range ratios of huge integers; fall back to a sign-correct
        // saturation, which only matters for diagnostics.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Parse a rational from a `p/q` or plain-integer string, rejecting zero
/// denominators instead of panicking.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num_s
        .parse()
        .map_err(|_| format!("malformed rational numerator {num_s:?}"))?;
    let den: BigInt = den_s
        .parse()
        .map_err(|_| format!("malformed rational denominator {den_s:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in rational {s:?}"));
    }
    Ok(BigRational::new(num, den))
}

/// Exact rational gcd: `gcd(a/b, c/d) = gcd(ad, cb)/(bd)`.
///
/// Used to pick a single base frequency generating a set of rational
/// frequencies as an integer lattice.
pub fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    use num_integer::Integer;
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    BigRational::new(num, a.denom() * b.denom())
}
