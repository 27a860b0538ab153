//! System-definition files and result serialization.
//!
//! The on-disk format is JSON with rational coefficient strings; parsing is
//! strict (unknown keys rejected, every diagnostic names the offending
//! field), and serialization is canonical so identical inputs produce
//! byte-identical outputs.

use crate::autonomous::DiagonalLinearPart;
use crate::floquet::MatrixFourierSeries;
use crate::gsp::CriticalManifoldChart;
use crate::qp::{FrequencyBasis, QpPoly, QpVector};
use crate::rg::{PerturbedSystem, RgResult};
use crate::scalar::{parse_float_or_rational, parse_rational, C64, CRat, Scalar};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum IoError {
    #[error("i/o error: {0}")]
    File(#[from] std::io::Error),
    #[error("json parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid field {path}: {message}")]
    Invalid { path: String, message: String },
    #[error(transparent)]
    Algebra(#[from] crate::qp::QpError),
    #[error(transparent)]
    Rg(#[from] crate::rg::RgError),
    #[error(transparent)]
    Floquet(#[from] crate::floquet::FloquetError),
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    /// 1-based component index
    pub component: usize,
    pub coeff_re: String,
    pub coeff_im: String,
    pub alpha: Vec<u32>,
    pub k: Vec<i64>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolyTermJson {
    pub coeff: String,
    pub alpha: Vec<u32>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RationalFnJson {
    pub num: Vec<PolyTermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<PolyTermJson>>,
}

fn default_scalar_mode() -> String {
    "exact".to_string()
}

/// Raw on-disk schema shared by all modes.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemFileJson {
    pub mode: String,
    pub n: usize,
    #[serde(default = "default_scalar_mode")]
    pub scalar_mode: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base_frequencies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_nu: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub orders: BTreeMap<String, Vec<TermJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast: Option<Vec<RationalFnJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slow_orders: Option<BTreeMap<String, Vec<RationalFnJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<Vec<RationalFnJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_seed: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_hint: Option<f64>,
}

/// Canonical JSON rendering: pretty, two-space indent, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, IoError> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarMode {
    Exact,
    Float,
}

/// A perturbation series in either coefficient mode.
#[derive(Clone, Debug)]
pub enum AnySystem {
    Exact(PerturbedSystem<CRat>),
    Float(PerturbedSystem<C64>),
}

#[derive(Clone, Debug)]
pub enum AnyLinear {
    Exact(MatrixFourierSeries<CRat>),
    Float(MatrixFourierSeries<C64>),
}

/// Parsed and validated system definition.
pub enum LoadedSystem {
    Periodic {
        sys: AnySystem,
    },
    Autonomous {
        linear_part: DiagonalLinearPart,
        sys: AnySystem,
    },
    Linear {
        sys: AnyLinear,
    },
    CriticalManifold {
        chart: CriticalManifoldChart,
    },
    Phase {
        dynamics: PhaseSystem,
    },
}

/// Callable bundle for phase-mode files.
pub struct PhaseSystem {
    pub field: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    pub jacobian: Box<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>,
    pub forcing: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    pub cycle_seed: Vec<f64>,
    pub period_hint: f64,
}

/// Real rational function `num/den` of several variables, built from exact
/// polynomial data and evaluated in double precision.
#[derive(Clone, Debug)]
pub struct RationalFn {
    num: QpPoly<C64>,
    den: Option<QpPoly<C64>>,
}

impl RationalFn {
    pub fn from_json(j: &RationalFnJson, nvars: usize, path: &str) -> Result<Self, IoError> {
        let parse_poly = |terms: &[PolyTermJson], sub: &str| -> Result<QpPoly<C64>, IoError> {
            let mut parsed = Vec::with_capacity(terms.len());
            for (i, t) in terms.iter().enumerate() {
                if t.alpha.len() != nvars {
                    return Err(invalid(
                        format!("{path}.{sub}[{i}].alpha"),
                        format!("length {} does not match arity {nvars}", t.alpha.len()),
                    ));
                }
                let c = parse_float_or_rational(&t.coeff)
                    .map_err(|e| invalid(format!("{path}.{sub}[{i}].coeff"), e))?;
                parsed.push((C64(Complex64::new(c, 0.0)), t.alpha.clone(), vec![]));
            }
            Ok(QpPoly::from_terms(nvars, FrequencyBasis::empty(), parsed)?)
        };
        let num = parse_poly(&j.num, "num")?;
        let den = match &j.den {
            Some(d) => {
                let p = parse_poly(d, "den")?;
                if p.is_zero() {
                    return Err(invalid(format!("{path}.den"), "denominator is identically zero"));
                }
                Some(p)
            }
            None => None,
        };
        Ok(RationalFn { num, den })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let xc: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let n = self.num.eval(0.0, &xc).re;
        match &self.den {
            Some(d) => n / d.eval(0.0, &xc).re,
            None => n,
        }
    }

    /// Partial derivative by the quotient rule, exact at the polynomial
    /// level.
    pub fn partial(&self, j: usize) -> RationalFn {
        let dn = self.num.diff_y(j).expect("variable in range");
        match &self.den {
            None => RationalFn {
                num: dn,
                den: None,
            },
            Some(d) => {
                let dd = d.diff_y(j).expect("variable in range");
                let num = dn
                    .mul(d)
                    .and_then(|a| self.num.mul(&dd).and_then(|b| a.sub(&b)))
                    .expect("compatible polynomials");
                let den = d.mul(d).expect("compatible polynomials");
                RationalFn {
                    num,
                    den: Some(den),
                }
            }
        }
    }
}

/// Vector of rational functions as a boxed callable.
fn vector_fn(fns: Arc<Vec<RationalFn>>) -> Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> {
    Box::new(move |x: &[f64]| fns.iter().map(|f| f.eval(x)).collect())
}

fn jacobian_fn(
    fns: &[RationalFn],
    nvars: usize,
) -> Box<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync> {
    let partials: Arc<Vec<Vec<RationalFn>>> = Arc::new(
        fns.iter()
            .map(|f| (0..nvars).map(|j| f.partial(j)).collect())
            .collect(),
    );
    Box::new(move |x: &[f64]| {
        partials
            .iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect()
    })
}

fn parse_frequencies(values: &[String], path: &str) -> Result<Vec<BigRational>, IoError> {
    values
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = parse_rational(s).map_err(|e| invalid(format!("{path}[{i}]"), e))?;
            if r.is_zero() {
                return Err(invalid(format!("{path}[{i}]"), "frequency must be nonzero"));
            }
            Ok(r)
        })
        .collect()
}

fn build_system<S: Scalar>(raw: &SystemFileJson, basis: &FrequencyBasis) -> Result<PerturbedSystem<S>, IoError> {
    let n = raw.n;
    let d = basis.dim();
    let mut sys = PerturbedSystem::new(n, basis.clone());
    for (key, terms) in &raw.orders {
        let p: usize = key
            .parse()
            .map_err(|_| invalid(format!("orders.{key}"), "order keys must be positive integers"))?;
        if p == 0 {
            return Err(invalid(format!("orders.{key}"), "orders start at 1"));
        }
        let mut comps: Vec<Vec<(S, Vec<u32>, Vec<i64>)>> = vec![Vec::new(); n];
        for (i, t) in terms.iter().enumerate() {
            let path = format!("orders.{key}[{i}]");
            if t.component == 0 || t.component > n {
                return Err(invalid(
                    format!("{path}.component"),
                    format!("component must be in 1..={n}"),
                ));
            }
            if t.alpha.len() != n {
                return Err(invalid(
                    format!("{path}.alpha"),
                    format!("length {} does not match n = {n}", t.alpha.len()),
                ));
            }
            if t.k.len() != d {
                return Err(invalid(
                    format!("{path}.k"),
                    format!("length {} does not match basis dimension {d}", t.k.len()),
                ));
            }
            let c = S::from_part_strings(&t.coeff_re, &t.coeff_im)
                .map_err(|e| invalid(format!("{path}.coeff_re"), e))?;
            comps[t.component - 1].push((c, t.alpha.clone(), t.k.clone()));
        }
        let field = QpVector::new(
            comps
                .into_iter()
                .map(|terms| QpPoly::from_terms(n, basis.clone(), terms))
                .collect::<Result<Vec<_>, _>>()?,
        )?;
        sys.set_order(p, field)?;
    }
    Ok(sys)
}

fn build_linear<S: Scalar>(
    raw: &SystemFileJson,
    basis: &FrequencyBasis,
) -> Result<MatrixFourierSeries<S>, IoError> {
    let n = raw.n;
    let mut sys = MatrixFourierSeries::new(n, basis.clone())?;
    for (key, terms) in &raw.orders {
        let p: usize = key
            .parse()
            .map_err(|_| invalid(format!("orders.{key}"), "order keys must be positive integers"))?;
        let mut entries: Vec<Vec<Vec<(S, Vec<u32>, Vec<i64>)>>> =
            vec![vec![Vec::new(); n]; n];
        for (i, t) in terms.iter().enumerate() {
            let path = format!("orders.{key}[{i}]");
            if t.component == 0 || t.component > n {
                return Err(invalid(format!("{path}.component"), format!("component must be in 1..={n}")));
            }
            if t.alpha.len() != n {
                return Err(invalid(
                    format!("{path}.alpha"),
                    format!("length {} does not match n = {n}", t.alpha.len()),
                ));
            }
            let ones: Vec<usize> = t
                .alpha
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, _)| j)
                .collect();
            if ones.len() != 1 || t.alpha[ones[0]] != 1 {
                return Err(invalid(
                    format!("{path}.alpha"),
                    "linear mode requires exactly one variable of degree one per term",
                ));
            }
            let col = ones[0];
            if t.k.len() != 1 {
                return Err(invalid(format!("{path}.k"), "linear mode uses a single base frequency"));
            }
            let c = S::from_part_strings(&t.coeff_re, &t.coeff_im)
                .map_err(|e| invalid(format!("{path}.coeff_re"), e))?;
            entries[t.component - 1][col].push((c, vec![], t.k.clone()));
        }
        let matrix = entries
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|terms| QpPoly::from_terms(0, basis.clone(), terms))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        sys.set_order(p, matrix)?;
    }
    Ok(sys)
}

fn build_rational_vector(
    raw: Option<&Vec<RationalFnJson>>,
    nvars: usize,
    expect_len: usize,
    path: &str,
) -> Result<Vec<RationalFn>, IoError> {
    let list = raw.ok_or_else(|| invalid(path, "missing required block"))?;
    if list.len() != expect_len {
        return Err(invalid(
            path,
            format!("expected {expect_len} components, found {}", list.len()),
        ));
    }
    list.iter()
        .enumerate()
        .map(|(i, f)| RationalFn::from_json(f, nvars, &format!("{path}[{i}]")))
        .collect()
}

/// Parse and validate a system file.
pub fn parse_system_file(path: &std::path::Path) -> Result<(SystemFileJson, LoadedSystem), IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_system_str(&text)
}

pub fn parse_system_str(text: &str) -> Result<(SystemFileJson, LoadedSystem), IoError> {
    let raw: SystemFileJson = serde_json::from_str(text)?;
    let loaded = load_system(&raw)?;
    Ok((raw, loaded))
}

pub fn load_system(raw: &SystemFileJson) -> Result<LoadedSystem, IoError> {
    let mode = match raw.scalar_mode.as_str() {
        "exact" => ScalarMode::Exact,
        "float" => ScalarMode::Float,
        other => {
            return Err(invalid(
                "scalar_mode",
                format!("unknown mode {other:?}, expected \"exact\" or \"float\""),
            ))
        }
    };
    match raw.mode.as_str() {
        "periodic" | "autonomous" => {
            let freqs = parse_frequencies(&raw.base_frequencies, "base_frequencies")?;
            let basis = if freqs.is_empty() {
                FrequencyBasis::empty()
            } else {
                FrequencyBasis::new(freqs)?
            };
            let sys = match mode {
                ScalarMode::Exact => AnySystem::Exact(build_system::<CRat>(raw, &basis)?),
                ScalarMode::Float => AnySystem::Float(build_system::<C64>(raw, &basis)?),
            };
            if raw.mode == "periodic" {
                if raw.f_nu.is_some() {
                    return Err(invalid("f_nu", "only autonomous mode carries a linear part"));
                }
                Ok(LoadedSystem::Periodic { sys })
            } else {
                let nu_strs = raw
                    .f_nu
                    .as_ref()
                    .ok_or_else(|| invalid("f_nu", "autonomous mode requires rotation numbers"))?;
                if nu_strs.len() != raw.n {
                    return Err(invalid(
                        "f_nu",
                        format!("expected {} rotation numbers, found {}", raw.n, nu_strs.len()),
                    ));
                }
                let nu = nu_strs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| parse_rational(s).map_err(|e| invalid(format!("f_nu[{i}]"), e)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(LoadedSystem::Autonomous {
                    linear_part: DiagonalLinearPart::new(nu),
                    sys,
                })
            }
        }
        "linear" => {
            let freqs = parse_frequencies(&raw.base_frequencies, "base_frequencies")?;
            if freqs.len() != 1 {
                return Err(invalid(
                    "base_frequencies",
                    "linear mode requires exactly one base frequency",
                ));
            }
            let basis = FrequencyBasis::new(freqs)?;
            let sys = match mode {
                ScalarMode::Exact => AnyLinear::Exact(build_linear::<CRat>(raw, &basis)?),
                ScalarMode::Float => AnyLinear::Float(build_linear::<C64>(raw, &basis)?),
            };
            Ok(LoadedSystem::Linear { sys })
        }
        "critical_manifold" => {
            let n = raw.n;
            let k = raw
                .chart_dim
                .ok_or_else(|| invalid("chart_dim", "critical_manifold mode requires chart_dim"))?;
            if k == 0 || k >= n {
                return Err(invalid("chart_dim", format!("chart_dim must be in 1..{n}")));
            }
            let fast = Arc::new(build_rational_vector(raw.fast.as_ref(), n, n, "fast")?);
            let slow = raw
                .slow_orders
                .as_ref()
                .ok_or_else(|| invalid("slow_orders", "missing required block"))?;
            let slow1 = Arc::new(build_rational_vector(slow.get("1"), n, n, "slow_orders.1")?);
            let slow2 = match slow.get("2") {
                Some(_) => Some(Arc::new(build_rational_vector(
                    slow.get("2"),
                    n,
                    n,
                    "slow_orders.2",
                )?)),
                None => None,
            };
            for key in slow.keys() {
                if key != "1" && key != "2" {
                    return Err(invalid(
                        format!("slow_orders.{key}"),
                        "the manifold reduction supports orders 1 and 2 only",
                    ));
                }
            }
            let chart_fns = Arc::new(build_rational_vector(raw.chart.as_ref(), k, n, "chart")?);
            let chart = CriticalManifoldChart {
                ambient_dim: n,
                chart_dim: k,
                chart: vector_fn(chart_fns.clone()),
                chart_jacobian: Some(jacobian_fn(&chart_fns, k)),
                fast: vector_fn(fast.clone()),
                fast_jacobian: jacobian_fn(&fast, n),
                slow1: vector_fn(slow1.clone()),
                slow1_jacobian: Some(jacobian_fn(&slow1, n)),
                slow2: slow2.map(vector_fn),
                gap: raw.gap.unwrap_or(0.1),
            };
            Ok(LoadedSystem::CriticalManifold { chart })
        }
        "phase" => {
            let n = raw.n;
            let fast = Arc::new(build_rational_vector(raw.fast.as_ref(), n, n, "fast")?);
            let slow = raw
                .slow_orders
                .as_ref()
                .ok_or_else(|| invalid("slow_orders", "missing required block"))?;
            let slow1 = Arc::new(build_rational_vector(slow.get("1"), n, n, "slow_orders.1")?);
            let seed = raw
                .cycle_seed
                .clone()
                .ok_or_else(|| invalid("cycle_seed", "phase mode requires a cycle seed"))?;
            if seed.len() != n {
                return Err(invalid(
                    "cycle_seed",
                    format!("expected {n} coordinates, found {}", seed.len()),
                ));
            }
            let period = raw
                .period_hint
                .ok_or_else(|| invalid("period_hint", "phase mode requires a period guess"))?;
            Ok(LoadedSystem::Phase {
                dynamics: PhaseSystem {
                    field: vector_fn(fast.clone()),
                    jacobian: jacobian_fn(&fast, n),
                    forcing: vector_fn(slow1),
                    cycle_seed: seed,
                    period_hint: period,
                },
            })
        }
        other => Err(invalid("mode", format!("unknown mode {other:?}"))),
    }
}

/// Export a perturbation series back to the on-disk schema.
pub fn system_to_json<S: Scalar>(
    mode: &str,
    sys: &PerturbedSystem<S>,
    f_nu: Option<&DiagonalLinearPart>,
) -> SystemFileJson {
    let mut orders = BTreeMap::new();
    for (p, field) in sys.orders() {
        let mut terms = Vec::new();
        for (i, poly) in field.components().iter().enumerate() {
            for (key, c) in poly.terms() {
                let (coeff_re, coeff_im) = c.part_strings();
                terms.push(TermJson {
                    component: i + 1,
                    coeff_re,
                    coeff_im,
                    alpha: key.alpha.clone(),
                    k: key.k.clone(),
                });
            }
        }
        orders.insert(p.to_string(), terms);
    }
    SystemFileJson {
        mode: mode.to_string(),
        n: sys.n(),
        scalar_mode: if S::exact() { "exact" } else { "float" }.to_string(),
        base_frequencies: sys.basis().values().iter().map(|w| w.to_string()).collect(),
        f_nu: f_nu.map(|f| f.nu().iter().map(|v| v.to_string()).collect()),
        orders,
        chart_dim: None,
        gap: None,
        fast: None,
        slow_orders: None,
        chart: None,
        cycle_seed: None,
        period_hint: None,
    }
}

// ---------------------------------------------------------------------------
// result serialization

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ResultTermJson {
    pub coeff_re: String,
    pub coeff_im: String,
    pub alpha: Vec<u32>,
    pub k: Vec<i64>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct RgResultJson {
    pub m: usize,
    pub n: usize,
    pub scalar_mode: String,
    pub base_frequencies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_nu: Option<Vec<String>>,
    /// coordinate frame of the serialized fields: absent for the system's
    /// own frame, "real_plane" after conjugate-pair realification
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
    /// `r[i]` holds the order-(i+1) averaged field, one term list per
    /// component
    pub r: Vec<Vec<Vec<ResultTermJson>>>,
    pub u: Vec<Vec<Vec<ResultTermJson>>>,
    pub gauge: Vec<Vec<Vec<ResultTermJson>>>,
}

pub fn poly_terms_json<S: Scalar>(p: &QpPoly<S>) -> Vec<ResultTermJson> {
    p.terms()
        .map(|(key, c)| {
            let (coeff_re, coeff_im) = c.part_strings();
            ResultTermJson {
                coeff_re,
                coeff_im,
                alpha: key.alpha.clone(),
                k: key.k.clone(),
            }
        })
        .collect()
}

fn vector_terms_json<S: Scalar>(v: &QpVector<S>) -> Vec<Vec<ResultTermJson>> {
    v.components().iter().map(poly_terms_json).collect()
}

pub fn rg_result_json<S: Scalar>(
    res: &RgResult<S>,
    f_nu: Option<&DiagonalLinearPart>,
) -> RgResultJson {
    RgResultJson {
        m: res.order(),
        n: res.n(),
        scalar_mode: if S::exact() { "exact" } else { "float" }.to_string(),
        base_frequencies: res
            .basis()
            .values()
            .iter()
            .map(|w| w.to_string())
            .collect(),
        f_nu: f_nu.map(|f| f.nu().iter().map(|v| v.to_string()).collect()),
        frame: None,
        r: res.rg_terms().iter().map(vector_terms_json).collect(),
        u: res.transform_terms().iter().map(vector_terms_json).collect(),
        gauge: res.gauge().iter().map(vector_terms_json).collect(),
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct LinearEntryJson {
    pub row: usize,
    pub col: usize,
    pub coeff_re: String,
    pub coeff_im: String,
    pub k: Vec<i64>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct LinearRgResultJson {
    pub m: usize,
    pub n: usize,
    pub scalar_mode: String,
    pub base_frequencies: Vec<String>,
    pub r: Vec<Vec<LinearEntryJson>>,
    pub u: Vec<Vec<LinearEntryJson>>,
}

pub fn linear_result_json<S: Scalar>(res: &crate::floquet::LinearRgResult<S>) -> LinearRgResultJson {
    let n = res.n();
    let matrix_entries = |m: &Vec<Vec<QpPoly<S>>>| -> Vec<LinearEntryJson> {
        let mut out = Vec::new();
        for (i, row) in m.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                for (key, c) in p.terms() {
                    let (coeff_re, coeff_im) = c.part_strings();
                    out.push(LinearEntryJson {
                        row: i + 1,
                        col: j + 1,
                        coeff_re,
                        coeff_im,
                        k: key.k.clone(),
                    });
                }
            }
        }
        out
    };
    LinearRgResultJson {
        m: res.order(),
        n,
        scalar_mode: if S::exact() { "exact" } else { "float" }.to_string(),
        base_frequencies: res
            .system()
            .basis()
            .values()
            .iter()
            .map(|w| w.to_string())
            .collect(),
        r: (1..=res.order()).map(|i| matrix_entries(res.r_term(i))).collect(),
        u: (1..=res.order()).map(|i| matrix_entries(res.u_term(i))).collect(),
    }
}
