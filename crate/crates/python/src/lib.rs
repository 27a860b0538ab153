//! Python bindings: exact quasi-periodic polynomials, perturbation systems,
//! derived reductions, and the linear/Floquet pipeline.
//!
//! Coefficients cross the boundary as rational strings (`"p/q"`) so the
//! exact arithmetic stays exact; numeric evaluation returns Python complex.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rgflow::autonomous::{
    autonomize, equivariance_violations, polar_reduce, DiagonalLinearPart,
};
use rgflow::dynamics::{find_fixed_points, radial_orbits, seed_grid};
use rgflow::floquet;
use rgflow::io;
use rgflow::qp;
use rgflow::render::render_graded_equations;
use rgflow::rg;
use rgflow::scalar::{parse_rational, CRat, Scalar};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_basis(base_frequencies: Vec<String>) -> PyResult<qp::FrequencyBasis> {
    if base_frequencies.is_empty() {
        return Ok(qp::FrequencyBasis::empty());
    }
    let values = base_frequencies
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(value_err)?;
    qp::FrequencyBasis::new(values).map_err(value_err)
}

fn parse_nu(nu: Vec<String>) -> PyResult<DiagonalLinearPart> {
    let values = nu
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(value_err)?;
    Ok(DiagonalLinearPart::new(values))
}

type PyTerm = (String, String, Vec<u32>, Vec<i64>);

fn poly_terms(p: &qp::QpPoly<CRat>) -> Vec<PyTerm> {
    p.terms()
        .map(|(key, c)| {
            let (re, im) = c.part_strings();
            (re, im, key.alpha.clone(), key.k.clone())
        })
        .collect()
}

fn build_poly(
    n: usize,
    basis: &qp::FrequencyBasis,
    terms: Vec<PyTerm>,
) -> PyResult<qp::QpPoly<CRat>> {
    let parsed = terms
        .into_iter()
        .map(|(re, im, alpha, k)| {
            CRat::from_part_strings(&re, &im)
                .map(|c| (c, alpha, k))
                .map_err(value_err)
        })
        .collect::<Result<Vec<_>, _>>()?;
    qp::QpPoly::from_terms(n, basis.clone(), parsed).map_err(value_err)
}

/// Exact quasi-periodic polynomial in the default rational mode.
#[pyclass(name = "QpPoly", skip_from_py_object)]
#[derive(Clone)]
struct PyQpPoly {
    inner: qp::QpPoly<CRat>,
}

#[pymethods]
impl PyQpPoly {
    /// Build from terms `(coeff_re, coeff_im, alpha, k)` with rational
    /// coefficient strings.
    #[new]
    #[pyo3(signature = (n, base_frequencies, terms))]
    fn new(n: usize, base_frequencies: Vec<String>, terms: Vec<PyTerm>) -> PyResult<Self> {
        let basis = parse_basis(base_frequencies)?;
        Ok(PyQpPoly {
            inner: build_poly(n, &basis, terms)?,
        })
    }

    fn add(&self, other: &PyQpPoly) -> PyResult<PyQpPoly> {
        Ok(PyQpPoly {
            inner: self.inner.add(&other.inner).map_err(value_err)?,
        })
    }

    fn mul(&self, other: &PyQpPoly) -> PyResult<PyQpPoly> {
        Ok(PyQpPoly {
            inner: self.inner.mul(&other.inner).map_err(value_err)?,
        })
    }

    fn diff_y(&self, j: usize) -> PyResult<PyQpPoly> {
        Ok(PyQpPoly {
            inner: self.inner.diff_y(j).map_err(value_err)?,
        })
    }

    fn average_t(&self) -> PyResult<PyQpPoly> {
        Ok(PyQpPoly {
            inner: self.inner.average_t().map_err(value_err)?,
        })
    }

    fn antiderivative_t(&self) -> PyResult<PyQpPoly> {
        Ok(PyQpPoly {
            inner: self.inner.antiderivative_t().map_err(value_err)?,
        })
    }

    fn eval(&self, t: f64, y: Vec<Complex64>) -> Complex64 {
        self.inner.eval(t, &y)
    }

    fn terms(&self) -> Vec<PyTerm> {
        poly_terms(&self.inner)
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn __repr__(&self) -> String {
        rgflow::render::render_poly(&self.inner)
    }
}

/// Perturbation series with exact coefficients.
#[pyclass(name = "PerturbedSystem", skip_from_py_object)]
#[derive(Clone)]
struct PyPerturbedSystem {
    inner: rg::PerturbedSystem<CRat>,
}

#[pymethods]
impl PyPerturbedSystem {
    #[new]
    fn new(n: usize, base_frequencies: Vec<String>) -> PyResult<Self> {
        Ok(PyPerturbedSystem {
            inner: rg::PerturbedSystem::new(n, parse_basis(base_frequencies)?),
        })
    }

    /// Set the order-`p` field from `(component, coeff_re, coeff_im, alpha, k)`
    /// tuples with 1-based components.
    fn set_order(&mut self, p: usize, terms: Vec<(usize, String, String, Vec<u32>, Vec<i64>)>) -> PyResult<()> {
        let n = self.inner.n();
        let mut per_comp: Vec<Vec<PyTerm>> = vec![Vec::new(); n];
        for (component, re, im, alpha, k) in terms {
            if component == 0 || component > n {
                return Err(value_err(format!("component must be in 1..={n}")));
            }
            per_comp[component - 1].push((re, im, alpha, k));
        }
        let basis = self.inner.basis().clone();
        let comps = per_comp
            .into_iter()
            .map(|t| build_poly(n, &basis, t))
            .collect::<Result<Vec<_>, _>>()?;
        self.inner
            .set_order(p, qp::QpVector::new(comps).map_err(value_err)?)
            .map_err(value_err)
    }

    fn derive(&self, order: usize) -> PyResult<PyRgResult> {
        Ok(PyRgResult {
            inner: rg::derive(&self.inner, order).map_err(value_err)?,
            linear_part: None,
        })
    }

    fn n(&self) -> usize {
        self.inner.n()
    }
}

/// Derived reduction: averaged fields and the coordinate change.
#[pyclass(name = "RgResult")]
struct PyRgResult {
    inner: rg::RgResult<CRat>,
    linear_part: Option<DiagonalLinearPart>,
}

#[pymethods]
impl PyRgResult {
    fn order(&self) -> usize {
        self.inner.order()
    }

    /// Terms of the order-`i` averaged field, one list per component.
    fn rg_terms(&self, i: usize) -> PyResult<Vec<Vec<PyTerm>>> {
        let v = self.inner.rg_term(i).map_err(value_err)?;
        Ok(v.components().iter().map(poly_terms).collect())
    }

    /// Terms of the order-`i` transformation grade.
    fn transform_terms(&self, i: usize) -> PyResult<Vec<Vec<PyTerm>>> {
        let v = self.inner.transform_term(i).map_err(value_err)?;
        Ok(v.components().iter().map(poly_terms).collect())
    }

    /// Evaluate the averaged right-hand side at fixed eps.
    fn eval_field(&self, eps: f64, y: Vec<Complex64>) -> Vec<Complex64> {
        self.inner.eval_rg_field(eps, &y)
    }

    /// Evaluate the near-identity coordinate change.
    fn eval_transform(&self, eps: f64, t: f64, y: Vec<Complex64>) -> Vec<Complex64> {
        self.inner.eval_transform(eps, t, &y)
    }

    /// True when the conjugacy residual vanishes identically through the
    /// derivation order.
    fn residual_vanishes(&self) -> PyResult<bool> {
        let resid = rg::conjugacy_residual(&self.inner, self.inner.order()).map_err(value_err)?;
        Ok(resid.iter().all(|v| v.is_zero()))
    }

    /// Number of terms violating the rotational resonance condition.
    fn equivariance_violations(&self) -> PyResult<usize> {
        match &self.linear_part {
            Some(f) => Ok(equivariance_violations(f, &self.inner).len()),
            None => Err(value_err("result does not carry a diagonal linear part")),
        }
    }

    /// Radial polynomial coefficients of the polar reduction per order.
    fn polar_radial(&self) -> PyResult<Vec<Vec<String>>> {
        let f = self
            .linear_part
            .as_ref()
            .ok_or_else(|| value_err("result does not carry a diagonal linear part"))?;
        let polar = polar_reduce(f, &self.inner).map_err(value_err)?;
        Ok(polar
            .radial
            .iter()
            .map(|coeffs| coeffs.iter().map(|c| c.to_string()).collect())
            .collect())
    }

    /// Positive radial equilibria `(radius, stable)` at fixed eps.
    fn radial_orbits(&self, eps: f64) -> PyResult<Vec<(f64, bool)>> {
        let f = self
            .linear_part
            .as_ref()
            .ok_or_else(|| value_err("result does not carry a diagonal linear part"))?;
        let polar = polar_reduce(f, &self.inner).map_err(value_err)?;
        Ok(radial_orbits(&polar, eps)
            .into_iter()
            .map(|o| (o.radius, o.stable))
            .collect())
    }

    /// Fixed points `(point, eigenvalues, classification)` from a real seed
    /// grid.
    fn fixed_points(
        &self,
        eps: f64,
        lo: f64,
        hi: f64,
        count: usize,
    ) -> PyResult<Vec<(Vec<Complex64>, Vec<Complex64>, String)>> {
        let seeds = seed_grid(self.inner.n(), lo, hi, count);
        let fps = find_fixed_points(&self.inner, eps, &seeds).map_err(value_err)?;
        Ok(fps
            .into_iter()
            .map(|fp| {
                let class = format!("{:?}", fp.stability).to_lowercase();
                (fp.point, fp.eigenvalues, class)
            })
            .collect())
    }

    fn render(&self) -> String {
        render_graded_equations("y", self.inner.rg_terms())
    }

    fn to_json(&self) -> PyResult<String> {
        io::canonical_json(&io::rg_result_json(&self.inner, self.linear_part.as_ref()))
            .map_err(value_err)
    }
}

/// Rotate out a diagonal linear part `dx/dt = i diag(nu) x + eps g` and
/// return the equivalent standard-form system.
#[pyfunction]
fn rotate_out(nu: Vec<String>, sys: &PyPerturbedSystem) -> PyResult<PyPerturbedSystem> {
    let f = parse_nu(nu)?;
    Ok(PyPerturbedSystem {
        inner: autonomize(&f, &sys.inner).map_err(value_err)?,
    })
}

/// Normal form of an autonomous system with diagonal rotation numbers:
/// derive the rotated system and keep the rotation data for equivariance
/// checks and polar reduction.
#[pyfunction]
fn normal_form(nu: Vec<String>, sys: &PyPerturbedSystem, order: usize) -> PyResult<PyRgResult> {
    let f = parse_nu(nu)?;
    let rotated = autonomize(&f, &sys.inner).map_err(value_err)?;
    Ok(PyRgResult {
        inner: rg::derive(&rotated, order).map_err(value_err)?,
        linear_part: Some(f),
    })
}

/// The built-in forced-oscillator sample in conjugate coordinates.
#[pyfunction]
fn forced_oscillator(omega: String, k: String) -> PyResult<(Vec<String>, PyPerturbedSystem)> {
    let omega = parse_rational(&omega).map_err(value_err)?;
    let k = parse_rational(&k).map_err(value_err)?;
    let (f, sys) = rgflow::presets::forced_oscillator(omega, k);
    Ok((
        f.nu().iter().map(|v| v.to_string()).collect(),
        PyPerturbedSystem { inner: sys },
    ))
}

/// Linear periodic system `dx/dt = eps A(t, eps) x` with exact Fourier
/// entries.
#[pyclass(name = "LinearSystem", skip_from_py_object)]
#[derive(Clone)]
struct PyLinearSystem {
    inner: floquet::MatrixFourierSeries<CRat>,
}

#[pymethods]
impl PyLinearSystem {
    #[new]
    fn new(n: usize, base_frequency: String) -> PyResult<Self> {
        let basis = parse_basis(vec![base_frequency])?;
        Ok(PyLinearSystem {
            inner: floquet::MatrixFourierSeries::new(n, basis).map_err(value_err)?,
        })
    }

    /// Set the order-`p` matrix from `(row, col, coeff_re, coeff_im, k)`
    /// entries with 1-based indices.
    fn set_order(&mut self, p: usize, entries: Vec<(usize, usize, String, String, i64)>) -> PyResult<()> {
        let n = self.inner.n();
        let basis = self.inner.basis().clone();
        let mut cells: Vec<Vec<Vec<(CRat, Vec<u32>, Vec<i64>)>>> = vec![vec![Vec::new(); n]; n];
        for (row, col, re, im, k) in entries {
            if row == 0 || row > n || col == 0 || col > n {
                return Err(value_err(format!("indices must be in 1..={n}")));
            }
            let c = CRat::from_part_strings(&re, &im).map_err(value_err)?;
            cells[row - 1][col - 1].push((c, vec![], vec![k]));
        }
        let matrix = cells
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|terms| qp::QpPoly::from_terms(0, basis.clone(), terms))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(value_err)?;
        self.inner.set_order(p, matrix).map_err(value_err)
    }

    fn reduce(&self, order: usize) -> PyResult<PyLinearRgResult> {
        Ok(PyLinearRgResult {
            inner: floquet::linear_rg(&self.inner, order).map_err(value_err)?,
        })
    }
}

#[pyclass(name = "LinearRgResult")]
struct PyLinearRgResult {
    inner: floquet::LinearRgResult<CRat>,
}

#[pymethods]
impl PyLinearRgResult {
    fn floquet_exponents(&self, eps: f64) -> Vec<Complex64> {
        self.inner.floquet_exponents(eps)
    }

    /// Frobenius defect between the truncated factorization and the
    /// numerically integrated monodromy at one eps.
    fn monodromy_defect(&self, eps: f64) -> PyResult<f64> {
        let cfg = rgflow::ode::IntegratorConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            ..Default::default()
        };
        floquet::monodromy_numeric(self.inner.system(), &self.inner, eps, &cfg)
            .map(|r| r.defect)
            .map_err(value_err)
    }

    fn to_json(&self) -> PyResult<String> {
        io::canonical_json(&io::linear_result_json(&self.inner)).map_err(value_err)
    }
}

/// Parse a system file and run the derivation, returning the result JSON.
#[pyfunction]
fn derive_file(path: String, order: usize) -> PyResult<String> {
    let (_, loaded) = io::parse_system_file(std::path::Path::new(&path)).map_err(value_err)?;
    match loaded {
        io::LoadedSystem::Periodic { sys } => match sys {
            io::AnySystem::Exact(s) => {
                let res = rg::derive(&s, order).map_err(value_err)?;
                io::canonical_json(&io::rg_result_json(&res, None)).map_err(value_err)
            }
            io::AnySystem::Float(s) => {
                let res = rg::derive(&s, order).map_err(value_err)?;
                io::canonical_json(&io::rg_result_json(&res, None)).map_err(value_err)
            }
        },
        io::LoadedSystem::Autonomous { linear_part, sys } => match sys {
            io::AnySystem::Exact(s) => {
                let rotated = autonomize(&linear_part, &s).map_err(value_err)?;
                let res = rg::derive(&rotated, order).map_err(value_err)?;
                io::canonical_json(&io::rg_result_json(&res, Some(&linear_part)))
                    .map_err(value_err)
            }
            io::AnySystem::Float(s) => {
                let rotated = autonomize(&linear_part, &s).map_err(value_err)?;
                let res = rg::derive(&rotated, order).map_err(value_err)?;
                io::canonical_json(&io::rg_result_json(&res, Some(&linear_part)))
                    .map_err(value_err)
            }
        },
        io::LoadedSystem::Linear { sys } => match sys {
            io::AnyLinear::Exact(a) => {
                let res = floquet::linear_rg(&a, order).map_err(value_err)?;
                io::canonical_json(&io::linear_result_json(&res)).map_err(value_err)
            }
            io::AnyLinear::Float(a) => {
                let res = floquet::linear_rg(&a, order).map_err(value_err)?;
                io::canonical_json(&io::linear_result_json(&res)).map_err(value_err)
            }
        },
        _ => Err(value_err(
            "derive_file covers periodic, autonomous, and linear modes",
        )),
    }
}

#[pymodule]
fn rgflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQpPoly>()?;
    m.add_class::<PyPerturbedSystem>()?;
    m.add_class::<PyRgResult>()?;
    m.add_class::<PyLinearSystem>()?;
    m.add_class::<PyLinearRgResult>()?;
    m.add_function(wrap_pyfunction!(rotate_out, m)?)?;
    m.add_function(wrap_pyfunction!(normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(forced_oscillator, m)?)?;
    m.add_function(wrap_pyfunction!(derive_file, m)?)?;
    Ok(())
}
