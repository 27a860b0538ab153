//! Human-readable rendering of polynomials and derived equations.
//!
//! Output is deterministic: terms appear in canonical order and rational
//! coefficients print in lowest terms, so rendered equations can be diffed.

use crate::qp::{QpPoly, QpVector, TermKey};
use crate::scalar::Scalar;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn render_monomial(alpha: &[u32]) -> String {
    let mut parts = Vec::new();
    for (j, &e) in alpha.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("y{}", j + 1)),
            _ => parts.push(format!("y{}^{}", j + 1, e)),
        }
    }
    parts.join("*")
}

fn render_exponential(lambda: &BigRational) -> String {
    if lambda.is_zero() {
        return String::new();
    }
    if lambda == &BigRational::one() {
        "e^(it)".to_string()
    } else if lambda == &-BigRational::one() {
        "e^(-it)".to_string()
    } else if lambda.is_integer() {
        format!("e^({lambda}it)")
    } else {
        format!("e^(({lambda})it)")
    }
}

fn render_term<S: Scalar>(p: &QpPoly<S>, key: &TermKey, coeff: &S) -> String {
    let mut parts = Vec::new();
    let c = coeff.render();
    let mono = render_monomial(&key.alpha);
    let expo = render_exponential(&p.basis().frequency_of(&key.k));
    if mono.is_empty() && expo.is_empty() {
        return c;
    }
    if c != "1" {
        if c == "-1" {
            // sign folds into the leading factor
            parts.push("-1".to_string());
        } else {
            parts.push(c);
        }
    }
    if !mono.is_empty() {
        parts.push(mono);
    }
    if !expo.is_empty() {
        parts.push(expo);
    }
    parts.join("*")
}

/// Render a polynomial as a sum of canonical terms.
pub fn render_poly<S: Scalar>(p: &QpPoly<S>) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (key, coeff)) in p.terms().enumerate() {
        let term = render_term(p, key, coeff);
        if idx == 0 {
            out.push_str(&term);
        } else if let Some(stripped) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(stripped);
        } else {
            out.push_str(" + ");
            out.push_str(&term);
        }
    }
    out
}

/// Render an epsilon-graded family of vector fields as equations
/// `dy{i}/dt = eps^1*( ... ) + eps^2*( ... )`.
pub fn render_graded_equations<S: Scalar>(name: &str, grades: &[QpVector<S>]) -> String {
    let dim = grades.first().map(|v| v.len()).unwrap_or(0);
    let mut lines = Vec::new();
    for i in 0..dim {
        let mut rhs_parts = Vec::new();
        for (order, v) in grades.iter().enumerate() {
            let p = v.component(i);
            if !p.is_zero() {
                rhs_parts.push(format!("eps^{}*( {} )", order + 1, render_poly(p)));
            }
        }
        let rhs = if rhs_parts.is_empty() {
            "0".to_string()
        } else {
            rhs_parts.join(" + ")
        };
        lines.push(format!("d{name}{}/dt = {rhs}", i + 1));
    }
    lines.join("\n")
}

/// Render real-coefficient univariate polynomials in `r` as used by the
/// polar reduction, one line per epsilon order.
pub fn render_radial(label: &str, per_order: &[Vec<BigRational>]) -> String {
    let mut lines = Vec::new();
    for (idx, coeffs) in per_order.iter().enumerate() {
        let mut parts = Vec::new();
        for (deg, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match deg {
                0 => String::new(),
                1 => "*r".to_string(),
                _ => format!("*r^{deg}"),
            };
            parts.push(format!("{c}{mono}"));
        }
        if parts.is_empty() {
            continue;
        }
        let mut rhs = String::new();
        for (i, part) in parts.iter().enumerate() {
            if i == 0 {
                rhs.push_str(part);
            } else if let Some(stripped) = part.strip_prefix('-') {
                rhs.push_str(" - ");
                rhs.push_str(stripped);
            } else {
                rhs.push_str(" + ");
                rhs.push_str(part);
            }
        }
        lines.push(format!("{label} += eps^{}*( {rhs} )", idx + 1));
    }
    if lines.is_empty() {
        format!("{label} = 0")
    } else {
        lines.join("\n")
    }
}

/// 17-significant-digit float formatting used across CSV outputs.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
