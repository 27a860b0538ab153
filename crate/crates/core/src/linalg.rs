//! Dense complex linear algebra at desk scale: Gaussian elimination,
//! eigenvalues, and the matrix exponential.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular matrix in linear solve")]
    Singular,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,
}

pub type CMatrix = Vec<Vec<Complex64>>;

pub fn identity(n: usize) -> CMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Complex64::ONE } else { Complex64::ZERO })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    let mut out = vec![vec![Complex64::ZERO; m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate().take(inner) {
            let aik = a[i][k];
            if aik == Complex64::ZERO {
                continue;
            }
            for j in 0..m {
                out[i][j] += aik * bk[j];
            }
        }
    }
    out
}

pub fn mat_vec(a: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn mat_sub(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter()
        .flat_map(|row| row.iter().map(|z| z.norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.len();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch(b.len(), n));
    }
    let mut m: Vec<Vec<Complex64>> = a.iter().map(|row| row.clone()).collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (pivot, pnorm) = (col..n)
            .map(|r| (r, m[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pnorm < 1e-300 {
            return Err(LinalgError::Singular);
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == Complex64::ZERO {
                continue;
            }
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::ZERO; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in row + 1..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Inverse through `n` solves against the identity columns.
pub fn inverse(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![Complex64::ZERO; n];
        e[j] = Complex64::ONE;
        cols.push(solve(a, &e)?);
    }
    let mut out = vec![vec![Complex64::ZERO; n]; n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            out[i][j] = col[i];
        }
    }
    Ok(out)
}

pub fn det(a: &CMatrix) -> Complex64 {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut sign = Complex64::ONE;
    let mut prod = Complex64::ONE;
    for col in 0..n {
        let (pivot, pnorm) = (col..n)
            .map(|r| (r, m[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pnorm == 0.0 {
            return Complex64::ZERO;
        }
        if pivot != col {
            m.swap(col, pivot);
            sign = -sign;
        }
        prod *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    sign * prod
}

/// Eigenvalues of a real matrix via the Schur form.
pub fn eigenvalues_real(a: &[Vec<f64>]) -> Vec<Complex64> {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    m.complex_eigenvalues().iter().copied().collect()
}

/// Eigenvalues of a complex matrix.
///
/// Real inputs go straight to the Schur form. Genuinely complex inputs use
/// the real embedding `[[X, -Y], [Y, X]]`, whose spectrum is the union of the
/// spectra of `A` and of `conj(A)`; membership is resolved by comparing the
/// characteristic determinant at each candidate against its conjugate.
pub fn eigenvalues(a: &CMatrix) -> Vec<Complex64> {
    let n = a.len();
    if n == 0 {
        return vec![];
    }
    let imag_norm: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|z| z.im.abs()))
        .fold(0.0, f64::max);
    let scale: f64 = frobenius_norm(a).max(1e-300);
    if imag_norm <= 1e-14 * scale {
        let re: Vec<Vec<f64>> = a
            .iter()
            .map(|row| row.iter().map(|z| z.re).collect())
            .collect();
        return eigenvalues_real(&re);
    }
    let mut emb = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            emb[i][j] = a[i][j].re;
            emb[i][j + n] = -a[i][j].im;
            emb[i + n][j] = a[i][j].im;
            emb[i + n][j + n] = a[i][j].re;
        }
    }
    let mut candidates = eigenvalues_real(&emb);
    // order deterministically, then greedily keep the n values that satisfy
    // det(A - lambda I) ~ 0 better than their conjugates
    candidates.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let char_mag = |lam: Complex64| -> f64 {
        let mut shifted = a.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] -= lam;
        }
        det(&shifted).norm()
    };
    let mut out = Vec::with_capacity(n);
    let mut used = vec![false; 2 * n];
    // pair each candidate with its conjugate partner; one of the two belongs
    // to A
    for i in 0..2 * n {
        if used[i] || out.len() == n {
            continue;
        }
        used[i] = true;
        let lam = candidates[i];
        let mut partner: Option<usize> = None;
        let mut best = f64::INFINITY;
        for (j, cand) in candidates.iter().enumerate() {
            if used[j] {
                continue;
            }
            let dist = (cand - lam.conj()).norm();
            if dist < best {
                best = dist;
                partner = Some(j);
            }
        }
        if lam.im.abs() < 1e-12 {
            // self-conjugate candidate
            out.push(lam);
            continue;
        }
        match partner {
            Some(j) if best < 1e-6 * scale.max(1.0) => {
                used[j] = true;
                let other = candidates[j];
                if char_mag(lam) <= char_mag(other) {
                    out.push(lam);
                } else {
                    out.push(other);
                }
            }
            _ => out.push(lam),
        }
    }
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    out
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.len();
    let norm = frobenius_norm(a);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 2f64.powi(s as i32);
    let scaled: CMatrix = a
        .iter()
        .map(|row| row.iter().map(|z| z / scale).collect())
        .collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=24 {
        term = mat_mul(&term, &scaled);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = mat_mul(&result, &result);
    }
    result
}
