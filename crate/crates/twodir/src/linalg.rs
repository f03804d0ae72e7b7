//! Dense real eigenvalue kernel.
//!
//! Two primitives back the whole transfer-matrix machinery: the full complex
//! spectrum of a small real matrix, and a targeted eigenvector obtained by
//! rank-revealing null-space extraction from `A - lambda*I`. Extraction
//! doubles as a simplicity test: the number of singular values below the
//! threshold is the numerical nullity, and anything other than exactly one is
//! an error. The backing factorizations (real Schur, SVD) come from
//! `nalgebra`; the contract here is the residual bound, not the algorithm.

use crate::{Complex, Matrix, Vector};

/// Default relative tolerance for targeted eigenvector extraction.
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error(
        "matrix has no eigenvalue near {lambda} (smallest singular value of A - lambda*I is \
         {smallest:.3e}, threshold {threshold:.3e})"
    )]
    NotAnEigenvalue {
        lambda: f64,
        smallest: f64,
        threshold: f64,
        singular_values: Vec<f64>,
    },
    #[error("eigenvalue {lambda} is not simple: numerical eigenspace dimension is {nullity}")]
    NotSimple {
        lambda: f64,
        nullity: usize,
        singular_values: Vec<f64>,
    },
}

/// Targeted eigenvector with its extraction diagnostics.
#[derive(Debug, Clone)]
pub struct Eigenvector {
    /// Unit-norm null vector of `A - lambda*I`, sign fixed so the
    /// largest-magnitude component is positive.
    pub vector: Vector,
    pub lambda: f64,
    /// `||A v - lambda v||_2`.
    pub residual: f64,
    /// Singular values of `A - lambda*I`, descending.
    pub singular_values: Vec<f64>,
}

/// Spectrum of one matrix plus the residuals of any eigenpairs extracted
/// from it.
#[derive(Debug, Clone)]
pub struct EigenSolve {
    pub dim: usize,
    /// All `dim` eigenvalues, descending modulus then descending real part.
    pub eigenvalues: Vec<Complex>,
    /// One entry per successful [`EigenSolve::extract`] call.
    pub residuals: Vec<f64>,
}

impl EigenSolve {
    pub fn new(a: &Matrix) -> Result<Self, LinalgError> {
        Ok(EigenSolve {
            dim: a.nrows(),
            eigenvalues: eigenvalues(a)?,
            residuals: Vec::new(),
        })
    }

    /// Extract the eigenvector for `lambda`, recording its residual.
    pub fn extract(
        &mut self,
        a: &Matrix,
        lambda: f64,
        tol: f64,
    ) -> Result<Eigenvector, LinalgError> {
        let ev = eigenvector_for(a, lambda, tol)?;
        self.residuals.push(ev.residual);
        Ok(ev)
    }
}

fn check_input(a: &Matrix) -> Result<(), LinalgError> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(LinalgError::Empty);
    }
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    if a.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    Ok(())
}

/// All eigenvalues of `a`, with multiplicity, sorted by descending modulus
/// and then by descending real and imaginary parts.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex>, LinalgError> {
    check_input(a)?;
    let mut vals: Vec<Complex> = a.clone().complex_eigenvalues().iter().copied().collect();
    vals.sort_by(|x, y| {
        y.norm()
            .total_cmp(&x.norm())
            .then(y.re.total_cmp(&x.re))
            .then(y.im.total_cmp(&x.im))
    });
    Ok(vals)
}

/// Eigenvector of `a` for the eigenvalue `lambda`, by null-space extraction.
///
/// `A - lambda*I` must have numerical rank `n - 1`: exactly one singular
/// value below `tol * ||A||_2`. The returned vector `v` is unit-norm and
/// satisfies `||A v - lambda v|| <= 10 * tol * ||A||_2`.
pub fn eigenvector_for(a: &Matrix, lambda: f64, tol: f64) -> Result<Eigenvector, LinalgError> {
    assert!(tol > 0.0, "tolerance must be positive");
    check_input(a)?;
    let n = a.nrows();

    let norm_a = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |m, &s| m.max(s));
    let threshold = tol * norm_a.max(f64::MIN_POSITIVE);

    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    let svd = shifted.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.as_ref().expect("V^T requested");

    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(|x, y| y.total_cmp(x));

    let below: Vec<usize> = (0..n).filter(|&i| sv[i] < threshold).collect();
    match below.len() {
        0 => Err(LinalgError::NotAnEigenvalue {
            lambda,
            smallest: sorted[n - 1],
            threshold,
            singular_values: sorted,
        }),
        1 => {
            let mut v: Vector = v_t.row(below[0]).transpose();
            v /= v.norm();
            let imax = v.iter().enumerate().fold(
                0,
                |best, (i, x)| {
                    if x.abs() > v[best].abs() {
                        i
                    } else {
                        best
                    }
                },
            );
            if v[imax] < 0.0 {
                v = -v;
            }
            let residual = (a * &v - lambda * &v).norm();
            Ok(Eigenvector {
                vector: v,
                lambda,
                residual,
                singular_values: sorted,
            })
        }
        k => Err(LinalgError::NotSimple {
            lambda,
            nullity: k,
            singular_values: sorted,
        }),
    }
}
