//! Point values of derivatives.
//!
//! Differentiating the refinement equation `n` times flips the sign of the
//! reflected terms by `(-1)^n` and scales by `d^n`, so `D^n phi` at the
//! integers is the eigenvector of the signed transfer matrix
//!
//! ```text
//! (T_{D^n phi})_{l,k} = sqrt(d) * (P_{d*l-k}^+ + (-1)^n P_{d*l+k}^-)
//! ```
//!
//! for the eigenvalue `d^-n`. If that eigenvalue is missing, the derivative
//! does not exist at this order and the request fails with the spectral
//! diagnostics. The scale is fixed by the moment identity
//!
//! ```text
//! n!/2 = sum_{l=0}^{n} C(n,l) (-1)^(n-l) m_l^T ( sum_k k^(n-l) D^n phi(k) )
//! ```
//!
//! evaluated on the canonical raw eigenvector (last significant entry +1).

use crate::linalg::EigenSolve;
use crate::mask::TwoDirectionSystem;
use crate::moments::MomentTable;
use crate::pointvals::{
    self, PointValueError, PointValueTable, SpectralReport, TableKind, TransferMatrix,
};
use crate::Vector;

/// Largest supported derivative order.
pub const MAX_ORDER: u32 = 8;

/// Eigenvalue tolerance for the `d^-n` test.
pub const EIGENVALUE_TOL: f64 = 1e-6;

/// A derivative evaluation request as it arrives from the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivativeRequest {
    /// Derivative order, `>= 1`.
    pub order: u32,
    /// Wavelet index `1..=d-1`, or `None` for the scaling function.
    pub wavelet: Option<usize>,
    /// Output dyadic level.
    pub level: u32,
}

impl DerivativeRequest {
    /// Full pipeline: moments up to `order`, eigenvector extraction,
    /// refinement to `level`, and the optional wavelet pass. The report
    /// always describes the underlying `D^n phi` solve.
    pub fn evaluate(
        &self,
        sys: &TwoDirectionSystem,
    ) -> Result<(PointValueTable, SpectralReport), PointValueError> {
        let moments = crate::moments::continuous_moments(sys, self.order as usize)?;
        let (dphi, report) = derivative_values_at_level(sys, self.order, &moments, self.level)?;
        match self.wavelet {
            None => Ok((dphi, report)),
            Some(s) => Ok((
                derivative_wavelet_values(sys, self.order, s, &dphi)?,
                report,
            )),
        }
    }
}

/// Transfer matrix of the `n`-th derivative (`n = 0` reduces to `T_phi`).
pub fn assemble_t_deriv(sys: &TwoDirectionSystem, n: u32) -> TransferMatrix {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    pointvals::assemble_transfer(sys, sys.phi_plus(), sys.phi_minus(), sign)
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// `D^n phi` at the integers, normalized by the moment identity above.
///
/// Requires moments up to order `n`. Fails with `NotAnEigenvalue` when
/// `d^-n` is not in the spectrum of the signed transfer matrix, which is the
/// spectral signal that `phi` is not `n` times differentiable.
pub fn derivative_integer_values(
    sys: &TwoDirectionSystem,
    n: u32,
    moments: &MomentTable,
) -> Result<(PointValueTable, SpectralReport), PointValueError> {
    if n > MAX_ORDER {
        return Err(PointValueError::OrderTooLarge { n, max: MAX_ORDER });
    }
    if (moments.order() as u32) < n {
        return Err(PointValueError::InsufficientMoments {
            n,
            available: moments.order(),
        });
    }

    let t = assemble_t_deriv(sys, n);
    let d = sys.dilation() as f64;
    let target = d.powi(-(n as i32));
    let mut solve = EigenSolve::new(t.matrix())?;
    let ev = solve.extract(t.matrix(), target, EIGENVALUE_TOL)?;

    let raw = pointvals::canonicalize_last_entry(&ev.vector);
    let (a, b) = t.bounds();
    let r = sys.multiplicity();

    // denominator of the normalization identity on the raw vector
    let mut denominator = 0.0;
    for l in 0..=n {
        let power = (n - l) as i32;
        let mut weighted = Vector::zeros(r);
        for (i, k) in (a..=b).enumerate() {
            weighted += raw.rows(i * r, r) * (k as f64).powi(power);
        }
        let sign = if (n - l).is_multiple_of(2) { 1.0 } else { -1.0 };
        denominator += crate::moments::binomial(n as usize, l as usize) as f64
            * sign
            * moments.m(l as usize).dot(&weighted);
    }

    let mut report = SpectralReport {
        eigenvalues: solve.eigenvalues.clone(),
        selected_eigenvalue: target,
        residual: ev.residual,
        singular_values: ev.singular_values.clone(),
        normalizing_constant: f64::NAN,
    };
    let kind = TableKind::ScalingDerivative { n };
    if denominator.abs() < 1e-12 {
        let table = pointvals::table_from_flat_raw(sys, kind, a, b, &raw, false);
        return Err(PointValueError::NormalizationDegenerate {
            inner: denominator.abs(),
            table: Box::new(table),
            report: Box::new(report),
        });
    }

    let c = factorial(n) / 2.0 / denominator;
    report.normalizing_constant = c;
    let mut table = pointvals::table_from_flat_raw(sys, kind, a, b, &(raw * c), true);
    pointvals::trim_endpoint_noise(&mut table);
    Ok((table, report))
}

/// One dyadic subdivision step of a derivative table.
pub fn refine_derivative(
    sys: &TwoDirectionSystem,
    table: &PointValueTable,
) -> Result<PointValueTable, PointValueError> {
    match table.kind() {
        TableKind::ScalingDerivative { n } => Ok(pointvals::subdivide(sys, table, n)),
        other => Err(PointValueError::WrongKind {
            expected: "Dnphi".into(),
            got: other.label(),
        }),
    }
}

/// Normalized `D^n phi` table at dyadic level `level`.
pub fn derivative_values_at_level(
    sys: &TwoDirectionSystem,
    n: u32,
    moments: &MomentTable,
    level: u32,
) -> Result<(PointValueTable, SpectralReport), PointValueError> {
    let (mut table, report) = derivative_integer_values(sys, n, moments)?;
    for _ in 0..level {
        table = pointvals::subdivide(sys, &table, n);
    }
    Ok((table, report))
}

/// `D^n psi^(s)` on the same grid as a `D^n phi` table (`n = 0` reduces to
/// plain wavelet values).
pub fn derivative_wavelet_values(
    sys: &TwoDirectionSystem,
    n: u32,
    s: usize,
    dphi_table: &PointValueTable,
) -> Result<PointValueTable, PointValueError> {
    let kind_ok = match dphi_table.kind() {
        TableKind::Scaling => n == 0,
        TableKind::ScalingDerivative { n: have } => have == n,
        _ => false,
    };
    if !kind_ok {
        return Err(PointValueError::WrongKind {
            expected: if n == 0 {
                "phi".into()
            } else {
                format!("D{n}phi")
            },
            got: dphi_table.kind().label(),
        });
    }
    pointvals::apply_wavelet(sys, s, dphi_table, n)
}
