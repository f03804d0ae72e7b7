//! Discrete and continuous moments of the scaling function.
//!
//! Discrete moments are polynomial-weighted coefficient sums,
//! `M_j^{+-} = d^{-1/2} sum_k k^j P_k^{+-}`. Continuous moments
//! `m_j = integral of x^j phi(x)` follow from the refinement equation: `m_0`
//! is the eigenvector of `M_0 = M_0^+ + M_0^-` for eigenvalue 1, normalized to
//! `||m_0||^2 = 1/2` with the largest-magnitude component positive, and higher
//! orders solve
//!
//! ```text
//! m_j = (d^j I - [M_0^+ + (-1)^j M_0^-])^{-1}
//!       * sum_{l=0}^{j-1} C(j,l) [M_{j-l}^+ + (-1)^l M_{j-l}^-] m_l .
//! ```
//!
//! The same moments are the approximation vectors: `x^j` is reproduced by
//! integer shifts of `phi(x)` and `phi(-x)` with coefficient vectors given by
//! [`approx_coefficients`].

use crate::linalg::{self, LinalgError};
use crate::mask::TwoDirectionSystem;
use crate::{Matrix, Vector};

/// Highest moment order with exact integer binomial weights.
pub const MAX_ORDER: usize = 30;

/// Distance-to-one tolerance for the eigenvalue of `M_0`.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, thiserror::Error)]
pub enum MomentError {
    #[error("M_0 has no eigenvalue within {tol:e} of 1 (nearest is {nearest})")]
    NoUnitEigenvalue { nearest: f64, tol: f64 },
    #[error("eigenvalue 1 of M_0 is not simple")]
    UnitEigenvalueNotSimple,
    #[error("moment recursion matrix is singular at order {order}")]
    SingularAtOrder { order: usize },
    #[error("moment order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("coefficient order {j} exceeds the table order {max}")]
    OrderOutOfTable { j: usize, max: usize },
}

/// Moments of one system up to a fixed order.
#[derive(Debug, Clone)]
pub struct MomentTable {
    order: usize,
    m_plus: Vec<Matrix>,
    m_minus: Vec<Matrix>,
    m: Vec<Vector>,
}

impl MomentTable {
    /// Highest computed order `J`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Continuous moment `m_j`.
    pub fn m(&self, j: usize) -> &Vector {
        &self.m[j]
    }

    pub fn m_plus(&self, j: usize) -> &Matrix {
        &self.m_plus[j]
    }

    pub fn m_minus(&self, j: usize) -> &Matrix {
        &self.m_minus[j]
    }

    /// Residual of the defining relation at order `j`:
    /// `m_j - d^{-j} sum_{l=0}^{j} C(j,l) [M_{j-l}^+ + (-1)^l M_{j-l}^-] m_l`.
    pub fn recursion_residual(&self, d: i64, j: usize) -> f64 {
        let mut acc = Vector::zeros(self.m[0].len());
        for l in 0..=j {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let weight = binomial(j, l) as f64;
            acc += (&self.m_plus[j - l] + sign * &self.m_minus[j - l]) * &self.m[l] * weight;
        }
        acc /= (d as f64).powi(j as i32);
        (&self.m[j] - acc).norm()
    }
}

/// Exact binomial coefficient; valid through `n = 62`.
pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Positive and negative discrete moments `M_j^+`, `M_j^-` for `j = 0..=order`.
pub fn discrete_moments(sys: &TwoDirectionSystem, order: usize) -> (Vec<Matrix>, Vec<Matrix>) {
    let r = sys.multiplicity();
    let inv_sqrt_d = 1.0 / sys.sqrt_d();
    let weighted_sum = |seq: &crate::mask::CoeffSeq, j: usize| {
        let mut acc = Matrix::zeros(r, r);
        for (k, m) in seq.iter() {
            acc += m * (k as f64).powi(j as i32);
        }
        acc * inv_sqrt_d
    };
    let plus = (0..=order)
        .map(|j| weighted_sum(sys.phi_plus(), j))
        .collect();
    let minus = (0..=order)
        .map(|j| weighted_sum(sys.phi_minus(), j))
        .collect();
    (plus, minus)
}

/// Zeroth continuous moment: eigenvector of `M_0` for eigenvalue 1, scaled to
/// `||m_0||^2 = 1/2`, largest-magnitude component positive.
pub fn zeroth_moment(sys: &TwoDirectionSystem) -> Result<Vector, MomentError> {
    let (plus, minus) = discrete_moments(sys, 0);
    let m0_matrix = &plus[0] + &minus[0];

    let eigenvalues = linalg::eigenvalues(&m0_matrix).expect("finite by construction");
    let nearest = eigenvalues
        .iter()
        .map(|z| (z - crate::Complex::new(1.0, 0.0)).norm())
        .fold(f64::INFINITY, f64::min);
    if nearest > UNIT_EIGENVALUE_TOL {
        return Err(MomentError::NoUnitEigenvalue {
            nearest,
            tol: UNIT_EIGENVALUE_TOL,
        });
    }

    let ev =
        linalg::eigenvector_for(&m0_matrix, 1.0, UNIT_EIGENVALUE_TOL).map_err(|e| match e {
            LinalgError::NotSimple { .. } => MomentError::UnitEigenvalueNotSimple,
            _ => MomentError::NoUnitEigenvalue {
                nearest,
                tol: UNIT_EIGENVALUE_TOL,
            },
        })?;
    // unit vector scaled so the squared norm is 1/2
    Ok(ev.vector / std::f64::consts::SQRT_2)
}

/// Full moment table up to order `J`.
pub fn continuous_moments(
    sys: &TwoDirectionSystem,
    order: usize,
) -> Result<MomentTable, MomentError> {
    if order > MAX_ORDER {
        return Err(MomentError::OrderTooLarge {
            order,
            max: MAX_ORDER,
        });
    }
    let (m_plus, m_minus) = discrete_moments(sys, order);
    let r = sys.multiplicity();
    let d = sys.dilation() as f64;

    let mut m = Vec::with_capacity(order + 1);
    m.push(zeroth_moment(sys)?);

    for j in 1..=order {
        let parity = if j % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = Matrix::identity(r, r) * d.powi(j as i32) - (&m_plus[0] + parity * &m_minus[0]);
        let mut rhs = Vector::zeros(r);
        for l in 0..j {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let weight = binomial(j, l) as f64;
            rhs += (&m_plus[j - l] + sign * &m_minus[j - l]) * &m[l] * weight;
        }
        let solved = lhs
            .lu()
            .solve(&rhs)
            .ok_or(MomentError::SingularAtOrder { order: j })?;
        m.push(solved);
    }

    Ok(MomentTable {
        order,
        m_plus,
        m_minus,
        m,
    })
}

/// Polynomial-reproduction coefficient vectors for `x^j` at shift `k`:
/// `c_{j,k}^+ = sum_l C(j,l) k^{j-l} m_l` and
/// `c_{j,k}^- = sum_l C(j,l) k^{j-l} (-1)^l m_l`.
pub fn approx_coefficients(
    table: &MomentTable,
    j: usize,
    k: i64,
) -> Result<(Vector, Vector), MomentError> {
    if j > table.order() {
        return Err(MomentError::OrderOutOfTable {
            j,
            max: table.order(),
        });
    }
    let r = table.m[0].len();
    let mut cplus = Vector::zeros(r);
    let mut cminus = Vector::zeros(r);
    for l in 0..=j {
        let weight = binomial(j, l) as f64 * (k as f64).powi((j - l) as i32);
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        cplus += table.m(l) * weight;
        cminus += table.m(l) * weight * sign;
    }
    Ok((cplus, cminus))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen oracle values keep their full digits
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mask::{CoeffSeq, TwoDirectionSystem};

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn binomials_exact() {
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(30, 15), 155117520);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn discrete_moment_5_2_is_diagonal() {
        let sys = fixtures::system_5_2();
        let (plus, minus) = discrete_moments(&sys, 0);
        let m0 = &plus[0] + &minus[0];
        assert!((m0[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((m0[(1, 1)] - 0.5).abs() < 1e-14);
        assert!(m0[(0, 1)].abs() < 1e-14);
        assert!(m0[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn discrete_moment_5_1_is_one() {
        let (plus, minus) = discrete_moments(&fixtures::system_5_1(), 0);
        assert!((plus[0][(0, 0)] + minus[0][(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn discrete_moments_are_linear_in_the_mask() {
        let sys = fixtures::system_5_1();
        let scale = 3.5;
        let scaled_seq = |seq: &CoeffSeq| {
            let mut out = CoeffSeq::new(1);
            for (k, m) in seq.iter() {
                out.insert(k, m * scale);
            }
            out
        };
        let scaled = TwoDirectionSystem::new(
            "scaled",
            2,
            1,
            scaled_seq(sys.phi_plus()),
            scaled_seq(sys.phi_minus()),
            vec![],
        )
        .unwrap();
        let (p1, m1) = discrete_moments(&sys, 2);
        let (p2, m2) = discrete_moments(&scaled, 2);
        for j in 0..=2 {
            assert!((p2[j][(0, 0)] - scale * p1[j][(0, 0)]).abs() < 1e-13);
            assert!((m2[j][(0, 0)] - scale * m1[j][(0, 0)]).abs() < 1e-13);
        }
    }

    #[test]
    fn zeroth_moment_5_1() {
        let m0 = zeroth_moment(&fixtures::system_5_1()).unwrap();
        assert!((m0[0] - SQRT_2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zeroth_moment_5_2() {
        let m0 = zeroth_moment(&fixtures::system_5_2()).unwrap();
        assert!((m0[0] - SQRT_2 / 2.0).abs() < 1e-12);
        assert!(m0[1].abs() < 1e-12);
    }

    #[test]
    fn zeroth_moment_scalar_is_half_sqrt_two() {
        // any scalar mask with M_0 = 1
        let plus = CoeffSeq::scalar([(0, 0.9 * SQRT_2), (3, -0.15 * SQRT_2)]);
        let minus = CoeffSeq::scalar([(1, 0.25 * SQRT_2)]);
        let sys = TwoDirectionSystem::new("scalar", 2, 1, plus, minus, vec![]).unwrap();
        let m0 = zeroth_moment(&sys).unwrap();
        assert!((m0[0] - SQRT_2 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn no_unit_eigenvalue_reported() {
        let plus = CoeffSeq::scalar([(0, 0.3)]);
        let sys = TwoDirectionSystem::new("off", 2, 1, plus, CoeffSeq::new(1), vec![]).unwrap();
        assert!(matches!(
            zeroth_moment(&sys),
            Err(MomentError::NoUnitEigenvalue { .. })
        ));
    }

    // frozen 40-digit evaluations of the closed forms
    #[test]
    fn continuous_moments_5_1() {
        let table = continuous_moments(&fixtures::system_5_1(), 2).unwrap();
        assert!((table.m(0)[0] - SQRT_2 / 2.0).abs() < 1e-12);
        assert!((table.m(1)[0] - 1.2374368670764581677).abs() < 1e-12);
        assert!((table.m(2)[0] - 2.16551451738380179348).abs() < 1e-12);
    }

    #[test]
    fn continuous_moments_5_2() {
        let table = continuous_moments(&fixtures::system_5_2(), 2).unwrap();
        assert!((table.m(1)[0] - 0.513153129153143663002).abs() < 1e-12);
        assert!(table.m(1)[1].abs() < 1e-12);
        assert!((table.m(2)[0] - 0.372399389973029768538).abs() < 1e-12);
        assert!((table.m(2)[1] - 0.0394906937229149066884).abs() < 1e-12);
    }

    #[test]
    fn symmetric_hat_first_moment_vanishes() {
        let table = continuous_moments(&fixtures::symmetric_hat(), 1).unwrap();
        assert!(table.m(1)[0].abs() < 1e-14);
    }

    #[test]
    fn normalization_invariant() {
        for sys in [fixtures::system_5_1(), fixtures::system_5_2()] {
            let m0 = zeroth_moment(&sys).unwrap();
            assert!((m0.dot(&m0) - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn recursion_residual_small() {
        for sys in [fixtures::system_5_1(), fixtures::system_5_2()] {
            let table = continuous_moments(&sys, 3).unwrap();
            for j in 0..=3 {
                assert!(
                    table.recursion_residual(sys.dilation(), j) <= 1e-9,
                    "residual too large at order {j}"
                );
            }
        }
    }

    #[test]
    fn recursion_residual_survives_index_translation() {
        let sys = fixtures::system_5_1();
        let shift = |seq: &CoeffSeq| {
            let mut out = CoeffSeq::new(1);
            for (k, m) in seq.iter() {
                out.insert(k + 1, m.clone());
            }
            out
        };
        let shifted = TwoDirectionSystem::new(
            "shifted",
            2,
            1,
            shift(sys.phi_plus()),
            shift(sys.phi_minus()),
            vec![],
        )
        .unwrap();
        let table = continuous_moments(&shifted, 3).unwrap();
        for j in 0..=3 {
            assert!(table.recursion_residual(2, j) <= 1e-9);
        }
    }

    #[test]
    fn singular_recursion_matrix_reports_order() {
        // M_0^+ = 1.5, M_0^- = -0.5: M_0 = 1 but d - (M_0^+ - M_0^-) = 0
        let plus = CoeffSeq::scalar([(0, 1.5 * SQRT_2)]);
        let minus = CoeffSeq::scalar([(1, -0.5 * SQRT_2)]);
        let sys = TwoDirectionSystem::new("singular", 2, 1, plus, minus, vec![]).unwrap();
        match continuous_moments(&sys, 2) {
            Err(MomentError::SingularAtOrder { order }) => assert_eq!(order, 1),
            other => panic!("expected SingularAtOrder, got {other:?}"),
        }
    }

    #[test]
    fn approx_coefficients_low_orders() {
        let sys = fixtures::system_5_1();
        let table = continuous_moments(&sys, 2).unwrap();

        let (cp, cm) = approx_coefficients(&table, 0, 7).unwrap();
        assert_eq!(cp, table.m(0).clone());
        assert_eq!(cm, table.m(0).clone());

        let (cp, cm) = approx_coefficients(&table, 1, 0).unwrap();
        assert!((cp[0] - table.m(1)[0]).abs() < 1e-15);
        assert!((cm[0] + table.m(1)[0]).abs() < 1e-15);

        // j = 1, k = 2: c+ = 2 m_0 + m_1 = 15 sqrt(2) / 8
        let (cp, _) = approx_coefficients(&table, 1, 2).unwrap();
        assert!((cp[0] - 15.0 * SQRT_2 / 8.0).abs() < 1e-12);

        assert!(matches!(
            approx_coefficients(&table, 3, 0),
            Err(MomentError::OrderOutOfTable { j: 3, max: 2 })
        ));
    }

    #[test]
    fn order_cap_enforced() {
        assert!(matches!(
            continuous_moments(&fixtures::system_5_1(), 31),
            Err(MomentError::OrderTooLarge { .. })
        ));
    }
}
