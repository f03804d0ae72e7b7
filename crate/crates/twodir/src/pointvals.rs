//! Exact point values on dyadic grids via the transfer-matrix eigenvalue
//! approach.
//!
//! On the integer hull `[a, b]` of the support, the refinement equation turns
//! into an eigenvalue problem: the vector of values `(phi(a), ..., phi(b))`
//! is the eigenvector of the block transfer matrix
//!
//! ```text
//! (T_phi)_{l,k} = sqrt(d) * (P_{d*l-k}^+ + P_{d*l+k}^-),   a <= l, k <= b
//! ```
//!
//! for eigenvalue 1. The eigenvector's scale is fixed by the zeroth moment:
//! `m_0^T (sum_k phi(k)) = m_0^T m_0 = 1/2`. Values at denser dyadic grids
//! follow by substituting known values back into the refinement equation;
//! every argument `d*x - k` and `k - d*x` of a dyadic grid point lands
//! exactly on a coarser dyadic grid, so subdivision never interpolates.
//! Wavelet values come from the same substitution applied to the wavelet
//! coefficients.

use crate::linalg::{self, EigenSolve, LinalgError};
use crate::mask::{self, CoeffSeq, TwoDirectionSystem};
use crate::moments::{self, MomentError};
use crate::{Complex, Matrix, Vector};

/// Components smaller than this (relative to the largest one) do not count
/// when picking the canonical "last significant entry" of an eigenvector.
const SIGNIFICANT_REL: f64 = 1e-9;

/// Endpoint components below this magnitude are snapped to exact zero.
const ENDPOINT_TRIM: f64 = 1e-10;

/// Normalization is refused when `|m_0^T sum_k v(k)|` of the unit eigenvector
/// falls below this.
const DEGENERATE_INNER: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum PointValueError {
    #[error(transparent)]
    Eigen(#[from] LinalgError),
    #[error(transparent)]
    Moments(#[from] MomentError),
    #[error("cannot normalize: |m_0^T sum_k v(k)| = {inner:.3e} is below {DEGENERATE_INNER:e}")]
    NormalizationDegenerate {
        inner: f64,
        /// Unnormalized table (unit-norm eigenvector), kept for inspection.
        table: Box<PointValueTable>,
        report: Box<SpectralReport>,
    },
    #[error("system has no wavelet masks")]
    MissingWaveletMasks,
    #[error("wavelet index {s} is outside 1..={max}")]
    WaveletIndexOutOfRange { s: usize, max: usize },
    #[error("operation expects a {expected} table, got {got}")]
    WrongKind { expected: String, got: String },
    #[error("operation expects a normalized table")]
    NotNormalized,
    #[error("derivative order {n} exceeds the supported maximum {max}")]
    OrderTooLarge { n: u32, max: u32 },
    #[error("derivative order {n} needs moments up to that order, table stops at {available}")]
    InsufficientMoments { n: u32, available: usize },
}

/// What a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// The scaling function itself.
    Scaling,
    /// Wavelet `s` in `1..=d-1`.
    Wavelet { s: usize },
    /// `n`-th derivative of the scaling function.
    ScalingDerivative { n: u32 },
    /// `n`-th derivative of wavelet `s`.
    WaveletDerivative { n: u32, s: usize },
}

impl TableKind {
    /// Stable label used in CSV/JSON output: `phi`, `psi:1`, `D1phi`, `D2psi:1`.
    pub fn label(&self) -> String {
        match self {
            TableKind::Scaling => "phi".into(),
            TableKind::Wavelet { s } => format!("psi:{s}"),
            TableKind::ScalingDerivative { n } => format!("D{n}phi"),
            TableKind::WaveletDerivative { n, s } => format!("D{n}psi:{s}"),
        }
    }

    pub fn derivative_order(&self) -> u32 {
        match self {
            TableKind::Scaling | TableKind::Wavelet { .. } => 0,
            TableKind::ScalingDerivative { n } | TableKind::WaveletDerivative { n, .. } => *n,
        }
    }
}

/// Values of a vector function on the dyadic grid `{a + i * d^-L}` over the
/// integer hull `[a, b]`.
#[derive(Debug, Clone)]
pub struct PointValueTable {
    kind: TableKind,
    a: i64,
    b: i64,
    d: i64,
    level: u32,
    r: usize,
    values: Vec<Vector>,
    normalized: bool,
}

impl PointValueTable {
    pub(crate) fn new(
        kind: TableKind,
        a: i64,
        b: i64,
        d: i64,
        level: u32,
        values: Vec<Vector>,
        normalized: bool,
    ) -> Self {
        let r = values.first().map_or(0, Vector::len);
        debug_assert_eq!(values.len() as i64, (b - a) * d.pow(level) + 1);
        PointValueTable {
            kind,
            a,
            b,
            d,
            level,
            r,
            values,
            normalized,
        }
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    /// Integer hull `(a, b)`.
    pub fn bounds(&self) -> (i64, i64) {
        (self.a, self.b)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dilation(&self) -> i64 {
        self.d
    }

    /// Components per grid point.
    pub fn multiplicity(&self) -> usize {
        self.r
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Number of grid points, `(b - a) * d^level + 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing `d^-level`.
    pub fn step(&self) -> f64 {
        (self.d as f64).powi(-(self.level as i32))
    }

    /// Coordinate of grid point `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.a as f64 + i as f64 * self.step()
    }

    pub fn value(&self, i: usize) -> &Vector {
        &self.values[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Vector)> {
        (0..self.len()).map(|i| (self.x(i), &self.values[i]))
    }

    /// Value at a signed grid index; `None` outside `[a, b]`.
    pub fn at_index(&self, idx: i64) -> Option<&Vector> {
        if idx < 0 || idx >= self.values.len() as i64 {
            None
        } else {
            Some(&self.values[idx as usize])
        }
    }

    /// Value at coordinate `x`: zero outside `[a, b]`, exact-hit lookup inside.
    ///
    /// # Panics
    /// If `x` lies inside `[a, b]` but not on the grid.
    pub fn sample(&self, x: f64) -> Vector {
        let scale = (self.d as f64).powi(self.level as i32);
        let u = (x - self.a as f64) * scale;
        let i = u.round();
        if x < self.a as f64 - 1e-12 || x > self.b as f64 + 1e-12 {
            return Vector::zeros(self.r);
        }
        assert!(
            (u - i).abs() <= 1e-9,
            "x = {x} is not a level-{} grid point",
            self.level
        );
        let idx = (i as i64).clamp(0, self.values.len() as i64 - 1);
        self.values[idx as usize].clone()
    }

    /// Sum of the values at the integer grid points.
    pub fn integer_sum(&self) -> Vector {
        let stride = self.d.pow(self.level) as usize;
        let mut acc = Vector::zeros(self.r);
        for i in (0..self.len()).step_by(stride) {
            acc += &self.values[i];
        }
        acc
    }
}

/// Block transfer matrix over the integer hull.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    a: i64,
    b: i64,
    r: usize,
    matrix: Matrix,
}

impl TransferMatrix {
    pub fn bounds(&self) -> (i64, i64) {
        (self.a, self.b)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// The `r x r` block for grid row `l` and column `k`.
    pub fn block(&self, l: i64, k: i64) -> Matrix {
        let r = self.r;
        let i = (l - self.a) as usize * r;
        let j = (k - self.a) as usize * r;
        self.matrix.view((i, j), (r, r)).clone_owned()
    }
}

/// Spectral diagnostics of one transfer-matrix solve.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// Full spectrum, descending modulus.
    pub eigenvalues: Vec<Complex>,
    /// The targeted eigenvalue (1 for the scaling function, `d^-n` for
    /// derivatives).
    pub selected_eigenvalue: f64,
    /// `||T v - lambda v||` of the extracted eigenvector.
    pub residual: f64,
    /// Singular values of `T - lambda I`, descending.
    pub singular_values: Vec<f64>,
    /// Scale factor applied to the canonical raw eigenvector.
    pub normalizing_constant: f64,
}

// ---------------------------------------------------------------------------
// Transfer-matrix assembly
// ---------------------------------------------------------------------------

pub(crate) fn assemble_transfer(
    sys: &TwoDirectionSystem,
    plus: &CoeffSeq,
    minus: &CoeffSeq,
    minus_sign: f64,
) -> TransferMatrix {
    let hull = mask::support_hull(sys);
    let (a, b) = (hull.a, hull.b);
    let r = sys.multiplicity();
    let d = sys.dilation();
    let npts = (b - a + 1) as usize;
    let mut matrix = Matrix::zeros(npts * r, npts * r);
    for l in a..=b {
        for k in a..=b {
            let mut blk = Matrix::zeros(r, r);
            let mut nonzero = false;
            if let Some(p) = plus.get(d * l - k) {
                blk += p;
                nonzero = true;
            }
            if let Some(p) = minus.get(d * l + k) {
                blk += p * minus_sign;
                nonzero = true;
            }
            if nonzero {
                blk *= sys.sqrt_d();
                let i = (l - a) as usize * r;
                let j = (k - a) as usize * r;
                matrix.view_mut((i, j), (r, r)).copy_from(&blk);
            }
        }
    }
    TransferMatrix { a, b, r, matrix }
}

/// Transfer matrix of the scaling function.
pub fn assemble_t_phi(sys: &TwoDirectionSystem) -> TransferMatrix {
    assemble_transfer(sys, sys.phi_plus(), sys.phi_minus(), 1.0)
}

/// Transfer matrix mapping scaling values to wavelet values.
pub fn assemble_t_psi(
    sys: &TwoDirectionSystem,
    s: usize,
) -> Result<TransferMatrix, PointValueError> {
    let w = wavelet_mask(sys, s)?;
    Ok(assemble_transfer(sys, w.plus(), w.minus(), 1.0))
}

fn wavelet_mask(
    sys: &TwoDirectionSystem,
    s: usize,
) -> Result<&crate::mask::WaveletMask, PointValueError> {
    if sys.wavelets().is_empty() {
        return Err(PointValueError::MissingWaveletMasks);
    }
    sys.wavelet(s)
        .ok_or(PointValueError::WaveletIndexOutOfRange {
            s,
            max: sys.wavelets().len(),
        })
}

// ---------------------------------------------------------------------------
// Eigenvector canonicalization and normalization
// ---------------------------------------------------------------------------

/// Scale `v` so its last significant entry (relative threshold 1e-9) is +1.
pub(crate) fn canonicalize_last_entry(v: &Vector) -> Vector {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let last = (0..v.len())
        .rev()
        .find(|&i| v[i].abs() > SIGNIFICANT_REL * max)
        .expect("eigenvector has a significant entry");
    v / v[last]
}

/// Sum of the `r`-blocks of a flattened grid vector.
pub(crate) fn block_sum(v: &Vector, r: usize) -> Vector {
    let mut acc = Vector::zeros(r);
    for i in (0..v.len()).step_by(r) {
        acc += v.rows(i, r);
    }
    acc
}

/// Split a flattened grid eigenvector into a level-0 table.
pub(crate) fn table_from_flat_raw(
    sys: &TwoDirectionSystem,
    kind: TableKind,
    a: i64,
    b: i64,
    v: &Vector,
    normalized: bool,
) -> PointValueTable {
    let r = sys.multiplicity();
    let values: Vec<Vector> = (0..=(b - a) as usize)
        .map(|i| v.rows(i * r, r).clone_owned())
        .collect();
    PointValueTable::new(kind, a, b, sys.dilation(), 0, values, normalized)
}

/// Snap near-zero endpoint components to exact zero. Endpoint values vanish
/// unless the boundary coefficient has an eigenvalue `1/sqrt(d)`; the
/// eigenvector only delivers them up to roundoff.
pub(crate) fn trim_endpoint_noise(table: &mut PointValueTable) {
    let last = table.values.len() - 1;
    for idx in [0, last] {
        for x in table.values[idx].iter_mut() {
            if x.abs() < ENDPOINT_TRIM {
                *x = 0.0;
            }
        }
    }
}

#[cfg(test)]
pub(crate) fn scale_table(table: &PointValueTable, factor: f64) -> PointValueTable {
    let mut out = table.clone();
    for v in &mut out.values {
        *v *= factor;
    }
    out
}

/// Values of the scaling function at the integers.
///
/// Extracts the eigenvector of `T_phi` for eigenvalue 1 and scales it so that
/// `m_0^T (sum_k phi(k)) = 1/2`. The reported normalizing constant refers to
/// the canonical raw eigenvector: for scalar systems the raw vector already
/// satisfies `sum_k phi(k) = sqrt(2)/2` (so the constant is 1); otherwise the
/// raw vector has its last significant entry equal to +1.
pub fn integer_values(
    sys: &TwoDirectionSystem,
) -> Result<(PointValueTable, SpectralReport), PointValueError> {
    let t = assemble_t_phi(sys);
    let m0 = moments::zeroth_moment(sys)?;
    let mut solve = EigenSolve::new(t.matrix())?;
    let ev = solve.extract(t.matrix(), 1.0, linalg::DEFAULT_TOL)?;
    let r = sys.multiplicity();

    let unit_inner = m0.dot(&block_sum(&ev.vector, r));
    let mut report = SpectralReport {
        eigenvalues: solve.eigenvalues.clone(),
        selected_eigenvalue: 1.0,
        residual: ev.residual,
        singular_values: ev.singular_values.clone(),
        normalizing_constant: f64::NAN,
    };
    if unit_inner.abs() < DEGENERATE_INNER {
        let table = table_from_flat_raw(sys, TableKind::Scaling, t.a, t.b, &ev.vector, false);
        return Err(PointValueError::NormalizationDegenerate {
            inner: unit_inner.abs(),
            table: Box::new(table),
            report: Box::new(report),
        });
    }

    let raw = if r == 1 {
        // scalar normalization: sum of values is sqrt(2)/2 already
        let sum: f64 = ev.vector.iter().sum();
        &ev.vector * (std::f64::consts::FRAC_1_SQRT_2 / sum)
    } else {
        canonicalize_last_entry(&ev.vector)
    };
    let c = (0.5) / m0.dot(&block_sum(&raw, r));
    report.normalizing_constant = c;

    let mut table = table_from_flat_raw(sys, TableKind::Scaling, t.a, t.b, &(raw * c), true);
    trim_endpoint_noise(&mut table);
    Ok((table, report))
}

// ---------------------------------------------------------------------------
// Dyadic subdivision
// ---------------------------------------------------------------------------

/// One subdivision step shared by the scaling function (`n = 0`) and its
/// derivatives: applies
/// `f(x) = d^n sqrt(d) sum_k [P_k^+ f(dx - k) + (-1)^n P_k^- f(k - dx)]`
/// on the next finer grid. All lookups are exact grid hits at the source
/// level.
pub(crate) fn subdivide(
    sys: &TwoDirectionSystem,
    table: &PointValueTable,
    n: u32,
) -> PointValueTable {
    let (a, b) = table.bounds();
    let d = sys.dilation();
    let r = sys.multiplicity();
    let level = table.level();
    let scale = (d as f64).powi(n as i32) * sys.sqrt_d();
    let minus_sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pow = d.pow(level);

    let npts_new = ((b - a) * d.pow(level + 1) + 1) as usize;
    let mut values = Vec::with_capacity(npts_new);
    for i in 0..npts_new as i64 {
        let mut acc = Vector::zeros(r);
        for (k, p) in sys.phi_plus().iter() {
            // level-L index of d*x - k for x = a + i * d^-(L+1)
            let j = ((d - 1) * a - k) * pow + i;
            if let Some(v) = table.at_index(j) {
                acc += p * v;
            }
        }
        for (k, p) in sys.phi_minus().iter() {
            // level-L index of k - d*x
            let j = (k - (d + 1) * a) * pow - i;
            if let Some(v) = table.at_index(j) {
                acc += p * v * minus_sign;
            }
        }
        values.push(acc * scale);
    }
    PointValueTable::new(
        table.kind(),
        a,
        b,
        d,
        level + 1,
        values,
        table.is_normalized(),
    )
}

/// One dyadic refinement step of a scaling-function table.
pub fn refine(
    sys: &TwoDirectionSystem,
    table: &PointValueTable,
) -> Result<PointValueTable, PointValueError> {
    if table.kind() != TableKind::Scaling {
        return Err(PointValueError::WrongKind {
            expected: "phi".into(),
            got: table.kind().label(),
        });
    }
    if !table.is_normalized() {
        return Err(PointValueError::NotNormalized);
    }
    Ok(subdivide(sys, table, 0))
}

/// Normalized scaling-function table at dyadic level `level`.
pub fn values_at_level(
    sys: &TwoDirectionSystem,
    level: u32,
) -> Result<(PointValueTable, SpectralReport), PointValueError> {
    let (mut table, report) = integer_values(sys)?;
    for _ in 0..level {
        table = subdivide(sys, &table, 0);
    }
    Ok((table, report))
}

// ---------------------------------------------------------------------------
// Wavelet values
// ---------------------------------------------------------------------------

/// Shared wavelet substitution for `n = 0` (values) and `n >= 1`
/// (derivatives): evaluates
/// `d^n sqrt(d) sum_k [Q_k^+ f(dx - k) + (-1)^n Q_k^- f(k - dx)]`
/// at every grid point of `source`, where `f` is the scaling function (or its
/// `n`-th derivative). Arguments land on the coarser grid, so the same-level
/// source table already contains every value needed.
pub(crate) fn apply_wavelet(
    sys: &TwoDirectionSystem,
    s: usize,
    source: &PointValueTable,
    n: u32,
) -> Result<PointValueTable, PointValueError> {
    let w = wavelet_mask(sys, s)?;
    let (a, b) = source.bounds();
    let d = sys.dilation();
    let r = sys.multiplicity();
    let level = source.level();
    let scale = (d as f64).powi(n as i32) * sys.sqrt_d();
    let minus_sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pow = d.pow(level);

    let kind = if n == 0 {
        TableKind::Wavelet { s }
    } else {
        TableKind::WaveletDerivative { n, s }
    };
    let mut values = Vec::with_capacity(source.len());
    for i in 0..source.len() as i64 {
        let mut acc = Vector::zeros(r);
        for (k, q) in w.plus().iter() {
            let j = ((d - 1) * a - k) * pow + d * i;
            if let Some(v) = source.at_index(j) {
                acc += q * v;
            }
        }
        for (k, q) in w.minus().iter() {
            let j = (k - (d + 1) * a) * pow - d * i;
            if let Some(v) = source.at_index(j) {
                acc += q * v * minus_sign;
            }
        }
        values.push(acc * scale);
    }
    Ok(PointValueTable::new(
        kind,
        a,
        b,
        d,
        level,
        values,
        source.is_normalized(),
    ))
}

/// Wavelet `psi^(s)` on the same grid as a normalized scaling table.
pub fn wavelet_values(
    sys: &TwoDirectionSystem,
    s: usize,
    phi_table: &PointValueTable,
) -> Result<PointValueTable, PointValueError> {
    if phi_table.kind() != TableKind::Scaling {
        return Err(PointValueError::WrongKind {
            expected: "phi".into(),
            got: phi_table.kind().label(),
        });
    }
    if !phi_table.is_normalized() {
        return Err(PointValueError::NotNormalized);
    }
    apply_wavelet(sys, s, phi_table, 0)
}
