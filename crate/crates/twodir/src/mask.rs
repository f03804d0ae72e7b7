//! Two-direction refinement systems: data model, JSON mask files, validation.
//!
//! A system consists of a dilation `d >= 2`, a multiplicity `r >= 1`, the
//! positive/negative coefficient sequences for the scaling function, and
//! optionally `d - 1` coefficient pairs for the wavelets. Coefficients are
//! finitely supported maps from an integer shift `k` to an `r x r` real
//! matrix.
//!
//! The mask file format is JSON:
//!
//! ```json
//! {
//!   "name": "...",
//!   "dilation": 2,
//!   "multiplicity": 2,
//!   "phi": { "plus":  { "1": [[..], [..]], ... },
//!            "minus": { "2": [[..], [..]], ... } },
//!   "psi": [ { "plus": {...}, "minus": {...} } ]
//! }
//! ```
//!
//! where each matrix entry is either a JSON number or an expression string for
//! [`crate::expr`] (e.g. `"(93-13*sqrt(31))/(320*sqrt(2))"`), keys are decimal
//! integers (possibly negative), and matrices are stored row-major.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::linalg;
use crate::{Complex, Matrix};

/// Distance-to-one tolerance for the leading Condition E eigenvalue.
pub const CONDITION_E_TOL_EIG: f64 = 1e-8;
/// Required margin of all other eigenvalues inside the unit disk.
pub const CONDITION_E_TOL_GAP: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum MaskError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {key}: {message}")]
    Schema { key: String, message: String },
    #[error("dimension mismatch at {key}: got {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch {
        key: String,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("cannot evaluate expression at {key}: {message}")]
    Expression { key: String, message: String },
}

/// Finitely supported sequence of `r x r` coefficient matrices.
///
/// All-zero matrices are never stored, so the support bounds are exactly the
/// smallest and largest keys present.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    r: usize,
    entries: BTreeMap<i64, Matrix>,
}

impl CoeffSeq {
    pub fn new(r: usize) -> Self {
        assert!(r >= 1, "multiplicity must be at least 1");
        CoeffSeq {
            r,
            entries: BTreeMap::new(),
        }
    }

    /// Build a scalar (r = 1) sequence from `(k, value)` pairs.
    pub fn scalar<I: IntoIterator<Item = (i64, f64)>>(coeffs: I) -> Self {
        let mut seq = CoeffSeq::new(1);
        for (k, v) in coeffs {
            seq.insert(k, Matrix::from_element(1, 1, v));
        }
        seq
    }

    /// Insert a coefficient. All-zero matrices are dropped (support trim).
    ///
    /// # Panics
    /// If the matrix is not `r x r`.
    pub fn insert(&mut self, k: i64, m: Matrix) {
        assert_eq!(
            (m.nrows(), m.ncols()),
            (self.r, self.r),
            "coefficient must be r x r"
        );
        if m.iter().all(|&x| x == 0.0) {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, m);
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, k: i64) -> Option<&Matrix> {
        self.entries.get(&k)
    }

    /// Coefficient at `k`, or the zero matrix when unsupported.
    pub fn block(&self, k: i64) -> Matrix {
        self.get(k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.r, self.r))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(kmin, kmax)` of the nonzero support, or `None` when empty.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = *self.entries.keys().next()?;
        let hi = *self.entries.keys().next_back()?;
        Some((lo, hi))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Matrix)> {
        self.entries.iter().map(|(&k, m)| (k, m))
    }

    /// Sum of all stored matrices.
    pub fn sum(&self) -> Matrix {
        let mut acc = Matrix::zeros(self.r, self.r);
        for m in self.entries.values() {
            acc += m;
        }
        acc
    }
}

/// One wavelet coefficient pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletMask {
    plus: CoeffSeq,
    minus: CoeffSeq,
}

impl WaveletMask {
    pub fn new(plus: CoeffSeq, minus: CoeffSeq) -> Self {
        assert_eq!(plus.r(), minus.r());
        WaveletMask { plus, minus }
    }

    pub fn plus(&self) -> &CoeffSeq {
        &self.plus
    }

    pub fn minus(&self) -> &CoeffSeq {
        &self.minus
    }
}

/// A validated two-direction refinement system.
#[derive(Debug, Clone)]
pub struct TwoDirectionSystem {
    name: String,
    d: i64,
    r: usize,
    phi_plus: CoeffSeq,
    phi_minus: CoeffSeq,
    wavelets: Vec<WaveletMask>,
}

impl TwoDirectionSystem {
    pub fn new(
        name: impl Into<String>,
        d: i64,
        r: usize,
        phi_plus: CoeffSeq,
        phi_minus: CoeffSeq,
        wavelets: Vec<WaveletMask>,
    ) -> Result<Self, MaskError> {
        let schema = |key: &str, message: String| MaskError::Schema {
            key: key.to_string(),
            message,
        };
        if d < 2 {
            return Err(schema(
                "dilation",
                format!("dilation must be >= 2, got {d}"),
            ));
        }
        if r < 1 {
            return Err(schema("multiplicity", "multiplicity must be >= 1".into()));
        }
        for (key, seq) in [("phi.plus", &phi_plus), ("phi.minus", &phi_minus)] {
            if seq.r() != r {
                return Err(schema(key, format!("multiplicity {} != {r}", seq.r())));
            }
        }
        if phi_plus.is_empty() && phi_minus.is_empty() {
            return Err(schema(
                "phi",
                "at least one scaling coefficient is required".into(),
            ));
        }
        if !wavelets.is_empty() && wavelets.len() != (d - 1) as usize {
            return Err(schema(
                "psi",
                format!(
                    "expected 0 or {} wavelet masks, got {}",
                    d - 1,
                    wavelets.len()
                ),
            ));
        }
        for (s, w) in wavelets.iter().enumerate() {
            if w.plus().r() != r || w.minus().r() != r {
                return Err(schema(&format!("psi[{s}]"), format!("multiplicity != {r}")));
            }
        }
        Ok(TwoDirectionSystem {
            name: name.into(),
            d,
            r,
            phi_plus,
            phi_minus,
            wavelets,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dilation(&self) -> i64 {
        self.d
    }

    pub fn multiplicity(&self) -> usize {
        self.r
    }

    pub fn phi_plus(&self) -> &CoeffSeq {
        &self.phi_plus
    }

    pub fn phi_minus(&self) -> &CoeffSeq {
        &self.phi_minus
    }

    pub fn wavelets(&self) -> &[WaveletMask] {
        &self.wavelets
    }

    /// Wavelet mask for index `s` in `1..=d-1`.
    pub fn wavelet(&self, s: usize) -> Option<&WaveletMask> {
        if s == 0 {
            return None;
        }
        self.wavelets.get(s - 1)
    }

    pub fn sqrt_d(&self) -> f64 {
        (self.d as f64).sqrt()
    }

    /// Largest `|k|` over the scaling-function supports.
    pub fn max_shift(&self) -> i64 {
        let mut n = 0i64;
        for seq in [&self.phi_plus, &self.phi_minus] {
            if let Some((lo, hi)) = seq.support() {
                n = n.max(lo.abs()).max(hi.abs());
            }
        }
        n
    }
}

/// Outcome of the Condition E test.
#[derive(Debug, Clone)]
pub struct ConditionEReport {
    /// Eigenvalues of the `2r x 2r` coefficient-sum matrix, sorted by
    /// descending modulus.
    pub eigenvalues: Vec<Complex>,
    /// Exactly one eigenvalue within [`CONDITION_E_TOL_EIG`] of 1 and all
    /// others of modulus at most `1 - CONDITION_E_TOL_GAP`.
    pub satisfied: bool,
    /// `1 -` (second largest modulus).
    pub gap: f64,
}

/// Integer support hull of the scaling function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportHull {
    pub a: i64,
    pub b: i64,
    /// False when the interval iteration did not converge and the hull fell
    /// back to `[-N/(d-1), N/(d-1)]`.
    pub converged: bool,
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(untagged)]
enum CoefValue {
    Number(f64),
    Expression(String),
}

#[derive(Deserialize, Default)]
struct PairFile {
    #[serde(default)]
    plus: BTreeMap<String, Vec<Vec<CoefValue>>>,
    #[serde(default)]
    minus: BTreeMap<String, Vec<Vec<CoefValue>>>,
}

#[derive(Deserialize)]
struct MaskFile {
    name: String,
    dilation: i64,
    multiplicity: usize,
    phi: PairFile,
    #[serde(default)]
    psi: Vec<PairFile>,
}

fn eval_coef(value: &CoefValue, key: &str) -> Result<f64, MaskError> {
    let v = match value {
        CoefValue::Number(x) => *x,
        CoefValue::Expression(text) => {
            crate::expr::eval_str(text).map_err(|message| MaskError::Expression {
                key: key.to_string(),
                message,
            })?
        }
    };
    if !v.is_finite() {
        return Err(MaskError::Expression {
            key: key.to_string(),
            message: "value is not finite".into(),
        });
    }
    Ok(v)
}

fn build_seq(
    raw: &BTreeMap<String, Vec<Vec<CoefValue>>>,
    r: usize,
    prefix: &str,
) -> Result<CoeffSeq, MaskError> {
    let mut seq = CoeffSeq::new(r);
    for (key, rows) in raw {
        let ctx = format!("{prefix}[{key}]");
        let k: i64 = key.trim().parse().map_err(|_| MaskError::Schema {
            key: ctx.clone(),
            message: format!("`{key}` is not an integer shift"),
        })?;
        let nrows = rows.len();
        let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
        if nrows != r || rows.iter().any(|row| row.len() != r) {
            return Err(MaskError::DimensionMismatch {
                key: ctx,
                rows: nrows,
                cols: ncols,
                expected: r,
            });
        }
        let mut m = Matrix::zeros(r, r);
        for (i, row) in rows.iter().enumerate() {
            for (j, value) in row.iter().enumerate() {
                m[(i, j)] = eval_coef(value, &format!("{ctx}[{i}][{j}]"))?;
            }
        }
        seq.insert(k, m);
    }
    Ok(seq)
}

/// Parse a mask file from JSON text.
pub fn parse_system(text: &str) -> Result<TwoDirectionSystem, MaskError> {
    let raw: MaskFile = serde_json::from_str(text)?;
    let r = raw.multiplicity;
    if r < 1 {
        return Err(MaskError::Schema {
            key: "multiplicity".into(),
            message: "multiplicity must be >= 1".into(),
        });
    }
    let phi_plus = build_seq(&raw.phi.plus, r, "phi.plus")?;
    let phi_minus = build_seq(&raw.phi.minus, r, "phi.minus")?;
    let mut wavelets = Vec::with_capacity(raw.psi.len());
    for (s, pair) in raw.psi.iter().enumerate() {
        let plus = build_seq(&pair.plus, r, &format!("psi[{s}].plus"))?;
        let minus = build_seq(&pair.minus, r, &format!("psi[{s}].minus"))?;
        wavelets.push(WaveletMask::new(plus, minus));
    }
    TwoDirectionSystem::new(raw.name, raw.dilation, r, phi_plus, phi_minus, wavelets)
}

/// Load and validate a mask file.
pub fn load_system(path: impl AsRef<Path>) -> Result<TwoDirectionSystem, MaskError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MaskError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_system(&text)
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Coefficient of the deduced one-direction block refinement equation:
/// the `2r x 2r` matrix `[[P_k^+, P_k^-], [P_{-k}^-, P_{-k}^+]]`.
pub fn deduced_block_coeff(sys: &TwoDirectionSystem, k: i64) -> Matrix {
    let r = sys.multiplicity();
    let mut out = Matrix::zeros(2 * r, 2 * r);
    let mut put = |bi: usize, bj: usize, m: Option<&Matrix>| {
        if let Some(m) = m {
            out.view_mut((bi * r, bj * r), (r, r)).copy_from(m);
        }
    };
    put(0, 0, sys.phi_plus().get(k));
    put(0, 1, sys.phi_minus().get(k));
    put(1, 0, sys.phi_minus().get(-k));
    put(1, 1, sys.phi_plus().get(-k));
    out
}

/// Condition E test for the scaling mask: the matrix
/// `(1/sqrt(d)) * sum_k [[P_k^+, P_k^-], [P_k^-, P_k^+]]` must have 1 as a
/// simple eigenvalue with every other eigenvalue strictly inside the unit
/// disk.
pub fn condition_e(sys: &TwoDirectionSystem) -> ConditionEReport {
    let r = sys.multiplicity();
    let inv_sqrt_d = 1.0 / sys.sqrt_d();
    let sp = sys.phi_plus().sum() * inv_sqrt_d;
    let sm = sys.phi_minus().sum() * inv_sqrt_d;

    let mut e = Matrix::zeros(2 * r, 2 * r);
    e.view_mut((0, 0), (r, r)).copy_from(&sp);
    e.view_mut((0, r), (r, r)).copy_from(&sm);
    e.view_mut((r, 0), (r, r)).copy_from(&sm);
    e.view_mut((r, r), (r, r)).copy_from(&sp);

    let eigenvalues = linalg::eigenvalues(&e).expect("validated masks have finite entries");
    let near_one = eigenvalues
        .iter()
        .filter(|z| (*z - Complex::new(1.0, 0.0)).norm() <= CONDITION_E_TOL_EIG)
        .count();
    let rest_inside = eigenvalues
        .iter()
        .filter(|z| (*z - Complex::new(1.0, 0.0)).norm() > CONDITION_E_TOL_EIG)
        .all(|z| z.norm() <= 1.0 - CONDITION_E_TOL_GAP);
    let satisfied = near_one == 1 && rest_inside;
    let gap = 1.0 - eigenvalues.get(1).map_or(0.0, |z| z.norm());

    ConditionEReport {
        eigenvalues,
        satisfied,
        gap,
    }
}

/// Integer hull `[a, b]` of the scaling-function support.
///
/// The support interval is the fixed point of the map induced by the
/// refinement equation; it is approached by iterating from
/// `[-N/(d-1), N/(d-1)]`, which always contains it. Endpoints within 1e-9 of
/// an integer are snapped before rounding outward.
pub fn support_hull(sys: &TwoDirectionSystem) -> SupportHull {
    let d = sys.dilation() as f64;
    let n = sys.max_shift() as f64;
    let init = n / (d - 1.0);

    let plus = sys.phi_plus().support();
    let minus = sys.phi_minus().support();

    let (mut lo, mut hi) = (-init, init);
    let mut converged = false;
    for _ in 0..200 {
        let mut new_lo = f64::INFINITY;
        let mut new_hi = f64::NEG_INFINITY;
        if let Some((kmin, kmax)) = plus {
            new_lo = new_lo.min((lo + kmin as f64) / d);
            new_hi = new_hi.max((hi + kmax as f64) / d);
        }
        if let Some((kmin, kmax)) = minus {
            new_lo = new_lo.min((kmin as f64 - hi) / d);
            new_hi = new_hi.max((kmax as f64 - lo) / d);
        }
        let step = (new_lo - lo).abs().max((new_hi - hi).abs());
        lo = new_lo;
        hi = new_hi;
        if step <= 1e-12 {
            converged = true;
            break;
        }
    }
    if !converged {
        lo = -init;
        hi = init;
    }

    SupportHull {
        a: (lo + 1e-9).floor() as i64,
        b: (hi - 1e-9).ceil() as i64,
        converged,
    }
}
