//! Cascade iteration: the independent cross-check for the eigenvalue approach.
//!
//! Starting from the hat function, repeatedly applying the refinement operator
//!
//! ```text
//! f_{n+1}(x) = sqrt(d) sum_k [ P_k^+ f_n(d x - k) + P_k^- f_n(k - d x) ]
//! ```
//!
//! converges to the scaling function. The iteration runs on a fixed dyadic
//! grid; arguments that fall between grid points are linearly interpolated
//! (with an integer dilation on a dyadic grid they always hit exactly, but
//! the lookup does not rely on that). The initial state is scaled so that
//! `m_0^T sum_{integer k} f_0(k) = 1/2`, which makes the limit directly
//! comparable to the normalized eigen-approach table.

use crate::mask::{self, TwoDirectionSystem};
use crate::moments::{self, MomentError};
use crate::Vector;

#[derive(Debug, thiserror::Error)]
pub enum CascadeError {
    #[error("cascade level must be >= 1, got {level}")]
    InvalidLevel { level: u32 },
    #[error("max_iter must be >= 1, got 0")]
    InvalidIterations,
    #[error(transparent)]
    Moments(#[from] MomentError),
}

/// Grid samples of one cascade iterate.
#[derive(Debug, Clone)]
pub struct CascadeState {
    iteration: u32,
    level: u32,
    a: i64,
    b: i64,
    d: i64,
    r: usize,
    values: Vec<Vector>,
    delta: f64,
    converged: bool,
}

impl CascadeState {
    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.a, self.b)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step_size(&self) -> f64 {
        (self.d as f64).powi(-(self.level as i32))
    }

    pub fn x(&self, i: usize) -> f64 {
        self.a as f64 + i as f64 * self.step_size()
    }

    pub fn value(&self, i: usize) -> &Vector {
        &self.values[i]
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    /// Sup-norm change of the last iteration (`inf` before the first step).
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Value at an arbitrary coordinate: zero outside `[a, b]`, exact lookup
    /// on grid points, linear interpolation between them.
    fn lookup(&self, t: f64) -> Vector {
        if t < self.a as f64 || t > self.b as f64 {
            return Vector::zeros(self.r);
        }
        let u = (t - self.a as f64) * (self.d as f64).powi(self.level as i32);
        let nearest = u.round();
        if (u - nearest).abs() <= 1e-9 {
            let i = (nearest as usize).min(self.values.len() - 1);
            return self.values[i].clone();
        }
        let i0 = u.floor() as usize;
        let w = u - i0 as f64;
        &self.values[i0] * (1.0 - w) + &self.values[i0 + 1] * w
    }
}

/// Initial cascade state: the hat function `max(1 - |x|, 0)` in every
/// component, scaled to the normalization target.
pub fn cascade_init(sys: &TwoDirectionSystem, level: u32) -> Result<CascadeState, CascadeError> {
    if level < 1 {
        return Err(CascadeError::InvalidLevel { level });
    }
    let hull = mask::support_hull(sys);
    let (a, b) = (hull.a, hull.b);
    let d = sys.dilation();
    let r = sys.multiplicity();
    let m0 = moments::zeroth_moment(sys)?;

    let npts = ((b - a) * d.pow(level) + 1) as usize;
    let step = (d as f64).powi(-(level as i32));
    let mut values: Vec<Vector> = (0..npts)
        .map(|i| {
            let x = a as f64 + i as f64 * step;
            Vector::from_element(r, (1.0 - x.abs()).max(0.0))
        })
        .collect();

    // scale so m_0^T sum over the integer grid points is 1/2
    let stride = d.pow(level) as usize;
    let mut integer_sum = Vector::zeros(r);
    for i in (0..npts).step_by(stride) {
        integer_sum += &values[i];
    }
    let denominator = m0.dot(&integer_sum);
    if denominator.abs() >= 1e-12 {
        let scale = 0.5 / denominator;
        for v in &mut values {
            *v *= scale;
        }
    }

    Ok(CascadeState {
        iteration: 0,
        level,
        a,
        b,
        d,
        r,
        values,
        delta: f64::INFINITY,
        converged: false,
    })
}

/// One application of the refinement operator on the grid.
pub fn cascade_step(sys: &TwoDirectionSystem, state: &CascadeState) -> CascadeState {
    let d = state.d as f64;
    let sqrt_d = sys.sqrt_d();
    let mut values = Vec::with_capacity(state.len());
    let mut delta = 0.0f64;
    for i in 0..state.len() {
        let x = state.x(i);
        let mut acc = Vector::zeros(state.r);
        for (k, p) in sys.phi_plus().iter() {
            acc += p * state.lookup(d * x - k as f64);
        }
        for (k, p) in sys.phi_minus().iter() {
            acc += p * state.lookup(k as f64 - d * x);
        }
        let new = acc * sqrt_d;
        delta = delta.max((&new - &state.values[i]).amax());
        values.push(new);
    }
    CascadeState {
        iteration: state.iteration + 1,
        values,
        delta,
        converged: state.converged,
        ..*state
    }
}

/// Iterate until the sup-norm change drops to `tol` or `max_iter` is reached.
/// Non-convergence is reported in the returned state, not as an error.
pub fn cascade_run(
    sys: &TwoDirectionSystem,
    level: u32,
    max_iter: u32,
    tol: f64,
) -> Result<CascadeState, CascadeError> {
    if max_iter < 1 {
        return Err(CascadeError::InvalidIterations);
    }
    let mut state = cascade_init(sys, level)?;
    for _ in 0..max_iter {
        state = cascade_step(sys, &state);
        if state.delta <= tol {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}
