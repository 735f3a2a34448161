//! Finite-difference stencils on uniform grids.
//!
//! These are the pointwise operators the scheme is assembled from. The time
//! stencils include the one-sided second-order derivative
//! `(3 U^n - 4 U^{n-1} + U^{n-2}) / (2 dt)` and its switched variant
//! (backward difference at n = 1, the three-level formula for n >= 2) used to
//! evaluate `u_t` inside the nonlinear term with past data only, which keeps
//! the scheme explicit.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpatialKind {
    Forward,
    Backward,
    Centered,
}

/// Spatial difference of `values` at node `j`. Panics when `j` is outside the
/// stencil's admissible range (contract violation).
#[inline]
pub fn spatial_diff(kind: SpatialKind, values: &[f64], dx: f64, j: usize) -> f64 {
    let last = values.len() - 1;
    match kind {
        SpatialKind::Forward => {
            assert!(j < last, "forward difference needs j <= J-1, got j={j}");
            (values[j + 1] - values[j]) / dx
        }
        SpatialKind::Backward => {
            assert!(j >= 1 && j <= last, "backward difference needs 1 <= j <= J, got j={j}");
            (values[j] - values[j - 1]) / dx
        }
        SpatialKind::Centered => {
            assert!(j >= 1 && j < last, "centered difference needs 1 <= j <= J-1, got j={j}");
            (values[j + 1] - values[j - 1]) / (2.0 * dx)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TemporalKind {
    Forward,
    Backward,
    Centered,
    /// `(3 U^n - 4 U^{n-1} + U^{n-2}) / (2 dt)`.
    Bdf2,
    /// `Bdf2` for n >= 2, `Backward` for n = 1.
    Switched,
}

/// Time levels around one spatial node. Only the levels a given operator
/// needs must be present.
#[derive(Clone, Copy, Debug, Default)]
pub struct TimeHistory {
    /// `U(j, n+1)`, needed by forward/centered.
    pub next: Option<f64>,
    /// `U(j, n)`.
    pub current: f64,
    /// `U(j, n-1)`, needed by backward/centered/bdf2.
    pub prev: Option<f64>,
    /// `U(j, n-2)`, needed by bdf2.
    pub prev2: Option<f64>,
}

/// Temporal difference at time level `n`. Missing history levels are
/// contract violations and panic.
#[inline]
pub fn temporal_diff(kind: TemporalKind, hist: &TimeHistory, dt: f64, n: usize) -> f64 {
    let need = |v: Option<f64>, what: &str| -> f64 {
        v.unwrap_or_else(|| panic!("temporal_diff: missing history level {what}"))
    };
    match kind {
        TemporalKind::Forward => (need(hist.next, "n+1") - hist.current) / dt,
        TemporalKind::Backward => (hist.current - need(hist.prev, "n-1")) / dt,
        TemporalKind::Centered => (need(hist.next, "n+1") - need(hist.prev, "n-1")) / (2.0 * dt),
        TemporalKind::Bdf2 => {
            assert!(n >= 2, "bdf2 needs n >= 2, got n={n}");
            (3.0 * hist.current - 4.0 * need(hist.prev, "n-1") + need(hist.prev2, "n-2"))
                / (2.0 * dt)
        }
        TemporalKind::Switched => {
            assert!(n >= 1, "switched derivative needs n >= 1, got n={n}");
            if n >= 2 {
                temporal_diff(TemporalKind::Bdf2, hist, dt, n)
            } else {
                temporal_diff(TemporalKind::Backward, hist, dt, n)
            }
        }
    }
}

/// The switched time derivative read directly from three consecutive values;
/// `prev2` is ignored at n = 1. This is the form the solver kernels use.
#[inline]
pub fn switched_dt(current: f64, prev: f64, prev2: f64, dt: f64, n: usize) -> f64 {
    if n >= 2 {
        (3.0 * current - 4.0 * prev + prev2) / (2.0 * dt)
    } else {
        (current - prev) / dt
    }
}
