//! Discrete energies and the summation-by-parts identities used to study the
//! interface iteration.
//!
//! With the bilinear form
//! `a(V, W) = dx ( sum_{j=1}^{J} dxm V(j) dxm W(j) + sum_{j=1}^{J-1} V(j) W(j) )`
//! the energy attached to the time slab `(n, n+1)` is
//!
//! ```text
//! E_K(n) = dx * sum_{j=1}^{J-1} (dtp V(j,n))^2
//!        + (dx/2) [ (dtp V(0,n))^2 + (dtp V(J,n))^2 ]
//! E_P(n) = a(V(., n+1), V(., n))
//! E(n)   = E_K(n) + E_P(n)
//! ```
//!
//! The half-weighted edge terms in `E_K` are not cosmetic: they are exactly
//! what makes the inverse inequality `a(W, W) <= (4/dx^2 + 1) E_K` sharp, so
//! that `E(n) >= (1 - dt^2/dx^2 - dt^2/4) E_K(n)` holds for every mesh
//! function, and they are the unique kinetic weights for which the energy
//! identity below closes exactly (solving for the quadratic form from the
//! summation-by-parts computation leaves no freedom).
//!
//! For any `V` with `(dtp dtm - dxp dxm + 1) V = F` at interior nodes
//! `1..=J-1` (arbitrary boundary columns) and any `n >= 1`:
//!
//! ```text
//! E(n) - E(n-1) + (dt/2) [ (Tt+ V(0,n))^2 + (Tt- V(J,n))^2 ]
//!   = (dt/2) [ (T- V(0,n))^2 + (T+ V(J,n))^2 ]
//!   + 2 dt dx * sum_{j=1}^{J-1} F(j,n) dt0 V(j,n)
//! ```
//!
//! where `T-/T+` are the linear incoming operators and `Tt+/Tt-` the linear
//! extraction operators. The source sum runs over the interior stencil
//! support `j = 1..=J-1`; this is the range under which the identity closes
//! to round-off (and exactly, in exact arithmetic).
//!
//! At `n = 0` the same identity holds in the ghost-level reading
//! `V(., -1) := V(., 1) - 2 dt Q` (so `dt0 V(j, 0) = Q(j)`), provided the
//! interior level 1 comes from the second-order initial scheme. Simplified,
//! it becomes
//!
//! ```text
//! 2 dx [ sum_{j=1}^{J-1} Q(j) (dtp V(j,0) - Q(j))
//!        + (1/2) Q(0) (dtp V(0,0) - Q(0)) + (1/2) Q(J) (dtp V(J,0) - Q(J)) ]
//! + dt a(P, Q)
//! + (dt/4) [ (Tg+ )^2 + (Tg-)^2 - (Tg_in-)^2 - (Tg_in+)^2 ]
//!   = dt dx * sum_{j=1}^{J-1} F(j,0) Q(j)
//! ```
//!
//! with the ghost forms `Tg_in- = Q(0) - dxp P(0) + (dx/dt)(dtp V(0,0) - Q(0))`
//! and so on.

use crate::model::{InitialData, MeshSpec, NonlinearitySpec, BoundaryNonlinearity};
use crate::solver::SpaceTimeField;
use crate::Result;

/// Energy of one time slab.
#[derive(Clone, Copy, Debug)]
pub struct EnergySnapshot {
    /// Lower time level of the slab.
    pub level: usize,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// `a(V, W) = dx ( sum_{j=1}^{J} dxm V dxm W + sum_{j=1}^{J-1} V W )`.
/// Symmetric; summed in ascending node order.
pub fn bilinear_a(v: &[f64], w: &[f64], dx: f64) -> f64 {
    assert_eq!(v.len(), w.len(), "bilinear_a: length mismatch");
    let last = v.len() - 1;
    let mut grad = 0.0;
    for j in 1..=last {
        grad += (v[j] - v[j - 1]) * (w[j] - w[j - 1]);
    }
    let mut mass = 0.0;
    for j in 1..last {
        mass += v[j] * w[j];
    }
    dx * (grad / (dx * dx) + mass)
}

/// Slab energy from two consecutive levels (`lower` = level n,
/// `upper` = level n+1).
pub fn staggered_energy_levels(lower: &[f64], upper: &[f64], dx: f64, dt: f64) -> EnergySnapshot {
    assert_eq!(lower.len(), upper.len());
    let last = lower.len() - 1;
    let mut kin = 0.0;
    for j in 1..last {
        let w = (upper[j] - lower[j]) / dt;
        kin += w * w;
    }
    let w0 = (upper[0] - lower[0]) / dt;
    let wl = (upper[last] - lower[last]) / dt;
    let kinetic = dx * kin + 0.5 * dx * (w0 * w0 + wl * wl);
    let potential = bilinear_a(upper, lower, dx);
    EnergySnapshot {
        level: 0,
        kinetic,
        potential,
        total: kinetic + potential,
    }
}

/// Energy of the slab `(n, n+1)`; `n <= N` (level `N+1` is the internal
/// extension).
pub fn discrete_energy(field: &SpaceTimeField, n: usize) -> EnergySnapshot {
    let mut snap = staggered_energy_levels(field.level(n), field.level(n + 1), field.dx, field.dt);
    snap.level = n;
    snap
}

/// Slab energy restricted to global nodes `lo..=hi` (the range is treated as
/// its own domain, edge half-weights at `lo` and `hi`).
pub fn staggered_energy_range(
    field: &SpaceTimeField,
    n: usize,
    lo: usize,
    hi: usize,
) -> EnergySnapshot {
    let mut snap = staggered_energy_levels(
        &field.level(n)[lo..=hi],
        &field.level(n + 1)[lo..=hi],
        field.dx,
        field.dt,
    );
    snap.level = n;
    snap
}

// ---------------------------------------------------------------------------
// Auxiliary linear problem (mass term + source) and its energy identity
// ---------------------------------------------------------------------------

/// Source values `F(j, n)` for `0 <= n <= N`.
#[derive(Clone, Debug)]
pub struct SourceTerm {
    values: Vec<f64>,
    nodes: usize,
}

impl SourceTerm {
    pub fn from_fn(mesh: &MeshSpec, f: impl Fn(usize, usize) -> f64) -> Self {
        let nodes = mesh.intervals + 1;
        let mut values = vec![0.0; nodes * (mesh.steps + 1)];
        for n in 0..=mesh.steps {
            for j in 0..nodes {
                values[n * nodes + j] = f(j, n);
            }
        }
        SourceTerm { values, nodes }
    }

    pub fn zero(mesh: &MeshSpec) -> Self {
        Self::from_fn(mesh, |_, _| 0.0)
    }

    #[inline]
    pub fn at(&self, j: usize, n: usize) -> f64 {
        self.values[n * self.nodes + j]
    }
}

/// Explicit marching scheme for `(dtp dtm - dxp dxm + 1) V = F` with the
/// linear characteristic conditions `T- V(0,.) = H-`, `T+ V(J,.) = H+` and
/// second-order initial step. Produces levels `0..=N+1`.
pub fn solve_linear_auxiliary(
    mesh: &MeshSpec,
    init: &InitialData,
    source: &SourceTerm,
    h_minus: &[f64],
    h_plus: &[f64],
) -> Result<SpaceTimeField> {
    mesh.require_cfl()?;
    assert_eq!(h_minus.len(), mesh.steps + 1);
    assert_eq!(h_plus.len(), mesh.steps + 1);
    let (dx, dt) = (mesh.dx, mesh.dt);
    let last = mesh.intervals;
    let steps = mesh.steps;
    let mut field = SpaceTimeField::zeros(mesh);
    let p = &init.position;
    let q = &init.velocity;
    for j in 0..=last {
        field.set_raw(j, 0, p[j]);
    }
    for n in 0..=steps {
        if n == 0 {
            for j in 1..last {
                let lap = (p[j + 1] - 2.0 * p[j] + p[j - 1]) / (dx * dx);
                let v = p[j] + dt * q[j] + 0.5 * dt * dt * (lap - p[j] + source.at(j, 0));
                field.set_raw(j, 1, v);
            }
            let c0 = 1.0 / dt + dx / (dt * dt);
            let dxp = (p[1] - p[0]) / dx;
            field.set_raw(0, 1, (h_minus[0] + c0 * p[0] + dxp + (dx / dt) * q[0]) / c0);
            let dxm = (p[last] - p[last - 1]) / dx;
            field.set_raw(last, 1, (h_plus[0] + c0 * p[last] - dxm + (dx / dt) * q[last]) / c0);
        } else {
            for j in 1..last {
                let lap =
                    (field.at(j + 1, n) - 2.0 * field.at(j, n) + field.at(j - 1, n)) / (dx * dx);
                let v = 2.0 * field.at(j, n) - field.at(j, n - 1)
                    + dt * dt * (lap - field.at(j, n) + source.at(j, n.min(steps)));
                field.set_raw(j, n + 1, v);
            }
            let c = 1.0 / (2.0 * dt) + dx / (2.0 * dt * dt);
            let dxp = (field.at(1, n) - field.at(0, n)) / dx;
            let v0 = (h_minus[n] + field.at(0, n - 1) / (2.0 * dt) + dxp
                + 0.5 * dx * (2.0 * field.at(0, n) - field.at(0, n - 1)) / (dt * dt))
                / c;
            field.set_raw(0, n + 1, v0);
            let dxm = (field.at(last, n) - field.at(last - 1, n)) / dx;
            let vl = (h_plus[n] + field.at(last, n - 1) / (2.0 * dt) - dxm
                + 0.5 * dx * (2.0 * field.at(last, n) - field.at(last, n - 1)) / (dt * dt))
                / c;
            field.set_raw(last, n + 1, vl);
        }
    }
    Ok(field)
}

// linear operator evaluations at n >= 1
fn linear_ops(field: &SpaceTimeField, n: usize) -> (f64, f64, f64, f64) {
    let (dx, dt) = (field.dx, field.dt);
    let last = field.node_count() - 1;
    let dt0_0 = (field.at(0, n + 1) - field.at(0, n - 1)) / (2.0 * dt);
    let dtt_0 = (field.at(0, n + 1) - 2.0 * field.at(0, n) + field.at(0, n - 1)) / (dt * dt);
    let dxp_0 = (field.at(1, n) - field.at(0, n)) / dx;
    let dt0_l = (field.at(last, n + 1) - field.at(last, n - 1)) / (2.0 * dt);
    let dtt_l = (field.at(last, n + 1) - 2.0 * field.at(last, n) + field.at(last, n - 1)) / (dt * dt);
    let dxm_l = (field.at(last, n) - field.at(last - 1, n)) / dx;
    let t_minus = dt0_0 - dxp_0 + 0.5 * dx * dtt_0;
    let tt_plus = dt0_0 + dxp_0 - 0.5 * dx * dtt_0;
    let t_plus = dt0_l + dxm_l + 0.5 * dx * dtt_l;
    let tt_minus = dt0_l - dxm_l - 0.5 * dx * dtt_l;
    (t_minus, t_plus, tt_plus, tt_minus)
}

/// |LHS - RHS| of the energy identity at time level `n` (see module docs) for
/// a field satisfying the auxiliary linear scheme with source `F`. For a true
/// solution of the interior scheme this is round-off only; for anything else
/// it is a meaningful defect, no error is raised.
pub fn energy_identity_residual(
    field: &SpaceTimeField,
    source: &SourceTerm,
    init: &InitialData,
    n: usize,
) -> f64 {
    let (dx, dt) = (field.dx, field.dt);
    let last = field.node_count() - 1;
    if n == 0 {
        let p = &init.position;
        let q = &init.velocity;
        let dtp = |j: usize| (field.at(j, 1) - field.at(j, 0)) / dt;
        let mut qsum = 0.5 * q[0] * (dtp(0) - q[0]) + 0.5 * q[last] * (dtp(last) - q[last]);
        for j in 1..last {
            qsum += q[j] * (dtp(j) - q[j]);
        }
        let dxp0 = (p[1] - p[0]) / dx;
        let dxml = (p[last] - p[last - 1]) / dx;
        let tg_in_minus = q[0] - dxp0 + (dx / dt) * (dtp(0) - q[0]);
        let tg_out_plus = q[0] + dxp0 - (dx / dt) * (dtp(0) - q[0]);
        let tg_in_plus = q[last] + dxml + (dx / dt) * (dtp(last) - q[last]);
        let tg_out_minus = q[last] - dxml - (dx / dt) * (dtp(last) - q[last]);
        let mut src = 0.0;
        for j in 1..last {
            src += source.at(j, 0) * q[j];
        }
        let lhs = 2.0 * dx * qsum
            + dt * bilinear_a(p, q, dx)
            + 0.25 * dt * (tg_out_plus * tg_out_plus + tg_out_minus * tg_out_minus)
            - 0.25 * dt * (tg_in_minus * tg_in_minus + tg_in_plus * tg_in_plus);
        (lhs - dt * dx * src).abs()
    } else {
        let e_now = discrete_energy(field, n);
        let e_prev = discrete_energy(field, n - 1);
        let (t_minus, t_plus, tt_plus, tt_minus) = linear_ops(field, n);
        let mut src = 0.0;
        for j in 1..last {
            let dt0 = (field.at(j, n + 1) - field.at(j, n - 1)) / (2.0 * dt);
            src += source.at(j, n) * dt0;
        }
        let lhs = e_now.total - e_prev.total + 0.5 * dt * (tt_plus * tt_plus + tt_minus * tt_minus);
        let rhs = 0.5 * dt * (t_minus * t_minus + t_plus * t_plus) + 2.0 * dt * dx * src;
        (lhs - rhs).abs()
    }
}

// ---------------------------------------------------------------------------
// Interface remainder of the error equation
// ---------------------------------------------------------------------------

/// One evaluation of the interface remainder quantities of the error
/// equation at time level `n`.
#[derive(Clone, Copy, Debug)]
pub struct RemainderRecord {
    pub subdomain: usize,
    pub iteration: usize,
    pub level: usize,
    /// The boundary remainder `R`.
    pub remainder: f64,
    /// `2 dx sum_j F(j,n) dt0 e(j,n) + R/2`; the convergence hypothesis
    /// bounds this by `M * E(e)(n)`.
    pub lhs: f64,
    /// `lhs / E(e)(n)`, `+inf` when the energy vanishes but lhs does not.
    pub ratio: f64,
}

fn edge_f_args(
    field: &SpaceTimeField,
    init: &InitialData,
    j: usize,
    left: bool,
    n: usize,
) -> (f64, f64, f64) {
    let (dx, dt) = (field.dx, field.dt);
    if n == 0 {
        let p = &init.position;
        let q = &init.velocity;
        let ux = if left {
            (p[1] - p[0]) / dx
        } else {
            (p[j] - p[j - 1]) / dx
        };
        (p[j], q[j], ux)
    } else {
        let cur = field.level(n);
        let prev = field.level(n - 1);
        let prev2 = if n >= 2 { field.level(n - 2) } else { prev };
        let ux = if left {
            (cur[1] - cur[0]) / dx
        } else {
            (cur[j] - cur[j - 1]) / dx
        };
        (
            cur[j],
            crate::fd::switched_dt(cur[j], prev[j], prev2[j], dt, n),
            ux,
        )
    }
}

/// Remainder quantities comparing one iterate against the reference solution
/// restricted to the same subdomain grid; `1 <= n <= N`.
#[allow(clippy::too_many_arguments)]
pub fn swr_remainder(
    iterate: &SpaceTimeField,
    reference: &SpaceTimeField,
    f: &NonlinearitySpec,
    g_minus: &BoundaryNonlinearity,
    g_plus: &BoundaryNonlinearity,
    init: &InitialData,
    subdomain: usize,
    iteration: usize,
    n: usize,
) -> RemainderRecord {
    assert!(n >= 1 && n <= iterate.step_count());
    assert_eq!(iterate.node_count(), reference.node_count());
    let (dx, dt) = (iterate.dx, iterate.dt);
    let last = iterate.node_count() - 1;

    // error levels n-1, n, n+1
    let err = |j: usize, m: usize| iterate.at(j, m) - reference.at(j, m);

    // edge f-differences with each field's own arguments
    let fdiff = |j: usize, left: bool| {
        let (u1, ut1, ux1) = edge_f_args(iterate, init, j, left, n);
        let (u0, ut0, ux0) = edge_f_args(reference, init, j, left, n);
        f.eval(u1, ut1, ux1) - f.eval(u0, ut0, ux0)
    };
    let gdiff = |g: &BoundaryNonlinearity, j: usize| g.eval(iterate.at(j, n)) - g.eval(reference.at(j, n));

    let g_in_minus = -0.5 * dx * fdiff(0, true) + gdiff(g_minus, 0);
    let g_out_plus = 0.5 * dx * fdiff(0, true) + gdiff(g_plus, 0);
    let g_in_plus = -0.5 * dx * fdiff(last, false) + gdiff(g_plus, last);
    let g_out_minus = 0.5 * dx * fdiff(last, false) + gdiff(g_minus, last);

    // linear operators on the error field at level n
    let dt0e = |j: usize| (err(j, n + 1) - err(j, n - 1)) / (2.0 * dt);
    let dtte = |j: usize| (err(j, n + 1) - 2.0 * err(j, n) + err(j, n - 1)) / (dt * dt);
    let dxpe = (err(1, n) - err(0, n)) / dx;
    let dxme = (err(last, n) - err(last - 1, n)) / dx;
    let t_minus = dt0e(0) - dxpe + 0.5 * dx * dtte(0);
    let tt_plus = dt0e(0) + dxpe - 0.5 * dx * dtte(0);
    let t_plus = dt0e(last) + dxme + 0.5 * dx * dtte(last);
    let tt_minus = dt0e(last) - dxme - 0.5 * dx * dtte(last);

    let remainder = g_out_plus * (g_out_plus + 2.0 * tt_plus)
        + g_out_minus * (g_out_minus + 2.0 * tt_minus)
        - g_in_minus * (g_in_minus + 2.0 * t_minus)
        - g_in_plus * (g_in_plus + 2.0 * t_plus);

    // interior source of the error equation: F = f(iterate) - f(reference) + e
    let mut src = 0.0;
    {
        let cur1 = iterate.level(n);
        let prev1 = iterate.level(n - 1);
        let prev21 = if n >= 2 { iterate.level(n - 2) } else { prev1 };
        let cur0 = reference.level(n);
        let prev0 = reference.level(n - 1);
        let prev20 = if n >= 2 { reference.level(n - 2) } else { prev0 };
        for j in 1..last {
            let ut1 = crate::fd::switched_dt(cur1[j], prev1[j], prev21[j], dt, n);
            let ux1 = (cur1[j + 1] - cur1[j - 1]) / (2.0 * dx);
            let ut0 = crate::fd::switched_dt(cur0[j], prev0[j], prev20[j], dt, n);
            let ux0 = (cur0[j + 1] - cur0[j - 1]) / (2.0 * dx);
            let big_f = f.eval(cur1[j], ut1, ux1) - f.eval(cur0[j], ut0, ux0) + err(j, n);
            src += big_f * dt0e(j);
        }
    }
    let lhs = 2.0 * dx * src + 0.5 * remainder;

    let lower: Vec<f64> = (0..=last).map(|j| err(j, n)).collect();
    let upper: Vec<f64> = (0..=last).map(|j| err(j, n + 1)).collect();
    let energy = staggered_energy_levels(&lower, &upper, dx, dt).total;
    let ratio = if energy.abs() > 1e-300 {
        lhs / energy
    } else if lhs.abs() <= 1e-300 {
        0.0
    } else {
        f64::INFINITY
    };

    RemainderRecord {
        subdomain,
        iteration,
        level: n,
        remainder,
        lhs,
        ratio,
    }
}
