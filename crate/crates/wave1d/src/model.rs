//! Domain vocabulary: meshes, subdomain layouts, nonlinearity and
//! transmission specifications, initial data sampling.
//!
//! The right-hand side of the wave equation is kept in the structured form
//! `f(u, u_t, u_x) = f1(u) + f2(u)*u_t + f3(u)*u_x`. Keeping the three
//! coefficient functions separate is what makes the characteristic
//! transmission conditions computable: the nonlinear boundary corrections are
//! `g+(u) = -1/2 * int_0^u (f2 - f3)` and `g-(u) = -1/2 * int_0^u (f2 + f3)`,
//! and the interface-iteration equivalence with the single-domain solution
//! requires `f` affine in `u_x`.

use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Shared scalar function of one real variable.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

/// Uniform space-time grid on `[a_minus, a_plus] x [0, t_final]` with
/// `intervals + 1` space nodes and `steps + 1` time levels.
#[derive(Clone, Copy, Debug)]
pub struct MeshSpec {
    pub a_minus: f64,
    pub a_plus: f64,
    /// Number of space intervals (J).
    pub intervals: usize,
    /// Number of time intervals (N).
    pub steps: usize,
    pub t_final: f64,
    pub dx: f64,
    pub dt: f64,
}

impl MeshSpec {
    pub fn new(
        a_minus: f64,
        a_plus: f64,
        intervals: usize,
        steps: usize,
        t_final: f64,
    ) -> Result<Self> {
        let ordered = a_plus > a_minus && t_final > 0.0; // also rejects NaN
        if !ordered || intervals < 2 || steps < 2 {
            return Err(Error::Config(format!(
                "invalid mesh: [{a_minus}, {a_plus}] x [0, {t_final}], J={intervals}, N={steps}"
            )));
        }
        let dx = (a_plus - a_minus) / intervals as f64;
        let dt = t_final / steps as f64;
        let mesh = MeshSpec {
            a_minus,
            a_plus,
            intervals,
            steps,
            t_final,
            dx,
            dt,
        };
        debug_assert!((mesh.dx * intervals as f64 - (a_plus - a_minus)).abs() <= 1e-12 * (1.0 + a_plus.abs()));
        debug_assert!((mesh.dt * steps as f64 - t_final).abs() <= 1e-12 * (1.0 + t_final.abs()));
        Ok(mesh)
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.a_minus + j as f64 * self.dx
    }

    #[inline]
    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn cfl_margin(&self) -> f64 {
        cfl_margin(self.dt, self.dx)
    }

    /// The solvers refuse to run on meshes that violate the CFL condition
    /// `dt^2/dx^2 + dt^2/4 < 1`.
    pub fn require_cfl(&self) -> Result<()> {
        let margin = self.cfl_margin();
        if margin <= 0.0 {
            return Err(Error::CflViolation {
                dt: self.dt,
                dx: self.dx,
                margin,
            });
        }
        Ok(())
    }

    /// Mesh for the sub-interval spanning global nodes `lo..=hi`.
    pub fn submesh(&self, lo: usize, hi: usize) -> MeshSpec {
        assert!(lo < hi && hi <= self.intervals, "bad submesh range {lo}..={hi}");
        MeshSpec {
            a_minus: self.node(lo),
            a_plus: self.node(hi),
            intervals: hi - lo,
            steps: self.steps,
            t_final: self.t_final,
            dx: self.dx,
            dt: self.dt,
        }
    }
}

/// `1 - (dt^2/dx^2 + dt^2/4)`; positive iff the CFL condition holds.
#[inline]
pub fn cfl_margin(dt: f64, dx: f64) -> f64 {
    1.0 - (dt * dt / (dx * dx) + dt * dt / 4.0)
}

// ---------------------------------------------------------------------------
// Subdomain layouts
// ---------------------------------------------------------------------------

/// Decomposition of the global mesh into subdomains, either nonoverlapping
/// (interface iteration with transmission conditions) or two overlapping
/// subdomains (classical Dirichlet exchange).
///
/// All subdomain boundaries must sit exactly on grid nodes; construction
/// fails rather than snapping.
#[derive(Clone, Debug)]
pub enum SubdomainLayout {
    /// `boundaries[i]..boundaries[i+1]` are the global node ranges of the
    /// subdomains; `boundaries[0] = 0` and `boundaries.last() = J`.
    Nonoverlapping { boundaries: Vec<usize> },
    /// Two subdomains `[0, split + overlap_cells]` and `[split, J]`.
    Overlapping {
        split: usize,
        overlap_cells: usize,
        total: usize,
    },
}

fn grid_index(mesh: &MeshSpec, x: f64, what: &str) -> Result<usize> {
    let raw = (x - mesh.a_minus) / mesh.dx;
    let m = raw.round();
    let tol = 1e-9 * (1.0 + x.abs() + mesh.a_plus.abs());
    if (mesh.a_minus + m * mesh.dx - x).abs() > tol || m < 0.0 || m > mesh.intervals as f64 {
        return Err(Error::Config(format!(
            "{what} at x={x} does not lie on the grid (dx={})",
            mesh.dx
        )));
    }
    Ok(m as usize)
}

impl SubdomainLayout {
    /// Nonoverlapping layout with the given interior interface positions.
    pub fn nonoverlapping(mesh: &MeshSpec, interior_interfaces: &[f64]) -> Result<Self> {
        let mut boundaries = vec![0usize];
        let mut prev = 0usize;
        for &x in interior_interfaces {
            let m = grid_index(mesh, x, "interface")?;
            if m <= prev || m >= mesh.intervals {
                return Err(Error::Config(format!(
                    "interface at x={x} must be strictly inside the domain and ordered"
                )));
            }
            boundaries.push(m);
            prev = m;
        }
        boundaries.push(mesh.intervals);
        Ok(SubdomainLayout::Nonoverlapping { boundaries })
    }

    /// Two overlapping subdomains: left one ends `overlap` past `split_x`.
    pub fn overlapping(mesh: &MeshSpec, split_x: f64, overlap: f64) -> Result<Self> {
        let split = grid_index(mesh, split_x, "split point")?;
        let cells_raw = overlap / mesh.dx;
        let cells = cells_raw.round();
        if (cells * mesh.dx - overlap).abs() > 1e-9 * (1.0 + overlap.abs()) || cells < 1.0 {
            return Err(Error::Config(format!(
                "overlap {overlap} is not a positive multiple of dx={}",
                mesh.dx
            )));
        }
        let cells = cells as usize;
        if split == 0 || split + cells >= mesh.intervals {
            return Err(Error::Config(format!(
                "overlapping layout out of range: split node {split}, {cells} overlap cells"
            )));
        }
        Ok(SubdomainLayout::Overlapping {
            split,
            overlap_cells: cells,
            total: mesh.intervals,
        })
    }

    pub fn subdomain_count(&self) -> usize {
        match self {
            SubdomainLayout::Nonoverlapping { boundaries } => boundaries.len() - 1,
            SubdomainLayout::Overlapping { .. } => 2,
        }
    }

    /// Global node range (inclusive) of subdomain `i`.
    pub fn node_range(&self, i: usize) -> (usize, usize) {
        match self {
            SubdomainLayout::Nonoverlapping { boundaries } => {
                assert!(i + 1 < boundaries.len(), "subdomain index {i} out of range");
                (boundaries[i], boundaries[i + 1])
            }
            SubdomainLayout::Overlapping {
                split,
                overlap_cells,
                total,
            } => match i {
                0 => (0, split + overlap_cells),
                1 => (*split, *total),
                _ => panic!("subdomain index {i} out of range"),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Nonlinearity
// ---------------------------------------------------------------------------

/// Antiderivative of one coefficient function, vanishing at 0.
#[derive(Clone)]
pub enum Antiderivative {
    ClosedForm(ScalarFn),
    /// Integrate the matching coefficient from 0 adaptively.
    Quadrature,
}

#[derive(Clone)]
enum NonlinearForm {
    /// f = 0.
    Zero,
    /// f = u^3.
    CubicU,
    /// f = u^2 * u_t.
    SquareUt,
    /// f = u^2 * u_x.
    SquareUx,
    Custom {
        f: [ScalarFn; 3],
        antiderivatives: [Antiderivative; 3],
    },
}

/// Structured right-hand side `f(u, u_t, u_x) = f1(u) + f2(u) u_t + f3(u) u_x`.
#[derive(Clone)]
pub struct NonlinearitySpec {
    label: String,
    form: NonlinearForm,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NonlinearitySpec({})", self.label)
    }
}

impl NonlinearitySpec {
    /// f = 0 (the linear wave equation).
    pub fn zero() -> Self {
        NonlinearitySpec {
            label: "linear".into(),
            form: NonlinearForm::Zero,
        }
    }

    /// f = u^3.
    pub fn cubic_u() -> Self {
        NonlinearitySpec {
            label: "u3".into(),
            form: NonlinearForm::CubicU,
        }
    }

    /// f = u^2 u_t.
    pub fn square_ut() -> Self {
        NonlinearitySpec {
            label: "u2ut".into(),
            form: NonlinearForm::SquareUt,
        }
    }

    /// f = u^2 u_x.
    pub fn square_ux() -> Self {
        NonlinearitySpec {
            label: "u2ux".into(),
            form: NonlinearForm::SquareUx,
        }
    }

    /// Custom structured coefficients. `f1(0) = 0` is required; the
    /// antiderivatives must vanish at 0.
    pub fn custom(
        label: impl Into<String>,
        f: [ScalarFn; 3],
        antiderivatives: [Antiderivative; 3],
    ) -> Result<Self> {
        let spec = NonlinearitySpec {
            label: label.into(),
            form: NonlinearForm::Custom { f, antiderivatives },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "u3" => Ok(Self::cubic_u()),
            "u2ut" => Ok(Self::square_ut()),
            "u2ux" => Ok(Self::square_ux()),
            "linear" | "zero" => Ok(Self::zero()),
            other => Err(Error::Config(format!("unknown nonlinearity tag `{other}`"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `f(u, u_t, u_x)`.
    #[inline]
    pub fn eval(&self, u: f64, ut: f64, ux: f64) -> f64 {
        match &self.form {
            NonlinearForm::Zero => 0.0,
            NonlinearForm::CubicU => u * u * u,
            NonlinearForm::SquareUt => u * u * ut,
            NonlinearForm::SquareUx => u * u * ux,
            NonlinearForm::Custom { f, .. } => (f[0])(u) + (f[1])(u) * ut + (f[2])(u) * ux,
        }
    }

    pub fn f1(&self, u: f64) -> f64 {
        match &self.form {
            NonlinearForm::Zero | NonlinearForm::SquareUt | NonlinearForm::SquareUx => 0.0,
            NonlinearForm::CubicU => u * u * u,
            NonlinearForm::Custom { f, .. } => (f[0])(u),
        }
    }

    pub fn f2(&self, u: f64) -> f64 {
        match &self.form {
            NonlinearForm::SquareUt => u * u,
            NonlinearForm::Custom { f, .. } => (f[1])(u),
            _ => 0.0,
        }
    }

    pub fn f3(&self, u: f64) -> f64 {
        match &self.form {
            NonlinearForm::SquareUx => u * u,
            NonlinearForm::Custom { f, .. } => (f[2])(u),
            _ => 0.0,
        }
    }

    /// Antiderivative of `f2` vanishing at 0.
    pub fn f2_antiderivative(&self, u: f64) -> f64 {
        match &self.form {
            NonlinearForm::SquareUt => u * u * u / 3.0,
            NonlinearForm::Custom { f, antiderivatives } => {
                eval_antiderivative(&antiderivatives[1], &f[1], u)
            }
            _ => 0.0,
        }
    }

    /// Antiderivative of `f3` vanishing at 0.
    pub fn f3_antiderivative(&self, u: f64) -> f64 {
        match &self.form {
            NonlinearForm::SquareUx => u * u * u / 3.0,
            NonlinearForm::Custom { f, antiderivatives } => {
                eval_antiderivative(&antiderivatives[2], &f[2], u)
            }
            _ => 0.0,
        }
    }

    fn is_custom(&self) -> bool {
        matches!(self.form, NonlinearForm::Custom { .. })
    }

    /// Check `f1(0) = 0` and that each supplied antiderivative differentiates
    /// back to its coefficient at a handful of probe points.
    pub fn validate(&self) -> Result<()> {
        if self.f1(0.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "nonlinearity `{}`: f1(0) = {} must vanish",
                self.label,
                self.f1(0.0)
            )));
        }
        if !self.is_custom() {
            return Ok(());
        }
        for (name, a0) in [
            ("F2", self.f2_antiderivative(0.0)),
            ("F3", self.f3_antiderivative(0.0)),
        ] {
            if a0.abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "nonlinearity `{}`: antiderivative {name}(0) = {a0} must vanish",
                    self.label
                )));
            }
        }
        let probes = [-1.75, -1.0, -0.4, 0.3, 0.9, 1.6];
        let h = 1e-5;
        for &u in &probes {
            for (name, fj, aj) in [
                ("F2", self.f2(u), (self.f2_antiderivative(u + h), self.f2_antiderivative(u - h))),
                ("F3", self.f3(u), (self.f3_antiderivative(u + h), self.f3_antiderivative(u - h))),
            ] {
                let slope = (aj.0 - aj.1) / (2.0 * h);
                if (slope - fj).abs() > 1e-8 * (1.0 + fj.abs()) {
                    return Err(Error::Config(format!(
                        "nonlinearity `{}`: {name}'({u}) = {slope} does not match the coefficient {fj}",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }
}

fn eval_antiderivative(a: &Antiderivative, f: &ScalarFn, u: f64) -> f64 {
    match a {
        Antiderivative::ClosedForm(af) => af(u),
        Antiderivative::Quadrature => integrate_adaptive(f.as_ref(), 0.0, u, 1e-12),
    }
}

// ---------------------------------------------------------------------------
// Transmission conditions
// ---------------------------------------------------------------------------

/// Nonlinear correction applied by a boundary operator at one edge.
#[derive(Clone)]
pub enum BoundaryNonlinearity {
    Zero,
    /// `c * u^3`.
    Cubic(f64),
    Custom(ScalarFn),
}

impl BoundaryNonlinearity {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            BoundaryNonlinearity::Zero => 0.0,
            BoundaryNonlinearity::Cubic(c) => c * u * u * u,
            BoundaryNonlinearity::Custom(g) => g(u),
        }
    }
}

impl fmt::Debug for BoundaryNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryNonlinearity::Zero => write!(f, "0"),
            BoundaryNonlinearity::Cubic(c) => write!(f, "{c}*u^3"),
            BoundaryNonlinearity::Custom(_) => write!(f, "custom"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TransmissionKind {
    Linear,
    NonlinearPaper,
    DeltaCubic(f64),
}

/// The pair `g+`, `g-` entering the characteristic boundary operators
/// `B(+-) u = u_t (+-) u_x + g(+-)(u)`.
#[derive(Clone, Debug)]
pub struct TransmissionSpec {
    pub kind: TransmissionKind,
    pub g_plus: BoundaryNonlinearity,
    pub g_minus: BoundaryNonlinearity,
}

impl TransmissionSpec {
    pub fn linear() -> Self {
        TransmissionSpec {
            kind: TransmissionKind::Linear,
            g_plus: BoundaryNonlinearity::Zero,
            g_minus: BoundaryNonlinearity::Zero,
        }
    }

    /// `g(+-)(u) = (+-) delta * u^3`.
    pub fn delta_cubic(delta: f64) -> Self {
        if delta == 0.0 {
            return TransmissionSpec {
                kind: TransmissionKind::DeltaCubic(0.0),
                g_plus: BoundaryNonlinearity::Zero,
                g_minus: BoundaryNonlinearity::Zero,
            };
        }
        TransmissionSpec {
            kind: TransmissionKind::DeltaCubic(delta),
            g_plus: BoundaryNonlinearity::Cubic(delta),
            g_minus: BoundaryNonlinearity::Cubic(-delta),
        }
    }

    pub fn from_tag(tag: &str, f: &NonlinearitySpec) -> Result<Self> {
        match tag {
            "linear" => Ok(Self::linear()),
            "nonlinear" | "derived" => transmission_from_nonlinearity(f),
            other => {
                if let Some(v) = other.strip_prefix("delta:") {
                    Ok(Self::delta_cubic(crate::config::parse_number(v)?))
                } else {
                    Err(Error::Config(format!("unknown transmission tag `{other}`")))
                }
            }
        }
    }
}

/// Derive the nonlinear transmission pair from the structured nonlinearity:
/// `g+(u) = -1/2 (F2(u) - F3(u))`, `g-(u) = -1/2 (F2(u) + F3(u))` where `Fj`
/// is the antiderivative of `fj` vanishing at 0. Returns the linear kind when
/// both corrections vanish identically.
pub fn transmission_from_nonlinearity(f: &NonlinearitySpec) -> Result<TransmissionSpec> {
    match &f.form {
        NonlinearForm::Zero | NonlinearForm::CubicU => Ok(TransmissionSpec::linear()),
        // F3 = u^3/3: g+ = u^3/6, g- = -u^3/6
        NonlinearForm::SquareUx => Ok(TransmissionSpec {
            kind: TransmissionKind::NonlinearPaper,
            g_plus: BoundaryNonlinearity::Cubic(1.0 / 6.0),
            g_minus: BoundaryNonlinearity::Cubic(-1.0 / 6.0),
        }),
        // F2 = u^3/3: g+ = g- = -u^3/6
        NonlinearForm::SquareUt => Ok(TransmissionSpec {
            kind: TransmissionKind::NonlinearPaper,
            g_plus: BoundaryNonlinearity::Cubic(-1.0 / 6.0),
            g_minus: BoundaryNonlinearity::Cubic(-1.0 / 6.0),
        }),
        NonlinearForm::Custom { .. } => {
            let fp = f.clone();
            let fm = f.clone();
            let g_plus: ScalarFn =
                Arc::new(move |u| -0.5 * (fp.f2_antiderivative(u) - fp.f3_antiderivative(u)));
            let g_minus: ScalarFn =
                Arc::new(move |u| -0.5 * (fm.f2_antiderivative(u) + fm.f3_antiderivative(u)));
            // probe for quadrature trouble and for the identically-zero case
            let mut all_zero = true;
            for i in 0..=32 {
                let u = -2.0 + 0.125 * i as f64;
                let (gp, gm) = (g_plus(u), g_minus(u));
                if !gp.is_finite() || !gm.is_finite() {
                    return Err(Error::Config(format!(
                        "antiderivative evaluation failed at u={u} while deriving transmission conditions"
                    )));
                }
                if gp.abs() > 1e-14 * (1.0 + u.abs().powi(3)) || gm.abs() > 1e-14 * (1.0 + u.abs().powi(3)) {
                    all_zero = false;
                }
            }
            if all_zero {
                return Ok(TransmissionSpec::linear());
            }
            Ok(TransmissionSpec {
                kind: TransmissionKind::NonlinearPaper,
                g_plus: BoundaryNonlinearity::Custom(g_plus),
                g_minus: BoundaryNonlinearity::Custom(g_minus),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// Nodal samples of the initial position `p` and velocity `q`.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl InitialData {
    pub fn node_count(&self) -> usize {
        self.position.len()
    }

    /// Samples restricted to global nodes `lo..=hi`.
    pub fn restrict(&self, lo: usize, hi: usize) -> InitialData {
        InitialData {
            position: self.position[lo..=hi].to_vec(),
            velocity: self.velocity[lo..=hi].to_vec(),
        }
    }

    pub fn scaled(&self, factor: f64) -> InitialData {
        InitialData {
            position: self.position.iter().map(|v| factor * v).collect(),
            velocity: self.velocity.iter().map(|v| factor * v).collect(),
        }
    }
}

/// Pointwise sampling `P(j) = p(a_minus + j dx)`, `Q(j) = q(a_minus + j dx)`.
pub fn sample_initial_data(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    mesh: &MeshSpec,
) -> InitialData {
    let position = (0..=mesh.intervals).map(|j| p(mesh.node(j))).collect();
    let velocity = (0..=mesh.intervals).map(|j| q(mesh.node(j))).collect();
    InitialData { position, velocity }
}

// ---------------------------------------------------------------------------
// Adaptive quadrature (antiderivative fallback)
// ---------------------------------------------------------------------------

// 15-point Kronrod rule with embedded 7-point Gauss rule, positive nodes.
const K15_NODES: [f64; 8] = [
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];
const K15_WEIGHTS: [f64; 8] = [
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];
const G7_WEIGHTS: [f64; 4] = [
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = K15_WEIGHTS[0] * f(c);
    let mut gauss = G7_WEIGHTS[0] * f(c);
    for i in 1..8 {
        let fs = f(c - h * K15_NODES[i]) + f(c + h * K15_NODES[i]);
        kronrod += K15_WEIGHTS[i] * fs;
        if i % 2 == 0 {
            gauss += G7_WEIGHTS[i / 2] * fs;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h.abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= 40 {
        return value;
    }
    let c = 0.5 * (a + b);
    adapt(f, a, c, 0.5 * tol, depth + 1) + adapt(f, c, b, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]` (signed), absolute
/// tolerance `tol`.
pub fn integrate_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adapt(f, a, b, tol, 0)
}
