//! Geometric-phase engine: discrete Pancharatnam products, unwrapped
//! connection accumulation around parameter loops, the closed-form phase
//! formulas for the semiclassical, single-mode and two-mode systems, solid
//! angles on the Poincare sphere, mixed-state phases, and the classical
//! polarization loop.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{SpaceSpec, StateVector, C64, EXCITED, GROUND};
use crate::hamiltonians::{phase_shifted_jc, semiclassical_h, two_mode_transformed};
use crate::hamiltonians::{SingleModeParams, TwoModeParams};
use crate::sector::Sector;
use crate::spectral::{dressed_state, eigh_matrix, track_band, track_vectors};
use crate::spectral::{BranchSign, DressedLabel};

/// Consecutive states with overlap modulus below this have no well-defined
/// relative phase.
const MIN_SEGMENT_OVERLAP: f64 = 1e-6;

/// Polar angles closer than this to a pole make the loop a point up to
/// rounding; the enclosed solid angle is then 0 (or the full sphere).
const POLE_TOL: f64 = 1e-12;

const SEED_RESIDUAL_TOL: f64 = 1e-10;

/// One node of a parameter path: a polar angle and an azimuth.
///
/// Paths that only sweep an azimuth (a phase-shift loop on a single mode)
/// use `theta = 0` as a placeholder; the builders that consume such paths
/// read only `phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopPoint {
    pub theta: f64,
    pub phi: f64,
}

impl LoopPoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// A bare-azimuth node for paths that do not live on the sphere.
    pub fn azimuthal(phi: f64) -> Self {
        Self { theta: 0.0, phi }
    }
}

/// A discretized path of control parameters, traversed node by node.
///
/// The path parameter is implicit: node `k` sits at `s = k / len`. For a
/// closed path the node at `s = 1` is deliberately *not* stored; closure is
/// handled by the segment back to node 0, so that uniform circles sample
/// each azimuth exactly once.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterLoop {
    points: Vec<LoopPoint>,
    closed: bool,
}

impl ParameterLoop {
    /// Builds a path from explicit nodes. At least 3 are required.
    pub fn new(points: Vec<LoopPoint>, closed: bool) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "a parameter path needs at least 3 nodes, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.theta.is_finite() || !p.phi.is_finite()) {
            return Err(Error::InvalidInput("path nodes must be finite".into()));
        }
        Ok(Self { points, closed })
    }

    /// Closed circle at fixed polar angle, azimuth swept linearly from
    /// `phi_start` towards `phi_end` with the endpoint excluded.
    pub fn circle(theta: f64, phi_start: f64, phi_end: f64, nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidInput(format!(
                "a circle needs at least 3 nodes, got {nodes}"
            )));
        }
        let span = phi_end - phi_start;
        let points = (0..nodes)
            .map(|k| LoopPoint::new(theta, phi_start + span * k as f64 / nodes as f64))
            .collect();
        Self::new(points, true)
    }

    /// Closed azimuth-only circle (bare-phi nodes, endpoint excluded).
    pub fn azimuthal_circle(phi_start: f64, phi_end: f64, nodes: usize) -> Result<Self> {
        Self::circle(0.0, phi_start, phi_end, nodes)
    }

    pub fn points(&self) -> &[LoopPoint] {
        &self.points
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How a phase was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Discrete product of consecutive overlaps.
    Pancharatnam,
    /// Connection accumulation in a co-rotating frame (tracked band).
    Connection,
    /// Closed-form expression.
    Analytic,
    /// Number-operator expectation shortcut.
    Expectation,
    /// Real-time propagation with dynamical-phase subtraction.
    Evolution,
    /// Weighted average over a mixture.
    Mixed,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pancharatnam => "pancharatnam",
            Method::Connection => "connection",
            Method::Analytic => "analytic",
            Method::Expectation => "expectation",
            Method::Evolution => "evolution",
            Method::Mixed => "mixed",
        })
    }
}

/// A geometric phase together with its winding bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseResult {
    /// Principal value in `(-pi, pi]`.
    pub wrapped: f64,
    /// Accumulated value; differs from `wrapped` by `2 pi winding`.
    pub unwrapped: f64,
    pub winding: i64,
    pub method: Method,
    /// Modulus of the phase-carrying amplitude: 1 for pure states, the
    /// coherence modulus for mixtures.
    pub visibility: f64,
}

impl PhaseResult {
    /// Packages an accumulated phase, deriving the principal value and the
    /// winding count.
    pub fn from_unwrapped(unwrapped: f64, method: Method, visibility: f64) -> Self {
        let wrapped = wrap_angle(unwrapped);
        let winding = ((unwrapped - wrapped) / TAU).round() as i64;
        Self { wrapped, unwrapped, winding, method, visibility }
    }
}

/// Reduces an angle to the principal branch `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Discrete holonomy of a chain of states: `-arg prod_k <psi_k|psi_{k+1}>`,
/// including the closing factor `<psi_M|psi_0>` when `closed`.
///
/// The unwrapped value accumulates the per-segment arguments one by one, so
/// windings survive as long as individual segments stay short. The wrapped
/// value of a closed chain is invariant under independent rephasing of
/// every input state.
pub fn pancharatnam_phase(states: &[StateVector], closed: bool) -> Result<PhaseResult> {
    if states.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "a phase chain needs at least 3 states, got {}",
            states.len()
        )));
    }
    let space = states[0].space();
    for s in states {
        if s.space() != space {
            return Err(Error::Dimension { expected: states[0].dim(), got: s.dim() });
        }
    }
    let mut total = 0.0;
    let last = states.len() - 1;
    for k in 0..last {
        total += segment_arg(&states[k], &states[k + 1], k)?;
    }
    if closed {
        total += segment_arg(&states[last], &states[0], last)?;
    }
    Ok(PhaseResult::from_unwrapped(-total, Method::Pancharatnam, 1.0))
}

fn segment_arg(a: &StateVector, b: &StateVector, segment: usize) -> Result<f64> {
    let c = a.overlap(b)?;
    if c.norm() < MIN_SEGMENT_OVERLAP {
        return Err(Error::Overlap { segment, modulus: c.norm() });
    }
    Ok(c.arg())
}

/// Accumulates the holonomy of a tracked eigenvector chain in a co-rotating
/// frame.
///
/// `rates[i]` is the winding rate of basis state `i` under the loop's
/// phase-shift generator: advancing the azimuth by `dphi` multiplies
/// amplitude `i` by `exp(-i dphi rates[i])`. Rephasing each node against
/// the frame-advanced predecessor keeps every per-segment argument small,
/// so the full multiple of `2 pi` accumulated by the generator is
/// recovered. Returns the unwrapped phase and the closing overlap.
fn frame_aligned_unwrap(
    states: &[&DVector<C64>],
    rates: &DVector<f64>,
    dphi: f64,
) -> Result<(f64, C64)> {
    let m = states.len();
    let mut chi = states[0].clone();
    let mut total = 0.0;
    for k in 0..m - 1 {
        let mut frame = chi.clone();
        for (i, f) in frame.iter_mut().enumerate() {
            *f *= C64::from_polar(1.0, -dphi * rates[i]);
        }
        let aligned = frame.dotc(states[k + 1]);
        if aligned.norm() < MIN_SEGMENT_OVERLAP {
            return Err(Error::Overlap { segment: k, modulus: aligned.norm() });
        }
        let next = states[k + 1] * C64::from_polar(1.0, -aligned.arg());
        total += chi.dotc(&next).arg();
        chi = next;
    }
    let closing = chi.dotc(states[0]);
    if closing.norm() < MIN_SEGMENT_OVERLAP {
        return Err(Error::Overlap { segment: m - 1, modulus: closing.norm() });
    }
    total += closing.arg();
    Ok((-total, closing))
}

/// Closed-form adiabatic phase of the classically driven spin:
/// `pi (1 - delta / sqrt(delta^2 + 4 (alpha lambda)^2))`.
pub fn analytic_phase_semiclassical(delta: f64, lambda: f64, alpha: f64) -> Result<f64> {
    let g = alpha * lambda;
    if delta == 0.0 && g == 0.0 {
        return Err(Error::Degeneracy(
            "the driven spin levels are degenerate at zero detuning and zero drive".into(),
        ));
    }
    Ok(PI * (1.0 - delta / delta.hypot(2.0 * g)))
}

/// Numeric holonomy of the upper driven-spin level around a full drive-phase
/// loop, in the frame co-rotating with the drive.
///
/// The azimuth runs over one full period; the co-rotating frame closes
/// periodically, so the unwrapped value reproduces
/// [`analytic_phase_semiclassical`] directly for every detuning sign.
pub fn semiclassical_loop_phase(
    delta: f64,
    lambda: f64,
    alpha: f64,
    nodes: usize,
) -> Result<PhaseResult> {
    if delta == 0.0 && alpha * lambda == 0.0 {
        return Err(Error::Degeneracy(
            "the driven spin levels are degenerate at zero detuning and zero drive".into(),
        ));
    }
    let path = ParameterLoop::azimuthal_circle(0.0, -TAU, nodes)?;
    let h0 = semiclassical_h(delta, lambda, alpha, 0.0);
    let (_, vectors) = eigh_matrix(h0.mat())?;
    let seed = StateVector::new(SpaceSpec::qubit(), vectors.column(1).into_owned())?;
    let band = track_band(|p| Ok(semiclassical_h(delta, lambda, alpha, p.phi)), &path, &seed)?;
    // the upper component is stationary under the drive phase; the lower
    // one co-rotates, which closes the dragged frame at one period
    let rates = DVector::from_vec(vec![0.0, -1.0]);
    let amps: Vec<&DVector<C64>> = band.states.iter().map(|s| s.amp()).collect();
    let dphi = -TAU / nodes as f64;
    let (unwrapped, _) = frame_aligned_unwrap(&amps, &rates, dphi)?;
    Ok(PhaseResult::from_unwrapped(unwrapped, Method::Connection, 1.0))
}

/// Closed-form loop phase of a dressed level: the driven-spin value at the
/// rung's mixing angle plus the photon winding term.
///
/// Plus branch: `pi (1 - cos theta_n) + 2 pi n`. Minus branch:
/// `-pi (1 - cos theta_n) + 2 pi (n + 1)`, with
/// `cos theta_n = delta / sqrt(delta^2 + 4 lambda^2 (n+1))`.
pub fn analytic_phase_single_mode(
    delta: f64,
    lambda: f64,
    n: usize,
    sign: BranchSign,
) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::InvalidInput("coupling must be nonnegative".into()));
    }
    if lambda == 0.0 && delta == 0.0 {
        return Err(Error::Degeneracy(
            "dressed doublets collapse at zero coupling and zero detuning".into(),
        ));
    }
    let cos = delta / delta.hypot(2.0 * lambda * (n as f64 + 1.0).sqrt());
    Ok(match sign {
        BranchSign::Plus => PI * (1.0 - cos) + TAU * n as f64,
        BranchSign::Minus => -PI * (1.0 - cos) + TAU * (n as f64 + 1.0),
    })
}

/// Loop phase of a dressed level together with tracking diagnostics.
#[derive(Clone, Debug)]
pub struct SingleModeLoopResult {
    pub phase: PhaseResult,
    /// Smallest gap between the tracked level and any other along the loop.
    pub min_gap: f64,
    pub degeneracy_warning: bool,
}

/// Numeric holonomy of a dressed level under a full phase-shift loop of the
/// mode, `phi: 0 -> 2 pi`.
///
/// Tracks the eigenstate of the phase-shifted Hamiltonian and accumulates
/// the connection in the frame dragged by the shift generator, so the
/// result carries the full `2 pi n` winding of the photon content and
/// reproduces [`analytic_phase_single_mode`].
pub fn single_mode_loop_phase(
    params: &SingleModeParams,
    label: &DressedLabel,
    cutoff: usize,
    nodes: usize,
) -> Result<PhaseResult> {
    Ok(single_mode_loop_phase_detailed(params, label, cutoff, nodes)?.phase)
}

/// As [`single_mode_loop_phase`], also reporting the spectral-gap
/// diagnostics of the tracked band.
///
/// The loop family commutes with the excitation number, and at tidy
/// parameter ratios its full spectrum carries exact accidental degeneracies
/// between rungs of different excitation number (at resonance for instance
/// the upper vacuum doublet sits exactly on the lower `n = 3` one). An
/// eigensolver returns an arbitrary basis inside such a degenerate pair, so
/// the level is tracked inside its conserved two-state block, where the
/// protecting gap is the doublet splitting.
pub fn single_mode_loop_phase_detailed(
    params: &SingleModeParams,
    label: &DressedLabel,
    cutoff: usize,
    nodes: usize,
) -> Result<SingleModeLoopResult> {
    if label.nprime.is_some() {
        return Err(Error::InvalidInput(
            "spectator occupations belong to two-mode loops".into(),
        ));
    }
    if nodes < 3 {
        return Err(Error::InvalidInput(
            "a closed loop needs at least three nodes".into(),
        ));
    }
    let n = label.n;
    let seed_full = dressed_state(label, params, cutoff)?;
    let space = seed_full.space();
    let idx = [space.index_of(EXCITED, n, 0), space.index_of(GROUND, n + 1, 0)];
    let seed = DVector::from_vec(vec![seed_full.amp()[idx[0]], seed_full.amp()[idx[1]]]);
    let dphi = TAU / nodes as f64;
    let matrices = (0..nodes).map(|k| {
        let h = phase_shifted_jc(params, cutoff, dphi * k as f64)?;
        let m = h.mat();
        Ok(DMatrix::from_fn(2, 2, |r, c| m[(idx[r], idx[c])]))
    });
    let tracked = track_vectors(matrices, &seed)?;
    let rates = DVector::from_vec(vec![n as f64, n as f64 + 1.0]);
    let amps: Vec<&DVector<C64>> = tracked.states.iter().collect();
    let (unwrapped, _) = frame_aligned_unwrap(&amps, &rates, dphi)?;
    Ok(SingleModeLoopResult {
        phase: PhaseResult::from_unwrapped(unwrapped, Method::Connection, 1.0),
        min_gap: tracked.min_gap,
        degeneracy_warning: tracked.min_gap < crate::spectral::DEGENERACY_GAP,
    })
}

/// Evaluates the phase-shift loop in closed form through the photon number:
/// `unwrapped = 2 pi <a^dag a>`.
///
/// The shift generator is diagonal in the number basis, so the connection
/// integral collapses to the expectation value; this is the algebraic
/// shortcut the tracked loop is checked against.
pub fn phase_via_number_expectation(state: &StateVector, cutoff: usize) -> Result<PhaseResult> {
    let space = state.space();
    let Some(ca) = space.cutoff_a() else {
        return Err(Error::TensorShape(
            "number-expectation phase needs a state with a field mode".into(),
        ));
    };
    if ca != cutoff {
        return Err(Error::Dimension { expected: cutoff + 1, got: ca + 1 });
    }
    let mean_n: f64 = state
        .amp()
        .iter()
        .enumerate()
        .map(|(i, c)| space.label_of(i).1 as f64 * c.norm_sqr())
        .sum();
    Ok(PhaseResult::from_unwrapped(TAU * mean_n, Method::Expectation, 1.0))
}

/// Signed solid angle enclosed by a path on the sphere, by trapezoidal
/// summation of `(1 - cos theta) dphi` over the segments (including the
/// closing one for closed paths). Reported as the principal value in
/// `(-4 pi, 4 pi)`.
pub fn solid_angle(path: &ParameterLoop) -> f64 {
    let pts = path.points();
    let mut total = 0.0;
    let seg = |a: &LoopPoint, b: &LoopPoint| {
        let height = 0.5 * ((1.0 - a.theta.cos()) + (1.0 - b.theta.cos()));
        height * wrap_angle(b.phi - a.phi)
    };
    for pair in pts.windows(2) {
        total += seg(&pair[0], &pair[1]);
    }
    if path.closed() {
        total += seg(&pts[pts.len() - 1], &pts[0]);
    }
    principal_solid_angle(total)
}

fn principal_solid_angle(omega: f64) -> f64 {
    omega - (omega / (2.0 * TAU)).trunc() * 2.0 * TAU
}

/// Closed-form two-mode loop phase `Omega (n - n' + 1/2) / 2`; the vacuum
/// rung gives `Omega / 4`.
pub fn analytic_phase_two_mode(omega: f64, n: usize, nprime: usize) -> f64 {
    0.5 * omega * (n as f64 - nprime as f64 + 0.5)
}

/// Rotation phase picked up by a bare Fock pair `|n, n'>` carried around a
/// loop of solid angle `Omega` with the spin decoupled: `(n - n') Omega / 2`.
pub fn fock_rotation_phase(n: usize, nprime: usize, omega: f64) -> f64 {
    (n as f64 - nprime as f64) * omega / 2.0
}

/// Two-mode loop phase with closure diagnostics.
#[derive(Clone, Debug)]
pub struct TwoModeLoopResult {
    /// The reported per-cycle phase (see [`two_mode_loop_phase`]).
    pub phase: PhaseResult,
    pub min_gap: f64,
    /// Connection accumulated over the operator's full `4 pi` period.
    pub raw_unwrapped: f64,
    /// Overlap closing the chain at the full period; its modulus measures
    /// how exactly the tracked state returned to itself.
    pub closing_overlap: C64,
    /// Cap solid angle of the fixed-polar-angle circle.
    pub solid_angle: f64,
    /// Set when the loop sits at a pole and encloses nothing.
    pub degenerate_loop: bool,
}

/// Numeric holonomy of a rotated dressed doublet member carried around a
/// fixed-polar-angle circle on the Poincare sphere.
///
/// The transformed Hamiltonian carries half-angle phases, so the state
/// chain only closes after a `4 pi` sweep of the azimuth; the loop is
/// traversed over that full period and the accumulated connection is
/// converted to the per-cycle value by halving and restoring the rotation
/// generator's offset on the seed. The result reproduces
/// [`analytic_phase_two_mode`] at the circle's cap solid angle.
pub fn two_mode_loop_phase(
    params: &TwoModeParams,
    label: &DressedLabel,
    cutoff_a: usize,
    cutoff_b: usize,
    nodes: usize,
) -> Result<PhaseResult> {
    Ok(two_mode_loop_phase_detailed(params, label, cutoff_a, cutoff_b, nodes)?.phase)
}

/// As [`two_mode_loop_phase`], also exposing the raw full-period connection,
/// the closing overlap and the loop's solid angle.
pub fn two_mode_loop_phase_detailed(
    params: &TwoModeParams,
    label: &DressedLabel,
    cutoff_a: usize,
    cutoff_b: usize,
    nodes: usize,
) -> Result<TwoModeLoopResult> {
    let Some(np) = label.nprime else {
        return Err(Error::InvalidInput(
            "two-mode loops need a spectator occupation on the label".into(),
        ));
    };
    let n = label.n;
    if params.lambda() <= 0.0 {
        return Err(Error::Degeneracy(
            "two-mode dressed branches collapse at zero coupling".into(),
        ));
    }
    let min_cutoff = cutoff_a.min(cutoff_b);
    if n + np + 2 > min_cutoff {
        return Err(Error::Cutoff(format!(
            "loop on rung ({n}, {np}) needs cutoffs of at least {}, got {min_cutoff}",
            n + np + 2
        )));
    }
    if nodes < 3 {
        return Err(Error::InvalidInput(format!(
            "a circle needs at least 3 nodes, got {nodes}"
        )));
    }
    let theta = params.theta();
    let cap = principal_solid_angle(TAU * (1.0 - theta.cos()));
    if theta <= POLE_TOL || theta >= PI - POLE_TOL {
        return Ok(TwoModeLoopResult {
            phase: PhaseResult::from_unwrapped(0.0, Method::Connection, 1.0),
            min_gap: f64::INFINITY,
            raw_unwrapped: 0.0,
            closing_overlap: C64::from(1.0),
            solid_angle: cap,
            degenerate_loop: true,
        });
    }

    // work inside the excitation sector of the doublet: the loop conserves
    // the total excitation number, and each node's Hamiltonian is the
    // untilted block conjugated by the exact sector rotation
    let sector = Sector::new(SpaceSpec::full(cutoff_a, cutoff_b), n + np + 1);
    let dim = sector.dim();
    let h0 = sector.h_transformed(params.nu(), params.lambda(), 0.0, 0.0);
    let (jy_vals, jy_vecs) = eigh_matrix(&sector.jy())?;
    let mut ry = jy_vecs.clone();
    for j in 0..dim {
        let factor = C64::from_polar(1.0, -theta * jy_vals[j]);
        for i in 0..dim {
            ry[(i, j)] *= factor;
        }
    }
    let ry = ry * jy_vecs.adjoint();
    let h_tilt = &ry * h0 * ry.adjoint();
    let jz = sector.jz_diag();

    let pe = sector
        .position_of(EXCITED, n, np)
        .ok_or_else(|| Error::Cutoff(format!("rung ({n}, {np}) exceeds the cutoffs")))?;
    let pg = sector
        .position_of(GROUND, n + 1, np)
        .ok_or_else(|| Error::Cutoff(format!("rung ({n}, {np}) exceeds the cutoffs")))?;
    let mut seed0: DVector<C64> = DVector::zeros(dim);
    seed0[pe] = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    seed0[pg] = C64::from(label.sign.factor() * std::f64::consts::FRAC_1_SQRT_2);
    // offset restored after halving: the rotation generator's mean on the
    // untilted doublet member
    let jz_seed: f64 = seed0.iter().enumerate().map(|(i, c)| jz[i] * c.norm_sqr()).sum();

    let twist = |h: &DMatrix<C64>, phi: f64| -> DMatrix<C64> {
        DMatrix::from_fn(dim, dim, |i, j| {
            h[(i, j)] * C64::from_polar(1.0, -phi * (jz[i] - jz[j]))
        })
    };
    let phi0 = params.phi();
    let mut seed = &ry * seed0;
    for i in 0..dim {
        seed[i] *= C64::from_polar(1.0, -phi0 * jz[i]);
    }
    let h_first = twist(&h_tilt, phi0);
    let energy = seed.dotc(&(&h_first * &seed)).re;
    let residual = (&h_first * &seed - &seed * C64::from(energy)).norm();
    let bound = SEED_RESIDUAL_TOL * h_first.norm().max(1.0);
    if residual > bound {
        return Err(Error::InvalidSeed { residual, bound });
    }

    let dphi = -2.0 * TAU / nodes as f64;
    let matrices = (0..nodes).map(|k| Ok(twist(&h_tilt, phi0 + dphi * k as f64)));
    let tracked = track_vectors(matrices, &seed)?;
    let amps: Vec<&DVector<C64>> = tracked.states.iter().collect();
    let (raw, closing) = frame_aligned_unwrap(&amps, &jz, dphi)?;
    let reported = 0.5 * raw + TAU * jz_seed;
    Ok(TwoModeLoopResult {
        phase: PhaseResult::from_unwrapped(reported, Method::Connection, 1.0),
        min_gap: tracked.min_gap,
        raw_unwrapped: raw,
        closing_overlap: closing,
        solid_angle: cap,
        degenerate_loop: false,
    })
}

/// Numeric check that the true ground state stays flat: tracks `|g, 0, 0>`
/// around the same full-period circle as [`two_mode_loop_phase`] and
/// reports its per-cycle phase, which vanishes.
pub fn ground_state_loop_phase(
    params: &TwoModeParams,
    cutoff_a: usize,
    cutoff_b: usize,
    nodes: usize,
) -> Result<PhaseResult> {
    let path =
        ParameterLoop::circle(params.theta(), params.phi(), params.phi() - 2.0 * TAU, nodes)?;
    let space = SpaceSpec::full(cutoff_a, cutoff_b);
    let seed = StateVector::basis(space, GROUND, 0, 0)?;
    let band = track_band(
        |p| two_mode_transformed(&params.at_angles(p.theta, p.phi)?, cutoff_a, cutoff_b),
        &path,
        &seed,
    )?;
    let rates = DVector::from_iterator(
        space.total_dim(),
        (0..space.total_dim()).map(|i| {
            let (_, na, nb) = space.label_of(i);
            0.5 * (na as f64 - nb as f64)
        }),
    );
    let amps: Vec<&DVector<C64>> = band.states.iter().map(|s| s.amp()).collect();
    let (raw, _) = frame_aligned_unwrap(&amps, &rates, -2.0 * TAU / nodes as f64)?;
    Ok(PhaseResult::from_unwrapped(0.5 * raw, Method::Connection, 1.0))
}

/// Weighted-average phase of a mixture: `arg sum_k w_k exp(i gamma_k)`,
/// with the sum's modulus reported as the visibility.
///
/// The mixture phase is only defined modulo `2 pi`, so the winding count is
/// 0 by convention and `unwrapped` equals `wrapped`.
pub fn mixed_state_phase(weights: &[f64], phases: &[f64]) -> Result<PhaseResult> {
    if weights.is_empty() || weights.len() != phases.len() {
        return Err(Error::InvalidInput(format!(
            "need matching nonempty weight/phase lists, got {} and {}",
            weights.len(),
            phases.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "weights must sum to 1, got {total:.17}"
        )));
    }
    let z: C64 = weights
        .iter()
        .zip(phases)
        .map(|(&w, &g)| C64::from_polar(w, g))
        .sum();
    if z.norm() < 1e-12 {
        return Err(Error::VanishingVisibility { modulus: z.norm() });
    }
    let wrapped = wrap_angle(z.arg());
    Ok(PhaseResult {
        wrapped,
        unwrapped: wrapped,
        winding: 0,
        method: Method::Mixed,
        visibility: z.norm().min(1.0),
    })
}

/// Pancharatnam phase of the classical polarization vector
/// `(e^{i phi/2} cos(theta/2), e^{-i phi/2} sin(theta/2))` carried along a
/// path on the sphere.
///
/// Over one ray period (`phi` advancing by `2 pi`) the family closes only
/// projectively; the closing factor is part of the product, giving a cap
/// phase of magnitude `pi (1 - |cos theta|)`-type branch at the equator.
pub fn classical_polarization_phase(path: &ParameterLoop) -> Result<PhaseResult> {
    let space = SpaceSpec::qubit();
    let states = path
        .points()
        .iter()
        .map(|p| {
            let amp = DVector::from_vec(vec![
                C64::from_polar((0.5 * p.theta).cos(), 0.5 * p.phi),
                C64::from_polar((0.5 * p.theta).sin(), -0.5 * p.phi),
            ]);
            StateVector::new(space, amp)
        })
        .collect::<Result<Vec<_>>>()?;
    pancharatnam_phase(&states, path.closed())
}

/// Relative component phases of the upper eigenvector of the
/// history-dependent coupling `sigma_+ e^{i Omega/2} + sigma_- e^{-i Omega/2}`.
///
/// The exact upper eigenvector is `(e^{i Omega/4}, e^{-i Omega/4})` up to a
/// global phase; the pair `(Omega/4, -Omega/4)` is returned as principal
/// values of the half relative phase.
pub fn history_hamiltonian_eigenphase(omega: f64) -> (f64, f64) {
    // 2x2 eigenproblem in closed form: for [[0, c], [conj(c), 0]] the upper
    // eigenvector is (c, |c|) / sqrt(2 |c|), so the relative component
    // phase is arg c
    let relative = C64::from_polar(1.0, 0.5 * omega).arg();
    (0.5 * relative, -0.5 * relative)
}
