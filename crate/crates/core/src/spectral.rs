//! Hermitian eigendecomposition with verified residuals, the analytic
//! dressed states of the single-mode system, and smooth eigenstate tracking
//! along discretized parameter paths.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{Operator, SpaceSpec, StateVector, C64};
use crate::hamiltonians::SingleModeParams;
use crate::holonomy::ParameterLoop;

/// Which of the two dressed levels of a Jaynes-Cummings doublet.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub fn factor(&self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for BranchSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BranchSign::Plus => "+",
            BranchSign::Minus => "-",
        })
    }
}

/// Names one dressed level: the ladder rung `n`, the branch sign, and an
/// optional spectator photon number for the two-mode system.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DressedLabel {
    pub n: usize,
    pub sign: BranchSign,
    pub nprime: Option<usize>,
}

impl DressedLabel {
    pub fn plus(n: usize) -> Self {
        Self { n, sign: BranchSign::Plus, nprime: None }
    }

    pub fn minus(n: usize) -> Self {
        Self { n, sign: BranchSign::Minus, nprime: None }
    }

    /// Adds the spectator photon number of the second mode.
    pub fn with_spectator(self, nprime: usize) -> Self {
        Self { nprime: Some(nprime), ..self }
    }
}

/// One spectral band followed around a parameter path, in the
/// parallel-transport gauge.
#[derive(Clone, Debug)]
pub struct TrackedBand {
    /// The discretized path the band was followed along.
    pub path: ParameterLoop,
    /// One eigenstate per path node; consecutive overlaps are real positive.
    pub states: Vec<StateVector>,
    /// The band energy at each node.
    pub energies: Vec<f64>,
    /// Smallest spectral gap between the band and any other level.
    pub min_gap: f64,
    /// Set when `min_gap` fell below 1e-8 (phases are unreliable there).
    pub degeneracy_warning: bool,
}

const RESIDUAL_TOL: f64 = 1e-10;
const ORTHONORMALITY_TOL: f64 = 1e-10;
const TRACKING_OVERLAP_FLOOR: f64 = 0.9;
pub(crate) const DEGENERACY_GAP: f64 = 1e-8;

/// Full eigendecomposition of a Hermitian operator: eigenvalues ascending,
/// eigenvectors orthonormal and residual-checked
/// (`||Hv - Ev|| < 1e-10 max(||H||_F, 1)`).
pub fn eig_hermitian(h: &Operator) -> Result<(Vec<f64>, Vec<StateVector>)> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian { deviation: h.hermiticity_deviation() });
    }
    let (values, vectors) = eigh_matrix(h.mat())?;
    let states = (0..vectors.ncols())
        .map(|j| StateVector::new(h.space(), vectors.column(j).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    Ok((values.iter().copied().collect(), states))
}

/// Matrix-level core of [`eig_hermitian`]: sorted eigenvalues and the
/// unitary of eigencolumns, with the same residual and orthonormality checks.
pub(crate) fn eigh_matrix(mat: &DMatrix<C64>) -> Result<(DVector<f64>, DMatrix<C64>)> {
    let dim = mat.nrows();
    let fm = faer::Mat::<faer::c64>::from_fn(dim, dim, |i, j| {
        faer::c64::new(mat[(i, j)].re, mat[(i, j)].im)
    });
    let eig = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Convergence(format!("eigendecomposition did not converge: {e:?}")))?;
    let raw_values = eig.S();
    let raw_vectors = eig.U();
    // sort ascending (the solver already returns ascending order; keep this
    // defensive since it is part of the contract)
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| raw_values[a].re.partial_cmp(&raw_values[b].re).unwrap());
    let values = DVector::from_iterator(dim, order.iter().map(|&j| raw_values[j].re));
    let vectors = DMatrix::from_fn(dim, dim, |i, j| {
        let z = raw_vectors[(i, order[j])];
        C64::new(z.re, z.im)
    });
    // contract checks: residual against the Frobenius scale, orthonormality
    let scale = mat.norm().max(1.0);
    let images = mat * &vectors;
    for j in 0..dim {
        let residual = (images.column(j) - vectors.column(j) * C64::from(values[j])).norm();
        if residual > RESIDUAL_TOL * scale {
            return Err(Error::Convergence(format!(
                "eigenpair {j} residual {residual:.3e} exceeds {:.3e}",
                RESIDUAL_TOL * scale
            )));
        }
    }
    let gram = vectors.adjoint() * &vectors;
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - C64::from(want)).norm());
        }
    }
    if worst > ORTHONORMALITY_TOL {
        return Err(Error::Convergence(format!(
            "eigenvectors not orthonormal: deviation {worst:.3e}"
        )));
    }
    Ok((values, vectors))
}

/// The analytic dressed state `|Phi_n^+-(>` of the single-mode system:
///
/// `|Phi_n^+> = cos(theta_n/2)|e,n> + sin(theta_n/2)|g,n+1>`
/// `|Phi_n^-> = -sin(theta_n/2)|e,n> + cos(theta_n/2)|g,n+1>`
///
/// with the mixing angle `theta_n = atan2(2 lambda sqrt(n+1), delta)` in
/// `(0, pi)`. When the label carries a spectator number `n'`, the state is
/// tensored with `|n'>` of a second mode at the same cutoff.
pub fn dressed_state(
    label: &DressedLabel,
    params: &SingleModeParams,
    cutoff: usize,
) -> Result<StateVector> {
    if params.lambda() <= 0.0 {
        return Err(Error::Degeneracy(
            "dressed doublets collapse at zero coupling".into(),
        ));
    }
    let n = label.n;
    if n + 1 > cutoff {
        return Err(Error::Cutoff(format!(
            "dressed state |Phi_{n}> needs cutoff >= {}, got {cutoff}",
            n + 1
        )));
    }
    let theta_n = mixing_angle(params.delta(), params.lambda(), n);
    let (ce, cg) = match label.sign {
        BranchSign::Plus => ((theta_n / 2.0).cos(), (theta_n / 2.0).sin()),
        BranchSign::Minus => (-(theta_n / 2.0).sin(), (theta_n / 2.0).cos()),
    };
    let (space, nb) = match label.nprime {
        None => (SpaceSpec::qubit_mode(cutoff), 0),
        Some(np) => {
            if np > cutoff {
                return Err(Error::Cutoff(format!(
                    "spectator number {np} exceeds cutoff {cutoff}"
                )));
            }
            (SpaceSpec::full(cutoff, cutoff), np)
        }
    };
    let mut amp = DVector::zeros(space.total_dim());
    amp[space.index_of(crate::fock::EXCITED, n, nb)] = C64::from(ce);
    amp[space.index_of(crate::fock::GROUND, n + 1, nb)] = C64::from(cg);
    StateVector::new(space, amp)
}

/// Mixing angle `theta_n` of the `n`-th dressed doublet, in `(0, pi)` for
/// positive coupling.
pub(crate) fn mixing_angle(delta: f64, lambda: f64, n: usize) -> f64 {
    (2.0 * lambda * (n as f64 + 1.0).sqrt()).atan2(delta)
}

/// Follows one spectral band of `family` along the nodes of `path`, starting
/// from `seed` (which must be an eigenstate at the first node).
///
/// At each node the eigenvector of maximal overlap modulus with the previous
/// state is selected (ties broken by energy continuity) and rephased so the
/// consecutive overlap is real positive (parallel transport). The smallest
/// gap to any other level is recorded; a gap below 1e-8 sets
/// `degeneracy_warning`.
pub fn track_band<F>(family: F, path: &ParameterLoop, seed: &StateVector) -> Result<TrackedBand>
where
    F: Fn(&crate::holonomy::LoopPoint) -> Result<Operator>,
{
    let points = path.points();
    let h0 = family(&points[0])?;
    if h0.dim() != seed.dim() {
        return Err(Error::Dimension { expected: h0.dim(), got: seed.dim() });
    }
    if !h0.is_hermitian() {
        return Err(Error::NotHermitian { deviation: h0.hermiticity_deviation() });
    }
    // seed must be an eigenstate at the first node
    let image = h0.apply(seed)?;
    let energy0 = seed.amp().dotc(&image).re;
    let residual = (image - seed.amp() * C64::from(energy0)).norm();
    let bound = RESIDUAL_TOL * h0.frobenius_norm().max(1.0);
    if residual > bound {
        return Err(Error::InvalidSeed { residual, bound });
    }
    let matrices = points.iter().map(|p| Ok(family(p)?.mat().clone()));
    let core = track_vectors(matrices, seed.amp())?;
    let states = core
        .states
        .into_iter()
        .map(|amp| StateVector::new(seed.space(), amp))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackedBand {
        path: path.clone(),
        states,
        energies: core.energies,
        min_gap: core.min_gap,
        degeneracy_warning: core.min_gap < DEGENERACY_GAP,
    })
}

pub(crate) struct TrackedVectors {
    pub states: Vec<DVector<C64>>,
    pub energies: Vec<f64>,
    pub min_gap: f64,
}

/// Matrix-level band tracker shared by [`track_band`] and the sector-resolved
/// loop computations. `matrices` yields the Hermitian matrix at every node;
/// the first node's matrix must have `seed` as an eigenstate (checked by the
/// callers where the physical context is known).
pub(crate) fn track_vectors<I>(matrices: I, seed: &DVector<C64>) -> Result<TrackedVectors>
where
    I: IntoIterator<Item = Result<DMatrix<C64>>>,
{
    let mut states: Vec<DVector<C64>> = Vec::new();
    let mut energies: Vec<f64> = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut prev = seed.clone();
    for (node, mat) in matrices.into_iter().enumerate() {
        let mat = mat?;
        let (values, vectors) = eigh_matrix(&mat)?;
        let dim = values.len();
        // overlaps of every eigenvector with the previous state
        let overlaps = vectors.adjoint() * &prev;
        let mut best = 0;
        let mut best_mod = 0.0f64;
        for j in 0..dim {
            let m = overlaps[j].norm();
            if m > best_mod {
                best_mod = m;
                best = j;
            }
        }
        if best_mod < TRACKING_OVERLAP_FLOOR {
            return Err(Error::BandCrossing { node, max_overlap: best_mod });
        }
        // tie break: among near-maximal overlaps prefer energy continuity
        if let Some(&e_prev) = energies.last() {
            for j in 0..dim {
                if j != best
                    && overlaps[j].norm() >= best_mod - 1e-12
                    && (values[j] - e_prev).abs() < (values[best] - e_prev).abs()
                {
                    best = j;
                }
            }
        }
        let gap = (0..dim)
            .filter(|&j| j != best)
            .map(|j| (values[j] - values[best]).abs())
            .fold(f64::INFINITY, f64::min);
        min_gap = min_gap.min(gap);
        // parallel transport: make <prev|state> real positive
        let c = prev.dotc(&vectors.column(best).into_owned());
        let phase = c.conj() / C64::from(c.norm());
        let state = vectors.column(best) * phase;
        energies.push(values[best]);
        prev = state.clone_owned();
        states.push(prev.clone());
    }
    Ok(TrackedVectors { states, energies, min_gap })
}
