//! Builders for the model Hamiltonians: the semiclassical 2x2 spin, the
//! single-mode Jaynes-Cummings model and its phase-shifted conjugates, and
//! the resonant two-mode family swept around the Poincare sphere.
//!
//! Phase conventions are fixed by true operator conjugation. With
//! `U(phi) = exp(-i phi a^dag a)` one has `U a U^dag = e^{+i phi} a`, so the
//! shifted coupling reads `lambda (sigma_+ a e^{+i phi} + h.c.)`; with
//! `exp(-i phi Jz)` one has `a -> e^{+i phi/2} a`, `b -> e^{-i phi/2} b`.
//! Builders implement these closed forms exactly and the conjugation
//! identities are asserted in tests.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, assemble, number, schwinger_ops, spin_ops, Operator, SpaceSpec, C64,
};

/// Frequencies and coupling of the single-mode system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleModeParams {
    nu: f64,
    omega: f64,
    lambda: f64,
}

impl SingleModeParams {
    /// Field frequency `nu`, qubit frequency `omega`, coupling `lambda >= 0`.
    pub fn new(nu: f64, omega: f64, lambda: f64) -> Result<Self> {
        if !(nu.is_finite() && omega.is_finite() && lambda.is_finite()) {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }
        if lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "coupling must be nonnegative (its sign is a phase), got {lambda}"
            )));
        }
        Ok(Self { nu, omega, lambda })
    }

    /// Resonant system, `omega = nu`.
    pub fn resonant(nu: f64, lambda: f64) -> Result<Self> {
        Self::new(nu, nu, lambda)
    }

    /// Fixes the detuning instead of the qubit frequency: `omega = nu + delta`.
    pub fn detuned(nu: f64, delta: f64, lambda: f64) -> Result<Self> {
        Self::new(nu, nu + delta, lambda)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Detuning `delta = omega - nu`.
    pub fn delta(&self) -> f64 {
        self.omega - self.nu
    }
}

/// Parameters of the resonant two-mode system: common frequency, coupling,
/// and the Poincare-sphere control angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeParams {
    nu: f64,
    lambda: f64,
    theta: f64,
    phi: f64,
}

impl TwoModeParams {
    pub fn new(nu: f64, lambda: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(nu.is_finite() && lambda.is_finite() && theta.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }
        if lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "coupling must be nonnegative, got {lambda}"
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidInput(format!(
                "polar angle must lie in [0, pi], got {theta}"
            )));
        }
        Ok(Self { nu, lambda, theta, phi })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Same frequencies, different point on the sphere.
    pub fn at_angles(&self, theta: f64, phi: f64) -> Result<Self> {
        Self::new(self.nu, self.lambda, theta, phi)
    }
}

/// Semiclassical spin in a rotating classical field (2x2, rotating frame):
/// `(delta/2) sigma_z + lambda*alpha (sigma_+ e^{-i phi} + sigma_- e^{i phi})`.
///
/// `alpha` is the nonnegative field amplitude; a negative value is equivalent
/// to shifting `phi` by pi. Eigenvalues are
/// `+-(1/2) sqrt(delta^2 + 4 (alpha lambda)^2)`.
pub fn semiclassical_h(delta: f64, lambda: f64, alpha: f64, phi: f64) -> Operator {
    let g = lambda * alpha;
    let half = C64::new(delta / 2.0, 0.0);
    let coupling = C64::from_polar(g, -phi);
    let mat = DMatrix::from_row_slice(2, 2, &[half, coupling, coupling.conj(), -half]);
    Operator::hermitian(SpaceSpec::qubit(), mat).expect("2x2 built Hermitian")
}

/// Single-mode Jaynes-Cummings Hamiltonian (rotating wave approximation) on
/// the qubit (x) mode-a space:
/// `nu a^dag a + (omega/2) sigma_z + lambda (sigma_+ a + sigma_- a^dag)`.
pub fn jc_single_mode(params: &SingleModeParams, cutoff: usize) -> Result<Operator> {
    phase_shifted_jc(params, cutoff, 0.0)
}

/// The Jaynes-Cummings Hamiltonian conjugated by `U(phi) = exp(-i phi a^dag a)`,
/// built in closed form: the coupling becomes
/// `lambda (sigma_+ a e^{+i phi} + sigma_- a^dag e^{-i phi})`.
///
/// Equal to `jc_single_mode` at `phi = 0` (and any multiple of 2 pi), and
/// isospectral to it for every `phi`.
pub fn phase_shifted_jc(params: &SingleModeParams, cutoff: usize, phi: f64) -> Result<Operator> {
    if cutoff < 1 {
        return Err(Error::InvalidInput("cutoff must be at least 1".into()));
    }
    let space = SpaceSpec::qubit_mode(cutoff);
    let (sz, sp, _) = spin_ops();
    let n_a = assemble(space, None, Some(number(cutoff).mat()), None);
    let sz_full = assemble(space, Some(sz.mat()), None, None);
    let raise_a = assemble(space, Some(sp.mat()), Some(annihilation(cutoff).mat()), None);
    let coupling = &raise_a * C64::from_polar(params.lambda, phi);
    let mat = n_a * C64::from(params.nu)
        + sz_full * C64::from(params.omega / 2.0)
        + &coupling
        + coupling.adjoint();
    Operator::hermitian(space, mat)
}

/// Untransformed two-mode Hamiltonian (the loop's starting point, both control
/// angles zero): `nu (a^dag a + b^dag b + sigma_z/2) + lambda (sigma_+ a + h.c.)`
/// on the qubit (x) a (x) b space. The angles carried by `params` are ignored.
pub fn two_mode_initial(
    params: &TwoModeParams,
    cutoff_a: usize,
    cutoff_b: usize,
) -> Result<Operator> {
    if cutoff_a < 1 || cutoff_b < 1 {
        return Err(Error::InvalidInput("cutoffs must be at least 1".into()));
    }
    let space = SpaceSpec::full(cutoff_a, cutoff_b);
    let (sz, sp, _) = spin_ops();
    let n_a = assemble(space, None, Some(number(cutoff_a).mat()), None);
    let n_b = assemble(space, None, None, Some(number(cutoff_b).mat()));
    let sz_full = assemble(space, Some(sz.mat()), None, None);
    let raise_a = assemble(space, Some(sp.mat()), Some(annihilation(cutoff_a).mat()), None);
    let coupling = raise_a * C64::from(params.lambda);
    let mat = (n_a + n_b + sz_full * C64::from(0.5)) * C64::from(params.nu)
        + &coupling
        + coupling.adjoint();
    Operator::hermitian(space, mat)
}

/// Two-mode Hamiltonian conjugated by the loop unitary
/// `U(theta, phi) = exp(-i phi Jz) exp(-i theta Jy)`, in closed form:
///
/// `nu (sigma_z/2 + a^dag a + b^dag b)
///  + lambda (cos(theta/2) sigma_+ a e^{+i phi/2}
///          + sin(theta/2) sigma_+ b e^{-i phi/2} + h.c.)`
///
/// Note the half angles: the family is 4 pi periodic in `phi`.
pub fn two_mode_transformed(
    params: &TwoModeParams,
    cutoff_a: usize,
    cutoff_b: usize,
) -> Result<Operator> {
    if cutoff_a < 1 || cutoff_b < 1 {
        return Err(Error::InvalidInput("cutoffs must be at least 1".into()));
    }
    let space = SpaceSpec::full(cutoff_a, cutoff_b);
    let (sz, sp, _) = spin_ops();
    let n_a = assemble(space, None, Some(number(cutoff_a).mat()), None);
    let n_b = assemble(space, None, None, Some(number(cutoff_b).mat()));
    let sz_full = assemble(space, Some(sz.mat()), None, None);
    let raise_a = assemble(space, Some(sp.mat()), Some(annihilation(cutoff_a).mat()), None);
    let raise_b = assemble(space, Some(sp.mat()), None, Some(annihilation(cutoff_b).mat()));
    let half_theta = params.theta / 2.0;
    let ga = C64::from_polar(params.lambda * half_theta.cos(), params.phi / 2.0);
    let gb = C64::from_polar(params.lambda * half_theta.sin(), -params.phi / 2.0);
    let coupling = raise_a * ga + raise_b * gb;
    let mat = (n_a + n_b + sz_full * C64::from(0.5)) * C64::from(params.nu)
        + &coupling
        + coupling.adjoint();
    Operator::hermitian(space, mat)
}

/// Control-loop unitary `exp(-i phi Jz) exp(-i theta Jy)` on the two-mode
/// space, tensored with the qubit identity (so it acts on the full space).
///
/// Both exponentials are taken of the truncated Hermitian generators, so the
/// result is exactly unitary; it agrees with the untruncated rotation on
/// states whose total photon number stays below the smaller cutoff.
pub fn loop_unitary(theta: f64, phi: f64, cutoff_a: usize, cutoff_b: usize) -> Result<Operator> {
    if cutoff_a < 1 || cutoff_b < 1 {
        return Err(Error::InvalidInput("cutoffs must be at least 1".into()));
    }
    let u_field = two_mode_rotation(theta, phi, cutoff_a, cutoff_b)?;
    let space = SpaceSpec::full(cutoff_a, cutoff_b);
    let iq = DMatrix::identity(2, 2);
    Operator::new(space, u_field.kronecker(&iq))
}

/// The same rotation on the bare two-mode space (no qubit factor).
pub(crate) fn two_mode_rotation(
    theta: f64,
    phi: f64,
    cutoff_a: usize,
    cutoff_b: usize,
) -> Result<DMatrix<C64>> {
    let (_, jy, jz) = schwinger_ops(cutoff_a, cutoff_b);
    // exp(-i theta Jy) through the spectral decomposition of the Hermitian Jy
    let (jy_vals, jy_vecs) = crate::spectral::eigh_matrix(jy.mat())?;
    let dim = jy_vals.len();
    let mut rot = jy_vecs.clone();
    for (j, ev) in jy_vals.iter().enumerate() {
        let factor = C64::from_polar(1.0, -theta * ev);
        for i in 0..dim {
            rot[(i, j)] *= factor;
        }
    }
    let ry = rot * jy_vecs.adjoint();
    // exp(-i phi Jz) is diagonal in the Fock basis
    let mut out = ry;
    for i in 0..dim {
        let jz_i = jz.mat()[(i, i)].re;
        let factor = C64::from_polar(1.0, -phi * jz_i);
        for j in 0..dim {
            out[(i, j)] *= factor;
        }
    }
    Ok(out)
}
