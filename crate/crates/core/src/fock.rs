//! Truncated bosonic Fock-space algebra: ladder operators, spin operators,
//! tensor products, coherent states, and the Schwinger SU(2) operators.
//!
//! Basis ordering is fixed crate-wide: a composite space is
//! qubit (x) mode-a (x) mode-b with the qubit index varying fastest, i.e.
//! `index = q + dim_qubit * (n_a + (cutoff_a + 1) * n_b)`. The qubit levels
//! are `0 = |e>`, `1 = |g>`, so `sigma_z = diag(+1, -1)`.
//!
//! Every operator product is exact only on basis states whose photon numbers
//! stay strictly below the cutoffs; operations that can push weight across a
//! cutoff (Schwinger rotations, coherent-state construction) document and test
//! the guarded subspace they are valid on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Qubit basis index of the excited level.
pub const EXCITED: usize = 0;
/// Qubit basis index of the ground level.
pub const GROUND: usize = 1;

/// Default bound on the probability weight a coherent state may lose to
/// truncation.
pub const DEFAULT_COHERENT_LEAK_TOL: f64 = 1e-8;

const HERMITICITY_TOL: f64 = 1e-12;

/// Dimensions and cutoffs of a composite Hilbert space
/// (optional qubit (x) optional mode a (x) optional mode b).
///
/// A mode with cutoff `c` carries the states `|0>..|c>`. Mode b requires
/// mode a to be present; at least one factor must exist. Instances are only
/// built through the constructors, which enforce those invariants.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SpaceSpec {
    has_qubit: bool,
    cutoff_a: Option<usize>,
    cutoff_b: Option<usize>,
}

impl SpaceSpec {
    /// Bare two-level space (the spin-1/2 alone, or a polarization vector).
    pub fn qubit() -> Self {
        Self { has_qubit: true, cutoff_a: None, cutoff_b: None }
    }

    /// A single bosonic mode truncated at `cutoff`.
    pub fn mode(cutoff: usize) -> Self {
        Self { has_qubit: false, cutoff_a: Some(cutoff), cutoff_b: None }
    }

    /// Qubit coupled to one mode (the single-mode Jaynes-Cummings space).
    pub fn qubit_mode(cutoff_a: usize) -> Self {
        Self { has_qubit: true, cutoff_a: Some(cutoff_a), cutoff_b: None }
    }

    /// Two bosonic modes, no qubit (the Schwinger-operator space).
    pub fn two_modes(cutoff_a: usize, cutoff_b: usize) -> Self {
        Self { has_qubit: false, cutoff_a: Some(cutoff_a), cutoff_b: Some(cutoff_b) }
    }

    /// Qubit plus both modes (the two-mode loop space).
    pub fn full(cutoff_a: usize, cutoff_b: usize) -> Self {
        Self { has_qubit: true, cutoff_a: Some(cutoff_a), cutoff_b: Some(cutoff_b) }
    }

    pub fn has_qubit(&self) -> bool {
        self.has_qubit
    }

    pub fn cutoff_a(&self) -> Option<usize> {
        self.cutoff_a
    }

    pub fn cutoff_b(&self) -> Option<usize> {
        self.cutoff_b
    }

    pub fn dim_qubit(&self) -> usize {
        if self.has_qubit { 2 } else { 1 }
    }

    pub fn dim_a(&self) -> usize {
        self.cutoff_a.map_or(1, |c| c + 1)
    }

    pub fn dim_b(&self) -> usize {
        self.cutoff_b.map_or(1, |c| c + 1)
    }

    pub fn total_dim(&self) -> usize {
        self.dim_qubit() * self.dim_a() * self.dim_b()
    }

    /// Flat index of the basis state `(qubit level, n_a, n_b)`. Factors the
    /// space does not have must be passed as 0.
    pub fn index_of(&self, q: usize, n_a: usize, n_b: usize) -> usize {
        debug_assert!(q < self.dim_qubit() && n_a < self.dim_a() && n_b < self.dim_b());
        q + self.dim_qubit() * (n_a + self.dim_a() * n_b)
    }

    /// Inverse of [`index_of`](Self::index_of): `(qubit level, n_a, n_b)`.
    pub fn label_of(&self, index: usize) -> (usize, usize, usize) {
        debug_assert!(index < self.total_dim());
        let q = index % self.dim_qubit();
        let rest = index / self.dim_qubit();
        (q, rest % self.dim_a(), rest / self.dim_a())
    }
}

/// How two spaces combine under a tensor product. Only the physically
/// meaningful orders are allowed; anything else is a shape error.
fn compose(a: SpaceSpec, b: SpaceSpec) -> Result<SpaceSpec> {
    match (a, b) {
        // qubit (x) mode  and  qubit (x) (mode a (x) mode b)
        (SpaceSpec { has_qubit: true, cutoff_a: None, .. }, SpaceSpec { has_qubit: false, cutoff_a: Some(ca), cutoff_b }) => {
            Ok(SpaceSpec { has_qubit: true, cutoff_a: Some(ca), cutoff_b })
        }
        // (qubit (x) mode a) (x) mode b
        (
            SpaceSpec { has_qubit: true, cutoff_a: Some(ca), cutoff_b: None },
            SpaceSpec { has_qubit: false, cutoff_a: Some(cb), cutoff_b: None },
        ) => Ok(SpaceSpec::full(ca, cb)),
        // mode a (x) mode b
        (
            SpaceSpec { has_qubit: false, cutoff_a: Some(ca), cutoff_b: None },
            SpaceSpec { has_qubit: false, cutoff_a: Some(cb), cutoff_b: None },
        ) => Ok(SpaceSpec::two_modes(ca, cb)),
        _ => Err(Error::TensorShape(format!(
            "cannot compose {:?} (x) {:?}; allowed: qubit(x)a, qubit(x)(a,b), (qubit,a)(x)b, a(x)b",
            a, b
        ))),
    }
}

/// Dense complex square matrix tagged with its space.
#[derive(Clone, Debug)]
pub struct Operator {
    space: SpaceSpec,
    mat: DMatrix<C64>,
    hermitian: bool,
}

impl Operator {
    /// Wraps a matrix without a Hermiticity claim.
    pub fn new(space: SpaceSpec, mat: DMatrix<C64>) -> Result<Self> {
        check_square(&mat, space.total_dim())?;
        Ok(Self { space, mat, hermitian: false })
    }

    /// Wraps a matrix that must be Hermitian (max |M - M^H| < 1e-12).
    pub fn hermitian(space: SpaceSpec, mat: DMatrix<C64>) -> Result<Self> {
        check_square(&mat, space.total_dim())?;
        let dev = hermiticity_deviation(&mat);
        if dev >= HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self { space, mat, hermitian: true })
    }

    pub fn identity(space: SpaceSpec) -> Self {
        let n = space.total_dim();
        Self { space, mat: DMatrix::identity(n, n), hermitian: true }
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn mat(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, mat: self.mat.adjoint(), hermitian: self.hermitian }
    }

    /// Applies the operator to a state and returns the raw (generally
    /// unnormalized) image vector.
    pub fn apply(&self, state: &StateVector) -> Result<DVector<C64>> {
        if state.space() != self.space {
            return Err(Error::Dimension { expected: self.dim(), got: state.dim() });
        }
        Ok(&self.mat * state.amp())
    }

    /// Largest entry deviation from the adjoint, `max |M - M^H|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.mat)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }
}

fn check_square(mat: &DMatrix<C64>, expected: usize) -> Result<()> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::Dimension { expected: mat.nrows(), got: mat.ncols() });
    }
    if mat.nrows() != expected {
        return Err(Error::Dimension { expected, got: mat.nrows() });
    }
    Ok(())
}

pub(crate) fn hermiticity_deviation(mat: &DMatrix<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..mat.nrows() {
        for j in 0..=i {
            dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Normalized complex amplitude vector over the labeled product basis.
///
/// Construction normalizes; a vector of (numerically) zero norm is rejected.
#[derive(Clone, Debug)]
pub struct StateVector {
    space: SpaceSpec,
    amp: DVector<C64>,
}

impl StateVector {
    pub fn new(space: SpaceSpec, amp: DVector<C64>) -> Result<Self> {
        if amp.len() != space.total_dim() {
            return Err(Error::Dimension { expected: space.total_dim(), got: amp.len() });
        }
        let norm = amp.norm();
        if norm < 1e-12 {
            return Err(Error::Norm { norm });
        }
        Ok(Self { space, amp: amp / C64::from(norm) })
    }

    /// The basis state `|q, n_a, n_b>`; absent factors take index 0.
    pub fn basis(space: SpaceSpec, q: usize, n_a: usize, n_b: usize) -> Result<Self> {
        if q >= space.dim_qubit() || n_a >= space.dim_a() || n_b >= space.dim_b() {
            return Err(Error::Cutoff(format!(
                "basis label ({q}, {n_a}, {n_b}) outside {:?}",
                space
            )));
        }
        let mut amp = DVector::zeros(space.total_dim());
        amp[space.index_of(q, n_a, n_b)] = C64::new(1.0, 0.0);
        Ok(Self { space, amp })
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn amp(&self) -> &DVector<C64> {
        &self.amp
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn norm(&self) -> f64 {
        self.amp.norm()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::Dimension { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amp.dotc(&other.amp))
    }

    /// `<self| op |self>`.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        let image = op.apply(self)?;
        Ok(self.amp.dotc(&image))
    }
}

/// Kronecker product with the crate's basis order (first factor fastest).
pub fn tensor(first: &Operator, second: &Operator) -> Result<Operator> {
    let space = compose(first.space, second.space)?;
    Ok(Operator {
        space,
        // second slow, first fast: index = i_first + dim_first * i_second
        mat: second.mat.kronecker(&first.mat),
        hermitian: first.hermitian && second.hermitian,
    })
}

/// Tensor product of states, same ordering as [`tensor`].
pub fn tensor_state(first: &StateVector, second: &StateVector) -> Result<StateVector> {
    let space = compose(first.space, second.space)?;
    StateVector::new(space, second.amp.kronecker(&first.amp))
}

/// Annihilation operator on a single truncated mode:
/// `<n-1| a |n> = sqrt(n)`, all other entries zero.
pub fn annihilation(cutoff: usize) -> Operator {
    let dim = cutoff + 1;
    let mut mat = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        mat[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator { space: SpaceSpec::mode(cutoff), mat, hermitian: false }
}

/// Creation operator, the adjoint of [`annihilation`].
pub fn creation(cutoff: usize) -> Operator {
    annihilation(cutoff).adjoint()
}

/// Photon-number operator `a^dag a` on a single truncated mode.
pub fn number(cutoff: usize) -> Operator {
    let dim = cutoff + 1;
    let mat = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) }
    });
    Operator { space: SpaceSpec::mode(cutoff), mat, hermitian: true }
}

/// Pauli operators `(sigma_z, sigma_+, sigma_-)` on the two-level space,
/// with `sigma_z = diag(+1 on |e>, -1 on |g>)` and `sigma_+|g> = |e>`.
pub fn spin_ops() -> (Operator, Operator, Operator) {
    let space = SpaceSpec::qubit();
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let sz = DMatrix::from_row_slice(2, 2, &[one, z, z, -one]);
    let sp = DMatrix::from_row_slice(2, 2, &[z, one, z, z]);
    let sm = DMatrix::from_row_slice(2, 2, &[z, z, one, z]);
    (
        Operator { space, mat: sz, hermitian: true },
        Operator { space, mat: sp, hermitian: false },
        Operator { space, mat: sm, hermitian: false },
    )
}

/// Schwinger angular-momentum operators `(Jx, Jy, Jz)` on the two-mode space:
/// `Jz = (a^dag a - b^dag b)/2`, `Jx = (a^dag b + a b^dag)/2`,
/// `Jy = (a^dag b - a b^dag)/2i`.
///
/// The SU(2) commutation relations hold exactly on the guarded subspace
/// `n_a + n_b < min(cutoff_a, cutoff_b)`.
pub fn schwinger_ops(cutoff_a: usize, cutoff_b: usize) -> (Operator, Operator, Operator) {
    let space = SpaceSpec::two_modes(cutoff_a, cutoff_b);
    let a = assemble(space, None, Some(annihilation(cutoff_a).mat()), None);
    let b = assemble(space, None, None, Some(annihilation(cutoff_b).mat()));
    let adag_b = a.adjoint() * &b;
    let a_bdag = &a * b.adjoint();
    let half = C64::new(0.5, 0.0);
    let jx = (&adag_b + &a_bdag) * half;
    let jy = (&adag_b - &a_bdag) * C64::new(0.0, -0.5);
    let jz = (a.adjoint() * &a - b.adjoint() * &b) * half;
    (
        Operator::hermitian(space, jx).expect("Jx is Hermitian by construction"),
        Operator::hermitian(space, jy).expect("Jy is Hermitian by construction"),
        Operator::hermitian(space, jz).expect("Jz is Hermitian by construction"),
    )
}

/// Photon-number operator of mode a embedded in `space`.
pub fn number_a(space: SpaceSpec) -> Result<Operator> {
    let cutoff = space
        .cutoff_a()
        .ok_or_else(|| Error::TensorShape(format!("{:?} has no mode a", space)))?;
    let mat = assemble(space, None, Some(number(cutoff).mat()), None);
    Operator::hermitian(space, mat)
}

/// Photon-number operator of mode b embedded in `space`.
pub fn number_b(space: SpaceSpec) -> Result<Operator> {
    let cutoff = space
        .cutoff_b()
        .ok_or_else(|| Error::TensorShape(format!("{:?} has no mode b", space)))?;
    let mat = assemble(space, None, None, Some(number(cutoff).mat()));
    Operator::hermitian(space, mat)
}

/// Embeds single-factor matrices into the composite space, identity on the
/// factors not given. Dimensions must match the factors of `space`.
pub(crate) fn assemble(
    space: SpaceSpec,
    qubit: Option<&DMatrix<C64>>,
    mode_a: Option<&DMatrix<C64>>,
    mode_b: Option<&DMatrix<C64>>,
) -> DMatrix<C64> {
    let iq = DMatrix::identity(space.dim_qubit(), space.dim_qubit());
    let ia = DMatrix::identity(space.dim_a(), space.dim_a());
    let ib = DMatrix::identity(space.dim_b(), space.dim_b());
    let mq = qubit.unwrap_or(&iq);
    let ma = mode_a.unwrap_or(&ia);
    let mb = mode_b.unwrap_or(&ib);
    debug_assert_eq!(mq.nrows(), space.dim_qubit());
    debug_assert_eq!(ma.nrows(), space.dim_a());
    debug_assert_eq!(mb.nrows(), space.dim_b());
    // qubit fastest, then a, then b
    mb.kronecker(ma).kronecker(mq)
}

/// Suggested cutoff keeping a coherent state's truncation leakage below the
/// default tolerance: `|alpha|^2 + 6|alpha| + 10` rounded up.
pub fn recommended_coherent_cutoff(alpha: C64) -> usize {
    let a = alpha.norm();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

/// Coherent state `|alpha>` truncated at `cutoff` and renormalized, with the
/// default leakage tolerance of 1e-8.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<StateVector> {
    coherent_state_with_tol(alpha, cutoff, DEFAULT_COHERENT_LEAK_TOL)
}

/// Coherent state with an explicit bound on the truncated Poisson tail
/// `sum_{n > cutoff} e^{-|alpha|^2} |alpha|^{2n} / n!`.
pub fn coherent_state_with_tol(alpha: C64, cutoff: usize, tol: f64) -> Result<StateVector> {
    let dim = cutoff + 1;
    let mut amp = DVector::zeros(dim);
    // c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), built incrementally
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    let mut kept = 0.0;
    for n in 0..dim {
        amp[n] = c;
        kept += c.norm_sqr();
        c *= alpha / C64::from(((n + 1) as f64).sqrt());
    }
    let leaked = (1.0 - kept).max(0.0);
    if leaked > tol {
        return Err(Error::Leakage { leaked, tol, cutoff });
    }
    StateVector::new(SpaceSpec::mode(cutoff), amp)
}
