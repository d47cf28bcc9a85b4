//! Total-excitation sector decomposition of the resonant two-mode system.
//!
//! The two-mode Hamiltonian family conserves
//! `N = a^dag a + b^dag b + (sigma_z + 1)/2` for every control angle, so all
//! loop tracking and time evolution can run inside one small sector instead
//! of the full space. A sector is complete (identical to its untruncated
//! counterpart) when `N <= min(cutoff_a, cutoff_b)`; boundary sectors drop
//! the matrix elements that would leave the truncated space, exactly like
//! the restriction of the truncated full-space operators.

use nalgebra::{DMatrix, DVector};

use crate::fock::{SpaceSpec, C64, EXCITED, GROUND};

/// Basis and operators of one conserved-excitation sector.
pub(crate) struct Sector {
    space: SpaceSpec,
    n_tot: usize,
    /// `(qubit level, n_a, n_b)` labels, ascending full-space index.
    labels: Vec<(usize, usize, usize)>,
    /// Full-space index of each sector basis state.
    indices: Vec<usize>,
}

impl Sector {
    /// Enumerates the sector `n_a + n_b + excitation = n_tot` inside `space`.
    pub(crate) fn new(space: SpaceSpec, n_tot: usize) -> Self {
        let mut labels = Vec::new();
        let mut indices = Vec::new();
        for idx in 0..space.total_dim() {
            let (q, na, nb) = space.label_of(idx);
            let exc = if q == EXCITED { 1 } else { 0 };
            if na + nb + exc == n_tot {
                labels.push((q, na, nb));
                indices.push(idx);
            }
        }
        Self { space, n_tot, labels, indices }
    }

    pub(crate) fn dim(&self) -> usize {
        self.labels.len()
    }

    pub(crate) fn labels(&self) -> &[(usize, usize, usize)] {
        &self.labels
    }

    pub(crate) fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// True when truncation does not cut into this sector.
    pub(crate) fn is_complete(&self) -> bool {
        let ca = self.space.cutoff_a().unwrap_or(0);
        let cb = self.space.cutoff_b().unwrap_or(0);
        self.n_tot <= ca.min(cb)
    }

    /// Position of a basis label inside the sector, if it belongs to it.
    pub(crate) fn position_of(&self, q: usize, na: usize, nb: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == (q, na, nb))
    }

    /// The transformed two-mode Hamiltonian restricted to this sector,
    /// built directly from its matrix elements:
    /// diagonal `nu (n_a + n_b + sigma_z/2)`, couplings
    /// `lambda cos(theta/2) e^{+i phi/2} <e,na,nb|..|g,na+1,nb>` and
    /// `lambda sin(theta/2) e^{-i phi/2} <e,na,nb|..|g,na,nb+1>`.
    pub(crate) fn h_transformed(&self, nu: f64, lambda: f64, theta: f64, phi: f64) -> DMatrix<C64> {
        let d = self.dim();
        let mut mat = DMatrix::zeros(d, d);
        let ga = C64::from_polar(lambda * (theta / 2.0).cos(), phi / 2.0);
        let gb = C64::from_polar(lambda * (theta / 2.0).sin(), -phi / 2.0);
        for (row, &(q, na, nb)) in self.labels.iter().enumerate() {
            let sz = if q == EXCITED { 0.5 } else { -0.5 };
            mat[(row, row)] = C64::from(nu * (na as f64 + nb as f64 + sz));
            if q == EXCITED {
                if let Some(col) = self.position_of(GROUND, na + 1, nb) {
                    let v = ga * C64::from((na as f64 + 1.0).sqrt());
                    mat[(row, col)] = v;
                    mat[(col, row)] = v.conj();
                }
                if let Some(col) = self.position_of(GROUND, na, nb + 1) {
                    let v = gb * C64::from((nb as f64 + 1.0).sqrt());
                    mat[(row, col)] = v;
                    mat[(col, row)] = v.conj();
                }
            }
        }
        mat
    }

    /// The untransformed Hamiltonian (both angles zero).
    pub(crate) fn h0(&self, nu: f64, lambda: f64) -> DMatrix<C64> {
        self.h_transformed(nu, lambda, 0.0, 0.0)
    }

    /// Schwinger `Jy = (a^dag b - a b^dag)/2i` restricted to the sector.
    pub(crate) fn jy(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut mat = DMatrix::zeros(d, d);
        for (col, &(q, na, nb)) in self.labels.iter().enumerate() {
            // a^dag b / 2i sends (na, nb) -> (na+1, nb-1)
            if nb >= 1 {
                if let Some(row) = self.position_of(q, na + 1, nb - 1) {
                    let v = C64::new(0.0, -0.5) * C64::from(((na as f64 + 1.0) * nb as f64).sqrt());
                    mat[(row, col)] = v;
                    mat[(col, row)] = v.conj();
                }
            }
        }
        mat
    }

    /// Diagonal of `Jz = (a^dag a - b^dag b)/2` in the sector basis.
    pub(crate) fn jz_diag(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.labels.iter().map(|&(_, na, nb)| (na as f64 - nb as f64) / 2.0),
        )
    }

    /// Lifts a sector vector into the full space.
    pub(crate) fn embed(&self, vec: &DVector<C64>) -> DVector<C64> {
        let mut full = DVector::zeros(self.space.total_dim());
        for (pos, &idx) in self.indices.iter().enumerate() {
            full[idx] = vec[pos];
        }
        full
    }

    /// Restricts a full-space matrix to the sector (test helper).
    #[cfg(test)]
    pub(crate) fn restrict(&self, full: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| full[(self.indices[i], self.indices[j])])
    }
}
