//! Chain parameters and the single-excitation Hamiltonian block.
//!
//! With one excitation shared by `n` atoms the Hamiltonian restricted to the
//! sector is an `n × n` symmetric Toeplitz matrix with `ω₀` on the diagonal,
//! the nearest-neighbour coupling `a` on the first off-diagonals and the
//! next-nearest-neighbour coupling `b` on the second. The matrix is kept as
//! its three defining scalars; dense storage only appears in the oracles.

use crate::error::{ChainError, Result};

/// Parameters of a finite chain: length, transition frequency and couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub n: usize,
    pub omega0: f64,
    pub a: f64,
    pub b: f64,
}

impl ChainParams {
    pub fn new(n: usize, omega0: f64, a: f64, b: f64) -> Result<Self> {
        let params = Self { n, omega0, a, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(ChainError::InvalidLength(self.n));
        }
        for (name, value) in [("omega0", self.omega0), ("a", self.a), ("b", self.b)] {
            if !value.is_finite() {
                return Err(ChainError::NonFinite { name, value });
            }
        }
        Ok(())
    }

    /// Same couplings, different length.
    pub fn with_len(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    /// Half-width of the Gershgorin enclosure `ω₀ ± (2|a| + 2|b|)`.
    pub fn gershgorin_radius(&self) -> f64 {
        2.0 * self.a.abs() + 2.0 * self.b.abs()
    }

    /// Magnitude used to turn relative tolerances into absolute ones.
    pub fn energy_scale(&self) -> f64 {
        (self.omega0.abs() + self.gershgorin_radius()).max(1.0)
    }

    pub fn lambda(&self, energy: f64) -> f64 {
        self.omega0 - energy
    }
}

/// Real symmetric matrix of bandwidth two with constant diagonals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricBandMatrix {
    pub n: usize,
    pub diag: f64,
    pub off1: f64,
    pub off2: f64,
}

impl SymmetricBandMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag,
            1 => self.off1,
            2 => self.off2,
            _ => 0.0,
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                dense[i * n + j] = self.get(i, j);
            }
        }
        dense
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let n = self.n;
        (0..n)
            .map(|i| {
                (i.saturating_sub(2)..(i + 3).min(n))
                    .map(|j| self.get(i, j) * v[j])
                    .sum()
            })
            .collect()
    }

    /// Frobenius norm computed from the band description.
    pub fn frobenius_norm(&self) -> f64 {
        let n = self.n as f64;
        let n1 = (self.n.saturating_sub(1)) as f64;
        let n2 = (self.n.saturating_sub(2)) as f64;
        (n * self.diag * self.diag + 2.0 * n1 * self.off1 * self.off1 + 2.0 * n2 * self.off2 * self.off2).sqrt()
    }
}

pub fn build_hamiltonian(params: &ChainParams) -> Result<SymmetricBandMatrix> {
    params.validate()?;
    Ok(SymmetricBandMatrix {
        n: params.n,
        diag: params.omega0,
        off1: params.a,
        off2: params.b,
    })
}

/// Trace and trace of the square of the Hamiltonian block, i.e. the sum and
/// the sum of squares of its eigenvalues.
pub fn trace_moments(params: &ChainParams) -> (f64, f64) {
    let n = params.n as f64;
    let nn_pairs = params.n.saturating_sub(1) as f64;
    let nnn_pairs = params.n.saturating_sub(2) as f64;
    let m1 = n * params.omega0;
    let m2 = n * params.omega0 * params.omega0
        + 2.0 * nn_pairs * params.a * params.a
        + 2.0 * nnn_pairs * params.b * params.b;
    (m1, m2)
}
