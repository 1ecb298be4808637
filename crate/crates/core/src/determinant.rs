//! Characteristic determinant `T_n = det(H − E·I)` evaluated three ways.
//!
//! The leading principal minors obey a five-term linear recurrence whose
//! characteristic roots are `b`, `x±` and `y±`. The recurrence is the working
//! evaluator, the dense elimination is an independent oracle, and the
//! explicit root expansion is kept for cross-validation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ChainError, Result};
use crate::model::{ChainParams, SymmetricBandMatrix};

/// Rescaling is triggered once a minor leaves `[2⁻¹⁰⁰, 2¹⁰⁰]`.
const RESCALE_EXP: i32 = 100;

/// Leading principal minors `T₁ … T_n` at one trial energy.
///
/// Each minor is stored as `mantissa · 2^exponent`. All minors inside the
/// recurrence window share one exponent, so the recurrence runs on plain
/// mantissas and only a single power of two changes when rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorSequence {
    pub lambda: f64,
    pub mantissas: Vec<f64>,
    pub exponents: Vec<i32>,
}

impl MinorSequence {
    pub fn len(&self) -> usize {
        self.mantissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissas.is_empty()
    }

    /// `T_k` for `1 ≤ k ≤ n`, possibly overflowing to infinity.
    pub fn value(&self, k: usize) -> f64 {
        scale_pow2(self.mantissas[k - 1], self.exponents[k - 1])
    }

    pub fn values(&self) -> Vec<f64> {
        (1..=self.len()).map(|k| self.value(k)).collect()
    }

    /// `T_n` for the full chain.
    pub fn last(&self) -> f64 {
        self.value(self.len())
    }

    /// `log₂|T_k|`, finite whenever the minor is non-zero.
    pub fn log2_abs(&self, k: usize) -> f64 {
        self.mantissas[k - 1].abs().log2() + self.exponents[k - 1] as f64
    }

    /// Number of sign changes in `(1, T₁, …, T_n)`.
    ///
    /// Zero minors are skipped, so they inherit the sign of their
    /// predecessor; callers that need strict counts perturb the energy.
    pub fn sign_changes(&self) -> usize {
        let mut prev = 1.0f64;
        let mut changes = 0;
        for &m in &self.mantissas {
            if m == 0.0 {
                continue;
            }
            if (m < 0.0) != (prev < 0.0) {
                changes += 1;
            }
            prev = m;
        }
        changes
    }

    pub fn has_zero(&self) -> bool {
        self.mantissas.contains(&0.0)
    }
}

fn scale_pow2(m: f64, e: i32) -> f64 {
    // Split the exponent so neither factor overflows on its own.
    let half = e / 2;
    m * 2f64.powi(half) * 2f64.powi(e - half)
}

/// Determinant of the leading `k × k` block by cofactor expansion, `k ≤ 5`.
fn laplace_det(entry: &impl Fn(usize, usize) -> f64, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => entry(rows[0], cols[0]),
        _ => {
            let r = rows[0];
            let rest = &rows[1..];
            let mut det = 0.0;
            for (idx, &c) in cols.iter().enumerate() {
                let v = entry(r, c);
                if v == 0.0 {
                    continue;
                }
                let minor_cols: Vec<usize> = cols.iter().enumerate().filter(|&(i, _)| i != idx).map(|(_, &c)| c).collect();
                let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
                det += sign * v * laplace_det(entry, rest, &minor_cols);
            }
            det
        }
    }
}

/// Coefficients of `T_k = Σ_{j=1..5} c_j T_{k−j}`.
pub fn recurrence_coeffs(a: f64, b: f64, lambda: f64) -> [f64; 5] {
    let a2 = a * a;
    let b2 = b * b;
    let b3 = b2 * b;
    [
        lambda - b,
        lambda * b - a2,
        a2 * b - b2 * lambda,
        b3 * b - b3 * lambda,
        b3 * b2,
    ]
}

pub fn minor_sequence(params: &ChainParams, energy: f64) -> MinorSequence {
    let n = params.n;
    let lambda = params.lambda(energy);
    let (a, b) = (params.a, params.b);
    let entry = |i: usize, j: usize| match i.abs_diff(j) {
        0 => lambda,
        1 => a,
        2 => b,
        _ => 0.0,
    };
    let coeffs = recurrence_coeffs(a, b, lambda);
    let mut mantissas = Vec::with_capacity(n);
    let mut exponents = Vec::with_capacity(n);
    let mut exp = 0i32;
    for k in 1..=n {
        let m = if k <= 5 {
            let idx: Vec<usize> = (0..k).collect();
            scale_pow2(laplace_det(&entry, &idx, &idx), -exp)
        } else {
            (0..5).map(|j| coeffs[j] * mantissas[k - 2 - j]).sum()
        };
        mantissas.push(m);
        exponents.push(exp);
        // The recurrence only reaches five entries back, so rescaling that
        // window keeps every operand on the shared exponent.
        let window = k.saturating_sub(5)..k;
        let peak = mantissas[window.clone()].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let step = if peak > 2f64.powi(RESCALE_EXP) {
            RESCALE_EXP
        } else if peak > 0.0 && peak < 2f64.powi(-RESCALE_EXP) {
            -RESCALE_EXP
        } else {
            0
        };
        if step != 0 {
            let factor = 2f64.powi(-step);
            exp += step;
            for i in window {
                mantissas[i] *= factor;
                exponents[i] = exp;
            }
        }
    }
    MinorSequence { lambda, mantissas, exponents }
}

/// LU factors of a pentadiagonal matrix with partial pivoting.
///
/// Row `i` of `u` holds columns `i−2 ..= i+4`; pivoting widens the upper
/// band from two to four.
pub(crate) struct BandLu {
    n: usize,
    u: Vec<[f64; 7]>,
    lower: Vec<[f64; 2]>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub(crate) fn factor(m: &SymmetricBandMatrix, shift: f64, tiny: f64) -> Self {
        let n = m.n;
        let mut u = vec![[0.0; 7]; n];
        for (i, row) in u.iter_mut().enumerate() {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                row[j + 2 - i] = m.get(i, j) - if i == j { shift } else { 0.0 };
            }
        }
        let at = |u: &Vec<[f64; 7]>, i: usize, j: usize| u[i][j + 2 - i];
        let mut lower = vec![[0.0; 2]; n];
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + 2).min(n - 1);
            let p = (k..=last).max_by(|&r, &s| at(&u, r, k).abs().total_cmp(&at(&u, s, k).abs())).unwrap_or(k);
            pivots[k] = p;
            let cmax = (k + 4).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    let (x, y) = (u[k][c + 2 - k], u[p][c + 2 - p]);
                    u[k][c + 2 - k] = y;
                    u[p][c + 2 - p] = x;
                }
            }
            if u[k][2] == 0.0 {
                u[k][2] = tiny;
            }
            let piv = u[k][2];
            for r in k + 1..=last {
                let f = u[r][k + 2 - r] / piv;
                lower[k][r - k - 1] = f;
                u[r][k + 2 - r] = 0.0;
                for c in k + 1..=cmax {
                    u[r][c + 2 - r] -= f * u[k][c + 2 - k];
                }
            }
        }
        Self { n, u, lower, pivots }
    }

    /// Sign of the determinant of the factored matrix, zero if singular.
    pub(crate) fn det_sign(&self) -> f64 {
        let mut sign = 1.0;
        for k in 0..self.n {
            let d = self.u[k][2];
            if d == 0.0 {
                return 0.0;
            }
            if d < 0.0 {
                sign = -sign;
            }
            if self.pivots[k] != k {
                sign = -sign;
            }
        }
        sign
    }

    pub(crate) fn solve(&self, rhs: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            rhs.swap(k, self.pivots[k]);
            for r in k + 1..=(k + 2).min(n - 1) {
                rhs[r] -= self.lower[k][r - k - 1] * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let last = (k + 4).min(n - 1);
            let s: f64 = rhs[k + 1..=last].iter().zip(&self.u[k][3..]).map(|(x, u)| u * x).sum();
            rhs[k] = (rhs[k] - s) / self.u[k][2];
        }
    }
}

/// Bunch–Kaufman threshold for switching to a 2×2 pivot.
const BK_ALPHA: f64 = 0.6404;

/// Inertia of `H − E·I`: the number of negative eigenvalues.
///
/// Symmetric block `LDLᵀ` elimination with 1×1 pivots, or 2×2 pivots on
/// `(k, k+1)` when the diagonal pivot is small against its neighbour. A 2×2
/// pivot on adjacent rows creates no fill outside the band, so the whole
/// elimination runs on a three-entry window. Sylvester's law makes the count
/// of negative pivot eigenvalues equal to the number of sign changes in
/// `(1, T₁, …, T_n)` whenever no minor vanishes. A zero 1×1 pivot is
/// replaced by a tiny positive value, an infinitesimal shift of one
/// diagonal entry that keeps the count strict.
pub fn negative_inertia(params: &ChainParams, energy: f64) -> usize {
    let n = params.n;
    let lambda = params.lambda(energy);
    let (a, b) = (params.a, params.b);
    let pivmin = f64::EPSILON * f64::EPSILON * params.energy_scale();
    // Window: (k,k), (k,k+1) and (k+1,k+1) of the current Schur complement.
    let (mut p, mut q, mut r) = (lambda, a, lambda);
    let mut negatives = 0;
    let mut k = 0;
    while k < n {
        if k + 1 < n && p.abs() < BK_ALPHA * q.abs() {
            let det = p * r - q * q;
            negatives += if det < 0.0 {
                1
            } else if p + r < 0.0 {
                2
            } else {
                0
            };
            // Rows k+2 and k+3 see the block through (b, a) and (0, b).
            let s00 = (r * b * b - 2.0 * q * a * b + p * a * a) / det;
            let s01 = (p * a * b - q * b * b) / det;
            let s11 = p * b * b / det;
            p = lambda - s00;
            q = a - s01;
            r = lambda - s11;
            k += 2;
        } else {
            if p.abs() < pivmin {
                p = pivmin;
            }
            if p < 0.0 {
                negatives += 1;
            }
            let next_p = r - q * q / p;
            let next_q = a - q * b / p;
            let next_r = lambda - b * b / p;
            p = next_p;
            q = next_q;
            r = next_r;
            k += 1;
        }
    }
    negatives
}

/// `D₂ … D_n` with `D_k = a·T_{k−1} − b·D_{k−1}` and `D₂ = aλ − ab`.
pub fn dn_sequence(params: &ChainParams, energy: f64) -> Result<Vec<f64>> {
    if params.n < 2 {
        return Err(ChainError::InvalidLength(params.n));
    }
    let t = minor_sequence(params, energy).values();
    let (a, b) = (params.a, params.b);
    let lambda = params.lambda(energy);
    let mut d = Vec::with_capacity(params.n - 1);
    d.push(a * lambda - a * b);
    for k in 3..=params.n {
        let prev = *d.last().unwrap();
        d.push(a * t[k - 2] - b * prev);
    }
    Ok(d)
}

/// `det(H − E·I)` by dense LU with partial pivoting.
pub fn direct_determinant(matrix: &SymmetricBandMatrix, energy: f64) -> f64 {
    let n = matrix.n;
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let v = matrix.get(i, j);
        if i == j {
            v - energy
        } else {
            v
        }
    });
    shifted.lu().determinant()
}

/// Constants of `T_n = G·bⁿ + P₊x₊ⁿ + P₋x₋ⁿ + Q₊y₊ⁿ + Q₋y₋ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralSolutionCoeffs {
    pub g: Complex64,
    pub p_plus: Complex64,
    pub p_minus: Complex64,
    pub q_plus: Complex64,
    pub q_minus: Complex64,
    pub x_plus: Complex64,
    pub x_minus: Complex64,
    pub y_plus: Complex64,
    pub y_minus: Complex64,
    pub b_root: f64,
}

pub fn general_solution_coeffs(params: &ChainParams, energy: f64) -> Result<GeneralSolutionCoeffs> {
    let (a, b) = (params.a, params.b);
    let lambda = params.lambda(energy);
    let scale = params.energy_scale();
    let guard = 1e-8 * scale;
    let check = |which: &'static str, v: Complex64, unit: f64| {
        let magnitude = v.norm();
        if magnitude < guard * unit {
            Err(ChainError::NearSingularCoefficient { which, magnitude })
        } else {
            Ok(())
        }
    };

    let delta = Complex64::from((lambda + 2.0 * b).powi(2) - 4.0 * a * a).sqrt();
    check("delta", delta, 1.0)?;
    let chi_p = (lambda - 2.0 * b + delta) / 2.0;
    let chi_m = (lambda - 2.0 * b - delta) / 2.0;
    let s_p = (chi_p * chi_p - 4.0 * b * b).sqrt();
    let s_m = (chi_m * chi_m - 4.0 * b * b).sqrt();
    check("chi_plus^2 - 4b^2", s_p, 1.0)?;
    check("chi_minus^2 - 4b^2", s_m, 1.0)?;
    let den = a * a + 8.0 * b * b - 4.0 * b * lambda;
    check("a^2 + 8b^2 - 4b*lambda", Complex64::from(den), scale)?;

    let g = Complex64::from(2.0 * b * b / den);
    let p_common = (chi_p + b) / (2.0 * delta) + b * (2.0 * b * (delta - 2.0 * b - 3.0 * chi_p) + a * a) / (2.0 * delta * den);
    let p_split = (lambda * (lambda + 2.0 * b + delta) - 2.0 * a * a) / (4.0 * delta * s_p);
    let q_common = -(chi_m + b) / (2.0 * delta) + b * (2.0 * b * (delta + 2.0 * b + 3.0 * chi_m) - a * a) / (2.0 * delta * den);
    let q_split = -(lambda * (lambda + 2.0 * b - delta) - 2.0 * a * a) / (4.0 * delta * s_m);

    Ok(GeneralSolutionCoeffs {
        g,
        p_plus: p_common + p_split,
        p_minus: p_common - p_split,
        q_plus: q_common + q_split,
        q_minus: q_common - q_split,
        x_plus: (chi_p + s_p) / 2.0,
        x_minus: (chi_p - s_p) / 2.0,
        y_plus: (chi_m + s_m) / 2.0,
        y_minus: (chi_m - s_m) / 2.0,
        b_root: b,
    })
}

impl GeneralSolutionCoeffs {
    pub fn evaluate(&self, n: usize) -> Complex64 {
        let k = n as i32;
        self.g * self.b_root.powi(k)
            + self.p_plus * self.x_plus.powi(k)
            + self.p_minus * self.x_minus.powi(k)
            + self.q_plus * self.y_plus.powi(k)
            + self.q_minus * self.y_minus.powi(k)
    }
}

/// `T_n` from the explicit root expansion; `n` overrides `params.n`.
pub fn general_solution_tn(params: &ChainParams, energy: f64, n: usize) -> Result<f64> {
    let coeffs = general_solution_coeffs(params, energy)?;
    let value = coeffs.evaluate(n);
    debug_assert!(
        value.im.abs() <= 1e-8 * (1.0 + value.re.abs()) || !value.re.is_finite(),
        "imaginary residue {} for T_{n}",
        value.im
    );
    Ok(value.re)
}
