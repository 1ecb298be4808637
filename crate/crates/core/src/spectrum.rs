//! All `n` single-excitation eigenvalues.
//!
//! The working solver counts sign changes of the leading principal minors
//! (Sylvester inertia) and bisects on that count. A cyclic Jacobi
//! diagonalization of the dense matrix serves as the independent oracle, and
//! the two decoupled limits `a = 0` and `b = 0` have exact spectra.

use std::f64::consts::PI;

use crate::determinant::{minor_sequence, negative_inertia, BandLu};
use crate::error::{ChainError, Result};
use crate::model::{build_hamiltonian, ChainParams};

/// Largest dimension the dense oracle accepts.
pub const DENSE_LIMIT: usize = 4096;
/// Relative gap below which converged roots are merged.
pub const CLUSTER_TOL: f64 = 1e-9;
/// Relative padding of the Gershgorin bracket.
pub const BRACKET_PAD: f64 = 1e-6;
/// Half-width, relative to the energy scale, of the determinant-sign bracket
/// placed around each count-based root.
pub const POLISH_PAD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Bisection,
    DenseOracle,
    LimitA0,
    LimitB0,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bisection => "bisection",
            Method::DenseOracle => "dense_oracle",
            Method::LimitA0 => "limit_a0",
            Method::LimitB0 => "limit_b0",
        }
    }
}

/// Sorted eigenvalues with their scaled characteristic-polynomial residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub method: Method,
}

impl Spectrum {
    fn from_values(params: &ChainParams, mut eigenvalues: Vec<f64>, method: Method) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let residuals = eigenvalues.iter().map(|&e| residual(params, e)).collect();
        Self { eigenvalues, residuals, method }
    }
}

/// `|T_n(E)| / (|λ| + 2|a| + 2|b|)ⁿ`, evaluated in logarithms so that it
/// stays finite for long chains.
pub fn residual(params: &ChainParams, energy: f64) -> f64 {
    let seq = minor_sequence(params, energy);
    let n = seq.len();
    if seq.mantissas[n - 1] == 0.0 {
        return 0.0;
    }
    let norm = params.lambda(energy).abs() + params.gershgorin_radius();
    if norm == 0.0 {
        return 0.0;
    }
    (seq.log2_abs(n) - n as f64 * norm.log2()).exp2()
}

/// Number of eigenvalues strictly below `energy`.
///
/// Equals the number of sign changes in `(1, T₁, …, T_n)`. The count is read
/// from a block `LDLᵀ` elimination rather than from the minors themselves,
/// because summing the five-term recurrence loses the sign of `T_n` near
/// double roots while the elimination stays backward stable.
pub fn count_below(params: &ChainParams, energy: f64) -> usize {
    negative_inertia(params, energy)
}

/// Bisection on the inertia count over the padded Gershgorin interval.
pub fn eigenvalues_bisection(params: &ChainParams, tol: f64) -> Result<Spectrum> {
    params.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ChainError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let scale = params.energy_scale();
    let radius = params.gershgorin_radius() + BRACKET_PAD * scale;
    let lo = params.omega0 - radius;
    let hi = params.omega0 + radius;
    let mut roots = Vec::with_capacity(params.n);
    let (clo, chi) = (count_below(params, lo), count_below(params, hi));
    isolate(params, tol, lo, hi, clo, chi, &mut roots);
    debug_assert_eq!(roots.len(), params.n);
    roots.sort_by(f64::total_cmp);
    polish_simple_roots(params, tol, &mut roots);
    snap_clusters(&mut roots, CLUSTER_TOL * scale);
    Ok(Spectrum::from_values(params, roots, Method::Bisection))
}

/// Refines each well-separated root by bisection on the sign of
/// `det(H − E·I)` from a partially pivoted band LU.
///
/// The inertia count can misplace a root by up to about `1e−10·scale` when
/// the adjacent-row pivots grow, while the LU determinant sign is backward
/// stable. Roots with a neighbour inside `4·POLISH_PAD·scale` keep their
/// count-based value.
fn polish_simple_roots(params: &ChainParams, tol: f64, roots: &mut [f64]) {
    let m = match build_hamiltonian(params) {
        Ok(m) => m,
        Err(_) => return,
    };
    let scale = params.energy_scale();
    let pad = POLISH_PAD * scale;
    let sign = |e: f64| BandLu::factor(&m, e, 0.0).det_sign();
    let original = roots.to_vec();
    for (k, root) in roots.iter_mut().enumerate() {
        let isolated = [k.checked_sub(1).map(|j| original[j]), original.get(k + 1).copied()]
            .into_iter()
            .flatten()
            .all(|o| (o - original[k]).abs() > 4.0 * pad);
        if !isolated {
            continue;
        }
        let (mut lo, mut hi) = (original[k] - pad, original[k] + pad);
        let (slo, shi) = (sign(lo), sign(hi));
        if slo == 0.0 || shi == 0.0 || slo == shi {
            continue;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let s = sign(mid);
            if s == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if s == slo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        *root = 0.5 * (lo + hi);
    }
}

fn isolate(params: &ChainParams, tol: f64, lo: f64, hi: f64, clo: usize, chi: usize, out: &mut Vec<f64>) {
    if chi <= clo {
        return;
    }
    let mid = 0.5 * (lo + hi);
    // Stop on the tolerance or when the midpoint no longer splits the bracket.
    if hi - lo <= tol || mid <= lo || mid >= hi {
        out.extend(std::iter::repeat_n(mid, chi - clo));
        return;
    }
    // Rounding can make counts locally non-monotone; clamping keeps the
    // total number of roots at n.
    let cmid = count_below(params, mid).clamp(clo, chi);
    isolate(params, tol, lo, mid, clo, cmid, out);
    isolate(params, tol, mid, hi, cmid, chi, out);
}

/// Replaces runs of sorted values with consecutive gaps below `gap` by
/// their mean, so exact degeneracies are reported as repeated values.
fn snap_clusters(values: &mut [f64], gap: f64) {
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] < gap {
            end += 1;
        }
        if end - start > 1 {
            let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
            values[start..end].iter_mut().for_each(|v| *v = mean);
        }
        start = end;
    }
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// `m` is row-major `n × n` and is overwritten. Sweeps stop once the
/// off-diagonal Frobenius norm drops to `1e−13·‖M‖_F`.
pub fn jacobi_eigenvalues(m: &mut [f64], n: usize) -> Vec<f64> {
    let norm: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = 1e-13 * norm;
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(m) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

pub fn eigenvalues_dense_oracle(params: &ChainParams) -> Result<Spectrum> {
    if params.n > DENSE_LIMIT {
        return Err(ChainError::SizeLimit { n: params.n, max: DENSE_LIMIT });
    }
    let mut dense = build_hamiltonian(params)?.to_dense();
    let values = jacobi_eigenvalues(&mut dense, params.n);
    Ok(Spectrum::from_values(params, values, Method::DenseOracle))
}

/// Exact spectrum without nearest-neighbour coupling: two decoupled
/// subchains of lengths `⌈n/2⌉` and `⌊n/2⌋`.
pub fn spectrum_a_zero(params: &ChainParams) -> Result<Spectrum> {
    params.validate()?;
    if params.a != 0.0 {
        return Err(ChainError::InvalidArgument(format!("a = 0 required, got a = {}", params.a)));
    }
    let (n, b, w) = (params.n, params.b, params.omega0);
    let mut values = Vec::with_capacity(n);
    if n % 2 == 0 {
        for k in 1..=n / 2 {
            let e = w - 2.0 * b * (2.0 * k as f64 * PI / (n + 2) as f64).cos();
            values.push(e);
            values.push(e);
        }
    } else {
        for k in 1..=(n - 1) / 2 {
            values.push(w - 2.0 * b * (2.0 * k as f64 * PI / (n + 1) as f64).cos());
        }
        for k in 1..=n.div_ceil(2) {
            values.push(w - 2.0 * b * (2.0 * k as f64 * PI / (n + 3) as f64).cos());
        }
    }
    Ok(Spectrum::from_values(params, values, Method::LimitA0))
}

/// Exact spectrum of the nearest-neighbour chain.
pub fn spectrum_b_zero(params: &ChainParams) -> Result<Spectrum> {
    params.validate()?;
    if params.b != 0.0 {
        return Err(ChainError::InvalidArgument(format!("b = 0 required, got b = {}", params.b)));
    }
    let n = params.n;
    let values = (1..=n)
        .map(|k| params.omega0 - 2.0 * params.a * (k as f64 * PI / (n + 1) as f64).cos())
        .collect();
    Ok(Spectrum::from_values(params, values, Method::LimitB0))
}

/// Exact limit spectrum when one coupling vanishes exactly, bisection
/// otherwise.
pub fn solve_spectrum(params: &ChainParams, tol: f64) -> Result<Spectrum> {
    if params.b == 0.0 {
        spectrum_b_zero(params)
    } else if params.a == 0.0 {
        spectrum_a_zero(params)
    } else {
        eigenvalues_bisection(params, tol)
    }
}
