//! Single-excitation eigenvectors.
//!
//! Vectors come from inverse iteration on a banded LU factorization. The
//! four-exponential ansatz `c_j = A w₊^j + B w₊^{−j} + C w₋^j + D w₋^{−j}` is
//! fitted to them, and the rank of the boundary conditions is checked.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::determinant::BandLu;
use crate::error::{ChainError, Result};
use crate::model::{build_hamiltonian, ChainParams, SymmetricBandMatrix};
use crate::spectrum::eigenvalues_bisection;

/// Relative shift applied to `E` so the shifted matrix is never exactly singular.
pub const SHIFT_JITTER: f64 = 1e-11;
/// Residual, relative to the energy scale, at which iteration stops.
pub const CONVERGED_RESIDUAL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 50;
/// Eigenvalues closer than this (relative to the energy scale) are
/// orthogonalized against each other.
pub const CLUSTER_TOL: f64 = 1e-3;
/// Relative singular-value threshold of the boundary rank test.
pub const RANK_TOL: f64 = 1e-10;

/// One eigenvector with its eigenvalue and residual `‖Hc − Ec‖₂/‖c‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub energy: f64,
    pub c: Vec<f64>,
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(x, y)| x * y).sum()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for q in against {
        let d = dot(v, q);
        v.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
    }
}

/// `‖Hc − Ec‖₂/‖c‖₂`.
pub fn eigen_residual(m: &SymmetricBandMatrix, energy: f64, c: &[f64]) -> f64 {
    let hc = m.mul_vec(c);
    let r: Vec<f64> = hc.iter().zip(c).map(|(h, x)| h - energy * x).collect();
    norm(&r) / norm(c)
}

/// Eigenvector for an eigenvalue estimate `energy`, orthogonal to `deflate`.
///
/// The returned energy is the Rayleigh quotient of the converged vector.
pub fn eigenvector_inverse_iteration(params: &ChainParams, energy: f64, deflate: &[Vec<f64>]) -> Result<EigenPair> {
    params.validate()?;
    if !energy.is_finite() {
        return Err(ChainError::NonFinite { name: "E", value: energy });
    }
    let n = params.n;
    let m = build_hamiltonian(params)?;
    let scale = params.energy_scale();
    let lu = BandLu::factor(&m, energy + SHIFT_JITTER * scale, f64::EPSILON * scale);
    // Deterministic start vector with components along every mode.
    // Unit vectors back it up when deflation leaves nothing of it.
    let spread: Vec<f64> = (0..n).map(|j| 1.0 + 0.5 * ((j as f64 + 1.0) * 0.618_033_988_75).sin()).collect();
    let units = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect());
    let mut v = std::iter::once(spread)
        .chain(units)
        .map(|mut s: Vec<f64>| {
            let before = norm(&s);
            orthogonalize(&mut s, deflate);
            orthogonalize(&mut s, deflate);
            let kept = norm(&s) / before;
            (kept, s)
        })
        .find(|(kept, _)| *kept > 1e-3)
        .map(|(_, s)| s)
        .unwrap_or_else(|| vec![0.0; n]);
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for _ in 0..MAX_ITERATIONS {
        let nv = norm(&v);
        if nv == 0.0 || !nv.is_finite() {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        lu.solve(&mut v);
        orthogonalize(&mut v, deflate);
        orthogonalize(&mut v, deflate);
        let nv = norm(&v);
        if nv == 0.0 || !nv.is_finite() {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let rq = dot(&v, &m.mul_vec(&v));
        let res = eigen_residual(&m, rq, &v);
        let prev = best.as_ref().map_or(f64::INFINITY, |b| b.1);
        if res < prev {
            best = Some((rq, res, v.clone()));
        }
        // Past the threshold, keep refining only while the residual still halves.
        if prev <= CONVERGED_RESIDUAL * scale && res > 0.5 * prev {
            break;
        }
    }
    match best {
        Some((rq, res, mut c)) if res <= CONVERGED_RESIDUAL * scale => {
            // Fix the overall sign so the largest component is positive.
            let lead = c.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                c.iter_mut().for_each(|x| *x = -*x);
            }
            Ok(EigenPair { energy: rq, c, residual: res })
        }
        other => Err(ChainError::NotConverged {
            iterations: MAX_ITERATIONS,
            residual: other.map_or(f64::NAN, |b| b.1),
        }),
    }
}

/// All eigenpairs, in ascending order of energy, from a solved spectrum.
pub fn eigenpairs(params: &ChainParams, energies: &[f64]) -> Result<Vec<EigenPair>> {
    let scale = params.energy_scale();
    let mut out: Vec<EigenPair> = Vec::with_capacity(energies.len());
    for (k, &e) in energies.iter().enumerate() {
        let deflate: Vec<Vec<f64>> = out
            .iter()
            .zip(energies)
            .take(k)
            .filter(|(_, &ej)| (ej - e).abs() <= CLUSTER_TOL * scale)
            .map(|(p, _)| p.c.clone())
            .collect();
        out.push(eigenvector_inverse_iteration(params, e, &deflate)?);
    }
    Ok(out)
}

/// Fitted four-exponential representation of an eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzFit {
    pub z_plus: Complex64,
    pub z_minus: Complex64,
    pub w_plus: Complex64,
    pub w_minus: Complex64,
    /// Amplitudes `A, B, C, D` of `w₊^j, w₊^{−j}, w₋^j, w₋^{−j}`.
    pub amplitudes: [Complex64; 4],
    pub fit_error: f64,
}

/// Roots `z±` of `b(z² − 2) + az = E − ω₀` and `w± = exp(arccosh(z±/2))`.
fn modes(params: &ChainParams, energy: f64) -> Result<[Complex64; 4]> {
    let (a, b) = (params.a, params.b);
    let scale = params.energy_scale();
    if b.abs() < 1e-12 * scale {
        return Err(ChainError::DegenerateModes("b vanishes, the mode quadratic collapses"));
    }
    let e = energy - params.omega0;
    let root = Complex64::from(a * a + 4.0 * b * (2.0 * b + e)).sqrt();
    let zp = (-a + root) / (2.0 * b);
    let zm = (-a - root) / (2.0 * b);
    if (zp - zm).norm() < 1e-8 * zp.norm().max(zm.norm()).max(1.0) {
        return Err(ChainError::DegenerateModes("z+ and z- coincide"));
    }
    let wp = (zp / 2.0).acosh().exp();
    let wm = (zm / 2.0).acosh().exp();
    for w in [wp, wm] {
        if !w.is_finite() || w.norm() == 0.0 || !(1.0 / w).is_finite() {
            return Err(ChainError::DegenerateModes("mode base is zero or infinite"));
        }
    }
    Ok([zp, zm, wp, wm])
}

fn mode_basis(wp: Complex64, wm: Complex64, js: &[i64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(js.len(), 4, |r, c| {
        let j = js[r] as i32;
        match c {
            0 => wp.powi(j),
            1 => wp.powi(-j),
            2 => wm.powi(j),
            _ => wm.powi(-j),
        }
    })
}

/// Scales each column to unit maximum modulus, returning the factors.
fn normalize_columns(m: &mut DMatrix<Complex64>) -> [f64; 4] {
    let mut s = [1.0; 4];
    for (c, sc) in s.iter_mut().enumerate() {
        let mx = m.column(c).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if mx > 0.0 && mx.is_finite() {
            *sc = mx;
            m.column_mut(c).iter_mut().for_each(|z| *z /= mx);
        }
    }
    s
}

/// `[[Re M, −Im M], [Im M, Re M]]`, the real form of a complex matrix.
fn real_embedding(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    DMatrix::from_fn(2 * rows, 2 * cols, |r, k| {
        let z = m[(r % rows, k % cols)];
        match (r < rows, k < cols) {
            (true, true) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
            (false, false) => z.re,
        }
    })
}

/// Minimum-norm least squares `M x ≈ c` for complex `M` and real `c`.
///
/// Solved as the real system in `(Re x, Im x)` by Householder QR: on `M`
/// when it has at least as many rows as unknowns, and on `Mᵀ` for chains
/// shorter than the four-mode basis.
fn min_norm_lstsq(m: &DMatrix<Complex64>, c: &[f64]) -> Result<DVector<Complex64>> {
    let (rows, cols) = m.shape();
    let real = real_embedding(m);
    let rhs = DVector::from_fn(2 * rows, |r, _| if r < rows { c[r] } else { 0.0 });
    let rank_deficient = || ChainError::DegenerateModes("mode basis is rank deficient");
    let well_posed = |r: &DMatrix<f64>| {
        let d = r.diagonal().map(f64::abs);
        d.min() > 1e-13 * d.max()
    };
    let x = if rows >= cols {
        let qr = real.qr();
        let r = qr.r();
        if !well_posed(&r) {
            return Err(rank_deficient());
        }
        r.solve_upper_triangular(&qr.q().tr_mul(&rhs)).ok_or_else(rank_deficient)?
    } else {
        let qr = real.transpose().qr();
        let r = qr.r();
        if !well_posed(&r) {
            return Err(rank_deficient());
        }
        let y = r.transpose().solve_lower_triangular(&rhs).ok_or_else(rank_deficient)?;
        qr.q() * y
    };
    Ok(DVector::from_fn(cols, |k, _| Complex64::new(x[k], x[k + cols])))
}

/// Least-squares fit of the ansatz amplitudes to `pair.c`.
pub fn ansatz_fit(params: &ChainParams, pair: &EigenPair) -> Result<AnsatzFit> {
    let [zp, zm, wp, wm] = modes(params, pair.energy)?;
    let n = pair.c.len();
    let js: Vec<i64> = (1..=n as i64).collect();
    let mut basis = mode_basis(wp, wm, &js);
    let scales = normalize_columns(&mut basis);
    let coef = min_norm_lstsq(&basis, &pair.c)?;
    let recon = &basis * &coef;
    let fit_error = recon.iter().zip(&pair.c).map(|(r, &c)| (r - c).norm()).fold(0.0, f64::max);
    let amplitudes = [0, 1, 2, 3].map(|k| coef[k] / scales[k]);
    Ok(AnsatzFit { z_plus: zp, z_minus: zm, w_plus: wp, w_minus: wm, amplitudes, fit_error })
}

/// Numerical rank of the boundary conditions `c₋₁ = c₀ = c_{n+1} = c_{n+2} = 0`
/// on the amplitudes `(A, B, C, D)`.
///
/// An estimate within `1e−6·scale` of an eigenvalue is first snapped to it,
/// since the rank drop is a property of the exact eigenvalue.
pub fn boundary_rank_check(params: &ChainParams, energy: f64) -> Result<usize> {
    params.validate()?;
    let scale = params.energy_scale();
    let spectrum = eigenvalues_bisection(params, 1e-15 * scale)?;
    let nearest = spectrum.eigenvalues.iter().copied().min_by(|x, y| (x - energy).abs().total_cmp(&(y - energy).abs()));
    let e = match nearest {
        Some(ev) if (ev - energy).abs() <= 1e-6 * scale => ev,
        _ => energy,
    };
    let [_, _, wp, wm] = modes(params, e)?;
    let n = params.n as i64;
    let mut m = mode_basis(wp, wm, &[-1, 0, n + 1, n + 2]);
    normalize_columns(&mut m);
    // The real embedding repeats each complex singular value twice.
    let sv = real_embedding(&m).singular_values();
    let top = sv.max();
    Ok(sv.iter().filter(|&&s| s > RANK_TOL * top).count() / 2)
}
