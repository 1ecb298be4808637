//! Root structure in the angle variables `x` and `y`.
//!
//! With `cos(x ± y) = γe^{±iα}` every eigenvalue maps to a real `x`, and the
//! characteristic equation splits into two tangent equations. This module
//! evaluates those equations, their small-`γ` power series, and numerically
//! tracked root curves `x(γ)` over a grid.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::chebyshev::{alpha_from_cos2, AlphaClass};
use crate::error::{ChainError, Result};
use crate::model::ChainParams;
use crate::spectrum::{eigenvalues_bisection, spectrum_a_zero};

/// Imaginary part tolerated on `x` before `α` is declared inadmissible.
pub const X_REALITY_TOL: f64 = 1e-10;
/// Distance to a tangent pole (as `|cos z|`) that is refused.
pub const POLE_TOL: f64 = 1e-9;
/// Candidates closer than this are treated as coincident while tracking.
const COINCIDENT: f64 = 1e-9;
/// Maximum number of step halvings between two grid points.
const MAX_REFINE_DEPTH: usize = 30;

/// Which of the two tangent equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `tan y·tan((n+2)x) = tan x·tan((n+2)y)`.
    Minus,
    /// `tan x·tan((n+2)x) = tan y·tan((n+2)y)`.
    Plus,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
        }
    }
}

/// `arccos` that stays on the real axis for real arguments in `[−1, 1]`.
fn acos_c(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re.abs() <= 1.0 {
        Complex64::new(z.re.acos(), 0.0)
    } else {
        z.acos()
    }
}

/// `x = ½(arccos γe^{iα} + arccos γe^{−iα})` and `y = ½(arccos γe^{iα} − arccos γe^{−iα})`.
pub fn x_y_from_alpha(gamma: f64, alpha: Complex64) -> Result<(f64, Complex64)> {
    let i = Complex64::new(0.0, 1.0);
    let up = acos_c(gamma * (i * alpha).exp());
    let down = acos_c(gamma * (-i * alpha).exp());
    let x = 0.5 * (up + down);
    if x.im.abs() > X_REALITY_TOL || !x.re.is_finite() {
        return Err(ChainError::InadmissibleAlpha(x.im));
    }
    Ok((x.re, 0.5 * (up - down)))
}

/// `y = ½ arccos(2γ² − cos 2x)` on the principal branch.
pub fn y_of_x(gamma: f64, x: f64) -> Complex64 {
    0.5 * acos_c(Complex64::from(2.0 * gamma * gamma - (2.0 * x).cos()))
}

fn require_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        return Err(ChainError::InvalidArgument(format!("tangent equations need even n, got {n}")));
    }
    Ok(())
}

fn checked_tan(z: Complex64) -> Result<Complex64> {
    let c = z.cos();
    if c.norm() < POLE_TOL {
        return Err(ChainError::PoleProximity { distance: c.norm() });
    }
    Ok(z.sin() / c)
}

/// Residual of one tangent equation at real `x`, with `y = y_of_x(γ, x)`.
pub fn tangent_residual(n: usize, gamma: f64, x: f64, branch: Branch) -> Result<f64> {
    require_even(n)?;
    let m = (n + 2) as f64;
    let y = y_of_x(gamma, x);
    let xc = Complex64::from(x);
    let (tx, tmx) = (checked_tan(xc)?, checked_tan(m * xc)?);
    let (ty, tmy) = (checked_tan(y)?, checked_tan(m * y)?);
    let r = match branch {
        Branch::Minus => ty * tmx - tx * tmy,
        Branch::Plus => tx * tmx - ty * tmy,
    };
    Ok(r.re)
}

/// Pole-free form of the tangent equations, analytic in `x` and `h = γ²`.
///
/// Writing `w = 2h − cos 2x = cos 2y` and `m = (n+2)/2`, the half-angle and
/// multiple-angle identities give `tan y = √(1−w²)/(1+w)` and
/// `tan((n+2)y) = √(1−w²)·U_{m−1}(w)/T_m(w)`. Clearing the square root and
/// every denominator leaves an entire function with the same roots away
/// from `w = ±1`.
pub fn tangent_residual_entire(n: usize, h: Complex64, x: Complex64, branch: Branch) -> Complex64 {
    let m = (n + 2) / 2;
    let w = 2.0 * h - (2.0 * x).cos();
    // U_{m−1}(w) and U_m(w) by the three-term recurrence.
    let (mut u_prev, mut u) = (Complex64::new(1.0, 0.0), 2.0 * w);
    for _ in 1..m {
        let next = 2.0 * w * u - u_prev;
        u_prev = u;
        u = next;
    }
    let (u_m1, u_m) = (u_prev, u);
    let t_m = u_m - w * u_m1;
    let k = (n + 2) as f64;
    let (sx, cx) = (x.sin(), x.cos());
    let (skx, ckx) = ((k * x).sin(), (k * x).cos());
    match branch {
        Branch::Minus => skx * cx * t_m - sx * ckx * u_m1 * (1.0 + w),
        Branch::Plus => sx * skx * t_m - cx * ckx * (1.0 - w) * u_m1,
    }
}

/// Real root of a tangent equation near `guess`, by bracketing and bisection
/// on the pole-free residual.
pub fn tangent_root(n: usize, gamma: f64, guess: f64, branch: Branch) -> Result<f64> {
    require_even(n)?;
    let h = Complex64::from(gamma * gamma);
    let f = |x: f64| tangent_residual_entire(n, h, Complex64::from(x), branch).re;
    let f0 = f(guess);
    if f0 == 0.0 {
        return Ok(guess);
    }
    let mut radius = 1e-9;
    let max_radius = 0.25 * std::f64::consts::PI / (n + 2) as f64;
    let bracket = loop {
        if radius > max_radius {
            return Err(ChainError::RootNotFound(guess));
        }
        let (l, r) = (guess - radius, guess + radius);
        let (fl, fr) = (f(l), f(r));
        // Prefer the side that brackets closest to the guess.
        if fl.signum() != f0.signum() {
            break (l, guess);
        }
        if fr.signum() != f0.signum() {
            break (guess, r);
        }
        radius *= 2.0;
    };
    let (mut lo, mut hi) = bracket;
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `λ` for a real `x` on a root curve: `λ = 16b·cos²x·cos²y − 8bγ² − 2b`,
/// from `cos α = cos x cos y / γ` and `λ + 2b = 2a cos 2α` with `a = 4bγ²`.
pub fn lambda_from_x(b: f64, gamma: f64, x: f64) -> f64 {
    let cx2 = x.cos().powi(2);
    let cy2 = 0.5 * (1.0 + 2.0 * gamma * gamma - (2.0 * x).cos());
    16.0 * b * cx2 * cy2 - 8.0 * b * gamma * gamma - 2.0 * b
}

/// `λ = 2a·cos 2α − 2b`; `cos 2α` must be real.
pub fn lambda_from_alpha(params: &ChainParams, alpha: Complex64) -> Result<f64> {
    let c = (2.0 * alpha).cos();
    if c.im.abs() > 1e-10 * c.re.abs().max(1.0) {
        return Err(ChainError::NonRealCosine(c.im));
    }
    Ok(2.0 * params.a * c.re - 2.0 * params.b)
}

/// `E = ω₀ − λ` for an admissible `α`.
pub fn energy_from_alpha(params: &ChainParams, alpha: Complex64) -> Result<f64> {
    Ok(params.omega0 - lambda_from_alpha(params, alpha)?)
}

/// Truncated small-`γ` series of a root of one tangent equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub x0: f64,
    /// Coefficients of `γ⁰ … γ⁶`; odd orders are zero.
    pub coefficients: [f64; 7],
    pub branch: Branch,
}

impl SeriesExpansion {
    pub fn new(n: usize, k: usize, branch: Branch) -> Result<Self> {
        require_even(n)?;
        if k < 1 || k > n / 2 {
            return Err(ChainError::InvalidArgument(format!("k must lie in 1..={}, got {k}", n / 2)));
        }
        let x0 = series_x0(n, k);
        let (s, c) = x0.sin_cos();
        let big = ((n + 2) * (n + 2)) as f64;
        let (c2, c4, c6) = match branch {
            Branch::Minus => (
                -s / (2.0 * c),
                -(2.0 * c * c - 1.0) / (8.0 * s * c.powi(3)),
                (4.0 * big * c.powi(8) + 6.0 * c.powi(6) - 6.0 * big * c.powi(6) - 8.0 * c.powi(4)
                    + 2.0 * big * c.powi(4)
                    + 8.0 * c * c
                    - 3.0)
                    / (48.0 * s.powi(3) * c.powi(5)),
            ),
            Branch::Plus => (
                -c / (2.0 * s),
                // The order-γ⁴ numerator is 2cos²x₀ − 1, mirroring the minus
                // branch; a bare 2cos²x₀ misses the expansion by O(γ⁴).
                -(2.0 * c * c - 1.0) / (8.0 * c * s.powi(3)),
                (4.0 * big * c.powi(8) - 6.0 * c.powi(6) - 10.0 * big * c.powi(6)
                    + 10.0 * c.powi(4)
                    + 8.0 * big * c.powi(4)
                    - 10.0 * c * c
                    - 2.0 * big * c * c
                    + 3.0)
                    / (48.0 * s.powi(5) * c.powi(3)),
            ),
        };
        Ok(Self { x0, coefficients: [x0, 0.0, c2, 0.0, c4, 0.0, c6], branch })
    }

    pub fn evaluate(&self, gamma: f64) -> f64 {
        let g2 = gamma * gamma;
        let c = &self.coefficients;
        c[0] + g2 * (c[2] + g2 * (c[4] + g2 * c[6]))
    }
}

/// `x₀ = π/2 + 2kπ/(n+2)`, the `γ = 0` roots of both tangent equations.
pub fn series_x0(n: usize, k: usize) -> f64 {
    FRAC_PI_2 + 2.0 * k as f64 * std::f64::consts::PI / (n + 2) as f64
}

pub fn series_x(n: usize, k: usize, gamma: f64, branch: Branch) -> Result<f64> {
    Ok(SeriesExpansion::new(n, k, branch)?.evaluate(gamma))
}

/// Order-`γ²` coefficient of the root through `x₀`, extracted numerically.
///
/// The root is solved at the complex point `γ² = i·s` with a tiny `s`.
/// Since `x(γ²)` is analytic, `Im x / s` returns the first derivative with
/// no subtractive cancellation, so the result is accurate to rounding.
pub fn extract_gamma2_coefficient(n: usize, x0: f64, branch: Branch) -> Result<f64> {
    require_even(n)?;
    let s = 1e-10;
    let h = Complex64::new(0.0, s);
    let g = |x: Complex64| tangent_residual_entire(n, h, x, branch);
    let dx = 1e-7;
    let mut x = Complex64::from(x0);
    let mut converged = false;
    for _ in 0..60 {
        let deriv = (g(x + dx) - g(x - dx)) / (2.0 * dx);
        if deriv.norm() == 0.0 {
            break;
        }
        let step = g(x) / deriv;
        x -= step;
        if step.re.abs() <= 4.0 * f64::EPSILON * x.re.abs().max(1.0) && step.im.abs() <= 1e-6 * x.im.abs().max(1e-300) {
            converged = true;
            break;
        }
    }
    // Reject convergence onto a different root of the cleared equation.
    if !converged || (x.re - x0).abs() > 1e-6 {
        return Err(ChainError::RootNotFound(x0));
    }
    Ok(x.im / s)
}

/// One tracked root curve `x(γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCurve {
    pub branch_index: usize,
    pub gamma_grid: Vec<f64>,
    pub x_values: Vec<f64>,
    pub alpha_values: Vec<Complex64>,
    pub alpha_class: Vec<AlphaClass>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    x: f64,
    alpha: Complex64,
    class: AlphaClass,
}

/// All `n` root-curve points at one `γ` with `b = 1`, `a = 4γ²`, sorted by `x`.
fn candidates_at(n: usize, gamma: f64) -> Result<Vec<Candidate>> {
    let b = 1.0;
    let mut out = Vec::with_capacity(n);
    if gamma == 0.0 {
        // a = 0: x = ½ arccos √((λ+2b)/4b) + π/4 with α → i∞.
        let spec = spectrum_a_zero(&ChainParams::new(n, 0.0, 0.0, b)?)?;
        for e in spec.eigenvalues {
            let lambda = -e;
            let arg = ((lambda + 2.0 * b) / (4.0 * b)).max(0.0).sqrt().min(1.0);
            out.push(Candidate {
                x: 0.5 * arg.acos() + FRAC_PI_4,
                alpha: Complex64::new(0.0, f64::INFINITY),
                class: AlphaClass::PureImaginary,
            });
        }
    } else {
        let a = 4.0 * b * gamma * gamma;
        let params = ChainParams::new(n, 0.0, a, b)?;
        let spec = eigenvalues_bisection(&params, 1e-14)?;
        for e in spec.eigenvalues {
            let lambda = -e;
            let (alpha, class) = alpha_from_cos2((lambda + 2.0 * b) / (2.0 * a));
            let (x, _) = x_y_from_alpha(gamma, alpha)?;
            out.push(Candidate { x, alpha, class });
        }
    }
    out.sort_by(|p, q| p.x.total_cmp(&q.x));
    Ok(out)
}

struct Track {
    /// Last two accepted `(γ, x)` points, oldest first.
    history: Vec<(f64, f64)>,
    current: Candidate,
}

impl Track {
    fn predict(&self, gamma: f64) -> f64 {
        match self.history.as_slice() {
            [.., (g0, x0), (g1, x1)] if g1 > g0 => x1 + (x1 - x0) * (gamma - g1) / (g1 - g0),
            [.., (_, x1)] => *x1,
            [] => unreachable!("tracks start with one point"),
        }
    }

    fn push(&mut self, gamma: f64, c: Candidate) {
        self.history.push((gamma, c.x));
        if self.history.len() > 2 {
            self.history.remove(0);
        }
        self.current = c;
    }
}

/// Assigns candidates to tracks by rank of predicted `x` and reports whether
/// each assignment is unambiguous.
fn match_step(tracks: &[Track], cands: &[Candidate], gamma: f64) -> (Vec<usize>, bool) {
    let preds: Vec<f64> = tracks.iter().map(|t| t.predict(gamma)).collect();
    let mut order: Vec<usize> = (0..tracks.len()).collect();
    order.sort_by(|&i, &j| preds[i].total_cmp(&preds[j]).then(i.cmp(&j)));
    let mut assign = vec![0; tracks.len()];
    for (rank, &t) in order.iter().enumerate() {
        assign[t] = rank;
    }
    let ok = (0..tracks.len()).all(|i| {
        let ci = cands[assign[i]].x;
        let err = (ci - preds[i]).abs();
        (0..tracks.len()).all(|j| {
            // Tracks with identical histories are interchangeable.
            if j == i || tracks[j].history == tracks[i].history {
                return true;
            }
            let gap = (cands[assign[j]].x - ci).abs();
            gap <= COINCIDENT || err <= 0.5 * gap
        })
    });
    (assign, ok)
}

/// Root curves over an ascending, non-negative `γ` grid.
///
/// Each grid point is solved through the eigenvalue solver. Curves are joined
/// by matching candidates to linear predictions from the last two points,
/// halving the step whenever a match is closer than half the gap to a
/// competing candidate.
pub fn sweep_curves(n: usize, gamma_grid: &[f64]) -> Result<Vec<RootCurve>> {
    if n == 0 {
        return Err(ChainError::InvalidLength(0));
    }
    if gamma_grid.is_empty() {
        return Err(ChainError::InvalidArgument("empty gamma grid".into()));
    }
    if gamma_grid.iter().any(|g| !g.is_finite() || *g < 0.0) || gamma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ChainError::InvalidArgument("gamma grid must be ascending and non-negative".into()));
    }
    let first = candidates_at(n, gamma_grid[0])?;
    let mut tracks: Vec<Track> = first
        .iter()
        .map(|&c| Track { history: vec![(gamma_grid[0], c.x)], current: c })
        .collect();
    let mut curves: Vec<RootCurve> = (0..n)
        .map(|k| RootCurve {
            branch_index: k + 1,
            gamma_grid: gamma_grid.to_vec(),
            x_values: vec![first[k].x],
            alpha_values: vec![first[k].alpha],
            alpha_class: vec![first[k].class],
        })
        .collect();

    for w in gamma_grid.windows(2) {
        let (start, target) = (w[0], w[1]);
        // Pending targets with their refinement depth, nearest last.
        let mut pending = vec![(target, 0usize)];
        let mut at = start;
        while let Some(&(goal, depth)) = pending.last() {
            let cands = candidates_at(n, goal)?;
            let (assign, ok) = match_step(&tracks, &cands, goal);
            if ok {
                for (t, track) in tracks.iter_mut().enumerate() {
                    track.push(goal, cands[assign[t]]);
                }
                at = goal;
                pending.pop();
            } else if depth >= MAX_REFINE_DEPTH {
                return Err(ChainError::AmbiguousBranch { gamma: goal });
            } else {
                pending.push((0.5 * (at + goal), depth + 1));
            }
        }
        for (curve, track) in curves.iter_mut().zip(&tracks) {
            curve.x_values.push(track.current.x);
            curve.alpha_values.push(track.current.alpha);
            curve.alpha_class.push(track.current.class);
        }
    }
    Ok(curves)
}

/// `cos 2α` along a curve, with `+∞` where `α = i∞`.
pub fn cos2alpha_values(curve: &RootCurve) -> Vec<f64> {
    curve
        .alpha_values
        .iter()
        .map(|a| if a.im.is_infinite() { f64::INFINITY } else { (2.0 * a).cos().re })
        .collect()
}

/// `γ` values where a curve's `α` turns from imaginary to real, located by
/// linear interpolation of `cos 2α` through 1 between grid points.
pub fn imaginary_to_real_crossovers(curve: &RootCurve) -> Vec<f64> {
    let cos2 = cos2alpha_values(curve);
    let mut out = Vec::new();
    for i in 1..curve.gamma_grid.len() {
        if curve.alpha_class[i - 1] == AlphaClass::PureImaginary && curve.alpha_class[i] == AlphaClass::Real {
            let (g0, g1) = (curve.gamma_grid[i - 1], curve.gamma_grid[i]);
            let (c0, c1) = (cos2[i - 1], cos2[i]);
            let g = if c0.is_finite() && c0 != c1 { g0 + (c0 - 1.0) / (c0 - c1) * (g1 - g0) } else { g1 };
            out.push(g);
        }
    }
    out
}

/// Total number of class changes of `α` along a curve.
pub fn class_changes(curve: &RootCurve) -> usize {
    curve.alpha_class.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Degeneracy count for one pair of curves that touch at the first grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCrossings {
    /// Indices into the input slice, higher curve first.
    pub curves: (usize, usize),
    /// `x` at the first grid point.
    pub x_start: f64,
    /// Coincidences including the one at the first grid point.
    pub count: usize,
}

/// Coincidence tolerance for curve separations.
pub const CROSSING_TOL: f64 = 1e-7;

/// Counts coincidences between paired curves along the grid.
///
/// Pairs are the curves that coincide at the first grid point, ordered by
/// descending `x`. A run of separations within `1e−7` counts once, as does
/// each sign change between consecutive samples. A sign change must sit
/// inside a strictly monotone stretch of the separation, otherwise the grid
/// cannot tell one crossing from several.
pub fn degeneracy_crossings(curves: &[RootCurve]) -> Result<Vec<PairCrossings>> {
    let mut used = vec![false; curves.len()];
    let mut pairs = Vec::new();
    for i in 0..curves.len() {
        if used[i] {
            continue;
        }
        for j in i + 1..curves.len() {
            if !used[j] && (curves[i].x_values[0] - curves[j].x_values[0]).abs() <= CROSSING_TOL {
                used[i] = true;
                used[j] = true;
                pairs.push((i, j));
                break;
            }
        }
    }
    pairs.sort_by(|p, q| curves[q.0].x_values[0].total_cmp(&curves[p.0].x_values[0]));

    let mut out = Vec::with_capacity(pairs.len());
    for (i, j) in pairs {
        let (ci, cj) = (&curves[i], &curves[j]);
        let sep: Vec<f64> = ci.x_values.iter().zip(&cj.x_values).map(|(p, q)| p - q).collect();
        let mut count = 0;
        let mut in_zero = false;
        let mut prev_sign: Option<(f64, usize)> = None;
        for (idx, &s) in sep.iter().enumerate() {
            if s.abs() <= CROSSING_TOL {
                if !in_zero {
                    count += 1;
                    in_zero = true;
                }
                continue;
            }
            let sign = s.signum();
            if in_zero {
                in_zero = false;
            } else if let Some((p, pidx)) = prev_sign {
                if p != sign {
                    count += 1;
                    if !is_localized(&sep, pidx, idx) {
                        return Err(ChainError::GridTooCoarse {
                            first: ci.branch_index,
                            second: cj.branch_index,
                            gamma: ci.gamma_grid[idx],
                        });
                    }
                }
            }
            prev_sign = Some((sign, idx));
        }
        let (hi, lo) = if ci.x_values.get(1) >= cj.x_values.get(1) { (i, j) } else { (j, i) };
        out.push(PairCrossings { curves: (hi, lo), x_start: ci.x_values[0], count });
    }
    Ok(out)
}

/// A sign change between samples `i` and `j` is localized when the samples
/// are adjacent and the separation is strictly monotone around them.
fn is_localized(sep: &[f64], i: usize, j: usize) -> bool {
    let lo = i.saturating_sub(1);
    let hi = (j + 1).min(sep.len() - 1);
    let window = &sep[lo..=hi];
    let rising = window.windows(2).all(|w| w[1] > w[0]);
    let falling = window.windows(2).all(|w| w[1] < w[0]);
    j == i + 1 && (rising || falling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(max: f64, steps: usize) -> Vec<f64> {
        (0..=steps).map(|i| max * i as f64 / steps as f64).collect()
    }

    #[test]
    fn x_is_real_for_real_alpha() {
        let (x, _) = x_y_from_alpha(0.4, Complex64::new(0.3, 0.0)).unwrap();
        assert!(x.is_finite());
    }

    #[test]
    fn y_of_x_satisfies_cos_relation() {
        let (g, x) = (0.3, 0.9);
        let y = y_of_x(g, x);
        let lhs = (2.0 * y).cos();
        assert!((lhs.re - (2.0 * g * g - (2.0 * x).cos())).abs() < 1e-14);
    }

    #[test]
    fn odd_length_is_rejected() {
        assert!(tangent_residual(5, 0.2, 1.0, Branch::Minus).is_err());
        assert!(SeriesExpansion::new(5, 1, Branch::Plus).is_err());
    }

    #[test]
    fn pole_is_reported() {
        let r = tangent_residual(6, 0.2, FRAC_PI_2, Branch::Plus);
        assert!(matches!(r, Err(ChainError::PoleProximity { .. })));
    }

    #[test]
    fn entire_form_agrees_in_sign_structure() {
        // Roots of the pole-free form are roots of the tangent form.
        let (n, g) = (6, 0.05);
        let x = tangent_root(n, g, series_x0(n, 1), Branch::Minus).unwrap();
        assert!(tangent_residual(n, g, x, Branch::Minus).unwrap().abs() < 1e-12);
    }

    #[test]
    fn series_leading_coefficients() {
        let s = SeriesExpansion::new(6, 1, Branch::Minus).unwrap();
        assert!((s.x0 - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((s.coefficients[2] - 0.5).abs() < 1e-12);
        assert_eq!(s.coefficients[1], 0.0);
    }

    #[test]
    fn series_tracks_numeric_root() {
        for branch in [Branch::Minus, Branch::Plus] {
            for k in [1, 3] {
                let s = SeriesExpansion::new(6, k, branch).unwrap();
                for g in [0.01, 0.03, 0.05] {
                    let x = tangent_root(6, g, s.x0, branch).unwrap();
                    assert!((x - s.evaluate(g)).abs() < 1e-10, "{branch:?} k={k} g={g}");
                }
            }
        }
    }

    #[test]
    fn complex_step_recovers_leading_coefficient() {
        let x0 = series_x0(6, 1);
        let c2 = extract_gamma2_coefficient(6, x0, Branch::Plus).unwrap();
        assert!((c2 + x0.cos() / (2.0 * x0.sin())).abs() < 1e-12);
    }

    #[test]
    fn lambda_from_alpha_inverts_cos2() {
        let p = ChainParams::new(6, 0.5, 0.8, 0.3).unwrap();
        for e in [-1.0, 0.2, 1.4] {
            let lambda = p.omega0 - e;
            let (alpha, _) = alpha_from_cos2((lambda + 2.0 * p.b) / (2.0 * p.a));
            assert!((energy_from_alpha(&p, alpha).unwrap() - e).abs() < 1e-12);
        }
        assert!(lambda_from_alpha(&p, Complex64::new(0.3, 0.4)).is_err());
    }

    #[test]
    fn lambda_from_x_matches_curve_points() {
        let g = 0.4;
        let p = ChainParams::new(6, 0.0, 4.0 * g * g, 1.0).unwrap();
        for c in candidates_at(6, g).unwrap() {
            let e = -lambda_from_x(1.0, g, c.x);
            let back = energy_from_alpha(&p, c.alpha).unwrap();
            assert!((e - back).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_starts_at_paired_intercepts() {
        let curves = sweep_curves(6, &grid(2.0, 200)).unwrap();
        let mut x0: Vec<f64> = curves.iter().map(|c| c.x_values[0]).collect();
        x0.sort_by(f64::total_cmp);
        for k in 1..=3 {
            let want = k as f64 * PI / 16.0 + FRAC_PI_4;
            assert!(x0.iter().filter(|x| (**x - want).abs() < 1e-10).count() == 2, "k={k}");
        }
    }

    #[test]
    fn sweep_end_approaches_large_gamma_limit() {
        let curves = sweep_curves(6, &grid(2.0, 200)).unwrap();
        let mut xe: Vec<f64> = curves.iter().map(|c| *c.x_values.last().unwrap()).collect();
        xe.sort_by(f64::total_cmp);
        for (k, x) in xe.iter().enumerate() {
            assert!((x - (k + 1) as f64 * PI / 14.0).abs() < 0.02);
        }
    }

    #[test]
    fn n4_each_branch_crosses_once_below_one() {
        let curves = sweep_curves(4, &grid(2.0, 400)).unwrap();
        for c in &curves {
            assert_eq!(class_changes(c), 1);
            let g = imaginary_to_real_crossovers(c);
            assert_eq!(g.len(), 1);
            assert!(g[0] > 0.0 && g[0] < 1.0);
        }
    }

    #[test]
    fn n6_degeneracy_counts() {
        let curves = sweep_curves(6, &grid(2.0, 400)).unwrap();
        let counts: Vec<usize> = degeneracy_crossings(&curves).unwrap().iter().map(|p| p.count).collect();
        assert_eq!(counts, vec![1, 2, 3]);
    }

    #[test]
    fn invalid_grid_is_rejected() {
        assert!(sweep_curves(6, &[0.2, 0.1]).is_err());
        assert!(sweep_curves(6, &[]).is_err());
    }

    #[test]
    fn unlocalized_sign_change_is_flagged() {
        let mk = |xs: Vec<f64>| RootCurve {
            branch_index: 1,
            gamma_grid: (0..xs.len()).map(|i| i as f64).collect(),
            alpha_class: vec![AlphaClass::Real; xs.len()],
            alpha_values: vec![Complex64::from(0.0); xs.len()],
            x_values: xs,
        };
        let a = mk(vec![1.0, 1.5, 1.2, 1.6, 1.7]);
        let b = mk(vec![1.0, 1.2, 1.5, 1.1, 1.0]);
        let r = degeneracy_crossings(&[a, b]);
        assert!(matches!(r, Err(ChainError::GridTooCoarse { .. })));
    }
}
