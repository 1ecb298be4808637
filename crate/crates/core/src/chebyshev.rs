//! Closed form of the characteristic polynomial in Chebyshev polynomials of
//! the second kind.
//!
//! With `λ + 2b = 2a·cos 2α` and `γ = √(a/4b)` the determinant collapses to
//! `T_n = −i·b^{n+1}/(2a·sin 2α) · [U_{n+1}(γe^{iα})² − U_{n+1}(γe^{−iα})²]`.
//! `γ` is the principal complex square root, so couplings of opposite sign
//! are handled by analytic continuation.

use num_complex::Complex64;

use crate::error::{ChainError, Result};
use crate::model::ChainParams;

/// `|b|` below this multiple of `max(|a|, 1)` counts as zero.
pub const B_ZERO_THRESHOLD: f64 = 1e-12;
/// `|sin 2α|` below this routes callers to the recurrence.
pub const DEGENERATE_ANGLE_THRESHOLD: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `U_k(z)` by the three-term recurrence.
pub fn chebyshev_u(k: usize, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * z;
    for _ in 1..k {
        let next = 2.0 * z * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// How `α` sits in the complex plane. Real `λ` forces one of three shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaClass {
    /// `α = x`, `|cos 2α| ≤ 1`.
    Real,
    /// `α = ix`, `cos 2α ≥ 1`.
    PureImaginary,
    /// `α = π/2 + ix`, `cos 2α ≤ −1`.
    PiHalfPlusImaginary,
}

impl AlphaClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AlphaClass::Real => "real",
            AlphaClass::PureImaginary => "pure_imaginary",
            AlphaClass::PiHalfPlusImaginary => "pi_half_plus_imaginary",
        }
    }
}

/// Picks the admissible `α` with `cos 2α = c` for real `c`.
pub fn alpha_from_cos2(c: f64) -> (Complex64, AlphaClass) {
    if c.abs() <= 1.0 {
        (Complex64::new(0.5 * c.acos(), 0.0), AlphaClass::Real)
    } else if c > 1.0 {
        (Complex64::new(0.0, 0.5 * c.acosh()), AlphaClass::PureImaginary)
    } else {
        (
            Complex64::new(std::f64::consts::FRAC_PI_2, 0.5 * (-c).acosh()),
            AlphaClass::PiHalfPlusImaginary,
        )
    }
}

/// Auxiliary angles and roots of the closed form at one trial energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxQuantities {
    pub lambda: f64,
    pub delta: Complex64,
    pub chi_plus: Complex64,
    pub chi_minus: Complex64,
    /// Principal `√(a/4b)`; purely imaginary when `a/b < 0`.
    pub gamma: Complex64,
    pub alpha: Complex64,
    pub alpha_class: AlphaClass,
    /// `arccos(χ₊/2b)`.
    pub theta: Complex64,
    /// `arccos(χ₋/2b)`.
    pub phi: Complex64,
}

impl AuxQuantities {
    pub fn cos_2alpha(&self) -> Complex64 {
        (2.0 * self.alpha).cos()
    }
}

fn check_b(params: &ChainParams) -> Result<()> {
    if params.b.abs() < B_ZERO_THRESHOLD * params.a.abs().max(1.0) {
        Err(ChainError::BZero)
    } else {
        Ok(())
    }
}

pub fn aux_quantities(params: &ChainParams, energy: f64) -> Result<AuxQuantities> {
    check_b(params)?;
    let (a, b) = (params.a, params.b);
    if a.abs() < B_ZERO_THRESHOLD * b.abs() {
        return Err(ChainError::AZero);
    }
    let lambda = params.lambda(energy);
    let delta = Complex64::from((lambda + 2.0 * b).powi(2) - 4.0 * a * a).sqrt();
    let chi_plus = (lambda - 2.0 * b + delta) / 2.0;
    let chi_minus = (lambda - 2.0 * b - delta) / 2.0;
    let gamma = Complex64::from(a / (4.0 * b)).sqrt();
    let (alpha, alpha_class) = alpha_from_cos2((lambda + 2.0 * b) / (2.0 * a));
    Ok(AuxQuantities {
        lambda,
        delta,
        chi_plus,
        chi_minus,
        gamma,
        alpha,
        alpha_class,
        theta: (chi_plus / (2.0 * b)).acos(),
        phi: (chi_minus / (2.0 * b)).acos(),
    })
}

/// Closed form for an explicit `(γ, α)` pair.
pub fn closed_form_from_alpha(a: f64, b: f64, gamma: Complex64, alpha: Complex64, n: usize) -> Result<Complex64> {
    let sin2 = (2.0 * alpha).sin();
    if sin2.norm() < DEGENERATE_ANGLE_THRESHOLD {
        return Err(ChainError::DegenerateAngle(sin2.norm()));
    }
    let up = chebyshev_u(n + 1, gamma * (I * alpha).exp());
    let um = chebyshev_u(n + 1, gamma * (-I * alpha).exp());
    let pref = -I * b.powi(n as i32 + 1) / (2.0 * a * sin2);
    Ok(pref * (up * up - um * um))
}

/// `T_n` from the Chebyshev closed form; `n` overrides `params.n`.
///
/// With `a = 0` the `a → 0` limit is evaluated instead, since `α` is then
/// undefined while the limit is exact.
pub fn closed_form_tn(params: &ChainParams, energy: f64, n: usize) -> Result<f64> {
    check_b(params)?;
    if params.a == 0.0 {
        return tn_a_zero_limit(params, energy, n);
    }
    let aux = aux_quantities(params, energy)?;
    Ok(closed_form_from_alpha(params.a, params.b, aux.gamma, aux.alpha, n)?.re)
}

/// `(1 − cos((n+2)θ))/(1 − cos θ) − (1 − cos((n+2)φ))/(1 − cos φ)`.
pub fn fn_theta_phi(n: usize, theta: Complex64, phi: Complex64) -> Result<Complex64> {
    let term = |t: Complex64| -> Result<Complex64> {
        let den = 1.0 - t.cos();
        if den.norm() < 1e-12 {
            return Err(ChainError::DegenerateCosine(den.norm()));
        }
        Ok((1.0 - ((n + 2) as f64 * t).cos()) / den)
    };
    Ok(term(theta)? - term(phi)?)
}

/// `a → 0` limit of the closed form:
/// `T_n = b^{n+1}/(λ+2b) · [U_{n+1}(√((λ+2b)/4b))² − U_{n+1}(0)²]`.
pub fn tn_a_zero_limit(params: &ChainParams, energy: f64, n: usize) -> Result<f64> {
    if params.a != 0.0 {
        return Err(ChainError::InvalidArgument(format!("a = 0 required, got a = {}", params.a)));
    }
    check_b(params)?;
    let b = params.b;
    let shifted = params.lambda(energy) + 2.0 * b;
    if shifted.abs() < 1e-12 * params.energy_scale() {
        return Err(ChainError::RemovableSingularity(shifted.abs()));
    }
    let z = Complex64::from(shifted / (4.0 * b)).sqrt();
    let u = chebyshev_u(n + 1, z);
    let u0 = chebyshev_u(n + 1, Complex64::new(0.0, 0.0));
    Ok((b.powi(n as i32 + 1) / shifted * (u * u - u0 * u0)).re)
}
