//! Dipole-dipole coupling between two-level atoms and the chain couplings
//! it induces on an evenly spaced line.

use std::f64::consts::PI;

use crate::error::{ChainError, Result};

/// Step of the sign-change scan for zeros of `Ω(x)`.
pub const SCAN_STEP: f64 = 0.01;
/// Bracket width at which zero bisection stops.
pub const ZERO_TOL: f64 = 1e-10;

/// Geometry of a chain of identical dipoles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleConfig {
    /// Nearest-neighbour separation in units of the transition wavelength.
    pub separation_over_wavelength: f64,
    /// `μ̂·r̂`, the cosine between the dipole and the chain axis.
    pub cos_mu_r: f64,
    /// Single-atom decay rate; sets the unit of `Ω`.
    pub gamma_decay: f64,
}

impl DipoleConfig {
    pub fn new(separation_over_wavelength: f64, cos_mu_r: f64, gamma_decay: f64) -> Result<Self> {
        let cfg = Self { separation_over_wavelength, cos_mu_r, gamma_decay };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("d/lambda0", self.separation_over_wavelength),
            ("cos_mu_r", self.cos_mu_r),
            ("gamma_decay", self.gamma_decay),
        ] {
            if !value.is_finite() {
                return Err(ChainError::NonFinite { name, value });
            }
        }
        if self.separation_over_wavelength <= 0.0 {
            return Err(ChainError::InvalidArgument("d/lambda0 must be positive".into()));
        }
        if self.cos_mu_r.abs() > 1.0 {
            return Err(ChainError::InvalidArgument("cos_mu_r must lie in [-1, 1]".into()));
        }
        if self.gamma_decay <= 0.0 {
            return Err(ChainError::InvalidArgument("gamma_decay must be positive".into()));
        }
        Ok(())
    }
}

/// `Ω = ¾Γ{−[1 − (μ̂·r̂)²] cos x/x + [1 − 3(μ̂·r̂)²](sin x/x² + cos x/x³)}`.
pub fn omega_ij(x: f64, cos_mu_r: f64, gamma_decay: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(ChainError::InvalidArgument(format!("x must be positive, got {x}")));
    }
    let c2 = cos_mu_r * cos_mu_r;
    let (s, c) = x.sin_cos();
    let far = -(1.0 - c2) * c / x;
    let near = (1.0 - 3.0 * c2) * (s / (x * x) + c / (x * x * x));
    Ok(0.75 * gamma_decay * (far + near))
}

/// `(a, b)`: `Ω` at `x = 2π d/λ₀` and at twice that distance.
pub fn chain_couplings(config: &DipoleConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let x = 2.0 * PI * config.separation_over_wavelength;
    let a = omega_ij(x, config.cos_mu_r, config.gamma_decay)?;
    let b = omega_ij(2.0 * x, config.cos_mu_r, config.gamma_decay)?;
    Ok((a, b))
}

/// Zeros of `Ω(x)` on `[lo, hi]`, ascending.
pub fn critical_separations(cos_mu_r: f64, range: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi <= lo {
        return Err(ChainError::InvalidArgument(format!("bad x range ({lo}, {hi})")));
    }
    let f = |x: f64| omega_ij(x, cos_mu_r, 1.0);
    let steps = ((hi - lo) / SCAN_STEP).ceil() as usize;
    let mut zeros = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0)?;
    for i in 1..=steps {
        let x1 = (lo + i as f64 * SCAN_STEP).min(hi);
        let f1 = f(x1)?;
        if f0 == 0.0 {
            zeros.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            zeros.push(bisect(&f, x0, x1, f0)?);
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        zeros.push(x0);
    }
    Ok(zeros)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    while hi - lo > ZERO_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
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
