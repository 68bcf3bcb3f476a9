//! Closed-form spectra: the Pais–Uhlenbeck oscillator and the free particle.

use crate::error::{Error, Result};
use crate::quantum::PhysicalParams;

/// `omega * tau_c` from which a defined result carries a near-boundary warning.
pub const NEAR_BOUNDARY: f64 = 0.8;

/// Level `(n, ell)` of the harmonic potential `m omega^2 x^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PUSpectrumQuery {
    pub n: usize,
    pub ell: usize,
    pub omega: f64,
    pub params: PhysicalParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Regular,
    /// `0.8 <= omega tau_c < 1`.
    NearBoundary,
    /// `omega tau_c >= 1`.
    IllDefined,
}

pub fn regime(omega: f64, tau_c: f64) -> Regime {
    let product = omega * tau_c;
    if product >= 1.0 {
        Regime::IllDefined
    } else if product >= NEAR_BOUNDARY {
        Regime::NearBoundary
    } else {
        Regime::Regular
    }
}

fn check(q: &PUSpectrumQuery) -> Result<f64> {
    if !(q.omega.is_finite() && q.omega > 0.0) {
        return Err(Error::invalid("omega", format!("must be finite and > 0, got {}", q.omega)));
    }
    let tau = q.params.tau_c();
    if tau <= 0.0 {
        return Err(Error::BaselineOnly { tau_c: tau });
    }
    if regime(q.omega, tau) == Regime::IllDefined {
        return Err(Error::IllDefinedRegime { product: q.omega * tau });
    }
    Ok(tau)
}

/// `E_{n,l} = -(hbar/tau_c) sqrt(1 - (omega tau_c)^2) (n + 1/2) + hbar omega (l + 1/2)`.
pub fn pais_uhlenbeck_energy(q: &PUSpectrumQuery) -> Result<f64> {
    let tau = check(q)?;
    let hbar = q.params.hbar();
    let wt = q.omega * tau;
    Ok(-(hbar / tau) * (1.0 - wt * wt).sqrt() * (q.n as f64 + 0.5) + hbar * q.omega * (q.ell as f64 + 0.5))
}

/// Small-`omega tau_c` shift `(2n + 1) hbar omega^2 tau_c / 4` of sector `n` relative to
/// `-(hbar/tau_c)(n + 1/2) + hbar omega (l + 1/2)`.
pub fn pu_shift(n: usize, omega: f64, params: &PhysicalParams) -> f64 {
    (2 * n + 1) as f64 * params.hbar() * omega * omega * params.tau_c() / 4.0
}

/// Normal-mode frequencies `(nu_fast, nu_slow)` of `tau_c^2 x'''' + x'' + omega^2 x = 0`,
/// the classical dynamics of the coupled harmonic operator:
/// `nu^2 = (1 +- sqrt(1 - 4 omega^2 tau_c^2)) / (2 tau_c^2)`. `None` once `2 omega tau_c >= 1`.
pub fn normal_mode_frequencies(omega: f64, tau_c: f64) -> Option<(f64, f64)> {
    let disc = 1.0 - 4.0 * omega * omega * tau_c * tau_c;
    if !(disc > 0.0 && tau_c > 0.0) {
        return None;
    }
    let root = disc.sqrt();
    let fast = ((1.0 + root) / 2.0).sqrt() / tau_c;
    // (1 - root) cancels for small omega tau_c; use (1 - root) = 4 omega^2 tau_c^2 / (1 + root).
    let slow = (2.0 * omega * omega / (1.0 + root)).sqrt();
    Some((fast, slow))
}

/// Spectrum `-hbar nu_fast (n + 1/2) + hbar nu_slow (l + 1/2)` of the coupled harmonic
/// operator, exact for the continuum equation. Agrees with [`pais_uhlenbeck_energy`] to first
/// order in `tau_c`.
pub fn normal_mode_energy(q: &PUSpectrumQuery) -> Result<f64> {
    let tau = check(q)?;
    let (fast, slow) = normal_mode_frequencies(q.omega, tau).ok_or(Error::IllDefinedRegime { product: 2.0 * q.omega * tau })?;
    let hbar = q.params.hbar();
    Ok(-hbar * fast * (q.n as f64 + 0.5) + hbar * slow * (q.ell as f64 + 0.5))
}

/// `hbar^2 k^2 / 2m`, independent of `tau_c`.
pub fn free_particle_energy(k: f64, params: &PhysicalParams) -> f64 {
    params.hbar() * params.hbar() * k * k / (2.0 * params.mass())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PURow {
    pub n: usize,
    pub ell: usize,
    pub omega: f64,
    pub tau_c: f64,
    pub energy: f64,
}

/// Rows ordered by `(omega, n, ell)` in the order given.
pub fn pu_table(sectors: &[usize], levels: &[usize], omegas: &[f64], params: &PhysicalParams) -> Result<Vec<PURow>> {
    let mut rows = Vec::with_capacity(sectors.len() * levels.len() * omegas.len());
    for &omega in omegas {
        for &n in sectors {
            for &ell in levels {
                let energy = pais_uhlenbeck_energy(&PUSpectrumQuery { n, ell, omega, params: *params })?;
                rows.push(PURow { n, ell, omega, tau_c: params.tau_c(), energy });
            }
        }
    }
    Ok(rows)
}
