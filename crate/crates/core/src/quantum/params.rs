use crate::error::{Error, Result};

/// Units and the quantum correlation time.
///
/// `tau_c > 0` selects the extended model; `tau_c == 0` is the ordinary Schrödinger limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    hbar: f64,
    mass: f64,
    tau_c: f64,
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, tau_c: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::invalid("hbar", format!("must be finite and > 0, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid("mass", format!("must be finite and > 0, got {mass}")));
        }
        if !(tau_c.is_finite() && tau_c >= 0.0) {
            return Err(Error::invalid("tau_c", format!("must be finite and >= 0, got {tau_c}")));
        }
        Ok(Self { hbar, mass, tau_c })
    }

    /// `hbar = mass = 1`.
    pub fn natural(tau_c: f64) -> Result<Self> {
        Self::new(1.0, 1.0, tau_c)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn with_tau_c(&self, tau_c: f64) -> Result<Self> {
        Self::new(self.hbar, self.mass, tau_c)
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Self::new(hbar, self.mass, self.tau_c)
    }

    pub fn is_baseline(&self) -> bool {
        self.tau_c == 0.0
    }

    /// Factor relating physical and dimensionless momentum, `p = sqrt(m hbar / tau_c) q`.
    /// `None` in the baseline limit.
    pub fn momentum_scale(&self) -> Option<f64> {
        (self.tau_c > 0.0).then(|| (self.mass * self.hbar / self.tau_c).sqrt())
    }

    /// Coefficient of the `xi'_{n +- 1}` terms in the mode equations: `sqrt(hbar^3 / (2 m tau_c))`.
    pub fn mode_coupling(&self) -> Option<f64> {
        (self.tau_c > 0.0).then(|| (self.hbar.powi(3) / (2.0 * self.mass * self.tau_c)).sqrt())
    }

    /// Energy offset of Hermite mode `n`: `-(hbar / tau_c)(n + 1/2)`.
    pub fn mode_offset(&self, n: usize) -> Option<f64> {
        (self.tau_c > 0.0).then(|| -(self.hbar / self.tau_c) * (n as f64 + 0.5))
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, tau_c: 0.0 }
    }
}
