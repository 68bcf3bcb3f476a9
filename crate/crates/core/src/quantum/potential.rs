use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEGREE: usize = 8;

/// `V(x)` together with its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// Polynomial potential `V(x) = sum_k c_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    coefficients: Vec<f64>,
}

impl Potential {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        Self::with_max_degree(coefficients, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(mut coefficients: Vec<f64>, max_degree: usize) -> Result<Self> {
        if let Some(bad) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid("coefficients", format!("coefficient {bad} is not finite")));
        }
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        if coefficients.len() > max_degree + 1 {
            return Err(Error::invalid(
                "coefficients",
                format!("degree {} exceeds the maximum {max_degree}", coefficients.len() - 1),
            ));
        }
        Ok(Self { coefficients })
    }

    pub fn free() -> Self {
        Self { coefficients: Vec::new() }
    }

    /// `m omega^2 x^2 / 2`.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        Self { coefficients: vec![0.0, 0.0, 0.5 * mass * omega * omega] }
    }

    /// Coefficients with trailing zeros removed; empty for `V = 0`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn is_free(&self) -> bool {
        self.coefficients.iter().skip(1).all(|&c| c == 0.0)
    }

    /// Oscillator frequency when the potential is exactly `c_0 + m omega^2 x^2 / 2`.
    pub fn harmonic_frequency(&self, mass: f64) -> Option<f64> {
        match self.coefficients.as_slice() {
            [_, c1, c2] if *c1 == 0.0 && *c2 > 0.0 => Some((2.0 * c2 / mass).sqrt()),
            _ => None,
        }
    }

    /// Exact polynomial derivative.
    pub fn derivative(&self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect();
        Self { coefficients }
    }

    /// Value, first and second derivative by a single Horner pass.
    pub fn eval(&self, x: f64) -> PotentialValue {
        let (mut value, mut first, mut second) = (0.0, 0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            second = second * x + 2.0 * first;
            first = first * x + value;
            value = value * x + c;
        }
        PotentialValue { value, first, second }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}
