//! Commutator of time-coarse-grained position and momentum,
//! `[X_tau, P_tau] = i hbar f(u)` with `f(u) = 1 - (1 - e^-u)^2 / u^2` and `u = tau / tau_c`.
//!
//! `f` is the factor multiplying `hbar`; whether the minimum of `dx dp` is read as
//! `hbar f / 2` or `hbar f` is a presentation choice left to the caller.

use crate::error::{Error, Result};

/// Below this `u` the closed form loses digits to cancellation and the series is used.
pub const U_SWITCH: f64 = 1e-3;

/// `f(u) = u - 7u^2/12 + u^3/4 - 31u^4/360 + ...`; the general term is
/// `(-1)^(j+1) (2^(j+2) - 2) / (j+2)! u^j`.
const SERIES: [f64; 4] = [1.0, -7.0 / 12.0, 1.0 / 4.0, -31.0 / 360.0];

pub fn commutator_factor(u: f64) -> Result<f64> {
    if u.is_nan() || u <= 0.0 {
        return Err(Error::invalid("u", format!("must be > 0, got {u}")));
    }
    Ok(if u < U_SWITCH { series(u) } else { closed_form(u) })
}

fn series(u: f64) -> f64 {
    u * SERIES.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

fn closed_form(u: f64) -> f64 {
    if u.is_infinite() {
        return 1.0;
    }
    let g = -(-u).exp_m1() / u;
    1.0 - g * g
}

/// Log-spaced table of `(u, f(u))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorCurve {
    pub u: Vec<f64>,
    pub f: Vec<f64>,
}

impl CommutatorCurve {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

pub fn uncertainty_curve(u_min: f64, u_max: f64, n_points: usize) -> Result<CommutatorCurve> {
    if !(u_min > 0.0 && u_min.is_finite()) {
        return Err(Error::invalid("u_min", format!("must be finite and > 0, got {u_min}")));
    }
    if !(u_max > u_min && u_max.is_finite()) {
        return Err(Error::invalid("u_max", format!("must be finite and > u_min = {u_min}, got {u_max}")));
    }
    if n_points < 2 {
        return Err(Error::invalid("n_points", format!("must be >= 2, got {n_points}")));
    }
    let (a, b) = (u_min.ln(), u_max.ln());
    let last = n_points - 1;
    let u: Vec<f64> = (0..n_points)
        .map(|k| match k {
            0 => u_min,
            k if k == last => u_max,
            k => (a + (b - a) * k as f64 / last as f64).exp(),
        })
        .collect();
    let f = u.iter().map(|&u| commutator_factor(u)).collect::<Result<_>>()?;
    Ok(CommutatorCurve { u, f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        // 1 - (1 - 1/e)^2
        let e1 = 1.0 - (1.0 - (-1.0f64).exp()).powi(2);
        assert!((commutator_factor(1.0).unwrap() - e1).abs() < 1e-15);
        assert!((e1 - 0.6004236).abs() < 1e-7);
        assert!((commutator_factor(1000.0).unwrap() - (1.0 - 1e-6)).abs() < 1e-15);
        assert!((commutator_factor(1e-8).unwrap() / 1e-8 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_non_positive() {
        for u in [0.0, -1.0, f64::NAN] {
            assert!(commutator_factor(u).is_err());
        }
    }

    #[test]
    fn series_coefficients_from_general_term() {
        let mut fact = 2.0;
        for (j, c) in SERIES.iter().enumerate() {
            let j = j + 1;
            fact *= (j + 2) as f64;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let term = sign * ((1u64 << (j + 2)) - 2) as f64 / fact;
            assert!((term - c).abs() < 1e-16, "j = {j}");
        }
    }

    #[test]
    fn branches_agree_around_switch() {
        let n = 200;
        for k in 0..=n {
            let u = U_SWITCH / 2.0 * 4f64.powf(k as f64 / n as f64);
            assert!((series(u) - closed_form(u)).abs() < 1e-13, "u = {u}");
        }
    }

    #[test]
    fn curve_endpoints_and_spacing() {
        let c = uncertainty_curve(1e-3, 1e3, 121).unwrap();
        assert_eq!(c.len(), 121);
        assert_eq!(c.u[0], 1e-3);
        assert_eq!(c.u[120], 1e3);
        assert_eq!(c.f[0], commutator_factor(1e-3).unwrap());
        assert_eq!(c.f[120], commutator_factor(1e3).unwrap());
        assert!((c.u[60] - 1.0).abs() < 1e-12);
        assert!(uncertainty_curve(1.0, 1.0, 5).is_err());
        assert!(uncertainty_curve(1.0, 2.0, 1).is_err());
        assert!(uncertainty_curve(0.0, 2.0, 3).is_err());
    }

    #[test]
    fn derivative_is_positive() {
        // f'(u) = 2 (1 - e^-u) (1 - e^-u - u e^-u) / u^3 > 0; checked against differencing.
        let c = uncertainty_curve(1e-6, 50.0, 2000).unwrap();
        for w in c.f.windows(2) {
            assert!(w[1] > w[0]);
        }
        for &u in &[1e-4, 0.3, 2.0, 9.0] {
            let h = 1e-6 * u;
            let fd = (commutator_factor(u + h).unwrap() - commutator_factor(u - h).unwrap()) / (2.0 * h);
            let exact = 2.0 * (1.0 - (-u).exp()) * (1.0 - (-u).exp() - u * (-u).exp()) / u.powi(3);
            assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1e-3));
        }
    }

    #[test]
    fn asymptote() {
        let c = uncertainty_curve(1e-3, 1e3, 121).unwrap();
        let (u, f) = (c.u[120], c.f[120]);
        assert!((u * u * (1.0 - f) - 1.0).abs() < 1e-2);
    }

    proptest! {
        #[test]
        fn bounded_and_linear_at_small_u(u in 1e-12f64..1e-3) {
            let f = commutator_factor(u).unwrap();
            prop_assert!((0.99..=1.0).contains(&(f / u)));
        }

        #[test]
        fn tail_identity(u in 6.0f64..700.0) {
            let f = commutator_factor(u).unwrap();
            let g = (1.0 - (-u).exp()).powi(2);
            prop_assert!((u * u * (1.0 - f) - g).abs() < 1e-12 * u * u);
            prop_assert!((0.99..=1.0).contains(&g));
        }

        #[test]
        fn within_unit_interval(u in 1e-10f64..1e6) {
            let f = commutator_factor(u).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
