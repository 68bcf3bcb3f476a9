use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Truncated Hermite expansion in the dimensionless momentum `q`: modes `0..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermiteBasis {
    n_max: usize,
}

impl HermiteBasis {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_modes(&self) -> usize {
        self.n_max + 1
    }

    pub fn try_new(n_max: i64) -> Result<Self> {
        usize::try_from(n_max)
            .map(Self::new)
            .map_err(|_| Error::invalid("n_max", format!("must be >= 0, got {n_max}")))
    }
}

// Rescale the recurrence before the running values can overflow.
const RESCALE_ABOVE: f64 = 1e150;

/// Orthonormal oscillator eigenfunctions `H_0(q) ..= H_n_max(q)` (unit L2 norm, weight absorbed).
///
/// Runs the three-term recurrence on the normalized functions and carries the Gaussian
/// envelope as a separate log-scale, so large `n` and `|q|` neither overflow nor lose
/// accuracy. Values that underflow come back as exactly `0.0`.
pub fn hermite_functions(n_max: usize, q: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    if !q.is_finite() {
        out.resize(n_max + 1, if q.is_nan() { f64::NAN } else { 0.0 });
        return out;
    }
    let mut log_scale = -0.25 * PI.ln() - 0.5 * q * q;
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    out.push(finish(cur, log_scale));
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * q * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            let s = cur.abs();
            prev /= s;
            cur /= s;
            log_scale += s.ln();
        }
        out.push(finish(cur, log_scale));
    }
    out
}

fn finish(mantissa: f64, log_scale: f64) -> f64 {
    let v = mantissa * log_scale.exp();
    if v.is_normal() {
        v
    } else {
        0.0
    }
}

/// Single orthonormal oscillator eigenfunction `H_n(q)`.
pub fn hermite_function(n: usize, q: f64) -> f64 {
    hermite_functions(n, q)[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_at_origin() {
        assert!((hermite_function(0, 0.0) - PI.powf(-0.25)).abs() < 1e-15);
        assert!((hermite_function(0, 0.0) - 0.7511255).abs() < 1e-7);
    }

    #[test]
    fn odd_modes_vanish_at_origin() {
        for n in [1, 3, 5, 21] {
            assert_eq!(hermite_function(n, 0.0), 0.0);
        }
    }

    #[test]
    fn ladder_relation_at_one_point() {
        let q = 1.7;
        let h = hermite_functions(4, q);
        let rhs = (4.0f64 / 2.0).sqrt() * h[4] + (3.0f64 / 2.0).sqrt() * h[2];
        assert!((q * h[3] - rhs).abs() < 1e-12);
    }

    #[test]
    fn ladder_relation_everywhere() {
        for iq in 0..=120 {
            let q = -6.0 + 0.1 * iq as f64;
            let h = hermite_functions(31, q);
            for n in 0..=30 {
                let lower = if n > 0 { (n as f64 / 2.0).sqrt() * h[n - 1] } else { 0.0 };
                let rhs = ((n + 1) as f64 / 2.0).sqrt() * h[n + 1] + lower;
                assert!((q * h[n] - rhs).abs() < 1e-10, "n={n} q={q}");
            }
        }
    }

    #[test]
    fn orthonormal_up_to_twelve() {
        // Simpson on [-12, 12]; the functions are below 1e-20 at the ends.
        let m = 4800;
        let h = 24.0 / m as f64;
        let mut gram = [[0.0f64; 13]; 13];
        for k in 0..=m {
            let q = -12.0 + k as f64 * h;
            let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let v = hermite_functions(12, q);
            for a in 0..=12 {
                for b in 0..=12 {
                    gram[a][b] += w * v[a] * v[b] * h / 3.0;
                }
            }
        }
        for a in 0..=12 {
            for b in 0..=12 {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a][b] - expected).abs() < 1e-8, "({a},{b}) = {}", gram[a][b]);
            }
        }
    }

    #[test]
    fn far_tail_underflows_to_exact_zero() {
        assert_eq!(hermite_function(0, 60.0), 0.0);
        assert_eq!(hermite_function(40, -80.0), 0.0);
        assert_eq!(hermite_function(3, f64::INFINITY), 0.0);
    }

    #[test]
    fn large_index_stays_finite_and_bounded() {
        // |H_n(q)| <= pi^(-1/4) for all n, q (Cramer's bound).
        for n in [50usize, 200, 1000] {
            for q in [0.3, 5.0, 20.0, 44.0] {
                let v = hermite_function(n, q);
                assert!(v.is_finite() && v.abs() <= PI.powf(-0.25) + 1e-12, "n={n} q={q} v={v}");
            }
        }
        assert!(hermite_function(1000, 44.0).abs() > 1e-3);
    }
}
