use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform position grid on `[x_min, x_max]` with both end points included.
///
/// Fields living on the grid are zero outside the box (Dirichlet walls).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

pub const MIN_POINTS: usize = 8;

impl XGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::invalid("x_min/x_max", "bounds must be finite"));
        }
        if x_min >= x_max {
            return Err(Error::invalid("x_min/x_max", format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::invalid("n_points", format!("need at least {MIN_POINTS}, got {n_points}")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n_points, |i| self.point(i))
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Array1<f64> {
        Array1::from_shape_fn(self.n_points, |i| f(self.point(i)))
    }

    /// Same box with the spacing halved (`2 n - 1` points).
    pub fn refined(&self) -> Self {
        Self { n_points: 2 * self.n_points - 1, ..*self }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n_points {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.n_points, actual: len })
        }
    }

    /// Trapezoid approximation of `int conj(f) g dx` over the box.
    pub fn inner_product(&self, f: ArrayView1<'_, Complex64>, g: ArrayView1<'_, Complex64>) -> Result<Complex64> {
        self.check_len(f.len())?;
        self.check_len(g.len())?;
        let n = self.n_points;
        let interior: Complex64 = (1..n - 1).map(|i| f[i].conj() * g[i]).sum();
        let ends = 0.5 * (f[0].conj() * g[0] + f[n - 1].conj() * g[n - 1]);
        Ok((interior + ends) * self.dx())
    }

    /// Real-valued version of [`XGrid::inner_product`].
    pub fn inner_product_real(&self, f: ArrayView1<'_, f64>, g: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_len(f.len())?;
        self.check_len(g.len())?;
        let n = self.n_points;
        let interior: f64 = (1..n - 1).map(|i| f[i] * g[i]).sum();
        Ok((interior + 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1])) * self.dx())
    }

    /// Trapezoid integral of a real field.
    pub fn integrate(&self, f: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_len(f.len())?;
        let n = self.n_points;
        Ok((f.iter().sum::<f64>() - 0.5 * (f[0] + f[n - 1])) * self.dx())
    }

    /// `dx * sum_i conj(f_i) g_i`: the trapezoid rule on the grid extended by the zero
    /// wall values. The discrete operators are Hermitian with respect to this product.
    pub fn lattice_inner(&self, f: ArrayView1<'_, Complex64>, g: ArrayView1<'_, Complex64>) -> Complex64 {
        f.iter().zip(g.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.dx()
    }

    /// Central difference `(f_{i+1} - f_{i-1}) / 2dx` with zero values beyond the walls.
    /// This is the first-derivative stencil used by the coupled operator.
    pub fn central_difference<T: Field>(&self, f: ArrayView1<'_, T>) -> Array1<T> {
        let n = f.len();
        let scale = 0.5 / self.dx();
        Array1::from_shape_fn(n, |i| {
            let right = if i + 1 < n { f[i + 1] } else { T::default() };
            let left = if i > 0 { f[i - 1] } else { T::default() };
            (right - left) * scale
        })
    }

    /// Second-order first derivative: central in the interior, one-sided at the two walls.
    pub fn derivative<T: Field>(&self, f: ArrayView1<'_, T>) -> Array1<T> {
        let n = f.len();
        let scale = 0.5 / self.dx();
        Array1::from_shape_fn(n, |i| {
            if i == 0 {
                (f[1] * 4.0 - f[0] * 3.0 - f[2]) * scale
            } else if i + 1 == n {
                (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * scale
            } else {
                (f[i + 1] - f[i - 1]) * scale
            }
        })
    }

    /// Second-order second derivative: three-point in the interior, one-sided at the walls.
    pub fn second_derivative<T: Field>(&self, f: ArrayView1<'_, T>) -> Array1<T> {
        let n = f.len();
        let scale = 1.0 / (self.dx() * self.dx());
        Array1::from_shape_fn(n, |i| {
            if i == 0 {
                (f[0] * 2.0 - f[1] * 5.0 + f[2] * 4.0 - f[3]) * scale
            } else if i + 1 == n {
                (f[n - 1] * 2.0 - f[n - 2] * 5.0 + f[n - 3] * 4.0 - f[n - 4]) * scale
            } else {
                (f[i + 1] - f[i] * 2.0 + f[i - 1]) * scale
            }
        })
    }

    /// Three-point second difference with zero values beyond the walls (the Hamiltonian stencil).
    pub fn dirichlet_second_difference<T: Field>(&self, f: ArrayView1<'_, T>) -> Array1<T> {
        let n = f.len();
        let scale = 1.0 / (self.dx() * self.dx());
        Array1::from_shape_fn(n, |i| {
            let right = if i + 1 < n { f[i + 1] } else { T::default() };
            let left = if i > 0 { f[i - 1] } else { T::default() };
            (right - f[i] * 2.0 + left) * scale
        })
    }
}

/// Scalars a grid field can hold.
pub trait Field: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl Field for f64 {}
impl Field for Complex64 {}
