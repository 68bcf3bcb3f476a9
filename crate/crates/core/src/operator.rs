//! Discrete operators: the coupled `(x, q)` stationary operator in the Hermite-mode
//! representation and the baseline Schrödinger Hamiltonians `H_m`, `H_{m/2}`.
//!
//! Indices are block-major: unknown `(n, i)` (Hermite mode `n`, grid point `i`) sits at
//! `n * n_points + i`.

use std::io::{self, Write};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lapack::HermitianBand;
use crate::quantum::{HermiteBasis, PhysicalParams, Potential, XGrid};

/// Hermitian, block-tridiagonal (in `n`) discretization of the stationary extended equation.
///
/// For each mode `n` the operator maps
/// `xi_n -> -(hbar/tau_c)(n + 1/2) xi_n + V xi_n + i c [sqrt(n) D xi_{n-1} + sqrt(n+1) D xi_{n+1}]`
/// with `c = sqrt(hbar^3 / (2 m tau_c))` and `D` the central difference with zero wall values.
/// `D` is real antisymmetric, so the `i c D` blocks pair up into a Hermitian matrix.
///
/// Only the mode diagonals and the coupling constant are stored; entries are produced on
/// demand from one formula, which makes `A[r][c] == conj(A[c][r])` hold bit for bit.
#[derive(Debug, Clone)]
pub struct CoupledOperator {
    params: PhysicalParams,
    potential: Potential,
    grid: XGrid,
    basis: HermiteBasis,
    mode_diagonal: Array2<f64>,
    coupling: f64,
    half_inv_dx: f64,
    warnings: Vec<String>,
}

/// Assembles the coupled operator. Requires `tau_c > 0`.
pub fn assemble_coupled(
    params: &PhysicalParams,
    potential: &Potential,
    grid: &XGrid,
    basis: &HermiteBasis,
) -> Result<CoupledOperator> {
    let (Some(coupling), true) = (params.mode_coupling(), params.tau_c() > 0.0) else {
        return Err(Error::BaselineOnly { tau_c: params.tau_c() });
    };
    let v = grid.sample(|x| potential.value(x));
    let mode_diagonal = Array2::from_shape_fn((basis.n_modes(), grid.n_points()), |(n, i)| {
        params.mode_offset(n).unwrap_or_default() + v[i]
    });
    let mut warnings = Vec::new();
    if basis.n_max() == 0 {
        let msg = "n_max = 0: no x-q coupling survives the truncation".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(CoupledOperator {
        params: *params,
        potential: potential.clone(),
        grid: *grid,
        basis: *basis,
        mode_diagonal,
        coupling,
        half_inv_dx: 0.5 / grid.dx(),
        warnings,
    })
}

impl CoupledOperator {
    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn grid(&self) -> &XGrid {
        &self.grid
    }

    pub fn basis(&self) -> &HermiteBasis {
        &self.basis
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points()
    }

    pub fn dim(&self) -> usize {
        self.n_modes() * self.n_points()
    }

    pub fn index(&self, mode: usize, point: usize) -> usize {
        mode * self.n_points() + point
    }

    pub fn split_index(&self, index: usize) -> (usize, usize) {
        (index / self.n_points(), index % self.n_points())
    }

    /// `sqrt(hbar^3 / (2 m tau_c))`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Diagonal of block `n`: `-(hbar/tau_c)(n + 1/2) + V(x_i)`.
    pub fn mode_diagonal(&self, mode: usize) -> ArrayView1<'_, f64> {
        self.mode_diagonal.row(mode)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let (n, i) = self.split_index(row);
        let (m, j) = self.split_index(col);
        if n == m && i == j {
            return Complex64::new(self.mode_diagonal[[n, i]], 0.0);
        }
        if n.abs_diff(m) != 1 || i.abs_diff(j) != 1 {
            return Complex64::default();
        }
        let d = if j > i { self.half_inv_dx } else { -self.half_inv_dx };
        Complex64::new(0.0, self.coupling * (n.max(m) as f64).sqrt() * d)
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let (modes, points) = (self.n_modes(), self.n_points());
        let mut out = Vec::with_capacity(self.dim() * 5);
        for n in 0..modes {
            for i in 0..points {
                let row = self.index(n, i);
                let mut cols = Vec::with_capacity(5);
                for m in [n.wrapping_sub(1), n + 1] {
                    if m >= modes {
                        continue;
                    }
                    for j in [i.wrapping_sub(1), i + 1] {
                        if j < points {
                            cols.push(self.index(m, j));
                        }
                    }
                }
                cols.push(row);
                cols.sort_unstable();
                out.extend(cols.into_iter().map(|col| (row, col, self.entry(row, col))));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut a = Array2::zeros((self.dim(), self.dim()));
        for (r, c, v) in self.triplets() {
            a[[r, c]] = v;
        }
        a
    }

    /// Applies the operator to mode coefficients of shape `(n_modes, n_points)`.
    pub fn apply(&self, xi: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
        let modes = self.n_modes();
        let derivatives: Vec<Array1<Complex64>> = (0..modes).map(|n| self.grid.central_difference(xi.row(n))).collect();
        let i_c = Complex64::new(0.0, self.coupling);
        Array2::from_shape_fn((modes, self.n_points()), |(n, i)| {
            let mut acc = xi[[n, i]] * self.mode_diagonal[[n, i]];
            if n > 0 {
                acc += i_c * (n as f64).sqrt() * derivatives[n - 1][i];
            }
            if n + 1 < modes {
                acc += i_c * ((n + 1) as f64).sqrt() * derivatives[n + 1][i];
            }
            acc
        })
    }

    /// Infinity norm of the matrix.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.dim()];
        for (r, _, v) in self.triplets() {
            rows[r] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Writes the nonzeros as `row col re im` lines after a `# dim nnz` header.
    pub fn write_triplets(&self, mut w: impl Write) -> io::Result<()> {
        let triplets = self.triplets();
        writeln!(w, "# {} {}", self.dim(), triplets.len())?;
        for (r, c, v) in triplets {
            writeln!(w, "{r} {c} {:.11e} {:.11e}", v.re, v.im)?;
        }
        Ok(())
    }

    /// Mode-interleaved ordering (`i` outer, `n` inner) of the unknowns with `(n + i) % 2 == parity`,
    /// or of all unknowns when `parity` is `None`.
    ///
    /// The central difference only couples `(n, i)` to `(n +- 1, i +- 1)`, so `n + i` keeps its
    /// parity and the two classes are exactly decoupled; each is a narrow band matrix in this
    /// ordering.
    pub(crate) fn interleaved_layout(&self, parity: Option<usize>) -> BandLayout {
        let (modes, points) = (self.n_modes(), self.n_points());
        let mut globals = Vec::with_capacity(self.dim());
        for i in 0..points {
            for n in 0..modes {
                if parity.is_none_or(|p| (n + i) % 2 == p) {
                    globals.push(self.index(n, i));
                }
            }
        }
        let mut local = vec![usize::MAX; self.dim()];
        for (l, &g) in globals.iter().enumerate() {
            local[g] = l;
        }
        let mut kd = 0;
        for (r, c, _) in self.triplets() {
            let (lr, lc) = (local[r], local[c]);
            if lr != usize::MAX && lc != usize::MAX {
                kd = kd.max(lr.abs_diff(lc));
            } else {
                debug_assert!(lr == usize::MAX && lc == usize::MAX, "layout splits a coupled pair");
            }
        }
        BandLayout { globals, kd }
    }

    pub(crate) fn band(&self, layout: &BandLayout) -> HermitianBand {
        let n = layout.globals.len();
        let mut band = HermitianBand::zeros(n, layout.kd);
        for c in 0..n {
            for r in c..(c + layout.kd + 1).min(n) {
                band.set_lower(r, c, self.entry(layout.globals[r], layout.globals[c]));
            }
        }
        band
    }
}

/// Subset of unknowns in a banded order; `globals[local] = block-major index`.
#[derive(Debug, Clone)]
pub(crate) struct BandLayout {
    pub globals: Vec<usize>,
    pub kd: usize,
}

/// Real symmetric tridiagonal `-(hbar^2 / 2 mass_eff) d^2/dx^2 + V(x)` with Dirichlet walls.
#[derive(Debug, Clone)]
pub struct SchrodingerOperator {
    grid: XGrid,
    potential: Potential,
    hbar: f64,
    mass_eff: f64,
    diagonal: Vec<f64>,
    off_diagonal: f64,
}

/// Assembles `H_{mass_eff}`; pass `params.mass()` for `H_m` and `params.mass() / 2` for `H_{m/2}`.
pub fn assemble_schrodinger(
    params: &PhysicalParams,
    potential: &Potential,
    grid: &XGrid,
    mass_eff: f64,
) -> Result<SchrodingerOperator> {
    if !(mass_eff.is_finite() && mass_eff > 0.0) {
        return Err(Error::invalid("mass_eff", format!("must be finite and > 0, got {mass_eff}")));
    }
    let dx = grid.dx();
    let kinetic = params.hbar() * params.hbar() / (mass_eff * dx * dx);
    let diagonal = (0..grid.n_points()).map(|i| kinetic + potential.value(grid.point(i))).collect();
    Ok(SchrodingerOperator {
        grid: *grid,
        potential: potential.clone(),
        hbar: params.hbar(),
        mass_eff,
        diagonal,
        off_diagonal: -0.5 * kinetic,
    })
}

impl SchrodingerOperator {
    pub fn grid(&self) -> &XGrid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass_eff(&self) -> f64 {
        self.mass_eff
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> f64 {
        self.off_diagonal
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.dim();
        Array2::from_shape_fn((n, n), |(r, c)| {
            if r == c {
                self.diagonal[r]
            } else if r.abs_diff(c) == 1 {
                self.off_diagonal
            } else {
                0.0
            }
        })
    }

    pub fn apply(&self, f: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = self.dim();
        Array1::from_shape_fn(n, |i| {
            let mut acc = self.diagonal[i] * f[i];
            if i > 0 {
                acc += self.off_diagonal * f[i - 1];
            }
            if i + 1 < n {
                acc += self.off_diagonal * f[i + 1];
            }
            acc
        })
    }

    pub fn norm_inf(&self) -> f64 {
        self.diagonal.iter().map(|d| d.abs() + 2.0 * self.off_diagonal.abs()).fold(0.0, f64::max)
    }
}
