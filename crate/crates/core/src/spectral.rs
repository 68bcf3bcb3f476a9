//! Eigenpairs of the coupled operator, labelled by Hermite sector, and of the baseline
//! Schrödinger Hamiltonians.
//!
//! The coupled spectrum is unbounded below as `n_max` grows, so there is no global ground
//! state to ask for. Requests name a sector `n` and a number of levels instead; the solver
//! computes every eigenvalue in an energy window around `-(hbar/tau_c)(n + 1/2)`, labels each
//! eigenvector by its mean mode number and keeps the ones that belong to the sector.
//!
//! Central differences decouple the unknowns `(n, i)` into two grid-parity classes by
//! `(n + i) % 2`. Each class is solved on its own as a Hermitian band matrix (eigenvalues by
//! bisection, eigenvectors by inverse iteration); every physical level therefore shows up
//! as a near-degenerate pair, one member per class, and is reported as a [`Level`].

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::NEAR_BOUNDARY;
use crate::lapack::{tridiagonal_eigen, ComplexBandLu, HermitianBand, TridiagonalSelection};
use crate::operator::{BandLayout, CoupledOperator, SchrodingerOperator};
use crate::quantum::{hermite_functions, HermiteBasis, XGrid};

/// Weight below which a state is reported as a mixture of sectors.
pub const MIXED_WEIGHT: f64 = 0.5;
/// Relative gap (to `max(1, |E|)`) under which eigenvalues of one sector form one level.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Residual bound `||A v - E v|| <= RESIDUAL_TOL * ||A||_inf` for reported pairs.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Mode coefficients `xi_n(x_i)` of `Psi(x, q) = sum_n xi_n(x) H_n(q)`, shape `(n_modes, n_points)`.
///
/// Norms and overlaps use `dx * sum_i`, the product the discrete operator is Hermitian for.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledWavefunction {
    coefficients: Array2<Complex64>,
    grid: XGrid,
    basis: HermiteBasis,
}

impl CoupledWavefunction {
    pub fn new(coefficients: Array2<Complex64>, grid: XGrid, basis: HermiteBasis) -> Result<Self> {
        if coefficients.nrows() != basis.n_modes() {
            return Err(Error::LengthMismatch { expected: basis.n_modes(), actual: coefficients.nrows() });
        }
        if coefficients.ncols() != grid.n_points() {
            return Err(Error::LengthMismatch { expected: grid.n_points(), actual: coefficients.ncols() });
        }
        Ok(Self { coefficients, grid, basis })
    }

    /// State with all of its amplitude in one mode.
    pub fn single_mode(field: ArrayView1<'_, Complex64>, mode: usize, grid: XGrid, basis: HermiteBasis) -> Result<Self> {
        if mode > basis.n_max() {
            return Err(Error::invalid("mode", format!("{mode} exceeds n_max = {}", basis.n_max())));
        }
        let mut coefficients = Array2::zeros((basis.n_modes(), grid.n_points()));
        if field.len() != grid.n_points() {
            return Err(Error::LengthMismatch { expected: grid.n_points(), actual: field.len() });
        }
        coefficients.row_mut(mode).assign(&field);
        Ok(Self { coefficients, grid, basis })
    }

    pub fn coefficients(&self) -> ArrayView2<'_, Complex64> {
        self.coefficients.view()
    }

    pub fn into_coefficients(self) -> Array2<Complex64> {
        self.coefficients
    }

    pub fn mode(&self, n: usize) -> ArrayView1<'_, Complex64> {
        self.coefficients.row(n)
    }

    pub fn grid(&self) -> &XGrid {
        &self.grid
    }

    pub fn basis(&self) -> &HermiteBasis {
        &self.basis
    }

    /// `int |xi_n|^2 dx` for every mode.
    pub fn mode_weights(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        self.coefficients.rows().into_iter().map(|row| row.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx).collect()
    }

    pub fn norm_squared(&self) -> f64 {
        self.mode_weights().iter().sum()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm_squared().sqrt();
        if norm > 0.0 {
            self.coefficients.mapv_inplace(|c| c / norm);
        }
        self
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coefficients.iter().zip(other.coefficients.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.dx()
    }

    /// `Psi(x_i, q)`.
    pub fn evaluate(&self, point: usize, q: f64) -> Complex64 {
        let h = hermite_functions(self.basis.n_max(), q);
        self.coefficients.column(point).iter().zip(h).map(|(c, h)| c * h).sum()
    }
}

/// Sector assignment of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorLabel {
    pub sector: usize,
    /// Share of the norm carried by the assigned mode.
    pub weight: f64,
    /// `<n> = sum_n n int |xi_n|^2 dx`.
    pub mean_mode: f64,
}

impl SectorLabel {
    pub fn is_mixed(&self) -> bool {
        self.weight < MIXED_WEIGHT
    }
}

/// Labels a state by the rounded mean mode number.
pub fn classify_sector(state: &CoupledWavefunction) -> SectorLabel {
    let weights = state.mode_weights();
    let total: f64 = weights.iter().sum();
    let total = if total > 0.0 { total } else { 1.0 };
    let mean_mode = weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum::<f64>() / total;
    let sector = (mean_mode.round() as usize).min(weights.len() - 1);
    SectorLabel { sector, weight: weights[sector] / total, mean_mode }
}

/// `P(x_i) = sum_n |xi_n(x_i)|^2`.
pub fn position_density(state: &CoupledWavefunction) -> Array1<f64> {
    state.coefficients.map_axis(ndarray::Axis(0), |col| col.iter().map(|c| c.norm_sqr()).sum())
}

/// Which part of the coupled spectrum to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// The `levels` lowest distinct levels assigned to `sector`.
    Sector { sector: usize, levels: usize },
    /// Every eigenpair with energy in `(lo, hi]`.
    Energy { lo: f64, hi: f64 },
}

/// Eigenpairs in ascending energy with their sector labels.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub energies: Vec<f64>,
    pub states: Vec<CoupledWavefunction>,
    pub labels: Vec<SectorLabel>,
    /// `||A v - E v|| / ||A||_inf` per pair.
    pub residuals: Vec<f64>,
    pub warnings: Vec<String>,
}

/// A group of eigenpairs of one sector whose energies agree within [`DEGENERACY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub sector: usize,
    pub members: Vec<usize>,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn mixed_states(&self) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, l)| l.is_mixed()).map(|(k, _)| k).collect()
    }

    /// Groups eigenpairs into levels per sector, ascending in energy.
    pub fn levels(&self) -> Vec<Level> {
        let mut levels: Vec<Level> = Vec::new();
        let mut open: Vec<usize> = Vec::new(); // index into `levels` of the last level per sector
        for (k, (&e, label)) in self.energies.iter().zip(&self.labels).enumerate() {
            if open.len() <= label.sector {
                open.resize(label.sector + 1, usize::MAX);
            }
            let slot = open[label.sector];
            if slot != usize::MAX {
                let level = &mut levels[slot];
                let last = self.energies[*level.members.last().unwrap()];
                if (e - last).abs() <= DEGENERACY_TOL * e.abs().max(1.0) {
                    level.members.push(k);
                    level.energy = level.members.iter().map(|&m| self.energies[m]).sum::<f64>() / level.members.len() as f64;
                    continue;
                }
            }
            open[label.sector] = levels.len();
            levels.push(Level { energy: e, sector: label.sector, members: vec![k] });
        }
        levels
    }

    pub fn sector_levels(&self, sector: usize) -> Vec<Level> {
        self.levels().into_iter().filter(|l| l.sector == sector).collect()
    }

    /// Position density of a level, averaged over its members (basis independent within the level).
    pub fn level_density(&self, level: &Level) -> Array1<f64> {
        let mut acc = Array1::zeros(self.states[level.members[0]].grid().n_points());
        for &m in &level.members {
            acc += &position_density(&self.states[m]);
        }
        acc / level.members.len() as f64
    }
}

struct Component {
    layout: BandLayout,
    band: HermitianBand,
}

struct Pair {
    energy: f64,
    state: CoupledWavefunction,
    residual: f64,
}

/// Diagonalizes the coupled operator in the requested window.
pub fn solve_coupled(op: &CoupledOperator, window: Window) -> Result<SpectralResult> {
    let components: Vec<Component> = [0, 1]
        .into_iter()
        .map(|p| op.interleaved_layout(Some(p)))
        .filter(|l| !l.globals.is_empty())
        .map(|layout| {
            let band = op.band(&layout);
            Component { layout, band }
        })
        .collect();
    let norm = op.norm_inf().max(f64::MIN_POSITIVE);

    let mut warnings: Vec<String> = op.warnings().to_vec();
    if let Some(omega) = op.potential().harmonic_frequency(op.params().mass()) {
        let product = omega * op.params().tau_c();
        if product >= NEAR_BOUNDARY {
            let msg = format!("omega * tau_c = {product:.4} is close to or past the ill-defined boundary at 1");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }

    let pairs = match window {
        Window::Energy { lo, hi } => window_pairs(op, &components, lo, hi, norm)?,
        Window::Sector { sector, levels } => sector_pairs(op, &components, sector, levels, norm)?,
    };
    let labels = pairs.iter().map(|p| classify_sector(&p.state)).collect();
    Ok(SpectralResult {
        energies: pairs.iter().map(|p| p.energy).collect(),
        residuals: pairs.iter().map(|p| p.residual).collect(),
        states: pairs.into_iter().map(|p| p.state).collect(),
        labels,
        warnings,
    })
}

fn sector_pairs(op: &CoupledOperator, components: &[Component], sector: usize, wanted: usize, norm: f64) -> Result<Vec<Pair>> {
    if sector > op.basis().n_max() {
        return Err(Error::invalid("sector", format!("{sector} exceeds n_max = {}", op.basis().n_max())));
    }
    if wanted == 0 {
        return Ok(Vec::new());
    }
    let params = op.params();
    let scale = params.hbar() / params.tau_c();
    let v_min = op.mode_diagonal(0).iter().fold(f64::INFINITY, |a, &b| a.min(b)) - params.mode_offset(0).unwrap_or_default();
    let lo = params.mode_offset(sector).unwrap_or_default() + v_min - 0.1 * scale;
    let mut hi = lo;
    let mut width = 0.1 * scale;
    let mut pairs: Vec<Pair> = Vec::new();
    loop {
        let next_hi = (lo + width).min(norm);
        pairs.extend(window_pairs(op, components, hi, next_hi, norm)?);
        hi = next_hi;
        pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));

        // Levels of the sector that end safely below the window top are complete.
        let mut complete = Vec::new();
        let mut last: Option<f64> = None;
        for (k, p) in pairs.iter().enumerate() {
            if classify_sector(&p.state).sector != sector {
                continue;
            }
            let tol = DEGENERACY_TOL * p.energy.abs().max(1.0);
            match last {
                Some(e) if (p.energy - e).abs() <= tol => complete.last_mut().map(|l: &mut Vec<usize>| l.push(k)),
                _ => {
                    complete.push(vec![k]);
                    None
                }
            };
            last = Some(p.energy);
        }
        let safe = complete.iter().filter(|members| pairs[*members.last().unwrap()].energy < hi - 1e3 * DEGENERACY_TOL * hi.abs().max(1.0)).count();
        if safe >= wanted {
            let keep: Vec<usize> = complete.into_iter().take(wanted).flatten().collect();
            let mut out = Vec::with_capacity(keep.len());
            let mut taken = vec![false; pairs.len()];
            for k in keep {
                taken[k] = true;
            }
            for (k, p) in pairs.into_iter().enumerate() {
                if taken[k] {
                    out.push(p);
                }
            }
            return Ok(out);
        }
        if hi >= norm {
            return Err(Error::NotEnough { requested: wanted, available: safe });
        }
        width *= 2.0;
    }
}

fn window_pairs(op: &CoupledOperator, components: &[Component], lo: f64, hi: f64, norm: f64) -> Result<Vec<Pair>> {
    let mut pairs = Vec::new();
    if hi <= lo {
        return Ok(pairs);
    }
    for comp in components {
        let values = comp.band.eigenvalues_in(lo, hi)?;
        if values.is_empty() {
            continue;
        }
        let vectors = inverse_iteration(&comp.band, &values, norm)?;
        for (energy, (v, residual)) in values.into_iter().zip(vectors) {
            pairs.push(Pair { energy, state: to_wavefunction(op, &comp.layout, &v), residual });
        }
    }
    pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(pairs)
}

const MAX_INVERSE_ITERATIONS: usize = 8;

/// Eigenvectors for known eigenvalues by shifted inverse iteration with banded LU.
/// Vectors of eigenvalues closer than `1e-3 ||A||` are kept mutually orthogonal.
fn inverse_iteration(band: &HermitianBand, values: &[f64], norm: f64) -> Result<Vec<(Vec<Complex64>, f64)>> {
    let n = band.n();
    let sep = 10.0 * f64::EPSILON * norm;
    let cluster = 1e-3 * norm;
    let mut out: Vec<(Vec<Complex64>, f64)> = Vec::with_capacity(values.len());
    let mut prev_shift = f64::NEG_INFINITY;
    let mut y = vec![Complex64::default(); n];
    for (k, &lambda) in values.iter().enumerate() {
        let mut shift = lambda;
        if shift - prev_shift < sep {
            shift = prev_shift + sep;
        }
        prev_shift = shift;
        let lu = factor_shifted(band, shift, sep)?;
        let first = (0..k).find(|&j| lambda - values[j] < cluster).unwrap_or(k);

        let mut x: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(1.0 + 0.5 * (0.7548776662 * j as f64 + 0.5698402910 * k as f64).sin(), 0.0))
            .collect();
        normalize(&mut x);
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_INVERSE_ITERATIONS {
            lu.solve_in_place(&mut x)?;
            for _ in 0..2 {
                for (v, _) in &out[first..k] {
                    let overlap: Complex64 = v.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= overlap * vi);
                }
            }
            normalize(&mut x);
            band.matvec(&x, &mut y);
            residual = y.iter().zip(&x).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt() / norm;
            if residual <= 1e-12 {
                break;
            }
        }
        if residual > RESIDUAL_TOL {
            return Err(Error::Eigensolver {
                routine: "inverse iteration",
                info: k as i32,
                detail: format!("eigenvalue {lambda} of band n = {n}, kd = {}: relative residual {residual:.3e}", band.kd()),
            });
        }
        out.push((x, residual));
    }
    Ok(out)
}

fn factor_shifted(band: &HermitianBand, shift: f64, nudge: f64) -> Result<ComplexBandLu> {
    let build = |s: f64| {
        ComplexBandLu::factor(band.n(), band.kd(), |r, c| {
            let a = band.get(r, c);
            if r == c {
                a - s
            } else {
                a
            }
        })
    };
    // An exactly singular pivot only happens when the shift is an eigenvalue to the last bit.
    build(shift).or_else(|_| build(shift + nudge))
}

fn normalize(x: &mut [Complex64]) {
    let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    x.iter_mut().for_each(|c| *c /= norm);
}

fn to_wavefunction(op: &CoupledOperator, layout: &BandLayout, v: &[Complex64]) -> CoupledWavefunction {
    // Fix the global phase: largest coefficient real and positive.
    let (mut best, mut best_abs) = (0, -1.0);
    for (k, c) in v.iter().enumerate() {
        if c.norm() > best_abs {
            best = k;
            best_abs = c.norm();
        }
    }
    let phase = if best_abs > 0.0 { v[best].conj() / best_abs } else { Complex64::new(1.0, 0.0) };
    let scale = op.grid().dx().sqrt().recip();
    let mut coefficients = Array2::zeros((op.n_modes(), op.n_points()));
    for (local, &global) in layout.globals.iter().enumerate() {
        let (n, i) = op.split_index(global);
        coefficients[[n, i]] = v[local] * phase * scale;
    }
    CoupledWavefunction { coefficients, grid: *op.grid(), basis: *op.basis() }
}

/// Lowest eigenpairs of a baseline Hamiltonian.
#[derive(Debug, Clone)]
pub struct BaselineSpectrum {
    pub energies: Vec<f64>,
    /// Real eigenfunctions normalized with the trapezoid product on the grid.
    pub states: Vec<Array1<f64>>,
}

/// The `k` lowest eigenpairs of the real symmetric tridiagonal `op`.
pub fn solve_schrodinger(op: &SchrodingerOperator, k: usize) -> Result<BaselineSpectrum> {
    let n = op.dim();
    if k > n {
        return Err(Error::NotEnough { requested: k, available: n });
    }
    if k == 0 {
        return Ok(BaselineSpectrum { energies: Vec::new(), states: Vec::new() });
    }
    let off = vec![op.off_diagonal(); n - 1];
    let (energies, z) = tridiagonal_eigen(op.diagonal(), &off, TridiagonalSelection::Indices(0, k - 1), true)?;
    let grid = op.grid();
    let states = z
        .chunks(n)
        .map(|col| {
            let mut f = Array1::from_vec(col.to_vec());
            let norm = grid.inner_product_real(f.view(), f.view()).unwrap_or(1.0).sqrt();
            let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let sign = f.iter().find(|v| v.abs() > 0.5 * peak).map_or(1.0, |v| v.signum());
            f.mapv_inplace(|v| sign * v / norm);
            f
        })
        .collect();
    Ok(BaselineSpectrum { energies, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{assemble_coupled, assemble_schrodinger};
    use crate::quantum::{PhysicalParams, Potential};
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn harmonic_op(tau: f64, n_max: usize, n_points: usize) -> CoupledOperator {
        let grid = XGrid::new(-10.0, 10.0, n_points).unwrap();
        assemble_coupled(&PhysicalParams::natural(tau).unwrap(), &Potential::harmonic(1.0, 1.0), &grid, &HermiteBasis::new(n_max)).unwrap()
    }

    #[test]
    fn classify_single_mode() {
        let grid = XGrid::new(0.0, 1.0, 11).unwrap();
        let field = Array1::from_elem(11, c(1.0));
        let state = CoupledWavefunction::single_mode(field.view(), 0, grid, HermiteBasis::new(3)).unwrap().normalized();
        let label = classify_sector(&state);
        assert_eq!(label.sector, 0);
        assert!((label.weight - 1.0).abs() < 1e-14);
        assert!(!label.is_mixed());
    }

    #[test]
    fn classify_split_state() {
        let grid = XGrid::new(0.0, 1.0, 11).unwrap();
        let mut coeffs = Array2::zeros((4, 11));
        let dx = grid.dx();
        coeffs[[1, 3]] = c((0.9 / dx).sqrt());
        coeffs[[2, 7]] = c((0.1 / dx).sqrt());
        let state = CoupledWavefunction::new(coeffs, grid, HermiteBasis::new(3)).unwrap();
        let label = classify_sector(&state);
        assert_eq!(label.sector, 1);
        assert!((label.weight - 0.9).abs() < 1e-12);
        assert!((label.mean_mode - 1.1).abs() < 1e-12);
    }

    #[test]
    fn mixed_flag() {
        let grid = XGrid::new(0.0, 1.0, 11).unwrap();
        let mut coeffs = Array2::zeros((3, 11));
        coeffs[[0, 2]] = c(1.0);
        coeffs[[1, 2]] = c(1.0);
        coeffs[[2, 2]] = c(1.0);
        let label = classify_sector(&CoupledWavefunction::new(coeffs, grid, HermiteBasis::new(2)).unwrap());
        assert_eq!(label.sector, 1);
        assert!(label.is_mixed());
    }

    #[test]
    fn single_mode_density() {
        let grid = XGrid::new(-1.0, 1.0, 11).unwrap();
        let field = grid.points().mapv(|x| Complex64::new(x, 1.0 - x));
        let state = CoupledWavefunction::single_mode(field.view(), 0, grid, HermiteBasis::new(2)).unwrap();
        let density = position_density(&state);
        for (d, f) in density.iter().zip(field.iter()) {
            assert_eq!(*d, f.norm_sqr());
        }
    }

    #[test]
    fn evaluate_uses_hermite_expansion() {
        let grid = XGrid::new(-1.0, 1.0, 9).unwrap();
        let mut coeffs = Array2::zeros((3, 9));
        coeffs[[0, 4]] = c(2.0);
        coeffs[[2, 4]] = Complex64::new(0.0, 1.0);
        let state = CoupledWavefunction::new(coeffs, grid, HermiteBasis::new(2)).unwrap();
        let q = 0.4;
        let h = hermite_functions(2, q);
        assert!((state.evaluate(4, q) - Complex64::new(2.0 * h[0], h[2])).norm() < 1e-15);
    }

    #[test]
    fn decoupled_limit_is_diagonal() {
        let grid = XGrid::new(-2.0, 2.0, 21).unwrap();
        let op = assemble_coupled(&PhysicalParams::natural(0.1).unwrap(), &Potential::free(), &grid, &HermiteBasis::new(0)).unwrap();
        let res = solve_coupled(&op, Window::Energy { lo: -100.0, hi: 100.0 }).unwrap();
        assert_eq!(res.len(), 21);
        assert!(res.energies.iter().all(|&e| (e + 5.0).abs() < 1e-12));
        assert!(!res.warnings.is_empty());
    }

    #[test]
    fn eigenpairs_satisfy_residual_bound_and_are_orthonormal() {
        let op = harmonic_op(0.05, 4, 81);
        let res = solve_coupled(&op, Window::Sector { sector: 0, levels: 3 }).unwrap();
        let norm = op.norm_inf();
        for (k, state) in res.states.iter().enumerate() {
            let av = op.apply(state.coefficients());
            let r = (&av - &state.coefficients().mapv(|c| c * res.energies[k])).mapv(|c| c.norm_sqr()).sum().sqrt() * op.grid().dx().sqrt();
            assert!(r <= RESIDUAL_TOL * norm, "pair {k}: residual {r}");
            assert!((state.norm_squared() - 1.0).abs() < 1e-10);
            for (j, other) in res.states.iter().enumerate().take(k) {
                assert!(state.inner(other).norm() < 1e-8, "pairs {j},{k} overlap");
            }
        }
        assert!(res.energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn harmonic_levels_come_in_grid_parity_pairs() {
        let op = harmonic_op(0.05, 6, 201);
        let res = solve_coupled(&op, Window::Sector { sector: 0, levels: 4 }).unwrap();
        let levels = res.sector_levels(0);
        assert_eq!(levels.len(), 4);
        for level in &levels {
            assert_eq!(level.members.len(), 2, "{level:?}");
        }
        assert!(res.labels.iter().all(|l| l.sector == 0));
    }

    #[test]
    fn ground_sector_weight_is_dominant() {
        let op = harmonic_op(0.05, 8, 201);
        let res = solve_coupled(&op, Window::Sector { sector: 0, levels: 1 }).unwrap();
        for label in &res.labels {
            // First-order admixture xi_1 = i sqrt(hbar tau / 2m) xi_0': weight tau <p^2> / 2 = 0.0125.
            assert_eq!(label.sector, 0);
            assert!((1.0 - label.weight - 0.0125).abs() < 2e-3, "weight {}", label.weight);
        }
    }

    #[test]
    fn level_density_integrates_to_one() {
        let op = harmonic_op(0.05, 6, 201);
        let res = solve_coupled(&op, Window::Sector { sector: 1, levels: 2 }).unwrap();
        for level in res.levels() {
            let density = res.level_density(&level);
            assert!(density.iter().all(|&p| p >= 0.0));
            let total = density.sum() * op.grid().dx();
            assert!((total - 1.0).abs() < 1e-8);
        }
        for state in &res.states {
            let total = position_density(state).sum() * op.grid().dx();
            assert!((total - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn sector_above_truncation_is_rejected() {
        let op = harmonic_op(0.05, 2, 41);
        assert!(solve_coupled(&op, Window::Sector { sector: 3, levels: 1 }).is_err());
    }

    #[test]
    fn near_boundary_is_flagged() {
        let op = harmonic_op(0.85, 2, 41);
        let res = solve_coupled(&op, Window::Energy { lo: -1.0, hi: 0.0 }).unwrap();
        assert!(res.warnings.iter().any(|w| w.contains("omega * tau_c")));
    }

    #[test]
    fn baseline_harmonic_spectrum() {
        // Second-order stencil: the error is about (dx^2 / 24) <p^4>, below 1e-4 at dx = 0.01.
        let grid = XGrid::new(-8.0, 8.0, 1601).unwrap();
        let h = assemble_schrodinger(&PhysicalParams::default(), &Potential::harmonic(1.0, 1.0), &grid, 1.0).unwrap();
        let spec = solve_schrodinger(&h, 3).unwrap();
        for (k, e) in spec.energies.iter().enumerate() {
            assert!((e - (k as f64 + 0.5)).abs() < 1e-4, "level {k}: {e}");
        }
        for s in &spec.states {
            assert!((grid.inner_product_real(s.view(), s.view()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn baseline_box_levels() {
        // Dirichlet walls sit one spacing beyond the end points: L = (n + 1) dx.
        for n_points in [51, 101] {
            let grid = XGrid::new(0.0, 1.0, n_points).unwrap();
            let h = assemble_schrodinger(&PhysicalParams::default(), &Potential::free(), &grid, 1.0).unwrap();
            let spec = solve_schrodinger(&h, 3).unwrap();
            let l = (n_points + 1) as f64 * grid.dx();
            for (k, e) in spec.energies.iter().enumerate() {
                let exact = PI * PI * ((k + 1) * (k + 1)) as f64 / (2.0 * l * l);
                assert!((e - exact).abs() < exact * grid.dx() * grid.dx() * ((k + 1) * (k + 1)) as f64 * PI * PI / 12.0 + 1e-12);
            }
        }
    }
}
