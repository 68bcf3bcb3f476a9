//! First-order `tau_c` corrections in the `n = 0` sector.
//!
//! With `E = E0/tau_c + E1 + tau_c E2 + ...` and `xi_n = tau_c^(n/2) (phi_n0 + tau_c phi_n1 + ...)`,
//! `E0 = -hbar/2`, `(E1, phi00)` is an eigenpair of `H_m`, and
//!
//! ```text
//! E2 = (hbar/m) <Phi| R (V'' + V' d/dx) |Phi> / <Phi| R |Phi>,   R = (H_{m/2} - E1)^-1
//! phi01 = R (E2 - (hbar/m) V'' - (hbar/m) V' d/dx) Phi
//! ```
//!
//! `R` is applied through a tridiagonal LU factorization with one step of iterative
//! refinement. `d/dx` is the central difference shared with the coupled operator.
//!
//! Balancing the `tau_c^(1/2)` terms of the `n = 1` mode equation gives
//! `E1 phi10 = -hbar phi11 + V phi10 + ...`, where the chain above carries `-(hbar/2) phi11`.
//! With `-hbar phi11` the first-order equation becomes `(H_m - E1) phi01 = (E2 - (hbar/2m)(V'' + V' d/dx)) Phi`
//! and solvability fixes `E2 = (hbar/2m) <Phi|V'' + V' d/dx|Phi>`, which is
//! [`solvability_energy_correction`]. It reproduces the exact harmonic shift `hbar omega^2 / 4`
//! for every level; the resolvent ratio does not.

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lapack::{tridiagonal_eigen, TridiagonalLu, TridiagonalSelection};
use crate::operator::{assemble_schrodinger, SchrodingerOperator};
use crate::quantum::{PhysicalParams, Potential, XGrid};
use crate::spectral::{solve_schrodinger, CoupledWavefunction};

/// `min |lambda_k(H_{m/2}) - E1|` below this multiple of `||H_{m/2}||_inf` is treated as singular.
pub const SINGULAR_GAP: f64 = 1e-8;
/// `|<Phi|R|Phi>|` below this multiple of `||Phi|| ||R Phi||` is rejected.
pub const MIN_RESOLVENT_OVERLAP: f64 = 1e-10;

/// `(H - shift)^-1` for a real symmetric tridiagonal `H`.
#[derive(Debug, Clone)]
pub struct ShiftedResolvent {
    sub: Vec<f64>,
    diag: Vec<f64>,
    lu: TridiagonalLu,
    shift: f64,
    gap: f64,
    condition: f64,
}

impl ShiftedResolvent {
    /// Factorizes `op - shift`, refusing shifts within `SINGULAR_GAP * ||op||` of its spectrum.
    pub fn new(op: &SchrodingerOperator, shift: f64) -> Result<Self> {
        let n = op.dim();
        let sub = vec![op.off_diagonal(); n - 1];
        let (eigs, _) = tridiagonal_eigen(op.diagonal(), &sub, TridiagonalSelection::All, false)?;
        let distances = eigs.iter().map(|e| (e - shift).abs());
        let gap = distances.clone().fold(f64::INFINITY, f64::min);
        let far = distances.fold(0.0, f64::max);
        let threshold = SINGULAR_GAP * op.norm_inf();
        if gap < threshold {
            return Err(Error::SingularResolvent { e1: shift, gap, threshold });
        }
        let diag: Vec<f64> = op.diagonal().iter().map(|d| d - shift).collect();
        let lu = TridiagonalLu::factor(&sub, &diag, &sub)?;
        Ok(Self { sub, diag, lu, shift, gap, condition: far / gap })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Distance from the shift to the nearest eigenvalue.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// 2-norm condition number of `op - shift`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, rhs: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let mut x = rhs.to_vec();
        self.lu.solve_in_place(&mut x)?;
        let mut r: Vec<f64> = self.residual(rhs, &x);
        self.lu.solve_in_place(&mut r)?;
        x.iter_mut().zip(&r).for_each(|(xi, ri)| *xi += ri);
        Ok(Array1::from_vec(x))
    }

    fn residual(&self, rhs: ArrayView1<'_, f64>, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut ax = self.diag[i] * x[i];
                if i > 0 {
                    ax += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    ax += self.sub[i] * x[i + 1];
                }
                rhs[i] - ax
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationDiagnostics {
    /// `|<phi00|phi01>|` after projection.
    pub orthogonality_residual: f64,
    /// `|<phi00|phi01>|` before projection (zero analytically once E2 is fixed).
    pub pre_projection_overlap: f64,
    /// `<Phi|R|Phi>`.
    pub resolvent_overlap: f64,
    /// Distance from `E1` to the spectrum of `H_{m/2}`.
    pub resolvent_gap: f64,
    pub resolvent_condition: f64,
    /// `max |Phi|` over the two wall points relative to `max |Phi|`.
    pub wall_amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct PerturbationResult {
    pub level: usize,
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    /// Eigenfunction of `H_m`, trapezoid-normalized.
    pub phi00: Array1<f64>,
    pub phi01: Array1<f64>,
    pub diagnostics: PerturbationDiagnostics,
}

impl PerturbationResult {
    /// `E0 / tau_c + E1 + tau_c E2`.
    pub fn energy(&self, tau_c: f64) -> f64 {
        self.e0 / tau_c + self.e1 + tau_c * self.e2
    }
}

/// `E2` for level `level` of `H_m`, together with `phi01`.
pub fn energy_correction(params: &PhysicalParams, pot: &Potential, grid: &XGrid, level: usize) -> Result<PerturbationResult> {
    let (hbar, mass) = (params.hbar(), params.mass());
    let h_m = assemble_schrodinger(params, pot, grid, mass)?;
    let baseline = solve_schrodinger(&h_m, level + 1)?;
    let e1 = baseline.energies[level];
    let phi = baseline.states[level].clone();

    let h_half = assemble_schrodinger(params, pot, grid, mass / 2.0)?;
    let resolvent = ShiftedResolvent::new(&h_half, e1)?;

    let y = resolvent.solve(numerator(pot, grid, phi.view()).view())?;
    let z = resolvent.solve(phi.view())?;
    let overlap = grid.inner_product_real(phi.view(), z.view())?;
    let scale = grid.inner_product_real(z.view(), z.view())?.sqrt();
    if overlap.abs() < MIN_RESOLVENT_OVERLAP * scale {
        return Err(Error::DegenerateResolventOverlap { overlap, scale });
    }
    let num = grid.inner_product_real(phi.view(), y.view())?;
    // An identically vanishing numerator (free particle) gives exactly +0.
    let e2 = if num == 0.0 { 0.0 } else { hbar / mass * num / overlap };

    // phi01 = R (E2 Phi - (hbar/m)(V'' Phi + V' D Phi)) = E2 z - (hbar/m) y
    let mut phi01 = &z * e2 - &y * (hbar / mass);
    let pre = grid.inner_product_real(phi.view(), phi01.view())?;
    phi01.scaled_add(-pre, &phi);
    let post = grid.inner_product_real(phi.view(), phi01.view())?;

    let peak = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = phi.len();
    Ok(PerturbationResult {
        level,
        e0: -hbar / 2.0,
        e1,
        e2,
        phi00: phi.clone(),
        phi01,
        diagnostics: PerturbationDiagnostics {
            orthogonality_residual: post.abs(),
            pre_projection_overlap: pre.abs(),
            resolvent_overlap: overlap,
            resolvent_gap: resolvent.gap(),
            resolvent_condition: resolvent.condition(),
            wall_amplitude: phi[0].abs().max(phi[n - 1].abs()) / peak,
        },
    })
}

/// `V'' f + V' D f`.
fn numerator(pot: &Potential, grid: &XGrid, f: ArrayView1<'_, f64>) -> Array1<f64> {
    let df = grid.central_difference(f);
    Array1::from_shape_fn(f.len(), |i| {
        let v = pot.eval(grid.point(i));
        v.second * f[i] + v.first * df[i]
    })
}

/// `E2 = (hbar/2m) <Phi|V'' Phi + V' D Phi>` for level `level` of `H_m`.
pub fn solvability_energy_correction(params: &PhysicalParams, pot: &Potential, grid: &XGrid, level: usize) -> Result<f64> {
    let h_m = assemble_schrodinger(params, pot, grid, params.mass())?;
    let baseline = solve_schrodinger(&h_m, level + 1)?;
    let phi = &baseline.states[level];
    let num = grid.inner_product_real(phi.view(), numerator(pot, grid, phi.view()).view())?;
    Ok(if num == 0.0 { 0.0 } else { params.hbar() / (2.0 * params.mass()) * num })
}

/// `phi01` by one direct solve `R (E2 - (hbar/m) V'' - (hbar/m) V' D) Phi`, projected orthogonal
/// to `phi00`. Returns the field and the pre-projection overlap.
pub fn first_order_wavefunction(result: &PerturbationResult, params: &PhysicalParams, pot: &Potential, grid: &XGrid) -> Result<(Array1<f64>, f64)> {
    let ratio = params.hbar() / params.mass();
    let h_half = assemble_schrodinger(params, pot, grid, params.mass() / 2.0)?;
    let resolvent = ShiftedResolvent::new(&h_half, result.e1)?;
    let phi = &result.phi00;
    let rhs = phi * result.e2 - numerator(pot, grid, phi.view()) * ratio;
    let mut phi01 = resolvent.solve(rhs.view())?;
    let pre = grid.inner_product_real(phi.view(), phi01.view())?;
    phi01.scaled_add(-pre, phi);
    Ok((phi01, pre))
}

/// Higher-mode fields of the expansion, derived from `phi00` and `phi01`.
#[derive(Debug, Clone)]
pub struct HierarchyFields {
    /// `i sqrt(hbar/2m) phi00'`.
    pub phi10: Array1<Complex64>,
    /// `(i/2) sqrt(hbar/m) phi10'`.
    pub phi20: Array1<Complex64>,
    /// `i sqrt(2/(m hbar)) [(V - E1) phi00']' + i sqrt(2 hbar/m) phi01'' - i sqrt(hbar^3/(2m^3)) phi00''''`.
    pub phi11_prime: Array1<Complex64>,
    /// Derivatives at the two wall points use one-sided stencils; this is `max |phi00|` there
    /// relative to the peak, so callers can tell whether those values matter.
    pub wall_amplitude: f64,
}

pub fn hierarchy_intermediates(
    phi00: ArrayView1<'_, f64>,
    phi01: ArrayView1<'_, f64>,
    params: &PhysicalParams,
    pot: &Potential,
    grid: &XGrid,
    e1: f64,
) -> Result<HierarchyFields> {
    let n = grid.n_points();
    for f in [phi00, phi01] {
        if f.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: f.len() });
        }
    }
    let (hbar, mass) = (params.hbar(), params.mass());
    let i = Complex64::i();
    let d1 = grid.derivative(phi00);
    let phi10 = d1.mapv(|v| i * (hbar / (2.0 * mass)).sqrt() * v);
    let phi20 = grid.derivative(phi10.view()).mapv(|v| 0.5 * i * (hbar / mass).sqrt() * v);

    let shifted = Array1::from_shape_fn(n, |k| (pot.value(grid.point(k)) - e1) * d1[k]);
    let term1 = grid.derivative(shifted.view());
    let term2 = grid.second_derivative(phi01);
    let term3 = grid.second_derivative(grid.second_derivative(phi00).view());
    let (a, b, c) = ((2.0 / (mass * hbar)).sqrt(), (2.0 * hbar / mass).sqrt(), (hbar.powi(3) / (2.0 * mass.powi(3))).sqrt());
    let phi11_prime = Array1::from_shape_fn(n, |k| i * (a * term1[k] + b * term2[k] - c * term3[k]));

    let peak = phi00.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(HierarchyFields { phi10, phi20, phi11_prime, wall_amplitude: phi00[0].abs().max(phi00[n - 1].abs()) / peak })
}

/// `||(V - E1) phi01 - (hbar^2/m) phi01'' - (E2 - (hbar/m) V'') Phi + (hbar/m) V' D Phi||_2`
/// with the Hamiltonian stencil for `phi01''`: the discrete equation `phi01` solves.
pub fn first_order_residual(result: &PerturbationResult, params: &PhysicalParams, pot: &Potential, grid: &XGrid) -> Result<f64> {
    let ratio = params.hbar() / params.mass();
    let phi = &result.phi00;
    let lap = grid.dirichlet_second_difference(result.phi01.view());
    let num = numerator(pot, grid, phi.view());
    let r = Array1::from_shape_fn(phi.len(), |k| {
        (pot.value(grid.point(k)) - result.e1) * result.phi01[k] - params.hbar() * ratio * lap[k] - result.e2 * phi[k] + ratio * num[k]
    });
    Ok(grid.inner_product_real(r.view(), r.view())?.sqrt())
}

/// `||xi_1 - i sqrt(hbar tau_c / 2m) D xi_0|| / ||xi_1||` on a coupled state.
pub fn first_mode_relation_residual(state: &CoupledWavefunction, params: &PhysicalParams) -> Result<f64> {
    let factor = Complex64::i() * (params.hbar() * params.tau_c() / (2.0 * params.mass())).sqrt();
    mode_relation_residual(state, 1, factor)
}

/// `||xi_2 - (i/2) sqrt(hbar tau_c / m) D xi_1|| / ||xi_2||` on a coupled state.
pub fn second_mode_relation_residual(state: &CoupledWavefunction, params: &PhysicalParams) -> Result<f64> {
    let factor = 0.5 * Complex64::i() * (params.hbar() * params.tau_c() / params.mass()).sqrt();
    mode_relation_residual(state, 2, factor)
}

fn mode_relation_residual(state: &CoupledWavefunction, mode: usize, factor: Complex64) -> Result<f64> {
    if state.basis().n_max() < mode {
        return Err(Error::invalid("n_max", format!("the relation for mode {mode} needs n_max >= {mode}")));
    }
    let grid = state.grid();
    let target = state.mode(mode);
    let predicted = grid.central_difference(state.mode(mode - 1)).mapv(|v| factor * v);
    let diff = &target - &predicted;
    let norm = grid.lattice_inner(target, target).re.sqrt();
    Ok(grid.lattice_inner(diff.view(), diff.view()).re.sqrt() / norm)
}
