//! Cayley (Crank–Nicolson) propagation of `i hbar dPsi/dt = A Psi` for the coupled operator.
//!
//! Each step solves `(I + i dt A / 2hbar) Psi_{k+1} = (I - i dt A / 2hbar) Psi_k` with one banded LU
//! factorization reused for the whole trajectory and one refinement sweep per step.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lapack::ComplexBandLu;
use crate::operator::CoupledOperator;
use crate::spectral::CoupledWavefunction;

/// Largest tolerated change of the norm in a single step.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;
/// `|dt| ||A|| / hbar` above which a warning is issued.
pub const STIFF_STEP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    /// Time step; a negative value steps backward in time.
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
}

impl EvolutionConfig {
    pub fn new(dt: f64, n_steps: usize, record_every: usize) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::invalid("dt", format!("must be finite and nonzero, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be >= 1"));
        }
        if record_every == 0 {
            return Err(Error::invalid("record_every", "must be >= 1"));
        }
        Ok(Self { dt, n_steps, record_every })
    }

    pub fn reversed(&self) -> Self {
        Self { dt: -self.dt, ..*self }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub step: usize,
    pub time: f64,
    pub norm: f64,
    /// `<Psi|A|Psi> / <Psi|Psi>`.
    pub energy: f64,
    pub sector0_weight: f64,
    pub state: CoupledWavefunction,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Step 0, every `record_every`-th step and the last step.
    pub samples: Vec<Sample>,
    /// Largest `| ||Psi_{k+1}|| - ||Psi_k|| |` over all steps.
    pub max_norm_drift: f64,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("a trajectory always holds its initial sample")
    }
}

/// `xi_0` and its share of the norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorProjection {
    pub field: Array1<Complex64>,
    pub weight: f64,
}

pub fn project_sector0(psi: &CoupledWavefunction) -> SectorProjection {
    let weights = psi.mode_weights();
    let total: f64 = weights.iter().sum();
    SectorProjection { field: psi.mode(0).to_owned(), weight: if total > 0.0 { weights[0] / total } else { 0.0 } }
}

pub fn evolve(op: &CoupledOperator, psi0: &CoupledWavefunction, cfg: &EvolutionConfig) -> Result<Trajectory> {
    if psi0.basis() != op.basis() || psi0.grid() != op.grid() {
        return Err(Error::LengthMismatch { expected: op.dim(), actual: psi0.coefficients().len() });
    }
    let hbar = op.params().hbar();
    let mut warnings = Vec::new();
    let stiffness = cfg.dt.abs() * op.norm_inf() / hbar;
    if stiffness > STIFF_STEP {
        let msg = format!("dt ||A|| / hbar = {stiffness:.3e} > {STIFF_STEP}; phases of the fast modes are poorly resolved");
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let layout = op.interleaved_layout(None);
    let band = op.band(&layout);
    let n = layout.globals.len();
    let alpha = Complex64::new(0.0, cfg.dt / (2.0 * hbar));
    let lu = ComplexBandLu::factor(n, band.kd(), |r, c| {
        let a = band.get(r, c) * alpha;
        if r == c {
            a + 1.0
        } else {
            a
        }
    })?;

    let dx = op.grid().dx();
    let coeffs = psi0.coefficients();
    let mut x: Vec<Complex64> = layout.globals.iter().map(|&g| coeffs[op.split_index(g)]).collect();
    let mut ax = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); n];

    let norm_of = |v: &[Complex64]| (v.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx).sqrt();
    let to_state = |v: &[Complex64]| {
        let mut c = Array2::zeros((op.n_modes(), op.n_points()));
        for (l, &g) in layout.globals.iter().enumerate() {
            c[op.split_index(g)] = v[l];
        }
        CoupledWavefunction::new(c, *op.grid(), *op.basis()).expect("shape follows the operator")
    };
    let sample = |step: usize, v: &[Complex64], av: &[Complex64]| {
        let norm = norm_of(v);
        let energy = v.iter().zip(av).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * dx / (norm * norm);
        let state = to_state(v);
        let sector0_weight = project_sector0(&state).weight;
        Sample { step, time: step as f64 * cfg.dt, norm, energy, sector0_weight, state }
    };

    band.matvec(&x, &mut ax);
    let mut samples = vec![sample(0, &x, &ax)];
    let mut norm = norm_of(&x);
    let mut max_drift: f64 = 0.0;
    for step in 1..=cfg.n_steps {
        let rhs: Vec<Complex64> = x.iter().zip(&ax).map(|(v, a)| v - alpha * a).collect();
        x.copy_from_slice(&rhs);
        lu.solve_in_place(&mut x)?;
        band.matvec(&x, &mut ax);
        for k in 0..n {
            scratch[k] = rhs[k] - (x[k] + alpha * ax[k]);
        }
        lu.solve_in_place(&mut scratch)?;
        x.iter_mut().zip(&scratch).for_each(|(v, d)| *v += d);
        band.matvec(&x, &mut ax);

        let next = norm_of(&x);
        let drift = (next - norm).abs();
        max_drift = max_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { step, drift, limit: NORM_DRIFT_LIMIT });
        }
        norm = next;
        if step % cfg.record_every == 0 || step == cfg.n_steps {
            samples.push(sample(step, &x, &ax));
        }
    }
    Ok(Trajectory { samples, max_norm_drift: max_drift, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::assemble_coupled;
    use crate::quantum::{HermiteBasis, PhysicalParams, Potential, XGrid};
    use crate::spectral::{solve_coupled, Window};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn harmonic(tau: f64, n_max: usize, n_points: usize) -> CoupledOperator {
        let grid = XGrid::new(-8.0, 8.0, n_points).unwrap();
        assemble_coupled(&PhysicalParams::natural(tau).unwrap(), &Potential::harmonic(1.0, 1.0), &grid, &HermiteBasis::new(n_max)).unwrap()
    }

    fn random_state(op: &CoupledOperator, seed: u64) -> CoupledWavefunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Array2::from_shape_fn((op.n_modes(), op.n_points()), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        CoupledWavefunction::new(c, *op.grid(), *op.basis()).unwrap().normalized()
    }

    #[test]
    fn config_validation() {
        assert!(EvolutionConfig::new(0.0, 1, 1).is_err());
        assert!(EvolutionConfig::new(f64::NAN, 1, 1).is_err());
        assert!(EvolutionConfig::new(0.1, 0, 1).is_err());
        assert!(EvolutionConfig::new(0.1, 1, 0).is_err());
        assert_eq!(EvolutionConfig::new(0.1, 3, 1).unwrap().reversed().dt, -0.1);
    }

    #[test]
    fn projection_weights() {
        let grid = XGrid::new(0.0, 1.0, 9).unwrap();
        let f = Array1::from_elem(9, Complex64::new(0.3, 0.4));
        let single = CoupledWavefunction::single_mode(f.view(), 0, grid, HermiteBasis::new(2)).unwrap();
        let p = project_sector0(&single);
        assert_eq!(p.field, f);
        assert_eq!(p.weight, 1.0);
        let mut c = Array2::zeros((2, 9));
        c.row_mut(0).assign(&f);
        c.row_mut(1).assign(&f);
        let two = CoupledWavefunction::new(c, grid, HermiteBasis::new(1)).unwrap();
        assert!((project_sector0(&two).weight - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_state_keeps_its_norm() {
        let op = harmonic(0.05, 4, 101);
        let psi = random_state(&op, 7);
        let traj = evolve(&op, &psi, &EvolutionConfig::new(0.001, 50, 10).unwrap()).unwrap();
        assert!(traj.max_norm_drift < 1e-10, "{}", traj.max_norm_drift);
        assert_eq!(traj.samples.iter().map(|s| s.step).collect::<Vec<_>>(), vec![0, 10, 20, 30, 40, 50]);
        let e0 = traj.samples[0].energy;
        for s in &traj.samples {
            assert!((s.norm - 1.0).abs() < 1e-10);
            assert!((s.energy - e0).abs() < 1e-8 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn stiff_steps_warn_but_stay_unitary() {
        let op = harmonic(0.05, 4, 101);
        let psi = random_state(&op, 3);
        let traj = evolve(&op, &psi, &EvolutionConfig::new(5.0, 5, 1).unwrap()).unwrap();
        assert_eq!(traj.warnings.len(), 1);
        assert!(traj.max_norm_drift < 1e-10);
    }

    #[test]
    fn forward_then_backward_returns() {
        let op = harmonic(0.05, 3, 81);
        let psi = random_state(&op, 11);
        let cfg = EvolutionConfig::new(0.002, 40, 40).unwrap();
        let fwd = evolve(&op, &psi, &cfg).unwrap();
        let back = evolve(&op, &fwd.last().state, &cfg.reversed()).unwrap();
        let diff = &back.last().state.coefficients() - &psi.coefficients();
        let err = (diff.mapv(|c| c.norm_sqr()).sum() * op.grid().dx()).sqrt();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn eigenstate_only_changes_phase() {
        let op = harmonic(0.05, 6, 161);
        let res = solve_coupled(&op, Window::Sector { sector: 0, levels: 1 }).unwrap();
        let (psi, e) = (&res.states[0], res.energies[0]);
        let dt = 0.001;
        let steps = 100;
        let traj = evolve(&op, psi, &EvolutionConfig::new(dt, steps, steps).unwrap()).unwrap();
        let overlap = psi.inner(&traj.last().state);
        assert!(overlap.norm() > 1.0 - 1e-8, "{}", overlap.norm());
        // Cayley advances the phase by -2 atan(E dt / 2 hbar) per step.
        let cayley = -2.0 * steps as f64 * (e * dt / 2.0).atan();
        assert!((overlap.arg() - cayley).abs() < 1e-9);
        let t = dt * steps as f64;
        assert!((overlap.arg() + e * t).abs() < (e * dt).powi(2) * e.abs() * t);
    }

    #[test]
    fn small_tau_ground_state_stays_in_sector_zero() {
        let op = harmonic(0.01, 4, 161);
        let res = solve_coupled(&op, Window::Sector { sector: 0, levels: 1 }).unwrap();
        let traj = evolve(&op, &res.states[0], &EvolutionConfig::new(0.001, 50, 5).unwrap()).unwrap();
        for s in &traj.samples {
            assert!(s.sector0_weight > 0.99, "{}", s.sector0_weight);
        }
    }
}
