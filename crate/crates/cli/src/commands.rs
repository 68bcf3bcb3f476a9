//! One function per subcommand. Each returns the files it wrote, relative to the output directory.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use tauqm::convergence::{refinement_ladder, sector_levels, RefinementSeries};
use tauqm::evolution::{evolve, EvolutionConfig};
use tauqm::exact::{normal_mode_energy, pais_uhlenbeck_energy, pu_table, regime, PUSpectrumQuery, Regime};
use tauqm::operator::{assemble_coupled, assemble_schrodinger, CoupledOperator};
use tauqm::perturbation::{energy_correction, solvability_energy_correction};
use tauqm::spectral::{solve_coupled, solve_schrodinger, CoupledWavefunction, Window};
use tauqm::uncertainty::uncertainty_curve;
use tauqm::{Complex64, HermiteBasis, PhysicalParams, Potential, XGrid};

use crate::config::{InitialState, RunConfig};
use crate::output::{nums, opt_num, sci, write_csv, write_json, Num};
use crate::{CliError, Command};

/// Wall amplitude above which `solve` warns that the box truncates the states.
const WALL_WARNING: f64 = 1e-3;

pub fn run_command(cfg: &RunConfig, command: Command, out: &Path) -> Result<Vec<String>, CliError> {
    let s = Setup::new(cfg)?;
    let mut w = Writer { dir: out, files: Vec::new() };
    match command {
        Command::Solve => solve(cfg, &s, &mut w)?,
        Command::Perturb => perturb(cfg, &s, &mut w)?,
        Command::Evolve => evolve_cmd(cfg, &s, &mut w)?,
        Command::PuSpectrum => pu_spectrum(cfg, &s, &mut w)?,
        Command::UncertaintyCurve => uncertainty(cfg, &mut w)?,
        Command::Converge => converge(cfg, &s, &mut w)?,
    }
    Ok(w.files)
}

struct Setup {
    params: PhysicalParams,
    pot: Potential,
    grid: XGrid,
    basis: HermiteBasis,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(Self {
            params: PhysicalParams::new(cfg.physics.hbar, cfg.physics.mass, cfg.physics.tau_c)?,
            pot: Potential::new(cfg.potential.coefficients.clone())?,
            grid: XGrid::new(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points as usize)?,
            basis: HermiteBasis::try_new(cfg.basis.n_max)?,
        })
    }

    /// `(omega, V(0))` when the potential is harmonic.
    fn harmonic(&self) -> Option<(f64, f64)> {
        let omega = self.pot.harmonic_frequency(self.params.mass())?;
        Some((omega, self.pot.value(0.0)))
    }

    /// Closed-form and normal-mode energies of level `(n, l)` when they exist.
    fn references(&self, n: usize, ell: usize) -> (Option<f64>, Option<f64>) {
        let Some((omega, v0)) = self.harmonic() else { return (None, None) };
        if self.params.tau_c() <= 0.0 {
            return (None, None);
        }
        let q = PUSpectrumQuery { n, ell, omega, params: self.params };
        (pais_uhlenbeck_energy(&q).ok().map(|e| e + v0), normal_mode_energy(&q).ok().map(|e| e + v0))
    }
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        write_csv(&self.dir.join(name), header, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        write_json(&self.dir.join(name), value)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn subdir(&self, name: &str) -> Result<(), CliError> {
        let p = self.dir.join(name);
        fs::create_dir_all(&p).map_err(|e| CliError::io(&p, e))
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

fn usizes(v: &[i64]) -> Vec<usize> {
    v.iter().map(|&x| x as usize).collect()
}

/// Largest `|xi|` on the two wall columns relative to the largest `|xi|` overall.
fn wall_amplitude(state: &CoupledWavefunction) -> f64 {
    let c = state.coefficients();
    let last = c.ncols() - 1;
    let max = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let wall = c.column(0).iter().chain(c.column(last).iter()).map(|v| v.norm()).fold(0.0, f64::max);
    if max > 0.0 {
        wall / max
    } else {
        0.0
    }
}

fn density_rows(grid: &XGrid, p: &ndarray::Array1<f64>) -> Vec<Vec<String>> {
    (0..grid.n_points()).map(|i| vec![sci(grid.point(i)), sci(p[i])]).collect()
}

fn solve(cfg: &RunConfig, s: &Setup, w: &mut Writer) -> Result<(), CliError> {
    let levels = cfg.solve.levels as usize;
    if s.params.is_baseline() {
        return solve_baseline(cfg, s, w, levels);
    }
    let op = assemble_coupled(&s.params, &s.pot, &s.grid, &s.basis)?;
    let sectors = usizes(&cfg.solve.sectors);
    let results = sectors.par_iter().map(|&n| solve_coupled(&op, Window::Sector { sector: n, levels })).collect::<Result<Vec<_>, _>>()?;

    let mut warnings: Vec<String> = op.warnings().to_vec();
    let mut spectrum = Vec::new();
    let mut level_rows = Vec::new();
    let mut level_json = Vec::new();
    let mut densities = Vec::new();
    let (mut max_residual, mut max_wall, mut mixed) = (0.0f64, 0.0f64, Vec::new());
    for (&n, res) in sectors.iter().zip(&results) {
        warnings.extend(res.warnings.iter().cloned());
        let found = res.sector_levels(n);
        if found.len() < levels {
            return Err(tauqm::Error::NotEnough { requested: levels, available: found.len() }.into());
        }
        for (l, level) in found.iter().take(levels).enumerate() {
            for &m in &level.members {
                let label = res.labels[m];
                max_residual = max_residual.max(res.residuals[m]);
                max_wall = max_wall.max(wall_amplitude(&res.states[m]));
                if label.is_mixed() {
                    mixed.push(json!({"sector": n, "level": l, "energy": Num(res.energies[m]), "weight": Num(label.weight)}));
                }
                spectrum.push(vec![
                    spectrum.len().to_string(),
                    n.to_string(),
                    l.to_string(),
                    sci(res.energies[m]),
                    sci(label.weight),
                    sci(label.mean_mode),
                    sci(res.residuals[m]),
                ]);
            }
            let (pu, nm) = s.references(n, l);
            level_rows.push(vec![n.to_string(), l.to_string(), sci(level.energy), level.members.len().to_string(), opt_cell(pu), opt_cell(nm)]);
            level_json.push(json!({
                "sector": n, "level": l, "energy": Num(level.energy), "multiplicity": level.members.len(),
                "pu_energy": opt_num(pu), "normal_mode_energy": opt_num(nm),
            }));
            if cfg.solve.densities {
                densities.push((format!("density_s{n}_l{l}.csv"), res.level_density(level)));
            }
        }
    }
    if max_wall > WALL_WARNING {
        let msg = format!("wall amplitude {max_wall:.3e} > {WALL_WARNING:.0e}: states reach the box edge; enlarge [x_min, x_max]");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    w.csv("spectrum.csv", &["index", "sector", "level", "energy", "sector_weight", "mean_mode", "residual"], &spectrum)?;
    w.csv("levels.csv", &["sector", "level", "energy", "multiplicity", "pu_energy", "normal_mode_energy"], &level_rows)?;
    for (name, p) in &densities {
        w.csv(name, &["x", "P"], &density_rows(&s.grid, p))?;
    }
    w.json(
        "solve.json",
        &json!({
            "baseline": false,
            "tau_c": Num(s.params.tau_c()),
            "dim": op.dim(),
            "levels": level_json,
            "max_residual": Num(max_residual),
            "mixed_states": mixed,
            "wall_amplitude": Num(max_wall),
            "warnings": warnings,
        }),
    )
}

fn solve_baseline(cfg: &RunConfig, s: &Setup, w: &mut Writer, levels: usize) -> Result<(), CliError> {
    let h = assemble_schrodinger(&s.params, &s.pot, &s.grid, s.params.mass())?;
    let spec = solve_schrodinger(&h, levels)?;
    let spectrum: Vec<Vec<String>> =
        spec.energies.iter().enumerate().map(|(l, &e)| vec![l.to_string(), "0".into(), l.to_string(), sci(e), sci(1.0), sci(0.0), sci(0.0)]).collect();
    let level_rows: Vec<Vec<String>> = spec.energies.iter().enumerate().map(|(l, &e)| vec!["0".into(), l.to_string(), sci(e), "1".into(), String::new(), String::new()]).collect();
    w.csv("spectrum.csv", &["index", "sector", "level", "energy", "sector_weight", "mean_mode", "residual"], &spectrum)?;
    w.csv("levels.csv", &["sector", "level", "energy", "multiplicity", "pu_energy", "normal_mode_energy"], &level_rows)?;
    if cfg.solve.densities {
        for (l, phi) in spec.states.iter().enumerate() {
            w.csv(&format!("density_s0_l{l}.csv"), &["x", "P"], &density_rows(&s.grid, &phi.mapv(|v| v * v)))?;
        }
    }
    w.json(
        "solve.json",
        &json!({
            "baseline": true,
            "tau_c": Num(0.0),
            "dim": h.dim(),
            "levels": spec.energies.iter().enumerate().map(|(l, &e)| json!({"sector": 0, "level": l, "energy": Num(e), "multiplicity": 1})).collect::<Vec<_>>(),
            "warnings": Vec::<String>::new(),
        }),
    )
}

fn perturb(cfg: &RunConfig, s: &Setup, w: &mut Writer) -> Result<(), CliError> {
    let levels = usizes(&cfg.perturb.levels);
    let results = levels
        .par_iter()
        .map(|&l| Ok((energy_correction(&s.params, &s.pot, &s.grid, l)?, solvability_energy_correction(&s.params, &s.pot, &s.grid, l)?)))
        .collect::<Result<Vec<_>, tauqm::Error>>()?;
    let tau = s.params.tau_c();
    let mut entries = Vec::new();
    for (r, e2s) in &results {
        let d = &r.diagnostics;
        entries.push(json!({
            "level": r.level,
            "e0": Num(r.e0),
            "e1": Num(r.e1),
            "e2": Num(r.e2),
            "e2_solvability": Num(*e2s),
            "energy": (tau > 0.0).then(|| Num(r.energy(tau))),
            "diagnostics": {
                "orthogonality_residual": Num(d.orthogonality_residual),
                "pre_projection_overlap": Num(d.pre_projection_overlap),
                "resolvent_overlap": Num(d.resolvent_overlap),
                "resolvent_gap": Num(d.resolvent_gap),
                "resolvent_condition": Num(d.resolvent_condition),
                "wall_amplitude": Num(d.wall_amplitude),
            },
        }));
        let rows: Vec<Vec<String>> = (0..s.grid.n_points()).map(|i| vec![sci(s.grid.point(i)), sci(r.phi00[i]), sci(r.phi01[i])]).collect();
        w.csv(&format!("perturb_fields_l{}.csv", r.level), &["x", "phi00", "phi01"], &rows)?;
    }
    w.json("perturbation.json", &json!({"tau_c": Num(tau), "levels": entries}))
}

fn initial_state(cfg: &RunConfig, op: &CoupledOperator) -> Result<CoupledWavefunction, CliError> {
    let e = &cfg.evolve;
    let (grid, basis) = (*op.grid(), *op.basis());
    Ok(match e.initial {
        InitialState::Eigenstate => {
            let (sector, level) = (e.sector as usize, e.level as usize);
            let res = solve_coupled(op, Window::Sector { sector, levels: level + 1 })?;
            let found = res.sector_levels(sector);
            let lv = found.get(level).ok_or(tauqm::Error::NotEnough { requested: level + 1, available: found.len() })?;
            res.states[lv.members[0]].clone()
        }
        InitialState::Gaussian => {
            let field = grid.points().mapv(|x| {
                let a = -(x - e.x0).powi(2) / (4.0 * e.sigma * e.sigma);
                Complex64::from_polar(a.exp(), e.k0 * x)
            });
            CoupledWavefunction::single_mode(field.view(), 0, grid, basis)?.normalized()
        }
        InitialState::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(e.seed as u64);
            let c = Array2::from_shape_fn((op.n_modes(), op.n_points()), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            CoupledWavefunction::new(c, grid, basis)?.normalized()
        }
    })
}

fn evolve_cmd(cfg: &RunConfig, s: &Setup, w: &mut Writer) -> Result<(), CliError> {
    let e = &cfg.evolve;
    let op = assemble_coupled(&s.params, &s.pot, &s.grid, &s.basis)?;
    let psi0 = initial_state(cfg, &op)?;
    let traj = evolve(&op, &psi0, &EvolutionConfig::new(e.dt, e.n_steps as usize, e.record_every as usize)?)?;
    let rows: Vec<Vec<String>> =
        traj.samples.iter().map(|x| vec![x.step.to_string(), sci(x.time), sci(x.norm), sci(x.energy), sci(x.sector0_weight)]).collect();
    w.csv("trajectory.csv", &["step", "t", "norm", "energy_expectation", "sector0_weight"], &rows)?;
    let (first, last) = (&traj.samples[0], traj.last());
    let energy_drift = traj.samples.iter().map(|x| (x.energy - first.energy).abs()).fold(0.0, f64::max);
    let mut warnings = op.warnings().to_vec();
    warnings.extend(traj.warnings.iter().cloned());
    w.json(
        "evolve.json",
        &json!({
            "initial": e.initial,
            "steps": e.n_steps,
            "dt": Num(e.dt),
            "max_norm_drift": Num(traj.max_norm_drift),
            "max_energy_drift": Num(energy_drift),
            "fidelity": Num(psi0.inner(&last.state).norm() / psi0.norm_squared()),
            "final_norm": Num(last.norm),
            "final_sector0_weight": Num(last.sector0_weight),
            "warnings": warnings,
        }),
    )
}

fn pu_spectrum(cfg: &RunConfig, s: &Setup, w: &mut Writer) -> Result<(), CliError> {
    let pu = &cfg.pu;
    let table = pu_table(&usizes(&pu.sectors), &usizes(&pu.levels), &pu.omegas, &s.params)?;
    let tau = s.params.tau_c();
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            let nm = normal_mode_energy(&PUSpectrumQuery { n: r.n, ell: r.ell, omega: r.omega, params: s.params }).ok();
            vec![r.n.to_string(), r.ell.to_string(), sci(r.omega), sci(r.tau_c), sci(r.energy), opt_cell(nm)]
        })
        .collect();
    w.csv("pu_spectrum.csv", &["n", "ell", "omega", "tau_c", "energy", "normal_mode_energy"], &rows)?;
    let warnings: Vec<String> = pu
        .omegas
        .iter()
        .filter(|&&om| regime(om, tau) == Regime::NearBoundary)
        .map(|om| {
            let msg = format!("omega * tau_c = {} is close to the ill-defined boundary 1", om * tau);
            log::warn!("{msg}");
            msg
        })
        .collect();
    w.json("pu_spectrum.json", &json!({"rows": rows.len(), "tau_c": Num(tau), "warnings": warnings}))
}

fn uncertainty(cfg: &RunConfig, w: &mut Writer) -> Result<(), CliError> {
    let u = &cfg.uncertainty;
    let curve = uncertainty_curve(u.u_min, u.u_max, u.n_points as usize)?;
    let rows: Vec<Vec<String>> = curve.u.iter().zip(&curve.f).map(|(u, f)| vec![sci(*u), sci(*f)]).collect();
    w.csv("uncertainty_curve.csv", &["u", "f"], &rows)
}

/// Sector levels (or baseline levels at `tau_c = 0`) on one grid and basis.
fn study_levels(s: &Setup, grid: &XGrid, basis: &HermiteBasis, sector: usize, levels: usize) -> Result<Vec<f64>, tauqm::Error> {
    if s.params.is_baseline() {
        let h = assemble_schrodinger(&s.params, &s.pot, grid, s.params.mass())?;
        return Ok(solve_schrodinger(&h, levels)?.energies);
    }
    sector_levels(&s.params, &s.pot, grid, basis, sector, levels)
}

fn converge(cfg: &RunConfig, s: &Setup, w: &mut Writer) -> Result<(), CliError> {
    let c = &cfg.converge;
    let (sector, levels) = (c.sector as usize, c.levels as usize);
    let ladder = refinement_ladder(&s.grid, c.refinements as usize);
    let mut n_maxes = Vec::new();
    if c.n_max_study && !s.params.is_baseline() {
        let top = s.basis.n_max();
        n_maxes = [top / 4, top / 2].into_iter().filter(|&n| n >= sector.max(1) && n < top).collect();
        n_maxes.dedup();
    }
    // Independent work items; each writes only its own file.
    enum Item {
        Dx(XGrid),
        NMax(usize),
    }
    let items: Vec<Item> = ladder.iter().map(|g| Item::Dx(*g)).chain(n_maxes.iter().map(|&n| Item::NMax(n))).collect();
    w.subdir("converge")?;
    let dir = w.dir;
    let values = items
        .par_iter()
        .map(|item| {
            let (name, e) = match item {
                Item::Dx(g) => (format!("converge/dx_{}.csv", g.n_points()), study_levels(s, g, &s.basis, sector, levels)?),
                Item::NMax(n) => (format!("converge/nmax_{n}.csv"), study_levels(s, &s.grid, &HermiteBasis::new(*n), sector, levels)?),
            };
            let rows: Vec<Vec<String>> = e.iter().enumerate().map(|(l, v)| vec![l.to_string(), sci(*v)]).collect();
            write_csv(&dir.join(&name), &["level", "energy"], &rows)?;
            Ok((name, e))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    w.files.extend(values.iter().map(|(n, _)| n.clone()));
    let (dx_values, nmax_values) = values.split_at(ladder.len());

    let n_points: Vec<usize> = ladder.iter().map(|g| g.n_points()).collect();
    let mut header: Vec<String> = vec!["level".into()];
    header.extend(n_points.iter().map(|n| format!("e_{n}")));
    header.extend(["observed_order", "difference_ratio", "richardson", "romberg", "pu_energy", "normal_mode_energy"].map(String::from));
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for l in 0..levels {
        let series = RefinementSeries::new(n_points.clone(), dx_values.iter().map(|(_, e)| e[l]).collect())?;
        let v = &series.values;
        let ratio = (v.len() >= 3).then(|| (v[v.len() - 3] - v[v.len() - 2]) / (v[v.len() - 2] - v[v.len() - 1]));
        let (pu, nm) = s.references(sector, l);
        let mut row = vec![l.to_string()];
        row.extend(v.iter().map(|&x| sci(x)));
        row.extend([opt_cell(series.observed_order()), opt_cell(ratio), opt_cell(series.richardson()), sci(series.romberg()), opt_cell(pu), opt_cell(nm)]);
        rows.push(row);
        entries.push(json!({
            "level": l,
            "values": nums(v),
            "observed_order": opt_num(series.observed_order()),
            "difference_ratio": opt_num(ratio),
            "richardson": opt_num(series.richardson()),
            "romberg": Num(series.romberg()),
            "pu_energy": opt_num(pu),
            "normal_mode_energy": opt_num(nm),
        }));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    w.csv("converge_summary.csv", &header_refs, &rows)?;

    let top = &dx_values[0].1;
    let n_max_study: Vec<_> = n_maxes
        .iter()
        .zip(nmax_values)
        .map(|(n, (_, e))| json!({"n_max": n, "values": nums(e), "max_difference": Num(e.iter().zip(top).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))}))
        .collect();
    w.json(
        "converge.json",
        &json!({
            "sector": sector,
            "n_points": n_points,
            "n_max": s.basis.n_max(),
            "baseline": s.params.is_baseline(),
            "levels": entries,
            "n_max_study": n_max_study,
        }),
    )
}
