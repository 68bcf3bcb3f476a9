use tauqm::convergence::{refinement_ladder, romberg, sector_levels, RefinementSeries};
use tauqm::exact::{normal_mode_frequencies, pais_uhlenbeck_energy, PUSpectrumQuery};
use tauqm::operator::{assemble_coupled, assemble_schrodinger};
use tauqm::perturbation::{energy_correction, solvability_energy_correction};
use tauqm::spectral::{solve_coupled, solve_schrodinger, Window};
use tauqm::{HermiteBasis, PhysicalParams, Potential, XGrid};

fn quartic() -> Potential {
    Potential::new(vec![0.0, 0.0, 0.5, 0.0, 0.1]).unwrap()
}

#[test]
fn sector_spectra_share_the_schrodinger_limit() {
    let tau = 0.05;
    let params = PhysicalParams::natural(tau).unwrap();
    let grid = XGrid::new(-10.0, 10.0, 201).unwrap();
    let op = assemble_coupled(&params, &Potential::harmonic(1.0, 1.0), &grid, &HermiteBasis::new(8)).unwrap();
    let shifted: Vec<Vec<f64>> = (0..3)
        .map(|n| {
            let res = solve_coupled(&op, Window::Sector { sector: n, levels: 3 }).unwrap();
            let offset = -(n as f64 + 0.5) / tau;
            res.sector_levels(n).iter().map(|l| l.energy - offset).collect()
        })
        .collect();
    for n in 1..3 {
        for l in 0..3 {
            // Offsets differ from -(n + 1/2)/tau by (2n + 1) omega^2 tau / 4 at first order.
            let d = shifted[n][l] - shifted[0][l];
            assert!((d - n as f64 * tau / 2.0).abs() < tau * tau, "n {n} l {l}: {d}");
        }
    }
}

#[test]
fn sector_gap_dominates_level_spacing() {
    // The ratio is nu_fast / nu_slow, which reaches 10 just below omega tau_c = 0.1.
    for tau in [0.05, 0.08] {
        let grid = XGrid::new(-8.0, 8.0, 161).unwrap();
        let op = assemble_coupled(&PhysicalParams::natural(tau).unwrap(), &Potential::harmonic(1.0, 1.0), &grid, &HermiteBasis::new(6)).unwrap();
        let s0 = solve_coupled(&op, Window::Sector { sector: 0, levels: 2 }).unwrap().sector_levels(0);
        let s1 = solve_coupled(&op, Window::Sector { sector: 1, levels: 1 }).unwrap().sector_levels(1);
        let gap = s0[0].energy - s1[0].energy;
        let spacing = s0[1].energy - s0[0].energy;
        assert!(gap / spacing > 10.0, "tau {tau}: gap {gap}, spacing {spacing}");
    }
}

#[test]
fn extrapolated_levels_follow_the_normal_mode_spectrum() {
    let tau = 0.05;
    let params = PhysicalParams::natural(tau).unwrap();
    let ladder = refinement_ladder(&XGrid::new(-10.0, 10.0, 201).unwrap(), 3);
    let (fast, slow) = normal_mode_frequencies(1.0, tau).unwrap();
    for sector in [0, 1] {
        let per_grid: Vec<Vec<f64>> = ladder
            .iter()
            .map(|g| sector_levels(&params, &Potential::harmonic(1.0, 1.0), g, &HermiteBasis::new(8), sector, 4).unwrap())
            .collect();
        for l in 0..4 {
            let series = RefinementSeries::new(ladder.iter().map(|g| g.n_points()).collect(), per_grid.iter().map(|v| v[l]).collect()).unwrap();
            let exact = -fast * (sector as f64 + 0.5) + slow * (l as f64 + 0.5);
            assert!((series.romberg() - exact).abs() < 1e-5, "({sector}, {l}): {} vs {exact}", series.romberg());
            // The Pais-Uhlenbeck closed form agrees to first order in tau only.
            let pu = pais_uhlenbeck_energy(&PUSpectrumQuery { n: sector, ell: l, omega: 1.0, params }).unwrap();
            assert!((series.romberg() - pu).abs() < tau * tau * (l as f64 + 1.0));
        }
    }
}

#[test]
fn free_particle_levels_do_not_depend_on_tau() {
    let grid = XGrid::new(0.0, 10.0, 101).unwrap();
    let levels: Vec<Vec<f64>> = [0.01, 0.05]
        .iter()
        .map(|&tau| {
            let params = PhysicalParams::natural(tau).unwrap();
            sector_levels(&params, &Potential::free(), &grid, &HermiteBasis::new(8), 0, 4).unwrap().iter().map(|e| e + 0.5 / tau).collect()
        })
        .collect();
    for l in 0..4 {
        assert!((levels[0][l] - levels[1][l]).abs() < 1e-6, "{levels:?}");
    }
}

#[test]
fn ground_density_approaches_baseline() {
    let grid = XGrid::new(-8.0, 8.0, 161).unwrap();
    let pot = Potential::harmonic(1.0, 1.0);
    let h = assemble_schrodinger(&PhysicalParams::default(), &pot, &grid, 1.0).unwrap();
    let baseline = solve_schrodinger(&h, 1).unwrap();
    let reference = baseline.states[0].mapv(|v| v * v);
    let mut distances = Vec::new();
    for tau in [0.02, 0.01] {
        let op = assemble_coupled(&PhysicalParams::natural(tau).unwrap(), &pot, &grid, &HermiteBasis::new(6)).unwrap();
        let res = solve_coupled(&op, Window::Sector { sector: 0, levels: 1 }).unwrap();
        let level = &res.sector_levels(0)[0];
        let density = res.level_density(level);
        distances.push((&density - &reference).mapv(f64::abs).sum() * grid.dx());
    }
    // What remains at tau -> 0 is the difference between the wide and narrow stencils.
    assert!(distances[0] < 0.05 && distances[1] < distances[0], "{distances:?}");
}

#[test]
fn baseline_quartic_self_convergence() {
    // Richardson values from (N, 2N - 1) and from the 4x finer pair agree to 1e-6.
    let pot = quartic();
    let ladder = refinement_ladder(&XGrid::new(-8.0, 8.0, 201).unwrap(), 4);
    let e: Vec<f64> = ladder
        .iter()
        .map(|g| solve_schrodinger(&assemble_schrodinger(&PhysicalParams::default(), &pot, g, 1.0).unwrap(), 1).unwrap().energies[0])
        .collect();
    let coarse = tauqm::convergence::richardson(e[0], e[1], 2.0, 2.0);
    let fine = tauqm::convergence::richardson(e[2], e[3], 2.0, 2.0);
    assert!((coarse - fine).abs() < 1e-6, "{coarse} {fine}");
}

#[test]
fn direct_slope_matches_solvability_correction() {
    let pot = quartic();
    let ladder = refinement_ladder(&XGrid::new(-8.0, 8.0, 161).unwrap(), 3);
    let baseline = PhysicalParams::natural(0.0).unwrap();
    let e1 = romberg(&ladder.iter().map(|g| energy_correction(&baseline, &pot, g, 0).unwrap().e1).collect::<Vec<_>>());
    let e2 = romberg(&ladder.iter().map(|g| solvability_energy_correction(&baseline, &pot, g, 0).unwrap()).collect::<Vec<_>>());
    let g: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&tau| {
            let params = PhysicalParams::natural(tau).unwrap();
            let e = romberg(&ladder.iter().map(|gr| sector_levels(&params, &pot, gr, &HermiteBasis::new(6), 0, 1).unwrap()[0]).collect::<Vec<_>>());
            e + 0.5 / tau - e1
        })
        .collect();
    let slope = 2.0 * (g[1] - g[2]) / 0.01 - (g[0] - g[1]) / 0.02;
    assert!((slope - e2).abs() < 1e-2 * e2, "{slope} vs {e2}");
    let ratio = (g[1] - 0.02 * e2) / (g[2] - 0.01 * e2);
    assert!((ratio - 4.0).abs() < 0.5, "{ratio}");
}
