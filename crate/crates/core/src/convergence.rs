//! Grid-refinement studies: observed orders and Richardson/Romberg extrapolation for
//! quantities with an `O(h^2)` leading error.

use crate::error::{Error, Result};
use crate::operator::assemble_coupled;
use crate::quantum::{HermiteBasis, PhysicalParams, Potential, XGrid};
use crate::spectral::{solve_coupled, Window};

/// `fine + (fine - coarse) / (ratio^order - 1)` for spacings `h` (coarse) and `h / ratio` (fine).
pub fn richardson(coarse: f64, fine: f64, ratio: f64, order: f64) -> f64 {
    fine + (fine - coarse) / (ratio.powf(order) - 1.0)
}

/// `log((q_1 - q_2) / (q_2 - q_3)) / log(ratio)` for three successively refined values.
/// `None` when the differences do not shrink monotonically in sign.
pub fn observed_order(q1: f64, q2: f64, q3: f64, ratio: f64) -> Option<f64> {
    let (a, b) = (q1 - q2, q2 - q3);
    if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
        return None;
    }
    Some((a / b).ln() / ratio.ln())
}

/// Romberg table for values at spacings `h, h/2, h/4, ...` with an even error expansion;
/// returns the most extrapolated entry.
pub fn romberg(values: &[f64]) -> f64 {
    let mut row = values.to_vec();
    let mut factor = 4.0;
    while row.len() > 1 {
        row = row.windows(2).map(|w| w[1] + (w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    row[0]
}

/// `grid`, then `count - 1` successive halvings of its spacing on the same box.
pub fn refinement_ladder(grid: &XGrid, count: usize) -> Vec<XGrid> {
    std::iter::successors(Some(*grid), |g| Some(g.refined())).take(count).collect()
}

/// Energies of the `levels` lowest levels of `sector`, each averaged over its grid-parity pair.
pub fn sector_levels(params: &PhysicalParams, pot: &Potential, grid: &XGrid, basis: &HermiteBasis, sector: usize, levels: usize) -> Result<Vec<f64>> {
    let op = assemble_coupled(params, pot, grid, basis)?;
    let res = solve_coupled(&op, Window::Sector { sector, levels })?;
    let found: Vec<f64> = res.sector_levels(sector).into_iter().map(|l| l.energy).collect();
    if found.len() < levels {
        return Err(Error::NotEnough { requested: levels, available: found.len() });
    }
    Ok(found)
}

/// A quantity evaluated on a refinement ladder (spacing halved each time).
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementSeries {
    pub n_points: Vec<usize>,
    pub values: Vec<f64>,
}

impl RefinementSeries {
    pub fn new(n_points: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if n_points.len() != values.len() {
            return Err(Error::LengthMismatch { expected: n_points.len(), actual: values.len() });
        }
        if values.is_empty() {
            return Err(Error::invalid("values", "a refinement series needs at least one value"));
        }
        Ok(Self { n_points, values })
    }

    /// Order from the last three values.
    pub fn observed_order(&self) -> Option<f64> {
        let v = &self.values;
        (v.len() >= 3).then(|| observed_order(v[v.len() - 3], v[v.len() - 2], v[v.len() - 1], 2.0)).flatten()
    }

    /// Second-order Richardson from the last two values.
    pub fn richardson(&self) -> Option<f64> {
        let v = &self.values;
        (v.len() >= 2).then(|| richardson(v[v.len() - 2], v[v.len() - 1], 2.0, 2.0))
    }

    pub fn romberg(&self) -> f64 {
        romberg(&self.values)
    }

    /// `|q_k - reference|`, one entry per rung.
    pub fn errors(&self, reference: f64) -> Vec<f64> {
        self.values.iter().map(|v| (v - reference).abs()).collect()
    }

    /// Successive error ratios `e_k / e_{k+1}` (about 4 for a second-order quantity).
    pub fn error_ratios(&self, reference: f64) -> Vec<f64> {
        self.errors(reference).windows(2).map(|w| w[0] / w[1]).collect()
    }
}
