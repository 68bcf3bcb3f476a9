//! Run configuration: TOML in, validated [`RunConfig`] out.
//!
//! Every table has defaults, so an empty document is a valid harmonic run. Unknown keys and
//! invalid values are collected in one pass and reported together with their paths.

use std::fmt;

use serde::{Deserialize, Serialize};
use tauqm::exact::{regime, Regime};

use crate::Command;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub physics: PhysicsConfig,
    pub potential: PotentialConfig,
    pub grid: GridConfig,
    pub basis: BasisConfig,
    pub solve: SolveConfig,
    pub perturb: PerturbConfig,
    pub evolve: EvolveConfig,
    pub pu: PuConfig,
    pub uncertainty: UncertaintyConfig,
    pub converge: ConvergeConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsConfig {
    pub hbar: f64,
    pub mass: f64,
    /// 0 selects the baseline Schrödinger problem.
    pub tau_c: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, tau_c: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PotentialConfig {
    /// `V(x) = sum_k c_k x^k`.
    pub coefficients: Vec<f64>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { coefficients: vec![0.0, 0.0, 0.5] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: i64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_min: -10.0, x_max: 10.0, n_points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisConfig {
    pub n_max: i64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { n_max: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub sectors: Vec<i64>,
    /// Levels per sector.
    pub levels: i64,
    /// Write one `(x, P)` file per level.
    pub densities: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { sectors: vec![0], levels: 4, densities: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbConfig {
    pub levels: Vec<i64>,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self { levels: vec![0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// Eigenstate `(sector, level)` of the coupled operator.
    Eigenstate,
    /// `exp(-(x - x0)^2 / 4 sigma^2 + i k0 x)` in mode 0.
    Gaussian,
    /// Uniform random complex coefficients from `seed`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveConfig {
    pub dt: f64,
    pub n_steps: i64,
    pub record_every: i64,
    pub initial: InitialState,
    pub sector: i64,
    pub level: i64,
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
    /// TOML integers are signed; must be >= 0.
    pub seed: i64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 0.001,
            n_steps: 200,
            record_every: 10,
            initial: InitialState::Eigenstate,
            sector: 0,
            level: 0,
            x0: 0.0,
            sigma: 1.0,
            k0: 0.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PuConfig {
    pub sectors: Vec<i64>,
    pub levels: Vec<i64>,
    pub omegas: Vec<f64>,
}

impl Default for PuConfig {
    fn default() -> Self {
        Self { sectors: vec![0], levels: vec![0, 1, 2, 3], omegas: vec![1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UncertaintyConfig {
    pub u_min: f64,
    pub u_max: f64,
    pub n_points: i64,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        Self { u_min: 1e-3, u_max: 1e3, n_points: 121 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergeConfig {
    /// Grids in the dx study: `n_points`, `2 n_points - 1`, ...
    pub refinements: i64,
    pub sector: i64,
    pub levels: i64,
    /// Also solve at `n_max / 4` and `n_max / 2`.
    pub n_max_study: bool,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self { refinements: 3, sector: 0, levels: 4, n_max_study: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "tauqm-out".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IssueKind {
    Config,
    Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
    pub kind: IssueKind,
}

impl Issue {
    fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into(), kind: IssueKind::Config }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Parses `text`, applies `key=value` overrides, and reports unknown keys.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, Vec<Issue>> {
    let mut value: toml::Table = toml::from_str(text).map_err(|e| vec![Issue::config("<document>", e.message().to_string())])?;
    let mut issues = Vec::new();
    for o in overrides {
        if let Err(issue) = apply_override(&mut value, o) {
            issues.push(issue);
        }
    }
    let mut unknown = Vec::new();
    let cfg: Result<RunConfig, _> = serde_ignored::deserialize(toml::Value::Table(value), |path| unknown.push(path.to_string()));
    issues.extend(unknown.into_iter().map(|p| Issue::config(p, "unknown key")));
    match cfg {
        Ok(cfg) if issues.is_empty() => Ok(cfg),
        Ok(_) => Err(issues),
        Err(e) => {
            issues.push(Issue::config("<document>", e.to_string()));
            Err(issues)
        }
    }
}

fn apply_override(table: &mut toml::Table, raw: &str) -> Result<(), Issue> {
    let (key, text) = raw.split_once('=').ok_or_else(|| Issue::config(raw, "override must be key=value"))?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Issue::config(key, "malformed override key"));
    }
    // Bare words such as `initial=random` are taken as strings.
    let value = toml::from_str::<toml::Table>(&format!("v = {}", text.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.trim().to_string()));
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| Issue::config(key, format!("`{part}` is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Checks every field, plus the requirements of `command`. Returns all issues at once.
pub fn validate(cfg: &RunConfig, command: Command) -> Vec<Issue> {
    let mut v = Validator::default();
    let p = &cfg.physics;
    v.positive("physics.hbar", p.hbar);
    v.positive("physics.mass", p.mass);
    v.check("physics.tau_c", p.tau_c.is_finite() && p.tau_c >= 0.0, format!("must be finite and >= 0, got {}", p.tau_c));
    if cfg.potential.coefficients.len() > tauqm::quantum::DEFAULT_MAX_DEGREE + 1 {
        v.fail("potential.coefficients", format!("degree at most {}", tauqm::quantum::DEFAULT_MAX_DEGREE));
    }
    for (i, c) in cfg.potential.coefficients.iter().enumerate() {
        v.check(&format!("potential.coefficients[{i}]"), c.is_finite(), "must be finite");
    }
    let g = &cfg.grid;
    v.check("grid.x_min", g.x_min.is_finite(), "must be finite");
    v.check("grid.x_max", g.x_max.is_finite() && g.x_max > g.x_min, format!("must be finite and > x_min = {}", g.x_min));
    v.check("grid.n_points", g.n_points >= tauqm::quantum::MIN_POINTS as i64, format!("must be >= {}, got {}", tauqm::quantum::MIN_POINTS, g.n_points));
    let n_max = cfg.basis.n_max;
    v.check("basis.n_max", n_max >= 0, format!("must be >= 0, got {n_max}"));

    let s = &cfg.solve;
    v.check("solve.sectors", !s.sectors.is_empty(), "must list at least one sector");
    for (i, &n) in s.sectors.iter().enumerate() {
        v.index(&format!("solve.sectors[{i}]"), n, n_max);
    }
    v.check("solve.levels", s.levels >= 1, format!("must be >= 1, got {}", s.levels));

    v.check("perturb.levels", !cfg.perturb.levels.is_empty(), "must list at least one level");
    for (i, &l) in cfg.perturb.levels.iter().enumerate() {
        v.check(&format!("perturb.levels[{i}]"), l >= 0 && l < g.n_points, format!("must be in [0, n_points), got {l}"));
    }

    let e = &cfg.evolve;
    v.positive("evolve.dt", e.dt);
    v.check("evolve.n_steps", e.n_steps >= 1, format!("must be >= 1, got {}", e.n_steps));
    v.check("evolve.record_every", e.record_every >= 1, format!("must be >= 1, got {}", e.record_every));
    v.index("evolve.sector", e.sector, n_max);
    v.check("evolve.level", e.level >= 0, format!("must be >= 0, got {}", e.level));
    v.check("evolve.seed", e.seed >= 0, format!("must be >= 0, got {}", e.seed));
    v.positive("evolve.sigma", e.sigma);
    v.check("evolve.x0", e.x0.is_finite(), "must be finite");
    v.check("evolve.k0", e.k0.is_finite(), "must be finite");

    let pu = &cfg.pu;
    for (i, &n) in pu.sectors.iter().enumerate() {
        v.check(&format!("pu.sectors[{i}]"), n >= 0, format!("must be >= 0, got {n}"));
    }
    for (i, &l) in pu.levels.iter().enumerate() {
        v.check(&format!("pu.levels[{i}]"), l >= 0, format!("must be >= 0, got {l}"));
    }
    for (i, &w) in pu.omegas.iter().enumerate() {
        v.positive(&format!("pu.omegas[{i}]"), w);
    }

    let u = &cfg.uncertainty;
    v.check("uncertainty.u_min", u.u_min.is_finite() && u.u_min > 0.0, format!("must be finite and > 0, got {}", u.u_min));
    v.check("uncertainty.u_max", u.u_max.is_finite() && u.u_max > u.u_min, format!("must be finite and > u_min = {}", u.u_min));
    v.check("uncertainty.n_points", u.n_points >= 2, format!("must be >= 2, got {}", u.n_points));

    let c = &cfg.converge;
    v.check("converge.refinements", (2..=6).contains(&c.refinements), format!("must be in [2, 6], got {}", c.refinements));
    v.index("converge.sector", c.sector, n_max);
    v.check("converge.levels", c.levels >= 1, format!("must be >= 1, got {}", c.levels));

    v.check("output.dir", !cfg.output.dir.is_empty(), "must not be empty");

    match command {
        Command::Evolve => {
            v.check("physics.tau_c", p.tau_c > 0.0, "must be > 0 for `evolve` (the coupled equation needs tau_c)");
        }
        Command::PuSpectrum => {
            v.check("physics.tau_c", p.tau_c > 0.0, "must be > 0 for the Pais-Uhlenbeck spectrum");
            v.check("pu.omegas", !pu.omegas.is_empty(), "must list at least one frequency");
            if p.tau_c > 0.0 {
                for (i, &w) in pu.omegas.iter().enumerate() {
                    if w > 0.0 && regime(w, p.tau_c) == Regime::IllDefined {
                        v.issues.push(Issue {
                            path: format!("pu.omegas[{i}]"),
                            message: format!("omega * tau_c = {} >= 1: the problem is ill-defined", w * p.tau_c),
                            kind: IssueKind::Regime,
                        });
                    }
                }
            }
        }
        _ => {}
    }
    v.issues
}

#[derive(Default)]
struct Validator {
    issues: Vec<Issue>,
}

impl Validator {
    fn check(&mut self, path: &str, ok: bool, message: impl Into<String>) {
        if !ok {
            self.fail(path, message);
        }
    }

    fn fail(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(Issue::config(path, message));
    }

    fn positive(&mut self, path: &str, x: f64) {
        self.check(path, x.is_finite() && x > 0.0, format!("must be finite and > 0, got {x}"));
    }

    fn index(&mut self, path: &str, n: i64, n_max: i64) {
        self.check(path, n >= 0 && n <= n_max, format!("must be in [0, n_max = {n_max}], got {n}"));
    }
}

/// The document written as `resolved_config.toml`.
pub fn resolved_text(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("the configuration serializes to TOML")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gets_defaults() {
        let cfg = parse_config("", &[]).unwrap();
        assert_eq!(cfg.basis.n_max, 8);
        assert_eq!(cfg.grid.n_points, 201);
        assert!(validate(&cfg, Command::Solve).is_empty());
        let text = resolved_text(&cfg);
        assert!(text.contains("n_max = 8"));
        assert!(text.contains("n_points = 201"));
    }

    #[test]
    fn negative_tau_is_named() {
        let cfg = parse_config("[physics]\ntau_c = -0.1\n", &[]).unwrap();
        let issues = validate(&cfg, Command::Solve);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].path, "physics.tau_c");
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let issues = parse_config("[physics]\ntaue_c = 0.1\n[grid]\npoints = 3\n[extra]\na = 1\n", &[]).unwrap_err();
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"physics.taue_c"), "{paths:?}");
        assert!(paths.contains(&"grid.points"), "{paths:?}");
        assert!(paths.iter().any(|p| p.starts_with("extra")), "{paths:?}");
    }

    #[test]
    fn all_invalid_fields_reported_together() {
        let cfg = parse_config("[physics]\nhbar = 0\nmass = -1\n[grid]\nn_points = 3\n[basis]\nn_max = 2\n[solve]\nsectors = [5]\n", &[]).unwrap();
        let issues = validate(&cfg, Command::Solve);
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, vec!["physics.hbar", "physics.mass", "grid.n_points", "solve.sectors[0]"]);
    }

    #[test]
    fn overrides_apply_and_are_checked() {
        let cfg = parse_config("", &["physics.tau_c=0.2".into(), "evolve.initial=random".into(), "solve.sectors=[0, 1]".into()]).unwrap();
        assert_eq!(cfg.physics.tau_c, 0.2);
        assert_eq!(cfg.evolve.initial, InitialState::Random);
        assert_eq!(cfg.solve.sectors, vec![0, 1]);
        let issues = parse_config("", &["physics.tau=0.2".into(), "novalue".into()]).unwrap_err();
        assert_eq!(issues.len(), 2);
    }

    #[test]
    fn regime_issue_only_for_pu_queries() {
        let cfg = parse_config("[physics]\ntau_c = 1.0\n[pu]\nomegas = [0.5, 1.0]\n", &[]).unwrap();
        assert!(validate(&cfg, Command::Solve).is_empty());
        let issues = validate(&cfg, Command::PuSpectrum);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].kind, IssueKind::Regime);
        assert_eq!(issues[0].path, "pu.omegas[1]");
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = parse_config("[physics]\ntau_c = 0.0123456789012345\n[potential]\ncoefficients = [0.1, 0, 0.5, 0, 1e-3]\n", &[]).unwrap();
        let text = resolved_text(&cfg);
        let again = parse_config(&text, &[]).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(resolved_text(&again), text);
    }

    proptest::proptest! {
        #[test]
        fn any_resolved_config_round_trips(
            tau in 0.0f64..1.0,
            hbar in 1e-3f64..10.0,
            coefficients in proptest::collection::vec(-1e3f64..1e3, 0..9),
            n_points in 8i64..5000,
            sectors in proptest::collection::vec(0i64..20, 1..4),
            dt in -1.0f64..1.0,
            seed in 0i64..i64::MAX,
        ) {
            let mut cfg = RunConfig::default();
            cfg.physics.tau_c = tau;
            cfg.physics.hbar = hbar;
            cfg.potential.coefficients = coefficients;
            cfg.grid.n_points = n_points;
            cfg.solve.sectors = sectors;
            cfg.evolve.dt = dt;
            cfg.evolve.seed = seed;
            let text = resolved_text(&cfg);
            let again = parse_config(&text, &[]).unwrap();
            proptest::prop_assert_eq!(&again, &cfg);
            proptest::prop_assert_eq!(resolved_text(&again), text);
        }
    }

    #[test]
    fn type_errors_are_reported() {
        let issues = parse_config("[grid]\nn_points = \"many\"\n", &[]).unwrap_err();
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.contains("n_points") || issues[0].message.contains("integer"), "{}", issues[0].message);
    }
}
