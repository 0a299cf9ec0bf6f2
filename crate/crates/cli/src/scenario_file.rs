//! Scenario files: TOML with the sections `[grid]`, `[initial]`, `[velocity]`
//! and `[solver]` (plus an optional `[solver.tolerances]`).
//!
//! ```toml
//! [grid]
//! dim = 1
//! extent = [2.0]
//! cells = [256]
//!
//! [initial]
//! kind = "bump"
//! center = [0.6]
//! radius = 0.5
//!
//! [velocity]
//! kind = "potential-well"
//! center = [1.0]
//! strength = 1.0
//!
//! [solver]
//! tau = 0.001
//! horizon = 1.0
//! ```
//!
//! Unknown keys and duplicate keys are errors.

use std::fmt;

use congested_crowd_core::preset::Bump;
use congested_crowd_core::{DensityPreset, Grid, Order, Scenario, Tolerances, VelocityPreset};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    /// Malformed TOML, unknown or duplicate keys, wrong types.
    Syntax(String),
    /// Well-formed but unusable; the message starts with the offending key.
    Semantic { key: String, message: String },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Syntax(m) => write!(f, "{m}"),
            ScenarioError::Semantic { key, message } => write!(f, "{key}: {message}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

fn semantic(key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Semantic {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    grid: GridSection,
    initial: InitialSection,
    velocity: VelocitySection,
    solver: SolverSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    dim: u8,
    extent: Vec<f64>,
    cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BumpSpec {
    center: Vec<f64>,
    radius: f64,
    #[serde(default = "one")]
    weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum InitialSection {
    Uniform {},
    /// Also accepted as `kind = "indicator"`.
    #[serde(alias = "indicator")]
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Bump(BumpSpec),
    TwoBumps { first: BumpSpec, second: BumpSpec },
    Table { values: Vec<f64> },
    Noise {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum VelocitySection {
    Zero {},
    Constant { value: Vec<f64> },
    PotentialWell { center: Vec<f64>, strength: f64 },
    Rotation { center: Vec<f64>, omega: f64 },
    PiecewiseX { breaks: Vec<f64>, values: Vec<f64> },
    /// One `[ux, uy]` pair per cell, row-major.
    Table { cells: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    tau: f64,
    horizon: f64,
    #[serde(default)]
    nu: i64,
    #[serde(default = "one_usize")]
    frame_every: usize,
    #[serde(default = "yes")]
    pressure: bool,
    #[serde(default)]
    step_distance: bool,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    tolerances: ToleranceSection,
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToleranceSection {
    mass: Option<f64>,
    constraint: Option<f64>,
    saturation: Option<f64>,
    cone_stop: Option<f64>,
    cone_max_iter: Option<usize>,
    ortho: Option<f64>,
    duality: Option<f64>,
    marginal: Option<f64>,
    sinkhorn_max_iter: Option<usize>,
    lp_pair_cap: Option<usize>,
    cfl: Option<f64>,
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    parse_with_overrides(text, &[])
}

/// Parses a scenario after setting `section.key = value` pairs on the
/// document. Values are TOML literals; anything that does not parse as one is
/// taken as a string.
pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Scenario, ScenarioError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ScenarioError::Syntax(e.to_string()))?;
    for (key, raw) in overrides {
        apply_override(&mut table, key, raw)?;
    }
    let doc: ScenarioDoc = table
        .try_into()
        .map_err(|e: toml::de::Error| ScenarioError::Syntax(e.to_string()))?;
    doc.into_scenario()
}

fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<(), ScenarioError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ScenarioError::Syntax(format!("malformed override key `{key}`")));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut at = table;
    for p in &parts[..parts.len() - 1] {
        let entry = at
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        at = entry
            .as_table_mut()
            .ok_or_else(|| ScenarioError::Syntax(format!("override `{key}`: `{p}` is not a section")))?;
    }
    at.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Largest seed a scenario file can hold; TOML integers are signed.
pub const MAX_SEED: u64 = i64::MAX as u64;

/// Serializes a scenario with every default spelled out.
pub fn serialize_scenario(s: &Scenario) -> Result<String, ScenarioError> {
    if s.seed > MAX_SEED {
        return Err(semantic("solver.seed", format!("must be at most {MAX_SEED}")));
    }
    toml::to_string(&ScenarioDoc::from_scenario(s)).map_err(|e| ScenarioError::Syntax(e.to_string()))
}

fn point(key: &str, v: &[f64], dim: usize) -> Result<[f64; 2], ScenarioError> {
    if v.len() != dim {
        return Err(semantic(key, format!("expected {dim} coordinates, got {}", v.len())));
    }
    Ok([v[0], if dim == 2 { v[1] } else { 0.0 }])
}

fn unpoint(p: [f64; 2], dim: usize) -> Vec<f64> {
    p[..dim].to_vec()
}

impl BumpSpec {
    fn to_bump(&self, key: &str, dim: usize) -> Result<Bump, ScenarioError> {
        if !(self.radius > 0.0) {
            return Err(semantic(&format!("{key}.radius"), "must be positive"));
        }
        if !(self.weight > 0.0) {
            return Err(semantic(&format!("{key}.weight"), "must be positive"));
        }
        Ok(Bump {
            center: point(&format!("{key}.center"), &self.center, dim)?,
            radius: self.radius,
            weight: self.weight,
        })
    }

    fn from_bump(b: &Bump, dim: usize) -> Self {
        Self {
            center: unpoint(b.center, dim),
            radius: b.radius,
            weight: b.weight,
        }
    }
}

impl ScenarioDoc {
    fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        let g = &self.grid;
        let dim = g.dim as usize;
        if dim != 1 && dim != 2 {
            return Err(semantic("grid.dim", "must be 1 or 2"));
        }
        if g.extent.len() != dim {
            return Err(semantic("grid.extent", format!("expected {dim} entries, got {}", g.extent.len())));
        }
        if g.cells.len() != dim {
            return Err(semantic("grid.cells", format!("expected {dim} entries, got {}", g.cells.len())));
        }
        let extent = [g.extent[0], if dim == 2 { g.extent[1] } else { 1.0 }];
        let cells = [g.cells[0], if dim == 2 { g.cells[1] } else { 1 }];
        let grid = Grid::new(dim, extent, cells).map_err(|e| semantic("grid.extent", e.to_string()))?;

        let initial = match &self.initial {
            InitialSection::Uniform {} => DensityPreset::Uniform,
            InitialSection::Box { lo, hi } => {
                let lo = point("initial.lo", lo, dim)?;
                let hi = point("initial.hi", hi, dim)?;
                if (0..dim).any(|a| hi[a] <= lo[a]) {
                    return Err(semantic("initial.hi", "must exceed initial.lo on every axis"));
                }
                DensityPreset::Box { lo, hi }
            }
            InitialSection::Bump(b) => DensityPreset::Bump(b.to_bump("initial", dim)?),
            InitialSection::TwoBumps { first, second } => {
                DensityPreset::TwoBumps(first.to_bump("initial.first", dim)?, second.to_bump("initial.second", dim)?)
            }
            InitialSection::Table { values } => {
                if values.len() != grid.len() {
                    return Err(semantic(
                        "initial.values",
                        format!("expected {} entries, got {}", grid.len(), values.len()),
                    ));
                }
                DensityPreset::Table(values.clone())
            }
            InitialSection::Noise {} => DensityPreset::Noise,
        };

        let velocity = match &self.velocity {
            VelocitySection::Zero {} => VelocityPreset::Zero,
            VelocitySection::Constant { value } => VelocityPreset::Constant(point("velocity.value", value, dim)?),
            VelocitySection::PotentialWell { center, strength } => VelocityPreset::PotentialWell {
                center: point("velocity.center", center, dim)?,
                strength: *strength,
            },
            VelocitySection::Rotation { center, omega } => {
                if dim != 2 {
                    return Err(semantic("velocity.kind", "rotation needs a 2D grid"));
                }
                VelocityPreset::Rotation {
                    center: point("velocity.center", center, dim)?,
                    omega: *omega,
                }
            }
            VelocitySection::PiecewiseX { breaks, values } => VelocityPreset::PiecewiseX {
                breaks: breaks.clone(),
                values: values.clone(),
            },
            VelocitySection::Table { cells } => {
                if cells.len() != grid.len() {
                    return Err(semantic(
                        "velocity.cells",
                        format!("expected {} entries, got {}", grid.len(), cells.len()),
                    ));
                }
                let mut out = Vec::with_capacity(cells.len());
                for c in cells {
                    out.push(point("velocity.cells", c, dim)?);
                }
                VelocityPreset::Table(out)
            }
        };
        velocity.validate().map_err(|e| semantic("velocity", e.to_string()))?;

        let s = &self.solver;
        if !(s.tau > 0.0 && s.tau.is_finite()) {
            return Err(semantic("solver.tau", "must be positive"));
        }
        if !(s.horizon.is_finite() && s.horizon >= s.tau) {
            return Err(semantic("solver.horizon", "must be at least solver.tau"));
        }
        let order = match s.nu {
            0 => Order::First,
            1 => Order::Second,
            _ => return Err(semantic("solver.nu", "must be 0 or 1")),
        };
        if s.frame_every == 0 {
            return Err(semantic("solver.frame_every", "must be at least 1"));
        }
        let tolerances = s.tolerances.resolve()?;

        let mut scenario = Scenario::new(grid, initial, velocity, order, s.horizon, s.tau);
        scenario.frame_every = s.frame_every;
        scenario.pressure = s.pressure;
        scenario.step_distance = s.step_distance;
        scenario.seed = s.seed;
        scenario.tolerances = tolerances;
        Ok(scenario)
    }

    fn from_scenario(s: &Scenario) -> Self {
        let g = s.grid;
        let dim = g.dim();
        let grid = GridSection {
            dim: dim as u8,
            extent: (0..dim).map(|a| g.extent(a)).collect(),
            cells: (0..dim).map(|a| g.cells(a)).collect(),
        };
        let initial = match &s.initial {
            DensityPreset::Uniform => InitialSection::Uniform {},
            DensityPreset::Box { lo, hi } => InitialSection::Box {
                lo: unpoint(*lo, dim),
                hi: unpoint(*hi, dim),
            },
            DensityPreset::Bump(b) => InitialSection::Bump(BumpSpec::from_bump(b, dim)),
            DensityPreset::TwoBumps(a, b) => InitialSection::TwoBumps {
                first: BumpSpec::from_bump(a, dim),
                second: BumpSpec::from_bump(b, dim),
            },
            DensityPreset::Table(v) => InitialSection::Table { values: v.clone() },
            DensityPreset::Noise => InitialSection::Noise {},
        };
        let velocity = match &s.velocity {
            VelocityPreset::Zero => VelocitySection::Zero {},
            VelocityPreset::Constant(c) => VelocitySection::Constant { value: unpoint(*c, dim) },
            VelocityPreset::PotentialWell { center, strength } => VelocitySection::PotentialWell {
                center: unpoint(*center, dim),
                strength: *strength,
            },
            VelocityPreset::Rotation { center, omega } => VelocitySection::Rotation {
                center: unpoint(*center, dim),
                omega: *omega,
            },
            VelocityPreset::PiecewiseX { breaks, values } => VelocitySection::PiecewiseX {
                breaks: breaks.clone(),
                values: values.clone(),
            },
            VelocityPreset::Table(cells) => VelocitySection::Table {
                cells: cells.iter().map(|c| unpoint(*c, dim)).collect(),
            },
        };
        let t = &s.tolerances;
        let solver = SolverSection {
            tau: s.tau,
            horizon: s.horizon,
            nu: s.order.nu() as i64,
            frame_every: s.frame_every,
            pressure: s.pressure,
            step_distance: s.step_distance,
            seed: s.seed,
            tolerances: ToleranceSection {
                mass: Some(t.mass),
                constraint: Some(t.constraint),
                saturation: Some(t.saturation),
                cone_stop: Some(t.cone_stop),
                cone_max_iter: Some(t.cone_max_iter),
                ortho: Some(t.ortho),
                duality: Some(t.duality),
                marginal: Some(t.marginal),
                sinkhorn_max_iter: Some(t.sinkhorn_max_iter),
                lp_pair_cap: Some(t.lp_pair_cap),
                cfl: Some(t.cfl),
            },
        };
        Self {
            grid,
            initial,
            velocity,
            solver,
        }
    }
}

impl ToleranceSection {
    fn resolve(&self) -> Result<Tolerances, ScenarioError> {
        let d = Tolerances::default();
        let positive = |key: &str, v: Option<f64>, default: f64| -> Result<f64, ScenarioError> {
            match v {
                None => Ok(default),
                Some(x) if x > 0.0 && x.is_finite() => Ok(x),
                Some(_) => Err(semantic(&format!("solver.tolerances.{key}"), "must be positive")),
            }
        };
        let count = |key: &str, v: Option<usize>, default: usize| -> Result<usize, ScenarioError> {
            match v {
                None => Ok(default),
                Some(0) => Err(semantic(&format!("solver.tolerances.{key}"), "must be at least 1")),
                Some(x) => Ok(x),
            }
        };
        let cfl = positive("cfl", self.cfl, d.cfl)?;
        if cfl > 1.0 {
            return Err(semantic("solver.tolerances.cfl", "must not exceed 1"));
        }
        Ok(Tolerances {
            mass: positive("mass", self.mass, d.mass)?,
            constraint: positive("constraint", self.constraint, d.constraint)?,
            saturation: positive("saturation", self.saturation, d.saturation)?,
            cone_stop: positive("cone_stop", self.cone_stop, d.cone_stop)?,
            cone_max_iter: count("cone_max_iter", self.cone_max_iter, d.cone_max_iter)?,
            ortho: positive("ortho", self.ortho, d.ortho)?,
            duality: positive("duality", self.duality, d.duality)?,
            marginal: positive("marginal", self.marginal, d.marginal)?,
            sinkhorn_max_iter: count("sinkhorn_max_iter", self.sinkhorn_max_iter, d.sinkhorn_max_iter)?,
            lp_pair_cap: count("lp_pair_cap", self.lp_pair_cap, d.lp_pair_cap)?,
            cfl,
        })
    }
}
