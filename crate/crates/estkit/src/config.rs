//! Sweep configuration files (TOML or JSON) and inline overrides.
//!
//! Files are read into a JSON tree, overrides are written into that tree and
//! the result is deserialized once, so unknown keys and type errors are
//! reported with their full path whichever source they came from.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use estkit_core::experiments::{ExperimentKind, NoiseModel, SignalModel, SweepPlan};
use estkit_core::observations::{LinkFunction, RowKind};
use estkit_core::solvers::L1Path;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::descriptor::SetJson;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    #[default]
    Auto,
    Lp,
    Splitting,
}

impl From<SolverChoice> for L1Path {
    fn from(s: SolverChoice) -> L1Path {
        match s {
            SolverChoice::Auto => L1Path::Auto,
            SolverChoice::Lp => L1Path::Lp,
            SolverChoice::Splitting => L1Path::Splitting,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

fn eps_grid<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn zero_eps() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub m: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// A single level or a list of levels.
    #[serde(default = "zero_eps", deserialize_with = "eps_grid")]
    pub eps: Vec<f64>,
}

/// A link given by name (`sign`, `logistic`, `linear`) or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LinkSpec {
    Name(String),
    Full(LinkFunction),
}

impl LinkSpec {
    pub fn resolve(&self) -> CliResult<LinkFunction> {
        match self {
            LinkSpec::Full(l) => Ok(l.clone()),
            LinkSpec::Name(name) => match name.as_str() {
                "sign" => Ok(LinkFunction::sign()),
                "logistic" => Ok(LinkFunction::logistic()),
                "linear" => Ok(LinkFunction::linear()),
                other => Err(CliError::Config(format!("model.link: unknown link `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    #[serde(default = "gaussian_rows")]
    pub rows: RowKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkSpec>,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub signal: SignalModel,
}

fn gaussian_rows() -> RowKind {
    RowKind::Gaussian
}

impl Default for Model {
    fn default() -> Self {
        Model { rows: RowKind::Gaussian, link: None, noise: NoiseModel::default(), signal: SignalModel::default() }
    }
}

fn fifty() -> usize {
    50
}

fn default_pairs() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub grid: Grid,
    #[serde(default = "fifty")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetJson>,
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub solver: SolverChoice,
    /// Point pairs per tessellation trial.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// `[d1, d2]` for matrix experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl SweepConfig {
    pub fn to_plan(&self) -> CliResult<SweepPlan> {
        let mut plan = SweepPlan::new(self.experiment, self.n, self.grid.m.clone());
        plan.s = self.grid.s;
        plan.r = self.grid.r;
        plan.eps_grid = self.grid.eps.clone();
        plan.trials = self.trials;
        plan.seed = self.seed;
        plan.set = self.set.as_ref().map(|s| s.0.clone());
        plan.rows = self.model.rows;
        plan.link = self.model.link.as_ref().map(LinkSpec::resolve).transpose()?;
        plan.noise = self.model.noise;
        plan.signal = self.model.signal;
        plan.solver = self.solver.into();
        plan.pairs = self.pairs;
        plan.shape = self.shape;
        Ok(plan)
    }
}

/// Inline values that replace the corresponding config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub n: Option<usize>,
    pub m: Option<Vec<usize>>,
    pub s: Option<usize>,
    pub r: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// Set descriptor as JSON text.
    pub set: Option<String>,
    pub rows: Option<RowKind>,
    pub link: Option<String>,
    pub noise: Option<NoiseModel>,
    pub solver: Option<SolverChoice>,
    pub pairs: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

fn to_value<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("override values serialize")
}

fn table<'a>(root: &'a mut Map<String, Value>, key: &str) -> CliResult<&'a mut Map<String, Value>> {
    let entry = root.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    entry.as_object_mut().ok_or_else(|| CliError::Config(format!("{key}: expected a table")))
}

impl Overrides {
    fn apply(&self, root: &mut Map<String, Value>) -> CliResult<()> {
        let mut top = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                root.insert(key.to_string(), v);
            }
        };
        top("experiment", self.experiment.map(to_value));
        top("n", self.n.map(to_value));
        top("trials", self.trials.map(to_value));
        top("seed", self.seed.map(to_value));
        top("solver", self.solver.map(to_value));
        top("pairs", self.pairs.map(to_value));
        top("output", self.output.as_ref().map(to_value));
        top("format", self.format.map(to_value));
        if let Some(text) = &self.set {
            let v: Value =
                serde_json::from_str(text).map_err(|e| CliError::Config(format!("--set is not valid JSON: {e}")))?;
            root.insert("set".into(), v);
        }
        if self.m.is_some() || self.s.is_some() || self.r.is_some() || self.eps.is_some() {
            let grid = table(root, "grid")?;
            if let Some(m) = &self.m {
                grid.insert("m".into(), to_value(m));
            }
            if let Some(s) = self.s {
                grid.insert("s".into(), to_value(s));
            }
            if let Some(r) = self.r {
                grid.insert("r".into(), to_value(r));
            }
            if let Some(eps) = &self.eps {
                grid.insert("eps".into(), to_value(eps));
            }
        }
        if self.rows.is_some() || self.link.is_some() || self.noise.is_some() {
            let model = table(root, "model")?;
            if let Some(rows) = self.rows {
                model.insert("rows".into(), to_value(rows));
            }
            if let Some(link) = &self.link {
                let v = serde_json::from_str(link).unwrap_or_else(|_| Value::String(link.clone()));
                model.insert("link".into(), v);
            }
            if let Some(noise) = self.noise {
                model.insert("noise".into(), to_value(noise));
            }
        }
        Ok(())
    }
}

/// Read a config file into a JSON tree; the format follows the extension
/// (`.toml`, anything else is JSON).
pub fn read_tree(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        let v: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(v).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Deserialize a tree, naming the offending path on failure.
pub fn from_tree(tree: Value) -> CliResult<SweepConfig> {
    let config: SweepConfig = serde_path_to_error::deserialize(tree).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(e.into_inner().to_string())
        } else {
            CliError::Config(format!("{path}: {}", e.into_inner()))
        }
    })?;
    validate(&config)?;
    Ok(config)
}

fn validate(c: &SweepConfig) -> CliResult<()> {
    let bad = |msg: String| Err(CliError::Config(msg));
    if c.n == 0 {
        return bad("n: must be positive".into());
    }
    if c.grid.m.is_empty() {
        return bad("grid.m: must not be empty".into());
    }
    if let Some(i) = c.grid.m.iter().position(|&m| m == 0) {
        return bad(format!("grid.m[{i}]: must be positive"));
    }
    if let Some(i) = c.grid.eps.iter().position(|e| !(e.is_finite() && *e >= 0.0)) {
        return bad(format!("grid.eps[{i}]: must be finite and non-negative"));
    }
    if c.trials == 0 {
        return bad("trials: must be positive".into());
    }
    if let Some(set) = &c.set {
        if set.0.n != c.n {
            return bad(format!("set.n: {} does not match n = {}", set.0.n, c.n));
        }
    }
    if let Some(link) = &c.model.link {
        link.resolve()?;
    }
    Ok(())
}

/// Load `path` (if any), apply `overrides` and validate.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> CliResult<SweepConfig> {
    let mut tree = match path {
        Some(p) => read_tree(p)?,
        None => Value::Object(Map::new()),
    };
    let root = tree.as_object_mut().ok_or_else(|| CliError::Config("config root must be a table".into()))?;
    overrides.apply(root)?;
    from_tree(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<SweepConfig> {
        from_tree(serde_json::from_str(text).unwrap())
    }

    #[test]
    fn defaults_are_filled() {
        let c = parse(r#"{"experiment":"recover","n":64,"grid":{"m":[32]}}"#).unwrap();
        assert_eq!(c.trials, 50);
        assert_eq!(c.grid.eps, vec![0.0]);
        assert_eq!(c.model.rows, RowKind::Gaussian);
        assert_eq!(c.solver, SolverChoice::Auto);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse(r#"{"experiment":"recover","n":64,"grid":{"m":[32],"epsilonn":0.1}}"#).unwrap_err();
        assert!(e.to_string().contains("epsilonn"), "{e}");
        assert!(e.to_string().contains("grid"), "{e}");
    }

    #[test]
    fn bad_grid_element_has_its_path() {
        let e = parse(r#"{"experiment":"recover","n":64,"grid":{"m":[32, 40.5]}}"#).unwrap_err();
        assert!(e.to_string().contains("grid.m[1]"), "{e}");
    }

    #[test]
    fn scalar_eps_is_a_grid_of_one() {
        let c = parse(r#"{"experiment":"recover","n":64,"grid":{"m":[32],"eps":0.1}}"#).unwrap();
        assert_eq!(c.grid.eps, vec![0.1]);
    }

    #[test]
    fn overrides_win() {
        let o = Overrides { seed: Some(9), m: Some(vec![10, 20]), link: Some("logistic".into()), ..Default::default() };
        let mut tree: Value =
            serde_json::from_str(r#"{"experiment":"onebit","n":64,"seed":1,"grid":{"m":[32],"s":2}}"#).unwrap();
        o.apply(tree.as_object_mut().unwrap()).unwrap();
        let c = from_tree(tree).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.grid.m, vec![10, 20]);
        assert_eq!(c.grid.s, Some(2));
        assert_eq!(c.to_plan().unwrap().link, Some(LinkFunction::logistic()));
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = parse(r#"{"experiment":"project","n":16,"grid":{"m":[8],"s":2},"set":{"kind":"SparseCone","n":16,"params":{"s":2}},"model":{"link":"sign"}}"#).unwrap();
        assert_eq!(from_tree(serde_json::to_value(&c).unwrap()).unwrap(), c);
    }
}
