use std::path::Path;

use serde::{Deserialize, Serialize};
use summlab_core::spaces::Exponent;
use summlab_core::witnesses::WitnessSpec;
use summlab_core::SearchBudget;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Overrides for the search limits; the seed and tuple budget come from
    /// the command line.
    #[serde(default)]
    pub search: Option<SearchBudget>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Basis,
    Anchors,
    #[serde(alias = "random")]
    RandomAscent,
}

fn default_strategies() -> Vec<StrategyName> {
    vec![StrategyName::Basis, StrategyName::Anchors, StrategyName::RandomAscent]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeAssert {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default = "default_slope_tol")]
    pub slope_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    /// Every exact-path quotient stays below `‖T‖ n^{e} (1 + 1e-6)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_exponent: Option<f64>,
    /// Same as `cap_exponent` with `e` taken from the multilinear upper bound.
    #[serde(default)]
    pub upper_bound: bool,
}

fn default_slope_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCheck {
    Pietsch,
    Konig,
    Corollary22,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Slope {
        #[serde(default)]
        name: Option<String>,
        map: WitnessSpec,
        p: f64,
        q: f64,
        #[serde(default)]
        n_grid: Option<Vec<usize>>,
        #[serde(default = "default_strategies")]
        strategies: Vec<StrategyName>,
        #[serde(default, rename = "assert")]
        assertions: Option<SlopeAssert>,
    },
    Oracle {
        #[serde(default)]
        name: Option<String>,
        check: OracleCheck,
        #[serde(default)]
        d: Option<Vec<usize>>,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        q: Option<f64>,
        #[serde(default)]
        n_grid: Option<Vec<usize>>,
    },
    Bounds {
        #[serde(default)]
        name: Option<String>,
        m: usize,
        p: f64,
        q: f64,
        #[serde(default)]
        r: Option<Exponent>,
    },
}

impl Experiment {
    pub fn label(&self, index: usize) -> String {
        let (name, kind) = match self {
            Experiment::Slope { name, .. } => (name, "slope"),
            Experiment::Oracle { name, .. } => (name, "oracle"),
            Experiment::Bounds { name, .. } => (name, "bounds"),
        };
        name.clone().unwrap_or_else(|| format!("{kind}_{index}"))
    }

    /// Rejects parameter combinations that cannot run at all.
    pub fn validate(&self, tuple_budget: u64) -> Result<(), String> {
        match self {
            Experiment::Slope { map, p, q, n_grid, .. } => {
                if !(*p > 0.0 && *q >= 1.0) {
                    return Err(format!("need p > 0 and q ≥ 1, got p = {p}, q = {q}"));
                }
                let grid = n_grid.clone().unwrap_or_else(|| default_grid(map.degree()));
                if grid.is_empty() || grid.contains(&0) {
                    return Err("n_grid must be nonempty and positive".into());
                }
                for n in grid {
                    map.instantiate(n, tuple_budget)
                        .map_err(|e| format!("map at n = {n}: {e}"))?;
                }
                Ok(())
            }
            Experiment::Oracle {
                check, d, p, q, n_grid, ..
            } => match check {
                OracleCheck::Pietsch => match d {
                    Some(d) if !d.is_empty() && d.iter().all(|d| (1..=32).contains(d)) => Ok(()),
                    _ => Err("pietsch check needs \"d\": a nonempty list within 1..=32".into()),
                },
                OracleCheck::Konig => match (q, n_grid) {
                    (Some(q), Some(g)) if *q > 2.0 && !g.is_empty() && !g.contains(&0) => Ok(()),
                    _ => Err("konig check needs \"q\" > 2 and a positive \"n_grid\"".into()),
                },
                OracleCheck::Corollary22 => match (p, d) {
                    (Some(p), Some(d)) if *p > 0.0 && !d.is_empty() && d.iter().all(|d| (1..=16).contains(d)) => Ok(()),
                    _ => Err("corollary22 check needs \"p\" > 0 and \"d\" within 1..=16".into()),
                },
            },
            Experiment::Bounds { m, p, q, .. } => {
                if *m == 0 || !(*p > 0.0) || !(*q > 0.0) {
                    return Err(format!("need m ≥ 1 and p, q > 0, got m = {m}, p = {p}, q = {q}"));
                }
                Ok(())
            }
        }
    }
}

pub fn default_grid(m: usize) -> Vec<usize> {
    if m >= 3 {
        vec![2, 4, 8]
    } else {
        vec![2, 4, 8, 16]
    }
}

pub fn load(path: &Path, tuple_budget: u64) -> Result<Config, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let config: Config = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    for (i, exp) in config.experiments.iter().enumerate() {
        exp.validate(tuple_budget)
            .map_err(|e| format!("experiment {}: {e}", exp.label(i)))?;
    }
    Ok(config)
}
