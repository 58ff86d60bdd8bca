use rayon::prelude::*;
use serde::Serialize;
use summlab_core::index_lab::{
    bound_table, estimate_index, maximize_quotient, upper_bound_mult, upper_bound_pol, BoundRow, IndexEstimate,
    QuotientSample, Strategy,
};
use summlab_core::oracles::{corollary22_check, konig_growth_check, pietsch_check};
use summlab_core::spaces::Exponent;
use summlab_core::witnesses::{Witness, WitnessSpec};
use summlab_core::SearchBudget;

use crate::config::{default_grid, Experiment, OracleCheck, SlopeAssert, StrategyName};

const CAP_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Slope {
        name: String,
        map: WitnessSpec,
        m: usize,
        p: f64,
        q: f64,
        samples: Vec<QuotientSample>,
        estimate: Option<IndexEstimate>,
        bound_refs: Vec<BoundRow>,
        assertions: Vec<Assertion>,
        passed: bool,
    },
    Oracle {
        name: String,
        check: OracleCheck,
        reports: Vec<serde_json::Value>,
        assertions: Vec<Assertion>,
        passed: bool,
    },
    Bounds {
        name: String,
        rows: Vec<BoundRow>,
        passed: bool,
    },
}

impl Record {
    pub fn name(&self) -> &str {
        match self {
            Record::Slope { name, .. } | Record::Oracle { name, .. } | Record::Bounds { name, .. } => name,
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            Record::Slope { passed, .. } | Record::Oracle { passed, .. } | Record::Bounds { passed, .. } => *passed,
        }
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        match self {
            Record::Slope { assertions, .. } | Record::Oracle { assertions, .. } => {
                assertions.iter().filter(|a| !a.passed).collect()
            }
            Record::Bounds { .. } => Vec::new(),
        }
    }
}

fn cotype_of(spec: &WitnessSpec) -> Option<Exponent> {
    match spec {
        WitnessSpec::Cotype { r, .. } => Exponent::new(*r).ok(),
        _ => None,
    }
}

/// `‖T‖` for multilinear witnesses, the certified bound for polynomials.
fn norm_bound(w: &Witness) -> Option<f64> {
    match w {
        Witness::Multilinear(t) => t.known_norm(),
        Witness::Polynomial { poly, .. } => poly.certified_norm_bound(),
    }
}

fn strategies_for(names: &[StrategyName], w: &Witness) -> Vec<Strategy> {
    names
        .iter()
        .filter_map(|s| match s {
            StrategyName::Basis => Some(Strategy::Basis),
            StrategyName::Anchors => w.anchors().map(|a| Strategy::Anchors(vec![a.clone()])),
            StrategyName::RandomAscent => Some(Strategy::RandomAscent),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_slope(
    name: String,
    map: &WitnessSpec,
    p: f64,
    q: f64,
    n_grid: Option<&Vec<usize>>,
    names: &[StrategyName],
    asserts: Option<&SlopeAssert>,
    budget: &SearchBudget,
) -> Record {
    let m = map.degree();
    let grid = n_grid.cloned().unwrap_or_else(|| default_grid(m));
    let evaluated: Vec<Result<(QuotientSample, Option<f64>), String>> = grid
        .par_iter()
        .map(|&n| {
            let w = map.instantiate(n, budget.tuple_budget).map_err(|e| e.to_string())?;
            let strategies = strategies_for(names, &w);
            let s = maximize_quotient(w.as_map(), n, p, q, &strategies, budget).map_err(|e| e.to_string())?;
            Ok((s, norm_bound(&w)))
        })
        .collect();
    let mut assertions = Vec::new();
    let mut samples = Vec::new();
    let mut norms = Vec::new();
    for (n, r) in grid.iter().zip(evaluated) {
        match r {
            Ok((s, nb)) => {
                samples.push(s);
                norms.push(nb);
            }
            Err(e) => assertions.push(Assertion::new("evaluation", false, format!("n = {n}: {e}"))),
        }
    }
    let estimate = estimate_index(&samples);
    let bound_refs: Vec<BoundRow> = bound_table(m, p, q, cotype_of(map))
        .into_iter()
        .filter(|r| r.value.is_some())
        .collect();
    if let Some(a) = asserts {
        match (&estimate, a.slope) {
            (Ok(est), Some(want)) => assertions.push(Assertion::new(
                "slope",
                (est.slope - want).abs() <= a.slope_tol,
                format!("slope {} vs {want} ± {}", est.slope, a.slope_tol),
            )),
            (Err(e), Some(_)) => assertions.push(Assertion::new("slope", false, e.to_string())),
            _ => {}
        }
        if let (Ok(est), Some(max)) = (&estimate, a.max_residual) {
            assertions.push(Assertion::new(
                "residual",
                est.residual <= max,
                format!("residual {} vs {max}", est.residual),
            ));
        }
        let mut caps = Vec::new();
        if let Some(e) = a.cap_exponent {
            caps.push(("cap", Some(e)));
        }
        if a.upper_bound {
            let e = if map.is_polynomial() {
                upper_bound_pol(m, p, q).ok()
            } else {
                Some(upper_bound_mult(m, p, q))
            };
            caps.push(("upper_bound", e));
        }
        for (label, exponent) in caps {
            let Some(e) = exponent else {
                assertions.push(Assertion::new(
                    label,
                    false,
                    "no valid bound at these parameters".into(),
                ));
                continue;
            };
            let mut violations = Vec::new();
            let mut checked = 0;
            for (s, nb) in samples.iter().zip(&norms) {
                let Some(nb) = nb else { continue };
                if s.conservative {
                    continue;
                }
                checked += 1;
                let cap = nb * (s.n as f64).powf(e) * (1.0 + CAP_SLACK);
                if s.quotient > cap {
                    violations.push(format!("n = {}: {} > {cap}", s.n, s.quotient));
                }
            }
            let detail = if violations.is_empty() {
                format!("{checked} exact-path samples within ‖T‖·n^{e}")
            } else {
                violations.join("; ")
            };
            assertions.push(Assertion::new(label, violations.is_empty() && checked > 0, detail));
        }
    }
    let passed = assertions.iter().all(|a| a.passed);
    Record::Slope {
        name,
        map: map.clone(),
        m,
        p,
        q,
        samples,
        estimate: estimate.ok(),
        bound_refs,
        assertions,
        passed,
    }
}

fn to_value<T: Serialize>(t: &T) -> serde_json::Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn run_oracle(
    name: String,
    check: OracleCheck,
    d: &[usize],
    p: f64,
    q: f64,
    n_grid: &[usize],
    budget: &SearchBudget,
) -> Record {
    let mut reports = Vec::new();
    let mut assertions = Vec::new();
    match check {
        OracleCheck::Pietsch => {
            let results: Vec<_> = d.par_iter().map(|&d| (d, pietsch_check(d, budget))).collect();
            for (d, r) in results {
                match r {
                    Ok(r) => {
                        assertions.push(Assertion::new(
                            &format!("pietsch d={d}"),
                            r.passed,
                            format!("quotient {} vs {}", r.quotient, r.expected),
                        ));
                        reports.push(to_value(&r));
                    }
                    Err(e) => assertions.push(Assertion::new(&format!("pietsch d={d}"), false, e.to_string())),
                }
            }
        }
        OracleCheck::Konig => match konig_growth_check(q, n_grid, budget) {
            Ok(r) => {
                assertions.push(Assertion::new(
                    "konig",
                    r.passed,
                    format!("slope {:?} vs {}", r.slope, r.expected_slope),
                ));
                reports.push(to_value(&r));
            }
            Err(e) => assertions.push(Assertion::new("konig", false, e.to_string())),
        },
        OracleCheck::Corollary22 => {
            let results: Vec<_> = d.par_iter().map(|&d| (d, corollary22_check(p, d, budget))).collect();
            for (d, r) in results {
                match r {
                    Ok(r) => {
                        let worst = r.samples.iter().map(|s| s.quotient).fold(0.0, f64::max);
                        assertions.push(Assertion::new(
                            &format!("cap d={d}"),
                            r.passed,
                            format!("max quotient {worst} vs cap {}", r.cap),
                        ));
                        reports.push(to_value(&r));
                    }
                    Err(e) => assertions.push(Assertion::new(&format!("cap d={d}"), false, e.to_string())),
                }
            }
        }
    }
    let passed = assertions.iter().all(|a| a.passed);
    Record::Oracle {
        name,
        check,
        reports,
        assertions,
        passed,
    }
}

pub fn run_experiment(index: usize, exp: &Experiment, budget: &SearchBudget) -> Record {
    let name = exp.label(index);
    match exp {
        Experiment::Slope {
            map,
            p,
            q,
            n_grid,
            strategies,
            assertions,
            ..
        } => run_slope(
            name,
            map,
            *p,
            *q,
            n_grid.as_ref(),
            strategies,
            assertions.as_ref(),
            budget,
        ),
        Experiment::Oracle {
            check, d, p, q, n_grid, ..
        } => run_oracle(
            name,
            *check,
            d.as_deref().unwrap_or_default(),
            p.unwrap_or(2.0),
            q.unwrap_or(0.0),
            n_grid.as_deref().unwrap_or_default(),
            budget,
        ),
        Experiment::Bounds { m, p, q, r, .. } => Record::Bounds {
            name,
            rows: bound_table(*m, *p, *q, *r),
            passed: true,
        },
    }
}
