use serde::{Deserialize, Serialize};

/// Default cap on the number of index tuples a mixed power sum may visit.
pub const DEFAULT_TUPLE_BUDGET: u64 = 100_000_000;

/// Limits and seeding for every stochastic or enumerative search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    /// Multistart restarts for sup-over-the-ball searches.
    pub restarts: usize,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Stop a restart once the relative improvement falls below this.
    pub rel_tol: f64,
    /// Global seed; per-instance seeds are derived from it.
    pub seed: u64,
    /// Skip closed-form weak-norm paths (testing aid).
    pub force_search: bool,
    /// Random starting families in quotient maximization.
    pub family_starts: usize,
    /// Perturbation steps per random starting family.
    pub refine_steps: usize,
    pub tuple_budget: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 500,
            rel_tol: 1e-10,
            seed: 42,
            force_search: false,
            family_starts: 4,
            refine_steps: 60,
            tuple_budget: DEFAULT_TUPLE_BUDGET,
        }
    }
}

impl SearchBudget {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn forced_search(self) -> Self {
        Self {
            force_search: true,
            ..self
        }
    }
}
