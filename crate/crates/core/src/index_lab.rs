//! Summing quotients, their maximization over vector families, log-log
//! slope regression, and the closed-form bound tables.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::maps::{mixed_power_sum, poly_power_sum, MapRef};
use crate::sampling::{derive_seed, InstanceHasher};
use crate::spaces::{norm_coords, Exponent, SpaceDescriptor, Vector};
use crate::weak_norms::{weak_norm, VectorFamily, WeakNormPath, WeakNormResult};
use crate::SearchBudget;

/// `1/(2e)`, the constant in the König lower estimate.
pub const KONIG_CONSTANT: f64 = 0.5 / std::f64::consts::E;

pub const SEAM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub strategy: String,
    pub seed: u64,
    pub weak_norm_paths: Vec<WeakNormPath>,
    /// Coordinates of the functionals attaining each weak norm.
    pub certificates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSample {
    pub n: usize,
    pub quotient: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// Some weak norm came from search, so the denominator may be low and
    /// the quotient high.
    pub conservative: bool,
    pub provenance: Provenance,
}

fn assemble(
    n: usize,
    numerator: f64,
    weak: &[WeakNormResult],
    power: i32,
    strategy: &str,
    seed: u64,
) -> Result<QuotientSample> {
    let denominator = if weak.len() == 1 {
        weak[0].value.powi(power)
    } else {
        weak.iter().map(|w| w.value).product()
    };
    if !(denominator > 0.0) {
        bail!(Degenerate, "weak norm of an input family is zero");
    }
    let quotient = numerator / denominator;
    if !quotient.is_finite() {
        bail!(Degenerate, "quotient is not finite ({numerator} / {denominator})");
    }
    Ok(QuotientSample {
        n,
        quotient,
        numerator,
        denominator,
        conservative: weak.iter().any(|w| !w.exact),
        provenance: Provenance {
            strategy: strategy.to_string(),
            seed,
            weak_norm_paths: weak.iter().map(|w| w.path).collect(),
            certificates: weak.iter().map(|w| w.certificate.coords().to_vec()).collect(),
        },
    })
}

fn family_length(families: &[VectorFamily]) -> Result<usize> {
    let Some(first) = families.first() else {
        bail!(Structural, "no input families");
    };
    if families.iter().any(|f| f.len() != first.len()) {
        bail!(Structural, "input families must share a length");
    }
    Ok(first.len())
}

fn checked_weak(family: &VectorFamily, q: f64, budget: &SearchBudget) -> Result<WeakNormResult> {
    if family.is_zero() {
        bail!(Degenerate, "input family is identically zero");
    }
    weak_norm(family, q, budget)
}

/// `(Σ‖T(x_{k₁}^{(1)}, …)‖^p)^{1/p} / Π_i ‖(x_k^{(i)})‖_{w,q}`.
pub fn summing_quotient(
    t: &crate::maps::MultilinearMap,
    families: &[VectorFamily],
    p: f64,
    q: f64,
    budget: &SearchBudget,
) -> Result<QuotientSample> {
    let n = family_length(families)?;
    let weak = families
        .iter()
        .map(|f| checked_weak(f, q, budget))
        .collect::<Result<Vec<_>>>()?;
    let numerator = mixed_power_sum(t, families, p, budget.tuple_budget)?;
    assemble(n, numerator, &weak, 1, "given", budget.seed)
}

/// `(Σ_j ‖P(x_j)‖^p)^{1/p} / ‖(x_j)‖_{w,q}^m`.
pub fn polynomial_quotient(
    poly: &crate::maps::HomogeneousPolynomial,
    family: &VectorFamily,
    p: f64,
    q: f64,
    budget: &SearchBudget,
) -> Result<QuotientSample> {
    let weak = checked_weak(family, q, budget)?;
    let numerator = poly_power_sum(poly, family, p)?;
    assemble(
        family.len(),
        numerator,
        &[weak],
        poly.degree() as i32,
        "given",
        budget.seed,
    )
}

/// Quotient of either map kind; polynomials read the first family.
pub fn map_quotient(
    map: MapRef<'_>,
    families: &[VectorFamily],
    p: f64,
    q: f64,
    budget: &SearchBudget,
) -> Result<QuotientSample> {
    match map {
        MapRef::Multilinear(t) => summing_quotient(t, families, p, q, budget),
        MapRef::Polynomial(poly) => {
            let Some(f) = families.first() else {
                bail!(Structural, "no input family");
            };
            polynomial_quotient(poly, f, p, q, budget)
        }
    }
}

/// Family sources for [`maximize_quotient`], tried in the given order.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Leading canonical basis vectors in every slot.
    Basis,
    /// Fixed families, one per slot (e.g. witness anchors).
    Anchors(Vec<VectorFamily>),
    /// Random unit families refined by single-vector perturbations.
    RandomAscent,
}

impl Strategy {
    fn label(&self) -> &'static str {
        match self {
            Strategy::Basis => "basis",
            Strategy::Anchors(_) => "anchors",
            Strategy::RandomAscent => "random_ascent",
        }
    }
}

fn random_unit(space: SpaceDescriptor, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..space.dim()).map(|_| StandardNormal.sample(rng)).collect();
        let nrm = norm_coords(space.exponent(), &v);
        if nrm > 0.0 {
            return v.into_iter().map(|c| c / nrm).collect();
        }
    }
}

fn map_hash(map: MapRef<'_>, n: usize, p: f64, q: f64) -> InstanceHasher {
    let mut h = InstanceHasher::default();
    h.u64(map.slots() as u64)
        .u64(map.degree() as u64)
        .u64(n as u64)
        .f64(p)
        .f64(q);
    for s in 0..map.slots() {
        let d = map.domain(s);
        h.u64(d.dim() as u64).f64(d.exponent().value());
    }
    h
}

/// One random start: coordinate ascent on the quotient with a cooling
/// step. Weak norms are computed with a light search budget during the
/// ascent; the final family is re-scored with the full budget.
fn random_ascent(
    map: MapRef<'_>,
    n: usize,
    p: f64,
    q: f64,
    budget: &SearchBudget,
    seed: u64,
) -> Result<QuotientSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let light = SearchBudget {
        restarts: budget.restarts.min(8),
        max_iters: budget.max_iters.min(100),
        ..*budget
    };
    let slots = map.slots();
    let mut rows: Vec<Vec<Vec<f64>>> = (0..slots)
        .map(|s| (0..n).map(|_| random_unit(map.domain(s), &mut rng)).collect())
        .collect();
    let build = |rows: &[Vec<Vec<f64>>]| -> Result<Vec<VectorFamily>> {
        rows.iter()
            .enumerate()
            .map(|(s, r)| VectorFamily::from_rows(map.domain(s), r.clone()))
            .collect()
    };
    let mut current = map_quotient(map, &build(&rows)?, p, q, &light)?.quotient;
    let mut step = 0.5;
    for it in 0..budget.refine_steps {
        let slot = it % slots;
        let k = rng.random_range(0..n);
        let space = map.domain(slot);
        let old = rows[slot][k].clone();
        let mut cand: Vec<f64> = old
            .iter()
            .map(|c| {
                let g: f64 = StandardNormal.sample(&mut rng);
                c + step * g
            })
            .collect();
        let nrm = norm_coords(space.exponent(), &cand);
        if nrm == 0.0 {
            continue;
        }
        cand.iter_mut().for_each(|c| *c /= nrm);
        rows[slot][k] = cand;
        match map_quotient(map, &build(&rows)?, p, q, &light) {
            Ok(s) if s.quotient > current => current = s.quotient,
            _ => {
                rows[slot][k] = old;
                step *= 0.9;
            }
        }
    }
    let mut sample = map_quotient(map, &build(&rows)?, p, q, budget)?;
    sample.provenance.strategy = "random_ascent".into();
    sample.provenance.seed = seed;
    Ok(sample)
}

/// Best quotient over the strategies, in order; ties keep the earlier
/// strategy. Strategies that fail to evaluate are skipped, so an error is
/// only returned when nothing could be evaluated.
pub fn maximize_quotient(
    map: MapRef<'_>,
    n: usize,
    p: f64,
    q: f64,
    strategies: &[Strategy],
    budget: &SearchBudget,
) -> Result<QuotientSample> {
    if n == 0 {
        bail!(Structural, "quotients need n ≥ 1");
    }
    let mut best: Option<QuotientSample> = None;
    let mut last_err = None;
    let mut consider = |r: Result<QuotientSample>, best: &mut Option<QuotientSample>| match r {
        Ok(s) => {
            if best.as_ref().is_none_or(|b| s.quotient > b.quotient) {
                *best = Some(s);
            }
        }
        Err(e) => last_err = Some(e),
    };
    for strategy in strategies {
        match strategy {
            Strategy::Basis => {
                let fams = (0..map.slots())
                    .map(|s| VectorFamily::basis(map.domain(s), n))
                    .collect::<Result<Vec<_>>>();
                let r = fams.and_then(|f| map_quotient(map, &f, p, q, budget)).map(|mut s| {
                    s.provenance.strategy = strategy.label().into();
                    s
                });
                consider(r, &mut best);
            }
            Strategy::Anchors(fams) => {
                let r = if fams.len() != map.slots() || fams.iter().any(|f| f.len() != n) {
                    Err(crate::Error::Structural(format!(
                        "anchor families must be {} families of length {n}",
                        map.slots()
                    )))
                } else {
                    map_quotient(map, fams, p, q, budget)
                };
                consider(
                    r.map(|mut s| {
                        s.provenance.strategy = strategy.label().into();
                        s
                    }),
                    &mut best,
                );
            }
            Strategy::RandomAscent => {
                let instance = map_hash(map, n, p, q).finish();
                let results: Vec<Result<QuotientSample>> = (0..budget.family_starts)
                    .into_par_iter()
                    .map(|start| {
                        let seed = derive_seed(
                            budget.seed,
                            "maximize_quotient",
                            instance ^ (start as u64).wrapping_mul(0x9e37_79b9),
                        );
                        random_ascent(map, n, p, q, budget, seed)
                    })
                    .collect();
                for r in results {
                    consider(r, &mut best);
                }
            }
        }
    }
    match (best, last_err) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => bail!(Structural, "no strategy given"),
    }
}

/// Least-squares fit `log Q ≈ intercept + slope · log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute log residual.
    pub residual: f64,
    pub grid: Vec<usize>,
    pub conservative: bool,
}

/// Fits the empirical slope of quotient against `n` on log-log axes.
pub fn estimate_index(samples: &[QuotientSample]) -> Result<IndexEstimate> {
    let mut points: Vec<(usize, f64)> = samples.iter().map(|s| (s.n, s.quotient)).collect();
    points.sort_by_key(|p| p.0);
    let mut est = fit_power_law(&points)?;
    est.conservative = samples.iter().any(|s| s.conservative);
    Ok(est)
}

/// [`estimate_index`] on bare `(n, quotient)` pairs.
pub fn fit_power_law(points: &[(usize, f64)]) -> Result<IndexEstimate> {
    let mut grid: Vec<usize> = points.iter().map(|p| p.0).collect();
    grid.sort_unstable();
    if grid.windows(2).any(|w| w[0] == w[1]) {
        bail!(Structural, "regression grid has repeated n");
    }
    if grid.len() < 3 {
        bail!(Structural, "regression needs at least 3 distinct n, got {}", grid.len());
    }
    if points.iter().any(|p| p.0 == 0 || !(p.1 > 0.0) || !p.1.is_finite()) {
        bail!(Domain, "regression needs n ≥ 1 and positive finite quotients");
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(IndexEstimate {
        slope,
        intercept,
        residual,
        grid,
        conservative: false,
    })
}

/// Upper bound on the multilinear index with one exponent per regime.
pub fn upper_bound_mult(m: usize, p: f64, q: f64) -> f64 {
    let m = m as f64;
    if q <= 2.0 {
        m / p
    } else if p >= q {
        m * q / (2.0 * p)
    } else {
        m * (q * p - 2.0 * p + 2.0 * q) / (2.0 * q * p)
    }
}

fn mult_regime(p: f64, q: f64) -> &'static str {
    if q <= 2.0 {
        "q<=2"
    } else if p >= q {
        "q>=2, p>=q"
    } else {
        "q>=2, p<q"
    }
}

/// Upper bound on the polynomial index, valid for `p < q/m`.
pub fn upper_bound_pol(m: usize, p: f64, q: f64) -> Result<f64> {
    let mf = m as f64;
    if m == 0 || !(p > 0.0) || !(q > 0.0) || p >= q / mf {
        bail!(
            Validity,
            "polynomial upper bound needs 0 < p < q/m (m = {m}, p = {p}, q = {q})"
        );
    }
    Ok(if q <= 2.0 {
        1.0 / p
    } else {
        1.0 / p + mf * (q - 2.0) / (2.0 * q)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    A,
    B,
    C,
    D,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::A, Branch::B, Branch::C, Branch::D];
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Branch::A => 'a',
            Branch::B => 'b',
            Branch::C => 'c',
            Branch::D => 'd',
        };
        write!(f, "({c})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchValue {
    pub branch: Branch,
    pub value: f64,
}

/// Seams `(rq/(mr+q), 2r/(mr+2))` of the cotype lower bound.
pub fn cotype_seams(m: usize, q: f64, r: Exponent) -> (f64, f64) {
    let (m, rho) = (m as f64, r.recip());
    (q / (m + q * rho), 2.0 / (m + 2.0 * rho))
}

/// Seams `(q/(m+q), 2/(m+2))` of the real even lower bound.
pub fn real_even_seams(m: usize, q: f64) -> (f64, f64) {
    cotype_seams(m, q, Exponent::Finite(1.0))
}

/// Branch formula of the cotype lower bound, without range checks.
pub fn cotype_branch_formula(branch: Branch, m: usize, p: f64, q: f64, r: Exponent) -> f64 {
    let (mf, rho) = (m as f64, r.recip());
    match branch {
        Branch::A | Branch::C => mf / 2.0,
        Branch::B => (mf * p + 2.0) / (2.0 * p) - (mf / q + rho),
        Branch::D => 1.0 / p - rho,
    }
}

/// Whether `(m, p, q, r)` lies in the closed range of a cotype branch.
pub fn cotype_branch_applies(branch: Branch, m: usize, p: f64, q: f64, r: Exponent) -> bool {
    if m == 0 || !(p > 0.0) || r.value() < 2.0 || p * r.recip() >= 1.0 {
        return false;
    }
    let (s1, s2) = cotype_seams(m, q, r);
    let low_q = (1.0..=2.0).contains(&q);
    match branch {
        Branch::A => low_q && p <= s1,
        Branch::B => low_q && s1 <= p && p <= s2,
        Branch::C => q >= 2.0 && p <= s2,
        Branch::D => q >= 2.0 && p > s2,
    }
}

fn select(applies: impl Fn(Branch) -> bool, q: f64) -> Option<Branch> {
    let order: &[Branch] = if q < 2.0 {
        &[Branch::B, Branch::A]
    } else {
        &[Branch::C, Branch::D]
    };
    order.iter().copied().find(|b| applies(*b))
}

/// Lower bound on the polynomial index into a space of cotype `r`.
/// At the closed seam between (a) and (b), (b) is reported; at `q = 2` the
/// (c)/(d) pair is used.
pub fn lower_bound_pol_cotype(m: usize, p: f64, q: f64, r: Exponent) -> Result<BranchValue> {
    if r.value() < 2.0 {
        bail!(Validity, "cotype must be at least 2, got {r}");
    }
    let branch = select(|b| cotype_branch_applies(b, m, p, q, r), q);
    match branch {
        Some(branch) => Ok(BranchValue {
            branch,
            value: cotype_branch_formula(branch, m, p, q, r),
        }),
        None => bail!(
            Validity,
            "(m = {m}, p = {p}, q = {q}, r = {r}) lies outside every branch"
        ),
    }
}

/// Every cotype branch whose range contains the parameters.
pub fn cotype_branches(m: usize, p: f64, q: f64, r: Exponent) -> Vec<BranchValue> {
    Branch::ALL
        .into_iter()
        .filter(|b| cotype_branch_applies(*b, m, p, q, r))
        .map(|branch| BranchValue {
            branch,
            value: cotype_branch_formula(branch, m, p, q, r),
        })
        .collect()
}

pub fn real_even_branch_formula(branch: Branch, m: usize, p: f64, q: f64) -> f64 {
    let mf = m as f64;
    match branch {
        Branch::A | Branch::C => mf / 2.0,
        Branch::B => (mf * p + 2.0) / (2.0 * p) - (mf + q) / q,
        Branch::D => (1.0 - p) / p,
    }
}

pub fn real_even_branch_applies(branch: Branch, m: usize, p: f64, q: f64) -> bool {
    if m == 0 || m % 2 != 0 || !(p > 0.0) {
        return false;
    }
    let (s1, s2) = real_even_seams(m, q);
    let low_q = (1.0..=2.0).contains(&q);
    match branch {
        Branch::A => low_q && p <= s1,
        Branch::B => low_q && s1 <= p && p <= s2,
        Branch::C => q >= 2.0 && p <= s2,
        Branch::D => q >= 2.0 && p > s2 && p < 1.0,
    }
}

/// Lower bound on the polynomial index for scalar polynomials on real
/// spaces; `m` must be even.
pub fn lower_bound_pol_real_even(m: usize, p: f64, q: f64) -> Result<BranchValue> {
    if m == 0 || m % 2 != 0 {
        bail!(Domain, "real even bound needs an even degree, got {m}");
    }
    let branch = select(|b| real_even_branch_applies(b, m, p, q), q);
    match branch {
        Some(branch) => Ok(BranchValue {
            branch,
            value: real_even_branch_formula(branch, m, p, q),
        }),
        None => bail!(Validity, "(m = {m}, p = {p}, q = {q}) lies outside every branch"),
    }
}

pub fn real_even_branches(m: usize, p: f64, q: f64) -> Vec<BranchValue> {
    Branch::ALL
        .into_iter()
        .filter(|b| real_even_branch_applies(*b, m, p, q))
        .map(|branch| BranchValue {
            branch,
            value: real_even_branch_formula(branch, m, p, q),
        })
        .collect()
}

/// Cases where the index is known exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ExactCase {
    /// `m`-linear maps on Hilbert space into `c₀`, at `p = q = 2`.
    HilbertToC0 { m: usize },
    /// `m`-homogeneous polynomials `ℓ₁ → ℓ₂` at `(p, 1)`.
    L1ToL2 { m: usize, p: f64 },
    /// Linear maps from `C(K)` into a space of cotype `r`, at `(p, 2)`.
    CkToF { p: f64, r: Exponent },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactIndex {
    pub value: f64,
    pub range: String,
}

pub fn exact_index(case: ExactCase) -> Result<ExactIndex> {
    match case {
        ExactCase::HilbertToC0 { m } => {
            if m == 0 {
                bail!(Validity, "degree must be positive");
            }
            Ok(ExactIndex {
                value: m as f64 / 2.0,
                range: "p = q = 2".into(),
            })
        }
        ExactCase::L1ToL2 { m, p } => {
            let mf = m as f64;
            let (lo, hi) = (2.0 / (2.0 * mf + 1.0), 2.0 / (mf + 1.0));
            if m == 0 || !(lo <= p && p < hi) {
                bail!(Validity, "ℓ₁ → ℓ₂ needs {lo} ≤ p < {hi}, got p = {p}");
            }
            Ok(ExactIndex {
                value: 1.0 / p - (mf + 1.0) / 2.0,
                range: format!("{lo} <= p < {hi}, q = 1"),
            })
        }
        ExactCase::CkToF { p, r } => {
            let rho = r.recip();
            let lo = 2.0 / (1.0 + 2.0 * rho);
            if r.value() < 2.0 || !(lo < p && p * rho < 1.0) {
                bail!(
                    Validity,
                    "C(K) → F needs 2r/(r+2) < p < r with r ≥ 2, got p = {p}, r = {r}"
                );
            }
            Ok(ExactIndex {
                value: 1.0 / p - rho,
                range: format!("{lo} < p < {r}, q = 2"),
            })
        }
    }
}

/// Hölder padding from `p_known` down to `p_target`:
/// `eta_known + 1/p_target − 1/p_known`.
pub fn index_shift(p_target: f64, p_known: f64, eta_known: f64) -> Result<f64> {
    if !(p_target > 0.0) || p_target >= p_known {
        bail!(
            Domain,
            "index shift needs 0 < p_target < p_known, got {p_target} and {p_known}"
        );
    }
    Ok(eta_known + 1.0 / p_target - 1.0 / p_known)
}

/// Growth exponent `(2d + s(d−2)) / (2sd)` for `1 ≤ d ≤ s ≤ 2`.
pub fn lemar_exponent(s: f64, d: f64) -> Result<f64> {
    if !(1.0 <= d && d <= s && s <= 2.0) {
        bail!(Domain, "need 1 ≤ d ≤ s ≤ 2, got s = {s}, d = {d}");
    }
    Ok((2.0 * d + s * (d - 2.0)) / (2.0 * s * d))
}

/// Growth exponent `1/q` of the `(q, 2)`-summing norm of the identity.
pub fn konig_exponent(q: f64) -> Result<f64> {
    if !(q > 2.0) {
        bail!(Domain, "need q > 2, got {q}");
    }
    Ok(1.0 / q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    MultUpper,
    PolUpper,
    PolLowerCotype,
    PolLowerRealEven,
    Exact,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::MultUpper => "mult_upper",
            BoundKind::PolUpper => "pol_upper",
            BoundKind::PolLowerCotype => "pol_lower_cotype",
            BoundKind::PolLowerRealEven => "pol_lower_real_even",
            BoundKind::Exact => "exact",
        })
    }
}

/// One line of a bound table; `value` is `None` out of range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub kind: BoundKind,
    pub m: usize,
    pub p: f64,
    pub q: f64,
    pub r: Option<Exponent>,
    pub branch: String,
    pub value: Option<f64>,
    pub range: String,
}

/// Every bound formula at the given parameters, applicable or not.
pub fn bound_table(m: usize, p: f64, q: f64, r: Option<Exponent>) -> Vec<BoundRow> {
    let row = |kind, branch: String, value: Option<f64>, range: String, r: Option<Exponent>| BoundRow {
        kind,
        m,
        p,
        q,
        r,
        branch,
        value,
        range,
    };
    let mut rows = vec![row(
        BoundKind::MultUpper,
        mult_regime(p, q).into(),
        (m > 0 && p > 0.0 && q > 0.0).then(|| upper_bound_mult(m, p, q)),
        "p, q > 0".into(),
        None,
    )];
    rows.push(row(
        BoundKind::PolUpper,
        if q <= 2.0 { "q<=2" } else { "q>=2" }.into(),
        upper_bound_pol(m, p, q).ok(),
        "p < q/m".into(),
        None,
    ));
    if let Some(r) = r {
        let (s1, s2) = cotype_seams(m, q, r);
        for b in Branch::ALL {
            let range = match b {
                Branch::A => format!("1<=q<=2, p<={s1}"),
                Branch::B => format!("1<=q<=2, {s1}<=p<={s2}"),
                Branch::C => format!("q>=2, p<={s2}"),
                Branch::D => format!("q>=2, {s2}<p<{r}"),
            };
            let value = cotype_branch_applies(b, m, p, q, r).then(|| cotype_branch_formula(b, m, p, q, r));
            rows.push(row(BoundKind::PolLowerCotype, b.to_string(), value, range, Some(r)));
        }
    }
    if m > 0 && m % 2 == 0 {
        let (s1, s2) = real_even_seams(m, q);
        for b in Branch::ALL {
            let range = match b {
                Branch::A => format!("1<=q<=2, p<={s1}"),
                Branch::B => format!("1<=q<=2, {s1}<=p<={s2}"),
                Branch::C => format!("q>=2, p<={s2}"),
                Branch::D => format!("q>=2, {s2}<p<1"),
            };
            let value = real_even_branch_applies(b, m, p, q).then(|| real_even_branch_formula(b, m, p, q));
            rows.push(row(BoundKind::PolLowerRealEven, b.to_string(), value, range, None));
        }
    }
    let hilbert = exact_index(ExactCase::HilbertToC0 { m })
        .ok()
        .filter(|_| p == 2.0 && q == 2.0);
    rows.push(row(
        BoundKind::Exact,
        "l2->c0".into(),
        hilbert.map(|e| e.value),
        "p = q = 2".into(),
        None,
    ));
    let l1 = exact_index(ExactCase::L1ToL2 { m, p }).ok().filter(|_| q == 1.0);
    let mf = m as f64;
    rows.push(row(
        BoundKind::Exact,
        "l1->l2".into(),
        l1.map(|e| e.value),
        format!("q = 1, {} <= p < {}", 2.0 / (2.0 * mf + 1.0), 2.0 / (mf + 1.0)),
        None,
    ));
    if let Some(r) = r {
        let ck = exact_index(ExactCase::CkToF { p, r })
            .ok()
            .filter(|_| m == 1 && q == 2.0);
        rows.push(row(
            BoundKind::Exact,
            "C(K)->F".into(),
            ck.map(|e| e.value),
            format!("m = 1, q = 2, {} < p < {r}", 2.0 / (1.0 + 2.0 * r.recip())),
            Some(r),
        ));
    }
    rows
}

/// Header of [`bound_csv`].
pub const BOUND_CSV_HEADER: &str = "kind,m,p,q,r,branch,value";

/// Applicable rows as CSV lines.
pub fn bound_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from(BOUND_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let Some(v) = row.value else { continue };
        let r = row.r.map(|r| r.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.kind, row.m, row.p, row.q, r, row.branch, v
        ));
    }
    out
}

/// Unit vector in `space` proportional to `coords`.
pub fn unit_vector(space: SpaceDescriptor, coords: Vec<f64>) -> Result<Vector> {
    let v = Vector::new(space, coords)?;
    let nrm = v.norm();
    if nrm == 0.0 {
        bail!(Degenerate, "cannot normalize the zero vector");
    }
    Ok(v.scaled(1.0 / nrm))
}

/// Seam agreement test used for branch continuity checks.
pub fn seams_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= SEAM_TOL * a.abs().max(1.0)
}
