//! Deliberately naive reference implementations and growth checks for the
//! classical summing-norm theorems. Everything here is serial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{bail, Result};
use crate::index_lab::{fit_power_law, maximize_quotient, summing_quotient, Strategy, KONIG_CONSTANT};
use crate::maps::{MapRef, MultilinearBody, MultilinearMap};
use crate::spaces::{dual_exponent, Exponent, SpaceDescriptor};
use crate::weak_norms::VectorFamily;
use crate::witnesses::identity_witness;
use crate::SearchBudget;

/// Tuple cap for [`brute_force_mixed_sum`].
pub const BRUTE_FORCE_TUPLES: u64 = 100_000;
/// Largest dimension for [`brute_force_weak_norm`].
pub const BRUTE_FORCE_MAX_DIM: usize = 6;
/// Sample cap for [`brute_force_weak_norm`].
pub const BRUTE_FORCE_MAX_SAMPLES: u64 = 10_000_000;

fn naive_norm(p: Exponent, v: &[f64]) -> f64 {
    match p {
        Exponent::Infinite => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        Exponent::Finite(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

fn naive_eval(t: &MultilinearMap, args: &[&[f64]]) -> Vec<f64> {
    match t.body() {
        MultilinearBody::DiagonalC0 { n } => {
            let m = args.len();
            let total = n.pow(m as u32);
            (0..total)
                .map(|mut flat| {
                    let mut idx = vec![0; m];
                    for slot in (0..m).rev() {
                        idx[slot] = flat % n;
                        flat /= n;
                    }
                    idx.iter().zip(args).map(|(&j, x)| x[j]).product()
                })
                .collect()
        }
        MultilinearBody::Dense(tensor) => {
            let shape = tensor.shape();
            let out_dim = shape[shape.len() - 1];
            let mut out = vec![0.0; out_dim];
            for (flat, &c) in tensor.data().iter().enumerate() {
                let mut rest = flat;
                let o = rest % out_dim;
                rest /= out_dim;
                let mut w = c;
                for slot in (0..args.len()).rev() {
                    let d = shape[slot];
                    w *= args[slot][rest % d];
                    rest /= d;
                }
                out[o] += w;
            }
            out
        }
    }
}

/// `(Σ_{k₁,…,k_m} ‖T(x_{k₁}^{(1)}, …, x_{k_m}^{(m)})‖^p)^{1/p}` by a single
/// serial loop over every tuple, with plain summation.
pub fn brute_force_mixed_sum(t: &MultilinearMap, families: &[VectorFamily], p: f64) -> Result<f64> {
    if families.len() != t.arity() || families.is_empty() {
        bail!(Structural, "{}-linear map given {} families", t.arity(), families.len());
    }
    let n = families[0].len();
    if families.iter().any(|f| f.len() != n) {
        bail!(Structural, "families differ in length");
    }
    let m = families.len();
    let tuples = (n as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
    if tuples > BRUTE_FORCE_TUPLES {
        bail!(Budget, "{tuples} tuples exceed the oracle cap {BRUTE_FORCE_TUPLES}");
    }
    let rows: Vec<Vec<Vec<f64>>> = families.iter().map(VectorFamily::rows).collect();
    let out_exp = t.codomain().exponent();
    let mut total = 0.0;
    let mut idx = vec![0usize; m];
    for _ in 0..tuples {
        let args: Vec<&[f64]> = idx.iter().enumerate().map(|(s, &k)| rows[s][k].as_slice()).collect();
        total += naive_norm(out_exp, &naive_eval(t, &args)).powf(p);
        for slot in (0..m).rev() {
            idx[slot] += 1;
            if idx[slot] < n {
                break;
            }
            idx[slot] = 0;
        }
    }
    Ok(total.powf(1.0 / p))
}

/// Lower estimate of `‖(x_k)‖_{w,q}` from `resolution` random points of
/// the dual unit sphere.
pub fn brute_force_weak_norm(family: &VectorFamily, q: f64, resolution: u64) -> Result<f64> {
    let space = family.space();
    let d = space.dim();
    if d > BRUTE_FORCE_MAX_DIM {
        bail!(Budget, "dimension {d} exceeds the oracle cap {BRUTE_FORCE_MAX_DIM}");
    }
    if resolution > BRUTE_FORCE_MAX_SAMPLES {
        bail!(
            Budget,
            "{resolution} samples exceed the oracle cap {BRUTE_FORCE_MAX_SAMPLES}"
        );
    }
    let dual = dual_exponent(space.exponent())?;
    let rows = family.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best: f64 = 0.0;
    let mut phi = vec![0.0; d];
    for _ in 0..resolution {
        for c in phi.iter_mut() {
            *c = StandardNormal.sample(&mut rng);
        }
        let nrm = naive_norm(dual, &phi);
        if nrm == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for x in &rows {
            let v: f64 = x.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>() / nrm;
            s += v.abs().powf(q);
        }
        best = best.max(s.powf(1.0 / q));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PietschReport {
    pub d: usize,
    pub quotient: f64,
    pub expected: f64,
    pub strategy: String,
    pub passed: bool,
}

/// The `(2,2)`-summing quotient of `id` on `ℓ₂^d` at `n = d` is `√d` and
/// nothing exceeds it.
pub fn pietsch_check(d: usize, budget: &SearchBudget) -> Result<PietschReport> {
    if !(1..=32).contains(&d) {
        bail!(Domain, "pietsch check needs 1 ≤ d ≤ 32, got {d}");
    }
    let id = identity_witness(SpaceDescriptor::lp(2.0, d)?)?;
    let best = maximize_quotient(
        MapRef::Multilinear(&id),
        d,
        2.0,
        2.0,
        &[Strategy::Basis, Strategy::RandomAscent],
        budget,
    )?;
    let expected = (d as f64).sqrt();
    let passed = best.quotient >= expected - 1e-9 && best.quotient <= expected + 1e-6;
    Ok(PietschReport {
        d,
        quotient: best.quotient,
        expected,
        strategy: best.provenance.strategy,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub n: usize,
    pub quotient: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KonigReport {
    pub q: f64,
    pub constant: f64,
    pub points: Vec<GrowthPoint>,
    /// Present when the grid has at least three sizes.
    pub slope: Option<f64>,
    pub expected_slope: f64,
    pub passed: bool,
}

/// `(q, 2)`-summing quotients of `id` on `ℓ₂^n` with basis families grow
/// like `n^{1/q}` and stay above `(2e)^{-1} n^{1/q}`.
pub fn konig_growth_check(q: f64, n_grid: &[usize], budget: &SearchBudget) -> Result<KonigReport> {
    let expected_slope = crate::index_lab::konig_exponent(q)?;
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let space = SpaceDescriptor::lp(2.0, n)?;
        let id = identity_witness(space)?;
        let s = summing_quotient(&id, &[VectorFamily::basis(space, n)?], q, 2.0, budget)?;
        points.push(GrowthPoint {
            n,
            quotient: s.quotient,
            lower: KONIG_CONSTANT * (n as f64).powf(1.0 / q),
        });
    }
    let slope = if n_grid.len() >= 3 {
        Some(fit_power_law(&points.iter().map(|g| (g.n, g.quotient)).collect::<Vec<_>>())?.slope)
    } else {
        None
    };
    let passed =
        points.iter().all(|g| g.quotient >= g.lower) && slope.is_none_or(|s| (s - expected_slope).abs() <= 0.01);
    Ok(KonigReport {
        q,
        constant: KONIG_CONSTANT,
        points,
        slope,
        expected_slope,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapSample {
    pub family: String,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapReport {
    pub p: f64,
    pub d: usize,
    pub cap: f64,
    pub samples: Vec<CapSample>,
    /// Families skipped because their weak norm was not exact.
    pub skipped: usize,
    pub passed: bool,
}

/// Every exact-path `(p, p)`-summing quotient of `id` on `ℓ₂^d` at `n = d`
/// stays below `d^{max(1/p, 1/2)}`.
pub fn corollary22_check(p: f64, d: usize, budget: &SearchBudget) -> Result<CapReport> {
    if !(p > 0.0) || d == 0 || d > 16 {
        bail!(Domain, "cap check needs p > 0 and 1 ≤ d ≤ 16, got p = {p}, d = {d}");
    }
    let space = SpaceDescriptor::lp(2.0, d)?;
    let id = identity_witness(space)?;
    let cap = (d as f64).powf((1.0 / p).max(0.5));
    let mut families = vec![("basis".to_string(), VectorFamily::basis(space, d)?)];
    let mut rng = ChaCha8Rng::seed_from_u64(crate::sampling::derive_seed(budget.seed, "corollary22", d as u64));
    for trial in 0..8 {
        let mut order: Vec<usize> = (0..d).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let rows = order
            .iter()
            .map(|&j| {
                let c: f64 = StandardNormal.sample(&mut rng);
                let mut row = vec![0.0; d];
                row[j] = if c == 0.0 { 1.0 } else { c };
                row
            })
            .collect();
        families.push((format!("scaled_basis_{trial}"), VectorFamily::from_rows(space, rows)?));
        let dense = (0..d)
            .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        families.push((format!("gaussian_{trial}"), VectorFamily::from_rows(space, dense)?));
    }
    let mut samples = Vec::new();
    let mut skipped = 0;
    for (label, fam) in families {
        let s = summing_quotient(&id, std::slice::from_ref(&fam), p, p, budget)?;
        if s.conservative {
            skipped += 1;
            continue;
        }
        samples.push(CapSample {
            family: label,
            quotient: s.quotient,
        });
    }
    let passed = samples.iter().all(|s| s.quotient <= cap * (1.0 + 1e-6));
    Ok(CapReport {
        p,
        d,
        cap,
        samples,
        skipped,
        passed,
    })
}
