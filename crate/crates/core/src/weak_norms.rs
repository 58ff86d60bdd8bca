//! Weak `ℓ_q` norms of vector families,
//! `‖(x_k)‖_{w,q} = sup_{‖φ‖ ≤ 1} (Σ_k |φ(x_k)|^q)^{1/q}`.
//!
//! Closed-form paths are used whenever the supremum is known exactly; the
//! general case falls back to a multistart ascent whose result is a
//! certified lower bound (`exact == false`).

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::SearchBudget;
use crate::error::{bail, Result};
use crate::sampling::{derive_seed, power_mean_norm, quasi_random_direction, InstanceHasher};
use crate::spaces::{dot, norm_coords, norming_coords, Exponent, Functional, SpaceDescriptor, Vector};

/// Largest ℓ₁ dimension for exhaustive sign-vertex enumeration.
pub const MAX_VERTEX_DIM: usize = 20;

/// An ordered, nonempty list of vectors in a single space.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    space: SpaceDescriptor,
    vectors: Vec<Vector>,
}

impl VectorFamily {
    pub fn new(vectors: Vec<Vector>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            bail!(Structural, "a vector family must be nonempty");
        };
        let space = first.space();
        if let Some(v) = vectors.iter().find(|v| v.space() != space) {
            bail!(Structural, "family mixes {space} with {}", v.space());
        }
        Ok(Self { space, vectors })
    }

    pub fn from_rows(space: SpaceDescriptor, rows: Vec<Vec<f64>>) -> Result<Self> {
        let vectors = rows
            .into_iter()
            .map(|r| Vector::new(space, r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    /// `e_1, …, e_n`, cycling through the basis when `n` exceeds the dimension.
    pub fn basis(space: SpaceDescriptor, n: usize) -> Result<Self> {
        Self::new((0..n).map(|k| space.basis_vector(k)).collect())
    }

    /// `n` copies of one vector.
    pub fn repeated(v: &Vector, n: usize) -> Result<Self> {
        Self::new(vec![v.clone(); n])
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(|v| v.coords().to_vec()).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            space: self.space,
            vectors: self.vectors.iter().map(|v| v.scaled(factor)).collect(),
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            bail!(
                Structural,
                "permutation of length {} for a family of {}",
                order.len(),
                self.len()
            );
        }
        Self::new(order.iter().map(|&i| self.vectors[i].clone()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.vectors.iter().all(Vector::is_zero)
    }

    pub fn max_norm(&self) -> f64 {
        self.vectors.iter().map(Vector::norm).fold(0.0, f64::max)
    }
}

/// Which route produced a weak norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakNormPath {
    ZeroFamily,
    SingleVector,
    Spectral,
    ScaledBasis,
    CrossPolytope,
    CubeVertices,
    Search,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakNormResult {
    pub value: f64,
    pub certificate: Functional,
    pub exact: bool,
    pub path: WeakNormPath,
}

/// `(Σ_k |φ(x_k)|^q)^{1/q}` for the functional with coordinates `phi`.
pub fn weak_objective(family: &VectorFamily, phi: &[f64], q: f64) -> f64 {
    objective(&family.rows(), phi, q)
}

fn objective(rows: &[Vec<f64>], phi: &[f64], q: f64) -> f64 {
    power_mean_norm(rows.iter().map(|r| dot(r, phi)), q)
}

pub fn weak_norm(family: &VectorFamily, q: f64, budget: &SearchBudget) -> Result<WeakNormResult> {
    if q.is_nan() || q <= 0.0 {
        bail!(Domain, "weak norm exponent must be positive, got {q}");
    }
    let space = family.space();
    let dual = space.dual();
    let rows = canonical_rows(family);
    let finish = |phi: Vec<f64>, value: f64, exact: bool, path: WeakNormPath| -> Result<WeakNormResult> {
        Ok(WeakNormResult {
            value,
            certificate: Functional::new(space, phi)?,
            exact,
            path,
        })
    };

    if family.is_zero() {
        return finish(vec![0.0; space.dim()], 0.0, true, WeakNormPath::ZeroFamily);
    }
    if rows.len() == 1 {
        let phi = norming_coords(space.exponent(), &rows[0]).expect("nonzero vector");
        return finish(phi, family.vectors()[0].norm(), true, WeakNormPath::SingleVector);
    }
    if !budget.force_search {
        if space.is_hilbert() && q == 2.0 {
            let (value, phi) = spectral(&rows);
            return finish(phi, value, true, WeakNormPath::Spectral);
        }
        if let Some((value, phi)) = scaled_basis(&rows, dual.exponent(), q) {
            return finish(phi, value, true, WeakNormPath::ScaledBasis);
        }
        if space.is_sup_normed() && q >= 1.0 {
            let (value, phi) = cross_polytope(&rows, q);
            return finish(phi, value, true, WeakNormPath::CrossPolytope);
        }
        if space.is_l1() && q >= 1.0 && space.dim() <= MAX_VERTEX_DIM {
            let phi = cube_vertices(&rows, q);
            let value = objective(&rows, &phi, q);
            return finish(phi, value, true, WeakNormPath::CubeVertices);
        }
    }
    let (value, phi) = search(&rows, space, q, budget);
    finish(phi, value, false, WeakNormPath::Search)
}

/// Rows sorted lexicographically, so every path is invariant under
/// permutations of the family.
fn canonical_rows(family: &VectorFamily) -> Vec<Vec<f64>> {
    let mut rows = family.rows();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    rows
}

/// Largest singular value of the coordinate matrix and its right singular
/// vector.
fn spectral(rows: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = rows.len();
    let d = rows[0].len();
    let m = nalgebra::DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bs), (i, &s)| if s > bs { (i, s) } else { (bi, bs) });
    let phi: Vec<f64> = v_t.row(idx).iter().copied().collect();
    (sigma, phi)
}

/// Families whose vectors are multiples of distinct basis vectors: the
/// weak norm is the norm of a diagonal map `ℓ_{p*} → ℓ_q`, given by
/// Hölder's inequality.
fn scaled_basis(rows: &[Vec<f64>], dual: Exponent, q: f64) -> Option<(f64, Vec<f64>)> {
    let d = rows[0].len();
    let mut used = vec![false; d];
    let mut entries = Vec::new();
    for row in rows {
        let mut nonzero = row.iter().enumerate().filter(|(_, c)| **c != 0.0);
        match (nonzero.next(), nonzero.next()) {
            (None, _) => {}
            (Some((i, &c)), None) => {
                if used[i] {
                    return None;
                }
                used[i] = true;
                entries.push((i, c));
            }
            _ => return None,
        }
    }
    let max = entries.iter().fold(0.0_f64, |m, (_, c)| m.max(c.abs()));
    let mut phi = vec![0.0; d];
    if q >= dual.value() {
        let &(i, c) = entries.iter().find(|(_, c)| c.abs() == max).expect("nonzero family");
        phi[i] = c.signum();
        return Some((max, phi));
    }
    // 1/s = 1/q − 1/p*
    let s = 1.0 / (1.0 / q - dual.recip());
    let value = power_mean_norm(entries.iter().map(|(_, c)| *c), s);
    let t = match dual {
        Exponent::Infinite => 1.0,
        Exponent::Finite(ps) => ps / (ps - q),
    };
    let mu_q: Vec<f64> = entries.iter().map(|(_, c)| (c.abs() / max).powf(q)).collect();
    let norm_t = power_mean_norm(mu_q.iter().copied(), t);
    for ((i, c), m) in entries.iter().zip(&mu_q) {
        let u = (m / norm_t).powf(t - 1.0);
        phi[*i] = c.signum() * u.powf(1.0 / q);
    }
    Some((value, phi))
}

/// Sup-normed spaces: the dual ball is the cross-polytope, whose vertices
/// are `±e_i`.
fn cross_polytope(rows: &[Vec<f64>], q: f64) -> (f64, Vec<f64>) {
    let d = rows[0].len();
    let (idx, value) = (0..d)
        .map(|i| (i, power_mean_norm(rows.iter().map(|r| r[i]), q)))
        .fold((0, -1.0), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    let mut phi = vec![0.0; d];
    phi[idx] = 1.0;
    (value, phi)
}

fn power_sum(a: &[f64], q: f64) -> f64 {
    if q == 1.0 {
        a.iter().map(|x| x.abs()).sum()
    } else if q == 2.0 {
        a.iter().map(|x| x * x).sum()
    } else {
        a.iter().map(|x| x.abs().powf(q)).sum()
    }
}

/// ℓ₁: maximize over the sign vertices of the cube, walking them in Gray
/// code order with the first sign fixed (the objective is even).
fn cube_vertices(rows: &[Vec<f64>], q: f64) -> Vec<f64> {
    let d = rows[0].len();
    let mut signs = vec![1.0; d];
    let fresh = |signs: &[f64]| -> Vec<f64> { rows.iter().map(|r| dot(r, signs)).collect() };
    let mut a = fresh(&signs);
    let mut best = power_sum(&a, q);
    let mut best_signs = signs.clone();
    let steps: u64 = 1 << (d - 1);
    for g in 1..steps {
        let bit = g.trailing_zeros() as usize + 1;
        signs[bit] = -signs[bit];
        if g % 256 == 0 {
            a = fresh(&signs);
        } else {
            for (ak, r) in a.iter_mut().zip(rows) {
                *ak += 2.0 * signs[bit] * r[bit];
            }
        }
        let v = power_sum(&a, q);
        if v > best {
            best = v;
            best_signs.copy_from_slice(&signs);
        }
    }
    best_signs
}

fn instance_hash(rows: &[Vec<f64>], q: f64) -> u64 {
    let mut h = InstanceHasher::default();
    h.f64(q);
    for r in rows {
        for &c in r {
            h.f64(c);
        }
    }
    h.finish()
}

/// Multistart ascent over the dual ball.
///
/// Each step moves toward the dual-ball maximizer of the linearized
/// objective (a conditional-gradient step), halving the step until the
/// objective rises, and rescales back to the dual sphere.
fn search(rows: &[Vec<f64>], space: SpaceDescriptor, q: f64, budget: &SearchBudget) -> (f64, Vec<f64>) {
    let dual_exp = space.dual().exponent();
    let restarts = budget.restarts.max(1);
    let mut by_norm: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i, norm_coords(space.exponent(), r)))
        .collect();
    by_norm.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut starts: Vec<Vec<f64>> = by_norm
        .iter()
        .filter(|(_, nrm)| *nrm > 0.0)
        .take(restarts.div_ceil(2))
        .filter_map(|(i, _)| norming_coords(space.exponent(), &rows[*i]))
        .collect();
    let offset = derive_seed(budget.seed, "weak_norm", instance_hash(rows, q)) % 65_521;
    let mut k = 0;
    while starts.len() < restarts {
        let dir = quasi_random_direction(offset + k, space.dim());
        k += 1;
        let nrm = norm_coords(dual_exp, &dir);
        if nrm > 0.0 {
            starts.push(dir.iter().map(|c| c / nrm).collect());
        }
    }

    let results: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|phi| ascend(rows, space, dual_exp, q, phi, budget))
        .collect();
    let mut best = results[0].clone();
    for r in results.into_iter().skip(1) {
        if r.0 > best.0 {
            best = r;
        }
    }
    best
}

fn ascend(
    rows: &[Vec<f64>],
    space: SpaceDescriptor,
    dual_exp: Exponent,
    q: f64,
    mut phi: Vec<f64>,
    budget: &SearchBudget,
) -> (f64, Vec<f64>) {
    let mut f = objective(rows, &phi, q);
    let d = phi.len();
    for _ in 0..budget.max_iters {
        let a: Vec<f64> = rows.iter().map(|r| dot(r, &phi)).collect();
        let mut g = vec![0.0; d];
        for (ak, r) in a.iter().zip(rows) {
            if *ak == 0.0 {
                continue;
            }
            let w = ak.signum() * if q == 1.0 { 1.0 } else { ak.abs().powf(q - 1.0) };
            for (gi, ri) in g.iter_mut().zip(r) {
                *gi += w * ri;
            }
        }
        let Some(target) = norming_coords(space.exponent(), &g) else {
            break;
        };
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = phi.iter().zip(&target).map(|(p, t)| p + step * (t - p)).collect();
            let nrm = norm_coords(dual_exp, &cand);
            if nrm > 0.0 {
                let cand: Vec<f64> = cand.iter().map(|c| c / nrm).collect();
                let fc = objective(rows, &cand, q);
                if fc > f {
                    accepted = Some((fc, cand));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((fc, cand)) = accepted else { break };
        let gain = fc - f;
        phi = cand;
        f = fc;
        if gain <= budget.rel_tol * f {
            break;
        }
    }
    (f, phi)
}

/// Exhaustive maximum over all `2^d` sign vectors of the ℓ₁ dual cube.
/// Deliberately naive; serves as the independent check of the vertex path.
pub fn weak_norm_vertex_oracle(family: &VectorFamily, q: f64) -> Result<f64> {
    if q.is_nan() || q <= 0.0 {
        bail!(Domain, "weak norm exponent must be positive, got {q}");
    }
    let space = family.space();
    if !space.is_l1() {
        bail!(Structural, "vertex oracle needs an ℓ₁ space, got {space}");
    }
    let d = space.dim();
    if d > MAX_VERTEX_DIM {
        bail!(Budget, "vertex oracle limited to dimension {MAX_VERTEX_DIM}, got {d}");
    }
    let mut best = 0.0_f64;
    for mask in 0u64..(1 << d) {
        let phi: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let mut s = 0.0;
        for v in family.vectors() {
            s += dot(v.coords(), &phi).abs().powf(q);
        }
        best = best.max(s.powf(1.0 / q));
    }
    Ok(best)
}
