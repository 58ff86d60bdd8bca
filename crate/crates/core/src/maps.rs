//! Multilinear maps and homogeneous polynomials between finite-dimensional
//! spaces, with the power sums that form the numerators of summing
//! quotients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::SearchBudget;
use crate::error::{bail, Error, Result};
use crate::sampling::{rng_for, CompensatedSum, InstanceHasher};
use crate::spaces::{ball_maximizer, dot, norm_coords, norming_coords, Exponent, Functional, SpaceDescriptor, Vector};
use crate::weak_norms::VectorFamily;

/// A dense coefficient array stored row-major. For maps the last axis is
/// the output axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

const BINARY_MAGIC: &[u8; 4] = b"SLT1";

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = checked_product(&shape).ok_or_else(|| Error::Structural("tensor shape overflows".into()))?;
        if shape.is_empty() || shape.contains(&0) {
            bail!(
                Structural,
                "tensor shape {shape:?} must be nonempty with positive extents"
            );
        }
        if len != data.len() {
            bail!(
                Structural,
                "shape {shape:?} needs {len} entries, payload has {}",
                data.len()
            );
        }
        if data.iter().any(|c| !c.is_finite()) {
            bail!(Domain, "tensor entries must be finite");
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = checked_product(&shape).ok_or_else(|| Error::Structural("tensor shape overflows".into()))?;
        Self::new(shape, vec![0.0; len])
    }

    /// The `d × d` identity matrix (input axis, output axis).
    pub fn identity(d: usize) -> Result<Self> {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        Self::new(vec![d, d], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DenseTensor = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(raw.shape, raw.data)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tensor serializes")
    }

    /// Binary container: magic `SLT1`, `u32` rank, `u64` extents, then the
    /// row-major `f64` payload, all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * (self.shape.len() + self.data.len()));
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&(self.shape.len() as u32).to_le_bytes());
        for &s in &self.shape {
            out.extend_from_slice(&(s as u64).to_le_bytes());
        }
        for &x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let truncated = || Error::Parse("truncated tensor container".into());
        if bytes.len() < 8 || &bytes[..4] != BINARY_MAGIC {
            bail!(Parse, "not a tensor container");
        }
        let rank = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let mut pos = 8;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            let chunk = bytes.get(pos..pos + 8).ok_or_else(truncated)?;
            shape.push(u64::from_le_bytes(chunk.try_into().unwrap()) as usize);
            pos += 8;
        }
        let payload = &bytes[pos..];
        if payload.len() % 8 != 0 {
            return Err(truncated());
        }
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(shape, data)
    }
}

pub(crate) fn checked_product(extents: &[usize]) -> Option<usize> {
    extents.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e))
}

fn checked_power(base: usize, exp: usize) -> Option<u64> {
    (0..exp).try_fold(1u64, |acc, _| acc.checked_mul(base as u64))
}

/// Contracts the leading axis of `data` (extent `x.len()`) against `x`.
fn contract_first(data: &[f64], x: &[f64]) -> Vec<f64> {
    let inner = data.len() / x.len();
    let mut out = vec![0.0; inner];
    for (i, xi) in x.iter().enumerate() {
        if *xi == 0.0 {
            continue;
        }
        for (o, t) in out.iter_mut().zip(&data[i * inner..(i + 1) * inner]) {
            *o += xi * t;
        }
    }
    out
}

/// Contracts the trailing axis of `data` (extent `x.len()`) against `x`.
fn contract_last(data: &[f64], x: &[f64]) -> Vec<f64> {
    data.chunks_exact(x.len()).map(|block| dot(block, x)).collect()
}

/// Contracts every input slot except `skip` and the output axis against
/// `output`: the gradient of `⟨output, T(x_1, …, x_m)⟩` in slot `skip`.
fn contract_except(tensor: &DenseTensor, args: &[&[f64]], output: &[f64], skip: usize) -> Vec<f64> {
    let mut data = contract_last(&tensor.data, output);
    for x in &args[..skip] {
        data = contract_first(&data, x);
    }
    for x in args[skip + 1..].iter().rev() {
        data = contract_last(&data, x);
    }
    data
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultilinearBody {
    Dense(DenseTensor),
    /// `(x^{(1)}, …, x^{(m)}) ↦ (x^{(1)}_{j₁} ⋯ x^{(m)}_{j_m})` from `(ℓ₂^n)^m`
    /// into the sup slice of dimension `n^m`.
    DiagonalC0 {
        n: usize,
    },
}

/// A bounded `m`-linear map `E₁ × ⋯ × E_m → F`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearMap {
    domain: Vec<SpaceDescriptor>,
    codomain: SpaceDescriptor,
    body: MultilinearBody,
}

impl MultilinearMap {
    pub fn dense(domain: Vec<SpaceDescriptor>, codomain: SpaceDescriptor, tensor: DenseTensor) -> Result<Self> {
        if domain.is_empty() {
            bail!(Structural, "a multilinear map needs at least one slot");
        }
        let expected: Vec<usize> = domain.iter().map(|s| s.dim()).chain([codomain.dim()]).collect();
        if tensor.shape() != expected.as_slice() {
            bail!(
                Structural,
                "tensor shape {:?} does not match descriptors {expected:?}",
                tensor.shape()
            );
        }
        Ok(Self {
            domain,
            codomain,
            body: MultilinearBody::Dense(tensor),
        })
    }

    pub fn diagonal_c0(m: usize, n: usize, tuple_budget: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            bail!(Structural, "diagonal map needs m ≥ 1 and n ≥ 1");
        }
        let out_dim = checked_power(n, m).filter(|&c| c <= tuple_budget);
        let Some(out_dim) = out_dim else {
            bail!(Budget, "n^m = {n}^{m} exceeds the tuple budget {tuple_budget}");
        };
        let l2 = SpaceDescriptor::lp(2.0, n)?;
        Ok(Self {
            domain: vec![l2; m],
            codomain: SpaceDescriptor::sup(out_dim as usize)?,
            body: MultilinearBody::DiagonalC0 { n },
        })
    }

    pub fn arity(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[SpaceDescriptor] {
        &self.domain
    }

    pub fn codomain(&self) -> SpaceDescriptor {
        self.codomain
    }

    pub fn body(&self) -> &MultilinearBody {
        &self.body
    }

    /// Closed-form operator norm, when one is known.
    pub fn known_norm(&self) -> Option<f64> {
        match &self.body {
            MultilinearBody::DiagonalC0 { .. } => Some(1.0),
            MultilinearBody::Dense(t) if self.arity() == 1 && is_identity(t) && self.domain[0] == self.codomain => {
                Some(1.0)
            }
            MultilinearBody::Dense(t) if t.data().iter().all(|&c| c == 0.0) => Some(0.0),
            MultilinearBody::Dense(_) => None,
        }
    }

    fn check_args(&self, args: &[&Vector]) -> Result<()> {
        if args.len() != self.arity() {
            bail!(
                Structural,
                "{}-linear map applied to {} arguments",
                self.arity(),
                args.len()
            );
        }
        for (i, (a, s)) in args.iter().zip(&self.domain).enumerate() {
            if a.space().dim() != s.dim() {
                bail!(Structural, "argument {i} lives in {} but slot expects {s}", a.space());
            }
        }
        Ok(())
    }

    /// `‖T(args)‖` without materializing the output of a diagonal map.
    fn output_norm(&self, args: &[&[f64]]) -> f64 {
        match &self.body {
            MultilinearBody::DiagonalC0 { .. } => args
                .iter()
                .map(|x| norm_coords(Exponent::Infinite, x))
                .fold(1.0, |acc, s| acc * s),
            MultilinearBody::Dense(t) => {
                let mut data = t.data.clone();
                for x in args {
                    data = contract_first(&data, x);
                }
                norm_coords(self.codomain.exponent(), &data)
            }
        }
    }
}

fn is_identity(t: &DenseTensor) -> bool {
    let [a, b] = t.shape() else { return false };
    a == b
        && t.data
            .iter()
            .enumerate()
            .all(|(k, &c)| c == if k / b == k % b { 1.0 } else { 0.0 })
}

pub fn eval_multilinear(t: &MultilinearMap, args: &[Vector]) -> Result<Vector> {
    let refs: Vec<&Vector> = args.iter().collect();
    t.check_args(&refs)?;
    let coords = match &t.body {
        MultilinearBody::Dense(tensor) => {
            let mut data = tensor.data.clone();
            for x in args {
                data = contract_first(&data, x.coords());
            }
            data
        }
        MultilinearBody::DiagonalC0 { .. } => {
            let mut out = vec![1.0];
            for x in args {
                out = out
                    .iter()
                    .flat_map(|&prefix| x.coords().iter().map(move |&c| prefix * c))
                    .collect();
            }
            out
        }
    };
    Vector::new(t.codomain, coords)
}

fn pth_power(norm: f64, p: f64) -> f64 {
    if p == 2.0 {
        norm * norm
    } else if p == 1.0 {
        norm
    } else {
        norm.powf(p)
    }
}

fn check_families(t: &MultilinearMap, families: &[VectorFamily], p: f64, tuple_budget: u64) -> Result<usize> {
    if p.is_nan() || p <= 0.0 {
        bail!(Domain, "power-sum exponent must be positive, got {p}");
    }
    if families.len() != t.arity() {
        bail!(Structural, "{}-linear map given {} families", t.arity(), families.len());
    }
    let n = families[0].len();
    for (i, (f, s)) in families.iter().zip(t.domain()).enumerate() {
        if f.len() != n {
            bail!(Structural, "family {i} has {} vectors, expected {n}", f.len());
        }
        if f.space().dim() != s.dim() {
            bail!(Structural, "family {i} lives in {} but slot expects {s}", f.space());
        }
    }
    match checked_power(n, t.arity()) {
        Some(c) if c <= tuple_budget => Ok(n),
        _ => bail!(
            Budget,
            "{n}^{} tuples exceed the tuple budget {tuple_budget}",
            t.arity()
        ),
    }
}

/// `(Σ_{k₁,…,k_m} ‖T(x^{(1)}_{k₁}, …, x^{(m)}_{k_m})‖^p)^{1/p}` over all `n^m`
/// index tuples.
///
/// Tuples are partitioned by their leading index; each partition is
/// accumulated in lexicographic order with compensated summation and the
/// partitions are merged in index order, so the result does not depend on
/// the number of worker threads.
pub fn mixed_power_sum(t: &MultilinearMap, families: &[VectorFamily], p: f64, tuple_budget: u64) -> Result<f64> {
    let n = check_families(t, families, p, tuple_budget)?;
    let rows: Vec<Vec<Vec<f64>>> = families.iter().map(VectorFamily::rows).collect();
    let partitions: Vec<CompensatedSum> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut acc = CompensatedSum::default();
            match &t.body {
                MultilinearBody::DiagonalC0 { .. } => {
                    let sups: Vec<Vec<f64>> = rows
                        .iter()
                        .map(|fam| fam.iter().map(|x| norm_coords(Exponent::Infinite, x)).collect())
                        .collect();
                    diagonal_walk(&sups, 1, sups[0][k], p, &mut acc);
                }
                MultilinearBody::Dense(tensor) => {
                    let partial = contract_first(&tensor.data, &rows[0][k]);
                    dense_walk(&rows, 1, partial, t.codomain.exponent(), p, &mut acc);
                }
            }
            acc
        })
        .collect();
    let mut total = CompensatedSum::default();
    for part in &partitions {
        total.merge(part);
    }
    Ok(total.value().max(0.0).powf(1.0 / p))
}

fn diagonal_walk(sups: &[Vec<f64>], slot: usize, prefix: f64, p: f64, acc: &mut CompensatedSum) {
    if slot == sups.len() {
        acc.add(pth_power(prefix, p));
        return;
    }
    for &s in &sups[slot] {
        diagonal_walk(sups, slot + 1, prefix * s, p, acc);
    }
}

fn dense_walk(
    rows: &[Vec<Vec<f64>>],
    slot: usize,
    partial: Vec<f64>,
    out_exp: Exponent,
    p: f64,
    acc: &mut CompensatedSum,
) {
    if slot == rows.len() {
        acc.add(pth_power(norm_coords(out_exp, &partial), p));
        return;
    }
    for x in &rows[slot] {
        dense_walk(rows, slot + 1, contract_first(&partial, x), out_exp, p, acc);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolynomialBody {
    /// `P(x) = T(x, …, x)` for a symmetric coefficient tensor.
    DenseSymmetric(DenseTensor),
    /// `P(x) = Σ_j |a_j|^{1/p} φ_j(x)^m y_j` with `Σ_j |a_j|^{r/p} = 1`,
    /// `r` the cotype of the codomain.
    CotypeWitness {
        a: Vec<f64>,
        functionals: Vec<Functional>,
        targets: Vec<Vector>,
        p: f64,
    },
    /// Scalar-valued `P(x) = Σ_j |a_j|^{1/p} φ_j(x)^m`, `m` even, with
    /// `Σ_j |a_j|^{1/p} = 1`.
    RealEvenWitness {
        a: Vec<f64>,
        functionals: Vec<Functional>,
        p: f64,
    },
}

/// An `m`-homogeneous polynomial `E → F`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPolynomial {
    degree: usize,
    domain: SpaceDescriptor,
    codomain: SpaceDescriptor,
    body: PolynomialBody,
}

const CONSTRAINT_TOL: f64 = 1e-12;

impl HomogeneousPolynomial {
    pub fn dense_symmetric(
        degree: usize,
        domain: SpaceDescriptor,
        codomain: SpaceDescriptor,
        tensor: DenseTensor,
    ) -> Result<Self> {
        if degree == 0 {
            bail!(Structural, "polynomial degree must be at least 1");
        }
        let mut expected = vec![domain.dim(); degree];
        expected.push(codomain.dim());
        if tensor.shape() != expected.as_slice() {
            bail!(
                Structural,
                "tensor shape {:?} does not match {expected:?}",
                tensor.shape()
            );
        }
        if !is_symmetric(&tensor, degree) {
            bail!(
                Structural,
                "polynomial coefficient tensor must be symmetric in its input slots"
            );
        }
        Ok(Self {
            degree,
            domain,
            codomain,
            body: PolynomialBody::DenseSymmetric(tensor),
        })
    }

    pub fn zero(degree: usize, domain: SpaceDescriptor, codomain: SpaceDescriptor) -> Result<Self> {
        let mut shape = vec![domain.dim(); degree];
        shape.push(codomain.dim());
        Self::dense_symmetric(degree, domain, codomain, DenseTensor::zeros(shape)?)
    }

    pub fn cotype_witness(
        degree: usize,
        domain: SpaceDescriptor,
        codomain: SpaceDescriptor,
        a: Vec<f64>,
        functionals: Vec<Functional>,
        targets: Vec<Vector>,
        p: f64,
    ) -> Result<Self> {
        if degree == 0 {
            bail!(Structural, "polynomial degree must be at least 1");
        }
        if !(p > 0.0) {
            bail!(Domain, "witness exponent p must be positive, got {p}");
        }
        if a.is_empty() || a.len() != functionals.len() || a.len() != targets.len() {
            bail!(
                Structural,
                "witness needs matching, nonempty coefficient, functional and target lists"
            );
        }
        if functionals.iter().any(|f| f.space().dim() != domain.dim())
            || targets.iter().any(|y| y.space().dim() != codomain.dim())
        {
            bail!(
                Structural,
                "witness functionals or targets do not match the descriptors"
            );
        }
        let Exponent::Finite(r) = codomain.cotype() else {
            bail!(
                Domain,
                "cotype witness needs a codomain of finite cotype, got {codomain}"
            );
        };
        let total: f64 = a.iter().map(|x| x.abs().powf(r / p)).sum();
        if (total - 1.0).abs() > CONSTRAINT_TOL {
            bail!(Domain, "coefficients violate Σ|a_j|^(r/p) = 1 (sum is {total})");
        }
        Ok(Self {
            degree,
            domain,
            codomain,
            body: PolynomialBody::CotypeWitness {
                a,
                functionals,
                targets,
                p,
            },
        })
    }

    pub fn real_even_witness(
        degree: usize,
        domain: SpaceDescriptor,
        a: Vec<f64>,
        functionals: Vec<Functional>,
        p: f64,
    ) -> Result<Self> {
        if degree == 0 || degree % 2 != 0 {
            bail!(Domain, "real even witness needs an even positive degree, got {degree}");
        }
        if !(p > 0.0) {
            bail!(Domain, "witness exponent p must be positive, got {p}");
        }
        if a.is_empty() || a.len() != functionals.len() {
            bail!(
                Structural,
                "witness needs matching, nonempty coefficient and functional lists"
            );
        }
        if functionals.iter().any(|f| f.space().dim() != domain.dim()) {
            bail!(Structural, "witness functionals do not match {domain}");
        }
        let total: f64 = a.iter().map(|x| x.abs().powf(1.0 / p)).sum();
        if (total - 1.0).abs() > CONSTRAINT_TOL {
            bail!(Domain, "coefficients violate Σ|a_j|^(1/p) = 1 (sum is {total})");
        }
        Ok(Self {
            degree,
            domain,
            codomain: scalar_line(),
            body: PolynomialBody::RealEvenWitness { a, functionals, p },
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> SpaceDescriptor {
        self.domain
    }

    pub fn codomain(&self) -> SpaceDescriptor {
        self.codomain
    }

    pub fn body(&self) -> &PolynomialBody {
        &self.body
    }

    /// Term weights `|a_j|^{1/p}` of a witness body.
    pub fn witness_weights(&self) -> Option<Vec<f64>> {
        match &self.body {
            PolynomialBody::CotypeWitness { a, p, .. } | PolynomialBody::RealEvenWitness { a, p, .. } => {
                Some(a.iter().map(|x| x.abs().powf(1.0 / p)).collect())
            }
            PolynomialBody::DenseSymmetric(_) => None,
        }
    }

    /// An analytic upper bound on `‖P‖` for witness bodies.
    ///
    /// With distinct unit basis targets in `ℓ_r` the bound is
    /// `(Σ_j (w_j ‖φ_j‖^m)^r)^{1/r}`; otherwise the triangle inequality.
    pub fn certified_norm_bound(&self) -> Option<f64> {
        let weights = self.witness_weights()?;
        let m = self.degree as i32;
        match &self.body {
            PolynomialBody::CotypeWitness {
                functionals, targets, ..
            } => {
                let terms: Vec<f64> = weights
                    .iter()
                    .zip(functionals)
                    .map(|(w, f)| w * f.dual_norm().powi(m))
                    .collect();
                if let (Some(r), true) = (finite_exponent(self.codomain.exponent()), distinct_unit_basis(targets)) {
                    Some(norm_coords(Exponent::Finite(r), &terms))
                } else {
                    Some(terms.iter().zip(targets).map(|(t, y)| t * y.norm()).sum())
                }
            }
            PolynomialBody::RealEvenWitness { functionals, .. } => Some(
                weights
                    .iter()
                    .zip(functionals)
                    .map(|(w, f)| w * f.dual_norm().powi(m))
                    .sum(),
            ),
            PolynomialBody::DenseSymmetric(_) => None,
        }
    }

    fn eval_coords(&self, x: &[f64]) -> Vec<f64> {
        let m = self.degree as i32;
        match &self.body {
            PolynomialBody::DenseSymmetric(t) => {
                let mut data = t.data.clone();
                for _ in 0..self.degree {
                    data = contract_first(&data, x);
                }
                data
            }
            PolynomialBody::CotypeWitness {
                functionals, targets, ..
            } => {
                let weights = self.witness_weights().unwrap();
                let mut out = vec![0.0; self.codomain.dim()];
                for ((w, f), y) in weights.iter().zip(functionals).zip(targets) {
                    let c = w * dot(f.coords(), x).powi(m);
                    for (o, yi) in out.iter_mut().zip(y.coords()) {
                        *o += c * yi;
                    }
                }
                out
            }
            PolynomialBody::RealEvenWitness { functionals, .. } => {
                let weights = self.witness_weights().unwrap();
                vec![weights
                    .iter()
                    .zip(functionals)
                    .map(|(w, f)| w * dot(f.coords(), x).powi(m))
                    .sum()]
            }
        }
    }

    /// Gradient of `⟨output, P(x)⟩` with respect to `x`.
    fn gradient(&self, x: &[f64], output: &[f64]) -> Vec<f64> {
        let m = self.degree as i32;
        match &self.body {
            PolynomialBody::DenseSymmetric(t) => {
                let args: Vec<&[f64]> = vec![x; self.degree];
                let mut g = vec![0.0; x.len()];
                for slot in 0..self.degree {
                    for (gi, c) in g.iter_mut().zip(contract_except(t, &args, output, slot)) {
                        *gi += c;
                    }
                }
                g
            }
            PolynomialBody::CotypeWitness {
                functionals, targets, ..
            } => {
                let weights = self.witness_weights().unwrap();
                let mut g = vec![0.0; x.len()];
                for ((w, f), y) in weights.iter().zip(functionals).zip(targets) {
                    let c = w * f64::from(m) * dot(f.coords(), x).powi(m - 1) * dot(output, y.coords());
                    for (gi, fi) in g.iter_mut().zip(f.coords()) {
                        *gi += c * fi;
                    }
                }
                g
            }
            PolynomialBody::RealEvenWitness { functionals, .. } => {
                let weights = self.witness_weights().unwrap();
                let mut g = vec![0.0; x.len()];
                for (w, f) in weights.iter().zip(functionals) {
                    let c = w * f64::from(m) * dot(f.coords(), x).powi(m - 1) * output[0];
                    for (gi, fi) in g.iter_mut().zip(f.coords()) {
                        *gi += c * fi;
                    }
                }
                g
            }
        }
    }
}

/// The scalar field `ℝ` as a one-dimensional normed space.
pub fn scalar_line() -> SpaceDescriptor {
    SpaceDescriptor::lp(2.0, 1).expect("valid descriptor")
}

fn finite_exponent(e: Exponent) -> Option<f64> {
    match e {
        Exponent::Finite(r) => Some(r),
        Exponent::Infinite => None,
    }
}

fn distinct_unit_basis(targets: &[Vector]) -> bool {
    let mut seen = vec![false; targets.first().map_or(0, |y| y.space().dim())];
    targets.iter().all(|y| {
        let nz: Vec<(usize, f64)> = y
            .coords()
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, c)| *c != 0.0)
            .collect();
        match nz.as_slice() {
            [(i, c)] if c.abs() == 1.0 && !seen[*i] => {
                seen[*i] = true;
                true
            }
            _ => false,
        }
    })
}

fn is_symmetric(t: &DenseTensor, degree: usize) -> bool {
    if degree < 2 {
        return true;
    }
    let d = t.shape[0];
    let out = t.shape[degree];
    let count = t.data.len() / out;
    let mut idx = vec![0usize; degree];
    for flat in 0..count {
        let mut rem = flat;
        for slot in (0..degree).rev() {
            idx[slot] = rem % d;
            rem /= d;
        }
        // compare with every adjacent transposition
        for s in 0..degree - 1 {
            let mut swapped = idx.clone();
            swapped.swap(s, s + 1);
            let other = swapped.iter().fold(0, |acc, &i| acc * d + i);
            for o in 0..out {
                let a = t.data[flat * out + o];
                let b = t.data[other * out + o];
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn eval_polynomial(poly: &HomogeneousPolynomial, x: &Vector) -> Result<Vector> {
    if x.space().dim() != poly.domain.dim() {
        bail!(
            Structural,
            "polynomial on {} evaluated at a vector of {}",
            poly.domain,
            x.space()
        );
    }
    Vector::new(poly.codomain, poly.eval_coords(x.coords()))
}

/// `(Σ_k ‖P(x_k)‖^p)^{1/p}`.
pub fn poly_power_sum(poly: &HomogeneousPolynomial, family: &VectorFamily, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        bail!(Domain, "power-sum exponent must be positive, got {p}");
    }
    if family.space().dim() != poly.domain.dim() {
        bail!(
            Structural,
            "family in {} for a polynomial on {}",
            family.space(),
            poly.domain
        );
    }
    let out_exp = poly.codomain.exponent();
    let mut acc = CompensatedSum::default();
    for x in family.vectors() {
        acc.add(pth_power(norm_coords(out_exp, &poly.eval_coords(x.coords())), p));
    }
    Ok(acc.value().max(0.0).powf(1.0 / p))
}

/// A borrowed multilinear map or polynomial.
#[derive(Debug, Clone, Copy)]
pub enum MapRef<'a> {
    Multilinear(&'a MultilinearMap),
    Polynomial(&'a HomogeneousPolynomial),
}

impl MapRef<'_> {
    /// Number of vector families a summing quotient consumes.
    pub fn slots(&self) -> usize {
        match self {
            MapRef::Multilinear(t) => t.arity(),
            MapRef::Polynomial(_) => 1,
        }
    }

    /// Degree of homogeneity (`m`).
    pub fn degree(&self) -> usize {
        match self {
            MapRef::Multilinear(t) => t.arity(),
            MapRef::Polynomial(p) => p.degree(),
        }
    }

    pub fn domain(&self, slot: usize) -> SpaceDescriptor {
        match self {
            MapRef::Multilinear(t) => t.domain()[slot],
            MapRef::Polynomial(p) => p.domain(),
        }
    }

    pub fn known_norm(&self) -> Option<f64> {
        match self {
            MapRef::Multilinear(t) => t.known_norm(),
            MapRef::Polynomial(_) => None,
        }
    }
}

/// A lower-bound estimate of an operator norm with the maximizing inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub exact: bool,
    pub certificate: Vec<Vector>,
}

/// `sup ‖T(x₁, …, x_m)‖` over unit inputs (or `sup ‖P(x)‖` over the unit
/// ball). Closed forms are returned where known; otherwise a multistart
/// ascent gives a lower bound.
pub fn operator_norm(map: MapRef<'_>, budget: &SearchBudget) -> Result<NormEstimate> {
    match map {
        MapRef::Multilinear(t) => multilinear_norm(t, budget),
        MapRef::Polynomial(p) => polynomial_norm(p, budget),
    }
}

fn unit_random(space: &SpaceDescriptor, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..space.dim()).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm_coords(space.exponent(), &v);
        if n > 0.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn tensor_hash(t: &DenseTensor) -> u64 {
    let mut h = InstanceHasher::default();
    for &s in &t.shape {
        h.u64(s as u64);
    }
    for &c in &t.data {
        h.f64(c);
    }
    h.finish()
}

fn multilinear_norm(t: &MultilinearMap, budget: &SearchBudget) -> Result<NormEstimate> {
    let certificate_from = |args: Vec<Vec<f64>>| -> Result<Vec<Vector>> {
        args.into_iter()
            .zip(&t.domain)
            .map(|(c, s)| Vector::new(*s, c))
            .collect()
    };
    let tensor = match &t.body {
        MultilinearBody::DiagonalC0 { .. } => {
            let args = t.domain.iter().map(|s| s.basis_vector(0).into_coords()).collect();
            return Ok(NormEstimate {
                value: 1.0,
                exact: true,
                certificate: certificate_from(args)?,
            });
        }
        MultilinearBody::Dense(tensor) => tensor,
    };
    let mut rng = rng_for(budget.seed, "operator_norm", tensor_hash(tensor));
    let starts: Vec<Vec<Vec<f64>>> = (0..budget.restarts.max(1))
        .map(|r| {
            t.domain
                .iter()
                .map(|s| {
                    if r == 0 {
                        s.basis_vector(0).into_coords()
                    } else {
                        unit_random(s, &mut rng)
                    }
                })
                .collect()
        })
        .collect();
    let out_exp = t.codomain.exponent();
    let results: Vec<(f64, Vec<Vec<f64>>)> = starts
        .into_par_iter()
        .map(|mut args| {
            let value = |args: &[Vec<f64>]| {
                let refs: Vec<&[f64]> = args.iter().map(Vec::as_slice).collect();
                t.output_norm(&refs)
            };
            let mut f = value(&args);
            for _ in 0..budget.max_iters {
                for slot in 0..args.len() {
                    let refs: Vec<&[f64]> = args.iter().map(Vec::as_slice).collect();
                    let mut y = tensor.data.clone();
                    for x in &refs {
                        y = contract_first(&y, x);
                    }
                    let Some(j) = norming_coords(out_exp, &y) else { break };
                    let g = contract_except(tensor, &refs, &j, slot);
                    if let Some(next) = ball_maximizer(&t.domain[slot], &g) {
                        args[slot] = next;
                    }
                }
                let next = value(&args);
                let gain = next - f;
                f = f.max(next);
                if gain <= budget.rel_tol * f {
                    break;
                }
            }
            (value(&args), args)
        })
        .collect();
    let (value, args) = best_of(results);
    Ok(NormEstimate {
        value,
        exact: false,
        certificate: certificate_from(args)?,
    })
}

fn best_of<T: Clone>(results: Vec<(f64, T)>) -> (f64, T) {
    let mut best = results[0].clone();
    for r in results.into_iter().skip(1) {
        if r.0 > best.0 {
            best = r;
        }
    }
    best
}

fn polynomial_norm(poly: &HomogeneousPolynomial, budget: &SearchBudget) -> Result<NormEstimate> {
    let domain = poly.domain;
    let out_exp = poly.codomain.exponent();
    let mut h = InstanceHasher::default();
    h.u64(poly.degree as u64);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    match &poly.body {
        PolynomialBody::DenseSymmetric(t) => {
            h.u64(tensor_hash(t));
        }
        PolynomialBody::CotypeWitness { a, functionals, .. }
        | PolynomialBody::RealEvenWitness { a, functionals, .. } => {
            for (aj, f) in a.iter().zip(functionals) {
                h.f64(*aj);
                for &c in f.coords() {
                    h.f64(c);
                }
                if starts.len() < budget.restarts.div_ceil(2) {
                    if let Some(x) = ball_maximizer(&domain, f.coords()) {
                        starts.push(x);
                    }
                }
            }
        }
    }
    let mut rng = rng_for(budget.seed, "operator_norm", h.finish());
    while starts.len() < budget.restarts.max(1) {
        starts.push(unit_random(&domain, &mut rng));
    }
    let value = |x: &[f64]| norm_coords(out_exp, &poly.eval_coords(x));
    let results: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|mut x| {
            let mut f = value(&x);
            for _ in 0..budget.max_iters {
                let y = poly.eval_coords(&x);
                let Some(j) = norming_coords(out_exp, &y) else { break };
                let g = poly.gradient(&x, &j);
                let Some(target) = ball_maximizer(&domain, &g) else {
                    break;
                };
                let mut step = 1.0;
                let mut accepted = None;
                for _ in 0..40 {
                    let cand: Vec<f64> = x.iter().zip(&target).map(|(a, b)| a + step * (b - a)).collect();
                    let nrm = norm_coords(domain.exponent(), &cand);
                    if nrm > 0.0 {
                        let cand: Vec<f64> = cand.iter().map(|c| c / nrm).collect();
                        let fc = value(&cand);
                        if fc > f {
                            accepted = Some((fc, cand));
                            break;
                        }
                    }
                    step *= 0.5;
                }
                let Some((fc, cand)) = accepted else { break };
                let gain = fc - f;
                x = cand;
                f = fc;
                if gain <= budget.rel_tol * f {
                    break;
                }
            }
            (f, x)
        })
        .collect();
    let (value, x) = best_of(results);
    Ok(NormEstimate {
        value,
        exact: false,
        certificate: vec![Vector::new(domain, x)?],
    })
}
