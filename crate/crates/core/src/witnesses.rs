//! Extremal families: the diagonal tensor into a sup slice, the
//! cotype-driven polynomial into `ℓ_r`, the nonnegative even polynomial on
//! real spaces, and the identity.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::maps::{DenseTensor, HomogeneousPolynomial, MapRef, MultilinearMap};
use crate::spaces::{norming_functional, Exponent, SpaceDescriptor, SpaceFamily, Vector};
use crate::weak_norms::VectorFamily;

const CONSTRAINT_TOL: f64 = 1e-12;
/// Slack allowed on the certified operator-norm bound of a witness.
pub const NORM_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientConstraint {
    /// `Σ_j |a_j|^{r/p} = 1`
    SumRP { r: f64, p: f64 },
    /// `Σ_j |a_j|^{1/p} = 1`
    SumInvP { p: f64 },
}

impl CoefficientConstraint {
    fn exponent(self) -> f64 {
        match self {
            CoefficientConstraint::SumRP { r, p } => r / p,
            CoefficientConstraint::SumInvP { p } => 1.0 / p,
        }
    }
}

/// Witness coefficients `a₁, …, a_n` together with their normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCoefficients {
    a: Vec<f64>,
    constraint: CoefficientConstraint,
}

impl WitnessCoefficients {
    pub fn new(a: Vec<f64>, constraint: CoefficientConstraint) -> Result<Self> {
        if a.is_empty() || a.iter().any(|x| !x.is_finite() || *x < 0.0) {
            bail!(
                Domain,
                "witness coefficients must be a nonempty list of nonnegative numbers"
            );
        }
        let e = constraint.exponent();
        let total: f64 = a.iter().map(|x| x.powf(e)).sum();
        if (total - 1.0).abs() > CONSTRAINT_TOL {
            bail!(
                Domain,
                "coefficients violate their normalization (Σ|a_j|^{e} = {total})"
            );
        }
        Ok(Self { a, constraint })
    }

    /// Equal coefficients `a_j = n^{-1/e}` meeting the constraint.
    pub fn equal(n: usize, constraint: CoefficientConstraint) -> Result<Self> {
        if n == 0 {
            bail!(Structural, "witness needs n ≥ 1");
        }
        let a = (n as f64).powf(-1.0 / constraint.exponent());
        Self::new(vec![a; n], constraint)
    }

    /// Rescales nonnegative raw weights onto the constraint surface.
    pub fn normalized(raw: &[f64], constraint: CoefficientConstraint) -> Result<Self> {
        let e = constraint.exponent();
        let total: f64 = raw.iter().map(|x| x.abs().powf(e)).sum();
        if !(total > 0.0) || !total.is_finite() {
            bail!(Degenerate, "cannot normalize an all-zero coefficient list");
        }
        let scale = total.powf(-1.0 / e);
        Self::new(raw.iter().map(|x| x.abs() * scale).collect(), constraint)
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn constraint(&self) -> CoefficientConstraint {
        self.constraint
    }
}

/// How polynomial witnesses choose the anchors `x_j` whose norming
/// functionals `x_j*` define the terms.
#[derive(Debug, Clone, PartialEq)]
pub enum AnchorStrategy {
    /// `e_1, …, e_n` of the domain.
    Basis,
    Custom(VectorFamily),
}

fn anchors_for(space: SpaceDescriptor, n: usize, strategy: &AnchorStrategy) -> Result<VectorFamily> {
    match strategy {
        AnchorStrategy::Basis => {
            if space.dim() < n {
                bail!(Structural, "{n} basis anchors need dimension ≥ {n}, got {space}");
            }
            VectorFamily::basis(space, n)
        }
        AnchorStrategy::Custom(family) => {
            if family.len() != n || family.space() != space {
                bail!(Structural, "custom anchors must be {n} vectors in {space}");
            }
            if family.vectors().iter().any(Vector::is_zero) {
                bail!(Degenerate, "anchors must be nonzero");
            }
            Ok(family.clone())
        }
    }
}

fn norming_functionals(space: SpaceDescriptor, anchors: &VectorFamily) -> Result<Vec<crate::spaces::Functional>> {
    anchors
        .vectors()
        .iter()
        .map(|x| {
            let f = norming_functional(&space, x)?;
            let nrm = x.norm();
            if (f.apply(x)? - nrm).abs() > CONSTRAINT_TOL * nrm || f.dual_norm() > 1.0 + CONSTRAINT_TOL {
                bail!(Domain, "norming functional failed to norm its anchor");
            }
            Ok(f)
        })
        .collect()
}

fn check_norm_bound(poly: &HomogeneousPolynomial) -> Result<()> {
    let bound = poly.certified_norm_bound().expect("witness bodies carry a bound");
    if bound > 1.0 + NORM_BOUND_TOL {
        bail!(Domain, "witness norm bound {bound} exceeds 1");
    }
    Ok(())
}

/// The diagonal `m`-linear map `(ℓ₂^n)^m → ℓ_∞^{n^m}`; its norm is 1.
pub fn tensor_witness(m: usize, n: usize, tuple_budget: u64) -> Result<MultilinearMap> {
    MultilinearMap::diagonal_c0(m, n, tuple_budget)
}

/// `P(x) = Σ_j |a_j|^{1/p} x_j*(x)^m e_j` into `ℓ_r^n`, with equal
/// coefficients `a_j = n^{-p/r}`. Returns the polynomial and its anchors.
pub fn cotype_witness(
    m: usize,
    p: f64,
    space_in: SpaceDescriptor,
    target_r: f64,
    n: usize,
    anchors: &AnchorStrategy,
) -> Result<(HomogeneousPolynomial, VectorFamily)> {
    let coefficients = WitnessCoefficients::equal(n, CoefficientConstraint::SumRP { r: target_r, p })?;
    cotype_witness_with(m, p, space_in, target_r, anchors, &coefficients)
}

/// [`cotype_witness`] with caller-chosen coefficients.
pub fn cotype_witness_with(
    m: usize,
    p: f64,
    space_in: SpaceDescriptor,
    target_r: f64,
    anchors: &AnchorStrategy,
    coefficients: &WitnessCoefficients,
) -> Result<(HomogeneousPolynomial, VectorFamily)> {
    if !(target_r.is_finite() && target_r >= 2.0) {
        bail!(Domain, "target exponent r must be finite and ≥ 2, got {target_r}");
    }
    if !(p > 0.0) || p >= target_r {
        bail!(Domain, "cotype witness needs 0 < p < r, got p = {p}, r = {target_r}");
    }
    match coefficients.constraint() {
        CoefficientConstraint::SumRP { r, p: cp } if r == target_r && cp == p => {}
        c => bail!(
            Domain,
            "coefficients normalized for {c:?}, expected r = {target_r}, p = {p}"
        ),
    }
    let n = coefficients.values().len();
    let anchors = anchors_for(space_in, n, anchors)?;
    let functionals = norming_functionals(space_in, &anchors)?;
    let target_space = SpaceDescriptor::lp(target_r, n)?;
    let targets = (0..n).map(|j| target_space.basis_vector(j)).collect();
    let poly = HomogeneousPolynomial::cotype_witness(
        m,
        space_in,
        target_space,
        coefficients.values().to_vec(),
        functionals,
        targets,
        p,
    )?;
    check_norm_bound(&poly)?;
    Ok((poly, anchors))
}

/// Scalar `P(x) = Σ_j |a_j|^{1/p} x_j*(x)^m` for even `m`, with equal
/// coefficients `a_j = n^{-p}`.
pub fn real_even_witness(
    m: usize,
    p: f64,
    space_in: SpaceDescriptor,
    n: usize,
    anchors: &AnchorStrategy,
) -> Result<(HomogeneousPolynomial, VectorFamily)> {
    let coefficients = WitnessCoefficients::equal(n, CoefficientConstraint::SumInvP { p })?;
    real_even_witness_with(m, p, space_in, anchors, &coefficients)
}

pub fn real_even_witness_with(
    m: usize,
    p: f64,
    space_in: SpaceDescriptor,
    anchors: &AnchorStrategy,
    coefficients: &WitnessCoefficients,
) -> Result<(HomogeneousPolynomial, VectorFamily)> {
    if m == 0 || m % 2 != 0 {
        bail!(Domain, "real even witness needs an even degree, got {m}");
    }
    if !(p > 0.0 && p < 1.0) {
        bail!(Domain, "real even witness needs 0 < p < 1, got {p}");
    }
    match coefficients.constraint() {
        CoefficientConstraint::SumInvP { p: cp } if cp == p => {}
        c => bail!(Domain, "coefficients normalized for {c:?}, expected p = {p}"),
    }
    let n = coefficients.values().len();
    let anchors = anchors_for(space_in, n, anchors)?;
    let functionals = norming_functionals(space_in, &anchors)?;
    let poly = HomogeneousPolynomial::real_even_witness(m, space_in, coefficients.values().to_vec(), functionals, p)?;
    check_norm_bound(&poly)?;
    Ok((poly, anchors))
}

/// `id_E` as a one-slot dense map.
pub fn identity_witness(space: SpaceDescriptor) -> Result<MultilinearMap> {
    MultilinearMap::dense(vec![space], space, DenseTensor::identity(space.dim())?)
}

/// A space whose dimension may be left for the experiment grid to fill.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceTemplate {
    pub family: SpaceFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl SpaceTemplate {
    pub fn resolve(&self, n: usize) -> Result<SpaceDescriptor> {
        let dim = self.dim.unwrap_or(n);
        match self.family {
            SpaceFamily::SequenceLp => {
                let p = self
                    .p
                    .ok_or_else(|| Error::Parse("lp space needs an exponent \"p\"".into()))?;
                SpaceDescriptor::sequence(p, dim)
            }
            SpaceFamily::SupSlice => SpaceDescriptor::sup(dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorSpec {
    #[default]
    Basis,
    Custom(Vec<Vec<f64>>),
}

/// Serialized witness parameters,
/// `{kind, m, p, n, space, anchors?}`. Omitted `n` (and omitted space
/// dimensions) are supplied by the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessSpec {
    Tensor {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Identity {
        space: SpaceTemplate,
    },
    Cotype {
        m: usize,
        p: f64,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        space: SpaceTemplate,
        #[serde(default)]
        anchors: AnchorSpec,
    },
    RealEven {
        m: usize,
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        space: SpaceTemplate,
        #[serde(default)]
        anchors: AnchorSpec,
    },
}

/// A constructed witness.
#[derive(Debug, Clone)]
pub enum Witness {
    Multilinear(MultilinearMap),
    Polynomial {
        poly: HomogeneousPolynomial,
        anchors: VectorFamily,
    },
}

impl Witness {
    pub fn as_map(&self) -> MapRef<'_> {
        match self {
            Witness::Multilinear(t) => MapRef::Multilinear(t),
            Witness::Polynomial { poly, .. } => MapRef::Polynomial(poly),
        }
    }

    pub fn anchors(&self) -> Option<&VectorFamily> {
        match self {
            Witness::Multilinear(_) => None,
            Witness::Polynomial { anchors, .. } => Some(anchors),
        }
    }
}

impl WitnessSpec {
    /// Builds the witness for grid size `n`.
    pub fn instantiate(&self, n: usize, tuple_budget: u64) -> Result<Witness> {
        let anchors = |spec: &AnchorSpec, space: SpaceDescriptor| -> Result<AnchorStrategy> {
            Ok(match spec {
                AnchorSpec::Basis => AnchorStrategy::Basis,
                AnchorSpec::Custom(rows) => AnchorStrategy::Custom(VectorFamily::from_rows(space, rows.clone())?),
            })
        };
        match self {
            WitnessSpec::Tensor { m, n: fixed } => Ok(Witness::Multilinear(tensor_witness(
                *m,
                fixed.unwrap_or(n),
                tuple_budget,
            )?)),
            WitnessSpec::Identity { space } => Ok(Witness::Multilinear(identity_witness(space.resolve(n)?)?)),
            WitnessSpec::Cotype {
                m,
                p,
                r,
                n: fixed,
                space,
                anchors: a,
            } => {
                let n = fixed.unwrap_or(n);
                let space = space.resolve(n)?;
                let (poly, anchors) = cotype_witness(*m, *p, space, *r, n, &anchors(a, space)?)?;
                Ok(Witness::Polynomial { poly, anchors })
            }
            WitnessSpec::RealEven {
                m,
                p,
                n: fixed,
                space,
                anchors: a,
            } => {
                let n = fixed.unwrap_or(n);
                let space = space.resolve(n)?;
                let (poly, anchors) = real_even_witness(*m, *p, space, n, &anchors(a, space)?)?;
                Ok(Witness::Polynomial { poly, anchors })
            }
        }
    }

    /// Degree `m` of the witness.
    pub fn degree(&self) -> usize {
        match self {
            WitnessSpec::Tensor { m, .. } | WitnessSpec::Cotype { m, .. } | WitnessSpec::RealEven { m, .. } => *m,
            WitnessSpec::Identity { .. } => 1,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, WitnessSpec::Cotype { .. } | WitnessSpec::RealEven { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{eval_polynomial, mixed_power_sum, operator_norm};
    use crate::SearchBudget;
    use approx::assert_relative_eq;

    fn l(p: f64, n: usize) -> SpaceDescriptor {
        SpaceDescriptor::lp(p, n).unwrap()
    }

    #[test]
    fn equal_coefficients_normalize() {
        let c = WitnessCoefficients::equal(4, CoefficientConstraint::SumRP { r: 2.0, p: 0.5 }).unwrap();
        assert_relative_eq!(c.values()[0], 4f64.powf(-0.25), max_relative = 1e-15);
        let c = WitnessCoefficients::equal(3, CoefficientConstraint::SumInvP { p: 0.5 }).unwrap();
        assert_relative_eq!(c.values()[0], 3f64.powf(-0.5), max_relative = 1e-15);
        let sum: f64 = c.values().iter().map(|a| a.powf(2.0)).sum();
        assert_relative_eq!(sum, 1.0, max_relative = 1e-15);
        assert!(WitnessCoefficients::new(vec![0.5, 0.5], CoefficientConstraint::SumInvP { p: 0.5 }).is_err());
    }

    #[test]
    fn tensor_witness_numerators() {
        let t = tensor_witness(2, 3, 1_000).unwrap();
        let fams = vec![VectorFamily::basis(l(2.0, 3), 3).unwrap(); 2];
        assert_relative_eq!(
            mixed_power_sum(&t, &fams, 2.0, 1_000).unwrap(),
            3.0,
            max_relative = 1e-12
        );
        let t = tensor_witness(1, 5, 1_000).unwrap();
        let fams = vec![VectorFamily::basis(l(2.0, 5), 5).unwrap()];
        assert_relative_eq!(
            mixed_power_sum(&t, &fams, 2.0, 1_000).unwrap(),
            5f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn cotype_witness_domain_errors() {
        let sp = l(1.0, 4);
        assert!(matches!(
            cotype_witness(2, 2.0, sp, 2.0, 4, &AnchorStrategy::Basis),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            cotype_witness(2, 3.0, sp, 2.5, 4, &AnchorStrategy::Basis),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            cotype_witness(2, 0.5, sp, 1.5, 4, &AnchorStrategy::Basis),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            cotype_witness(2, 0.5, sp, 2.0, 5, &AnchorStrategy::Basis),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn real_even_witness_domain_errors() {
        let sp = l(2.0, 4);
        assert!(matches!(
            real_even_witness(3, 0.5, sp, 4, &AnchorStrategy::Basis),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            real_even_witness(2, 1.0, sp, 4, &AnchorStrategy::Basis),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            real_even_witness(2, 0.0, sp, 4, &AnchorStrategy::Basis),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cotype_witness_bounds_hold() {
        for (p, r) in [(0.5, 2.0), (1.0, 3.0), (2.5, 4.0)] {
            let (poly, anchors) = cotype_witness(2, p, l(1.5, 5), r, 5, &AnchorStrategy::Basis).unwrap();
            assert!(poly.certified_norm_bound().unwrap() <= 1.0 + 1e-12);
            let est = operator_norm(MapRef::Polynomial(&poly), &SearchBudget::default()).unwrap();
            assert!(est.value <= 1.0 + NORM_BOUND_TOL);
            let weights = poly.witness_weights().unwrap();
            for (k, x) in anchors.vectors().iter().enumerate() {
                let out = eval_polynomial(&poly, x).unwrap().norm();
                assert!(out >= weights[k] * x.norm().powi(2) - 1e-10);
            }
        }
    }

    #[test]
    fn real_even_witness_is_nonnegative_and_bounded() {
        let (poly, _) = real_even_witness(4, 0.4, l(3.0, 4), 4, &AnchorStrategy::Basis).unwrap();
        let x = Vector::new(l(3.0, 4), vec![0.3, -1.2, 0.7, -0.1]).unwrap();
        assert!(eval_polynomial(&poly, &x).unwrap().coords()[0] >= 0.0);
        let est = operator_norm(MapRef::Polynomial(&poly), &SearchBudget::default()).unwrap();
        assert!(est.value <= 1.0 + NORM_BOUND_TOL);
    }

    #[test]
    fn witness_spec_json() {
        let spec: WitnessSpec = serde_json::from_str(r#"{"kind":"tensor","m":2}"#).unwrap();
        assert!(matches!(spec.instantiate(4, 1_000).unwrap(), Witness::Multilinear(_)));
        let spec: WitnessSpec = serde_json::from_str(r#"{"kind":"identity","space":{"family":"lp","p":2}}"#).unwrap();
        match spec.instantiate(6, 1_000).unwrap() {
            Witness::Multilinear(t) => assert_eq!(t.domain()[0].dim(), 6),
            _ => panic!("identity is multilinear"),
        }
        let spec: WitnessSpec = serde_json::from_str(
            r#"{"kind":"real_even","m":2,"p":0.5,"n":2,"space":{"family":"lp","p":2,"dim":2},"anchors":{"custom":[[1,1],[1,-1]]}}"#,
        )
        .unwrap();
        let w = spec.instantiate(99, 1_000).unwrap();
        assert_eq!(w.anchors().unwrap().len(), 2);
        let round: WitnessSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(round, spec);
        assert!(serde_json::from_str::<WitnessSpec>(r#"{"kind":"tensor","m":2,"bogus":1}"#).is_err());
    }
}
