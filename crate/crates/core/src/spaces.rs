//! Finite-dimensional normed spaces: `ℓ_p^d` sequence spaces and sup-norm
//! slices standing in for finite sections of `c₀` and `C(K)`.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};

/// An extended-real exponent in `(0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value <= 0.0 {
            bail!(Domain, "exponent must be positive, got {value}");
        }
        if value.is_infinite() {
            Ok(Exponent::Infinite)
        } else {
            Ok(Exponent::Finite(value))
        }
    }

    /// The exponent as an `f64` (`f64::INFINITY` for `∞`).
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Exponent::new(p).map_err(de::Error::custom),
            Raw::Text(s) if s == "inf" => Ok(Exponent::Infinite),
            Raw::Text(s) => Err(de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

/// Conjugate exponent `p*` with `1/p + 1/p* = 1`.
pub fn dual_exponent(p: Exponent) -> Result<Exponent> {
    match p {
        Exponent::Infinite => Ok(Exponent::Finite(1.0)),
        Exponent::Finite(v) if v < 1.0 => bail!(Domain, "conjugate exponent undefined for p = {v} < 1"),
        Exponent::Finite(v) if v == 1.0 => Ok(Exponent::Infinite),
        Exponent::Finite(v) => Ok(Exponent::Finite(v / (v - 1.0))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceFamily {
    #[serde(rename = "lp")]
    SequenceLp,
    #[serde(rename = "sup")]
    SupSlice,
}

/// A finite-dimensional normed space.
///
/// The cotype is fixed at construction: `max(2, p)` for `ℓ_p` with finite
/// `p`, and `∞` for `ℓ_∞` and sup slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpec", into = "SpaceSpec")]
pub struct SpaceDescriptor {
    family: SpaceFamily,
    exponent: Exponent,
    dim: usize,
    cotype: Exponent,
}

impl SpaceDescriptor {
    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        Self::sequence(Exponent::new(p)?, dim)
    }

    pub fn sequence(exponent: Exponent, dim: usize) -> Result<Self> {
        if dim == 0 {
            bail!(Structural, "space dimension must be at least 1");
        }
        let cotype = match exponent {
            Exponent::Finite(p) if p < 1.0 => bail!(Domain, "ℓ_p needs p ≥ 1, got {p}"),
            Exponent::Finite(p) => Exponent::Finite(p.max(2.0)),
            Exponent::Infinite => Exponent::Infinite,
        };
        Ok(Self {
            family: SpaceFamily::SequenceLp,
            exponent,
            dim,
            cotype,
        })
    }

    pub fn sup(dim: usize) -> Result<Self> {
        if dim == 0 {
            bail!(Structural, "space dimension must be at least 1");
        }
        Ok(Self {
            family: SpaceFamily::SupSlice,
            exponent: Exponent::Infinite,
            dim,
            cotype: Exponent::Infinite,
        })
    }

    pub fn family(&self) -> SpaceFamily {
        self.family
    }

    /// The exponent governing the norm (`∞` for sup slices).
    pub fn exponent(&self) -> Exponent {
        match self.family {
            SpaceFamily::SequenceLp => self.exponent,
            SpaceFamily::SupSlice => Exponent::Infinite,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cotype(&self) -> Exponent {
        self.cotype
    }

    /// Same family and exponent, different dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        match self.family {
            SpaceFamily::SequenceLp => Self::sequence(self.exponent, dim),
            SpaceFamily::SupSlice => Self::sup(dim),
        }
    }

    /// The space whose norm is the dual norm on functionals of `self`.
    pub fn dual(&self) -> Self {
        let exponent = dual_exponent(self.exponent()).expect("space exponents are ≥ 1");
        Self::sequence(exponent, self.dim).expect("dimension already validated")
    }

    pub fn is_hilbert(&self) -> bool {
        self.family == SpaceFamily::SequenceLp && self.exponent == Exponent::Finite(2.0)
    }

    /// True for `ℓ_1`, whose dual ball is the cube.
    pub fn is_l1(&self) -> bool {
        self.family == SpaceFamily::SequenceLp && self.exponent == Exponent::Finite(1.0)
    }

    /// True for `ℓ_∞` and sup slices, whose dual ball is the cross-polytope.
    pub fn is_sup_normed(&self) -> bool {
        self.exponent().is_infinite()
    }

    pub fn basis_vector(&self, index: usize) -> Vector {
        let mut coords = vec![0.0; self.dim];
        coords[index % self.dim] = 1.0;
        Vector { coords, space: *self }
    }

    pub fn zero(&self) -> Vector {
        Vector {
            coords: vec![0.0; self.dim],
            space: *self,
        }
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            SpaceFamily::SequenceLp => write!(f, "l{}^{}", self.exponent, self.dim),
            SpaceFamily::SupSlice => write!(f, "sup^{}", self.dim),
        }
    }
}

/// Wire form `{"family": "lp"|"sup", "p": number|"inf", "dim": int}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub family: SpaceFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    pub dim: usize,
}

impl TryFrom<SpaceSpec> for SpaceDescriptor {
    type Error = Error;

    fn try_from(spec: SpaceSpec) -> Result<Self> {
        match spec.family {
            SpaceFamily::SequenceLp => {
                let p = spec
                    .p
                    .ok_or_else(|| Error::Parse("lp space needs an exponent \"p\"".into()))?;
                SpaceDescriptor::sequence(p, spec.dim)
            }
            SpaceFamily::SupSlice => SpaceDescriptor::sup(spec.dim),
        }
    }
}

impl From<SpaceDescriptor> for SpaceSpec {
    fn from(space: SpaceDescriptor) -> Self {
        let p = match space.family {
            SpaceFamily::SequenceLp => Some(space.exponent),
            SpaceFamily::SupSlice => Some(Exponent::Infinite),
        };
        SpaceSpec {
            family: space.family,
            p,
            dim: space.dim,
        }
    }
}

/// An element of a [`SpaceDescriptor`].
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
    space: SpaceDescriptor,
}

impl Vector {
    pub fn new(space: SpaceDescriptor, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            bail!(
                Structural,
                "vector has {} coordinates but {space} has dimension {}",
                coords.len(),
                space.dim()
            );
        }
        if coords.iter().any(|c| !c.is_finite()) {
            bail!(Domain, "vector coordinates must be finite");
        }
        Ok(Self { coords, space })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn norm(&self) -> f64 {
        norm_coords(self.space.exponent(), &self.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector {
            coords: self.coords.iter().map(|c| c * factor).collect(),
            space: self.space,
        }
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// A linear functional on a space, stored by its coordinates against the
/// canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    coords: Vec<f64>,
    space: SpaceDescriptor,
}

impl Functional {
    pub fn new(space: SpaceDescriptor, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            bail!(
                Structural,
                "functional has {} coordinates but {space} has dimension {}",
                coords.len(),
                space.dim()
            );
        }
        if coords.iter().any(|c| !c.is_finite()) {
            bail!(Domain, "functional coordinates must be finite");
        }
        Ok(Self { coords, space })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    /// Norm in the dual space.
    pub fn dual_norm(&self) -> f64 {
        norm_coords(self.space.dual().exponent(), &self.coords)
    }

    pub fn apply(&self, v: &Vector) -> Result<f64> {
        if v.coords.len() != self.coords.len() {
            bail!(
                Structural,
                "functional on {} applied to a vector of {}",
                self.space,
                v.space
            );
        }
        Ok(dot(&self.coords, &v.coords))
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ℓ_p` norm of raw coordinates, scaled by the largest modulus so that
/// powers neither overflow nor underflow.
pub fn norm_coords(p: Exponent, coords: &[f64]) -> f64 {
    let max = coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let p = match p {
        Exponent::Infinite => return max,
        Exponent::Finite(p) => p,
    };
    if max == 0.0 {
        return 0.0;
    }
    let sum: f64 = if p == 1.0 {
        coords.iter().map(|c| c.abs() / max).sum()
    } else if p == 2.0 {
        coords.iter().map(|c| (c / max) * (c / max)).sum()
    } else {
        coords.iter().map(|c| (c.abs() / max).powf(p)).sum()
    };
    if p == 1.0 {
        max * sum
    } else if p == 2.0 {
        max * sum.sqrt()
    } else {
        max * sum.powf(1.0 / p)
    }
}

pub fn norm(space: &SpaceDescriptor, v: &Vector) -> Result<f64> {
    if v.space.dim() != space.dim() {
        bail!(Structural, "vector of dimension {} measured in {space}", v.space.dim());
    }
    Ok(norm_coords(space.exponent(), &v.coords))
}

/// Coordinates of a unit functional `φ` with `φ(v) = ‖v‖` for the norm with
/// exponent `p`. Returns `None` for the zero vector.
pub(crate) fn norming_coords(p: Exponent, v: &[f64]) -> Option<Vec<f64>> {
    let norm = norm_coords(p, v);
    if norm == 0.0 {
        return None;
    }
    let phi = match p {
        Exponent::Infinite => {
            // lowest index among the maximizers
            let (idx, _) = v.iter().enumerate().fold(
                (0, -1.0),
                |(bi, bv), (i, c)| if c.abs() > bv { (i, c.abs()) } else { (bi, bv) },
            );
            let mut phi = vec![0.0; v.len()];
            phi[idx] = v[idx].signum();
            phi
        }
        Exponent::Finite(p) if p == 1.0 => v.iter().map(|&c| if c == 0.0 { 0.0 } else { c.signum() }).collect(),
        Exponent::Finite(p) => v
            .iter()
            .map(|&c| {
                if c == 0.0 {
                    0.0
                } else {
                    c.signum() * (c.abs() / norm).powf(p - 1.0)
                }
            })
            .collect(),
    };
    Some(phi)
}

pub fn norming_functional(space: &SpaceDescriptor, v: &Vector) -> Result<Functional> {
    if v.space.dim() != space.dim() {
        bail!(Structural, "vector of dimension {} in {space}", v.space.dim());
    }
    match norming_coords(space.exponent(), &v.coords) {
        Some(coords) => Ok(Functional { coords, space: *space }),
        None => bail!(Degenerate, "the zero vector has no norming functional"),
    }
}

/// The point of the unit ball of `space` maximizing `⟨g, x⟩`; `None` when
/// `g = 0`.
pub(crate) fn ball_maximizer(space: &SpaceDescriptor, g: &[f64]) -> Option<Vec<f64>> {
    norming_coords(space.dual().exponent(), g)
}
