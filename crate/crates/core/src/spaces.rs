//! Formal descriptors of the finite CW complexes used by the verifiers and
//! the maps between them.
//!
//! A space is an ordered product of atoms: powers of the closed unit disk in
//! `C` (contractible, real dimension `2d`), the 2-sphere, and complex
//! projective spaces `CP^n`. Maps are coordinate projections, constant maps,
//! or composites of those; every composite normalizes to a single projection
//! or constant.

use crate::exact::uint_flex;
use crate::{Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AtomKind {
    /// `d`-fold product of the unit disk in `C`.
    Disk2Power(BigUint),
    Sphere2,
    /// Complex projective space of complex dimension `n >= 1`.
    ComplexProj(BigUint),
}

impl AtomKind {
    pub fn real_dimension(&self) -> BigUint {
        match self {
            AtomKind::Disk2Power(d) => d * 2u32,
            AtomKind::Sphere2 => BigUint::from(2u32),
            AtomKind::ComplexProj(n) => n * 2u32,
        }
    }

    /// Nilpotency cap of the degree-2 generator of this atom: the smallest
    /// exponent at which its power vanishes. Disks carry no generator.
    pub fn generator_cap(&self) -> Option<BigUint> {
        match self {
            AtomKind::Disk2Power(_) => None,
            AtomKind::Sphere2 => Some(BigUint::from(2u32)),
            AtomKind::ComplexProj(n) => Some(n + 1u32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceAtom {
    pub kind: AtomKind,
    pub label: String,
}

impl SpaceAtom {
    pub fn disk(d: impl Into<BigUint>, label: impl Into<String>) -> Self {
        SpaceAtom { kind: AtomKind::Disk2Power(d.into()), label: label.into() }
    }

    pub fn sphere(label: impl Into<String>) -> Self {
        SpaceAtom { kind: AtomKind::Sphere2, label: label.into() }
    }

    pub fn cp(n: impl Into<BigUint>, label: impl Into<String>) -> Self {
        SpaceAtom { kind: AtomKind::ComplexProj(n.into()), label: label.into() }
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            AtomKind::ComplexProj(n) if n.is_zero() => {
                Err(Error::Parse(format!("factor {:?}: CP^n needs n >= 1", self.label)))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SpaceAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AtomKind::Disk2Power(d) => write!(f, "D^{d}"),
            AtomKind::Sphere2 => write!(f, "S^2"),
            AtomKind::ComplexProj(n) => write!(f, "CP^{n}"),
        }
    }
}

/// An ordered finite product of atoms. Factor order is part of the identity
/// of the space: pullbacks refer to factors by position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    factors: Arc<Vec<SpaceAtom>>,
}

impl SpaceDescriptor {
    pub fn new(factors: Vec<SpaceAtom>) -> Result<Self> {
        for atom in &factors {
            atom.validate()?;
        }
        Ok(SpaceDescriptor { factors: Arc::new(factors) })
    }

    /// The one-point space.
    pub fn point() -> Self {
        SpaceDescriptor { factors: Arc::new(Vec::new()) }
    }

    /// `(S^2)^n` with factors labelled `s1, ..., sn`.
    pub fn sphere_power(n: usize) -> Self {
        let factors = (1..=n).map(|i| SpaceAtom::sphere(format!("s{i}"))).collect();
        SpaceDescriptor { factors: Arc::new(factors) }
    }

    pub fn factors(&self) -> &[SpaceAtom] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> Option<&SpaceAtom> {
        self.factors.get(index)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn real_dimension(&self) -> BigUint {
        self.factors.iter().map(|a| a.kind.real_dimension()).sum()
    }

    /// `ceil(dim / 2)`.
    pub fn half_dimension_ceil(&self) -> BigUint {
        let (q, r) = self.real_dimension().div_rem(&BigUint::from(2u32));
        if r.is_zero() {
            q
        } else {
            q + BigUint::one()
        }
    }

    /// Cartesian product, factors of `self` first.
    pub fn product(&self, other: &SpaceDescriptor) -> SpaceDescriptor {
        let mut factors = Vec::with_capacity(self.len() + other.len());
        factors.extend(self.factors.iter().cloned());
        factors.extend(other.factors.iter().cloned());
        SpaceDescriptor { factors: Arc::new(factors) }
    }

    /// Appends one factor.
    pub fn with_factor(&self, atom: SpaceAtom) -> Result<SpaceDescriptor> {
        atom.validate()?;
        let mut factors = (*self.factors).clone();
        factors.push(atom);
        Ok(SpaceDescriptor { factors: Arc::new(factors) })
    }

    /// Total disk power, i.e. the `d` of the contractible part `D^d`.
    pub fn disk_power(&self) -> BigUint {
        self.factors
            .iter()
            .filter_map(|a| match &a.kind {
                AtomKind::Disk2Power(d) => Some(d.clone()),
                _ => None,
            })
            .sum()
    }

    /// Same sequence of atom kinds, labels ignored.
    pub fn same_shape(&self, other: &SpaceDescriptor) -> bool {
        self.len() == other.len() && self.factors.iter().zip(other.factors.iter()).all(|(a, b)| a.kind == b.kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("space descriptors always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("pt");
        }
        for (i, atom) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

/// A point of some space, carried only as an opaque label. `coords` records
/// which factors of the labelled point survive after projections were
/// applied to it, so that composites normalize to equal values regardless of
/// bracketing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLabel {
    pub label: String,
    pub coords: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// Target factor `i` is source factor `indices[i]`; indices are distinct.
    CoordinateProjection(Vec<usize>),
    ConstantMap(PointLabel),
    /// Maps in order of application: `maps[0]` is applied first.
    Composite(Vec<SpaceMap>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceMap {
    source: SpaceDescriptor,
    target: SpaceDescriptor,
    kind: MapKind,
}

impl SpaceMap {
    /// Projection onto the selected factors; the target is read off the source.
    pub fn projection(source: &SpaceDescriptor, indices: Vec<usize>) -> Result<SpaceMap> {
        check_indices(source, &indices)?;
        let factors = indices.iter().map(|&i| source.factors[i].clone()).collect();
        let target = SpaceDescriptor { factors: Arc::new(factors) };
        Ok(SpaceMap { source: source.clone(), target, kind: MapKind::CoordinateProjection(indices) })
    }

    /// Projection onto an existing descriptor whose atoms must match the
    /// selected source factors kind for kind.
    pub fn projection_onto(source: &SpaceDescriptor, target: &SpaceDescriptor, indices: Vec<usize>) -> Result<SpaceMap> {
        check_indices(source, &indices)?;
        if indices.len() != target.len() {
            return Err(Error::InvalidMap(format!(
                "projection selects {} factors but the target has {}",
                indices.len(),
                target.len()
            )));
        }
        for (pos, &i) in indices.iter().enumerate() {
            if source.factors[i].kind != target.factors[pos].kind {
                return Err(Error::InvalidMap(format!(
                    "source factor {i} ({}) does not match target factor {pos} ({})",
                    source.factors[i], target.factors[pos]
                )));
            }
        }
        Ok(SpaceMap {
            source: source.clone(),
            target: target.clone(),
            kind: MapKind::CoordinateProjection(indices),
        })
    }

    pub fn identity(space: &SpaceDescriptor) -> SpaceMap {
        SpaceMap {
            source: space.clone(),
            target: space.clone(),
            kind: MapKind::CoordinateProjection((0..space.len()).collect()),
        }
    }

    pub fn constant(source: &SpaceDescriptor, target: &SpaceDescriptor, label: impl Into<String>) -> SpaceMap {
        let point = PointLabel { label: label.into(), coords: (0..target.len()).collect() };
        SpaceMap { source: source.clone(), target: target.clone(), kind: MapKind::ConstantMap(point) }
    }

    /// Unnormalized composite; `maps[0]` is applied first.
    pub fn composite(maps: Vec<SpaceMap>) -> Result<SpaceMap> {
        let (first, last) = match (maps.first(), maps.last()) {
            (Some(first), Some(last)) => (first.source.clone(), last.target.clone()),
            _ => return Err(Error::InvalidMap("empty composite".into())),
        };
        for pair in maps.windows(2) {
            if pair[0].target != pair[1].source {
                return Err(Error::ChainMismatch(format!(
                    "target {} does not equal source {}",
                    pair[0].target, pair[1].source
                )));
            }
        }
        Ok(SpaceMap { source: first, target: last, kind: MapKind::Composite(maps) })
    }

    pub fn source(&self) -> &SpaceDescriptor {
        &self.source
    }

    pub fn target(&self) -> &SpaceDescriptor {
        &self.target
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.normalize().kind, MapKind::ConstantMap(_))
    }

    /// Folds composites down to a single projection or constant.
    pub fn normalize(&self) -> SpaceMap {
        match &self.kind {
            MapKind::Composite(maps) => {
                let mut acc = maps[0].normalize();
                for next in &maps[1..] {
                    acc = compose_normal(&next.normalize(), &acc);
                }
                acc
            }
            _ => self.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("space maps always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `f ∘ g` (apply `g`, then `f`), normalized.
pub fn compose(f: &SpaceMap, g: &SpaceMap) -> Result<SpaceMap> {
    if g.target != f.source {
        return Err(Error::ChainMismatch(format!("target {} does not equal source {}", g.target, f.source)));
    }
    Ok(compose_normal(&f.normalize(), &g.normalize()))
}

fn compose_normal(f: &SpaceMap, g: &SpaceMap) -> SpaceMap {
    let kind = match (&f.kind, &g.kind) {
        (MapKind::ConstantMap(p), _) => MapKind::ConstantMap(p.clone()),
        (MapKind::CoordinateProjection(outer), MapKind::CoordinateProjection(inner)) => {
            MapKind::CoordinateProjection(outer.iter().map(|&i| inner[i]).collect())
        }
        (MapKind::CoordinateProjection(outer), MapKind::ConstantMap(p)) => MapKind::ConstantMap(PointLabel {
            label: p.label.clone(),
            coords: outer.iter().map(|&i| p.coords[i]).collect(),
        }),
        _ => unreachable!("compose_normal takes normalized maps"),
    };
    SpaceMap { source: g.source.clone(), target: f.target.clone(), kind }
}

fn check_indices(source: &SpaceDescriptor, indices: &[usize]) -> Result<()> {
    let mut seen = vec![false; source.len()];
    for &i in indices {
        match seen.get_mut(i) {
            None => {
                return Err(Error::InvalidMap(format!(
                    "factor index {i} out of range for a space with {} factors",
                    source.len()
                )))
            }
            Some(true) => return Err(Error::InvalidMap(format!("factor index {i} selected twice"))),
            Some(slot) => *slot = true,
        }
    }
    Ok(())
}

// Wire formats.

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum AtomWire {
    #[serde(rename = "disk")]
    Disk {
        #[serde(with = "uint_flex")]
        d: BigUint,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    #[serde(rename = "s2")]
    Sphere {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    #[serde(rename = "cp")]
    Cp {
        #[serde(with = "uint_flex")]
        n: BigUint,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceWire {
    factors: Vec<AtomWire>,
}

impl Serialize for SpaceDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let factors = self
            .factors
            .iter()
            .map(|a| {
                let label = Some(a.label.clone());
                match &a.kind {
                    AtomKind::Disk2Power(d) => AtomWire::Disk { d: d.clone(), label },
                    AtomKind::Sphere2 => AtomWire::Sphere { label },
                    AtomKind::ComplexProj(n) => AtomWire::Cp { n: n.clone(), label },
                }
            })
            .collect();
        SpaceWire { factors }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpaceDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SpaceWire::deserialize(d)?;
        let factors = wire
            .factors
            .into_iter()
            .enumerate()
            .map(|(i, w)| match w {
                AtomWire::Disk { d, label } => SpaceAtom::disk(d, label.unwrap_or_else(|| default_label("disk", i))),
                AtomWire::Sphere { label } => SpaceAtom::sphere(label.unwrap_or_else(|| default_label("s2", i))),
                AtomWire::Cp { n, label } => SpaceAtom::cp(n, label.unwrap_or_else(|| default_label("cp", i))),
            })
            .collect();
        SpaceDescriptor::new(factors).map_err(serde::de::Error::custom)
    }
}

fn default_label(tag: &str, position: usize) -> String {
    format!("{tag}{}", position + 1)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum MapKindWire {
    #[serde(rename = "proj")]
    Projection { indices: Vec<usize> },
    #[serde(rename = "const")]
    Constant { point: PointLabel },
    #[serde(rename = "composite")]
    Composite { maps: Vec<SpaceMapWire> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceMapWire {
    source: SpaceDescriptor,
    target: SpaceDescriptor,
    map: MapKindWire,
}

impl From<&SpaceMap> for SpaceMapWire {
    fn from(m: &SpaceMap) -> Self {
        let map = match &m.kind {
            MapKind::CoordinateProjection(indices) => MapKindWire::Projection { indices: indices.clone() },
            MapKind::ConstantMap(point) => MapKindWire::Constant { point: point.clone() },
            MapKind::Composite(maps) => MapKindWire::Composite { maps: maps.iter().map(SpaceMapWire::from).collect() },
        };
        SpaceMapWire { source: m.source.clone(), target: m.target.clone(), map }
    }
}

impl TryFrom<SpaceMapWire> for SpaceMap {
    type Error = Error;

    fn try_from(w: SpaceMapWire) -> Result<SpaceMap> {
        match w.map {
            MapKindWire::Projection { indices } => SpaceMap::projection_onto(&w.source, &w.target, indices),
            MapKindWire::Constant { point } => {
                // Coordinates index factors of the space the point was taken in;
                // only their count is checkable here.
                if point.coords.len() != w.target.len() {
                    return Err(Error::InvalidMap("constant point coordinates do not match the target".into()));
                }
                Ok(SpaceMap { source: w.source, target: w.target, kind: MapKind::ConstantMap(point) })
            }
            MapKindWire::Composite { maps } => {
                let maps = maps.into_iter().map(SpaceMap::try_from).collect::<Result<Vec<_>>>()?;
                let composite = SpaceMap::composite(maps)?;
                if composite.source != w.source || composite.target != w.target {
                    return Err(Error::ChainMismatch("composite endpoints disagree with the declared ones".into()));
                }
                Ok(composite)
            }
        }
    }
}

impl Serialize for SpaceMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceMapWire::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpaceMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SpaceMapWire::deserialize(d)?;
        SpaceMap::try_from(wire).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2n(n: usize) -> SpaceDescriptor {
        SpaceDescriptor::sphere_power(n)
    }

    #[test]
    fn dimensions_of_basic_spaces() {
        assert_eq!(s2n(3).real_dimension(), BigUint::from(6u32));
        let disk = SpaceDescriptor::new(vec![SpaceAtom::disk(5u32, "d")]).unwrap();
        assert_eq!(disk.real_dimension(), BigUint::from(10u32));
        assert!(SpaceDescriptor::point().real_dimension().is_zero());
    }

    #[test]
    fn type_two_stage_dimension_by_direct_summation() {
        // D^2 x CP^2 x CP^8 x CP^36: kappa(2, j) = 2 j j! for j = 1, 2, 3.
        let x = SpaceDescriptor::new(vec![
            SpaceAtom::disk(2u32, "d"),
            SpaceAtom::cp(2u32, "a"),
            SpaceAtom::cp(8u32, "b"),
            SpaceAtom::cp(36u32, "c"),
        ])
        .unwrap();
        assert_eq!(x.real_dimension(), BigUint::from(96u32));
        assert_eq!(x.half_dimension_ceil(), BigUint::from(48u32));
    }

    #[test]
    fn cp_zero_is_rejected() {
        assert!(SpaceDescriptor::new(vec![SpaceAtom::cp(0u32, "bad")]).is_err());
        assert!(SpaceDescriptor::from_json(r#"{"factors":[{"kind":"cp","n":0}]}"#).is_err());
    }

    #[test]
    fn projection_compositions() {
        let x = s2n(3);
        let g = SpaceMap::projection(&x, vec![0, 1]).unwrap();
        let f = SpaceMap::projection(g.target(), vec![0]).unwrap();
        let fg = compose(&f, &g).unwrap();
        assert_eq!(fg.kind(), &MapKind::CoordinateProjection(vec![0]));

        // proj{2} ∘ proj{1,3} = proj{3} (one-based in prose, zero-based here)
        let g = SpaceMap::projection(&x, vec![0, 2]).unwrap();
        let f = SpaceMap::projection(g.target(), vec![1]).unwrap();
        assert_eq!(compose(&f, &g).unwrap().kind(), &MapKind::CoordinateProjection(vec![2]));
    }

    #[test]
    fn constants_absorb() {
        let x = s2n(2);
        let g = SpaceMap::projection(&x, vec![0]).unwrap();
        let c = SpaceMap::constant(g.target(), &s2n(1), "p");
        let cg = compose(&c, &g).unwrap();
        match cg.kind() {
            MapKind::ConstantMap(p) => assert_eq!(p.label, "p"),
            other => panic!("expected constant, got {other:?}"),
        }
        assert_eq!(cg.source(), &x);

        let c = SpaceMap::constant(&s2n(1), &x, "q");
        let proj = SpaceMap::projection(&x, vec![1]).unwrap();
        let pc = compose(&proj, &c).unwrap();
        assert_eq!(pc.kind(), &MapKind::ConstantMap(PointLabel { label: "q".into(), coords: vec![1] }));
    }

    #[test]
    fn mismatched_chain_is_an_error() {
        let f = SpaceMap::identity(&s2n(2));
        let g = SpaceMap::identity(&s2n(3));
        assert!(matches!(compose(&f, &g), Err(Error::ChainMismatch(_))));
        assert!(SpaceMap::composite(vec![g, f]).is_err());
    }

    #[test]
    fn projection_validation() {
        let x = s2n(2);
        assert!(SpaceMap::projection(&x, vec![2]).is_err());
        assert!(SpaceMap::projection(&x, vec![1, 1]).is_err());
        let cp = SpaceDescriptor::new(vec![SpaceAtom::cp(3u32, "c")]).unwrap();
        assert!(SpaceMap::projection_onto(&x, &cp, vec![0]).is_err());
    }

    #[test]
    fn normalization_is_idempotent() {
        let x = s2n(4);
        let a = SpaceMap::projection(&x, vec![3, 1, 0]).unwrap();
        let b = SpaceMap::projection(a.target(), vec![2, 0]).unwrap();
        let c = SpaceMap::constant(b.target(), &s2n(1), "p");
        let comp = SpaceMap::composite(vec![a, b]).unwrap();
        let once = comp.normalize();
        assert_eq!(once, once.normalize());
        assert_eq!(once.kind(), &MapKind::CoordinateProjection(vec![0, 3]));
        let with_const = SpaceMap::composite(vec![comp, c]).unwrap().normalize();
        assert!(with_const.is_constant());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let text = r#"{"factors":[{"kind":"disk","d":2},{"kind":"cp","n":4},{"kind":"s2","label":"north"}]}"#;
        let space = SpaceDescriptor::from_json(text).unwrap();
        assert_eq!(space.factor(0).unwrap().label, "disk1");
        let again = SpaceDescriptor::from_json(&space.to_json()).unwrap();
        assert_eq!(space, again);
        assert_eq!(space.to_json(), again.to_json());

        let huge = r#"{"factors":[{"kind":"cp","n":"123456789012345678901234567890"}]}"#;
        let space = SpaceDescriptor::from_json(huge).unwrap();
        assert!(space.to_json().contains("\"123456789012345678901234567890\""));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(SpaceDescriptor::from_json(r#"{"factors":[],"extra":1}"#).is_err());
        assert!(SpaceDescriptor::from_json(r#"{"factors":[{"kind":"s2","radius":1}]}"#).is_err());
        assert!(SpaceDescriptor::from_json(r#"{"factors":[{"kind":"torus"}]}"#).is_err());
    }

    #[test]
    fn map_json_round_trip() {
        let x = s2n(3);
        let a = SpaceMap::projection(&x, vec![2, 0]).unwrap();
        let c = SpaceMap::constant(a.target(), &s2n(1), "p");
        let comp = SpaceMap::composite(vec![a, c]).unwrap();
        let back = SpaceMap::from_json(&comp.to_json()).unwrap();
        assert_eq!(back, comp);
    }
}
