//! Formal vector bundles: direct sums of trivial bundles and pulled-back
//! tautological line bundles over a modeled space.
//!
//! Each `S^2` or `CP^n` factor carries one tautological line bundle (the
//! Hopf bundle, resp. `γ_n`) whose first Chern class is that factor's
//! generator. A bundle is kept in normal form: a trivial rank plus one
//! multiplicity per factor, so isomorphism is structural equality.

use crate::cohomology::{GradedClass, RingPresentation};
use crate::exact::uint_str;
use crate::spaces::{MapKind, SpaceDescriptor, SpaceMap};
use crate::{Budget, Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineBundle {
    Trivial,
    /// Tautological line bundle of the given factor, pulled back to the product.
    Tautological { factor: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleExpr {
    base: SpaceDescriptor,
    trivial_rank: BigUint,
    lines: BTreeMap<usize, BigUint>,
}

impl BundleExpr {
    pub fn trivial(base: &SpaceDescriptor, rank: impl Into<BigUint>) -> Self {
        BundleExpr { base: base.clone(), trivial_rank: rank.into(), lines: BTreeMap::new() }
    }

    pub fn zero(base: &SpaceDescriptor) -> Self {
        Self::trivial(base, 0u32)
    }

    /// `mult` copies of the tautological line bundle of `factor`.
    pub fn line(base: &SpaceDescriptor, factor: usize, mult: impl Into<BigUint>) -> Result<Self> {
        Self::from_summands(base, BigUint::zero(), [(LineBundle::Tautological { factor }, mult.into())])
    }

    pub fn from_summands(
        base: &SpaceDescriptor,
        trivial_rank: BigUint,
        summands: impl IntoIterator<Item = (LineBundle, BigUint)>,
    ) -> Result<Self> {
        let mut out = BundleExpr::trivial(base, trivial_rank);
        for (line, mult) in summands {
            out.add_line(line, mult)?;
        }
        Ok(out)
    }

    fn add_line(&mut self, line: LineBundle, mult: BigUint) -> Result<()> {
        match line {
            LineBundle::Trivial => self.trivial_rank += mult,
            LineBundle::Tautological { factor } => {
                check_line_factor(&self.base, factor)?;
                if !mult.is_zero() {
                    *self.lines.entry(factor).or_default() += mult;
                }
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &SpaceDescriptor {
        &self.base
    }

    pub fn trivial_rank(&self) -> &BigUint {
        &self.trivial_rank
    }

    /// `(factor, multiplicity)` pairs in factor order; multiplicities are positive.
    pub fn lines(&self) -> impl Iterator<Item = (usize, &BigUint)> + '_ {
        self.lines.iter().map(|(f, m)| (*f, m))
    }

    pub fn multiplicity_on(&self, factor: usize) -> BigUint {
        self.lines.get(&factor).cloned().unwrap_or_default()
    }

    pub fn rank(&self) -> BigUint {
        &self.trivial_rank + self.lines.values().sum::<BigUint>()
    }

    pub fn direct_sum(&self, other: &BundleExpr) -> Result<BundleExpr> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        let mut out = self.clone();
        out.trivial_rank += &other.trivial_rank;
        for (f, m) in &other.lines {
            *out.lines.entry(*f).or_default() += m;
        }
        Ok(out)
    }

    /// `m · self`, the direct sum of `m` copies.
    pub fn scaled(&self, m: &BigUint) -> BundleExpr {
        if m.is_zero() {
            return BundleExpr::zero(&self.base);
        }
        BundleExpr {
            base: self.base.clone(),
            trivial_rank: &self.trivial_rank * m,
            lines: self.lines.iter().map(|(f, x)| (*f, x * m)).collect(),
        }
    }

    pub fn with_trivial(&self, extra: &BigUint) -> BundleExpr {
        let mut out = self.clone();
        out.trivial_rank += extra;
        out
    }

    /// `self` is a direct summand of `other` in the formal model: every
    /// multiplicity and the trivial rank fit inside `other`'s.
    pub fn is_summand_of(&self, other: &BundleExpr) -> Result<bool> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(self.trivial_rank <= other.trivial_rank
            && self.lines.iter().all(|(f, m)| *m <= other.multiplicity_on(*f)))
    }

    /// `f^*(self)`; `self` must live over `f.target()`.
    pub fn pullback(&self, f: &SpaceMap) -> Result<BundleExpr> {
        if *f.target() != self.base {
            return Err(Error::BaseMismatch);
        }
        let f = f.normalize();
        match f.kind() {
            MapKind::ConstantMap(_) => Ok(BundleExpr::trivial(f.source(), self.rank())),
            MapKind::CoordinateProjection(indices) => {
                let mut out = BundleExpr::trivial(f.source(), self.trivial_rank.clone());
                for (factor, m) in &self.lines {
                    out.add_line(LineBundle::Tautological { factor: indices[*factor] }, m.clone())?;
                }
                Ok(out)
            }
            MapKind::Composite(_) => unreachable!("normalized maps are never composite"),
        }
    }

    /// Number of monomials in the full expansion of the total Chern class.
    pub fn chern_term_estimate(&self) -> u128 {
        let mut total: u128 = 1;
        for (factor, m) in &self.lines {
            let cap = self.base.factors()[*factor].kind.generator_cap().expect("line factors carry a generator");
            let width = (m + 1u32).min(cap).to_u128().unwrap_or(u128::MAX);
            total = total.saturating_mul(width);
        }
        total
    }

    /// Total Chern class `Π (1 + y_f)^{m_f}` under the default budget.
    pub fn chern(&self) -> Result<GradedClass> {
        self.chern_within(Budget::default())
    }

    pub fn chern_within(&self, budget: Budget) -> Result<GradedClass> {
        let estimate = self.chern_term_estimate();
        if !budget.allows(estimate) {
            return Err(Error::BudgetExceeded {
                what: "total Chern class expansion".into(),
                required: estimate.to_string(),
                budget: budget.max_terms,
            });
        }
        let p = RingPresentation::of(&self.base)?;
        let mut total = GradedClass::one(&p);
        for (factor, m) in &self.lines {
            let g = p.generator_of_factor(*factor).expect("line factors carry a generator");
            total = total.cup(&GradedClass::one_plus_generator_pow(&p, g, m)?)?;
        }
        Ok(total)
    }

    /// Euler class, i.e. the top Chern class `c_rank`. Computed as the
    /// product of line classes, which never needs the full expansion.
    pub fn euler(&self) -> Result<GradedClass> {
        let p = RingPresentation::of(&self.base)?;
        if !self.trivial_rank.is_zero() {
            return Ok(GradedClass::zero(&p));
        }
        let mut exponents = vec![0u64; p.len()];
        for (factor, m) in &self.lines {
            let g = p.generator_of_factor(*factor).expect("line factors carry a generator");
            match m.to_u64() {
                Some(e) if e < p.generators()[g].cap => exponents[g] = e,
                _ => return Ok(GradedClass::zero(&p)),
            }
        }
        GradedClass::from_terms(&p, [(exponents, BigInt::one())])
    }

    /// Nonvanishing of the Euler class from the factorization
    /// `e = Π y_f^{m_f}` over disjoint factors: nonzero iff there is no
    /// trivial summand and every multiplicity sits below its factor's cap.
    /// Works for factors of any size.
    pub fn euler_nonzero_structured(&self) -> bool {
        self.trivial_rank.is_zero()
            && self.lines.iter().all(|(factor, m)| {
                let cap = self.base.factors()[*factor].kind.generator_cap().expect("line factors carry a generator");
                *m < cap
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bundles always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_line_factor(base: &SpaceDescriptor, factor: usize) -> Result<()> {
    match base.factor(factor) {
        None => Err(Error::InvalidBundle(format!("factor {factor} out of range"))),
        Some(atom) if atom.kind.generator_cap().is_none() => {
            Err(Error::InvalidBundle(format!("factor {factor} ({atom}) carries no line bundle generator")))
        }
        Some(_) => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EulerMethod {
    FullExpansion,
    StructuredFactorization,
}

/// Outcome of an Euler-class nonvanishing check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerCheck {
    pub nonzero: bool,
    pub method: EulerMethod,
    /// Cohomological degree `2 · rank`.
    #[serde(with = "uint_str")]
    pub degree: BigUint,
}

/// Decides `e(b) != 0`. Within the budget the top component of the fully
/// expanded Chern class is inspected and cross-checked against the
/// factorization; beyond it only the factorization is used.
pub fn euler_check(b: &BundleExpr, budget: Budget) -> Result<EulerCheck> {
    let structured = b.euler_nonzero_structured();
    let degree = b.rank() * 2u32;
    let expandable = budget.allows(b.chern_term_estimate()) && RingPresentation::of(b.base()).is_ok();
    if !expandable {
        return Ok(EulerCheck { nonzero: structured, method: EulerMethod::StructuredFactorization, degree });
    }
    let top = b.chern_within(budget)?.homogeneous_component(degree.to_u128().unwrap_or(u128::MAX));
    if top.is_zero() == structured {
        return Err(Error::Precondition("expanded Euler class disagrees with its factorization".into()));
    }
    Ok(EulerCheck { nonzero: !top.is_zero(), method: EulerMethod::FullExpansion, degree })
}

/// One eigenvalue map of a diagonal homomorphism: `multiplicity` copies of
/// `map`, optionally tensored with a line bundle over the source. Twists are
/// only meaningful on constant maps, where the pulled-back bundle is trivial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenvalueMap {
    pub map: SpaceMap,
    pub multiplicity: BigUint,
    pub twist: Option<LineBundle>,
}

impl EigenvalueMap {
    pub fn new(map: SpaceMap, multiplicity: impl Into<BigUint>) -> Self {
        EigenvalueMap { map, multiplicity: multiplicity.into(), twist: None }
    }

    pub fn twisted(map: SpaceMap, multiplicity: impl Into<BigUint>, twist: LineBundle) -> Self {
        EigenvalueMap { map, multiplicity: multiplicity.into(), twist: Some(twist) }
    }
}

/// Bundle induced by a diagonal map: `⊕ mult · (λ^* b ⊗ twist)` over the
/// common source of the eigenvalue maps.
pub fn pushforward_diagonal(b: &BundleExpr, maps: &[EigenvalueMap]) -> Result<BundleExpr> {
    let source = match maps.first() {
        Some(first) => first.map.source().clone(),
        None => return Err(Error::Precondition("a diagonal map needs at least one eigenvalue map".into())),
    };
    let mut out = BundleExpr::zero(&source);
    for em in maps {
        if *em.map.source() != source || *em.map.target() != *b.base() {
            return Err(Error::BaseMismatch);
        }
        let pulled = match em.twist {
            None => b.pullback(&em.map)?,
            Some(twist) => {
                if !em.map.is_constant() {
                    return Err(Error::Precondition("only constant eigenvalue maps may carry a twist".into()));
                }
                BundleExpr::from_summands(&source, BigUint::zero(), [(twist, b.rank())])?
            }
        };
        out = out.direct_sum(&pulled.scaled(&em.multiplicity))?;
    }
    Ok(out)
}

// Wire format.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineWire {
    factor: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SummandWire {
    line: Option<LineWire>,
    #[serde(with = "uint_str")]
    mult: BigUint,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleWire {
    base: SpaceDescriptor,
    #[serde(with = "uint_str", default)]
    trivial: BigUint,
    #[serde(default)]
    summands: Vec<SummandWire>,
}

impl Serialize for BundleExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BundleWire {
            base: self.base.clone(),
            trivial: self.trivial_rank.clone(),
            summands: self
                .lines
                .iter()
                .map(|(f, m)| SummandWire { line: Some(LineWire { factor: *f }), mult: m.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BundleExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = BundleWire::deserialize(d)?;
        let mut summands = Vec::with_capacity(wire.summands.len());
        for s in wire.summands {
            if s.mult.is_zero() {
                return Err(serde::de::Error::custom("summand multiplicities must be positive"));
            }
            let line = match s.line {
                None => LineBundle::Trivial,
                Some(LineWire { factor }) => LineBundle::Tautological { factor },
            };
            summands.push((line, s.mult));
        }
        BundleExpr::from_summands(&wire.base, wire.trivial, summands).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::SpaceAtom;

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn ranks() {
        let s = SpaceDescriptor::sphere_power(1);
        assert_eq!(BundleExpr::trivial(&s, 2u32).rank(), big(2));
        let cp36 = SpaceDescriptor::new(vec![SpaceAtom::cp(36u32, "c")]).unwrap();
        assert_eq!(BundleExpr::line(&cp36, 0, 36u32).unwrap().rank(), big(36));
    }

    #[test]
    fn chern_of_trivial_is_one() {
        let s = SpaceDescriptor::sphere_power(2);
        let c = BundleExpr::trivial(&s, 4u32).chern().unwrap();
        assert_eq!(c, GradedClass::one(c.presentation()));
    }

    #[test]
    fn chern_of_hopf_pair() {
        let s = SpaceDescriptor::sphere_power(2);
        let b = BundleExpr::line(&s, 0, 1u32).unwrap().direct_sum(&BundleExpr::line(&s, 1, 1u32).unwrap()).unwrap();
        let c = b.chern().unwrap();
        assert_eq!(c.terms().len(), 4);
        assert_eq!(c.homogeneous_component(4).terms(), vec![(vec![1, 1], int(1))]);
    }

    #[test]
    fn chern_of_multiple_square_zero_line() {
        let s = SpaceDescriptor::sphere_power(1);
        let c = BundleExpr::line(&s, 0, 7u32).unwrap().chern().unwrap();
        assert_eq!(c.terms(), vec![(vec![0], int(1)), (vec![1], int(7))]);
    }

    #[test]
    fn euler_examples() {
        let s = SpaceDescriptor::sphere_power(1);
        assert!(BundleExpr::trivial(&s, 1u32).euler().unwrap().is_zero());

        // kappa copies of γ over CP^kappa: y^kappa survives the cap kappa + 1.
        for kappa in 1u32..6 {
            let x = SpaceDescriptor::new(vec![SpaceAtom::cp(kappa, "c")]).unwrap();
            let b = BundleExpr::line(&x, 0, kappa).unwrap();
            let e = b.euler().unwrap();
            assert_eq!(e.terms(), vec![(vec![u64::from(kappa)], int(1))]);
            assert!(b.euler_nonzero_structured());
            assert!(!BundleExpr::line(&x, 0, kappa + 1).unwrap().euler_nonzero_structured());
        }
    }

    #[test]
    fn euler_is_top_chern_component() {
        let x = SpaceDescriptor::new(vec![SpaceAtom::sphere("s"), SpaceAtom::cp(3u32, "c"), SpaceAtom::disk(2u32, "d")])
            .unwrap();
        for (ms, mc, t) in [(1u32, 2u32, 0u32), (1, 3, 0), (2, 1, 0), (1, 1, 1), (0, 3, 0)] {
            let mut b = BundleExpr::trivial(&x, t);
            if ms > 0 {
                b = b.direct_sum(&BundleExpr::line(&x, 0, ms).unwrap()).unwrap();
            }
            b = b.direct_sum(&BundleExpr::line(&x, 1, mc).unwrap()).unwrap();
            let top = b.chern().unwrap().homogeneous_component(2 * b.rank().to_u128().unwrap());
            assert_eq!(b.euler().unwrap(), top, "ms={ms} mc={mc} t={t}");
            assert_eq!(b.euler_nonzero_structured(), !top.is_zero());
        }
    }

    #[test]
    fn disks_carry_no_lines() {
        let x = SpaceDescriptor::new(vec![SpaceAtom::disk(1u32, "d")]).unwrap();
        assert!(matches!(BundleExpr::line(&x, 0, 1u32), Err(Error::InvalidBundle(_))));
        assert!(BundleExpr::line(&x, 3, 1u32).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let x = SpaceDescriptor::new(vec![SpaceAtom::cp(100u32, "a"), SpaceAtom::cp(100u32, "b")]).unwrap();
        let b = BundleExpr::line(&x, 0, 100u32).unwrap().direct_sum(&BundleExpr::line(&x, 1, 100u32).unwrap()).unwrap();
        assert_eq!(b.chern_term_estimate(), 101 * 101);
        assert!(matches!(b.chern_within(Budget::new(100)), Err(Error::BudgetExceeded { .. })));
        let check = euler_check(&b, Budget::new(100)).unwrap();
        assert_eq!(check.method, EulerMethod::StructuredFactorization);
        assert!(check.nonzero);
        let check = euler_check(&b, Budget::default()).unwrap();
        assert_eq!(check.method, EulerMethod::FullExpansion);
        assert!(check.nonzero);
    }

    #[test]
    fn pushforward_identity_is_neutral() {
        let s = SpaceDescriptor::sphere_power(2);
        let b = BundleExpr::line(&s, 1, 3u32).unwrap().with_trivial(&big(2));
        let out = pushforward_diagonal(&b, &[EigenvalueMap::new(SpaceMap::identity(&s), 1u32)]).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn pushforward_with_constants_and_twists() {
        let k = SpaceDescriptor::sphere_power(1);
        let kk = SpaceDescriptor::sphere_power(2);
        let b = BundleExpr::line(&k, 0, 1u32).unwrap().with_trivial(&big(1));
        let maps = [
            EigenvalueMap::new(SpaceMap::projection_onto(&kk, &k, vec![1]).unwrap(), 2u32),
            EigenvalueMap::new(SpaceMap::constant(&kk, &k, "x"), 3u32),
            EigenvalueMap::twisted(SpaceMap::constant(&kk, &k, "y"), 1u32, LineBundle::Tautological { factor: 0 }),
        ];
        let out = pushforward_diagonal(&b, &maps).unwrap();
        assert_eq!(out.trivial_rank(), &big(2 + 6));
        assert_eq!(out.multiplicity_on(1), big(2));
        assert_eq!(out.multiplicity_on(0), big(2));
        assert_eq!(out.rank(), b.rank() * 6u32);

        let bad = [EigenvalueMap::twisted(SpaceMap::identity(&k), 1u32, LineBundle::Trivial)];
        assert!(matches!(pushforward_diagonal(&b, &bad), Err(Error::Precondition(_))));
        let wrong_base = [EigenvalueMap::new(SpaceMap::identity(&kk), 1u32)];
        assert_eq!(pushforward_diagonal(&b, &wrong_base), Err(Error::BaseMismatch));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"base":{"factors":[{"kind":"s2"},{"kind":"cp","n":3}]},"trivial":"2",
            "summands":[{"line":{"factor":1},"mult":"5"},{"line":null,"mult":"1"},{"line":{"factor":1},"mult":2}]}"#;
        let b = BundleExpr::from_json(text).unwrap();
        assert_eq!(b.trivial_rank(), &big(3));
        assert_eq!(b.multiplicity_on(1), big(7));
        let back = BundleExpr::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.to_json(), b.to_json());

        let zero_mult = r#"{"base":{"factors":[{"kind":"s2"}]},"summands":[{"line":{"factor":0},"mult":"0"}]}"#;
        assert!(BundleExpr::from_json(zero_mult).is_err());
        let negative = r#"{"base":{"factors":[{"kind":"s2"}]},"trivial":"-1"}"#;
        assert!(BundleExpr::from_json(negative).is_err());
    }
}
