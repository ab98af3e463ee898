//! Integral cohomology of products of disks, 2-spheres and projective spaces.
//!
//! `H*(X)` is presented as a truncated polynomial ring: one degree-2
//! generator per `S^2` factor (square zero) and per `CP^n` factor
//! (`y^(n+1) = 0`), none per disk. All generators have even degree, so the
//! ring is commutative and a class is a sparse map from exponent vectors to
//! big-integer coefficients. When every generator squares to zero,
//! monomials are stored as bitmasks.

use crate::exact::int_str;
use crate::spaces::{MapKind, SpaceDescriptor, SpaceMap};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Largest number of generators stored in the bitmask encoding.
const SQUARE_FREE_MAX_GENERATORS: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    /// Index of the owning factor in the space descriptor.
    pub factor: usize,
    /// Smallest exponent at which the generator's power vanishes.
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingPresentation {
    generators: Vec<Generator>,
    by_factor: Vec<Option<usize>>,
}

impl RingPresentation {
    /// Presentation of `H*(space)`. Fails when a projective factor is too big
    /// for its cap to fit in a machine word.
    pub fn of(space: &SpaceDescriptor) -> Result<Arc<RingPresentation>> {
        let mut generators = Vec::new();
        let mut by_factor = Vec::with_capacity(space.len());
        for (factor, atom) in space.factors().iter().enumerate() {
            match atom.kind.generator_cap() {
                None => by_factor.push(None),
                Some(cap) => {
                    let cap = cap
                        .to_u64()
                        .ok_or_else(|| Error::TooLarge(format!("factor {factor} ({atom}) has cap {cap}")))?;
                    by_factor.push(Some(generators.len()));
                    generators.push(Generator { factor, cap });
                }
            }
        }
        Ok(Arc::new(RingPresentation { generators, by_factor }))
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generator_of_factor(&self, factor: usize) -> Option<usize> {
        self.by_factor.get(factor).copied().flatten()
    }

    pub fn is_square_free(&self) -> bool {
        self.generators.len() <= SQUARE_FREE_MAX_GENERATORS && self.generators.iter().all(|g| g.cap == 2)
    }

    fn cap(&self, g: usize) -> u64 {
        self.generators[g].cap
    }
}

trait Monomial: Ord + Clone {
    fn times(&self, other: &Self, p: &RingPresentation) -> Option<Self>;
    fn weight(&self) -> u128;
    fn exponents(&self, p: &RingPresentation) -> Vec<u64>;
    /// `None` when some exponent reaches its cap.
    fn from_exponents(e: &[u64], p: &RingPresentation) -> Option<Self>;
    fn support(&self) -> Vec<usize>;
}

impl Monomial for Vec<u64> {
    fn times(&self, other: &Self, p: &RingPresentation) -> Option<Self> {
        let mut out = Vec::with_capacity(self.len());
        for (g, (a, b)) in self.iter().zip(other).enumerate() {
            let e = a.checked_add(*b).filter(|e| *e < p.cap(g))?;
            out.push(e);
        }
        Some(out)
    }

    fn weight(&self) -> u128 {
        self.iter().map(|&e| u128::from(e)).sum()
    }

    fn exponents(&self, _: &RingPresentation) -> Vec<u64> {
        self.clone()
    }

    fn from_exponents(e: &[u64], p: &RingPresentation) -> Option<Self> {
        e.iter().enumerate().all(|(g, &x)| x < p.cap(g)).then(|| e.to_vec())
    }

    fn support(&self) -> Vec<usize> {
        self.iter().enumerate().filter(|(_, &e)| e > 0).map(|(g, _)| g).collect()
    }
}

impl Monomial for u128 {
    fn times(&self, other: &Self, _: &RingPresentation) -> Option<Self> {
        (self & other == 0).then_some(self | other)
    }

    fn weight(&self) -> u128 {
        u128::from(self.count_ones())
    }

    fn exponents(&self, p: &RingPresentation) -> Vec<u64> {
        (0..p.len()).map(|g| u64::from((self >> g) & 1 == 1)).collect()
    }

    fn from_exponents(e: &[u64], _: &RingPresentation) -> Option<Self> {
        let mut mask = 0u128;
        for (g, &x) in e.iter().enumerate() {
            match x {
                0 => {}
                1 => mask |= 1 << g,
                _ => return None,
            }
        }
        Some(mask)
    }

    fn support(&self) -> Vec<usize> {
        (0..128).filter(|g| (self >> g) & 1 == 1).collect()
    }
}

type TermMap<K> = BTreeMap<K, BigInt>;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Terms {
    Dense(TermMap<Vec<u64>>),
    SquareFree(TermMap<u128>),
}

/// An element of `H*(X)` for a modeled space `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedClass {
    presentation: Arc<RingPresentation>,
    terms: Terms,
}

fn accumulate<K: Ord>(map: &mut TermMap<K>, key: K, coefficient: BigInt) {
    if coefficient.is_zero() {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(slot) => {
            slot.insert(coefficient);
        }
        std::collections::btree_map::Entry::Occupied(mut slot) => {
            *slot.get_mut() += coefficient;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
    }
}

fn cup_terms<K: Monomial>(a: &TermMap<K>, b: &TermMap<K>, p: &RingPresentation) -> TermMap<K> {
    let mut out = TermMap::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            if let Some(k) = ka.times(kb, p) {
                accumulate(&mut out, k, ca * cb);
            }
        }
    }
    out
}

fn add_terms<K: Monomial>(a: &TermMap<K>, b: &TermMap<K>) -> TermMap<K> {
    let mut out = a.clone();
    for (k, c) in b {
        accumulate(&mut out, k.clone(), c.clone());
    }
    out
}

fn build_terms<K: Monomial>(
    p: &RingPresentation,
    terms: impl IntoIterator<Item = (Vec<u64>, BigInt)>,
) -> Result<TermMap<K>> {
    let mut out = TermMap::new();
    for (exponents, c) in terms {
        if exponents.len() != p.len() {
            return Err(Error::Parse(format!(
                "exponent vector has length {} but the presentation has {} generators",
                exponents.len(),
                p.len()
            )));
        }
        if let Some(k) = K::from_exponents(&exponents, p) {
            accumulate(&mut out, k, c);
        }
    }
    Ok(out)
}

impl GradedClass {
    fn from_map_dense(p: &Arc<RingPresentation>, map: TermMap<Vec<u64>>) -> Self {
        GradedClass { presentation: p.clone(), terms: Terms::Dense(map) }
    }

    fn new_terms(p: &Arc<RingPresentation>, terms: impl IntoIterator<Item = (Vec<u64>, BigInt)>) -> Result<Self> {
        let terms = if p.is_square_free() {
            Terms::SquareFree(build_terms(p, terms)?)
        } else {
            Terms::Dense(build_terms(p, terms)?)
        };
        Ok(GradedClass { presentation: p.clone(), terms })
    }

    /// Class from explicit `(exponents, coefficient)` pairs. Terms with an
    /// exponent at or above its cap are zero in the ring and are dropped.
    pub fn from_terms(p: &Arc<RingPresentation>, terms: impl IntoIterator<Item = (Vec<u64>, BigInt)>) -> Result<Self> {
        Self::new_terms(p, terms)
    }

    pub fn zero(p: &Arc<RingPresentation>) -> Self {
        Self::new_terms(p, std::iter::empty()).expect("empty term list is valid")
    }

    pub fn constant(p: &Arc<RingPresentation>, c: impl Into<BigInt>) -> Self {
        Self::new_terms(p, [(vec![0; p.len()], c.into())]).expect("unit monomial is valid")
    }

    pub fn one(p: &Arc<RingPresentation>) -> Self {
        Self::constant(p, 1)
    }

    /// The generator `y_g` itself.
    pub fn generator(p: &Arc<RingPresentation>, g: usize) -> Result<Self> {
        Self::monomial(p, g, 1, BigInt::one())
    }

    /// `coefficient * y_g^exponent`.
    pub fn monomial(p: &Arc<RingPresentation>, g: usize, exponent: u64, coefficient: BigInt) -> Result<Self> {
        if g >= p.len() {
            return Err(Error::Precondition(format!("generator {g} does not exist")));
        }
        let mut e = vec![0; p.len()];
        e[g] = exponent;
        Self::new_terms(p, [(e, coefficient)])
    }

    /// `(1 + y_g)^m`, expanded by the binomial theorem and truncated at the cap.
    pub fn one_plus_generator_pow(p: &Arc<RingPresentation>, g: usize, m: &BigUint) -> Result<Self> {
        if g >= p.len() {
            return Err(Error::Precondition(format!("generator {g} does not exist")));
        }
        let cap = p.cap(g);
        let top = match m.to_u64() {
            Some(m) => m.min(cap - 1),
            None => cap - 1,
        };
        let m = BigInt::from(m.clone());
        let mut binom = BigInt::one();
        let mut terms = Vec::with_capacity(top as usize + 1);
        for t in 0..=top {
            if t > 0 {
                binom = binom * (&m - BigInt::from(t - 1)) / BigInt::from(t);
            }
            let mut e = vec![0; p.len()];
            e[g] = t;
            terms.push((e, binom.clone()));
        }
        Self::new_terms(p, terms)
    }

    pub fn presentation(&self) -> &Arc<RingPresentation> {
        &self.presentation
    }

    /// Terms as `(exponents, coefficient)` sorted by exponent vector.
    pub fn terms(&self) -> Vec<(Vec<u64>, BigInt)> {
        let p = &self.presentation;
        let mut out: Vec<(Vec<u64>, BigInt)> = match &self.terms {
            Terms::Dense(m) => m.iter().map(|(k, c)| (k.exponents(p), c.clone())).collect(),
            Terms::SquareFree(m) => m.iter().map(|(k, c)| (k.exponents(p), c.clone())).collect(),
        };
        out.sort();
        out
    }

    pub fn len(&self) -> usize {
        match &self.terms {
            Terms::Dense(m) => m.len(),
            Terms::SquareFree(m) => m.len(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.len() == 0
    }

    fn check_same(&self, other: &GradedClass) -> Result<()> {
        if Arc::ptr_eq(&self.presentation, &other.presentation) || self.presentation == other.presentation {
            Ok(())
        } else {
            Err(Error::PresentationMismatch)
        }
    }

    /// Cup product. Monomials reaching a cap vanish.
    pub fn cup(&self, other: &GradedClass) -> Result<GradedClass> {
        self.check_same(other)?;
        let p = &self.presentation;
        let terms = match (&self.terms, &other.terms) {
            (Terms::Dense(a), Terms::Dense(b)) => Terms::Dense(cup_terms(a, b, p)),
            (Terms::SquareFree(a), Terms::SquareFree(b)) => Terms::SquareFree(cup_terms(a, b, p)),
            _ => unreachable!("encoding is a function of the presentation"),
        };
        Ok(GradedClass { presentation: p.clone(), terms })
    }

    pub fn add(&self, other: &GradedClass) -> Result<GradedClass> {
        self.check_same(other)?;
        let terms = match (&self.terms, &other.terms) {
            (Terms::Dense(a), Terms::Dense(b)) => Terms::Dense(add_terms(a, b)),
            (Terms::SquareFree(a), Terms::SquareFree(b)) => Terms::SquareFree(add_terms(a, b)),
            _ => unreachable!("encoding is a function of the presentation"),
        };
        Ok(GradedClass { presentation: self.presentation.clone(), terms })
    }

    pub fn scale(&self, c: &BigInt) -> GradedClass {
        Self::new_terms(&self.presentation, self.terms().into_iter().map(|(e, x)| (e, x * c)))
            .expect("scaling keeps exponents valid")
    }

    /// Square-and-multiply power. Coefficients of classes with a constant
    /// term other than `0` or `±1` grow like `c^e`; keep `e` small for those.
    pub fn pow(&self, e: &BigUint) -> GradedClass {
        let mut result = GradedClass::one(&self.presentation);
        let mut base = self.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = result.cup(&base).expect("same presentation");
            }
            if i + 1 < bits {
                base = base.cup(&base).expect("same presentation");
            }
        }
        result
    }

    fn filtered(&self, keep: impl Fn(u128) -> bool) -> GradedClass {
        let terms = match &self.terms {
            Terms::Dense(m) => {
                Terms::Dense(m.iter().filter(|(k, _)| keep(k.weight())).map(|(k, c)| (k.clone(), c.clone())).collect())
            }
            Terms::SquareFree(m) => Terms::SquareFree(
                m.iter().filter(|(k, _)| keep(k.weight())).map(|(k, c)| (*k, c.clone())).collect(),
            ),
        };
        GradedClass { presentation: self.presentation.clone(), terms }
    }

    /// Part of cohomological degree exactly `degree`; empty for odd degrees.
    pub fn homogeneous_component(&self, degree: u128) -> GradedClass {
        if degree % 2 == 1 {
            return GradedClass::zero(&self.presentation);
        }
        self.filtered(|w| 2 * w == degree)
    }

    /// Nonzero homogeneous components keyed by cohomological degree.
    pub fn components_by_degree(&self) -> BTreeMap<u128, GradedClass> {
        let degrees: BTreeSet<u128> = self.weights().into_iter().map(|w| 2 * w).collect();
        degrees.into_iter().map(|d| (d, self.homogeneous_component(d))).collect()
    }

    fn weights(&self) -> Vec<u128> {
        match &self.terms {
            Terms::Dense(m) => m.keys().map(Monomial::weight).collect(),
            Terms::SquareFree(m) => m.keys().map(Monomial::weight).collect(),
        }
    }

    /// Highest cohomological degree carrying a nonzero term.
    pub fn top_degree(&self) -> Option<u128> {
        self.weights().into_iter().max().map(|w| 2 * w)
    }

    pub fn constant_term(&self) -> BigInt {
        self.homogeneous_component(0).terms().into_iter().map(|(_, c)| c).next().unwrap_or_default()
    }

    /// Generators occurring with positive exponent in some term.
    pub fn support(&self) -> BTreeSet<usize> {
        match &self.terms {
            Terms::Dense(m) => m.keys().flat_map(Monomial::support).collect(),
            Terms::SquareFree(m) => m.keys().flat_map(Monomial::support).collect(),
        }
    }
}

/// Pullback `f^*: H*(target) -> H*(source)`.
pub fn pullback_class(f: &SpaceMap, a: &GradedClass) -> Result<GradedClass> {
    let target_p = RingPresentation::of(f.target())?;
    if *target_p != **a.presentation() {
        return Err(Error::PresentationMismatch);
    }
    let source_p = RingPresentation::of(f.source())?;
    match f.kind() {
        MapKind::ConstantMap(_) => Ok(GradedClass::constant(&source_p, a.constant_term())),
        MapKind::CoordinateProjection(indices) => {
            // image[g] = source generator receiving target generator g
            let mut image = Vec::with_capacity(target_p.len());
            for gen in target_p.generators() {
                let source_factor = indices[gen.factor];
                let g = source_p
                    .generator_of_factor(source_factor)
                    .ok_or(Error::UnmappedGenerator { factor: gen.factor })?;
                image.push(g);
            }
            let terms = a.terms().into_iter().map(|(e, c)| {
                let mut out = vec![0; source_p.len()];
                for (g, x) in e.into_iter().enumerate() {
                    out[image[g]] = x;
                }
                (out, c)
            });
            GradedClass::from_terms(&source_p, terms)
        }
        MapKind::Composite(maps) => {
            let mut class = a.clone();
            for m in maps.iter().rev() {
                class = pullback_class(m, &class)?;
            }
            Ok(class)
        }
    }
}

/// Nonvanishing of the cup product of classes on pairwise disjoint generator
/// blocks, decided without expanding the product: in a torsion-free tensor
/// product the product is nonzero exactly when every factor is.
pub fn kunneth_product_nonzero(classes: &[GradedClass]) -> Result<bool> {
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, class) in classes.iter().enumerate() {
        if i > 0 {
            classes[0].check_same(class)?;
        }
        for g in class.support() {
            if owner.insert(g, i).is_some() {
                return Err(Error::OverlappingBlocks { generator: g });
            }
        }
    }
    Ok(classes.iter().all(|c| !c.is_zero()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub exponents: Vec<u64>,
    #[serde(with = "int_str")]
    pub coefficient: BigInt,
}

/// A class together with the space it lives over, in wire form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDocument {
    pub space: SpaceDescriptor,
    pub terms: Vec<TermRecord>,
}

impl ClassDocument {
    pub fn from_class(space: &SpaceDescriptor, class: &GradedClass) -> Result<Self> {
        if *RingPresentation::of(space)? != **class.presentation() {
            return Err(Error::PresentationMismatch);
        }
        Ok(ClassDocument { space: space.clone(), terms: terms_to_records(class) })
    }

    pub fn to_class(&self) -> Result<GradedClass> {
        let p = RingPresentation::of(&self.space)?;
        GradedClass::from_terms(&p, self.terms.iter().map(|t| (t.exponents.clone(), t.coefficient.clone())))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("class documents always serialize")
    }
}

pub fn terms_to_records(class: &GradedClass) -> Vec<TermRecord> {
    class.terms().into_iter().map(|(exponents, coefficient)| TermRecord { exponents, coefficient }).collect()
}

#[doc(hidden)]
pub fn dense_class_for_tests(p: &Arc<RingPresentation>, terms: Vec<(Vec<u64>, BigInt)>) -> GradedClass {
    let mut map = TermMap::new();
    for (e, c) in terms {
        if let Some(k) = <Vec<u64> as Monomial>::from_exponents(&e, p) {
            accumulate(&mut map, k, c);
        }
    }
    GradedClass::from_map_dense(p, map)
}
