//! Villadsen algebras of the second type.
//!
//! Stage spaces are `X_n = D^k × CP^{κ(k,1)} × ... × CP^{κ(k,n)}` for finite
//! `k`. For `k = ∞` each stage `n >= 2` contributes its own disk block
//! `D^{nσ(n)^2 - (n-1)σ(n-1)^2}`, placed just before `CP^{κ(∞,n)}`, so that
//! the projection `X_n -> X_{n-1}` is always onto a prefix of the factors.

use crate::bundles::{pushforward_diagonal, BundleExpr, EigenvalueMap, LineBundle};
use crate::comparison::{obstructed_by_euler, obstructed_by_euler_structured, trivial_line_subbundle_sufficient, ComparisonVerdict};
use crate::exact::{rational, uint_str};
use crate::spaces::{SpaceAtom, SpaceDescriptor, SpaceMap};
use crate::bundles::{euler_check, EulerMethod};
use crate::{Budget, Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Hard ceiling on stage indices; factorials beyond this are far outside
/// anything the verifiers can use.
pub const MAX_STAGE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KParam {
    Finite(u64),
    Infinite,
}

impl KParam {
    pub fn finite(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        Ok(KParam::Finite(k))
    }

    pub fn is_finite(self) -> bool {
        matches!(self, KParam::Finite(_))
    }
}

impl fmt::Display for KParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KParam::Finite(k) => write!(f, "{k}"),
            KParam::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for KParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(KParam::Infinite),
            other => {
                let k = other.parse::<u64>().map_err(|_| Error::Parse(format!("invalid k {other:?}")))?;
                KParam::finite(k)
            }
        }
    }
}

impl Serialize for KParam {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KParam {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct V2Params {
    pub k: KParam,
    pub n: usize,
}

impl V2Params {
    pub fn new(k: KParam, n: usize) -> Result<Self> {
        if let KParam::Finite(0) = k {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        check_stage(n)?;
        Ok(V2Params { k, n })
    }
}

fn check_stage(n: usize) -> Result<()> {
    if n > MAX_STAGE {
        return Err(Error::TooLarge(format!("stage {n} exceeds the ceiling {MAX_STAGE}")));
    }
    Ok(())
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `σ(n) = n · n!`, with `σ(0) = 1`.
pub fn sigma(n: u64) -> BigUint {
    if n == 0 {
        BigUint::one()
    } else {
        factorial(n) * n
    }
}

/// `κ(k,n) = kσ(n)` for finite `k`, `nσ(n)` for `k = ∞`.
pub fn kappa(k: KParam, n: u64) -> BigUint {
    match k {
        KParam::Finite(k) => sigma(n) * k,
        KParam::Infinite => sigma(n) * n,
    }
}

/// Disk power added at stage `n` (the whole disk block at `n = 0`).
fn disk_increment(k: KParam, n: u64) -> BigUint {
    match k {
        KParam::Finite(k) => {
            if n == 0 {
                BigUint::from(k)
            } else {
                BigUint::zero()
            }
        }
        KParam::Infinite => match n {
            0 => BigUint::one(),
            1 => BigUint::zero(),
            n => {
                let cur = sigma(n) * sigma(n) * n;
                let prev = sigma(n - 1) * sigma(n - 1) * (n - 1);
                cur - prev
            }
        },
    }
}

/// Index of the factor `CP^{κ(k,j)}` in any stage space `X_n`, `n >= j >= 1`.
pub fn cp_factor(k: KParam, j: usize) -> usize {
    match k {
        KParam::Finite(_) => j,
        KParam::Infinite => {
            if j <= 1 {
                j
            } else {
                2 * j - 1
            }
        }
    }
}

pub fn stage_space(k: KParam, n: usize) -> Result<SpaceDescriptor> {
    let params = V2Params::new(k, n)?;
    let mut atoms = Vec::new();
    for stage in 0..=params.n as u64 {
        let disks = disk_increment(k, stage);
        if !disks.is_zero() {
            atoms.push(SpaceAtom::disk(disks, format!("D{stage}")));
        }
        if stage >= 1 {
            atoms.push(SpaceAtom::cp(kappa(k, stage), format!("CP{stage}")));
        }
    }
    SpaceDescriptor::new(atoms)
}

/// `π^1: X_n -> X_{n-1}`.
pub fn projection_to_previous(k: KParam, n: usize) -> Result<SpaceMap> {
    if n == 0 {
        return Err(Error::Precondition("stage 0 has no predecessor".into()));
    }
    let source = stage_space(k, n)?;
    let target = stage_space(k, n - 1)?;
    SpaceMap::projection_onto(&source, &target, (0..target.len()).collect())
}

/// `ρ_j: X_n -> CP^{κ(k,j)}`.
pub fn coordinate_projection(k: KParam, n: usize, j: usize) -> Result<SpaceMap> {
    if j == 0 || j > n {
        return Err(Error::Precondition(format!("no projective factor {j} at stage {n}")));
    }
    let source = stage_space(k, n)?;
    let target = SpaceDescriptor::new(vec![SpaceAtom::cp(kappa(k, j as u64), format!("CP{j}"))])?;
    SpaceMap::projection_onto(&source, &target, vec![cp_factor(k, j)])
}

/// `ζ_j` over `X_n`: the tautological line of the `j`-th projective factor.
pub fn zeta(k: KParam, n: usize, j: usize, mult: impl Into<BigUint>) -> Result<BundleExpr> {
    if j == 0 || j > n {
        return Err(Error::Precondition(format!("no projective factor {j} at stage {n}")));
    }
    BundleExpr::line(&stage_space(k, n)?, cp_factor(k, j), mult)
}

/// Eigenvalue maps of `φ_i: A_i -> A_{i+1}`: the projection `π^1` once, and
/// `i+1` point evaluations each twisted by `ζ_{i+1}`.
pub fn connecting_maps(k: KParam, i: usize) -> Result<Vec<EigenvalueMap>> {
    let source = stage_space(k, i + 1)?;
    let target = stage_space(k, i)?;
    let twist = LineBundle::Tautological { factor: cp_factor(k, i + 1) };
    let mut maps = vec![EigenvalueMap::new(projection_to_previous(k, i + 1)?, 1u32)];
    for j in 1..=i + 1 {
        maps.push(EigenvalueMap::twisted(SpaceMap::constant(&source, &target, format!("y_{i},{j}")), 1u32, twist));
    }
    Ok(maps)
}

/// `φ_i^*(η)` over `X_{i+1}`.
pub fn push_forward(k: KParam, i: usize, eta: &BundleExpr) -> Result<BundleExpr> {
    pushforward_diagonal(eta, &connecting_maps(k, i)?)
}

/// `φ_{i,j}^*(η)` by iterating single steps.
pub fn push_between(k: KParam, i: usize, j: usize, eta: &BundleExpr) -> Result<BundleExpr> {
    if j < i {
        return Err(Error::Precondition(format!("cannot push from stage {i} back to {j}")));
    }
    (i..j).try_fold(eta.clone(), |acc, s| push_forward(k, s, &acc))
}

/// Closed form: `μ^*(η) ⊕ ⊕_{s=i+1}^{j} σ(s)/(i+1)! · rank(η) · ζ_s`.
pub fn push_between_closed_form(k: KParam, i: usize, j: usize, eta: &BundleExpr) -> Result<BundleExpr> {
    if j < i {
        return Err(Error::Precondition(format!("cannot push from stage {i} back to {j}")));
    }
    let target = stage_space(k, j)?;
    let mu = SpaceMap::projection_onto(&target, eta.base(), (0..eta.base().len()).collect())?;
    let mut out = eta.pullback(&mu)?;
    let base = factorial(i as u64 + 1);
    let rank = eta.rank();
    for s in i + 1..=j {
        let coefficient = sigma(s as u64) * &rank / &base;
        if !coefficient.is_zero() {
            out = out.direct_sum(&BundleExpr::line(&target, cp_factor(k, s), coefficient)?)?;
        }
    }
    Ok(out)
}

/// Space and unit bundle of one stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub params: V2Params,
    pub space: SpaceDescriptor,
    pub unit: BundleExpr,
}

/// `ξ_n = θ_1 ⊕ σ(1)ζ_1 ⊕ ... ⊕ σ(n)ζ_n`, obtained by pushing the rank-one
/// unit of stage 0 forward and cross-checked against the closed form and
/// against `rank(ξ_n) = (n+1)!`.
pub fn build_stage(params: V2Params) -> Result<Stage> {
    let V2Params { k, n } = params;
    let space = stage_space(k, n)?;
    let unit = push_between(k, 0, n, &BundleExpr::trivial(&stage_space(k, 0)?, 1u32))?;

    let mut closed = BundleExpr::trivial(&space, 1u32);
    for j in 1..=n {
        closed = closed.direct_sum(&BundleExpr::line(&space, cp_factor(k, j), sigma(j as u64))?)?;
    }
    let summed: BigUint = (0..=n as u64).map(sigma).sum();
    let telescoped = factorial(n as u64 + 1);
    if unit != closed || unit.rank() != summed || summed != telescoped {
        return Err(Error::Precondition(format!("unit bundle at stage {n} failed its internal cross-check")));
    }
    Ok(Stage { params, space, unit })
}

/// Value of the unique trace on the class of a bundle over `X_n`. For
/// `k = ∞` the values are entries of a divergent sequence and are flagged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceValue {
    #[serde(with = "rational")]
    pub value: BigRational,
    pub stage: usize,
    pub sequence_entry: bool,
}

/// `τ(b) = rank(b)/(n+1)!`.
pub fn trace(b: &BundleExpr, params: V2Params) -> Result<TraceValue> {
    if *b.base() != stage_space(params.k, params.n)? {
        return Err(Error::BaseMismatch);
    }
    Ok(TraceValue {
        value: BigRational::new(BigInt::from(b.rank()), BigInt::from(factorial(params.n as u64 + 1))),
        stage: params.n,
        sequence_entry: !params.k.is_finite(),
    })
}

/// `η_{n,i} = κ(k,i) · ζ_i` over `X_n`.
pub fn eta_component(k: KParam, n: usize, i: usize) -> Result<BundleExpr> {
    zeta(k, n, i, kappa(k, i as u64))
}

/// `η_n = η_{n,1} ⊕ ... ⊕ η_{n,n}`.
pub fn eta(k: KParam, n: usize) -> Result<BundleExpr> {
    (1..=n).try_fold(BundleExpr::zero(&stage_space(k, n)?), |acc, i| acc.direct_sum(&eta_component(k, n, i)?))
}

/// Whether the Euler obstruction may fall back to the structured
/// factorization once full expansion exceeds the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionPolicy {
    #[default]
    AllowStructured,
    RequireFullExpansion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableRangeRow {
    pub i: usize,
    /// `2κ(k,i)·γ` over `CP^{κ(k,i)}` pulls back to `η_{n,i} ⊕ η_{n,i}`.
    pub pulls_back_to_double: bool,
    pub verdict: ComparisonVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRow {
    pub from_stage: usize,
    /// `(l+1) · rank(η_l)`, the multiplicity of `ζ_{l+1}` in `φ_l^*(η_l)`.
    #[serde(with = "uint_str")]
    pub pushed_coefficient: BigUint,
    #[serde(with = "uint_str")]
    pub kappa_next: BigUint,
    /// `φ_l^*(η_l)` is a direct summand of `η_{l+1}`.
    pub summand_of_next: bool,
    /// `θ_1` is a direct summand of `φ_l^*(θ_1)`.
    pub unit_line_survives: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionRow {
    pub stage: usize,
    pub verdict: ComparisonVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRows {
    pub e: TraceValue,
    pub q_sum: TraceValue,
    /// `(k(n+1)! - k)/(n+1)!` for finite `k`, `n^2/(n+1)` as a lower bound for `k = ∞`.
    #[serde(with = "rational")]
    pub formula: BigRational,
    pub formula_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparabilityReport {
    pub k: KParam,
    pub n: usize,
    pub verify_stage: usize,
    pub stable_range: Vec<StableRangeRow>,
    pub chain: Vec<ChainRow>,
    pub obstructions: Vec<ObstructionRow>,
    pub traces: TraceRows,
    pub part_i: bool,
    pub part_ii: bool,
    pub part_iii: bool,
    /// Simplicity of the limit depends on the point choices and is assumed.
    pub simplicity_assumed: bool,
}

impl ComparabilityReport {
    pub fn passed(&self) -> bool {
        self.part_i && self.part_ii && self.part_iii
    }
}

fn stable_range_row(k: KParam, n: usize, i: usize) -> Result<StableRangeRow> {
    let cp = SpaceDescriptor::new(vec![SpaceAtom::cp(kappa(k, i as u64), format!("CP{i}"))])?;
    let doubled = BundleExpr::line(&cp, 0, kappa(k, i as u64) * 2u32)?;
    let component = eta_component(k, n, i)?;
    let pulled = doubled.pullback(&coordinate_projection(k, n, i)?)?;
    Ok(StableRangeRow {
        i,
        pulls_back_to_double: pulled == component.direct_sum(&component)?,
        verdict: trivial_line_subbundle_sufficient(&doubled),
    })
}

fn trace_rows(k: KParam, n: usize) -> Result<TraceRows> {
    let params = V2Params::new(k, n)?;
    let space = stage_space(k, n)?;
    let e = trace(&BundleExpr::trivial(&space, 1u32), params)?;
    let q_sum = trace(&eta(k, n)?, params)?;
    let fact = BigInt::from(factorial(n as u64 + 1));
    let (formula, formula_holds) = match k {
        KParam::Finite(kv) => {
            let f = BigRational::new(BigInt::from(kv) * &fact - BigInt::from(kv), fact);
            let holds = f == q_sum.value;
            (f, holds)
        }
        KParam::Infinite => {
            let bound = BigRational::new(BigInt::from(n * n), BigInt::from(n + 1));
            let holds = q_sum.value >= bound;
            (bound, holds)
        }
    };
    Ok(TraceRows { e, q_sum, formula, formula_holds })
}

fn euler_obstruction_at(k: KParam, m: usize, budget: Budget, policy: ExpansionPolicy) -> Result<ComparisonVerdict> {
    let eta_m = eta(k, m)?;
    if policy == ExpansionPolicy::RequireFullExpansion {
        let check = euler_check(&eta_m, budget)?;
        if check.method != EulerMethod::FullExpansion {
            return Err(Error::BudgetExceeded {
                what: format!("full Euler class expansion of η_{m}"),
                required: eta_m.chern_term_estimate().to_string(),
                budget: budget.max_terms,
            });
        }
    }
    obstructed_by_euler(&BundleExpr::trivial(eta_m.base(), 1u32), &eta_m, budget)
}

/// Certified replay of the three comparability properties of
/// `e_n, q^{(n)}_1, ..., q^{(n)}_n`, with the obstruction checked at every
/// stage `m` in `n..=j`.
pub fn comparability_triple(k: KParam, n: usize, j: usize, budget: Budget, policy: ExpansionPolicy) -> Result<ComparabilityReport> {
    V2Params::new(k, j)?;
    if n == 0 || j < n {
        return Err(Error::Precondition(format!("need 1 <= n <= j, got n = {n}, j = {j}")));
    }
    let stable_range = (1..=n).map(|i| stable_range_row(k, n, i)).collect::<Result<Vec<_>>>()?;
    let part_i = stable_range.iter().all(|r| r.pulls_back_to_double && r.verdict.dominates());

    let mut chain = Vec::new();
    for l in n..j {
        let eta_l = eta(k, l)?;
        let pushed = push_forward(k, l, &eta_l)?;
        let unit_pushed = push_forward(k, l, &BundleExpr::trivial(eta_l.base(), 1u32))?;
        let next_space = stage_space(k, l + 1)?;
        chain.push(ChainRow {
            from_stage: l,
            pushed_coefficient: eta_l.rank() * (l as u64 + 1),
            kappa_next: kappa(k, l as u64 + 1),
            summand_of_next: pushed.is_summand_of(&eta(k, l + 1)?)?,
            unit_line_survives: BundleExpr::trivial(&next_space, 1u32).is_summand_of(&unit_pushed)?,
        });
    }
    let obstructions = (n..=j)
        .map(|m| Ok(ObstructionRow { stage: m, verdict: euler_obstruction_at(k, m, budget, policy)? }))
        .collect::<Result<Vec<_>>>()?;
    let part_ii = chain.iter().all(|r| r.summand_of_next && r.unit_line_survives && r.pushed_coefficient <= r.kappa_next)
        && obstructions.iter().all(|r| r.verdict.obstructed());

    let traces = trace_rows(k, n)?;
    let expected_e = BigRational::new(BigInt::one(), BigInt::from(factorial(n as u64 + 1)));
    let part_iii = traces.formula_holds && traces.e.value == expected_e;

    Ok(ComparabilityReport {
        k,
        n,
        verify_stage: j,
        stable_range,
        chain,
        obstructions,
        traces,
        part_i,
        part_ii,
        part_iii,
        simplicity_assumed: true,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcRow {
    pub stage: usize,
    #[serde(with = "uint_str")]
    pub real_dimension: BigUint,
    #[serde(with = "uint_str")]
    pub unit_rank: BigUint,
    /// `dim(X_n) / (2 · rank(ξ_n))`.
    #[serde(with = "rational")]
    pub ratio: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcWitness {
    pub stage: usize,
    #[serde(with = "rational")]
    pub epsilon: BigRational,
    pub tau_e: TraceValue,
    pub tau_q_sum: TraceValue,
    /// `τ(e) < ε/2` and `τ(q-sum) > k - ε/2`.
    pub within_epsilon: bool,
    pub non_domination: ComparisonVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub k: KParam,
    pub rows: Vec<RcRow>,
    /// The common value of every row, when there is one.
    #[serde(with = "crate::exact::rational_opt")]
    pub value: Option<BigRational>,
    pub divergent: bool,
    pub witness: Option<RcWitness>,
}

impl RadiusReport {
    pub fn passed(&self) -> bool {
        match self.k {
            KParam::Finite(k) => {
                let k = BigRational::from_integer(BigInt::from(k));
                self.value.as_ref() == Some(&k)
                    && self.witness.as_ref().is_some_and(|w| w.within_epsilon && w.non_domination.obstructed())
            }
            KParam::Infinite => self.divergent,
        }
    }
}

fn rc_row(k: KParam, n: usize) -> Result<RcRow> {
    let stage = build_stage(V2Params::new(k, n)?)?;
    let real_dimension = stage.space.real_dimension();
    let unit_rank = stage.unit.rank();
    let ratio = BigRational::new(BigInt::from(real_dimension.clone()), BigInt::from(&unit_rank * 2u32));
    Ok(RcRow { stage: n, real_dimension, unit_rank, ratio })
}

/// Upper bound `dim/(2·rank)` at stages `0..=max_stage`, and for finite `k`
/// the first stage whose traces come within `epsilon` of the lower bound,
/// together with the Euler obstruction there (structured factorization).
pub fn radius_of_comparison(k: KParam, max_stage: usize, epsilon: &BigRational) -> Result<RadiusReport> {
    V2Params::new(k, max_stage)?;
    if *epsilon <= BigRational::zero() {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let rows = (0..=max_stage).map(|n| rc_row(k, n)).collect::<Result<Vec<_>>>()?;
    let KParam::Finite(kv) = k else {
        // The ratios grow without bound; at finite depth we can only see
        // them increase.
        let divergent = rows.windows(2).all(|w| w[0].ratio <= w[1].ratio)
            && rows.first().zip(rows.last()).is_some_and(|(a, b)| a.ratio < b.ratio);
        return Ok(RadiusReport { k, rows, value: None, divergent, witness: None });
    };
    let value = rows.first().map(|r| r.ratio.clone()).filter(|v| rows.iter().all(|r| r.ratio == *v));

    let half = epsilon / BigRational::from_integer(BigInt::from(2));
    let kq = BigRational::from_integer(BigInt::from(kv));
    let mut witness = None;
    for n in 1..=MAX_STAGE {
        let traces = trace_rows(k, n)?;
        if traces.e.value < half && traces.q_sum.value > &kq - &half {
            witness = Some(RcWitness {
                stage: n,
                epsilon: epsilon.clone(),
                within_epsilon: true,
                tau_e: traces.e,
                tau_q_sum: traces.q_sum,
                non_domination: {
                    let eta_n = eta(k, n)?;
                    obstructed_by_euler_structured(&BundleExpr::trivial(eta_n.base(), 1u32), &eta_n)?
                },
            });
            break;
        }
    }
    Ok(RadiusReport { k, rows, value, divergent: false, witness })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn arithmetic() {
        assert_eq!(sigma(0), BigUint::one());
        assert_eq!(sigma(2), BigUint::from(4u32));
        assert_eq!(kappa(KParam::Finite(2), 3), BigUint::from(36u32));
        assert_eq!(kappa(KParam::Infinite, 2), BigUint::from(8u32));
        assert_eq!("inf".parse::<KParam>().unwrap(), KParam::Infinite);
        assert!("0".parse::<KParam>().is_err());
    }

    #[test]
    fn stage_examples() {
        let s = build_stage(V2Params::new(KParam::Finite(2), 0).unwrap()).unwrap();
        assert_eq!(s.space.to_json(), r#"{"factors":[{"kind":"disk","d":"2","label":"D0"}]}"#.replace("\"2\"", "2"));
        assert_eq!(s.unit, BundleExpr::trivial(&s.space, 1u32));
        let s = build_stage(V2Params::new(KParam::Finite(2), 3).unwrap()).unwrap();
        assert_eq!(s.unit.rank(), BigUint::from(24u32));
        let s = build_stage(V2Params::new(KParam::Infinite, 2).unwrap()).unwrap();
        assert_eq!(s.space.disk_power(), BigUint::from(32u32));
        let cps: Vec<String> = s.space.factors().iter().map(|a| a.to_string()).collect();
        assert_eq!(cps.len(), 4);
        assert_eq!(s.space.factors()[cp_factor(KParam::Infinite, 2)].kind.generator_cap(), Some(BigUint::from(9u32)));
    }

    #[test]
    fn pushforward_closed_form_and_rank() {
        for k in [KParam::Finite(1), KParam::Finite(3), KParam::Infinite] {
            let eta2 = eta(k, 2).unwrap().with_trivial(&BigUint::from(3u32));
            let stepped = push_between(k, 2, 5, &eta2).unwrap();
            assert_eq!(stepped, push_between_closed_form(k, 2, 5, &eta2).unwrap());
            let one = push_forward(k, 2, &eta2).unwrap();
            assert_eq!(one.rank() * factorial(3), eta2.rank() * factorial(4));
        }
    }

    #[test]
    fn traces() {
        let k = KParam::Finite(2);
        let p = V2Params::new(k, 3).unwrap();
        assert_eq!(trace(&eta(k, 3).unwrap(), p).unwrap().value, q(23, 12));
        let e = BundleExpr::trivial(&stage_space(k, 3).unwrap(), 1u32);
        assert_eq!(trace(&e, p).unwrap().value, q(1, 24));
        let unit = build_stage(p).unwrap().unit;
        assert_eq!(trace(&unit, p).unwrap().value, q(1, 1));
        assert!(trace(&e, V2Params::new(k, 2).unwrap()).is_err());
    }

    #[test]
    fn comparability_examples() {
        let r = comparability_triple(KParam::Finite(2), 2, 3, Budget::default(), ExpansionPolicy::RequireFullExpansion).unwrap();
        assert!(r.part_i && r.part_ii && r.part_iii);
        let r = comparability_triple(KParam::Infinite, 2, 2, Budget::default(), ExpansionPolicy::AllowStructured).unwrap();
        assert!(r.passed());
        assert!(r.traces.q_sum.sequence_entry);
        assert_eq!(r.traces.formula, q(4, 3));
        assert_eq!(r.traces.q_sum.value, q(3, 2));
        let r = comparability_triple(KParam::Finite(2), 1, 1, Budget::default(), ExpansionPolicy::AllowStructured).unwrap();
        assert!(r.stable_range[0].verdict.dominates());
    }

    #[test]
    fn refusal_when_full_expansion_required() {
        let err = comparability_triple(KParam::Finite(2), 2, 4, Budget::new(10), ExpansionPolicy::RequireFullExpansion).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        let ok = comparability_triple(KParam::Finite(2), 2, 4, Budget::new(10), ExpansionPolicy::AllowStructured).unwrap();
        assert!(ok.passed());
    }

    #[test]
    fn radius_examples() {
        let eps = q(1, 10);
        let r = radius_of_comparison(KParam::Finite(3), 5, &eps).unwrap();
        assert_eq!(r.witness.as_ref().unwrap().stage, 4);
        assert_eq!(r.value, Some(q(3, 1)));
        assert!(r.passed());
        let r = radius_of_comparison(KParam::Finite(1), 1, &eps).unwrap();
        assert_eq!(r.value, Some(q(1, 1)));
        let r = radius_of_comparison(KParam::Infinite, 4, &eps).unwrap();
        assert!(r.divergent && r.value.is_none() && r.passed());
    }
}
