//! Villadsen systems of the first type.
//!
//! A step `A_t -> A_{t+1}` is described by the multiplicities of its
//! coordinate-projection eigenvalue maps (keyed by an abstract id) and the
//! number of point evaluations. From these we track, for the composed map
//! `A_i -> A_j`,
//!
//! * `N(i,j)`: the number of distinct coordinate projections,
//! * `α(i,j)`: the total multiplicity of coordinate projections,
//! * `M(i,j)`: the total number of eigenvalue maps,
//!
//! all of which are multiplicative along composition.

use crate::bundles::{pushforward_diagonal, BundleExpr, EigenvalueMap};
use crate::exact::{rational, uint_str};
use crate::spaces::{SpaceDescriptor, SpaceMap};
use crate::{Budget, Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VIStepSpec {
    /// Multiplicity of each coordinate projection, keyed by projection id.
    pub proj_mults: BTreeMap<String, u64>,
    #[serde(default)]
    pub point_evals: u64,
    /// Exponent `k` in `X_{t+1} = X_t^k`; defaults to the number of distinct
    /// projections (at least 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<u64>,
}

impl VIStepSpec {
    pub fn new(proj_mults: impl IntoIterator<Item = (String, u64)>, point_evals: u64) -> Result<Self> {
        let step = VIStepSpec { proj_mults: proj_mults.into_iter().collect(), point_evals, arity: None };
        step.validate()?;
        Ok(step)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((id, _)) = self.proj_mults.iter().find(|(_, m)| **m == 0) {
            return Err(Error::Precondition(format!("projection {id:?} has multiplicity 0")));
        }
        if self.proj_mults.is_empty() && self.point_evals == 0 {
            return Err(Error::Precondition("a step needs at least one eigenvalue map".into()));
        }
        if let Some(arity) = self.arity {
            if arity == 0 || arity < self.proj_mults.len() as u64 {
                return Err(Error::Precondition(format!(
                    "arity {arity} cannot host {} distinct projections",
                    self.proj_mults.len()
                )));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> u64 {
        self.arity.unwrap_or_else(|| (self.proj_mults.len() as u64).max(1))
    }

    pub fn stats(&self) -> VIStageStats {
        let alpha: BigUint = self.proj_mults.values().map(|m| BigUint::from(*m)).sum();
        VIStageStats {
            n: BigUint::from(self.proj_mults.len()),
            m: &alpha + self.point_evals,
            alpha,
        }
    }
}

/// A standard decomposition: seed dimension plus the connecting steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VISystem {
    pub seed_dim: u64,
    pub steps: Vec<VIStepSpec>,
}

impl VISystem {
    pub fn from_json(text: &str) -> Result<Self> {
        let system: VISystem = serde_json::from_str(text)?;
        for (t, step) in system.steps.iter().enumerate() {
            step.validate().map_err(|e| Error::Parse(format!("step {t}: {e}")))?;
        }
        Ok(system)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("systems always serialize")
    }

    /// `dim(X_i) = seed_dim · Π_{t<i} arity_t`.
    pub fn stage_dimension(&self, i: usize) -> Result<BigUint> {
        check_stage(&self.steps, i)?;
        Ok(self.steps[..i].iter().fold(BigUint::from(self.seed_dim), |acc, s| acc * s.arity()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VIStageStats {
    #[serde(rename = "N", with = "uint_str")]
    pub n: BigUint,
    #[serde(with = "uint_str")]
    pub alpha: BigUint,
    #[serde(rename = "M", with = "uint_str")]
    pub m: BigUint,
}

impl VIStageStats {
    pub fn new(n: impl Into<BigUint>, alpha: impl Into<BigUint>, m: impl Into<BigUint>) -> Result<Self> {
        let stats = VIStageStats { n: n.into(), alpha: alpha.into(), m: m.into() };
        if stats.m.is_zero() || stats.n > stats.alpha || stats.alpha > stats.m || (stats.n.is_zero() != stats.alpha.is_zero()) {
            return Err(Error::Precondition(format!(
                "need 0 <= N <= alpha <= M, M >= 1 and N = 0 iff alpha = 0; got ({}, {}, {})",
                stats.n, stats.alpha, stats.m
            )));
        }
        Ok(stats)
    }

    pub fn identity() -> Self {
        VIStageStats { n: BigUint::one(), alpha: BigUint::one(), m: BigUint::one() }
    }

    pub fn n_ratio(&self) -> BigRational {
        ratio(&self.n, &self.m)
    }

    pub fn alpha_ratio(&self) -> BigRational {
        ratio(&self.alpha, &self.m)
    }
}

fn ratio(a: &BigUint, b: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(a.clone()), BigInt::from(b.clone()))
}

/// Statistics of a composed map: all three counts multiply.
pub fn compose_stats(a: &VIStageStats, b: &VIStageStats) -> VIStageStats {
    VIStageStats { n: &a.n * &b.n, alpha: &a.alpha * &b.alpha, m: &a.m * &b.m }
}

fn check_stage(steps: &[VIStepSpec], i: usize) -> Result<()> {
    if i > steps.len() {
        return Err(Error::Precondition(format!("stage {i} is beyond the last stage {}", steps.len())));
    }
    Ok(())
}

/// Statistics of `φ_{i,j}`, stages numbered from 0 with `steps[t]: A_t -> A_{t+1}`.
pub fn stats_between(steps: &[VIStepSpec], i: usize, j: usize) -> Result<VIStageStats> {
    check_stage(steps, j)?;
    if i > j {
        return Err(Error::Precondition(format!("stage {i} comes after stage {j}")));
    }
    Ok(steps[i..j].iter().fold(VIStageStats::identity(), |acc, s| compose_stats(&acc, &s.stats())))
}

/// `N(i,j)/M(i,j)` for `j = i+1, ..., last`. Nonincreasing.
pub fn ratio_trajectory(steps: &[VIStepSpec], i: usize) -> Result<Vec<BigRational>> {
    check_stage(steps, i)?;
    let mut acc = VIStageStats::identity();
    Ok(steps[i..]
        .iter()
        .map(|s| {
            acc = compose_stats(&acc, &s.stats());
            acc.n_ratio()
        })
        .collect())
}

/// `α(i,j)/M(i,j)` for `j = i+1, ..., last`.
pub fn alpha_trajectory(steps: &[VIStepSpec], i: usize) -> Result<Vec<BigRational>> {
    check_stage(steps, i)?;
    let mut acc = VIStageStats::identity();
    Ok(steps[i..]
        .iter()
        .map(|s| {
            acc = compose_stats(&acc, &s.stats());
            acc.alpha_ratio()
        })
        .collect())
}

/// A value read off the last available stage. It estimates a limit from
/// above (the ratios are nonincreasing) but is not the limit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteStageEstimate {
    #[serde(with = "rational")]
    pub value: BigRational,
    pub from_stage: usize,
    pub at_stage: usize,
    pub finite_stage: bool,
}

/// `α(i,j)/M(i,j)` at the last stage; its limit vanishing for every `i` is
/// what a unique trace requires.
pub fn trace_extreme_ratio(steps: &[VIStepSpec], i: usize) -> Result<FiniteStageEstimate> {
    let stats = stats_between(steps, i, steps.len())?;
    Ok(FiniteStageEstimate { value: stats.alpha_ratio(), from_stage: i, at_stage: steps.len(), finite_stage: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Every finite-stage estimate is zero.
    Zero,
    /// Estimates are positive and nondecreasing in `i`.
    IncreasingTowardOne,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRatios {
    pub stage: usize,
    #[serde(with = "rational")]
    pub c_estimate: BigRational,
    #[serde(with = "rational")]
    pub d_estimate: BigRational,
}

/// Finite-stage view of the limits `c_i = lim_j N/M` and `d_i = lim_j α/M`.
/// Each sequence either vanishes identically or tends to 1; the trend below
/// says which alternative the available stages are consistent with and is
/// always flagged as an extrapolation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioDiagnostic {
    pub stages: Vec<StageRatios>,
    pub c_trend: Trend,
    pub d_trend: Trend,
    pub extrapolated: bool,
}

pub fn ratio_diagnostic(steps: &[VIStepSpec]) -> RatioDiagnostic {
    let last = steps.len();
    let stages: Vec<StageRatios> = (0..last)
        .map(|i| {
            let stats = stats_between(steps, i, last).expect("stage within range");
            StageRatios { stage: i, c_estimate: stats.n_ratio(), d_estimate: stats.alpha_ratio() }
        })
        .collect();
    let trend = |values: Vec<&BigRational>| {
        if values.is_empty() {
            Trend::Inconclusive
        } else if values.iter().all(|v| v.is_zero()) {
            Trend::Zero
        } else if values.iter().all(|v| !v.is_zero()) && values.windows(2).all(|w| w[0] <= w[1]) {
            Trend::IncreasingTowardOne
        } else {
            Trend::Inconclusive
        }
    };
    let c_trend = trend(stages.iter().map(|s| &s.c_estimate).collect());
    let d_trend = trend(stages.iter().map(|s| &s.d_estimate).collect());
    RatioDiagnostic { stages, c_trend, d_trend, extrapolated: true }
}

/// Multiplicities `m(λ)` of the distinct coordinate projections of `φ_{i,j}`.
/// A composite is a projection exactly when every factor is, so the list is
/// the elementwise product of the per-step multiplicity lists.
pub fn projection_multiplicities(steps: &[VIStepSpec], i: usize, j: usize, budget: Budget) -> Result<Vec<BigUint>> {
    let stats = stats_between(steps, i, j)?;
    if !budget.allows(stats.n.to_u128().unwrap_or(u128::MAX)) {
        return Err(Error::BudgetExceeded {
            what: "enumeration of distinct coordinate projections".into(),
            required: stats.n.to_string(),
            budget: budget.max_terms,
        });
    }
    let mut mults = vec![BigUint::one()];
    for step in &steps[i..j] {
        mults = mults.iter().flat_map(|a| step.proj_mults.values().map(move |m| a * m)).collect();
    }
    Ok(mults)
}

/// Top Chern class of the restriction to `K_{i,j} ≅ (S^2)^{nN}` of the
/// image of `ρ_1^*η ⊕ ... ⊕ ρ_n^*η`, computed two independent ways.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopChernReport {
    pub n: usize,
    pub distinct_projections: usize,
    /// Chern index `nN`.
    #[serde(with = "uint_str")]
    pub degree: BigUint,
    /// `Π_l m(λ_l)^n`.
    #[serde(with = "crate::exact::int_str")]
    pub closed_form: BigInt,
    /// Coefficient of `Π z_{l,s}` in the expanded total Chern class.
    #[serde(with = "crate::exact::int_str")]
    pub expansion: BigInt,
    /// No Chern class above index `nN` survives.
    pub higher_classes_vanish: bool,
    pub agree: bool,
    pub nonzero: bool,
}

impl TopChernReport {
    pub fn verified(&self) -> bool {
        self.agree && self.nonzero && self.higher_classes_vanish
    }
}

/// `c_{nN}(ξ_j)` where `ξ_j = ⊕_l m(λ_l) · λ_l^*(ρ_1^*η ⊕ ... ⊕ ρ_n^*η)`.
pub fn top_chern_of_restriction(n: usize, mults: &[BigUint], budget: Budget) -> Result<TopChernReport> {
    let big_n = mults.len();
    if n == 0 || big_n == 0 {
        return Err(Error::Precondition("need n >= 1 and at least one coordinate projection".into()));
    }
    if mults.iter().any(Zero::is_zero) {
        return Err(Error::Precondition("multiplicities must be positive".into()));
    }
    let generators = n.checked_mul(big_n).ok_or_else(|| Error::TooLarge("n · N overflows".into()))?;
    let required = 1u128.checked_shl(generators as u32).unwrap_or(u128::MAX);
    if generators >= 128 || !budget.allows(required) {
        return Err(Error::BudgetExceeded {
            what: format!("expansion over (S^2)^{generators}"),
            required: required.to_string(),
            budget: budget.max_terms,
        });
    }

    let k = SpaceDescriptor::sphere_power(n);
    let mut xi = BundleExpr::zero(&k);
    for s in 0..n {
        xi = xi.direct_sum(&BundleExpr::line(&k, s, 1u32)?)?;
    }
    let total = SpaceDescriptor::sphere_power(generators);
    let maps = mults
        .iter()
        .enumerate()
        .map(|(l, m)| Ok(EigenvalueMap::new(SpaceMap::projection_onto(&total, &k, (l * n..(l + 1) * n).collect())?, m.clone())))
        .collect::<Result<Vec<_>>>()?;
    let xi_j = pushforward_diagonal(&xi, &maps)?;
    let chern = xi_j.chern_within(budget)?;

    let top_degree = 2 * generators as u128;
    let top = chern.homogeneous_component(top_degree);
    let expansion = top.terms().into_iter().find(|(e, _)| e.iter().all(|x| *x == 1)).map(|(_, c)| c).unwrap_or_default();
    let closed_form: BigInt = mults.iter().map(|m| BigInt::from(m.pow(n as u32))).product();
    Ok(TopChernReport {
        n,
        distinct_projections: big_n,
        degree: BigUint::from(generators),
        higher_classes_vanish: chern.top_degree() == Some(top_degree),
        agree: closed_form == expansion && top.len() == 1,
        nonzero: !expansion.is_zero(),
        closed_form,
        expansion,
    })
}

/// Replay of the rank count that rules out `N/M >= (2n-1)/(2n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContradictionReport {
    pub n: u64,
    pub stats: VIStageStats,
    #[serde(with = "rational")]
    pub ratio: BigRational,
    /// `(2n-1)/(2n)`.
    #[serde(with = "rational")]
    pub threshold: BigRational,
    pub hypothesis_holds: bool,
    /// `nN <= (n-2)α + n(M-α)` at the worst case `r = M - α`.
    pub rank_count_holds: bool,
    /// `nN <= nM - 2N`.
    pub rank_bound_holds: bool,
    /// `n/(n+2)`, the ratio bound implied by the rank bound.
    #[serde(with = "rational")]
    pub ratio_bound: BigRational,
    /// `1 - (2/n)·threshold`.
    #[serde(with = "rational")]
    pub substituted: BigRational,
    /// `((n-1)/n)^2`.
    #[serde(with = "rational")]
    pub square: BigRational,
    /// `(n-1)/n`.
    #[serde(with = "rational")]
    pub upper: BigRational,
    /// `substituted = square < upper < threshold`.
    pub chain_closes: bool,
    /// Hypothesis and rank bound cannot hold together.
    pub contradiction: bool,
}

impl ContradictionReport {
    /// Either the hypothesis fails, or it forces the contradiction.
    pub fn consistent(&self) -> bool {
        self.chain_closes && (!self.hypothesis_holds || self.contradiction)
    }
}

pub fn ratio_contradiction_check(n: u64, stats: &VIStageStats) -> Result<ContradictionReport> {
    if n < 2 {
        return Err(Error::Precondition("the rank count needs n >= 2".into()));
    }
    let nb = BigUint::from(n);
    let q = |a: u64, b: u64| BigRational::new(BigInt::from(a), BigInt::from(b));

    let threshold = q(2 * n - 1, 2 * n);
    let ratio = stats.n_ratio();
    let hypothesis_holds = ratio >= threshold;

    let lhs = &nb * &stats.n;
    let r_worst = &stats.m - &stats.alpha;
    let rank_count_holds = lhs <= (&nb - 2u32) * &stats.alpha + &nb * &r_worst;
    let rank_bound_holds = lhs + &stats.n * 2u32 <= &nb * &stats.m;

    let ratio_bound = q(n, n + 2);
    let substituted = BigRational::one() - q(2, n) * &threshold;
    let square = q(n - 1, n) * q(n - 1, n);
    let upper = q(n - 1, n);
    let chain_closes = substituted == square && square < upper && upper < threshold && ratio_bound < threshold;

    Ok(ContradictionReport {
        n,
        stats: stats.clone(),
        contradiction: hypothesis_holds && !rank_bound_holds,
        ratio,
        threshold,
        hypothesis_holds,
        rank_count_holds,
        rank_bound_holds,
        ratio_bound,
        substituted,
        square,
        upper,
        chain_closes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(mults: &[(&str, u64)], points: u64) -> VIStepSpec {
        VIStepSpec::new(mults.iter().map(|(k, v)| (k.to_string(), *v)), points).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn composition_examples() {
        let a = VIStageStats::new(3u32, 3u32, 4u32).unwrap();
        assert_eq!(compose_stats(&a, &a), VIStageStats::new(9u32, 9u32, 16u32).unwrap());
        assert_eq!(compose_stats(&a, &VIStageStats::identity()), a);
        let b = VIStageStats::new(2u32, 3u32, 5u32).unwrap();
        let c = VIStageStats::new(1u32, 2u32, 4u32).unwrap();
        assert_eq!(compose_stats(&b, &c), VIStageStats::new(2u32, 6u32, 20u32).unwrap());
    }

    #[test]
    fn invalid_stats_rejected() {
        assert!(VIStageStats::new(3u32, 2u32, 4u32).is_err());
        assert!(VIStageStats::new(1u32, 5u32, 4u32).is_err());
        assert!(VIStageStats::new(0u32, 0u32, 0u32).is_err());
        assert!(VIStageStats::new(0u32, 1u32, 2u32).is_err());
        assert!(VIStageStats::new(0u32, 0u32, 3u32).is_ok());
    }

    #[test]
    fn constant_steps_give_geometric_ratios() {
        let steps = vec![step(&[("a", 1), ("b", 1), ("c", 1)], 1); 4];
        let traj = ratio_trajectory(&steps, 0).unwrap();
        let expected: Vec<BigRational> = (1..=4).map(|e| q(3, 4).pow(e)).collect();
        assert_eq!(traj, expected);
        assert_eq!(ratio_trajectory(&steps, 2).unwrap().len(), 2);
        assert!(ratio_trajectory(&steps, 5).is_err());
    }

    #[test]
    fn alpha_ratio_at_last_stage() {
        let steps = vec![step(&[("a", 2), ("b", 1)], 1), step(&[("a", 1)], 3)];
        let est = trace_extreme_ratio(&steps, 0).unwrap();
        assert_eq!(est.value, q(3, 4) * q(1, 4));
        assert!(est.finite_stage);
        assert_eq!(est.at_stage, 2);
    }

    #[test]
    fn diagnostic_flags_extrapolation() {
        let steps = vec![step(&[("a", 1), ("b", 1)], 1); 3];
        let diag = ratio_diagnostic(&steps);
        assert!(diag.extrapolated);
        assert_eq!(diag.c_trend, Trend::IncreasingTowardOne);
        let flat = vec![step(&[], 2); 3];
        assert_eq!(ratio_diagnostic(&flat).c_trend, Trend::Zero);
    }

    #[test]
    fn projection_multiplicity_lists() {
        let steps = vec![step(&[("a", 2), ("b", 3)], 1), step(&[("x", 5)], 0)];
        let mut m = projection_multiplicities(&steps, 0, 2, Budget::default()).unwrap();
        m.sort();
        assert_eq!(m, vec![big(10), big(15)]);
        assert!(projection_multiplicities(&steps, 0, 2, Budget::new(1)).is_err());
    }

    #[test]
    fn top_chern_examples() {
        let r = top_chern_of_restriction(2, &[big(1), big(3)], Budget::default()).unwrap();
        assert_eq!((r.degree.clone(), r.expansion.clone()), (big(4), BigInt::from(9)));
        assert!(r.verified());
        let r = top_chern_of_restriction(1, &[big(1)], Budget::default()).unwrap();
        assert_eq!((r.degree.clone(), r.closed_form.clone()), (big(1), BigInt::from(1)));
        let r = top_chern_of_restriction(2, &[big(2), big(2), big(2)], Budget::default()).unwrap();
        assert_eq!((r.degree.clone(), r.expansion.clone()), (big(6), BigInt::from(64)));
        assert!(r.verified());
    }

    #[test]
    fn contradiction_examples() {
        let r = ratio_contradiction_check(2, &VIStageStats::new(3u32, 3u32, 4u32).unwrap()).unwrap();
        assert!(r.hypothesis_holds && r.contradiction && r.consistent());
        assert_eq!(r.ratio_bound, q(1, 2));

        let r = ratio_contradiction_check(3, &VIStageStats::new(5u32, 5u32, 6u32).unwrap()).unwrap();
        assert!(r.hypothesis_holds && r.contradiction);
        assert_eq!(r.ratio_bound, q(3, 5));

        let r = ratio_contradiction_check(4, &VIStageStats::new(0u32, 0u32, 6u32).unwrap()).unwrap();
        assert!(!r.hypothesis_holds && !r.contradiction && r.consistent());

        assert!(ratio_contradiction_check(1, &VIStageStats::identity()).is_err());
    }

    #[test]
    fn config_parsing() {
        let text = r#"{"seed_dim":2,"steps":[{"proj_mults":{"p1":2,"p2":1},"point_evals":3},{"proj_mults":{"p1":1},"point_evals":1,"arity":2}]}"#;
        let sys = VISystem::from_json(text).unwrap();
        assert_eq!(sys.steps.len(), 2);
        assert_eq!(sys.stage_dimension(2).unwrap(), big(8));
        assert_eq!(VISystem::from_json(&sys.to_json()).unwrap(), sys);
        assert!(VISystem::from_json(r#"{"seed_dim":2,"steps":[],"bogus":1}"#).is_err());
        assert!(VISystem::from_json(r#"{"seed_dim":2,"steps":[{"proj_mults":{"p":0}}]}"#).is_err());
        assert!(VISystem::from_json(r#"{"seed_dim":2,"steps":[{"proj_mults":{}}]}"#).is_err());
    }
}
