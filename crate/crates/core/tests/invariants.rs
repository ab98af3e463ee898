use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use villadsen_core::bundles::BundleExpr;
use villadsen_core::cfp_witness::{build_witness, next_l, verify_lower, verify_upper};
use villadsen_core::cohomology::ClassDocument;
use villadsen_core::spaces::{SpaceDescriptor, SpaceMap};
use villadsen_core::v2_type2::{
    build_stage, eta, factorial, push_forward, sigma, stage_space, trace, KParam, V2Params,
};
use villadsen_core::vi_type1::{ratio_trajectory, VISystem};
use villadsen_core::Budget;

#[test]
fn unit_rank_telescopes() {
    for k in [KParam::Finite(1), KParam::Finite(4), KParam::Infinite] {
        for n in 0..=12 {
            let stage = build_stage(V2Params::new(k, n).unwrap()).unwrap();
            let direct: BigUint = (0..=n as u64).map(sigma).sum();
            assert_eq!(stage.unit.rank(), direct);
            assert_eq!(direct, factorial(n as u64 + 1));
        }
    }
}

#[test]
fn dimension_over_rank_is_k() {
    for k in 1..=5u64 {
        for n in 0..=8 {
            let stage = build_stage(V2Params::new(KParam::Finite(k), n).unwrap()).unwrap();
            let ratio = BigRational::new(
                BigInt::from(stage.space.real_dimension()),
                BigInt::from(stage.unit.rank() * 2u32),
            );
            assert_eq!(ratio, BigRational::from_integer(BigInt::from(k)), "k = {k}, n = {n}");
        }
    }
}

#[test]
fn trace_is_additive_and_normalized() {
    let k = KParam::Finite(3);
    let p = V2Params::new(k, 4).unwrap();
    let a = eta(k, 4).unwrap();
    let b = BundleExpr::trivial(a.base(), 7u32);
    let sum = trace(&a.direct_sum(&b).unwrap(), p).unwrap().value;
    assert_eq!(sum, trace(&a, p).unwrap().value + trace(&b, p).unwrap().value);
    assert_eq!(trace(&build_stage(p).unwrap().unit, p).unwrap().value, BigRational::from_integer(1.into()));
}

#[test]
fn pushforward_scales_rank() {
    for k in [KParam::Finite(2), KParam::Infinite] {
        for i in 0..6 {
            let eta_i = if i == 0 { BundleExpr::trivial(&stage_space(k, 0).unwrap(), 3u32) } else { eta(k, i).unwrap() };
            let pushed = push_forward(k, i, &eta_i).unwrap();
            let before: BigUint = (0..=i as u64).map(sigma).sum();
            let after: BigUint = (0..=i as u64 + 1).map(sigma).sum();
            assert_eq!(pushed.rank() * &before, eta_i.rank() * &after);
        }
    }
}

#[test]
fn next_l_is_monotone() {
    let values: Vec<usize> = (1..16).map(|p| next_l(p).unwrap().next).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
    for p in 1..16 {
        let r = next_l(p).unwrap();
        assert!(r.holds && r.minimal && r.margin >= BigRational::from_integer(0.into()));
    }
}

#[test]
fn three_term_witness_verifies() {
    let w = build_witness(3, &[]).unwrap();
    for t in &w.terms {
        assert!(verify_upper(t).unwrap().passed());
        assert!(verify_lower(&w, t.index, t.l, Budget::default()).unwrap().passed());
    }
    let r = verify_lower(&w, 2, 10, Budget::default()).unwrap();
    assert!(r.passed());
    assert_eq!(r.chain.len(), 2);
}

#[test]
fn type_one_ratios_never_increase() {
    let sys = VISystem::from_json(
        r#"{"seed_dim":1,"steps":[
            {"proj_mults":{"a":1,"b":2},"point_evals":1},
            {"proj_mults":{"a":3},"point_evals":2},
            {"proj_mults":{"a":1,"b":1,"c":1},"point_evals":0}
        ]}"#,
    )
    .unwrap();
    for i in 0..=3 {
        let t = ratio_trajectory(&sys.steps, i).unwrap();
        assert!(t.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn documents_round_trip() {
    let s = SpaceDescriptor::from_json(r#"{"factors":[{"kind":"disk","d":2},{"kind":"s2"},{"kind":"cp","n":"3"}]}"#).unwrap();
    assert_eq!(SpaceDescriptor::from_json(&s.to_json()).unwrap(), s);
    let b = BundleExpr::from_json(&format!(
        r#"{{"base":{},"trivial":1,"summands":[{{"line":{{"factor":2}},"mult":"2"}},{{"line":null,"mult":1}}]}}"#,
        s.to_json()
    ))
    .unwrap();
    assert_eq!(b.rank(), BigUint::from(4u32));
    assert_eq!(BundleExpr::from_json(&b.to_json()).unwrap(), b);
    let c = b.chern().unwrap();
    let doc = ClassDocument::from_class(&s, &c).unwrap();
    assert_eq!(ClassDocument::from_json(&doc.to_json()).unwrap().to_class().unwrap(), c);
    let big = stage_space(KParam::Infinite, 3).unwrap();
    let f = SpaceMap::projection_onto(&big, &stage_space(KParam::Infinite, 2).unwrap(), (0..4).collect()).unwrap();
    assert_eq!(SpaceMap::from_json(&f.to_json()).unwrap(), f);
}
