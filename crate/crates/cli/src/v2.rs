use crate::util::{parse_k, parse_rational};
use anyhow::bail;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;
use villadsen_core::bundles::BundleExpr;
use villadsen_core::exact::RationalRepr;
use villadsen_core::report::{CheckRecord, Report};
use villadsen_core::v2_type2::{
    build_stage, comparability_triple, eta, eta_component, factorial, radius_of_comparison, trace, ExpansionPolicy, KParam,
    V2Params,
};
use villadsen_core::Budget;

#[derive(clap::Args)]
pub struct Args {
    /// Comma-separated values of k (positive integers or `inf`)
    #[arg(short = 'k', value_delimiter = ',', value_parser = parse_k, required = true)]
    k: Vec<KParam>,
    /// Stage n
    #[arg(short = 'n')]
    n: usize,
    /// Radius of comparison over stages 0..=n
    #[arg(long)]
    rc: bool,
    /// Comparability checks for every n' in 1..=n
    #[arg(long)]
    comparability: bool,
    /// Last stage at which the Euler obstruction is checked (defaults to n')
    #[arg(long)]
    stage: Option<usize>,
    /// Tolerance for the radius-of-comparison witness traces
    #[arg(long, default_value = "1/10")]
    epsilon: String,
    /// Refuse instead of falling back to the structured Euler factorization
    #[arg(long)]
    full_expansion: bool,
}

pub fn run(command: Vec<String>, args: &Args, budget: Budget) -> anyhow::Result<Report> {
    let epsilon = parse_rational(&args.epsilon)?;
    if args.comparability && args.n == 0 {
        bail!("--comparability needs n >= 1");
    }
    let policy = if args.full_expansion { ExpansionPolicy::RequireFullExpansion } else { ExpansionPolicy::AllowStructured };
    let ks: Vec<String> = args.k.iter().map(|k| k.to_string()).collect();
    let mut report = Report::new(
        command,
        json!({
            "k": ks, "n": args.n, "rc": args.rc, "comparability": args.comparability,
            "stage": args.stage, "epsilon": RationalRepr::from(&epsilon), "policy": policy,
        }),
    );
    report.assume("the point evaluations are chosen so that the limit algebra is simple");

    for &k in &args.k {
        stage_checks(&mut report, k, args.n)?;
        if args.rc {
            let rc = radius_of_comparison(k, args.n, &epsilon)?;
            report.push(CheckRecord::new(format!("radius_of_comparison[k={k}]"), rc.passed(), &rc));
        }
        if args.comparability {
            for n in 1..=args.n {
                let j = args.stage.unwrap_or(n).max(n);
                let triple = comparability_triple(k, n, j, budget, policy)?;
                report.push(CheckRecord::new(format!("comparability[k={k},n={n},j={j}]"), triple.passed(), &triple));
            }
        }
    }
    Ok(report)
}

fn stage_checks(report: &mut Report, k: KParam, n: usize) -> anyhow::Result<()> {
    let params = V2Params::new(k, n)?;
    let stage = build_stage(params)?;
    let expected_rank = factorial(n as u64 + 1);
    report.push(CheckRecord::new(
        format!("unit_bundle[k={k},n={n}]"),
        stage.unit.rank() == expected_rank,
        json!({
            "space": stage.space.to_string(),
            "real_dimension": stage.space.real_dimension().to_string(),
            "unit": serde_json::to_value(&stage.unit)?,
            "rank": stage.unit.rank().to_string(),
        }),
    ));

    let one = BigRational::from_integer(BigInt::from(1));
    let unit_trace = trace(&stage.unit, params)?;
    let e = trace(&BundleExpr::trivial(&stage.space, 1u32), params)?;
    let components = (1..=n).map(|i| trace(&eta_component(k, n, i)?, params)).collect::<villadsen_core::Result<Vec<_>>>()?;
    let q_sum = trace(&eta(k, n)?, params)?;
    let fact = BigInt::from(expected_rank);
    let (formula_name, formula, holds) = match k {
        KParam::Finite(kv) => {
            let f = BigRational::new(BigInt::from(kv) * &fact - BigInt::from(kv), fact.clone());
            ("(k(n+1)! - k)/(n+1)!", f.clone(), q_sum.value == f)
        }
        KParam::Infinite => {
            let bound = BigRational::new(BigInt::from(n * n), BigInt::from(n + 1));
            ("lower bound n^2/(n+1)", bound.clone(), q_sum.value >= bound)
        }
    };
    let e_ok = e.value == BigRational::new(BigInt::from(1), fact);
    report.push(CheckRecord::new(
        format!("traces[k={k},n={n}]"),
        holds && e_ok && unit_trace.value == one,
        json!({
            "unit": unit_trace,
            "e": e,
            "q": components,
            "q_sum": q_sum,
            "formula": formula_name,
            "formula_value": RationalRepr::from(&formula),
        }),
    ));
    Ok(())
}
