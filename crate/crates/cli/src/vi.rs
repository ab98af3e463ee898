use crate::util::read_file;
use anyhow::{bail, Context};
use clap::ValueEnum;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::PathBuf;
use villadsen_core::report::{CheckRecord, Report};
use villadsen_core::vi_type1::{
    alpha_trajectory, projection_multiplicities, ratio_contradiction_check, ratio_diagnostic, ratio_trajectory,
    stats_between, top_chern_of_restriction, trace_extreme_ratio, VIStageStats, VISystem,
};
use villadsen_core::exact::RationalRepr;
use villadsen_core::Budget;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    /// Closed-form top Chern coefficient against the full expansion
    TopChern,
    /// The ratio contradiction chain on random statistics above the threshold
    Contradiction,
}

#[derive(clap::Args)]
pub struct Args {
    /// System config (JSON); not needed with --sweep
    #[arg(required_unless_present = "sweep")]
    config: Option<PathBuf>,
    /// Source stage i of the composed maps
    #[arg(long, default_value_t = 0)]
    stage: usize,
    /// Run the rank-count and top Chern checks with n copies of the seed bundle
    #[arg(long)]
    witness: Option<usize>,
    /// Randomized sweep instead of a config
    #[arg(long, value_enum, conflicts_with_all = ["config", "witness"])]
    sweep: Option<Sweep>,
    #[arg(long, default_value_t = 250)]
    cases: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

pub fn run(command: Vec<String>, args: &Args, budget: Budget) -> anyhow::Result<Report> {
    if let Some(sweep) = args.sweep {
        return Ok(match sweep {
            Sweep::TopChern => sweep_top_chern(command, args, budget)?,
            Sweep::Contradiction => sweep_contradiction(command, args)?,
        });
    }
    let Some(path) = &args.config else { bail!("a config file is required") };
    let system = VISystem::from_json(&read_file(path)?).with_context(|| format!("invalid config in {}", path.display()))?;
    let i = args.stage;
    let last = system.steps.len();
    if i > last {
        bail!("stage {i} is beyond the last stage {last}");
    }
    let mut report = Report::new(command, json!({ "system": system, "stage": i, "witness": args.witness }));

    let per_step: Vec<VIStageStats> = system.steps.iter().map(|s| s.stats()).collect();
    let total = stats_between(&system.steps, i, last)?;
    let product = per_step[i..].iter().fold(VIStageStats::identity(), |a, b| villadsen_core::vi_type1::compose_stats(&a, b));
    report.push(CheckRecord::new("stats_multiplicative", total == product, json!({ "per_step": per_step, "composed": total })));

    let n_ratios = ratio_trajectory(&system.steps, i)?;
    let a_ratios = alpha_trajectory(&system.steps, i)?;
    let monotone = n_ratios.windows(2).all(|w| w[0] >= w[1]) && a_ratios.windows(2).all(|w| w[0] >= w[1]);
    let dims: Vec<String> = (i..=last).map(|t| system.stage_dimension(t).map(|d| d.to_string())).collect::<Result<_, _>>()?;
    report.push(CheckRecord::new(
        "ratio_trajectory",
        monotone,
        json!({
            "from_stage": i,
            "n_over_m": n_ratios.iter().map(RationalRepr::from).collect::<Vec<_>>(),
            "alpha_over_m": a_ratios.iter().map(RationalRepr::from).collect::<Vec<_>>(),
            "stage_dimensions": dims,
        }),
    ));
    report.push(CheckRecord::info("trace_extreme_ratio", trace_extreme_ratio(&system.steps, i)?));
    report.push(CheckRecord::info("ratio_diagnostic", ratio_diagnostic(&system.steps)));

    if let Some(n) = args.witness {
        let contradiction = ratio_contradiction_check(n as u64, &total)?;
        report.push(CheckRecord::new("ratio_contradiction", contradiction.consistent(), &contradiction));
        let mults = projection_multiplicities(&system.steps, i, last, budget)?;
        if mults.is_empty() {
            report.push(CheckRecord::info("top_chern", json!({ "skipped": "the composed map has no coordinate projections" })));
        } else {
            let top = top_chern_of_restriction(n, &mults, budget)?;
            report.push(CheckRecord::new("top_chern", top.verified(), &top));
        }
    }
    Ok(report)
}

fn sweep_top_chern(command: Vec<String>, args: &Args, budget: Budget) -> anyhow::Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut report = Report::new(command, json!({ "sweep": "top_chern", "cases": args.cases, "seed": args.seed }));
    let mut failures = Vec::new();
    let mut by_shape = std::collections::BTreeMap::<String, usize>::new();
    for _ in 0..args.cases {
        let n = rng.gen_range(1..=3usize);
        let big_n = rng.gen_range(1..=4usize);
        let mults: Vec<BigUint> = (0..big_n).map(|_| BigUint::from(rng.gen_range(1..=5u32))).collect();
        let top = top_chern_of_restriction(n, &mults, budget)?;
        *by_shape.entry(format!("n={n},N={big_n}")).or_default() += 1;
        if !top.verified() {
            failures.push(top);
        }
    }
    report.push(CheckRecord::new(
        "top_chern_sweep",
        failures.is_empty(),
        json!({ "cases": args.cases, "shapes": by_shape, "failures": failures }),
    ));
    Ok(report)
}

fn sweep_contradiction(command: Vec<String>, args: &Args) -> anyhow::Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut report = Report::new(command, json!({ "sweep": "contradiction", "cases": args.cases, "seed": args.seed }));
    let mut failures = Vec::new();
    for _ in 0..args.cases {
        let n = rng.gen_range(2..=6u64);
        let m = rng.gen_range(1..=1_000_000u64);
        // Smallest N with N/M >= (2n-1)/(2n).
        let lo = ((2 * n - 1) * m).div_ceil(2 * n);
        let big_n = rng.gen_range(lo.max(1)..=m);
        let alpha = rng.gen_range(big_n..=m);
        let stats = VIStageStats::new(big_n, alpha, m)?;
        let r = ratio_contradiction_check(n, &stats)?;
        if !(r.hypothesis_holds && r.contradiction && r.chain_closes) {
            failures.push(r);
        }
    }
    report.push(CheckRecord::new("contradiction_sweep", failures.is_empty(), json!({ "cases": args.cases, "failures": failures })));
    Ok(report)
}
