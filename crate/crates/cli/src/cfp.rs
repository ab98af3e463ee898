use anyhow::bail;
use serde_json::json;
use villadsen_core::cfp_witness::{build_witness, find_l1, next_l, verify_lower, verify_upper};
use villadsen_core::report::{CheckRecord, Report};
use villadsen_core::Budget;

#[derive(clap::Args)]
pub struct Args {
    /// Number of witness terms
    #[arg(long, default_value_t = 2)]
    terms: usize,
    /// Extra stage j >= l(terms) at which the last lower bound is rechecked
    #[arg(long)]
    stage: Option<usize>,
    /// Comma-separated prefix of the l sequence replacing the minimal choices
    #[arg(long, value_delimiter = ',')]
    override_l: Vec<usize>,
}

pub fn run(command: Vec<String>, args: &Args, budget: Budget) -> anyhow::Result<Report> {
    let mut report = Report::new(
        command,
        json!({ "terms": args.terms, "stage": args.stage, "override_l": args.override_l }),
    );
    report.assume("the point evaluations are chosen so that the limit algebra is simple");

    let l1 = find_l1();
    let l1_ok = l1.tail.dimension_bound_all_m
        && l1.finite_checks.iter().filter(|r| r.m >= l1.l1).all(|r| r.divisible_by_4 && r.dimension_bound);
    report.push(CheckRecord::new("find_l1", l1_ok, &l1));

    let witness = build_witness(args.terms, &args.override_l)?;
    report.push(CheckRecord::info(
        "witness",
        json!({
            "l": witness.ls(),
            "k": witness.terms.iter().map(|t| t.k_val.to_string()).collect::<Vec<_>>(),
        }),
    ));

    for pair in witness.terms.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let minimal = next_l(prev.l)?;
        let overridden = args.override_l.len() > cur.index - 1;
        let passed = minimal.holds && minimal.minimal && (overridden || minimal.next == cur.l);
        report.push(CheckRecord::new(
            format!("next_l[{}]", cur.index),
            passed,
            json!({ "chosen": cur.l, "overridden": overridden, "minimal": minimal }),
        ));
    }
    for term in &witness.terms {
        let upper = verify_upper(term)?;
        report.push(CheckRecord::new(format!("upper[{}]", term.index), upper.passed(), &upper));
    }
    for term in &witness.terms {
        let lower = verify_lower(&witness, term.index, term.l, budget)?;
        report.push(CheckRecord::new(format!("lower[{},j={}]", term.index, term.l), lower.passed(), &lower));
    }
    if let Some(j) = args.stage {
        let last = witness.terms.last().expect("at least one term");
        if j < last.l {
            bail!("--stage {j} is before l({}) = {}", last.index, last.l);
        }
        if j != last.l {
            let lower = verify_lower(&witness, last.index, j, budget)?;
            report.push(CheckRecord::new(format!("lower[{},j={j}]", last.index), lower.passed(), &lower));
        }
    }
    Ok(report)
}
