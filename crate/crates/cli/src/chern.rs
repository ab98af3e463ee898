use crate::util::read_file;
use anyhow::{bail, Context};
use serde_json::json;
use std::path::PathBuf;
use villadsen_core::bundles::{euler_check, BundleExpr};
use villadsen_core::cohomology::terms_to_records;
use villadsen_core::report::{CheckRecord, Report};
use villadsen_core::spaces::SpaceDescriptor;
use villadsen_core::v2_type2::{build_stage, eta, eta_component, KParam, V2Params};
use villadsen_core::{Budget, Error};

#[derive(clap::Args)]
pub struct Args {
    /// Bundle document (JSON)
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    bundle: Option<PathBuf>,
    /// Built-in bundle: hopf-sum:N, theta:R, v2-unit:K:N, v2-eta:K:N, v2-q:K:N:I
    #[arg(long)]
    preset: Option<String>,
}

fn preset(name: &str) -> anyhow::Result<BundleExpr> {
    let parts: Vec<&str> = name.split(':').collect();
    let int = |s: &str| s.parse::<usize>().with_context(|| format!("invalid number {s:?} in preset {name:?}"));
    let k = |s: &str| s.parse::<KParam>().map_err(anyhow::Error::from);
    Ok(match parts.as_slice() {
        ["hopf-sum", n] => {
            let n = int(n)?;
            let space = SpaceDescriptor::sphere_power(n);
            (0..n).try_fold(BundleExpr::zero(&space), |acc, s| acc.direct_sum(&BundleExpr::line(&space, s, 1u32)?))?
        }
        ["theta", r] => BundleExpr::trivial(&SpaceDescriptor::point(), int(r)?),
        ["v2-unit", kk, n] => build_stage(V2Params::new(k(kk)?, int(n)?)?)?.unit,
        ["v2-eta", kk, n] => eta(k(kk)?, int(n)?)?,
        ["v2-q", kk, n, i] => eta_component(k(kk)?, int(n)?, int(i)?)?,
        _ => bail!("unknown preset {name:?}"),
    })
}

pub fn run(command: Vec<String>, args: &Args, budget: Budget) -> anyhow::Result<Report> {
    let bundle = match (&args.bundle, &args.preset) {
        (Some(path), _) => BundleExpr::from_json(&read_file(path)?).with_context(|| format!("invalid bundle in {}", path.display()))?,
        (None, Some(p)) => preset(p)?,
        (None, None) => bail!("either --bundle or --preset is required"),
    };
    let mut report = Report::new(command, json!({ "bundle": serde_json::to_value(&bundle)? }));
    report.push(CheckRecord::info(
        "bundle",
        json!({ "rank": bundle.rank().to_string(), "real_dimension": bundle.base().real_dimension().to_string() }),
    ));

    match bundle.chern_within(budget) {
        Ok(chern) => {
            let components: Vec<_> = chern
                .components_by_degree()
                .into_iter()
                .map(|(degree, class)| json!({ "degree": degree.to_string(), "terms": terms_to_records(&class) }))
                .collect();
            report.push(CheckRecord::new("chern_classes", true, json!({ "components": components })));
        }
        Err(Error::BudgetExceeded { what, required, budget }) => {
            report.push(CheckRecord::new(
                "chern_classes",
                false,
                json!({ "refused": what, "required": required, "budget": budget.to_string() }),
            ));
        }
        Err(Error::TooLarge(why)) => report.push(CheckRecord::info("chern_classes", json!({ "skipped": why }))),
        Err(e) => return Err(e.into()),
    }
    let euler = euler_check(&bundle, budget)?;
    report.push(CheckRecord::new("euler_class", true, euler));
    Ok(report)
}
