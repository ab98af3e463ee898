use anyhow::{anyhow, bail, Context};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;
use std::path::Path;
use villadsen_core::report::{CheckRecord, Report};
use villadsen_core::v2_type2::KParam;
use villadsen_core::Error;

/// A report for a computation a resource guard declined to run.
pub fn refusal(command: &[String], e: &anyhow::Error) -> Option<Report> {
    match e.downcast_ref::<Error>()? {
        Error::BudgetExceeded { what, required, budget } => {
            let mut report = Report::new(command.to_vec(), json!({}));
            report.push(CheckRecord::new(
                "resource_guard",
                false,
                json!({ "what": what, "required": required, "budget": budget.to_string(), "env": villadsen_core::Budget::ENV_VAR }),
            ));
            Some(report)
        }
        _ => None,
    }
}

pub fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// `p/q` or an integer.
pub fn parse_rational(s: &str) -> anyhow::Result<BigRational> {
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let num: BigInt = num.trim().parse().map_err(|_| anyhow!("invalid rational {s:?}"))?;
    let den: BigInt = den.trim().parse().map_err(|_| anyhow!("invalid rational {s:?}"))?;
    if den <= BigInt::from(0) {
        bail!("denominator of {s:?} must be positive");
    }
    Ok(BigRational::new(num, den))
}

pub fn parse_k(s: &str) -> Result<KParam, String> {
    s.parse().map_err(|e: Error| e.to_string())
}
