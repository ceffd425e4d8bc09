use anyhow::Result;
use blendnet::stats::{binom_pvalue, theta_at_significance};
use clap::{ArgGroup, Args};
use serde::Serialize;

use crate::artifact::print_json;

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("target").required(true).args(["theta0", "alpha"])))]
pub struct ConftestArgs {
    /// Number of trials (test blends)
    #[arg(long)]
    pub n: u64,
    /// Number of successes (correct predictions)
    #[arg(long)]
    pub x0: u64,
    /// Null success rate; prints P(X ≥ x0)
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Significance level; prints the θ0 at which the p-value equals it
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Serialize)]
struct ConftestReport {
    n: u64,
    x0: u64,
    theta0: f64,
    p_value: f64,
}

pub fn conftest(args: &ConftestArgs) -> Result<()> {
    let (theta0, p_value) = match (args.theta0, args.alpha) {
        (Some(t), _) => (t, binom_pvalue(args.n, args.x0, t)?),
        (None, Some(a)) => (theta_at_significance(args.n, args.x0, a)?, a),
        (None, None) => unreachable!("clap enforces the argument group"),
    };
    print_json(&ConftestReport {
        n: args.n,
        x0: args.x0,
        theta0,
        p_value,
    })
}
