//! `mrfuq bound`: Gibbs bounds for a quantity of interest under a model
//! perturbation or a given KL radius.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mrfuq::model::io::{parse, ModelDocument};
use mrfuq::perturbation::{classify, excess_factor};
use mrfuq::uq::{kl_divergence, uq_bound_eta, uq_bound_model};
use mrfuq::{BoundReport, Direction, ExactDistribution, LambdaStar, PerturbationType};
use serde::Serialize;

use crate::output::Run;

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Baseline model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Alternative model file; the KL radius is computed from it.
    #[arg(long, conflicts_with = "eta", required_unless_present = "eta")]
    pub alt: Option<PathBuf>,
    /// KL radius, for bounds over every alternative within it.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Quantity of interest: `indicator:N=V[,N=V...]`, `state:N` or `sum`.
    /// Nodes are ids or labels from the model file.
    #[arg(long)]
    pub qoi: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Qoi {
    /// Conjunction of `node = value` conditions.
    Indicator(Vec<(usize, usize)>),
    State(usize),
    Sum,
}

impl Qoi {
    pub fn parse(spec: &str, doc: &ModelDocument) -> Result<Qoi> {
        let n = doc.model.node_count();
        let node = |t: &str| -> Result<usize> {
            let t = t.trim();
            if let Ok(v) = t.parse::<usize>() {
                if v < n {
                    return Ok(v);
                }
                bail!("node {v} is out of range (model has {n} nodes)");
            }
            doc.labels
                .as_ref()
                .and_then(|ls| ls.iter().position(|l| l == t))
                .with_context(|| format!("unknown node `{t}`"))
        };
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        match kind {
            "sum" if rest.is_empty() => Ok(Qoi::Sum),
            "state" => Ok(Qoi::State(node(rest)?)),
            "indicator" => {
                let mut conds = vec![];
                for c in rest.split(',') {
                    let (a, b) = c.split_once('=').with_context(|| format!("expected `node=value`, got `{c}`"))?;
                    let v = node(a)?;
                    let s: usize = b.trim().parse().with_context(|| format!("bad state `{b}`"))?;
                    if s >= doc.model.cards()[v] {
                        bail!("state {s} is invalid for node {v}");
                    }
                    conds.push((v, s));
                }
                Ok(Qoi::Indicator(conds))
            }
            _ => bail!("unknown quantity of interest `{spec}`"),
        }
    }

    pub fn eval(&self, x: &[usize]) -> f64 {
        match self {
            Qoi::Indicator(c) => c.iter().all(|&(v, s)| x[v] == s) as u8 as f64,
            Qoi::State(v) => x[*v] as f64,
            Qoi::Sum => x.iter().sum::<usize>() as f64,
        }
    }
}

#[derive(Serialize)]
struct Side {
    value: f64,
    lambda_star: Option<f64>,
    lambda_limit: Option<&'static str>,
}

impl From<&BoundReport> for Side {
    fn from(r: &BoundReport) -> Self {
        let (lambda_star, lambda_limit) = match r.lambda_star {
            LambdaStar::Interior(l) => (Some(l), None),
            LambdaStar::ZeroLimit => (None, Some("zero")),
            LambdaStar::InfinityLimit => (None, Some("infinity")),
        };
        Side {
            value: r.value + 0.0,
            lambda_star,
            lambda_limit,
        }
    }
}

#[derive(Serialize)]
struct Report {
    qoi: String,
    perturbation_type: Option<String>,
    kl: f64,
    base_mean: f64,
    /// Exact `E_alt[f]` when an alternative model was given.
    alt_mean: Option<f64>,
    lower: Side,
    upper: Side,
}

fn read_model(path: &PathBuf, run: &mut Run) -> Result<ModelDocument> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    run.record_input(path, &bytes);
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

pub fn run(args: &BoundArgs, cap: u64) -> Result<()> {
    let mut run = Run::new(&args.out, cap)?;
    let base_doc = read_model(&args.model, &mut run)?;
    let qoi = Qoi::parse(&args.qoi, &base_doc).map_err(crate::input_error)?;
    let base = ExactDistribution::from_density(&base_doc.model, cap)?;
    let f = base.tabulate(|x| qoi.eval(x));
    let (ptype, alt_mean, lower, upper, kl);
    if let Some(alt_path) = &args.alt {
        let alt_doc = read_model(alt_path, &mut run)?;
        let report = classify(&base_doc.model, &alt_doc.model);
        let ef = excess_factor(&base_doc.model, &alt_doc.model, &report)?;
        kl = kl_divergence(&base, &ef);
        lower = uq_bound_model(&base, &ef, &f, Direction::Lower)?;
        upper = uq_bound_model(&base, &ef, &f, Direction::Upper)?;
        alt_mean = Some(ExactDistribution::from_density(&alt_doc.model, cap)?.expect(&f));
        ptype = Some(
            match report.ptype {
                PerturbationType::TypeI => "I",
                PerturbationType::TypeII => "II",
                PerturbationType::TypeIII => "III",
            }
            .to_string(),
        );
    } else {
        let eta = args.eta.expect("clap enforces --alt or --eta");
        lower = uq_bound_eta(&base, &f, eta, Direction::Lower)?;
        upper = uq_bound_eta(&base, &f, eta, Direction::Upper)?;
        kl = eta;
        alt_mean = None;
        ptype = None;
    }
    let report = Report {
        qoi: args.qoi.clone(),
        perturbation_type: ptype,
        kl,
        base_mean: base.expect(&f),
        alt_mean,
        lower: Side::from(&lower),
        upper: Side::from(&upper),
    };
    run.write_json("bound.json", &report)?;
    println!(
        "kl = {}  base = {}  bounds = [{}, {}]",
        report.kl, report.base_mean, report.lower.value, report.upper.value
    );
    run.finish()?;
    Ok(())
}
