//! `mrfuq medical`: closed-form bound curves for the four-node diagnostics
//! model, swept over the weight change `a` and/or `p_II`.

use anyhow::{bail, Result};
use clap::Args;
use mrfuq::diagnostics::{realize, type1_bounds, type1_kl, type2_bounds_disjoint, type2_bounds_overlap, type2_kl, DiagnosticsScenario};
use mrfuq::model::io::{serialize, ModelDocument};
use mrfuq::Direction;

use crate::grid::Grid;
use crate::output::{num, Run};
use crate::svg::{line_plot, Series};

#[derive(Args, Debug)]
pub struct MedicalArgs {
    #[arg(long, default_value_t = 0.2)]
    pub p_i: f64,
    /// Single value or `start:stop:step`.
    #[arg(long, default_value = "0.3")]
    pub p_ii: Grid,
    #[arg(long, default_value_t = 0.3)]
    pub p_a: f64,
    #[arg(long, default_value_t = 1.5)]
    pub w_c: f64,
    /// Single value or `start:stop:step` within [-1, 1].
    #[arg(long, default_value = "-1:1:0.05", allow_hyphen_values = true)]
    pub a: Grid,
    /// Overlap probability of the two changed events.
    #[arg(long, default_value_t = 0.0)]
    pub p_u: f64,
    /// Also write the realised base and alternative model files (single-point grids only).
    #[arg(long)]
    pub export_models: bool,
    #[arg(long)]
    pub svg: bool,
    #[arg(long, default_value = "out")]
    pub out: std::path::PathBuf,
}

pub const HEADER: [&str; 9] = [
    "a",
    "p_ii",
    "p_u",
    "type1_kl",
    "type1_lower",
    "type1_upper",
    "type2_kl",
    "type2_lower",
    "type2_upper",
];

pub fn run(args: &MedicalArgs, cap: u64) -> Result<()> {
    let mut run = Run::new(&args.out, cap)?;
    let mut rows = vec![];
    let mut scenarios = vec![];
    for &p_ii in &args.p_ii.0 {
        for &a in &args.a.0 {
            let s = DiagnosticsScenario {
                p_i: args.p_i,
                p_ii,
                p_a: args.p_a,
                w_c: args.w_c,
                a,
                p_u: args.p_u,
            };
            s.validate()?;
            let t2 = |d| if s.p_u == 0.0 { type2_bounds_disjoint(&s, d) } else { type2_bounds_overlap(&s, d) };
            rows.push(vec![
                num(a),
                num(p_ii),
                num(s.p_u),
                num(type1_kl(&s)),
                num(type1_bounds(&s, Direction::Lower)?.value),
                num(type1_bounds(&s, Direction::Upper)?.value),
                num(type2_kl(&s)?),
                num(t2(Direction::Lower)?.value),
                num(t2(Direction::Upper)?.value),
            ]);
            scenarios.push(s);
        }
    }
    run.write_csv("medical.csv", &HEADER, &rows)?;

    if args.export_models {
        if scenarios.len() != 1 {
            bail!(crate::InputError("--export-models needs single values for --a and --p-ii".into()));
        }
        let r = realize(&scenarios[0])?;
        let labels = Some(["S", "L", "A", "C"].map(String::from).to_vec());
        for (name, model) in [("base.mrf", r.base), ("type1.mrf", r.type1_alt), ("type2.mrf", r.type2_alt)] {
            let doc = ModelDocument { model, labels: labels.clone() };
            run.write(name, serialize(&doc).as_bytes())?;
        }
    }

    if args.svg {
        let col = |k: usize| -> Vec<f64> { rows.iter().map(|r| r[k].parse().unwrap_or(f64::NAN)).collect() };
        let (xk, xl) = if args.a.0.len() > 1 { (0, "a") } else { (1, "p_II") };
        let x = col(xk);
        let series: Vec<Series> = [(4, "Type I lower", "#1f77b4"), (5, "Type I upper", "#1f77b4"), (7, "Type II lower", "#d62728"), (8, "Type II upper", "#d62728")]
            .iter()
            .map(|&(k, label, color)| Series {
                label,
                color,
                points: x.iter().copied().zip(col(k)).collect(),
            })
            .collect();
        run.write("medical.svg", line_plot("bounds on p(A)", xl, &series).as_bytes())?;
    }
    println!("{} rows written to {}", rows.len(), args.out.join("medical.csv").display());
    run.finish()?;
    Ok(())
}
