//! `mrfuq ising {band, finite, coarse, longrange}`.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Subcommand, ValueEnum};
use mrfuq::ising::{
    coarse_grain_check, finite_size_band, long_range_kappa_bound, phase_band, BandMethod, Boundary, Kernel,
    LatticeSystem, PhasePerturbation, Profile,
};
use mrfuq::{Error, LambdaStar};

use crate::grid::{Grid, List};
use crate::output::{num, opt_num, Run};
use crate::svg::{line_plot, Series};

#[derive(Subcommand, Debug)]
pub enum IsingCommand {
    /// Mean-field magnetisation band over a field grid.
    Band(BandArgs),
    /// Exact finite-box band, checked against the enumerated perturbed magnetisation.
    Finite(FiniteArgs),
    /// Block-averaging deviations and energy ratios.
    Coarse(CoarseArgs),
    /// Tail constant and κ bound of the `a/r²` perturbation.
    Longrange(LongrangeArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum MethodArg {
    Theorem,
    Norm1,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<BandMethod> {
        match self {
            MethodArg::Theorem => vec![BandMethod::Theorem],
            MethodArg::Norm1 => vec![BandMethod::Norm1],
            MethodArg::Both => vec![BandMethod::Theorem, BandMethod::Norm1],
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum ProfileArg {
    Bump,
    Uniform,
}

impl ProfileArg {
    fn profile(self) -> Profile {
        match self {
            ProfileArg::Bump => Profile::Bump,
            ProfileArg::Uniform => Profile::piecewise_constant(),
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum BoundaryArg {
    Plus,
    Minus,
    Free,
}

#[derive(Args, Debug)]
pub struct BandArgs {
    #[arg(long, default_value_t = 1.1)]
    pub beta: f64,
    /// Total interaction strength of the baseline.
    #[arg(long = "J", default_value_t = 1.0)]
    pub total_j: f64,
    /// Kac perturbation `F = aJ`.
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub a: f64,
    /// Use the truncated interaction instead of `F = aJ`.
    #[arg(long, conflicts_with = "long_range")]
    pub truncation: bool,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// `‖J‖∞` for the truncation bound.
    #[arg(long, default_value_t = 1.0)]
    pub j_sup: f64,
    /// Use the `a/r²` tail; its mean-field size vanishes.
    #[arg(long)]
    pub long_range: bool,
    #[arg(long, default_value_t = 0.25)]
    pub gamma: f64,
    #[arg(long, default_value = "-2:2:0.02", allow_hyphen_values = true)]
    pub h: Grid,
    /// `h̃ − h`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub h_offset: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    #[arg(long)]
    pub svg: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FiniteArgs {
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long = "L", default_value_t = 12)]
    pub side: usize,
    #[arg(long, default_value_t = 0.25)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Bump)]
    pub profile: ProfileArg,
    #[arg(long, default_value_t = 1.1)]
    pub beta: f64,
    #[arg(long, default_value = "-0.5:0.5:0.25", allow_hyphen_values = true)]
    pub h: Grid,
    /// `h̃ − h`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub h_offset: f64,
    /// Kac perturbation `F = aJ`, or the tail amplitude with `--long-range`.
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long)]
    pub long_range: bool,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Plus)]
    pub boundary: BoundaryArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CoarseArgs {
    /// Comma-separated interaction ranges `γ`.
    #[arg(long, default_value = "0.25,0.0625,0.015625")]
    pub gamma: List,
    #[arg(long, value_enum, default_value_t = ProfileArg::Bump)]
    pub profile: ProfileArg,
    /// Box side; defaults to two interaction ranges plus two blocks.
    #[arg(long = "L")]
    pub side: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct LongrangeArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value = "0.25,0.125,0.0625")]
    pub gamma: List,
    #[arg(long, default_value_t = 1.1)]
    pub beta: f64,
    #[arg(long = "L", default_value_t = 12)]
    pub side: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(cmd: &IsingCommand, cap: u64) -> Result<()> {
    match cmd {
        IsingCommand::Band(a) => band(a, cap),
        IsingCommand::Finite(a) => finite(a, cap),
        IsingCommand::Coarse(a) => coarse(a, cap),
        IsingCommand::Longrange(a) => longrange(a, cap),
    }
}

fn lambda_cell(l: &LambdaStar) -> String {
    match l {
        LambdaStar::Interior(v) => num(*v),
        LambdaStar::ZeroLimit => "0".into(),
        LambdaStar::InfinityLimit => "inf".into(),
    }
}

pub const BAND_HEADER: [&str; 9] = [
    "h",
    "m_baseline",
    "m_baseline_minus",
    "m_baseline_plus",
    "lower",
    "upper",
    "method",
    "lambda_star_lower",
    "lambda_star_upper",
];

fn band(args: &BandArgs, cap: u64) -> Result<()> {
    let pert = if args.truncation {
        PhasePerturbation::Truncation { epsilon: args.eps, j_sup: args.j_sup }
    } else if args.long_range {
        PhasePerturbation::LongRange { a: args.a, gamma: args.gamma }
    } else {
        PhasePerturbation::Kac { a: args.a }
    };
    let mut run = Run::new(&args.out, cap)?;
    let mut rows = vec![];
    let mut series = vec![];
    for (k, method) in args.method.methods().into_iter().enumerate() {
        let band = phase_band(args.beta, &args.h.0, args.total_j, pert, args.h_offset, method)?;
        if let Some(p) = band.points.iter().find(|p| p.error.is_some()) {
            return Err(Error::Precondition(p.error.clone().unwrap_or_default()).into());
        }
        for p in &band.points {
            // One branch off the jump; blank where the two limits differ.
            let m = if p.m_minus == p.m_plus { num(p.m_plus) } else { String::new() };
            rows.push(vec![
                num(p.h),
                m,
                num(p.m_minus),
                num(p.m_plus),
                num(p.lower),
                num(p.upper),
                method.as_str().to_string(),
                lambda_cell(&p.lambda_star_lower),
                lambda_cell(&p.lambda_star_upper),
            ]);
        }
        if args.svg {
            let color = ["#d62728", "#1f77b4"][k % 2];
            if k == 0 {
                // Sign(h) branch with an explicit jump at h = 0.
                let mut pts = vec![];
                for p in &band.points {
                    if p.m_minus != p.m_plus {
                        pts.push((p.h, p.m_minus));
                        pts.push((p.h, p.m_plus));
                    } else {
                        pts.push((p.h, p.m_plus));
                    }
                }
                series.push(Series { label: "baseline", color: "black", points: pts });
            }
            let label = method.as_str();
            series.push(Series { label, color, points: band.points.iter().map(|p| (p.h, p.lower)).collect() });
            series.push(Series { label: "", color, points: band.points.iter().map(|p| (p.h, p.upper)).collect() });
        }
    }
    run.write_csv("band.csv", &BAND_HEADER, &rows)?;
    if args.svg {
        run.write("band.svg", line_plot("magnetisation band", "h", &series).as_bytes())?;
    }
    println!("{} rows written to {}", rows.len(), args.out.join("band.csv").display());
    run.finish()?;
    Ok(())
}

pub const FINITE_HEADER: [&str; 13] = [
    "h",
    "method",
    "baseline",
    "lower",
    "upper",
    "perturbed",
    "inside",
    "eta",
    "prefactor",
    "script_f",
    "r_f",
    "lambda_star_lower",
    "lambda_star_upper",
];

fn finite(args: &FiniteArgs, cap: u64) -> Result<()> {
    let boundary = match args.boundary {
        BoundaryArg::Plus => Boundary::Plus,
        BoundaryArg::Minus => Boundary::Minus,
        BoundaryArg::Free => Boundary::Free,
    };
    let j = Kernel::kac(args.profile.profile(), args.gamma);
    let f = if args.long_range { Kernel::long_range(args.a, args.gamma) } else { j.clone().scaled(args.a) };
    let mut run = Run::new(&args.out, cap)?;
    let mut rows = vec![];
    let mut outside = 0;
    for &h in &args.h.0 {
        let sys = LatticeSystem::new(args.d, args.side, boundary.clone(), j.clone(), args.beta, h)?;
        let h_tilde = h + args.h_offset;
        let perturbed = sys.with_kernel(j.clone().plus(f.clone()), h_tilde)?.mean_magnetization(cap)?;
        for method in args.method.methods() {
            let b = finite_size_band(&sys, &f, h_tilde, method, cap)?;
            let inside = b.lower.value <= perturbed && perturbed <= b.upper.value;
            outside += !inside as usize;
            rows.push(vec![
                num(h),
                method.as_str().to_string(),
                num(b.baseline),
                num(b.lower.value),
                num(b.upper.value),
                num(perturbed),
                inside.to_string(),
                num(b.eta),
                num(b.prefactor),
                num(b.script_f),
                opt_num(b.r_f),
                lambda_cell(&b.lower.lambda_star),
                lambda_cell(&b.upper.lambda_star),
            ]);
        }
    }
    run.write_csv("finite.csv", &FINITE_HEADER, &rows)?;
    println!("{} rows, {} outside their band", rows.len(), outside);
    run.finish()?;
    Ok(())
}

pub const COARSE_HEADER: [&str; 13] = [
    "gamma",
    "block_side",
    "side",
    "delta1",
    "delta2",
    "max_offblock_deviation",
    "max_diagonal_deviation",
    "delta1_holds",
    "delta2_holds",
    "max_energy_ratio",
    "ratio_bound",
    "pairs_checked",
    "pairs_skipped",
];

fn coarse(args: &CoarseArgs, cap: u64) -> Result<()> {
    let mut run = Run::new(&args.out, cap)?;
    run.set_seed(args.seed);
    let mut rows = vec![];
    for &g in &args.gamma.0 {
        let r = coarse_grain_check(g, &args.profile.profile(), args.side, args.samples, args.seed)?;
        rows.push(vec![
            num(g),
            r.block_side.to_string(),
            r.side.to_string(),
            num(r.delta1),
            num(r.delta2),
            num(r.max_offblock_deviation),
            num(r.max_diagonal_deviation),
            r.delta1_holds().to_string(),
            r.delta2_holds().to_string(),
            num(r.max_energy_ratio()),
            opt_num(r.ratio_bound),
            r.pairs_checked.to_string(),
            r.pairs_skipped.to_string(),
        ]);
    }
    run.write_csv("coarse.csv", &COARSE_HEADER, &rows)?;
    println!("{} rows written to {}", rows.len(), args.out.join("coarse.csv").display());
    run.finish()?;
    Ok(())
}

pub const LONGRANGE_HEADER: [&str; 5] = ["gamma", "a", "per_site", "c", "kappa_bound"];

fn longrange(args: &LongrangeArgs, cap: u64) -> Result<()> {
    let mut run = Run::new(&args.out, cap)?;
    let mut rows = vec![];
    for &g in &args.gamma.0 {
        let t = long_range_kappa_bound(1, args.side, args.beta, args.a, g)?;
        rows.push(vec![num(g), num(args.a), num(t.per_site), num(t.c), num(t.bound)]);
    }
    run.write_csv("longrange.csv", &LONGRANGE_HEADER, &rows)?;
    println!("{} rows written to {}", rows.len(), args.out.join("longrange.csv").display());
    run.finish()?;
    Ok(())
}
