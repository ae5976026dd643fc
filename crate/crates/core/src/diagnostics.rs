//! Closed-form bounds for the four-variable diagnostics model
//! (smoking S, lung disease L, asthma A, cough C; graph S–L, L–A, L–C, A–C)
//! and a concrete model realising any admissible scenario.

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::graph::UndirectedGraph;
use crate::model::{CliqueFactor, LogLinearModel};
use crate::perturbation::{classify_graphs, PerturbationReport};
use crate::uq::{minimize_gibbs, BoundReport, Direction};

pub const S: usize = 0;
pub const L: usize = 1;
pub const A: usize = 2;
pub const C: usize = 3;

/// Scalars that the closed-form bounds depend on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticsScenario {
    /// `p(B_c)` for the changed clique `{S, L}`.
    pub p_i: f64,
    /// `p(B_c̃)` for the enlarged clique `{S, L, C}`.
    pub p_ii: f64,
    /// `p(A)` of the event of interest.
    pub p_a: f64,
    pub w_c: f64,
    pub a: f64,
    /// `p(B_c ∩ B_c̃)`.
    pub p_u: f64,
}

impl DiagnosticsScenario {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_I", self.p_i), ("p_II", self.p_ii), ("p(A)", self.p_a), ("p(U)", self.p_u)] {
            if !(0.0..=1.0).contains(&v) {
                return input(format!("{name} = {v} is not a probability"));
            }
        }
        if !self.w_c.is_finite() {
            return input("w_c must be finite");
        }
        if !(-1.0..=1.0).contains(&self.a) {
            return input(format!("weight change a = {} outside [-1, 1]", self.a));
        }
        if self.p_u > self.p_i.min(self.p_ii) + 1e-15 {
            return input("p(U) exceeds min(p_I, p_II)");
        }
        if self.p_i + self.p_ii - self.p_u > 1.0 + 1e-12 {
            return input("p_I + p_II - p(U) exceeds 1");
        }
        Ok(())
    }
}

/// `log(p e^λ + 1 − p)`, the CGF of an indicator with probability `p`.
pub fn indicator_cgf(p: f64, lambda: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return lambda;
    }
    if lambda.abs() < 1.0 {
        (p * lambda.exp_m1()).ln_1p()
    } else if lambda > 0.0 {
        lambda + (p + (1.0 - p) * (-lambda).exp()).ln()
    } else {
        (p * lambda.exp() + 1.0 - p).ln()
    }
}

/// `E_p[Φ]` for the weight change on `{S, L}`.
pub fn type1_partition(s: &DiagnosticsScenario) -> f64 {
    (s.a * s.w_c).exp() * s.p_i + 1.0 - s.p_i
}

pub fn type1_kl(s: &DiagnosticsScenario) -> f64 {
    let aw = s.a * s.w_c;
    let z = type1_partition(s);
    aw * aw.exp() * s.p_i / z - z.ln()
}

/// `E_p[Φ]` for the added edge S–C, allowing `B_c` and `B_c̃` to overlap.
pub fn type2_partition_overlap(s: &DiagnosticsScenario) -> Result<f64> {
    if !(0.0..=s.p_i.min(s.p_ii)).contains(&s.p_u) {
        return input("p(U) must lie in [0, min(p_I, p_II)]");
    }
    let (w, a) = (s.w_c, s.a);
    Ok(((1.0 + a) * w).exp() * (s.p_ii - s.p_u)
        + (-w).exp() * (s.p_i - s.p_u)
        + (a * w).exp() * s.p_u
        + 1.0
        - s.p_i
        - s.p_ii
        + s.p_u)
}

/// `E_p[Φ log Φ]` for the added edge.
fn type2_phi_log_phi(s: &DiagnosticsScenario) -> f64 {
    let (w, a) = (s.w_c, s.a);
    (1.0 + a) * w * ((1.0 + a) * w).exp() * (s.p_ii - s.p_u) - w * (-w).exp() * (s.p_i - s.p_u)
        + a * w * (a * w).exp() * s.p_u
}

pub fn type2_kl(s: &DiagnosticsScenario) -> Result<f64> {
    let z = type2_partition_overlap(s)?;
    Ok(type2_phi_log_phi(s) / z - z.ln())
}

fn event_bound(p_a: f64, eta: f64, direction: Direction) -> BoundReport {
    let sg = direction.sign();
    let mean = sg * p_a;
    let sup = match direction {
        Direction::Upper if p_a > 0.0 => 1.0,
        Direction::Upper => 0.0,
        Direction::Lower if p_a < 1.0 => 0.0,
        Direction::Lower => -1.0,
    };
    let opt = minimize_gibbs(|l| indicator_cgf(p_a, sg * l), eta.max(0.0), mean, sup);
    BoundReport {
        direction,
        value: sg * opt.value,
        lambda_star: opt.lambda_star,
        kl: eta,
        objective_trace: None,
    }
}

pub fn type1_bounds(s: &DiagnosticsScenario, direction: Direction) -> Result<BoundReport> {
    s.validate()?;
    Ok(event_bound(s.p_a, clamp(type1_kl(s)), direction))
}

pub fn type2_bounds_disjoint(s: &DiagnosticsScenario, direction: Direction) -> Result<BoundReport> {
    s.validate()?;
    if s.p_u != 0.0 {
        return Err(Error::Precondition(
            "events overlap (p(U) > 0); use type2_bounds_overlap".into(),
        ));
    }
    Ok(event_bound(s.p_a, clamp(type2_kl(s)?), direction))
}

pub fn type2_bounds_overlap(s: &DiagnosticsScenario, direction: Direction) -> Result<BoundReport> {
    s.validate()?;
    Ok(event_bound(s.p_a, clamp(type2_kl(s)?), direction))
}

fn clamp(v: f64) -> f64 {
    if v < 0.0 && v > -1e-12 {
        0.0
    } else {
        v
    }
}

pub fn base_graph() -> UndirectedGraph {
    UndirectedGraph::from_edges(4, &[(S, L), (L, A), (L, C), (A, C)]).expect("static graph")
}

/// Concrete models with the scenario's marginals.
///
/// Construction: `f_c = 1{L = 0}` so `B_c = {L = 0}`; S is then uniform and
/// independent of everything. The `{L, A, C}` factor sets `P(L = 0) = p_I`,
/// `P(A = 0) = p(A)` independently, and `P(C = 0 | L = l) = r_l`; the event
/// `B_c̃` is `{C = 0}` within each `L` slice, so `p(U) = p_I r_0` and
/// `p_II − p(U) = (1 − p_I) r_1`. Boundary probabilities use constant
/// features instead of infinite weights.
#[derive(Clone, Debug)]
pub struct RealizedDiagnostics {
    pub base: LogLinearModel,
    /// Weight on `{S, L}` scaled by `1 + a`.
    pub type1_alt: LogLinearModel,
    /// Edge S–C added; `{S, L, C}` carries `(1 + a) w_c · 1_{B_c̃}`.
    pub type2_alt: LogLinearModel,
    a_states: Vec<bool>,
}

impl RealizedDiagnostics {
    /// Indicator of the event of interest.
    pub fn event_a(&self, x: &[usize]) -> bool {
        self.a_states[x[A]]
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Membership of `C` in `B_c̃` for one `L` slice and the field realising it.
fn slice(r: f64) -> ([bool; 2], f64) {
    if r <= 0.0 {
        ([false, false], 0.0)
    } else if r >= 1.0 {
        ([true, true], 0.0)
    } else {
        ([true, false], logit(r))
    }
}

pub fn realize(s: &DiagnosticsScenario) -> Result<RealizedDiagnostics> {
    s.validate()?;
    let interior = s.p_i > 0.0 && s.p_i < 1.0;
    let (fc, pi, r0, r1) = if interior {
        (
            [1.0, 1.0, 0.0, 0.0],
            s.p_i,
            (s.p_u / s.p_i).clamp(0.0, 1.0),
            ((s.p_ii - s.p_u) / (1.0 - s.p_i)).clamp(0.0, 1.0),
        )
    } else {
        let consistent = if s.p_i == 0.0 { s.p_u == 0.0 } else { s.p_u == s.p_ii };
        if !consistent {
            return input("p(U) inconsistent with a degenerate p_I");
        }
        let f = if s.p_i == 0.0 { 0.0 } else { 1.0 };
        ([f; 4], 0.5, s.p_ii, s.p_ii)
    };
    let (chi0, s0) = slice(r0);
    let (chi1, s1) = slice(r1);
    let (a_states, v) = if s.p_a <= 0.0 {
        (vec![false, false], 0.0)
    } else if s.p_a >= 1.0 {
        (vec![true, true], 0.0)
    } else {
        (vec![true, false], logit(s.p_a))
    };
    let w = s.w_c;
    let mass = |l: usize, sl: f64| -> f64 { ((w * fc[2 * l]).exp() + (w * fc[1 + 2 * l]).exp()) * (sl.exp() + 1.0) };
    let t = logit(pi) + mass(1, s1).ln() - mass(0, s0).ln();
    // {L, A, C} table, index l + 2a + 4c.
    let mut lac = vec![0.0; 8];
    for (idx, slot) in lac.iter_mut().enumerate() {
        let (l, a, c) = (idx & 1, (idx >> 1) & 1, (idx >> 2) & 1);
        let sl = if l == 0 { s0 } else { s1 };
        *slot = if l == 0 { t } else { 0.0 } + if c == 0 { sl } else { 0.0 } + if a == 0 { v } else { 0.0 };
    }
    let g = base_graph();
    let lac_factor = CliqueFactor {
        clique: vec![L, A, C],
        weight: 1.0,
        table: lac,
    };
    let base = LogLinearModel::new(
        g.clone(),
        vec![2; 4],
        vec![
            CliqueFactor {
                clique: vec![S, L],
                weight: w,
                table: fc.to_vec(),
            },
            lac_factor.clone(),
        ],
    )?;
    let type1_alt = LogLinearModel::new(
        g.clone(),
        vec![2; 4],
        vec![
            CliqueFactor {
                clique: vec![S, L],
                weight: (1.0 + s.a) * w,
                table: fc.to_vec(),
            },
            lac_factor.clone(),
        ],
    )?;
    let mut g2 = g;
    g2.add_edge(S, C)?;
    // {S, L, C} table, index s + 2l + 4c.
    let ftilde: Vec<f64> = (0..8)
        .map(|idx| {
            let (l, c) = ((idx >> 1) & 1, (idx >> 2) & 1);
            let chi = if l == 0 { chi0 } else { chi1 };
            chi[c] as u8 as f64
        })
        .collect();
    let type2_alt = LogLinearModel::new(
        g2,
        vec![2; 4],
        vec![
            CliqueFactor {
                clique: vec![S, L, C],
                weight: (1.0 + s.a) * w,
                table: ftilde,
            },
            lac_factor,
        ],
    )?;
    Ok(RealizedDiagnostics {
        base,
        type1_alt,
        type2_alt,
        a_states,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltedGraphReport {
    pub report: PerturbationReport,
    #[serde(skip)]
    pub graph: UndirectedGraph,
}

/// Graph of the tilted model `∝ e^{λ 1_A} p`: the base graph plus every pair of
/// nodes on which the indicator of `A` has a nonzero mixed difference.
pub fn tilted_event_graph(base: &UndirectedGraph, cards: &[usize], event: impl Fn(&[usize]) -> bool) -> Result<TiltedGraphReport> {
    let n = base.node_count();
    if cards.len() != n {
        return input("cardinalities do not match the graph");
    }
    let size: usize = cards.iter().product();
    let mut x = vec![0; n];
    let table: Vec<f64> = (0..size)
        .map(|i| {
            crate::model::decode(i, cards, &mut x);
            event(&x) as u8 as f64
        })
        .collect();
    if table.iter().all(|&v| v == 0.0) {
        return input("event is empty");
    }
    let at = |x: &[usize]| table[crate::model::encode(x, cards)];
    let mut graph = base.clone();
    for i in 0..n {
        for j in i + 1..n {
            if graph.has_edge(i, j) {
                continue;
            }
            let mut interacts = false;
            'scan: for idx in 0..size {
                crate::model::decode(idx, cards, &mut x);
                let (xi, xj) = (x[i], x[j]);
                for a in 0..cards[i] {
                    for b in 0..cards[j] {
                        if a == xi || b == xj {
                            continue;
                        }
                        let f00 = at(&x);
                        x[i] = a;
                        let f10 = at(&x);
                        x[j] = b;
                        let f11 = at(&x);
                        x[i] = xi;
                        let f01 = at(&x);
                        x[j] = xj;
                        if f00 - f10 - f01 + f11 != 0.0 {
                            interacts = true;
                            break 'scan;
                        }
                    }
                }
            }
            if interacts {
                graph.add_edge(i, j)?;
            }
        }
    }
    Ok(TiltedGraphReport {
        report: classify_graphs(base, &graph),
        graph,
    })
}
