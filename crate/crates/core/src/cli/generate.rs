//! Seeded random scenarios for property suites.
//!
//! Topologies are built to order and then certified with
//! [`classify_connectivity`]:
//!
//! - `strong`: a Hamiltonian cycle over a shuffled agent order plus random
//!   chords.
//! - `spanning-tree`: agents split into 2–4 groups, each made strongly
//!   connected the same way; every group except the last receives at least
//!   one link from a later group, and no link points from an earlier group to
//!   a later one, so the last group is the unique closed component.
//!
//! All drawn values are rounded to four decimals. Weights are drawn from
//! `[0.5, 2]`, initial states from `[-3, 3]`,
//! `α_i` from `[0.5, 2]` and `β_i` from `[0.2, 1]`. The small decay rates
//! keep inter-event times comfortably above zero over a 20-unit horizon.

use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::file::{InitialStates, PerAgent, ScenarioFile, Tolerances};
use crate::graph::{classify_connectivity, Connectivity, GraphSpec, WeightedDigraph};
use crate::{Error, Result};

const RETRY_BUDGET: usize = 32;
const CHORD_PROBABILITY: f64 = 0.25;
const CROSS_PROBABILITY: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Strong,
    SpanningTree,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(Topology::Strong),
            "spanning-tree" => Ok(Topology::SpanningTree),
            _ => Err(Error::InvalidScenario(format!(
                "unknown connectivity `{s}` (strong | spanning-tree)"
            ))),
        }
    }
}

fn weight(rng: &mut ChaCha8Rng) -> f64 {
    round(rng.random_range(0.5..=2.0))
}

/// Cycle plus chords over `members`; edges are `(from, to, w)`, 0-based.
fn strong_group(rng: &mut ChaCha8Rng, members: &[usize], edges: &mut Vec<(usize, usize, f64)>) {
    let k = members.len();
    if k < 2 {
        return;
    }
    let mut order = members.to_vec();
    order.shuffle(rng);
    for idx in 0..k {
        let (from, to) = (order[idx], order[(idx + 1) % k]);
        edges.push((from, to, weight(rng)));
    }
    for &from in members {
        for &to in members {
            if from == to || edges.iter().any(|e| e.0 == from && e.1 == to) {
                continue;
            }
            if rng.random_bool(CHORD_PROBABILITY) {
                edges.push((from, to, weight(rng)));
            }
        }
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, topology: Topology) -> WeightedDigraph {
    let mut edges = Vec::new();
    match topology {
        Topology::Strong => strong_group(rng, &(0..n).collect::<Vec<_>>(), &mut edges),
        Topology::SpanningTree => {
            let max_groups = n.min(4);
            let groups = rng.random_range(2..=max_groups);
            let mut agents: Vec<usize> = (0..n).collect();
            agents.shuffle(rng);
            // cut points splitting the shuffled agents into nonempty groups
            let mut cuts: Vec<usize> = (1..n).collect();
            cuts.shuffle(rng);
            let mut cuts: Vec<usize> = cuts[..groups - 1].to_vec();
            cuts.sort_unstable();
            let mut parts = Vec::with_capacity(groups);
            let mut start = 0;
            for c in cuts.into_iter().chain(std::iter::once(n)) {
                parts.push(agents[start..c].to_vec());
                start = c;
            }
            for part in &parts {
                strong_group(rng, part, &mut edges);
            }
            for m in 0..groups - 1 {
                let later: Vec<usize> = parts[m + 1..].iter().flatten().copied().collect();
                let from = *later.choose(rng).expect("later groups are nonempty");
                let to = *parts[m].choose(rng).expect("groups are nonempty");
                edges.push((from, to, weight(rng)));
                for &to in &parts[m] {
                    for &from in &later {
                        if !edges.iter().any(|e| e.0 == from && e.1 == to)
                            && rng.random_bool(CROSS_PROBABILITY)
                        {
                            edges.push((from, to, weight(rng)));
                        }
                    }
                }
            }
        }
    }
    WeightedDigraph::from_edges(n, &edges).expect("generated weights are valid")
}

/// Deterministic in `seed`. Scalar-valued when `p = 1`.
pub fn generate_random(n: usize, p: usize, seed: u64, topology: Topology) -> Result<ScenarioFile> {
    if n < 2 {
        return Err(Error::InvalidScenario(format!(
            "random scenarios need n ≥ 2, got {n}"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidScenario(
            "state dimension must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = match topology {
        Topology::Strong => Connectivity::StronglyConnected,
        Topology::SpanningTree => Connectivity::SpanningTree,
    };
    let graph = (0..RETRY_BUDGET)
        .map(|_| random_graph(&mut rng, n, topology))
        .find(|g| classify_connectivity(g) == wanted)
        .ok_or(Error::RetryBudget(RETRY_BUDGET))?;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| round(rng.random_range(-3.0..=3.0)))
                .collect()
        })
        .collect();
    let output = if rng.random_bool(0.5) {
        "identity".to_string()
    } else {
        format!("saturation({})", round(rng.random_range(1.0..=3.0)))
    };
    let alpha: Vec<f64> = (0..n).map(|_| round(rng.random_range(0.5..=2.0))).collect();
    let beta: Vec<f64> = (0..n).map(|_| round(rng.random_range(0.2..=1.0))).collect();
    Ok(ScenarioFile {
        name: format!(
            "random-{}-n{n}-p{p}-seed{seed}",
            match topology {
                Topology::Strong => "strong",
                Topology::SpanningTree => "spanning-tree",
            }
        ),
        output,
        x0: if p == 1 {
            InitialStates::Scalars(rows.into_iter().flatten().collect())
        } else {
            InitialStates::Rows(rows)
        },
        alpha: PerAgent::List(alpha),
        beta: PerAgent::List(beta),
        horizon: 20.0,
        stride: 0.01,
        out_dir: None,
        tolerances: Tolerances::default(),
        graph: GraphSpec::from_graph(&graph),
    })
}

/// Four decimals, so files stay readable and round-trip exactly.
fn round(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}
