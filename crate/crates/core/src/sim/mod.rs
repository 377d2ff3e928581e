//! Exact event-driven simulation of the event-triggered protocol.
//!
//! Between events every input `u_i` is constant, so each state moves on a
//! straight line and the engine only has to locate the next time some agent's
//! measurement error reaches its threshold. Events are processed in time
//! order; after a batch of simultaneous triggers the inputs of the triggering
//! agents and of everyone listening to them are recomputed once.

mod engine;
mod trigger;

use serde::Serialize;

pub use engine::{run, EngineState};
pub use trigger::next_event_time;

use crate::analysis::ConsensusVerdict;
use crate::graph::{Laplacian, WeightedDigraph};
use crate::nonlinearity::Outputs;
use crate::states::States;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub graph: WeightedDigraph,
    pub outputs: Outputs,
    pub x0: States,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub horizon: f64,
}

impl Scenario {
    pub fn builder(graph: WeightedDigraph, outputs: impl Into<Outputs>) -> ScenarioBuilder {
        ScenarioBuilder {
            name: "scenario".into(),
            graph,
            outputs: outputs.into(),
            x0: None,
            alpha: Vec::new(),
            beta: Vec::new(),
            horizon: 20.0,
        }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn p(&self) -> usize {
        self.x0.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.x0.agents() != n {
            return Err(Error::Dimension(format!(
                "{} initial states for {n} agents",
                self.x0.agents()
            )));
        }
        if self.outputs.dim() != self.p() {
            return Err(Error::Dimension(format!(
                "states have {} components, output map has {}",
                self.p(),
                self.outputs.dim()
            )));
        }
        self.outputs.validate(n)?;
        if !self.x0.is_finite() {
            return Err(Error::NonFinite("initial state".into()));
        }
        for (name, v) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            if v.len() != n {
                return Err(Error::Dimension(format!(
                    "{} {name} values for {n} agents",
                    v.len()
                )));
            }
            if let Some((i, x)) = v
                .iter()
                .enumerate()
                .find(|(_, x)| !(x.is_finite() && **x > 0.0))
            {
                return Err(Error::InvalidScenario(format!(
                    "{name}[{}] = {x}; must be positive",
                    i + 1
                )));
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "horizon {} must be positive",
                self.horizon
            )));
        }
        Ok(())
    }

    /// `α_i e^{-β_i t}`.
    pub fn threshold(&self, i: usize, t: f64) -> f64 {
        self.alpha[i] * (-self.beta[i] * t).exp()
    }
}

pub struct ScenarioBuilder {
    name: String,
    graph: WeightedDigraph,
    outputs: Outputs,
    x0: Option<States>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    horizon: f64,
}

impl ScenarioBuilder {
    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn initial_states(mut self, x0: States) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn triggering(mut self, alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    /// Same `α`, `β` for every agent.
    pub fn uniform_triggering(self, alpha: f64, beta: f64) -> Self {
        let n = self.graph.n();
        self.triggering(vec![alpha; n], vec![beta; n])
    }

    pub fn horizon(mut self, t: f64) -> Self {
        self.horizon = t;
        self
    }

    pub fn build(self) -> Result<Scenario> {
        let x0 = self
            .x0
            .ok_or_else(|| Error::InvalidScenario("missing initial states".into()))?;
        let s = Scenario {
            name: self.name,
            graph: self.graph,
            outputs: self.outputs,
            x0,
            alpha: self.alpha,
            beta: self.beta,
            horizon: self.horizon,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineConfig {
    /// Spacing of the dense output grid.
    pub stride: f64,
    pub max_events_per_agent: usize,
    /// Absolute time tolerance for triggering instants; crossings closer than
    /// this are processed as one batch.
    pub root_tol: f64,
    /// Extra constant added to every threshold: agents trigger when
    /// `‖e_i‖² > α_i e^{-β_i t} + threshold_floor`. Zero reproduces the
    /// purely exponential law.
    pub threshold_floor: f64,
    pub record_segments: bool,
    /// Safeguard on search steps per root-find.
    pub max_root_steps: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            stride: 1e-2,
            max_events_per_agent: 1_000_000,
            root_tol: 1e-10,
            threshold_floor: 0.0,
            record_segments: true,
            max_root_steps: 1_000_000,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.stride.is_finite() && self.stride > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "stride {} must be positive",
                self.stride
            )));
        }
        if !(self.root_tol.is_finite() && self.root_tol > 0.0) {
            return Err(Error::InvalidScenario(
                "root tolerance must be positive".into(),
            ));
        }
        if !(self.threshold_floor.is_finite() && self.threshold_floor >= 0.0) {
            return Err(Error::InvalidScenario(
                "threshold floor must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// One inter-event piece: `x(t) = x_start + (t - t_start) u` on `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: States,
    pub u: States,
}

impl Segment {
    pub fn x_end(&self) -> States {
        let dt = self.t_end - self.t_start;
        let data = self
            .x_start
            .as_slice()
            .iter()
            .zip(self.u.as_slice())
            .map(|(x, u)| x + dt * u)
            .collect();
        States::from_flat(self.x_start.agents(), self.x_start.dim(), data).expect("same shape")
    }
}

/// Dense output: state and last broadcast outputs at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: States,
    pub ghat: States,
}

#[derive(Debug, Clone)]
pub struct SimulationRecord {
    pub n: usize,
    pub p: usize,
    /// Time the run reached (the horizon unless it stopped early).
    pub end_time: f64,
    pub segments: Vec<Segment>,
    /// Triggering times per agent, starting at 0.
    pub events: Vec<Vec<f64>>,
    pub samples: Vec<Sample>,
    pub final_state: States,
    /// Agents whose triggering condition holds on the whole remainder of the
    /// horizon after their last event.
    pub quiescent: Vec<bool>,
    pub summary: Option<ConsensusVerdict>,
}

impl SimulationRecord {
    pub fn event_counts(&self) -> Vec<usize> {
        self.events.iter().map(Vec::len).collect()
    }

    pub fn total_events(&self) -> usize {
        self.events.iter().map(Vec::len).sum()
    }
}

/// Diagnostics attached to a suspected Zeno run.
#[derive(Debug, Clone)]
pub struct ZenoReport {
    pub agent: usize,
    pub time: f64,
    pub event_count: usize,
    pub min_interval: f64,
    /// Last inter-event intervals of the offending agent, oldest first.
    pub recent_intervals: Vec<f64>,
    /// Least-squares slope of `ln(interval)` against time over the recent
    /// window; negative when intervals shrink exponentially.
    pub shrink_rate: Option<f64>,
    /// Everything simulated up to the point the guard fired.
    pub partial: SimulationRecord,
}

/// `u_i = -Σ_j L_ij g(x̂_j)`, evaluated as `Σ_{j≠i} a_ij (g(x̂_j) - g(x̂_i))`
/// so that equal outputs give exactly zero input.
pub fn control_input(l: &Laplacian, outputs: &Outputs, xhat: &States) -> Result<States> {
    let n = l.n();
    if xhat.agents() != n {
        return Err(Error::Dimension(format!(
            "{} states for a {n}-agent Laplacian",
            xhat.agents()
        )));
    }
    if outputs.dim() != xhat.dim() {
        return Err(Error::Dimension(
            "output map and state dimension differ".into(),
        ));
    }
    outputs.validate(n)?;
    let p = xhat.dim();
    let mut ghat = States::zeros(n, p);
    for i in 0..n {
        outputs
            .for_agent(i)
            .apply_into(xhat.row(i), ghat.row_mut(i));
    }
    let neighbours: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && l.get(i, j) != 0.0)
                .map(|j| (j, -l.get(i, j)))
                .collect()
        })
        .collect();
    let mut u = States::zeros(n, p);
    for (i, nb) in neighbours.iter().enumerate() {
        engine::input_for(i, nb, &ghat, u.row_mut(i));
    }
    Ok(u)
}

/// Smallest gap between consecutive triggering times, per agent.
pub fn min_inter_event(record: &SimulationRecord) -> Vec<Option<f64>> {
    record
        .events
        .iter()
        .map(|ev| ev.windows(2).map(|w| w[1] - w[0]).reduce(f64::min))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::bundled::seven_agent_laplacian;
    use crate::graph::build_laplacian;
    use crate::nonlinearity::OutputFunction;

    #[test]
    fn equal_broadcasts_give_zero_input() {
        let g = WeightedDigraph::from_laplacian(&seven_agent_laplacian()).unwrap();
        let l = build_laplacian(&g);
        let u = control_input(
            &l,
            &OutputFunction::saturation(1, 1.0).into(),
            &States::from_scalars(&[0.3; 7]),
        )
        .unwrap();
        assert!(u.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_cycle_identity_input() {
        let g = WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let u = control_input(
            &build_laplacian(&g),
            &OutputFunction::identity(1).into(),
            &States::from_scalars(&[1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(u.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn seven_agent_first_row_at_start() {
        let g = WeightedDigraph::from_laplacian(&seven_agent_laplacian()).unwrap();
        let x0 = States::from_scalars(&[9.0, 1.0, -6.0, 5.0, 8.0, -7.0, 6.0]);
        let u = control_input(
            &build_laplacian(&g),
            &OutputFunction::saturation(1, 1.0).into(),
            &x0,
        )
        .unwrap();
        assert_eq!(u.get(0, 0), -10.4);
    }

    #[test]
    fn min_inter_event_examples() {
        let rec = SimulationRecord {
            n: 2,
            p: 1,
            end_time: 3.0,
            segments: vec![],
            events: vec![vec![0.0, 1.0, 3.0], vec![0.0]],
            samples: vec![],
            final_state: States::zeros(2, 1),
            quiescent: vec![true, true],
            summary: None,
        };
        assert_eq!(min_inter_event(&rec), vec![Some(1.0), None]);
    }

    #[test]
    fn zero_alpha_rejected() {
        let g = WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let err = Scenario::builder(g, OutputFunction::identity(1))
            .initial_states(States::from_scalars(&[1.0, 0.0]))
            .triggering(vec![0.0, 1.0], vec![1.0, 1.0])
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidScenario(_)));
    }
}
