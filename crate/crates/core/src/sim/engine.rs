use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use log::{debug, warn};

use super::trigger::{find_crossing, Crossing};
use super::{EngineConfig, Sample, Scenario, Segment, SimulationRecord, ZenoReport};
use crate::graph::{classify_connectivity, Connectivity};
use crate::states::States;
use crate::{Error, Result};

/// Number of trailing intervals kept in a [`ZenoReport`].
const ZENO_WINDOW: usize = 64;

/// Snapshot of the protocol between events.
#[derive(Debug, Clone)]
pub struct EngineState {
    pub t: f64,
    pub x: States,
    /// Last broadcast states `x̂_i`.
    pub xhat: States,
    /// Cached `g(x̂_i)`.
    pub ghat: States,
    pub u: States,
    pub events: Vec<Vec<f64>>,
}

impl EngineState {
    /// State right after the mandatory trigger of every agent at `t = 0`.
    pub fn initial(scenario: &Scenario) -> Self {
        let n = scenario.n();
        let p = scenario.p();
        let x = scenario.x0.clone();
        let mut ghat = States::zeros(n, p);
        for i in 0..n {
            scenario
                .outputs
                .for_agent(i)
                .apply_into(x.row(i), ghat.row_mut(i));
        }
        let neighbours = scenario.graph.in_neighbors_weighted();
        let mut u = States::zeros(n, p);
        for (i, nb) in neighbours.iter().enumerate() {
            input_for(i, nb, &ghat, u.row_mut(i));
        }
        Self {
            t: 0.0,
            xhat: x.clone(),
            x,
            ghat,
            u,
            events: vec![vec![0.0]; n],
        }
    }

    fn crossing<'a>(&'a self, scenario: &'a Scenario, i: usize, floor: f64) -> Crossing<'a> {
        Crossing {
            t0: self.t,
            x: self.x.row(i),
            u: self.u.row(i),
            ghat: self.ghat.row(i),
            g: scenario.outputs.for_agent(i),
            alpha: scenario.alpha[i],
            beta: scenario.beta[i],
            floor,
        }
    }

    fn advance(&mut self, t: f64) {
        let dt = t - self.t;
        if dt != 0.0 {
            let u = self.u.as_slice().to_vec();
            for (x, v) in self.x.as_mut_slice().iter_mut().zip(u) {
                *x += dt * v;
            }
        }
        self.t = t;
    }

    fn state_at(&self, t: f64) -> States {
        let dt = t - self.t;
        let data = self
            .x
            .as_slice()
            .iter()
            .zip(self.u.as_slice())
            .map(|(x, u)| x + dt * u)
            .collect();
        States::from_flat(self.x.agents(), self.x.dim(), data).expect("same shape")
    }
}

/// `out = Σ_j a_ij (ĝ_j - ĝ_i)` over the in-neighbours of `i`.
#[inline]
pub(crate) fn input_for(i: usize, neighbours: &[(usize, f64)], ghat: &States, out: &mut [f64]) {
    out.fill(0.0);
    let gi = ghat.row(i);
    for &(j, a) in neighbours {
        for ((o, gj), gi) in out.iter_mut().zip(ghat.row(j)).zip(gi) {
            *o += a * (gj - gi);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    t: f64,
    agent: usize,
    version: u64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.agent.cmp(&other.agent))
            .then(self.version.cmp(&other.version))
    }
}

struct Recorder {
    stride: f64,
    horizon: f64,
    next_k: u64,
    final_done: bool,
    samples: Vec<Sample>,
    segments: Option<Vec<Segment>>,
    seg_start: f64,
    seg_x: States,
    seg_u: States,
}

impl Recorder {
    fn new(cfg: &EngineConfig, horizon: f64, state: &EngineState) -> Self {
        Self {
            stride: cfg.stride,
            horizon,
            next_k: 0,
            final_done: false,
            samples: Vec::new(),
            segments: cfg.record_segments.then(Vec::new),
            seg_start: state.t,
            seg_x: state.x.clone(),
            seg_u: state.u.clone(),
        }
    }

    fn grid_time(&self, k: u64) -> f64 {
        k as f64 * self.stride
    }

    /// Emits every grid sample strictly before `until` (or up to and including
    /// the horizon when `inclusive_end`).
    fn sample_until(&mut self, state: &EngineState, until: f64, inclusive_end: bool) {
        let eps = 1e-9 * self.stride;
        loop {
            let s = self.grid_time(self.next_k);
            if s > self.horizon + eps {
                break;
            }
            if s >= until && !(inclusive_end && s <= until + eps) {
                break;
            }
            let s = s.min(self.horizon);
            if (self.horizon - s).abs() <= eps {
                self.final_done = true;
            }
            self.push(state, s);
            self.next_k += 1;
        }
        if inclusive_end && !self.final_done && until >= self.horizon {
            self.push(state, self.horizon);
            self.final_done = true;
        }
    }

    fn push(&mut self, state: &EngineState, s: f64) {
        self.samples.push(Sample {
            t: s,
            x: state.state_at(s),
            ghat: state.ghat.clone(),
        });
    }

    fn close_segment(&mut self, state: &EngineState, restart: bool) {
        if let Some(segs) = self.segments.as_mut() {
            if state.t > self.seg_start || segs.is_empty() {
                segs.push(Segment {
                    t_start: self.seg_start,
                    t_end: state.t,
                    x_start: std::mem::replace(&mut self.seg_x, state.x.clone()),
                    u: std::mem::replace(&mut self.seg_u, state.u.clone()),
                });
            }
            if restart {
                self.seg_start = state.t;
                self.seg_x = state.x.clone();
                self.seg_u = state.u.clone();
            }
        }
    }

    fn reopen(&mut self, state: &EngineState) {
        if self.segments.is_some() {
            self.seg_start = state.t;
            self.seg_x = state.x.clone();
            self.seg_u = state.u.clone();
        }
    }
}

/// Simulates the scenario over `[0, horizon]`.
///
/// Every agent triggers at `t = 0`. After that the earliest pending crossing
/// is processed, all crossings within `cfg.root_tol` of it are folded into
/// the same batch, and the inputs of the batch and of its out-neighbours are
/// recomputed once. Exceeding `cfg.max_events_per_agent` for any agent aborts
/// with [`Error::ZenoSuspected`], whose report carries the partial record.
pub fn run(scenario: &Scenario, cfg: &EngineConfig) -> Result<SimulationRecord> {
    scenario.validate()?;
    cfg.validate()?;
    let n = scenario.n();
    let p = scenario.p();
    let horizon = scenario.horizon;
    if classify_connectivity(&scenario.graph) == Connectivity::Neither {
        warn!(
            "{}: graph has no directed spanning tree; running anyway",
            scenario.name
        );
    }
    let neighbours = scenario.graph.in_neighbors_weighted();
    let listeners: Vec<Vec<usize>> = (0..n)
        .map(|i| scenario.graph.out_neighbors(i).collect())
        .collect();

    let mut state = EngineState::initial(scenario);
    let mut rec = Recorder::new(cfg, horizon, &state);
    let mut heap = BinaryHeap::new();
    let mut version = vec![0u64; n];

    let schedule = |state: &EngineState, i: usize| -> Result<Option<f64>> {
        let c = state.crossing(scenario, i, cfg.threshold_floor);
        find_crossing(&c, horizon, cfg.root_tol, cfg.max_root_steps, i)
    };

    for i in 0..n {
        if let Some(t) = schedule(&state, i)? {
            heap.push(Reverse(Pending {
                t,
                agent: i,
                version: 0,
            }));
        }
    }

    let mut batch = Vec::new();
    let mut affected = Vec::new();
    let mut mark = vec![false; n];
    while let Some(first) = pop_valid(&mut heap, &version) {
        let t_ev = first.t;
        batch.clear();
        batch.push(first.agent);
        while let Some(Reverse(top)) = heap.peek() {
            if top.t > t_ev + cfg.root_tol {
                break;
            }
            let top = heap.pop().expect("peeked").0;
            if top.version == version[top.agent] {
                batch.push(top.agent);
            }
        }
        batch.sort_unstable();
        batch.dedup();

        rec.sample_until(&state, t_ev, false);
        state.advance(t_ev);
        rec.close_segment(&state, false);

        for &i in &batch {
            let xi = state.x.row(i).to_vec();
            state.xhat.row_mut(i).copy_from_slice(&xi);
            scenario
                .outputs
                .for_agent(i)
                .apply_into(&xi, state.ghat.row_mut(i));
            state.events[i].push(t_ev);
            if state.events[i].len() > cfg.max_events_per_agent {
                rec.close_segment(&state, true);
                return Err(Error::ZenoSuspected(Box::new(zeno_report(i, &state, rec))));
            }
        }

        affected.clear();
        for &i in &batch {
            for &k in std::iter::once(&i).chain(&listeners[i]) {
                if !mark[k] {
                    mark[k] = true;
                    affected.push(k);
                }
            }
        }
        affected.sort_unstable();
        for &k in &affected {
            mark[k] = false;
            let mut row = vec![0.0; p];
            input_for(k, &neighbours[k], &state.ghat, &mut row);
            state.u.row_mut(k).copy_from_slice(&row);
        }
        rec.reopen(&state);
        for &k in &affected {
            version[k] += 1;
            if let Some(t) = schedule(&state, k)? {
                heap.push(Reverse(Pending {
                    t,
                    agent: k,
                    version: version[k],
                }));
            }
        }
    }

    rec.sample_until(&state, horizon, true);
    state.advance(horizon);
    rec.close_segment(&state, false);
    debug!(
        "{}: {} events",
        scenario.name,
        state.events.iter().map(Vec::len).sum::<usize>()
    );
    let quiescent = (0..n)
        .map(|i| {
            state
                .crossing(scenario, i, cfg.threshold_floor)
                .never_triggers()
        })
        .collect();
    Ok(SimulationRecord {
        n,
        p,
        end_time: horizon,
        segments: rec.segments.unwrap_or_default(),
        events: state.events,
        samples: rec.samples,
        final_state: state.x,
        quiescent,
        summary: None,
    })
}

fn pop_valid(heap: &mut BinaryHeap<Reverse<Pending>>, version: &[u64]) -> Option<Pending> {
    while let Some(Reverse(e)) = heap.pop() {
        if e.version == version[e.agent] {
            return Some(e);
        }
    }
    None
}

fn zeno_report(agent: usize, state: &EngineState, rec: Recorder) -> ZenoReport {
    let ev = &state.events[agent];
    let start = ev.len().saturating_sub(ZENO_WINDOW + 1);
    let window = &ev[start..];
    let recent_intervals: Vec<f64> = window.windows(2).map(|w| w[1] - w[0]).collect();
    let min_interval = ev
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let pts: Vec<(f64, f64)> = window
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[1], (w[1] - w[0]).ln()))
        .collect();
    let shrink_rate = slope(&pts);
    let partial = SimulationRecord {
        n: state.x.agents(),
        p: state.x.dim(),
        end_time: state.t,
        segments: rec.segments.unwrap_or_default(),
        events: state.events.clone(),
        samples: rec.samples,
        final_state: state.x.clone(),
        quiescent: vec![false; state.x.agents()],
        summary: None,
    };
    ZenoReport {
        agent,
        time: state.t,
        event_count: ev.len(),
        min_interval,
        recent_intervals,
        shrink_rate,
        partial,
    }
}

/// Least-squares slope; `None` for fewer than three points or no spread.
fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedDigraph;
    use crate::nonlinearity::OutputFunction;

    fn two_cycle(x0: [f64; 2], horizon: f64) -> Scenario {
        let g = WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        Scenario::builder(g, OutputFunction::identity(1))
            .initial_states(States::from_scalars(&x0))
            .uniform_triggering(1.0, 1.0)
            .horizon(horizon)
            .build()
            .unwrap()
    }

    #[test]
    fn single_agent_triggers_once() {
        let g = WeightedDigraph::from_edges(1, &[]).unwrap();
        let sc = Scenario::builder(g, OutputFunction::saturation(1, 1.0))
            .initial_states(States::from_scalars(&[3.0]))
            .uniform_triggering(1.0, 1.0)
            .horizon(5.0)
            .build()
            .unwrap();
        let rec = run(&sc, &EngineConfig::default()).unwrap();
        assert_eq!(rec.events, vec![vec![0.0]]);
        assert_eq!(rec.final_state.get(0, 0), 3.0);
        assert!(rec.samples.iter().all(|s| s.x.get(0, 0) == 3.0));
        assert_eq!(rec.quiescent, vec![true]);
    }

    #[test]
    fn first_events_are_at_zero_and_sequences_increase() {
        let rec = run(&two_cycle([1.0, 0.0], 5.0), &EngineConfig::default()).unwrap();
        for ev in &rec.events {
            assert_eq!(ev[0], 0.0);
            assert!(ev.windows(2).all(|w| w[1] > w[0]));
        }
        assert!((rec.events[0][1] - 0.703467).abs() < 1e-5);
        // symmetric setup: both agents trigger together
        assert_eq!(rec.events[0], rec.events[1]);
    }

    #[test]
    fn segments_chain_exactly() {
        let rec = run(&two_cycle([1.0, -2.0], 5.0), &EngineConfig::default()).unwrap();
        assert_eq!(rec.segments.first().unwrap().t_start, 0.0);
        assert_eq!(rec.segments.last().unwrap().t_end, 5.0);
        for w in rec.segments.windows(2) {
            assert_eq!(w[0].t_end, w[1].t_start);
            assert_eq!(w[0].x_end(), w[1].x_start);
        }
        assert_eq!(rec.segments.last().unwrap().x_end(), rec.final_state);
    }

    #[test]
    fn dense_grid_covers_horizon() {
        let cfg = EngineConfig {
            stride: 0.25,
            ..EngineConfig::default()
        };
        let rec = run(&two_cycle([1.0, 0.0], 1.1), &cfg).unwrap();
        let ts: Vec<f64> = rec.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.1]);
    }

    #[test]
    fn event_storm_guard_fires() {
        let cfg = EngineConfig {
            max_events_per_agent: 5,
            ..EngineConfig::default()
        };
        match run(&two_cycle([1.0, 0.0], 50.0), &cfg) {
            Err(Error::ZenoSuspected(r)) => {
                assert_eq!(r.event_count, 6);
                assert!(r.min_interval > 0.0);
                assert_eq!(r.partial.events[r.agent].len(), 6);
                assert!(r.partial.end_time > 0.0);
            }
            other => panic!("expected guard, got {other:?}"),
        }
    }

    #[test]
    fn slope_of_exponential_decay() {
        let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, -2.0 * k as f64 + 1.0)).collect();
        assert!((slope(&pts).unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(slope(&pts[..2]), None);
    }
}
