//! CSV and JSON artifact writers.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! records produce byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{ConditionReport, ConsensusVerdict, LyapunovSeries, TwoBlockConstants};
use crate::graph::Connectivity;
use crate::sim::{EngineConfig, SimulationRecord, ZenoReport};
use crate::Result;

fn state_header(n: usize, p: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for i in 1..=n {
        for l in 1..=p {
            h.push(format!("x_{i}_{l}"));
        }
    }
    h
}

/// Dense samples plus one row at every event time (the state at that
/// instant), ordered by time with samples first on ties.
pub fn write_trajectory(path: &Path, record: &SimulationRecord) -> Result<()> {
    let mut rows: Vec<(f64, u8, Vec<f64>)> = record
        .samples
        .iter()
        .map(|s| (s.t, 0, s.x.as_slice().to_vec()))
        .collect();
    let mut last_event = f64::NEG_INFINITY;
    for seg in &record.segments {
        let is_event = record
            .events
            .iter()
            .any(|ev| ev.binary_search_by(|t| t.total_cmp(&seg.t_start)).is_ok());
        if is_event && seg.t_start > last_event {
            rows.push((seg.t_start, 1, seg.x_start.as_slice().to_vec()));
            last_event = seg.t_start;
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(state_header(record.n, record.p))?;
    for (t, _, x) in rows {
        let mut rec = vec![t.to_string()];
        rec.extend(x.iter().map(f64::to_string));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `agent,k,t` with 1-based agent and event indices.
pub fn write_events(path: &Path, record: &SimulationRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["agent", "k", "t"])?;
    for (i, ev) in record.events.iter().enumerate() {
        for (k, t) in ev.iter().enumerate() {
            w.write_record([(i + 1).to_string(), (k + 1).to_string(), t.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,V,W` for one block, `t,V1,V2,Wr` for two.
pub fn write_lyapunov(path: &Path, series: &LyapunovSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if series.depth == 1 {
        w.write_record(["t", "V", "W"])?;
        for k in 0..series.times.len() {
            w.write_record([series.times[k], series.v[k], series.w[k]].map(|v| v.to_string()))?;
        }
    } else {
        w.write_record(["t", "V1", "V2", "Wr"])?;
        for k in 0..series.times.len() {
            w.write_record(
                [series.times[k], series.v1[k], series.v2[k], series.wr[k]].map(|v| v.to_string()),
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,mu,q_1..q_n`.
pub fn write_lyapunov_detail(path: &Path, series: &LyapunovSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = series.q.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string(), "mu".to_string()];
    header.extend((1..=n).map(|i| format!("q_{i}")));
    w.write_record(header)?;
    for k in 0..series.times.len() {
        let mut rec = vec![series.times[k].to_string(), series.mu[k].to_string()];
        rec.extend(series.q[k].iter().map(f64::to_string));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    ZenoSuspected,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZenoSummary {
    pub agent: usize,
    pub time: f64,
    pub event_count: usize,
    pub min_interval: f64,
    pub shrink_rate: Option<f64>,
    pub recent_intervals: Vec<f64>,
}

impl From<&ZenoReport> for ZenoSummary {
    fn from(r: &ZenoReport) -> Self {
        Self {
            agent: r.agent + 1,
            time: r.time,
            event_count: r.event_count,
            min_interval: r.min_interval,
            shrink_rate: r.shrink_rate,
            recent_intervals: r.recent_intervals.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSummary {
    /// `W` or `Wr`.
    pub series: String,
    pub min_value: f64,
    /// Largest one-step increase of the series after `t1` (over the whole
    /// run for one block).
    pub max_increase: f64,
    pub t1: Option<f64>,
    pub constants: Option<TwoBlockConstants>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    /// SHA-256 of the canonical scenario file text after overrides.
    pub scenario_hash: String,
    pub termination: Termination,
    pub horizon: f64,
    pub end_time: f64,
    pub connectivity: Connectivity,
    pub output: String,
    pub event_counts: Vec<usize>,
    pub total_events: usize,
    pub min_inter_event: Vec<Option<f64>>,
    pub mean_inter_event: Vec<Option<f64>>,
    pub last_event: Vec<f64>,
    /// Agents that would not trigger again with their inputs frozen at the
    /// end of the run.
    pub quiescent: Vec<bool>,
    pub conservation_residual: Option<f64>,
    /// Largest `‖e_i‖² - α_i e^{-β_i t}` seen at a dense sample.
    pub trigger_excess: f64,
    pub conditions: Option<ConditionReport>,
    pub verdict: Option<ConsensusVerdict>,
    pub lyapunov: Option<LyapunovSummary>,
    pub zeno: Option<ZenoSummary>,
    pub config: EngineConfig,
    pub notes: Vec<String>,
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, summary)?;
    writeln!(f)?;
    Ok(())
}
