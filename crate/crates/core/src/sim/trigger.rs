//! Locating the next triggering instant of one agent.
//!
//! With inputs frozen, agent `i` follows `x_i(s) = x_i(t0) + (s - t0) u_i`
//! and we look for the first `s` where
//!
//! ```text
//! ψ(s) = ‖ĝ_i - g(x_i(s))‖ - sqrt(α_i e^{-β_i s} + floor)
//! ```
//!
//! becomes positive. `‖e‖` grows no faster than `K‖u_i‖` (K a Lipschitz bound
//! of `g` on the remaining path) and the square-root threshold decays no
//! faster than `(β/2)·sqrt(α e^{-βs})`, so stepping by `-ψ / rate` can never
//! jump over a crossing. Once a sign change is bracketed it is refined with
//! an Illinois false-position iteration.

use crate::nonlinearity::OutputFunction;
use crate::sim::{EngineConfig, EngineState, Scenario};
use crate::{Error, Result};

pub(crate) struct Crossing<'a> {
    pub t0: f64,
    pub x: &'a [f64],
    pub u: &'a [f64],
    pub ghat: &'a [f64],
    pub g: &'a OutputFunction,
    pub alpha: f64,
    pub beta: f64,
    pub floor: f64,
}

impl Crossing<'_> {
    #[inline]
    fn error_norm(&self, s: f64) -> f64 {
        let dt = s - self.t0;
        let mut acc = 0.0;
        for (l, c) in self.g.components().iter().enumerate() {
            let e = self.ghat[l] - c.apply(self.x[l] + dt * self.u[l]);
            acc += e * e;
        }
        acc.sqrt()
    }

    #[inline]
    fn decaying(&self, s: f64) -> f64 {
        self.alpha * (-self.beta * s).exp()
    }

    #[inline]
    fn psi(&self, s: f64) -> f64 {
        self.error_norm(s) - (self.decaying(s) + self.floor).sqrt()
    }

    fn lipschitz_window(&self, s: f64, t_max: f64) -> f64 {
        let (a, b) = (s - self.t0, t_max - self.t0);
        self.g
            .components()
            .iter()
            .enumerate()
            .filter(|(l, _)| self.u[*l] != 0.0)
            .map(|(l, c)| c.lipschitz_on(self.x[l] + a * self.u[l], self.x[l] + b * self.u[l]))
            .fold(0.0, f64::max)
    }

    /// True when the error can never reach the threshold again with the
    /// inputs frozen: it is constant along the remaining ray and already
    /// below the floor.
    pub fn never_triggers(&self) -> bool {
        let flat = self.u.iter().all(|&v| v == 0.0)
            || self.lipschitz_window(self.t0, f64::INFINITY) == 0.0;
        let e = self.error_norm(self.t0);
        flat && (e == 0.0 || e * e <= self.floor)
    }

    fn speed(&self) -> f64 {
        self.u.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// First violation time in `(t0, t_max]`, or `None` if the triggering
/// condition holds throughout.
pub(crate) fn find_crossing(
    c: &Crossing<'_>,
    t_max: f64,
    tol: f64,
    max_steps: usize,
    agent: usize,
) -> Result<Option<f64>> {
    if t_max <= c.t0 {
        return Ok(None);
    }
    let speed = c.speed();
    let mut s = c.t0;
    let mut psi_s = c.psi(s);
    if psi_s > 0.0 {
        return Ok(Some(s));
    }
    for _ in 0..max_steps {
        if s >= t_max {
            return Ok(None);
        }
        let (step, k) = safe_step(c, s, psi_s, t_max, speed);
        if k * speed == 0.0 && s + step >= t_max {
            // error frozen from here on; solve the threshold equation directly
            let e = c.error_norm(s);
            let excess = e * e - c.floor;
            if excess <= 0.0 {
                return Ok(None);
            }
            let t_star = ((c.alpha / excess).ln() / c.beta).max(s);
            return Ok((t_star <= t_max).then_some(t_star));
        }
        let next = (s + step.max(tol)).min(t_max);
        let psi_next = c.psi(next);
        if psi_next > 0.0 {
            return Ok(Some(refine(c, s, psi_s, next, psi_next, tol)));
        }
        if next <= s {
            return Ok(None);
        }
        s = next;
        psi_s = psi_next;
    }
    Err(Error::RootBracketing {
        agent,
        lo: s,
        hi: t_max,
    })
}

/// A step from `s` that cannot skip a crossing, with the Lipschitz bound it
/// used. The bound is taken over a window that shrinks towards the step, so
/// flat stretches of `g` are crossed in one move. On a window where `g` is
/// flat the error is constant and `ψ` increasing, so the whole window is safe.
fn safe_step(c: &Crossing<'_>, s: f64, psi_s: f64, t_max: f64, speed: f64) -> (f64, f64) {
    let decay_rate = 0.5 * c.beta * c.decaying(s).sqrt();
    let full = t_max - s;
    let k_full = c.lipschitz_window(s, t_max);
    if k_full * speed == 0.0 {
        return (full, k_full);
    }
    let mut window = full;
    let mut best = 0.0;
    for _ in 0..8 {
        let k = c.lipschitz_window(s, s + window);
        if k * speed == 0.0 {
            // flat up to `window` but not up to `full`: push to the edge
            let (mut flat, mut steep) = (window, full);
            while steep - flat > 1e-9 * full {
                let mid = 0.5 * (flat + steep);
                if c.lipschitz_window(s, s + mid) * speed == 0.0 {
                    flat = mid;
                } else {
                    steep = mid;
                }
            }
            return (flat.max(best), 0.0);
        }
        let step = (-psi_s / (k * speed + decay_rate)).min(window);
        best = f64::max(best, step);
        if step >= 0.5 * window {
            break;
        }
        window = 2.0 * step;
    }
    (best, k_full)
}

/// Shrinks `[lo, hi]` with `ψ(lo) ≤ 0 < ψ(hi)` and returns the last point
/// known to satisfy the condition (or `hi` if that is still `t0`).
fn refine(
    c: &Crossing<'_>,
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    mut f_hi: f64,
    tol: f64,
) -> f64 {
    let width_tol = tol.min(1e-6 * (hi - c.t0));
    let mut side = 0i8;
    for _ in 0..200 {
        let width = hi - lo;
        if width <= width_tol {
            break;
        }
        let mut mid = if f_hi - f_lo > 0.0 {
            lo - f_lo * (hi - lo) / (f_hi - f_lo)
        } else {
            0.5 * (lo + hi)
        };
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
        }
        let f_mid = c.psi(mid);
        if f_mid > 0.0 {
            hi = mid;
            f_hi = f_mid;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = mid;
            f_lo = f_mid;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
        // force progress when false position stalls on one side
        if hi - lo > 0.5 * width {
            let m = 0.5 * (lo + hi);
            if m > lo && m < hi {
                let fm = c.psi(m);
                if fm > 0.0 {
                    hi = m;
                    f_hi = fm;
                } else {
                    lo = m;
                    f_lo = fm;
                }
                side = 0;
            }
        }
    }
    if lo > c.t0 {
        lo
    } else {
        hi
    }
}

/// Next triggering time of `agent` assuming no other agent triggers first.
///
/// States move as `x_j(t) = x_j(state.t) + (t - state.t) u_j`; the returned
/// time is the first instant in `(state.t, t_max]` at which
/// `‖e_i‖² = α_i e^{-β_i t} (+ floor)`, located to `cfg.root_tol`.
pub fn next_event_time(
    state: &EngineState,
    scenario: &Scenario,
    agent: usize,
    t_max: f64,
    cfg: &EngineConfig,
) -> Result<Option<f64>> {
    let c = Crossing {
        t0: state.t,
        x: state.x.row(agent),
        u: state.u.row(agent),
        ghat: state.ghat.row(agent),
        g: scenario.outputs.for_agent(agent),
        alpha: scenario.alpha[agent],
        beta: scenario.beta[agent],
        floor: cfg.threshold_floor,
    };
    find_crossing(&c, t_max, cfg.root_tol, cfg.max_root_steps, agent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedDigraph;
    use crate::states::States;

    fn bisection_oracle(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if f(m) > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        0.5 * (lo + hi)
    }

    fn two_cycle(x0: [f64; 2]) -> Scenario {
        let g = WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        Scenario::builder(g, OutputFunction::identity(1))
            .initial_states(States::from_scalars(&x0))
            .uniform_triggering(1.0, 1.0)
            .horizon(10.0)
            .build()
            .unwrap()
    }

    #[test]
    fn two_agent_identity_first_crossing() {
        let sc = two_cycle([1.0, 0.0]);
        let st = EngineState::initial(&sc);
        let t = next_event_time(&st, &sc, 0, 10.0, &EngineConfig::default())
            .unwrap()
            .unwrap();
        // e_1(t) = t, so t² = e^{-t}
        let oracle = bisection_oracle(|t| t * t - (-t).exp(), 0.0, 1.0);
        assert!((t - oracle).abs() < 1e-8, "{t} vs {oracle}");
        assert!((oracle - 0.70347).abs() < 1e-5);
    }

    #[test]
    fn consensus_never_triggers() {
        let sc = two_cycle([0.4, 0.4]);
        let st = EngineState::initial(&sc);
        assert_eq!(
            next_event_time(&st, &sc, 0, 1e6, &EngineConfig::default()).unwrap(),
            None
        );
    }

    #[test]
    fn isolated_agent_never_triggers() {
        let g = WeightedDigraph::from_edges(3, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let sc = Scenario::builder(g, OutputFunction::identity(1))
            .initial_states(States::from_scalars(&[1.0, -1.0, 5.0]))
            .uniform_triggering(1.0, 1.0)
            .build()
            .unwrap();
        let st = EngineState::initial(&sc);
        assert_eq!(
            next_event_time(&st, &sc, 2, 1e3, &EngineConfig::default()).unwrap(),
            None
        );
    }

    #[test]
    fn frozen_error_uses_closed_form() {
        // saturated agent moving deeper into saturation with a stale error
        let g = OutputFunction::saturation(1, 1.0);
        let c = Crossing {
            t0: 0.0,
            x: &[2.0],
            u: &[1.0],
            ghat: &[0.5],
            g: &g,
            alpha: 1.0,
            beta: 2.0,
            floor: 0.0,
        };
        let t = find_crossing(&c, 100.0, 1e-10, 1000, 0).unwrap().unwrap();
        // 0.25 = e^{-2t}
        assert!((t - 0.25_f64.ln() / -2.0).abs() < 1e-14);
    }

    #[test]
    fn floor_keeps_small_errors_quiet() {
        let g = OutputFunction::saturation(1, 1.0);
        let c = Crossing {
            t0: 0.0,
            x: &[2.0],
            u: &[1.0],
            ghat: &[0.999],
            g: &g,
            alpha: 1.0,
            beta: 2.0,
            floor: 1e-4,
        };
        assert_eq!(find_crossing(&c, 1e3, 1e-10, 1000, 0).unwrap(), None);
    }

    #[test]
    fn returned_time_satisfies_condition() {
        let g = OutputFunction::saturation(2, 1.0);
        let c = Crossing {
            t0: 0.3,
            x: &[0.2, -0.9],
            u: &[3.0, -0.5],
            ghat: &[0.1, -0.95],
            g: &g,
            alpha: 0.5,
            beta: 3.0,
            floor: 0.0,
        };
        let t = find_crossing(&c, 10.0, 1e-10, 100_000, 0).unwrap().unwrap();
        assert!(c.psi(t) <= 0.0);
        assert!(c.psi(t + 1e-9) > 0.0);
    }

    #[test]
    fn long_saturated_drift_is_crossed_in_few_steps() {
        // starts far outside the band with zero error and slides back in
        let g = OutputFunction::saturation(1, 1.0);
        let c = Crossing {
            t0: 0.4,
            x: &[5.47],
            u: &[-1.3],
            ghat: &[1.0],
            g: &g,
            alpha: 10.0,
            beta: 10.0,
            floor: 0.0,
        };
        let t = find_crossing(&c, 20.0, 1e-12, 200, 0).unwrap().unwrap();
        let oracle = bisection_oracle(|s| c.psi(s), 0.4, 20.0);
        assert!((t - oracle).abs() < 1e-11, "{t} vs {oracle}");
        assert!(t > 0.4 + 4.47 / 1.3);
    }
}
