//! Event-triggered consensus for single-integrator agents with nonlinear
//! output over directed graphs.
//!
//! Each agent `i` evolves as `ẋ_i = u_i`, broadcasts its output `g(x_i)` only
//! at its own triggering times, and applies the piecewise-constant input
//!
//! ```text
//! u_i(t) = -Σ_j L_ij g(x̂_j(t))
//! ```
//!
//! where `x̂_j` is the state agent `j` last broadcast. Agent `i` triggers when
//! `‖g(x̂_i) - g(x_i)‖² ≤ α_i e^{-β_i t}` is about to fail.
//!
//! Because the input is constant between events the flow is exactly
//! piecewise linear, so the simulator in [`sim`] never integrates an ODE: the
//! only numerics are root-finds for the next triggering time.
//!
//! The crate is organised as:
//!
//! - [`graph`]: weighted digraphs, Laplacians, SCC condensation into block
//!   upper-triangular form, left null vectors and the spectral quantities used
//!   by the consensus conditions.
//! - [`nonlinearity`]: componentwise output maps (identity, saturation,
//!   user-supplied), sampling-based checks of their monotonicity and slope
//!   bounds, and the antiderivatives used by the Lyapunov functions.
//! - [`sim`]: the event-driven engine.
//! - [`analysis`]: consensus verdicts, initial-condition checks and Lyapunov
//!   diagnostics evaluated on simulation records.
//! - [`cli`]: scenario files, bundled reference scenarios, random scenario
//!   generation and artifact writers. The `etcon` binary is a thin wrapper.
//!
//! ```
//! use etcon::prelude::*;
//!
//! let graph = WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
//! let scenario = Scenario::builder(graph, OutputFunction::identity(1))
//!     .initial_states(States::from_rows(&[vec![1.0], vec![0.0]]).unwrap())
//!     .triggering(vec![1.0; 2], vec![1.0; 2])
//!     .horizon(5.0)
//!     .build()
//!     .unwrap();
//! let record = run(&scenario, &EngineConfig::default()).unwrap();
//! let first = record.events[0][1];
//! assert!((first - 0.703467).abs() < 1e-5);
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod graph;
pub mod nonlinearity;
pub mod sim;
pub mod states;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analysis::{
        check_conditions, lyapunov_series, lyapunov_v, weighted_initial_average, ConditionReport,
        ConsensusVerdict, LyapunovSeries,
    };
    pub use crate::graph::{
        build_laplacian, classify_connectivity, condense, left_null_vector, spectral_ratio,
        Connectivity, Laplacian, SccDecomposition, WeightedDigraph,
    };
    pub use crate::nonlinearity::{OutputFunction, Outputs};
    pub use crate::sim::{
        control_input, min_inter_event, next_event_time, run, EngineConfig, Scenario,
        SimulationRecord,
    };
    pub use crate::states::States;
    pub use crate::{Error, Result};
}
