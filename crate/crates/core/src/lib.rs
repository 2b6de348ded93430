//! Energy-versus-synchronization optimal control for a single-server
//! wireless sensor network.
//!
//! The desynchronization measure `R(t)` of `N` noisy client clocks obeys
//! `dR/dt = -u R + N sigma^2`, where `u(t) in [0, u_max]` is the intensity of
//! synchronization messages sent by the server. This crate finds the control
//! minimizing `int_0^T (alpha R + beta u) dt`:
//!
//! * [`dynamics`]: problem data, closed-form propagation and exact cost.
//! * [`pmp`]: Hamiltonian, switching function, singular arc and exact
//!   backward extremal construction.
//! * [`synthesis`]: shooting on the terminal state, structure classification
//!   and `(T, R0)` regime maps.
//! * [`oracle`]: brute-force dynamic programming and parametric search used to
//!   cross-check [`synthesis`].
//! * [`netsim`]: Monte Carlo simulation of the clock network that validates
//!   the ODE reduction.

pub mod dynamics;
mod error;
pub mod netsim;
pub mod oracle;
pub mod pmp;
pub mod synthesis;

pub use dynamics::{ModelParams, PiecewiseControl, ProblemInstance, Segment, TrajectorySample};
pub use error::{Error, Result};
pub use pmp::{ArcKind, Extremal, ExtremalArc, SingularData};
pub use synthesis::{RegimeLabel, SynthesisResult};
