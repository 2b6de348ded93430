//! Problem data, closed-form state propagation and exact cost evaluation.
//!
//! Under a constant control `u` the state equation `dR/dt = -u R + K`
//! (with `K = N sigma^2`) has the explicit solution
//!
//! ```text
//! u = 0:  R(t) = R(0) + K t
//! u > 0:  R(t) = K/u + (R(0) - K/u) exp(-u t)
//! ```
//!
//! Everything here is evaluated from these formulas, so trajectories and costs
//! of piecewise-constant controls are exact up to round-off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `u * dt` the exponential branch switches to its series.
const SMALL_EXPONENT: f64 = 1e-12;

/// Relative slack for control coverage and bound checks.
const COVER_TOL: f64 = 1e-12;

/// Physical and cost constants of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Weight of the desynchronization cost.
    pub alpha: f64,
    /// Weight of the transmission energy.
    pub beta: f64,
    /// Number of client nodes `N`.
    pub n_clients: u32,
    /// Noise variance rate `sigma^2` of a client clock.
    pub sigma_sq: f64,
    /// Upper control bound `u_1`.
    pub u_max: f64,
    /// Common clock rate `v`. Only the simulator looks at it.
    #[serde(default = "default_drift")]
    pub drift: f64,
}

fn default_drift() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, n_clients: u32, sigma_sq: f64, u_max: f64) -> Result<Self> {
        let params = Self {
            alpha,
            beta,
            n_clients,
            sigma_sq,
            u_max,
            drift: default_drift(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_drift(mut self, drift: f64) -> Result<Self> {
        self.drift = drift;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("sigma_sq", self.sigma_sq)?;
        if self.n_clients == 0 {
            return Err(Error::InvalidArgument("n_clients must be at least 1".into()));
        }
        if !(self.u_max.is_finite() && self.u_max >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "u_max must be finite and nonnegative, got {}",
                self.u_max
            )));
        }
        if !self.drift.is_finite() {
            return Err(Error::InvalidArgument(format!("drift must be finite, got {}", self.drift)));
        }
        Ok(())
    }

    /// `N sigma^2`, the only noise quantity the deterministic problem sees.
    pub fn noise_rate(&self) -> f64 {
        f64::from(self.n_clients) * self.sigma_sq
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite and positive, got {value}")))
    }
}

/// One solvable problem: parameters, initial desynchronization and horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub params: ModelParams,
    pub r0: f64,
    pub horizon: f64,
}

impl ProblemInstance {
    pub fn new(params: ModelParams, r0: f64, horizon: f64) -> Result<Self> {
        let instance = Self { params, r0, horizon };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.r0.is_finite() && self.r0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "r0 must be finite and nonnegative, got {}",
                self.r0
            )));
        }
        positive("horizon", self.horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub u: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Ordered constant-control segments covering `[0, T]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PiecewiseControl {
    pub segments: Vec<Segment>,
}

impl PiecewiseControl {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn constant(horizon: f64, u: f64) -> Self {
        Self::new(vec![Segment { t_start: 0.0, t_end: horizon, u }])
    }

    /// Builds a control from consecutive `(duration, u)` pieces starting at 0.
    /// Empty pieces are dropped.
    pub fn from_durations(pieces: &[(f64, f64)]) -> Self {
        let mut t = 0.0;
        let mut segments = Vec::with_capacity(pieces.len());
        for &(d, u) in pieces {
            if d > 0.0 {
                segments.push(Segment { t_start: t, t_end: t + d, u });
                t += d;
            }
        }
        Self { segments }
    }

    pub fn horizon(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// Checks that the segments partition `[0, T]` and respect the bounds.
    pub fn validate(&self, instance: &ProblemInstance) -> Result<()> {
        let horizon = instance.horizon;
        let tol = COVER_TOL * horizon.max(1.0);
        let (first, last) = match (self.segments.first(), self.segments.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidControl("control has no segments".into())),
        };
        if first.t_start.abs() > tol {
            return Err(Error::InvalidControl(format!(
                "first segment starts at {} instead of 0",
                first.t_start
            )));
        }
        if (last.t_end - horizon).abs() > tol {
            return Err(Error::InvalidControl(format!(
                "last segment ends at {} instead of horizon {horizon}",
                last.t_end
            )));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.t_start < seg.t_end) {
                return Err(Error::InvalidControl(format!(
                    "segment {i} is empty or reversed: [{}, {}]",
                    seg.t_start, seg.t_end
                )));
            }
            let u_cap = instance.params.u_max * (1.0 + COVER_TOL);
            if !(seg.u >= 0.0 && seg.u <= u_cap) {
                return Err(Error::InvalidControl(format!(
                    "segment {i} has u = {} outside [0, {}]",
                    seg.u, instance.params.u_max
                )));
            }
            if i > 0 && (seg.t_start - self.segments[i - 1].t_end).abs() > tol {
                return Err(Error::InvalidControl(format!(
                    "segments {} and {i} are not contiguous",
                    i - 1
                )));
            }
        }
        Ok(())
    }

    /// Control value at `t`; right-continuous, the last segment is closed.
    pub fn value_at(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| t < s.t_end)
            .or(self.segments.last())
            .map_or(0.0, |s| s.u)
    }

    /// Merges segments shorter than `min_len` into a neighbour and fuses
    /// adjacent segments carrying the same value.
    pub fn merged(&self, min_len: f64) -> Self {
        let mut kept: Vec<Segment> = Vec::with_capacity(self.segments.len());
        let mut carry_start: Option<f64> = None;
        for seg in &self.segments {
            if seg.duration() < min_len {
                match kept.last_mut() {
                    Some(prev) => prev.t_end = seg.t_end,
                    None => {
                        carry_start.get_or_insert(seg.t_start);
                    }
                }
                continue;
            }
            let mut seg = *seg;
            if let Some(t0) = carry_start.take() {
                seg.t_start = t0;
            }
            match kept.last_mut() {
                Some(prev) if prev.u == seg.u => prev.t_end = seg.t_end,
                _ => kept.push(seg),
            }
        }
        if kept.is_empty() {
            return self.clone();
        }
        Self { segments: kept }
    }

    /// Interior instants where the control value changes.
    pub fn switch_times(&self) -> Vec<f64> {
        self.segments
            .windows(2)
            .filter(|w| w[0].u != w[1].u)
            .map(|w| w[1].t_start)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: f64,
    pub u: f64,
    pub psi: Option<f64>,
}

/// `(1 - exp(-x)) / x`
fn phi1(x: f64) -> f64 {
    if x < SMALL_EXPONENT {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(exp(-x) - 1 + x) / x^2`
fn phi2(x: f64) -> f64 {
    if x < 1e-4 {
        0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0
    } else {
        ((-x).exp_m1() + x) / (x * x)
    }
}

/// Unchecked closed-form flow of `dR/dt = -u R + k` over `dt`.
pub(crate) fn flow(r: f64, u: f64, dt: f64, k: f64) -> f64 {
    if u == 0.0 {
        r + k * dt
    } else {
        let x = u * dt;
        r * (-x).exp() + k * dt * phi1(x)
    }
}

/// Exact `int_0^dt R(s) ds` for the flow starting at `r`.
pub(crate) fn flow_integral(r: f64, u: f64, dt: f64, k: f64) -> f64 {
    if u == 0.0 {
        r * dt + 0.5 * k * dt * dt
    } else {
        let x = u * dt;
        r * dt * phi1(x) + k * dt * dt * phi2(x)
    }
}

/// Exact running cost `int (alpha R + beta u)` of one constant-control piece.
pub fn segment_cost(r_start: f64, u: f64, dt: f64, params: &ModelParams) -> f64 {
    params.alpha * flow_integral(r_start, u, dt, params.noise_rate()) + params.beta * u * dt
}

/// State after holding control `u` for `dt` time units from `r_start`.
pub fn propagate_r(r_start: f64, u: f64, dt: f64, params: &ModelParams) -> Result<f64> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be nonnegative, got {dt}")));
    }
    if !(u >= 0.0 && u <= params.u_max * (1.0 + COVER_TOL)) {
        return Err(Error::InvalidArgument(format!(
            "u = {u} outside [0, {}]",
            params.u_max
        )));
    }
    if !(r_start >= 0.0 && r_start.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "r_start must be nonnegative, got {r_start}"
        )));
    }
    Ok(flow(r_start, u, dt, params.noise_rate()))
}

/// Samples the trajectory of `control` with `samples_per_segment` points per
/// segment. Every segment boundary is included, including `t = T`.
pub fn integrate_control(
    instance: &ProblemInstance,
    control: &PiecewiseControl,
    samples_per_segment: usize,
) -> Result<Vec<TrajectorySample>> {
    control.validate(instance)?;
    if samples_per_segment == 0 {
        return Err(Error::InvalidArgument("samples_per_segment must be positive".into()));
    }
    let k = instance.params.noise_rate();
    let mut out = Vec::with_capacity(control.segments.len() * samples_per_segment + 1);
    let mut r = instance.r0;
    for seg in &control.segments {
        let len = seg.duration();
        for i in 0..samples_per_segment {
            let s = len * i as f64 / samples_per_segment as f64;
            out.push(TrajectorySample {
                t: seg.t_start + s,
                r: flow(r, seg.u, s, k),
                u: seg.u,
                psi: None,
            });
        }
        r = flow(r, seg.u, len, k);
    }
    let last = control.segments.last().expect("validated control is nonempty");
    out.push(TrajectorySample {
        t: last.t_end,
        r,
        u: last.u,
        psi: None,
    });
    Ok(out)
}

/// State of the controlled trajectory at arbitrary times in `[0, T]`.
pub fn sample_at(
    instance: &ProblemInstance,
    control: &PiecewiseControl,
    times: &[f64],
) -> Result<Vec<TrajectorySample>> {
    control.validate(instance)?;
    let k = instance.params.noise_rate();
    // State at the start of every segment.
    let mut starts = Vec::with_capacity(control.segments.len());
    let mut r = instance.r0;
    for seg in &control.segments {
        starts.push(r);
        r = flow(r, seg.u, seg.duration(), k);
    }
    times
        .iter()
        .map(|&t| {
            if !(t >= 0.0 && t <= instance.horizon) {
                return Err(Error::InvalidArgument(format!(
                    "sample time {t} outside [0, {}]",
                    instance.horizon
                )));
            }
            let idx = control
                .segments
                .iter()
                .position(|s| t < s.t_end)
                .unwrap_or(control.segments.len() - 1);
            let seg = &control.segments[idx];
            let s = (t - seg.t_start).max(0.0);
            Ok(TrajectorySample {
                t,
                r: flow(starts[idx], seg.u, s, k),
                u: seg.u,
                psi: None,
            })
        })
        .collect()
}

/// Exact value of `int_0^T (alpha R + beta u) dt`.
pub fn cost(instance: &ProblemInstance, control: &PiecewiseControl) -> Result<f64> {
    control.validate(instance)?;
    let params = &instance.params;
    let k = params.noise_rate();
    let mut r = instance.r0;
    let mut total = 0.0;
    for seg in &control.segments {
        let d = seg.duration();
        total += segment_cost(r, seg.u, d, params);
        r = flow(r, seg.u, d, k);
    }
    Ok(total)
}
