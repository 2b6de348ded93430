//! Maximum-principle machinery for the scalar bilinear problem.
//!
//! With the normal multiplier fixed to 1 the Hamiltonian is
//! `H = -(alpha R + beta u) + psi (-u R + K)` and splits as `H0 + u H1` with
//! the switching function `H1 = -beta - R psi`. The adjoint obeys
//! `dpsi/dt = alpha + u psi` with `psi(T) = 0`.
//!
//! Arcs under a constant control have closed forms, so extremals are built
//! backward from `(R(T), 0)` arc by arc. The time at which an arc meets the
//! switching curve `R psi = -beta` is the root of a quadratic: in the backward
//! time `s` for `u = 0`, and in `z = exp(u_max s)` for `u = u_max`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{flow, ModelParams, PiecewiseControl, Segment, TrajectorySample};
use crate::error::{Error, Result};

/// Absolute tolerance on `H1 / max(1, beta)` for "on the switching curve".
pub const ON_CURVE_TOL: f64 = 1e-12;

/// Relative discriminant tolerance below which two roots count as a touch.
const DOUBLE_ROOT_TOL: f64 = 1e-12;

pub fn hamiltonian(r: f64, psi: f64, u: f64, params: &ModelParams) -> f64 {
    -(params.alpha * r + params.beta * u) + psi * (-u * r + params.noise_rate())
}

/// Switching function `H1 = -beta - r psi`. Positive selects `u_max`,
/// negative selects 0.
pub fn switching_h1(r: f64, psi: f64, params: &ModelParams) -> f64 {
    -params.beta - r * psi
}

/// Time derivatives of `H1` along the Hamiltonian system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Derivatives {
    /// `dH1/dt = -K psi - alpha r`; the control cancels.
    pub h1_dot: f64,
    /// Coefficient of `u` in `d^2 H1/dt^2`: `alpha r - K psi`.
    pub lc_coeff: f64,
}

pub fn h1_time_derivatives(r: f64, psi: f64, params: &ModelParams) -> H1Derivatives {
    let k = params.noise_rate();
    H1Derivatives {
        h1_dot: -k * psi - params.alpha * r,
        lc_coeff: params.alpha * r - k * psi,
    }
}

/// The order-one singular extremal: a stationary point on the switching curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularData {
    pub r_s: f64,
    pub psi_s: f64,
    pub u_s: f64,
    /// `u_s <= u_max`. Equality counts as admissible.
    pub admissible: bool,
}

impl SingularData {
    /// Coefficient of `u` in `d^2 H1/dt^2` at the singular point.
    pub fn legendre_clebsch(&self, params: &ModelParams) -> f64 {
        h1_time_derivatives(self.r_s, self.psi_s, params).lc_coeff
    }
}

pub fn singular_data(params: &ModelParams) -> SingularData {
    let k = params.noise_rate();
    let (a, b) = (params.alpha, params.beta);
    let u_s = (a * k / b).sqrt();
    SingularData {
        r_s: (k * b / a).sqrt(),
        psi_s: -(a * b / k).sqrt(),
        u_s,
        admissible: u_s <= params.u_max,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcKind {
    /// `u = 0`
    Zero,
    /// `u = u_max`
    Max,
    /// `u = u_s`, state held at the singular point.
    Singular,
}

impl ArcKind {
    pub fn control(self, params: &ModelParams) -> f64 {
        match self {
            ArcKind::Zero => 0.0,
            ArcKind::Max => params.u_max,
            ArcKind::Singular => singular_data(params).u_s,
        }
    }
}

/// Closed-form constants of an arc's orbit in the `(R, psi)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcConstants {
    /// `psi - (alpha/K) R = offset`
    Line { offset: f64 },
    /// `R = c e^{-u t} + K/u`, `psi = w e^{u t} - alpha/u`, and
    /// `|alpha + psi u| |K - u R| = omega`. `t` is absolute time.
    Hyperbola { c: f64, w: f64, omega: f64 },
    Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalArc {
    pub kind: ArcKind,
    pub u: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub r_start: f64,
    pub psi_start: f64,
    pub r_end: f64,
    pub psi_end: f64,
    pub constants: ArcConstants,
}

impl ExtremalArc {
    fn new(
        kind: ArcKind,
        params: &ModelParams,
        t_start: f64,
        t_end: f64,
        (r_start, psi_start): (f64, f64),
        (r_end, psi_end): (f64, f64),
    ) -> Self {
        let k = params.noise_rate();
        let u = kind.control(params);
        let constants = match kind {
            ArcKind::Zero => ArcConstants::Line {
                offset: psi_start - params.alpha / k * r_start,
            },
            ArcKind::Max => ArcConstants::Hyperbola {
                c: (r_start - k / u) * (u * t_start).exp(),
                w: (psi_start + params.alpha / u) * (-u * t_start).exp(),
                omega: orbit_omega(r_start, psi_start, u, params),
            },
            ArcKind::Singular => ArcConstants::Point,
        };
        Self {
            kind,
            u,
            t_start,
            t_end,
            r_start,
            psi_start,
            r_end,
            psi_end,
            constants,
        }
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// `(R, psi)` at absolute time `t` inside the arc. `R` is advanced forward
    /// from the arc start and `psi` backward from the arc end, the stable
    /// direction for each.
    pub fn state_at(&self, t: f64, params: &ModelParams) -> (f64, f64) {
        let k = params.noise_rate();
        let fwd = (t - self.t_start).max(0.0);
        let bwd = (self.t_end - t).max(0.0);
        match self.kind {
            ArcKind::Singular => (self.r_start, self.psi_start),
            ArcKind::Zero => (self.r_start + k * fwd, self.psi_end - params.alpha * bwd),
            ArcKind::Max => {
                let u = self.u;
                let floor = -params.alpha / u;
                (flow(self.r_start, u, fwd, k), floor + (self.psi_end - floor) * (-u * bwd).exp())
            }
        }
    }
}

/// Orbit invariant `|alpha + psi u| |K - u R|` of a constant-`u` arc.
pub fn orbit_omega(r: f64, psi: f64, u: f64, params: &ModelParams) -> f64 {
    (params.alpha + psi * u).abs() * (params.noise_rate() - u * r).abs()
}

/// A chain of arcs covering `[0, T]` ending with `psi(T) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremal {
    pub arcs: Vec<ExtremalArc>,
    pub terminal_r: f64,
}

impl Extremal {
    pub fn horizon(&self) -> f64 {
        self.arcs.last().map_or(0.0, |a| a.t_end)
    }

    pub fn initial_r(&self) -> f64 {
        self.arcs.first().map_or(self.terminal_r, |a| a.r_start)
    }

    pub fn initial_psi(&self) -> f64 {
        self.arcs.first().map_or(0.0, |a| a.psi_start)
    }

    fn arc_at(&self, t: f64) -> &ExtremalArc {
        self.arcs
            .iter()
            .find(|a| t < a.t_end)
            .unwrap_or_else(|| self.arcs.last().expect("extremal has at least one arc"))
    }

    /// `(R, psi, u)` at time `t`.
    pub fn state_at(&self, t: f64, params: &ModelParams) -> (f64, f64, f64) {
        let arc = self.arc_at(t);
        let (r, psi) = arc.state_at(t, params);
        (r, psi, arc.u)
    }

    pub fn kinds(&self) -> Vec<ArcKind> {
        self.arcs.iter().map(|a| a.kind).collect()
    }

    pub fn control(&self) -> PiecewiseControl {
        PiecewiseControl::new(
            self.arcs
                .iter()
                .map(|a| Segment {
                    t_start: a.t_start,
                    t_end: a.t_end,
                    u: a.u,
                })
                .collect(),
        )
    }

    /// `n + 1` equally spaced samples over `[0, T]` including `psi`.
    pub fn samples(&self, n: usize, params: &ModelParams) -> Vec<TrajectorySample> {
        let horizon = self.horizon();
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                let t = if i == n { horizon } else { horizon * i as f64 / n as f64 };
                let (r, psi, u) = self.state_at(t, params);
                TrajectorySample { t, r, u, psi: Some(psi) }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// The orbit crosses the switching curve; the control flips.
    Crossing,
    /// The orbit touches the curve at a double root. Tangency with the
    /// switching curve only happens at the singular point.
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackwardEvent {
    pub dt: f64,
    pub kind: EventKind,
}

/// Which bang arc precedes a singular dwell (in forward time).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingularEntry {
    /// Reached from below with `u = 0` (`R0 < r_s`).
    #[default]
    Zero,
    /// Reached from above with `u = u_max` (`R0 > r_s`).
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Roots {
    None,
    Double(f64),
    Distinct(f64, f64),
}

fn solve_quadratic(a: f64, b: f64, c: f64) -> Roots {
    if a == 0.0 {
        return if b != 0.0 { Roots::Distinct(-c / b, f64::NAN) } else { Roots::None };
    }
    let disc = b * b - 4.0 * a * c;
    let scale = b * b + (4.0 * a * c).abs();
    if disc.abs() <= DOUBLE_ROOT_TOL * scale {
        return Roots::Double(-b / (2.0 * a));
    }
    if disc < 0.0 {
        return Roots::None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (x1, x2) = (q / a, c / q);
    if x1 <= x2 {
        Roots::Distinct(x1, x2)
    } else {
        Roots::Distinct(x2, x1)
    }
}

/// Smallest backward time in `(skip, max_dt]` at which the arc of `kind`
/// through `(r, psi)` meets the switching curve. With `on_curve` the known
/// root at the origin is deflated before solving.
fn backward_event(
    r: f64,
    psi: f64,
    kind: ArcKind,
    on_curve: bool,
    max_dt: f64,
    params: &ModelParams,
) -> Option<BackwardEvent> {
    let k = params.noise_rate();
    let (alpha, beta) = (params.alpha, params.beta);
    let skip = 1e-12 * max_dt.max(1.0);
    let accept = |dt: f64, kind: EventKind| {
        (dt.is_finite() && dt > skip && dt <= max_dt).then_some(BackwardEvent { dt, kind })
    };
    match kind {
        ArcKind::Singular => None,
        ArcKind::Zero => {
            // H1(s) = 0  <=>  alpha K s^2 - (r alpha + K psi) s + (r psi + beta) = 0
            let qa = alpha * k;
            let qb = -(r * alpha + k * psi);
            if on_curve {
                return accept(-qb / qa, EventKind::Crossing);
            }
            match solve_quadratic(qa, qb, r * psi + beta) {
                Roots::None => None,
                Roots::Double(s) => accept(s, EventKind::Tangent),
                Roots::Distinct(s1, s2) => accept(s1, EventKind::Crossing)
                    .or_else(|| accept(s2, EventKind::Crossing)),
            }
        }
        ArcKind::Max => {
            let u = params.u_max;
            if u == 0.0 {
                return None;
            }
            // R = a + b z, psi = c + d / z with z = e^{u s}.
            let a = k / u;
            let b = r - a;
            let c = -alpha / u;
            let d = psi + alpha / u;
            let (qa, qb, qc) = (b * c, beta + a * c + b * d, a * d);
            let to_dt = |z: f64| if z > 0.0 { z.ln() / u } else { f64::NAN };
            if on_curve {
                if qa == 0.0 {
                    return None;
                }
                return accept(to_dt(qc / qa), EventKind::Crossing);
            }
            match solve_quadratic(qa, qb, qc) {
                Roots::None => None,
                Roots::Double(z) => accept(to_dt(z), EventKind::Tangent),
                Roots::Distinct(z1, z2) => accept(to_dt(z1), EventKind::Crossing)
                    .or_else(|| accept(to_dt(z2), EventKind::Crossing)),
            }
        }
    }
}

/// Next backward time at which the orbit of the constant control `u`
/// (0 or `u_max`) through `(r, psi)` meets the switching curve, looking at
/// most `max_dt` back.
pub fn next_event_backward(
    r: f64,
    psi: f64,
    u: f64,
    params: &ModelParams,
    max_dt: f64,
) -> Result<Option<BackwardEvent>> {
    let kind = if u == 0.0 {
        ArcKind::Zero
    } else if u == params.u_max {
        ArcKind::Max
    } else {
        return Err(Error::InvalidArgument(format!(
            "bang control must be 0 or u_max = {}, got {u}",
            params.u_max
        )));
    };
    if !(max_dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("max_dt must be nonnegative, got {max_dt}")));
    }
    if switching_h1(r, psi, params).abs() < ON_CURVE_TOL * params.beta.max(1.0) {
        return Err(Error::AtSwitchingCurve { r, psi });
    }
    Ok(backward_event(r, psi, kind, false, max_dt, params))
}

/// Backward flow of the Hamiltonian system under a constant arc.
fn backward_state(r: f64, psi: f64, kind: ArcKind, s: f64, params: &ModelParams) -> (f64, f64) {
    let k = params.noise_rate();
    match kind {
        ArcKind::Singular => (r, psi),
        ArcKind::Zero => (r - k * s, psi - params.alpha * s),
        ArcKind::Max => {
            let u = params.u_max;
            let eq = k / u;
            let floor = -params.alpha / u;
            (eq + (r - eq) * (u * s).exp(), floor + (psi - floor) * (-u * s).exp())
        }
    }
}

/// Extremal with the given arc sequence and boundaries `bounds` (from 0 to
/// `T`, one more entry than `kinds`). `R` is propagated forward from `r0` and
/// `psi` backward from `psi(T) = 0`. Switching conditions at the interior
/// boundaries are not enforced; callers pass boundaries that satisfy them.
pub fn extremal_from_switches(params: &ModelParams, r0: f64, kinds: &[ArcKind], bounds: &[f64]) -> Result<Extremal> {
    if kinds.is_empty() || bounds.len() != kinds.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} arcs need {} boundaries, got {}",
            kinds.len(),
            kinds.len() + 1,
            bounds.len()
        )));
    }
    if bounds[0] != 0.0 || bounds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("boundaries must start at 0 and be nondecreasing".into()));
    }
    let k = params.noise_rate();
    let n = kinds.len();
    let mut psi = vec![0.0; n + 1];
    for i in (0..n).rev() {
        psi[i] = backward_state(0.0, psi[i + 1], kinds[i], bounds[i + 1] - bounds[i], params).1;
    }
    let mut r = vec![r0; n + 1];
    for i in 0..n {
        r[i + 1] = flow(r[i], kinds[i].control(params), bounds[i + 1] - bounds[i], k);
    }
    let arcs = (0..n)
        .map(|i| ExtremalArc::new(kinds[i], params, bounds[i], bounds[i + 1], (r[i], psi[i]), (r[i + 1], psi[i + 1])))
        .collect();
    Ok(Extremal { arcs, terminal_r: r[n] })
}

/// Builds the extremal ending at `(terminal_r, 0)` at `t = horizon` by
/// integrating the maximum-condition feedback backward in time.
///
/// When the orbit touches the singular point and `u_s` is admissible it is
/// captured there for `singular_dwell` time units, then continues backward
/// on the `entry` branch. A positive dwell on an orbit that never reaches the
/// singular point is rejected.
pub fn backward_orbit(
    params: &ModelParams,
    terminal_r: f64,
    horizon: f64,
    singular_dwell: f64,
    entry: SingularEntry,
) -> Result<Extremal> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    if !(terminal_r.is_finite() && terminal_r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "terminal_r must be nonnegative, got {terminal_r}"
        )));
    }
    if !(singular_dwell >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "singular_dwell must be nonnegative, got {singular_dwell}"
        )));
    }
    let sing = singular_data(params);
    if singular_dwell > 0.0 && !sing.admissible {
        return Err(Error::InvalidArgument(
            "singular dwell requested but u_s exceeds u_max".into(),
        ));
    }

    let min_arc = 1e-12 * horizon;
    let mut arcs: Vec<ExtremalArc> = Vec::new();
    let (mut r, mut psi) = (terminal_r, 0.0);
    let mut t = horizon;
    // H1(T) = -beta < 0, so the last arc is always u = 0.
    let mut kind = ArcKind::Zero;
    let mut on_curve = false;
    let mut captured = false;

    while t > 0.0 {
        let event = if params.u_max == 0.0 {
            None
        } else {
            backward_event(r, psi, kind, on_curve, t, params)
        };
        let dt = event.map_or(t, |e| e.dt.min(t));
        let t_start = if dt >= t { 0.0 } else { t - dt };
        let (mut r_new, mut psi_new) = backward_state(r, psi, kind, t - t_start, params);

        let mut next_kind = kind;
        let mut dwell = 0.0;
        match event {
            Some(BackwardEvent { kind: EventKind::Crossing, .. }) if t_start > 0.0 => {
                next_kind = match kind {
                    ArcKind::Zero => ArcKind::Max,
                    _ => ArcKind::Zero,
                };
            }
            Some(BackwardEvent { kind: EventKind::Tangent, .. }) if t_start > 0.0 => {
                if sing.admissible && !captured {
                    captured = true;
                    r_new = sing.r_s;
                    psi_new = sing.psi_s;
                    dwell = singular_dwell.min(t_start);
                    next_kind = match entry {
                        SingularEntry::Zero => ArcKind::Zero,
                        SingularEntry::Max => ArcKind::Max,
                    };
                }
                // Otherwise the orbit grazes the curve and keeps its control.
            }
            _ => {}
        }

        if t - t_start > min_arc || arcs.is_empty() {
            arcs.push(ExtremalArc::new(kind, params, t_start, t, (r_new, psi_new), (r, psi)));
        } else if let Some(last) = arcs.last_mut() {
            // Sliver: absorb into the arc already built.
            last.t_start = t_start;
        }
        r = r_new;
        psi = psi_new;
        t = t_start;

        if dwell > 0.0 {
            let t_start = if dwell >= t { 0.0 } else { t - dwell };
            arcs.push(ExtremalArc::new(
                ArcKind::Singular,
                params,
                t_start,
                t,
                (sing.r_s, sing.psi_s),
                (sing.r_s, sing.psi_s),
            ));
            t = t_start;
        }
        kind = next_kind;
        on_curve = event.is_some();
    }

    if singular_dwell > 0.0 && !captured {
        return Err(Error::InvalidArgument(format!(
            "singular dwell {singular_dwell} requested but the orbit from terminal_r = \
             {terminal_r} never reaches the singular point"
        )));
    }
    arcs.reverse();
    Ok(Extremal { arcs, terminal_r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(u_max: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, 1, 1.0, u_max).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let p = unit(2.0);
        assert_eq!(hamiltonian(1.0, 0.0, 0.0, &p), -1.0);
        assert_eq!(hamiltonian(2.0, 1.0, 1.0, &p), -4.0);
        let s = singular_data(&p);
        let h0 = hamiltonian(s.r_s, s.psi_s, 0.0, &p);
        for u in [0.3, 1.0, 2.0] {
            assert!((hamiltonian(s.r_s, s.psi_s, u, &p) - h0).abs() < 1e-15);
        }
    }

    #[test]
    fn switching_examples() {
        let p = unit(2.0);
        assert_eq!(switching_h1(1.0, -1.0, &p), 0.0);
        assert_eq!(switching_h1(2.0, 1.0, &p), -3.0);
        assert_eq!(switching_h1(3.0, -1.0, &p), 2.0);
    }

    #[test]
    fn derivative_examples() {
        let p = unit(2.0);
        let s = singular_data(&p);
        let d = h1_time_derivatives(s.r_s, s.psi_s, &p);
        assert_eq!(d.h1_dot, 0.0);
        assert_eq!(d.lc_coeff, 2.0);
        let p3 = ModelParams::new(3.0, 1.0, 1, 1.0, 1.0).unwrap();
        assert_eq!(h1_time_derivatives(1.0, 0.0, &p3).h1_dot, -3.0);
    }

    #[test]
    fn singular_examples() {
        let s = singular_data(&unit(2.0));
        assert_eq!((s.r_s, s.psi_s, s.u_s), (1.0, -1.0, 1.0));
        assert!(s.admissible);
        let s = singular_data(&ModelParams::new(4.0, 1.0, 1, 1.0, 3.0).unwrap());
        assert_eq!((s.r_s, s.psi_s, s.u_s), (0.5, -2.0, 2.0));
        assert!(!singular_data(&unit(0.5)).admissible);
        // Boundary u_s == u_max counts as singular.
        assert!(singular_data(&unit(1.0)).admissible);
    }

    #[test]
    fn no_crossing_when_discriminant_negative() {
        let p = unit(2.0);
        assert_eq!(next_event_backward(0.5, 0.0, 0.0, &p, 0.5).unwrap(), None);
        // Quadratic -1 + 0.5 s - s^2 has no real roots at all.
        assert_eq!(next_event_backward(0.5, 0.0, 0.0, &p, 1e6).unwrap(), None);
    }

    #[test]
    fn crossing_shrinks_near_the_curve() {
        let p = unit(2.0);
        let (r, psi) = (3.0, -1.0 / 3.0 + 1e-7);
        let e = next_event_backward(r, psi, 0.0, &p, 10.0).unwrap().unwrap();
        assert!(e.dt < 1e-6, "dt = {}", e.dt);
        assert_eq!(
            next_event_backward(1.0, -1.0, 0.0, &p, 1.0),
            Err(Error::AtSwitchingCurve { r: 1.0, psi: -1.0 })
        );
        assert!(next_event_backward(1.0, 0.0, 0.7, &p, 1.0).is_err());
    }

    #[test]
    fn terminal_tangency_is_at_singular_point() {
        let p = unit(2.0);
        let s = singular_data(&p);
        let e = next_event_backward(2.0 * s.r_s, 0.0, 0.0, &p, 5.0).unwrap().unwrap();
        assert_eq!(e.kind, EventKind::Tangent);
        assert!((e.dt - 1.0).abs() < 1e-12);
        let (r, psi) = backward_state(2.0 * s.r_s, 0.0, ArcKind::Zero, e.dt, &p);
        assert!(switching_h1(r, psi, &p).abs() < 1e-12);
        assert!(h1_time_derivatives(r, psi, &p).h1_dot.abs() < 1e-12);
    }

    #[test]
    fn short_orbit_is_a_single_zero_arc() {
        let p = unit(2.0);
        let ext = backward_orbit(&p, 0.5, 0.5, 0.0, SingularEntry::Zero).unwrap();
        assert_eq!(ext.kinds(), vec![ArcKind::Zero]);
        assert!(ext.initial_r().abs() < 1e-15);
    }

    #[test]
    fn singular_capture_and_dwell() {
        let p = unit(2.0);
        let ext = backward_orbit(&p, 2.0, 3.0, 2.0, SingularEntry::Zero).unwrap();
        assert_eq!(ext.kinds(), vec![ArcKind::Singular, ArcKind::Zero]);
        assert_eq!(ext.arcs[0].t_start, 0.0);
        assert!((ext.arcs[0].t_end - 2.0).abs() < 1e-12);
        assert!((ext.initial_r() - 1.0).abs() < 1e-15);

        let ext = backward_orbit(&p, 2.0, 4.0, 1.0, SingularEntry::Max).unwrap();
        assert_eq!(ext.kinds(), vec![ArcKind::Max, ArcKind::Singular, ArcKind::Zero]);
        assert!(ext.initial_r() > 1.0);

        // A dwell on an orbit that misses the singular point is rejected.
        assert!(backward_orbit(&p, 1.5, 3.0, 1.0, SingularEntry::Zero).is_err());
        assert!(backward_orbit(&unit(0.5), 2.0, 3.0, 1.0, SingularEntry::Zero).is_err());
    }

    #[test]
    fn boundaries_lie_on_switching_curve() {
        for (p, rt) in [(unit(2.0), 3.0), (unit(0.6), 2.1), (unit(0.6), 5.0)] {
            let ext = backward_orbit(&p, rt, 6.0, 0.0, SingularEntry::Zero).unwrap();
            assert_eq!(ext.arcs.last().unwrap().psi_end, 0.0);
            for w in ext.arcs.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                assert_eq!(a.t_end, b.t_start);
                assert!((a.r_end - b.r_start).abs() < 1e-9 * a.r_end.abs().max(1.0));
                assert!((a.psi_end - b.psi_start).abs() < 1e-9 * a.psi_end.abs().max(1.0));
                assert!(switching_h1(b.r_start, b.psi_start, &p).abs() < 1e-9);
            }
        }
    }
}
