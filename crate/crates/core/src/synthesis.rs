//! Optimal control synthesis by shooting on the terminal state.
//!
//! Transversality pins `psi(T) = 0`, so an extremal is fixed by the single
//! scalar `R(T)`. [`backward_orbit`] maps `R(T)` to `R(0)`; [`synthesize`]
//! solves `R(0) = r0`. In the singular regime the family of extremals that
//! dwell at the singular point is solved in closed form first, since it fills
//! the jump of `R(0)` at `R(T) = 2 r_s`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, PiecewiseControl, ProblemInstance, Segment};
use crate::error::{Error, Result};
use crate::pmp::{self, backward_orbit, singular_data, ArcKind, Extremal, SingularData, SingularEntry};
use crate::ModelParams;

/// Arcs shorter than this fraction of `T` are merged away before classification.
pub const MERGE_FRACTION: f64 = 1e-10;

/// Number of intervals in the bracket scan over `R(T)`.
const SCAN_POINTS: usize = 64;

/// Structure of an optimal control, listed by its value sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegimeLabel {
    /// `0`
    Z,
    /// `u_max, 0`
    B0,
    /// `0, u_max, 0`
    BZB,
    /// `u_s, 0`
    S0,
    /// `0, u_s, 0`
    ZS0,
    /// `u_max, u_s, 0`
    BS0,
}

impl RegimeLabel {
    pub const ALL: [RegimeLabel; 6] = [
        RegimeLabel::Z,
        RegimeLabel::B0,
        RegimeLabel::BZB,
        RegimeLabel::S0,
        RegimeLabel::ZS0,
        RegimeLabel::BS0,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::Z => "Z",
            RegimeLabel::B0 => "B0",
            RegimeLabel::BZB => "BZB",
            RegimeLabel::S0 => "S0",
            RegimeLabel::ZS0 => "ZS0",
            RegimeLabel::BS0 => "BS0",
        }
    }

    /// Arc sequence in forward time.
    pub fn kinds(self) -> &'static [ArcKind] {
        use ArcKind::*;
        match self {
            RegimeLabel::Z => &[Zero],
            RegimeLabel::B0 => &[Max, Zero],
            RegimeLabel::BZB => &[Zero, Max, Zero],
            RegimeLabel::S0 => &[Singular, Zero],
            RegimeLabel::ZS0 => &[Zero, Singular, Zero],
            RegimeLabel::BS0 => &[Max, Singular, Zero],
        }
    }

    pub fn is_singular(self) -> bool {
        self.kinds().contains(&ArcKind::Singular)
    }

    /// Labels that can occur for the given parameters.
    pub fn admissible(params: &ModelParams) -> Vec<RegimeLabel> {
        let singular = singular_data(params).admissible;
        Self::ALL
            .into_iter()
            .filter(|l| singular || !l.is_singular())
            .collect()
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegimeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown regime label {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub instance: ProblemInstance,
    pub control: PiecewiseControl,
    pub regime: RegimeLabel,
    pub switch_times: Vec<f64>,
    pub cost: f64,
    pub terminal_r: f64,
    pub extremal: Extremal,
    pub singular: SingularData,
    /// Other `R(T)` values that also satisfied `R(0) = r0`. Expected empty.
    pub extra_roots: Vec<f64>,
}

/// Merged `(t_start, t_end, kind)` pieces of an extremal.
fn merged_pieces(extremal: &Extremal, min_len: f64) -> Vec<(f64, f64, ArcKind)> {
    let mut out: Vec<(f64, f64, ArcKind)> = Vec::with_capacity(extremal.arcs.len());
    let mut carry_start: Option<f64> = None;
    for arc in &extremal.arcs {
        if arc.duration() < min_len {
            match out.last_mut() {
                Some(prev) => prev.1 = arc.t_end,
                None => {
                    carry_start.get_or_insert(arc.t_start);
                }
            }
            continue;
        }
        let t_start = carry_start.take().unwrap_or(arc.t_start);
        match out.last_mut() {
            Some(prev) if prev.2 == arc.kind => prev.1 = arc.t_end,
            _ => out.push((t_start, arc.t_end, arc.kind)),
        }
    }
    if out.is_empty() {
        if let (Some(first), Some(last)) = (extremal.arcs.first(), extremal.arcs.last()) {
            out.push((first.t_start, last.t_end, last.kind));
        }
    }
    out
}

/// Label of a forward arc-kind sequence. Repeated kinds are collapsed first.
pub fn classify_kinds(kinds: &[ArcKind]) -> Result<RegimeLabel> {
    let mut seq: Vec<ArcKind> = kinds.to_vec();
    seq.dedup();
    RegimeLabel::ALL
        .into_iter()
        .find(|l| l.kinds() == seq.as_slice())
        .ok_or_else(|| Error::StructureViolation(format!("{seq:?}")))
}

/// Label of a control read from its values alone. When `u_s == u_max` the
/// value cannot tell a singular arc from a bang arc and is read as bang.
pub fn classify_control(control: &PiecewiseControl, params: &ModelParams) -> Result<RegimeLabel> {
    let horizon = control.horizon();
    let sing = singular_data(params);
    let merged = control.merged(MERGE_FRACTION * horizon);
    let kinds = merged
        .segments
        .iter()
        .map(|s| {
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
            if s.u == 0.0 {
                Ok(ArcKind::Zero)
            } else if close(s.u, params.u_max) {
                Ok(ArcKind::Max)
            } else if sing.admissible && close(s.u, sing.u_s) {
                Ok(ArcKind::Singular)
            } else {
                Err(Error::StructureViolation(format!(
                    "control value {} is none of 0, u_max, u_s",
                    s.u
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    classify_kinds(&kinds)
}

/// Label of a synthesized result, from its realized arc sequence.
pub fn classify(result: &SynthesisResult) -> Result<RegimeLabel> {
    let pieces = merged_pieces(&result.extremal, MERGE_FRACTION * result.instance.horizon);
    let kinds: Vec<ArcKind> = pieces.iter().map(|p| p.2).collect();
    classify_kinds(&kinds)
}

/// Closed-form member of the singular-dwell family through `r0`, if any.
fn singular_family(instance: &ProblemInstance, sing: &SingularData) -> Option<Extremal> {
    let params = &instance.params;
    let k = params.noise_rate();
    let horizon = instance.horizon;
    let r0 = instance.r0;
    // The tail from the singular point to psi = 0 under u = 0.
    let tail = sing.r_s / k;
    let (pre, entry) = if (r0 - sing.r_s).abs() <= 1e-12 * sing.r_s.max(1.0) {
        (0.0, SingularEntry::Zero)
    } else if r0 < sing.r_s {
        ((sing.r_s - r0) / k, SingularEntry::Zero)
    } else {
        let eq = k / params.u_max;
        if sing.r_s <= eq {
            return None;
        }
        (((r0 - eq) / (sing.r_s - eq)).ln() / params.u_max, SingularEntry::Max)
    };
    let dwell = horizon - tail - pre;
    if !(tail < horizon && dwell >= -1e-12 * horizon) {
        return None;
    }
    let ext = backward_orbit(params, 2.0 * sing.r_s, horizon, dwell.max(0.0), entry).ok()?;
    ((ext.initial_r() - r0).abs() <= r0_tolerance(r0)).then_some(ext)
}

fn r0_tolerance(r0: f64) -> f64 {
    1e-9 * r0.max(1.0)
}

fn shoot(params: &ModelParams, terminal_r: f64, horizon: f64) -> Result<Extremal> {
    backward_orbit(params, terminal_r, horizon, 0.0, SingularEntry::Zero)
}

/// Bisects `R(0)(R_T) - r0` on `[lo, hi]` down to adjacent floats and
/// returns the final bracket with its residuals.
fn bisect(
    params: &ModelParams,
    instance: &ProblemInstance,
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    mut f_hi: f64,
) -> Result<[(f64, f64); 2]> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = shoot(params, mid, instance.horizon)?.initial_r() - instance.r0;
        if f_mid == 0.0 {
            return Ok([(mid, 0.0), (mid, 0.0)]);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok([(lo, f_lo), (hi, f_hi)])
}

/// `H1` at every interior arc boundary of the extremal with arc sequence
/// `kinds` and boundaries `bounds`, built forward from `r0`.
fn switch_residuals(params: &ModelParams, r0: f64, kinds: &[ArcKind], bounds: &[f64]) -> Result<(Vec<f64>, Extremal)> {
    let ext = pmp::extremal_from_switches(params, r0, kinds, bounds)?;
    let res = ext.arcs[1..]
        .iter()
        .map(|a| pmp::switching_h1(a.r_start, a.psi_start, params))
        .collect();
    Ok((res, ext))
}

/// Solves `a x = b` for a small dense system by Gaussian elimination with
/// partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Does the control of `ext` maximize the Hamiltonian along every arc?
fn satisfies_maximum_condition(params: &ModelParams, ext: &Extremal) -> bool {
    let slack = 1e-9 * params.beta.max(1.0);
    ext.arcs.iter().all(|arc| {
        (0..=16).all(|i| {
            let t = arc.t_start + arc.duration() * f64::from(i) / 16.0;
            let (r, psi) = arc.state_at(t, params);
            let h1 = pmp::switching_h1(r, psi, params);
            match arc.kind {
                ArcKind::Zero => h1 <= slack,
                ArcKind::Max => h1 >= -slack,
                ArcKind::Singular => h1.abs() <= slack,
            }
        })
    })
}

/// Resolves a bracket whose residuals straddle zero but exceed the
/// tolerance even at adjacent floats. This happens where `R(0)` is extremely
/// steep in `R_T`, for example after long backward `u_max` arcs or next to a
/// tangency. The switch times of the richer end of the bracket are then
/// taken as unknowns and Newton's method drives `H1` to zero at every switch
/// on the extremal built forward from `r0`, which pins `R(0)` exactly.
/// Returns `None` when the sign change is a jump.
fn steep_root(params: &ModelParams, instance: &ProblemInstance, bracket: [(f64, f64); 2]) -> Result<Option<Extremal>> {
    let [(lo, f_lo), (hi, f_hi)] = bracket;
    let a = shoot(params, lo, instance.horizon)?;
    let b = shoot(params, hi, instance.horizon)?;
    let start = |e: &Extremal| -> Vec<f64> {
        let mut bounds: Vec<f64> = e.arcs.iter().map(|x| x.t_start).collect();
        bounds.push(instance.horizon);
        bounds
    };
    let (kinds, mut bounds) = if a.kinds() == b.kinds() {
        let w = f_lo / (f_lo - f_hi);
        let (ba, bb) = (start(&a), start(&b));
        (a.kinds(), ba.iter().zip(&bb).map(|(x, y)| x + w * (y - x)).collect::<Vec<f64>>())
    } else if a.arcs.len() >= b.arcs.len() {
        (a.kinds(), start(&a))
    } else {
        (b.kinds(), start(&b))
    };
    let m = kinds.len() - 1;
    let horizon = instance.horizon;
    let scale = params.beta.max(1.0);
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let (mut res, mut ext) = switch_residuals(params, instance.r0, &kinds, &bounds)?;
    for _ in 0..60 {
        if norm(&res) <= 1e-13 * scale {
            break;
        }
        let h = 1e-7 * horizon;
        let mut jac = vec![vec![0.0; m]; m];
        for j in 0..m {
            let mut up = bounds.clone();
            let mut down = bounds.clone();
            up[j + 1] = (up[j + 1] + h).min(horizon);
            down[j + 1] = (down[j + 1] - h).max(0.0);
            let (r_up, _) = switch_residuals(params, instance.r0, &kinds, &sorted(up.clone()))?;
            let (r_down, _) = switch_residuals(params, instance.r0, &kinds, &sorted(down.clone()))?;
            for i in 0..m {
                jac[i][j] = (r_up[i] - r_down[i]) / (up[j + 1] - down[j + 1]);
            }
        }
        let Some(step) = solve_dense(jac, res.iter().map(|x| -x).collect()) else {
            return Ok(None);
        };
        // Damped update keeping the boundaries ordered inside [0, T].
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 1024.0 {
            let mut trial = bounds.clone();
            for j in 0..m {
                trial[j + 1] = (bounds[j + 1] + lambda * step[j]).clamp(0.0, horizon);
            }
            let trial = sorted(trial);
            let (r_trial, e_trial) = switch_residuals(params, instance.r0, &kinds, &trial)?;
            if norm(&r_trial) < norm(&res) {
                bounds = trial;
                res = r_trial;
                ext = e_trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let ok = norm(&res) <= 1e-9 * scale && satisfies_maximum_condition(params, &ext);
    Ok(ok.then_some(ext))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Finds every root of the shooting residual on `[0, r0 + K T]`, each with
/// its extremal.
fn shooting_roots(instance: &ProblemInstance) -> Result<(Vec<(f64, Extremal)>, Vec<(f64, f64)>)> {
    let params = &instance.params;
    let tol = r0_tolerance(instance.r0);
    let upper = instance.r0 + params.noise_rate() * instance.horizon;
    let mut scanned = Vec::with_capacity(SCAN_POINTS + 1);
    for i in 0..=SCAN_POINTS {
        let rt = if i == SCAN_POINTS { upper } else { upper * i as f64 / SCAN_POINTS as f64 };
        scanned.push((rt, shoot(params, rt, instance.horizon)?.initial_r()));
    }

    let mut roots: Vec<(f64, Extremal)> = Vec::new();
    for (i, &(rt, r_init)) in scanned.iter().enumerate() {
        let f = r_init - instance.r0;
        if f.abs() <= tol {
            roots.push((rt, shoot(params, rt, instance.horizon)?));
            continue;
        }
        let Some(&(rt_next, r_next)) = scanned.get(i + 1) else {
            continue;
        };
        let f_next = r_next - instance.r0;
        if f_next.abs() <= tol || (f < 0.0) == (f_next < 0.0) {
            continue;
        }
        let bracket = bisect(params, instance, rt, f, rt_next, f_next)?;
        let &(best, f_best) = bracket
            .iter()
            .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("bracket has two ends");
        if f_best.abs() <= tol {
            roots.push((best, shoot(params, best, instance.horizon)?));
        } else if let Some(ext) = steep_root(params, instance, bracket)? {
            roots.push((best, ext));
        }
        // Otherwise the sign change is a jump, not a root.
    }
    roots.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-9 * b.0.abs().max(1.0));
    Ok((roots, scanned))
}

fn assemble(instance: &ProblemInstance, extremal: Extremal, extra_roots: Vec<f64>) -> Result<SynthesisResult> {
    let params = &instance.params;
    let pieces = merged_pieces(&extremal, MERGE_FRACTION * instance.horizon);
    let control = PiecewiseControl::new(
        pieces
            .iter()
            .map(|&(t_start, t_end, kind)| Segment {
                t_start,
                t_end,
                u: kind.control(params),
            })
            .collect(),
    );
    let kinds: Vec<ArcKind> = pieces.iter().map(|p| p.2).collect();
    let regime = classify_kinds(&kinds)?;
    let switch_times = pieces.iter().skip(1).map(|p| p.0).collect();
    let cost = dynamics::cost(instance, &control)?;
    Ok(SynthesisResult {
        instance: *instance,
        control,
        regime,
        switch_times,
        cost,
        terminal_r: extremal.terminal_r,
        extremal,
        singular: singular_data(params),
        extra_roots,
    })
}

/// Optimal control of `instance`.
pub fn synthesize(instance: &ProblemInstance) -> Result<SynthesisResult> {
    instance.validate()?;
    let params = &instance.params;
    let sing = singular_data(params);
    if sing.admissible && params.u_max > 0.0 {
        if let Some(ext) = singular_family(instance, &sing) {
            return assemble(instance, ext, Vec::new());
        }
    }
    let (roots, scanned) = shooting_roots(instance)?;
    let mut roots = roots.into_iter();
    let Some((_, extremal)) = roots.next() else {
        return Err(Error::SynthesisFailure {
            reason: format!(
                "no terminal state reproduces r0 = {} over horizon {}",
                instance.r0, instance.horizon
            ),
            scanned,
        });
    };
    assemble(instance, extremal, roots.map(|r| r.0).collect())
}

/// Labels over a `(T, R0)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMap {
    pub horizons: Vec<f64>,
    pub r0s: Vec<f64>,
    /// `labels[i][j]` belongs to `(horizons[i], r0s[j])`.
    pub labels: Vec<Vec<RegimeLabel>>,
}

impl RegimeMap {
    pub fn distinct_labels(&self) -> Vec<RegimeLabel> {
        let mut seen: Vec<RegimeLabel> = self.labels.iter().flatten().copied().collect();
        seen.sort();
        seen.dedup();
        seen
    }
}

fn grid(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                range.1
            } else {
                range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Classifies the optimal control at every point of a `grid_nt x grid_nr`
/// grid over horizon and initial state.
pub fn regime_map(
    params: &ModelParams,
    t_range: (f64, f64),
    r0_range: (f64, f64),
    grid_nt: usize,
    grid_nr: usize,
) -> Result<RegimeMap> {
    params.validate()?;
    if grid_nt == 0 || grid_nr == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
    }
    if !(t_range.0 > 0.0 && t_range.0 <= t_range.1 && t_range.1.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad horizon range {t_range:?}")));
    }
    if !(r0_range.0 >= 0.0 && r0_range.0 <= r0_range.1 && r0_range.1.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad r0 range {r0_range:?}")));
    }
    let horizons = grid(t_range, grid_nt);
    let r0s = grid(r0_range, grid_nr);
    let cells: Vec<RegimeLabel> = (0..grid_nt * grid_nr)
        .into_par_iter()
        .map(|idx| {
            let (t, r0) = (horizons[idx / grid_nr], r0s[idx % grid_nr]);
            let instance = ProblemInstance::new(*params, r0, t)?;
            synthesize(&instance).map(|res| res.regime).map_err(|e| match e {
                Error::SynthesisFailure { reason, scanned } => Error::SynthesisFailure {
                    reason: format!("at T = {t}, r0 = {r0}: {reason}"),
                    scanned,
                },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let labels = cells.chunks(grid_nr).map(<[RegimeLabel]>::to_vec).collect();
    Ok(RegimeMap { horizons, r0s, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate_control;

    fn params(alpha: f64, u_max: f64) -> ModelParams {
        ModelParams::new(alpha, 1.0, 1, 1.0, u_max).unwrap()
    }

    #[test]
    fn classify_examples() {
        use ArcKind::*;
        assert_eq!(classify_kinds(&[Zero]).unwrap(), RegimeLabel::Z);
        assert_eq!(classify_kinds(&[Max, Singular, Zero]).unwrap(), RegimeLabel::BS0);
        assert!(matches!(classify_kinds(&[Max, Max]), Err(Error::StructureViolation(_))));
        assert!(matches!(classify_kinds(&[Zero, Max]), Err(Error::StructureViolation(_))));
        assert!(matches!(
            classify_kinds(&[Max, Zero, Max, Zero]),
            Err(Error::StructureViolation(_))
        ));

        let p = params(1.0, 2.0);
        let c = PiecewiseControl::from_durations(&[(1.0, 2.0), (1.0, 1.0), (1.0, 0.0)]);
        assert_eq!(classify_control(&c, &p).unwrap(), RegimeLabel::BS0);
        let c = PiecewiseControl::from_durations(&[(1.0, 2.0), (1.0, 2.0)]);
        assert!(matches!(classify_control(&c, &p), Err(Error::StructureViolation(_))));
        let c = PiecewiseControl::from_durations(&[(1.0, 0.0), (1e-12, 2.0), (2.0, 0.0)]);
        assert_eq!(classify_control(&c, &p).unwrap(), RegimeLabel::Z);
    }

    #[test]
    fn label_round_trips_through_text() {
        for l in RegimeLabel::ALL {
            assert_eq!(l.as_str().parse::<RegimeLabel>().unwrap(), l);
        }
        assert!("BB".parse::<RegimeLabel>().is_err());
    }

    #[test]
    fn singular_start_dwells_then_coasts() {
        let p = params(1.0, 2.0);
        let inst = ProblemInstance::new(p, 1.0, 3.0).unwrap();
        let res = synthesize(&inst).unwrap();
        assert_eq!(res.regime, RegimeLabel::S0);
        assert_eq!(res.switch_times.len(), 1);
        assert!((res.switch_times[0] - 2.0).abs() < 1e-12);
        let traj = integrate_control(&inst, &res.control, 50).unwrap();
        for s in traj.iter().filter(|s| s.t <= 2.0) {
            assert!((s.r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_horizon_never_transmits() {
        for u_max in [0.5, 2.0] {
            let inst = ProblemInstance::new(params(1.0, u_max), 1.0, 0.01).unwrap();
            let res = synthesize(&inst).unwrap();
            assert_eq!(res.regime, RegimeLabel::Z);
            assert!(res.switch_times.is_empty());
        }
    }

    #[test]
    fn nonsingular_large_r0_is_bang_then_coast() {
        let p = params(4.0, 1.0);
        assert!(!singular_data(&p).admissible);
        let inst = ProblemInstance::new(p, 10.0, 3.0).unwrap();
        let res = synthesize(&inst).unwrap();
        assert_eq!(res.regime, RegimeLabel::B0);
        assert_eq!(res.switch_times.len(), 1);
        assert!(res.extra_roots.is_empty());
    }

    #[test]
    fn zero_bound_forces_zero_control() {
        let p = params(1.0, 0.0);
        let inst = ProblemInstance::new(p, 3.0, 5.0).unwrap();
        let res = synthesize(&inst).unwrap();
        assert_eq!(res.regime, RegimeLabel::Z);
    }

    #[test]
    fn regime_map_single_cell() {
        let map = regime_map(&params(1.0, 2.0), (1e-3, 1e-3), (0.5, 0.5), 1, 1).unwrap();
        assert_eq!(map.labels, vec![vec![RegimeLabel::Z]]);
        assert!(regime_map(&params(1.0, 2.0), (0.0, 1.0), (0.5, 0.5), 1, 1).is_err());
    }
}
