//! Brute-force solvers used to check [`crate::synthesis`].
//!
//! [`dp_solve`] runs backward value iteration on a time x state grid with
//! exact one-step transitions and linear interpolation in the state.
//! [`parametric_search`] optimizes the switch times of a fixed control
//! structure. Both report the exact cost of a feasible control.

use crate::dynamics::{self, flow, segment_cost, PiecewiseControl, ProblemInstance, Segment};
use crate::error::{Error, Result};
use crate::pmp::{singular_data, ArcKind};
use crate::synthesis::RegimeLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpConfig {
    pub n_time: usize,
    pub n_state: usize,
    /// Evenly spaced controls on `[0, u_max]`; `u_s` is added when admissible.
    pub n_control: usize,
    pub r_max: f64,
}

impl DpConfig {
    pub const BASELINE: (usize, usize, usize) = (2000, 2001, 21);

    /// Baseline resolution with a state bound 10% above the uncontrolled
    /// reach `r0 + K T`.
    pub fn baseline(instance: &ProblemInstance) -> Self {
        let (n_time, n_state, n_control) = Self::BASELINE;
        Self::with_resolution(instance, n_time, n_state, n_control)
    }

    pub fn with_resolution(
        instance: &ProblemInstance,
        n_time: usize,
        n_state: usize,
        n_control: usize,
    ) -> Self {
        Self {
            n_time,
            n_state,
            n_control,
            r_max: 1.1 * reach(instance),
        }
    }

    pub fn validate(&self, instance: &ProblemInstance) -> Result<()> {
        if self.n_time == 0 || self.n_state < 2 || self.n_control == 0 {
            return Err(Error::InvalidArgument(format!(
                "DP grid too small: n_time={}, n_state={}, n_control={}",
                self.n_time, self.n_state, self.n_control
            )));
        }
        if !(self.r_max >= reach(instance) && self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "r_max = {} below the uncontrolled reach {}",
                self.r_max,
                reach(instance)
            )));
        }
        Ok(())
    }
}

fn reach(instance: &ProblemInstance) -> f64 {
    instance.r0 + instance.params.noise_rate() * instance.horizon
}

/// Control grid: evenly spaced on `[0, u_max]` plus `u_s` when admissible.
pub fn control_grid(instance: &ProblemInstance, n_control: usize) -> Vec<f64> {
    let u_max = instance.params.u_max;
    let mut grid: Vec<f64> = if n_control <= 1 || u_max == 0.0 {
        vec![0.0]
    } else {
        (0..n_control)
            .map(|i| if i + 1 == n_control { u_max } else { u_max * i as f64 / (n_control - 1) as f64 })
            .collect()
    };
    if u_max > 0.0 && !grid.contains(&u_max) {
        grid.push(u_max);
    }
    let sing = singular_data(&instance.params);
    if sing.admissible && !grid.contains(&sing.u_s) {
        grid.push(sing.u_s);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    /// Exact cost of `control`.
    pub cost: f64,
    pub control: PiecewiseControl,
    /// Interpolated value function at `(0, r0)`.
    pub grid_value: f64,
}

/// Value function slice on the state grid with linear interpolation and
/// linear extrapolation above `r_max`.
struct Slice<'a> {
    values: &'a [f64],
    dr: f64,
}

impl Slice<'_> {
    fn at(&self, r: f64) -> f64 {
        let n = self.values.len();
        let x = r / self.dr;
        let j = (x.floor() as usize).min(n - 2);
        let w = x - j as f64;
        self.values[j] + w * (self.values[j + 1] - self.values[j])
    }
}

pub fn dp_solve(instance: &ProblemInstance, config: &DpConfig) -> Result<DpSolution> {
    instance.validate()?;
    config.validate(instance)?;
    let params = &instance.params;
    let k = params.noise_rate();
    let dt = instance.horizon / config.n_time as f64;
    let controls = control_grid(instance, config.n_control);
    let n = config.n_state;
    let dr = config.r_max / (n - 1) as f64;
    let states: Vec<f64> = (0..n).map(|j| j as f64 * dr).collect();

    // The dynamics are autonomous, so every slice shares these transitions.
    let stage: Vec<f64> = states
        .iter()
        .flat_map(|&r| controls.iter().map(move |&u| (r, u)))
        .map(|(r, u)| segment_cost(r, u, dt, params))
        .collect();
    let next: Vec<f64> = states
        .iter()
        .flat_map(|&r| controls.iter().map(move |&u| flow(r, u, dt, k)))
        .collect();
    let nc = controls.len();

    let mut values = vec![vec![0.0; n]; config.n_time + 1];
    for step in (0..config.n_time).rev() {
        let reachable = instance.r0 + k * dt * step as f64;
        let (head, tail) = values.split_at_mut(step + 1);
        let later = Slice { values: &tail[0], dr };
        let current = &mut head[step];
        for j in 0..n {
            let row = j * nc..(j + 1) * nc;
            if states[j] <= reachable && next[row.clone()].iter().any(|&r| r > config.r_max) {
                return Err(Error::OffGrid(format!(
                    "reachable state {} at step {step} leaves [0, {}]",
                    states[j], config.r_max
                )));
            }
            current[j] = stage[row.clone()]
                .iter()
                .zip(&next[row])
                .map(|(&c, &r)| c + later.at(r))
                .fold(f64::INFINITY, f64::min);
        }
    }

    // Greedy forward pass from the exact initial state.
    let mut r = instance.r0;
    let mut segments: Vec<Segment> = Vec::new();
    for step in 0..config.n_time {
        let later = Slice { values: &values[step + 1], dr };
        let (mut best_u, mut best) = (0.0, f64::INFINITY);
        for &u in &controls {
            let q = segment_cost(r, u, dt, params) + later.at(flow(r, u, dt, k));
            if q < best {
                best = q;
                best_u = u;
            }
        }
        let t_start = step as f64 * dt;
        let t_end = if step + 1 == config.n_time { instance.horizon } else { (step + 1) as f64 * dt };
        match segments.last_mut() {
            Some(prev) if prev.u == best_u => prev.t_end = t_end,
            _ => segments.push(Segment { t_start, t_end, u: best_u }),
        }
        r = flow(r, best_u, dt, k);
    }
    let control = PiecewiseControl::new(segments);
    let cost = dynamics::cost(instance, &control)?;
    let grid_value = Slice { values: &values[0], dr }.at(instance.r0);
    Ok(DpSolution { cost, control, grid_value })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricResult {
    pub cost: f64,
    pub switch_times: Vec<f64>,
    pub control: PiecewiseControl,
}

fn structured_control(instance: &ProblemInstance, values: &[f64], switches: &[f64]) -> PiecewiseControl {
    let horizon = instance.horizon;
    let mut bounds = Vec::with_capacity(values.len() + 1);
    bounds.push(0.0);
    bounds.extend(switches.iter().map(|t| t.clamp(0.0, horizon)));
    bounds.push(horizon);
    let segments: Vec<Segment> = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| bounds[i + 1] > bounds[i])
        .map(|(i, &u)| Segment {
            t_start: bounds[i],
            t_end: bounds[i + 1],
            u,
        })
        .collect();
    PiecewiseControl::new(segments)
}

fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Best switch times for a fixed control structure: exhaustive search on a
/// `grid`-interval lattice, then golden-section refinement per coordinate.
pub fn parametric_search(
    instance: &ProblemInstance,
    structure: RegimeLabel,
    grid: usize,
) -> Result<ParametricResult> {
    instance.validate()?;
    let params = &instance.params;
    let sing = singular_data(params);
    if structure.is_singular() && !sing.admissible {
        return Err(Error::InvalidArgument(format!(
            "structure {structure} needs u_s = {} <= u_max = {}",
            sing.u_s, params.u_max
        )));
    }
    let values: Vec<f64> = structure.kinds().iter().map(|k: &ArcKind| k.control(params)).collect();
    let horizon = instance.horizon;
    let eval = |switches: &[f64]| -> f64 {
        dynamics::cost(instance, &structured_control(instance, &values, switches))
            .unwrap_or(f64::INFINITY)
    };
    let grid = grid.max(1);
    let h = horizon / grid as f64;
    let lattice = |i: usize| if i == grid { horizon } else { i as f64 * h };

    let mut best: Vec<f64> = match values.len() - 1 {
        0 => Vec::new(),
        1 => {
            let i = (0..=grid)
                .min_by(|&a, &b| eval(&[lattice(a)]).total_cmp(&eval(&[lattice(b)])))
                .unwrap_or(0);
            vec![lattice(i)]
        }
        _ => {
            let mut best = (f64::INFINITY, vec![0.0, 0.0]);
            for i in 0..=grid {
                for j in i..=grid {
                    let s = [lattice(i), lattice(j)];
                    let c = eval(&s);
                    if c < best.0 {
                        best = (c, s.to_vec());
                    }
                }
            }
            best.1
        }
    };

    // Coordinate-wise refinement; each coordinate stays ordered with its neighbours.
    for _sweep in 0..4 {
        for idx in 0..best.len() {
            let lo_bound = if idx == 0 { 0.0 } else { best[idx - 1] };
            let hi_bound = best.get(idx + 1).copied().unwrap_or(horizon);
            let lo = (best[idx] - h).max(lo_bound);
            let hi = (best[idx] + h).min(hi_bound);
            if hi <= lo {
                continue;
            }
            let mut trial = best.clone();
            let x = golden_section(lo, hi, |x| {
                let mut s = trial.clone();
                s[idx] = x;
                eval(&s)
            });
            trial[idx] = x;
            if eval(&trial) <= eval(&best) {
                best = trial;
            }
        }
    }

    let control = structured_control(instance, &values, &best);
    let cost = dynamics::cost(instance, &control)?;
    Ok(ParametricResult {
        cost,
        switch_times: best,
        control,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ModelParams;

    #[test]
    fn one_step_picks_cheapest_control() {
        let p = ModelParams::new(1.0, 5.0, 1, 1.0, 2.0).unwrap();
        let inst = ProblemInstance::new(p, 1.0, 0.01).unwrap();
        let cfg = DpConfig::with_resolution(&inst, 1, 101, 21);
        let sol = dp_solve(&inst, &cfg).unwrap();
        assert_eq!(sol.control.segments.len(), 1);
        assert_eq!(sol.control.segments[0].u, 0.0);
    }

    #[test]
    fn zero_bound_gives_forced_cost() {
        let p = ModelParams::new(1.3, 1.0, 2, 0.5, 0.0).unwrap();
        let inst = ProblemInstance::new(p, 2.0, 3.0).unwrap();
        let sol = dp_solve(&inst, &DpConfig::with_resolution(&inst, 50, 51, 21)).unwrap();
        let expected = 1.3 * (2.0 * 3.0 + 1.0 * 9.0 / 2.0);
        assert!((sol.cost - expected).abs() < 1e-12);
    }

    #[test]
    fn control_grid_contains_distinguished_values() {
        let p = ModelParams::new(1.0, 1.0, 1, 2.0, 3.0).unwrap();
        let inst = ProblemInstance::new(p, 1.0, 1.0).unwrap();
        let g = control_grid(&inst, 21);
        let us = singular_data(&p).u_s;
        assert!(g.contains(&0.0) && g.contains(&3.0) && g.contains(&us));
        assert_eq!(g.len(), 22);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn undersized_state_bound_is_rejected() {
        let p = ModelParams::new(1.0, 1.0, 1, 1.0, 1.0).unwrap();
        let inst = ProblemInstance::new(p, 1.0, 1.0).unwrap();
        let mut cfg = DpConfig::with_resolution(&inst, 10, 11, 3);
        cfg.r_max = 1.5;
        assert!(dp_solve(&inst, &cfg).is_err());
    }

    #[test]
    fn zero_structure_has_no_parameters() {
        let p = ModelParams::new(1.0, 1.0, 1, 1.0, 2.0).unwrap();
        let inst = ProblemInstance::new(p, 0.5, 2.0).unwrap();
        let res = parametric_search(&inst, RegimeLabel::Z, 10).unwrap();
        assert!(res.switch_times.is_empty());
        let direct = dynamics::cost(&inst, &PiecewiseControl::constant(2.0, 0.0)).unwrap();
        assert_eq!(res.cost, direct);
    }

    #[test]
    fn singular_structure_rejected_when_inadmissible() {
        let p = ModelParams::new(4.0, 1.0, 1, 1.0, 1.0).unwrap();
        let inst = ProblemInstance::new(p, 0.5, 2.0).unwrap();
        assert!(parametric_search(&inst, RegimeLabel::S0, 10).is_err());
    }
}
