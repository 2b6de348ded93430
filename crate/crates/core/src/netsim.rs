//! Monte Carlo simulation of the clock network.
//!
//! The server clock runs at the exact rate `v`. Every client clock runs at
//! `v` plus Brownian noise of variance rate `sigma^2` and is reset to the
//! server clock whenever it receives a synchronization message. Each client
//! receives messages as an independent Poisson stream of intensity `u(t)`,
//! generated by thinning a rate-`u_max` stream. The across-run mean of
//! `sum_j (x_j - x_1)^2` then follows `dR/dt = -u R + N sigma^2`.
//!
//! Offsets are advanced with Euler-Maruyama steps of size `dt`. The Brownian
//! path of each client is built from dt-independent random streams: its
//! values at checkpoints and sync instants are drawn first, and the step
//! increments in between are filled in by Brownian bridges. Changing `dt`
//! therefore only refines the path and leaves checkpoint statistics fixed up
//! to summation round-off.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;

use crate::dynamics::{PiecewiseControl, ProblemInstance, TrajectorySample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialOffsets {
    /// Every client starts at offset `sqrt(r0 / N)`.
    #[default]
    Equal,
    /// Independent `N(0, r0 / N)` offsets; same second moment.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub runs: usize,
    pub seed: u64,
    pub checkpoints: Vec<f64>,
    pub initial: InitialOffsets,
}

impl SimConfig {
    pub fn new(dt: f64, runs: usize, seed: u64, checkpoints: Vec<f64>) -> Self {
        Self {
            dt,
            runs,
            seed,
            checkpoints,
            initial: InitialOffsets::Equal,
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= horizon / 100.0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "dt = {} must lie in (0, T/100] with T = {horizon}",
                self.dt
            )));
        }
        if self.runs == 0 {
            return Err(Error::InvalidArgument("runs must be positive".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::InvalidArgument("at least one checkpoint is required".into()));
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
        }
        if self.checkpoints.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
            return Err(Error::InvalidArgument(format!("checkpoints must lie in [0, {horizon}]")));
        }
        Ok(())
    }
}

/// `n + 1` evenly spaced checkpoints over `[0, horizon]`.
pub fn even_checkpoints(horizon: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|i| if i == n { horizon } else { horizon * i as f64 / n as f64 })
        .collect()
}

/// Absolute clocks and event counts at the end of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub server_clock: f64,
    pub client_clocks: Vec<f64>,
    pub sync_events: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub checkpoints: Vec<f64>,
    /// Across-run mean of `sum_j (x_j - x_1)^2` per checkpoint.
    pub empirical_r: Vec<f64>,
    pub std_error: Vec<f64>,
    pub runs: Vec<RunSummary>,
}

struct RunOutput {
    sum_sq: Vec<f64>,
    summary: RunSummary,
}

/// Independent substreams of one run. Only the bridge stream is consumed in
/// a dt-dependent amount.
struct RunStreams {
    init: ChaCha8Rng,
    events: ChaCha8Rng,
    skeleton: ChaCha8Rng,
    bridge: ChaCha8Rng,
}

impl RunStreams {
    fn new(seed: u64, run: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(4 * run + k);
            rng
        };
        Self {
            init: stream(0),
            events: stream(1),
            skeleton: stream(2),
            bridge: stream(3),
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Accepted sync instants in `(0, horizon]`, by thinning against `u_max`.
fn sync_times(control: &PiecewiseControl, u_max: f64, horizon: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut times = Vec::new();
    if !(u_max > 0.0) {
        return times;
    }
    let Ok(gap) = Exp::new(u_max) else {
        return times;
    };
    let mut t = 0.0;
    loop {
        t += rng.sample(gap);
        if t > horizon {
            break;
        }
        // Always draw the acceptance uniform so stream use is control-independent.
        let accept: f64 = rng.random();
        if accept * u_max < control.value_at(t) {
            times.push(t);
        }
    }
    times
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    Checkpoint(usize),
    Sync,
}

fn simulate_run(
    instance: &ProblemInstance,
    control: &PiecewiseControl,
    config: &SimConfig,
    grid: &[f64],
    run: usize,
) -> RunOutput {
    let params = &instance.params;
    let n = params.n_clients as usize;
    let sigma = params.sigma_sq.sqrt();
    let horizon = instance.horizon;
    let mut streams = RunStreams::new(config.seed, run as u64);

    let mut sum_sq = vec![0.0; config.checkpoints.len()];
    let mut offsets_end = Vec::with_capacity(n);
    let mut sync_events = 0;
    let spread = (instance.r0 / n as f64).sqrt();

    for _client in 0..n {
        let mut y = match config.initial {
            InitialOffsets::Equal => spread,
            InitialOffsets::Gaussian => spread * normal(&mut streams.init),
        };
        let syncs = sync_times(control, params.u_max, horizon, &mut streams.events);
        sync_events += syncs.len();

        // Skeleton: Brownian values at checkpoints and sync instants.
        let mut skeleton: Vec<(f64, Mark)> = config
            .checkpoints
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, Mark::Checkpoint(i)))
            .chain(syncs.iter().map(|&t| (t, Mark::Sync)))
            .collect();
        skeleton.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut anchors = Vec::with_capacity(skeleton.len());
        let (mut t_prev, mut w_prev) = (0.0, 0.0);
        for &(t, _) in &skeleton {
            let w = w_prev + (t - t_prev).sqrt() * normal(&mut streams.skeleton);
            anchors.push(w);
            t_prev = t;
            w_prev = w;
        }

        // Walk the step grid, bridging between skeleton anchors.
        let (mut t, mut w) = (0.0, 0.0);
        let mut grid_iter = grid.iter().copied().peekable();
        for (k, &(t_anchor, mark)) in skeleton.iter().enumerate() {
            let w_anchor = anchors[k];
            while let Some(&g) = grid_iter.peek() {
                if g >= t_anchor {
                    break;
                }
                grid_iter.next();
                if g <= t {
                    continue;
                }
                let frac = (g - t) / (t_anchor - t);
                let mean = w + frac * (w_anchor - w);
                let sd = ((g - t) * (t_anchor - g) / (t_anchor - t)).sqrt();
                let w_next = mean + sd * normal(&mut streams.bridge);
                y += sigma * (w_next - w);
                t = g;
                w = w_next;
            }
            y += sigma * (w_anchor - w);
            t = t_anchor;
            w = w_anchor;
            match mark {
                Mark::Sync => y = 0.0,
                Mark::Checkpoint(i) => sum_sq[i] += y * y,
            }
        }
        // Free Brownian continuation past the last anchor.
        for g in grid_iter.chain(std::iter::once(horizon)) {
            if g > t {
                let w_next = w + (g - t).sqrt() * normal(&mut streams.bridge);
                y += sigma * (w_next - w);
                t = g;
                w = w_next;
            }
        }
        offsets_end.push(y);
    }

    let server_clock = params.drift * horizon;
    RunOutput {
        sum_sq,
        summary: RunSummary {
            server_clock,
            client_clocks: offsets_end.iter().map(|y| server_clock + y).collect(),
            sync_events,
        },
    }
}

/// Pairwise sum; the result does not depend on thread scheduling.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Simulates `config.runs` independent replications of the network driven
/// by `control` from initial desynchronization `instance.r0`.
pub fn simulate(instance: &ProblemInstance, control: &PiecewiseControl, config: &SimConfig) -> Result<SimResult> {
    instance.validate()?;
    control.validate(instance)?;
    config.validate(instance.horizon)?;
    let horizon = instance.horizon;
    let steps = (horizon / config.dt).ceil() as usize;
    let grid: Vec<f64> = (1..steps).map(|i| i as f64 * config.dt).filter(|&t| t < horizon).collect();

    let outputs: Vec<RunOutput> = (0..config.runs)
        .into_par_iter()
        .map(|run| simulate_run(instance, control, config, &grid, run))
        .collect();

    let m = outputs.len() as f64;
    let mut empirical_r = Vec::with_capacity(config.checkpoints.len());
    let mut std_error = Vec::with_capacity(config.checkpoints.len());
    let mut column = vec![0.0; outputs.len()];
    for i in 0..config.checkpoints.len() {
        for (slot, out) in column.iter_mut().zip(&outputs) {
            *slot = out.sum_sq[i];
        }
        let mean = pairwise_sum(&column) / m;
        let se = if outputs.len() > 1 {
            let dev: Vec<f64> = column.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (m - 1.0) / m).sqrt()
        } else {
            0.0
        };
        empirical_r.push(mean);
        std_error.push(se);
    }
    Ok(SimResult {
        checkpoints: config.checkpoints.clone(),
        empirical_r,
        std_error,
        runs: outputs.into_iter().map(|o| o.summary).collect(),
    })
}

/// z-score of the simulated mean against the ODE value at every checkpoint.
/// `trajectory` must contain a sample at each checkpoint time.
pub fn compare_to_ode(sim: &SimResult, trajectory: &[TrajectorySample]) -> Result<Vec<f64>> {
    sim.checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let sample = trajectory
                .iter()
                .find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
                .ok_or_else(|| Error::InvalidArgument(format!("trajectory has no sample at checkpoint t = {t}")))?;
            let diff = sim.empirical_r[i] - sample.r;
            let se = sim.std_error[i];
            Ok(if se > 0.0 {
                diff / se
            } else if diff.abs() <= 1e-12 * sample.r.abs().max(1.0) {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{sample_at, ModelParams, Segment};

    fn instance(n: u32, u_max: f64, r0: f64, horizon: f64) -> ProblemInstance {
        let p = ModelParams::new(1.0, 1.0, n, 1.0, u_max).unwrap();
        ProblemInstance::new(p, r0, horizon).unwrap()
    }

    #[test]
    fn uncontrolled_growth_matches_ode() {
        let inst = instance(8, 1.0, 0.0, 1.0);
        let control = PiecewiseControl::constant(1.0, 0.0);
        let cfg = SimConfig::new(1e-2, 4000, 11, vec![0.0, 0.5, 1.0]);
        let sim = simulate(&inst, &control, &cfg).unwrap();
        let traj = sample_at(&inst, &control, &cfg.checkpoints).unwrap();
        let z = compare_to_ode(&sim, &traj).unwrap();
        assert_eq!(z[0], 0.0);
        assert!(z.iter().all(|z| z.abs() <= 4.0), "{z:?}");
        assert!((sim.empirical_r[2] - 8.0).abs() <= 4.0 * sim.std_error[2]);
    }

    #[test]
    fn strong_control_settles_at_equilibrium() {
        let inst = instance(8, 20.0, 8.0, 2.0);
        let control = PiecewiseControl::constant(2.0, 20.0);
        let cfg = SimConfig::new(1e-2, 4000, 5, vec![1.5, 2.0]);
        let sim = simulate(&inst, &control, &cfg).unwrap();
        for (r, se) in sim.empirical_r.iter().zip(&sim.std_error) {
            assert!((r - 0.4).abs() <= 4.0 * se, "r = {r}, se = {se}");
        }
    }

    #[test]
    fn sync_resets_offset_exactly() {
        // With negligible noise a client offset is 4 until its first sync and
        // zero afterwards.
        let p = ModelParams::new(1.0, 1.0, 1, 1e-300, 50.0).unwrap();
        let inst = ProblemInstance::new(p, 4.0, 1.0).unwrap();
        let cfg = SimConfig::new(1e-2, 50, 1, vec![0.0, 1.0]);
        let synced = simulate(&inst, &PiecewiseControl::constant(1.0, 50.0), &cfg).unwrap();
        assert_eq!(synced.empirical_r[0], 4.0);
        assert!(synced.empirical_r[1] < 1e-290);
        assert!(synced.runs.iter().all(|r| r.sync_events > 0));
        let idle = simulate(&inst, &PiecewiseControl::constant(1.0, 0.0), &cfg).unwrap();
        assert!((idle.empirical_r[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn thinning_follows_piecewise_intensity() {
        let control = PiecewiseControl::new(vec![
            Segment { t_start: 0.0, t_end: 5.0, u: 0.0 },
            Segment { t_start: 5.0, t_end: 10.0, u: 3.0 },
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut count = 0;
        for _ in 0..200 {
            let times = sync_times(&control, 4.0, 10.0, &mut rng);
            assert!(times.iter().all(|&t| t >= 5.0));
            count += times.len();
        }
        // Expected 200 * 15 = 3000 events, sd about 55.
        assert!((count as f64 - 3000.0).abs() < 250.0, "{count}");
    }

    #[test]
    fn config_validation() {
        let inst = instance(2, 1.0, 0.0, 1.0);
        let control = PiecewiseControl::constant(1.0, 0.0);
        for cfg in [
            SimConfig::new(0.1, 10, 0, vec![0.5]),
            SimConfig::new(1e-3, 0, 0, vec![0.5]),
            SimConfig::new(1e-3, 10, 0, vec![0.5, 0.2]),
            SimConfig::new(1e-3, 10, 0, vec![1.5]),
        ] {
            assert!(matches!(simulate(&inst, &control, &cfg), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn checkpoint_mismatch_is_rejected() {
        let inst = instance(2, 1.0, 0.0, 1.0);
        let control = PiecewiseControl::constant(1.0, 0.0);
        let sim = simulate(&inst, &control, &SimConfig::new(1e-2, 10, 0, vec![0.5])).unwrap();
        let traj = sample_at(&inst, &control, &[0.25]).unwrap();
        assert!(compare_to_ode(&sim, &traj).is_err());
    }
}
