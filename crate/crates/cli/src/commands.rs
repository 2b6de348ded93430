use std::path::{Path, PathBuf};

use serde::Deserialize;
use syncopt::dynamics::{cost, sample_at};
use syncopt::netsim::{compare_to_ode, simulate, InitialOffsets, SimConfig};
use syncopt::oracle::{dp_solve, DpConfig};
use syncopt::synthesis::{regime_map, synthesize};
use syncopt::{PiecewiseControl, ProblemInstance, Segment};

use crate::args::{parse_checkpoints, parse_grid, RawParams, RegimeMapArgs, SimulateArgs, SynthesizeArgs, VerifyArgs};
use crate::document::ControlDocument;
use crate::output::{num, write_atomic, Table};
use crate::CliError;

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Success,
    /// The command produced its outputs but some check failed.
    Failed,
}

fn trajectory_path(args: &SynthesizeArgs) -> PathBuf {
    args.trajectory.clone().unwrap_or_else(|| args.out.with_extension("csv"))
}

pub fn synthesize_cmd(args: &SynthesizeArgs) -> Result<Outcome, CliError> {
    let instance = args.instance.resolve()?;
    if args.samples == 0 {
        return Err(CliError::Usage("samples must be positive".into()));
    }
    let result = synthesize(&instance)?;
    let doc = ControlDocument::from_result(&result);

    let t_end = instance.horizon;
    let mut times: Vec<f64> = (0..=args.samples)
        .map(|i| if i == args.samples { t_end } else { t_end * i as f64 / args.samples as f64 })
        .collect();
    times.extend(&result.switch_times);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut table = Table::new(&["t", "r", "psi", "u"])?;
    for &t in &times {
        let (r, psi, u) = result.extremal.state_at(t, &instance.params);
        table.row([num(t), num(r), num(psi), num(u)])?;
    }

    write_atomic(&args.out, doc.to_json()?.as_bytes())?;
    write_atomic(&trajectory_path(args), &table.into_bytes()?)?;
    println!(
        "regime={} switches={} cost={} terminal_r={}",
        result.regime,
        result.switch_times.len(),
        num(result.cost),
        num(result.terminal_r)
    );
    Ok(Outcome::Success)
}

pub fn regime_map_cmd(args: &RegimeMapArgs) -> Result<Outcome, CliError> {
    let params = args.params.resolve()?;
    let (nt, nr) = parse_grid(&args.grid)?;
    if !(args.t_min.is_finite() && args.t_min > 0.0 && args.t_min <= args.t_max && args.t_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "t-min and t-max must satisfy 0 < t-min <= t-max, got {} and {}",
            args.t_min, args.t_max
        )));
    }
    if !(args.r0_min.is_finite() && args.r0_min >= 0.0 && args.r0_min <= args.r0_max && args.r0_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "r0-min and r0-max must satisfy 0 <= r0-min <= r0-max, got {} and {}",
            args.r0_min, args.r0_max
        )));
    }
    let map = regime_map(&params, (args.t_min, args.t_max), (args.r0_min, args.r0_max), nt, nr)?;
    let mut table = Table::new(&["T", "r0", "label"])?;
    for (i, &t) in map.horizons.iter().enumerate() {
        for (j, &r0) in map.r0s.iter().enumerate() {
            table.row([num(t), num(r0), map.labels[i][j].to_string()])?;
        }
    }
    write_atomic(&args.out, &table.into_bytes()?)?;
    let labels: Vec<String> = map.distinct_labels().iter().map(|l| l.to_string()).collect();
    println!("cells={} labels={}", nt * nr, labels.join(","));
    Ok(Outcome::Success)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let (instance, control) = match (&args.control, args.constant_u) {
        (Some(path), None) => {
            if !args.instance.is_empty() {
                return Err(CliError::Usage(
                    "instance flags cannot be combined with --control; the control file carries the instance".into(),
                ));
            }
            ControlDocument::parse(&read_text(path)?)?
        }
        (None, Some(u)) => {
            let instance = args.instance.resolve()?;
            let control = PiecewiseControl::constant(instance.horizon, u);
            control.validate(&instance)?;
            (instance, control)
        }
        _ => return Err(CliError::Usage("exactly one of --control or --constant-u is required".into())),
    };
    let dt = args.dt.unwrap_or(instance.horizon / 1000.0);
    let mut config = SimConfig::new(dt, args.runs, args.seed, parse_checkpoints(&args.checkpoints, instance.horizon)?);
    if args.gaussian_init {
        config.initial = InitialOffsets::Gaussian;
    }
    let sim = simulate(&instance, &control, &config)?;
    let ode = sample_at(&instance, &control, &sim.checkpoints)?;
    let z = compare_to_ode(&sim, &ode)?;

    let mut table = Table::new(&["t", "empirical_r", "std_error", "ode_r", "z"])?;
    for i in 0..sim.checkpoints.len() {
        table.row([
            num(sim.checkpoints[i]),
            num(sim.empirical_r[i]),
            num(sim.std_error[i]),
            num(ode[i].r),
            num(z[i]),
        ])?;
    }
    write_atomic(&args.out, &table.into_bytes()?)?;
    let max_z = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("checkpoints={} runs={} max_abs_z={}", z.len(), args.runs, num(max_z));
    Ok(Outcome::Success)
}

#[derive(Debug, Deserialize)]
struct InstanceRow {
    alpha: f64,
    beta: f64,
    n: i64,
    sigma2: f64,
    umax: f64,
    r0: f64,
    horizon: f64,
    #[serde(default)]
    v: Option<f64>,
}

impl InstanceRow {
    fn to_instance(&self) -> Result<ProblemInstance, CliError> {
        let params = RawParams {
            alpha: self.alpha,
            beta: self.beta,
            n: self.n,
            sigma2: self.sigma2,
            umax: self.umax,
            v: self.v.unwrap_or(1.0),
        }
        .build()?;
        crate::args::build_instance(params, self.r0, self.horizon)
    }
}

/// Moves every interior switch of `control` by `shift`, clamped to `[0, T]`.
fn shift_switches(control: &PiecewiseControl, shift: f64) -> PiecewiseControl {
    let horizon = control.horizon();
    let n = control.segments.len();
    let boundary = |i: usize| -> f64 {
        if i == 0 {
            0.0
        } else if i == n {
            horizon
        } else {
            (control.segments[i].t_start + shift).clamp(0.0, horizon)
        }
    };
    let segments = (0..n)
        .map(|i| Segment {
            t_start: boundary(i),
            t_end: boundary(i + 1),
            u: control.segments[i].u,
        })
        .filter(|s| s.t_end > s.t_start)
        .collect();
    PiecewiseControl::new(segments)
}

struct Checked {
    regime: String,
    synth_cost: f64,
    dp_cost: f64,
    gap: f64,
}

fn check_instance(row: &InstanceRow, args: &VerifyArgs) -> Result<Checked, CliError> {
    let instance = row.to_instance()?;
    let result = synthesize(&instance)?;
    let synth_cost = if args.perturb_switch == 0.0 {
        result.cost
    } else {
        cost(&instance, &shift_switches(&result.control, args.perturb_switch * instance.horizon))?
    };
    let config = DpConfig::with_resolution(&instance, args.dp_time, args.dp_state, args.dp_control);
    let dp = dp_solve(&instance, &config)?;
    Ok(Checked {
        regime: result.regime.to_string(),
        synth_cost,
        dp_cost: dp.cost,
        gap: (synth_cost - dp.cost) / dp.cost,
    })
}

pub fn verify_cmd(args: &VerifyArgs) -> Result<Outcome, CliError> {
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return Err(CliError::Usage(format!("tolerance must be nonnegative, got {}", args.tolerance)));
    }
    if !args.perturb_switch.is_finite() {
        return Err(CliError::Usage("perturb-switch must be finite".into()));
    }
    let text = read_text(&args.instances)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let rows: Vec<InstanceRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.instances.display())))?;

    let mut table = Table::new(&["index", "regime", "synth_cost", "dp_cost", "rel_gap", "pass", "note"])?;
    let mut passed = 0usize;
    for (index, row) in rows.iter().enumerate() {
        match check_instance(row, args) {
            Ok(c) => {
                let pass = c.gap.abs() <= args.tolerance;
                passed += usize::from(pass);
                table.row([
                    index.to_string(),
                    c.regime,
                    num(c.synth_cost),
                    num(c.dp_cost),
                    num(c.gap),
                    pass.to_string(),
                    String::new(),
                ])?;
            }
            Err(e) => {
                table.row([
                    index.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "false".to_string(),
                    e.to_string(),
                ])?;
            }
        }
    }
    let failed = rows.len() - passed;
    let summary = format!("# summary: passed={passed} failed={failed} total={}", rows.len());
    let mut bytes = table.into_bytes()?;
    bytes.extend_from_slice(summary.as_bytes());
    bytes.push(b'\n');
    write_atomic(&args.out, &bytes)?;
    println!("{}", summary.trim_start_matches("# "));
    Ok(if failed == 0 { Outcome::Success } else { Outcome::Failed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifting_switches_keeps_coverage() {
        let c = PiecewiseControl::from_durations(&[(1.0, 2.0), (1.0, 1.0), (2.0, 0.0)]);
        let s = shift_switches(&c, 0.5);
        let bounds: Vec<(f64, f64)> = s.segments.iter().map(|s| (s.t_start, s.t_end)).collect();
        assert_eq!(bounds, vec![(0.0, 1.5), (1.5, 2.5), (2.5, 4.0)]);
        let s = shift_switches(&c, -1.5);
        assert_eq!(s.segments.len(), 2);
        assert_eq!(s.segments[0].t_start, 0.0);
        assert_eq!(s.segments[0].u, 1.0);
        assert_eq!(s.horizon(), 4.0);
    }
}
