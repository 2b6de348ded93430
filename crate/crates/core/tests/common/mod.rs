#![allow(dead_code)]

use proptest::prelude::*;
use syncopt::pmp::singular_data;
use syncopt::{ModelParams, ProblemInstance};

/// Log-uniform positive value.
pub fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

pub fn params() -> impl Strategy<Value = ModelParams> {
    (log_uniform(0.1, 10.0), log_uniform(0.1, 10.0), 1u32..10, log_uniform(0.1, 3.0), log_uniform(0.05, 20.0))
        .prop_map(|(a, b, n, s, u)| ModelParams::new(a, b, n, s, u).unwrap())
}

/// Parameters with `u_s <= u_max`, scaled so that `u_max / u_s` lies in
/// `[1, 8]`.
pub fn singular_params() -> impl Strategy<Value = ModelParams> {
    (log_uniform(0.1, 10.0), log_uniform(0.1, 10.0), 1u32..10, log_uniform(0.1, 3.0), 1.0f64..8.0).prop_map(
        |(a, b, n, s, ratio)| {
            let u_s = (a * f64::from(n) * s / b).sqrt();
            ModelParams::new(a, b, n, s, u_s * ratio).unwrap()
        },
    )
}

/// Parameters with `u_s > u_max`.
pub fn nonsingular_params() -> impl Strategy<Value = ModelParams> {
    (log_uniform(0.1, 10.0), log_uniform(0.1, 10.0), 1u32..10, log_uniform(0.1, 3.0), 0.05f64..0.95).prop_map(
        |(a, b, n, s, ratio)| {
            let u_s = (a * f64::from(n) * s / b).sqrt();
            ModelParams::new(a, b, n, s, u_s * ratio).unwrap()
        },
    )
}

/// Instance with horizon and initial state on the natural scales of the
/// parameters: `T` in units of `1/u_s`, `r0` in units of `r_s`.
pub fn scaled_instance(params: ModelParams, t_scale: f64, r_scale: f64) -> ProblemInstance {
    let s = singular_data(&params);
    ProblemInstance::new(params, r_scale * s.r_s, t_scale / s.u_s).unwrap()
}

pub fn instance_in(p: impl Strategy<Value = ModelParams>) -> impl Strategy<Value = ProblemInstance> {
    (p, log_uniform(0.05, 20.0), 0.0f64..6.0).prop_map(|(p, t, r)| scaled_instance(p, t, r))
}

/// One RK4 step of the state-adjoint system under constant `u`.
/// A negative `h` integrates backward.
pub fn rk4_state_adjoint(r: f64, psi: f64, u: f64, h: f64, params: &ModelParams) -> (f64, f64) {
    let k = params.noise_rate();
    let f = |r: f64, psi: f64| (-u * r + k, params.alpha + u * psi);
    let (a1, b1) = f(r, psi);
    let (a2, b2) = f(r + 0.5 * h * a1, psi + 0.5 * h * b1);
    let (a3, b3) = f(r + 0.5 * h * a2, psi + 0.5 * h * b2);
    let (a4, b4) = f(r + h * a3, psi + h * b3);
    (
        r + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        psi + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
    )
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
