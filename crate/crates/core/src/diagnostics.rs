//! Trajectory post-processing: decay-rate fits and the exponential-decay
//! certificate.
//!
//! The certificate is the discrete form of `d/dt V <= -λ V`: over every pair
//! of consecutive logged samples inside the valid window, the slope of
//! `log V` must not exceed `-λ` by more than a tolerance that shrinks with
//! the step size. The valid window excludes samples where the rejection term
//! is inside its saturation ramp (`r < σ`, where the guarantee does not
//! apply) and samples whose `V` is too small for a meaningful logarithm.

use serde::Serialize;

use crate::controller::{ControllerParams, ModalState};
use crate::simulator::Trajectory;
use crate::{real, Error, Real, Result};

/// Guard against `log` of denormal or zero Lyapunov values.
const UNDERFLOW_GUARD: f64 = 1e-280;

/// Lyapunov value `V(y) = μ Σ_{i<=N} y_i² + Σ_{i>N} y_i²`.
pub fn lyapunov<T: Real>(y: &ModalState<T>, params: &ControllerParams<T>) -> T {
    let mut low = T::zero();
    let mut high = T::zero();
    for i in 0..y.len() {
        let sq = y[i] * y[i];
        if i < params.n {
            low += sq;
        } else {
            high += sq;
        }
    }
    params.mu * low + high
}

/// Decay-rate fit over the valid window of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport<T: Real> {
    /// Negated least-squares slope of `log V` over the window.
    pub fitted_rate: T,
    /// First and last sample time of the window.
    pub fit_window: (T, T),
    /// Number of samples in the window.
    pub window_len: usize,
    /// Smallest `r` over the window.
    pub r_floor: T,
    /// Max over window pairs of `Δ log V / Δt + λ`; nonpositive means the
    /// decay certificate holds exactly.
    pub certificate_margin: T,
    /// Max `||y||` from the first sample with `r < σ` onward, if any; the
    /// observed stagnation floor of the regularized controller.
    pub floor_norm: Option<T>,
}

/// Certificate verdict at a given tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate<T: Real> {
    pub pass: bool,
    pub margin: T,
    pub tol: T,
}

fn in_window<T: Real>(params: &ControllerParams<T>, v: T, r: T) -> bool {
    let guard = real::<T>(UNDERFLOW_GUARD);
    let saturated = params.d_bound == T::zero() || r >= params.sigma;
    saturated && v > guard
}

fn window_indices<T: Real>(traj: &Trajectory<T>, params: &ControllerParams<T>) -> Vec<usize> {
    traj.samples
        .iter()
        .enumerate()
        .filter(|(_, s)| in_window(params, s.v, s.r))
        .map(|(i, _)| i)
        .collect()
}

fn pair_margin<T: Real>(
    traj: &Trajectory<T>,
    params: &ControllerParams<T>,
    window: &[usize],
) -> Option<T> {
    let mut margin: Option<T> = None;
    for pair in window.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        if j != i + 1 {
            continue; // the window has a gap here; slopes across it are not covered
        }
        let a = &traj.samples[i];
        let b = &traj.samples[j];
        let slope = (b.v.ln() - a.v.ln()) / (b.t - a.t);
        let m = slope + params.lambda;
        margin = Some(match margin {
            None => m,
            Some(cur) => cur.max(m),
        });
    }
    margin
}

/// Least-squares fit of `log V` against `t` over the valid window.
///
/// Requires at least 10 window samples; errors otherwise with a diagnostic
/// (a run started inside the stagnation floor has an empty window).
pub fn fit_decay<T: Real>(
    traj: &Trajectory<T>,
    params: &ControllerParams<T>,
) -> Result<DecayReport<T>> {
    let window = window_indices(traj, params);
    if window.len() < 10 {
        return Err(Error::NoFit(format!(
            "only {} of {} samples are in the valid window (r >= sigma, V above underflow)",
            window.len(),
            traj.len()
        )));
    }
    let n = real::<T>(window.len() as f64);
    let mut t_mean = T::zero();
    let mut w_mean = T::zero();
    for &i in &window {
        t_mean += traj.samples[i].t;
        w_mean += traj.samples[i].v.ln();
    }
    t_mean /= n;
    w_mean /= n;
    let mut cov = T::zero();
    let mut var = T::zero();
    for &i in &window {
        let dt = traj.samples[i].t - t_mean;
        cov += dt * (traj.samples[i].v.ln() - w_mean);
        var += dt * dt;
    }
    if !(var > T::zero()) {
        return Err(Error::NoFit("window has no time spread".into()));
    }
    let slope = cov / var;

    let mut r_floor = traj.samples[window[0]].r;
    for &i in &window[1..] {
        r_floor = r_floor.min(traj.samples[i].r);
    }
    let margin = pair_margin(traj, params, &window)
        .ok_or_else(|| Error::NoFit("window has no consecutive sample pairs".into()))?;

    let floor_norm = if params.d_bound > T::zero() {
        traj.samples
            .iter()
            .position(|s| s.r < params.sigma)
            .map(|first| {
                traj.samples[first..]
                    .iter()
                    .map(|s| s.norm_y)
                    .fold(T::zero(), |acc, x| acc.max(x))
            })
    } else {
        None
    };

    Ok(DecayReport {
        fitted_rate: -slope,
        fit_window: (
            traj.samples[window[0]].t,
            traj.samples[*window.last().unwrap()].t,
        ),
        window_len: window.len(),
        r_floor,
        certificate_margin: margin,
        floor_norm,
    })
}

/// Checks `Δ log V / Δt <= -λ + tol` over all consecutive window pairs.
pub fn certificate_check<T: Real>(
    traj: &Trajectory<T>,
    params: &ControllerParams<T>,
    tol: T,
) -> Result<Certificate<T>> {
    let window = window_indices(traj, params);
    let margin = pair_margin(traj, params, &window)
        .ok_or_else(|| Error::NoFit("no consecutive samples in the valid window".into()))?;
    Ok(Certificate {
        pass: margin <= tol,
        margin,
        tol,
    })
}
