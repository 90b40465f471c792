//! Closed-loop time integration in modal coordinates.
//!
//! The truncated dynamics are `y' = Λᵉ y + G (ũ + û + d)` with
//! `Λᵉ = diag(-τᵢᵉ)`. The stiff diagonal part is handled exactly
//! (exponential Euler) or implicitly (IMEX Euler); the forcing is evaluated
//! at the beginning of each step, so every step is a pure function of
//! `(yⁿ, tⁿ)`:
//!
//! ```text
//! exponential: yᵢⁿ⁺¹ = e^{-τᵢᵉ dt} yᵢⁿ + dt φ₁(-τᵢᵉ dt) Fᵢⁿ,  φ₁(z) = (eᶻ-1)/z
//! imex:        (1 + τᵢᵉ dt) yᵢⁿ⁺¹ = yᵢⁿ + dt Fᵢⁿ
//! ```
//!
//! `φ₁(0) = 1` handles the removable singularity of a zero effective
//! eigenvalue. Each logged step records the Lyapunov value, the mode-split
//! norms, the control and disturbance magnitudes, and `r = ||χ_ω 𝒞y||`, the
//! quantity whose crossing of `σ` marks the edge of the rejection guarantee.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::{ControllerParams, ModalState};
use crate::diagnostics::lyapunov;
use crate::disturbance::DisturbanceSpec;
use crate::gram::GramMatrix;
use crate::spectral::{enumerate_modes, eval_eigenfunction, DomainSpec, Mode, ModeSet};
use crate::{real, Error, Real, Result};

/// Time-stepping scheme for the stiff diagonal part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExponentialEuler,
    ImexEuler,
}

/// Initial condition: a named profile or explicit modal coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile<T: Real> {
    /// Unit coefficient on the first mode.
    FirstMode,
    /// Seeded uniform coefficients normalized to unit norm.
    RandomUnit { seed: u64 },
    /// Smooth bump centered in the domain, projected onto the modes by
    /// quadrature and normalized to unit norm.
    Bump,
    /// Explicit coefficients, zero-padded to the truncation.
    Coeffs(Vec<T>),
}

/// Full description of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T: Real> {
    pub domain: DomainSpec<T>,
    /// Truncation size `M`.
    pub m: usize,
    /// Target decay rate `λ`.
    pub lambda: T,
    /// Disturbance bound `D`.
    pub d_bound: T,
    /// Saturation scale `σ` of the rejection term.
    pub sigma: T,
    /// Constant potential shift `c`.
    pub shift: T,
    pub dt: T,
    pub t_end: T,
    pub scheme: Scheme,
    pub y0: InitialProfile<T>,
    pub disturbance: DisturbanceSpec<T>,
    /// Log every k-th step (the initial and final states are always logged).
    pub log_every: usize,
    /// Disable both feedback terms (keeps the disturbance active).
    pub open_loop: bool,
}

impl<T: Real> SimConfig<T> {
    fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.t_end < self.dt {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} is shorter than one step dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidConfig("log_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// One logged sample of the closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T: Real> {
    pub t: T,
    pub state: ModalState<T>,
    /// Lyapunov value `V(y) = μ Σ_{i<=N} y_i² + Σ_{i>N} y_i²`.
    pub v: T,
    pub norm_y: T,
    pub norm_pn: T,
    pub norm_pperp: T,
    /// `||ũ||_{L²(Ω)}` (Euclidean norm of the linear-feedback coefficients).
    pub norm_u_lin: T,
    /// `||û||_{L²(Ω)}` (Euclidean norm of the rejection-term coefficients).
    pub norm_u_sign: T,
    /// `||d||_{L²(Ω)}` (Euclidean norm of the disturbance coefficients).
    pub norm_d: T,
    /// `r = ||χ_ω 𝒞y||_{L²(Ω)}`, the saturation variable of the rejection.
    pub r: T,
}

/// Logged closed-loop trajectory with per-sample diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub samples: Vec<Sample<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory is never empty")
    }
}

/// Everything `run` synthesizes before stepping: modes, Gram matrix, gains.
#[derive(Debug, Clone)]
pub struct ClosedLoop<T: Real> {
    pub modes: ModeSet<T>,
    pub gram: GramMatrix<T>,
    pub params: ControllerParams<T>,
}

/// Output of a full run.
#[derive(Debug, Clone)]
pub struct SimOutput<T: Real> {
    pub closed_loop: ClosedLoop<T>,
    pub trajectory: Trajectory<T>,
}

/// `φ₁(z) = (eᶻ - 1)/z` with the removable singularity at zero handled by a
/// short Taylor series; the cutoff keeps the cancellation error of the
/// direct formula below ~1e-12 relative.
fn phi1<T: Real>(z: T) -> T {
    if z.abs() < real::<T>(1e-4) {
        let half = real::<T>(0.5);
        let sixth = real::<T>(1.0 / 6.0);
        let twenty_fourth = real::<T>(1.0 / 24.0);
        T::one() + z * (half + z * (sixth + z * twenty_fourth))
    } else {
        (z.exp() - T::one()) / z
    }
}

/// One exponential-Euler update of a single mode.
#[inline]
pub fn exponential_euler_update<T: Real>(tau_eff: T, y: T, forcing: T, dt: T) -> T {
    let z = -tau_eff * dt;
    z.exp() * y + dt * phi1(z) * forcing
}

/// One IMEX-Euler update of a single mode. Errors when the implicit factor
/// `1 + τᵉ dt` is nonpositive (unstable mode with too large a step).
#[inline]
pub fn imex_euler_update<T: Real>(tau_eff: T, y: T, forcing: T, dt: T) -> Result<T> {
    let denom = T::one() + tau_eff * dt;
    if !(denom > T::zero()) {
        return Err(Error::NumericFault(format!(
            "IMEX factor 1 + tau*dt = {denom} is nonpositive; reduce dt below 1/|tau|"
        )));
    }
    Ok((y + dt * forcing) / denom)
}

/// Projected total forcing plus the three raw control/disturbance terms.
type ForcingParts<T> = (ModalState<T>, ModalState<T>, ModalState<T>, ModalState<T>);

fn forcing<T: Real>(
    cfg: &SimConfig<T>,
    loop_: &ClosedLoop<T>,
    t: T,
    y: &ModalState<T>,
) -> Result<ForcingParts<T>> {
    let m = y.len();
    let (u_lin, u_sign) = if cfg.open_loop {
        (ModalState::zeros(m), ModalState::zeros(m))
    } else {
        (
            loop_.params.linear_feedback(y),
            loop_.params.sign_feedback(y, &loop_.gram)?,
        )
    };
    let d = cfg.disturbance.eval(t, y, &loop_.params, &loop_.gram)?;
    let total = loop_.gram.entries() * (&u_lin + &u_sign + &d);
    Ok((total, u_lin, u_sign, d))
}

/// Advances the state by one step of the configured scheme, with the forcing
/// frozen at `(t, y)`.
pub fn step<T: Real>(
    y: &ModalState<T>,
    t: T,
    cfg: &SimConfig<T>,
    loop_: &ClosedLoop<T>,
) -> Result<ModalState<T>> {
    let (f, _, _, _) = forcing(cfg, loop_, t, y)?;
    advance(y, &f, cfg, loop_)
}

fn advance<T: Real>(
    y: &ModalState<T>,
    f: &ModalState<T>,
    cfg: &SimConfig<T>,
    loop_: &ClosedLoop<T>,
) -> Result<ModalState<T>> {
    let mut next = ModalState::zeros(y.len());
    for i in 0..y.len() {
        let tau = loop_.modes.effective_eigenvalue(i);
        next[i] = match cfg.scheme {
            Scheme::ExponentialEuler => exponential_euler_update(tau, y[i], f[i], cfg.dt),
            Scheme::ImexEuler => imex_euler_update(tau, y[i], f[i], cfg.dt)?,
        };
    }
    Ok(next)
}

/// Builds the modes, Gram matrix and controller gains for a configuration.
pub fn prepare<T: Real>(cfg: &SimConfig<T>) -> Result<ClosedLoop<T>> {
    cfg.validate()?;
    let modes = enumerate_modes(&cfg.domain, cfg.m, cfg.shift)?;
    let gram = GramMatrix::assemble(&modes, &cfg.domain)?;
    let n = crate::spectral::controlled_mode_count(&modes, cfg.lambda)?;
    let constant = gram.spectral_constant(n)?;
    let params =
        ControllerParams::design(cfg.lambda, &constant, cfg.d_bound, cfg.sigma, &modes)?;
    Ok(ClosedLoop {
        modes,
        gram,
        params,
    })
}

fn initial_state<T: Real>(cfg: &SimConfig<T>, modes: &ModeSet<T>) -> Result<ModalState<T>> {
    let m = cfg.m;
    let y0 = match &cfg.y0 {
        InitialProfile::FirstMode => {
            let mut y = ModalState::zeros(m);
            y[0] = T::one();
            y
        }
        InitialProfile::RandomUnit { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut y = ModalState::zeros(m);
            loop {
                for i in 0..m {
                    y[i] = real::<T>(rng.gen_range(-1.0..1.0));
                }
                let norm = y.norm();
                if norm > real::<T>(1e-6) {
                    y /= norm;
                    break y;
                }
            }
        }
        InitialProfile::Bump => bump_profile(&cfg.domain, modes)?,
        InitialProfile::Coeffs(values) => {
            if values.len() > m {
                return Err(Error::InvalidConfig(format!(
                    "initial state has {} coefficients but the truncation is M = {m}",
                    values.len()
                )));
            }
            let mut y = ModalState::zeros(m);
            for (i, &v) in values.iter().enumerate() {
                y[i] = v;
            }
            y
        }
    };
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFault(
            "initial state contains non-finite coefficients".into(),
        ));
    }
    Ok(y0)
}

/// Projects a smooth product bump centered in `Ω` onto the modes. The 1-d
/// factor integrals are computed with a fixed composite Simpson rule, so the
/// profile is deterministic.
fn bump_profile<T: Real>(domain: &DomainSpec<T>, modes: &ModeSet<T>) -> Result<ModalState<T>> {
    let dim = domain.dim();
    // per-axis: b(x) = exp(-1/(1-s²)), s = (x - L/2)/(L/4)
    let max_index = modes
        .modes()
        .iter()
        .flat_map(|mode| mode.index.iter().copied())
        .max()
        .unwrap_or(1) as usize;
    let mut axis_coeffs: Vec<Vec<T>> = Vec::with_capacity(dim);
    for axis in 0..dim {
        let length = domain.lengths()[axis];
        let center = length / real::<T>(2.0);
        let radius = length / real::<T>(4.0);
        let bump = |x: T| {
            let s = (x - center) / radius;
            let s2 = s * s;
            if s2 >= T::one() {
                T::zero()
            } else {
                (-T::one() / (T::one() - s2)).exp()
            }
        };
        let mut per_k = Vec::with_capacity(max_index);
        for k in 1..=max_index {
            let freq = real::<T>(k as f64) * T::pi() / length;
            let scale = (real::<T>(2.0) / length).sqrt();
            let f = |x: T| bump(x) * scale * (freq * x).sin();
            per_k.push(composite_simpson(&f, T::zero(), length, 2048));
        }
        axis_coeffs.push(per_k);
    }
    let mut y = ModalState::zeros(modes.len());
    for (i, mode) in modes.modes().iter().enumerate() {
        let mut c = T::one();
        for axis in 0..dim {
            c *= axis_coeffs[axis][mode.index[axis] as usize - 1];
        }
        y[i] = c;
    }
    let norm = y.norm();
    if !(norm > T::zero()) {
        return Err(Error::NumericFault("bump projection collapsed to zero".into()));
    }
    Ok(y / norm)
}

fn composite_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, intervals: usize) -> T {
    let n = intervals.max(2) & !1; // even
    let h = (b - a) / real::<T>(n as f64);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * real::<T>(i as f64);
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += real::<T>(w) * f(x);
    }
    acc * h / real::<T>(3.0)
}

fn sample<T: Real>(
    cfg: &SimConfig<T>,
    loop_: &ClosedLoop<T>,
    t: T,
    y: &ModalState<T>,
) -> Result<Sample<T>> {
    let params = &loop_.params;
    let n = params.n.min(y.len());
    let mut pn2 = T::zero();
    let mut pperp2 = T::zero();
    for i in 0..y.len() {
        let sq = y[i] * y[i];
        if i < n {
            pn2 += sq;
        } else {
            pperp2 += sq;
        }
    }
    let (_, u_lin, u_sign, d) = forcing(cfg, loop_, t, y)?;
    let w = params.weighted_state(y);
    let out = Sample {
        t,
        state: y.clone(),
        v: lyapunov(y, params),
        norm_y: (pn2 + pperp2).sqrt(),
        norm_pn: pn2.sqrt(),
        norm_pperp: pperp2.sqrt(),
        norm_u_lin: u_lin.norm(),
        norm_u_sign: u_sign.norm(),
        norm_d: d.norm(),
        r: loop_.gram.localized_norm(&w),
    };
    for value in [
        out.v,
        out.norm_y,
        out.norm_u_lin,
        out.norm_u_sign,
        out.norm_d,
        out.r,
    ] {
        if !value.is_finite() {
            return Err(Error::NumericFault(format!(
                "non-finite diagnostic at t = {t}"
            )));
        }
    }
    Ok(out)
}

/// Runs the closed loop from `t = 0` to `t_end` and logs diagnostics.
///
/// Deterministic given the configuration, including all seeds. The number of
/// steps is `round(t_end/dt)`, so `t_end` is honored up to one step.
pub fn run<T: Real>(cfg: &SimConfig<T>) -> Result<SimOutput<T>> {
    let closed_loop = prepare(cfg)?;
    let mut y = initial_state(cfg, &closed_loop.modes)?;
    let n_steps: usize = {
        let steps = (cfg.t_end / cfg.dt).round();
        nalgebra::try_convert::<T, f64>(steps)
            .map(|x| x as usize)
            .unwrap_or(0)
            .max(1)
    };
    let mut samples = Vec::with_capacity(n_steps / cfg.log_every + 2);
    samples.push(sample(cfg, &closed_loop, T::zero(), &y)?);
    for k in 0..n_steps {
        let t = cfg.dt * real::<T>(k as f64);
        let (f, _, _, _) = forcing(cfg, &closed_loop, t, &y)?;
        y = advance(&y, &f, cfg, &closed_loop)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFault(format!(
                "state became non-finite at step {} (t = {})",
                k + 1,
                cfg.dt * real::<T>((k + 1) as f64)
            )));
        }
        let step_index = k + 1;
        if step_index % cfg.log_every == 0 || step_index == n_steps {
            let t_next = cfg.dt * real::<T>(step_index as f64);
            samples.push(sample(cfg, &closed_loop, t_next, &y)?);
        }
    }
    Ok(SimOutput {
        closed_loop,
        trajectory: Trajectory { samples },
    })
}

/// Uniform evaluation grid of the reconstructed field `Σ y_i e_i(x)`,
/// boundary points included (where the field is exactly zero).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid<T: Real> {
    /// Grid coordinates per axis, including both endpoints.
    pub axes: Vec<Vec<T>>,
    /// Field values in row-major order (last axis fastest).
    pub values: Vec<T>,
}

/// Samples the modal state on a uniform grid with `grid[k] >= 2` points per
/// axis.
pub fn reconstruct_field<T: Real>(
    y: &ModalState<T>,
    modes: &ModeSet<T>,
    domain: &DomainSpec<T>,
    grid: &[usize],
) -> Result<FieldGrid<T>> {
    if grid.len() != domain.dim() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} axes for a {}-d domain",
            grid.len(),
            domain.dim()
        )));
    }
    if grid.iter().any(|&g| g < 2) {
        return Err(Error::InvalidConfig(
            "need at least 2 grid points per axis".into(),
        ));
    }
    if y.len() != modes.len() {
        return Err(Error::DimensionMismatch(
            "state length does not match the mode set".into(),
        ));
    }
    let axes: Vec<Vec<T>> = grid
        .iter()
        .zip(domain.lengths())
        .map(|(&g, &l)| {
            (0..g)
                .map(|i| l * real::<T>(i as f64) / real::<T>((g - 1) as f64))
                .collect()
        })
        .collect();
    let total: usize = grid.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut point = vec![T::zero(); domain.dim()];
    let mut index = vec![0usize; domain.dim()];
    for _ in 0..total {
        for (axis, &i) in index.iter().enumerate() {
            point[axis] = axes[axis][i];
        }
        let mut field = T::zero();
        for (coeff, mode) in y.iter().zip(modes.modes()) {
            field += *coeff * eigenfunction_at(mode, domain, &point);
        }
        values.push(field);
        // row-major odometer, last axis fastest
        for axis in (0..domain.dim()).rev() {
            index[axis] += 1;
            if index[axis] < grid[axis] {
                break;
            }
            index[axis] = 0;
        }
    }
    Ok(FieldGrid { axes, values })
}

fn eigenfunction_at<T: Real>(mode: &Mode<T>, domain: &DomainSpec<T>, x: &[T]) -> T {
    eval_eigenfunction(mode, domain, x).expect("grid points lie inside the domain closure")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disturbance::DisturbanceKind;

    fn base_config(m: usize, lambda: f64, d: f64) -> SimConfig<f64> {
        let domain = DomainSpec::new(vec![1.0], vec![0.0], vec![0.5]).unwrap();
        SimConfig {
            domain,
            m,
            lambda,
            d_bound: d,
            sigma: 1e-6,
            shift: 0.0,
            dt: 1e-3,
            t_end: 0.5,
            scheme: Scheme::ExponentialEuler,
            y0: InitialProfile::FirstMode,
            disturbance: DisturbanceSpec::zero(m),
            log_every: 1,
            open_loop: false,
        }
    }

    #[test]
    fn scalar_updates_match_hand_values() {
        // pure decay, tau = 1, F = 0
        let next = exponential_euler_update(1.0, 1.0, 0.0, 0.1);
        assert!((next - (-0.1f64).exp()).abs() < 1e-15);

        // zero effective eigenvalue: pure integration through phi1(0) = 1
        let next = exponential_euler_update::<f64>(0.0, 0.0, 2.0, 0.1);
        assert!((next - 0.2).abs() < 1e-15);

        let next = imex_euler_update::<f64>(1.0, 1.0, 0.0, 0.1).unwrap();
        assert!((next - 1.0 / 1.1).abs() < 1e-15);

        assert!(matches!(
            imex_euler_update(-20.0, 1.0, 0.0, 0.1),
            Err(Error::NumericFault(_))
        ));
    }

    #[test]
    fn phi1_is_smooth_across_the_cutoff() {
        for &z in &[-2.0e-4, -0.99e-4, -1e-7, 0.0, 1e-7, 0.99e-4, 2.0e-4] {
            let reference = if z == 0.0 { 1.0 } else { f64::exp_m1(z) / z };
            assert!((phi1(z) - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn full_control_linear_loop_matches_exact_solution() {
        // omega = Omega and N = M decouple the closed loop exactly:
        // y_i(t) = exp(-(tau_i + gamma) t) y_i(0)
        let domain = DomainSpec::with_full_control(vec![std::f64::consts::PI]).unwrap();
        let lambda = 9.0; // tau = (1, 4, 9): N = M = 3
        let mut cfg = base_config(3, lambda, 0.0);
        cfg.domain = domain;
        cfg.y0 = InitialProfile::Coeffs(vec![1.0, -0.5, 0.25]);
        cfg.t_end = 0.2;

        let mut errors = Vec::new();
        for dt in [1e-3, 5e-4] {
            cfg.dt = dt;
            let out = run(&cfg).unwrap();
            assert_eq!(out.closed_loop.params.n, 3);
            let gamma = out.closed_loop.params.gamma;
            assert!((gamma - lambda).abs() < 1e-12); // C = 1
            let last = out.trajectory.last();
            let mut err: f64 = 0.0;
            for (i, y0) in [1.0, -0.5, 0.25].iter().enumerate() {
                let tau = out.closed_loop.modes.eigenvalue(i);
                let exact = y0 * (-(tau + gamma) * last.t).exp();
                err = err.max((last.state[i] - exact).abs());
            }
            errors.push(err);
        }
        // first-order accuracy: halving dt roughly halves the error
        assert!(errors[1] < errors[0]);
        let ratio = errors[0] / errors[1];
        assert!((1.5..2.5).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn equilibrium_stays_at_zero() {
        let mut cfg = base_config(8, 5.0, 0.0);
        cfg.y0 = InitialProfile::Coeffs(vec![0.0]);
        let out = run(&cfg).unwrap();
        for s in &out.trajectory.samples {
            assert_eq!(s.norm_y, 0.0);
            assert_eq!(s.v, 0.0);
        }
    }

    #[test]
    fn undisturbed_loop_decays() {
        let mut cfg = base_config(16, 5.0, 0.0);
        cfg.t_end = 1.0;
        let out = run(&cfg).unwrap();
        let first = &out.trajectory.samples[0];
        let last = out.trajectory.last();
        assert!(last.v < first.v);
        // V must decay at least at rate lambda (with slack for the discrete slope)
        assert!(last.v <= first.v * (-0.9 * cfg.lambda * last.t).exp());
        // sample times strictly increase, and the norm sandwich
        // alpha^2 ||y||^2 <= V <= beta^2 ||y||^2 holds at every step
        let a2 = out.closed_loop.params.alpha().powi(2);
        let b2 = out.closed_loop.params.beta().powi(2);
        for pair in out.trajectory.samples.windows(2) {
            assert!(pair[1].t > pair[0].t);
        }
        for s in &out.trajectory.samples {
            let n2 = s.norm_y * s.norm_y;
            assert!(a2 * n2 <= s.v + 1e-12 * n2.max(1.0));
            assert!(s.v <= b2 * n2 + 1e-12 * n2.max(1.0));
        }
    }

    #[test]
    fn nonfinite_initial_state_is_a_numeric_fault() {
        let mut cfg = base_config(4, 5.0, 0.0);
        cfg.y0 = InitialProfile::Coeffs(vec![f64::NAN]);
        assert!(matches!(run(&cfg), Err(Error::NumericFault(_))));
    }

    #[test]
    fn random_unit_profile_is_seeded() {
        let mut cfg = base_config(8, 5.0, 0.0);
        cfg.y0 = InitialProfile::RandomUnit { seed: 7 };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.trajectory.samples[0].state, b.trajectory.samples[0].state);
        assert!((a.trajectory.samples[0].norm_y - 1.0).abs() < 1e-12);

        cfg.y0 = InitialProfile::RandomUnit { seed: 8 };
        let c = run(&cfg).unwrap();
        assert_ne!(a.trajectory.samples[0].state, c.trajectory.samples[0].state);
    }

    #[test]
    fn bump_profile_is_smooth_and_symmetric() {
        let mut cfg = base_config(8, 5.0, 0.0);
        cfg.y0 = InitialProfile::Bump;
        let out = run(&cfg).unwrap();
        let y0 = &out.trajectory.samples[0].state;
        assert!((y0.norm() - 1.0).abs() < 1e-12);
        // a bump centered in the domain has no even-mode content
        for i in (1..8).step_by(2) {
            assert!(y0[i].abs() < 1e-10, "mode {}: {}", i + 1, y0[i]);
        }
        // and the odd-mode coefficients decay
        assert!(y0[0].abs() > y0[2].abs());
        assert!(y0[2].abs() > y0[4].abs());
    }

    #[test]
    fn open_loop_with_unstable_shift_grows() {
        let mut cfg = base_config(8, 5.0, 0.0);
        cfg.shift = -15.0; // tau_1_eff ~ -5.13
        cfg.open_loop = true;
        cfg.t_end = 1.0;
        let out = run(&cfg).unwrap();
        assert!(out.trajectory.last().norm_y > 10.0 * out.trajectory.samples[0].norm_y);
    }

    #[test]
    fn disturbance_is_applied() {
        let mut cfg = base_config(8, 5.0, 1.0);
        cfg.disturbance = DisturbanceSpec::new(
            DisturbanceKind::Constant,
            1.0,
            None,
            1.0,
            0,
            1.0,
            1.0,
            8,
        )
        .unwrap();
        cfg.y0 = InitialProfile::Coeffs(vec![0.0]);
        let out = run(&cfg).unwrap();
        // the constant disturbance pushes the state off the equilibrium,
        // the controller pins it to a small floor
        let max_norm = out
            .trajectory
            .samples
            .iter()
            .map(|s| s.norm_y)
            .fold(0.0, f64::max);
        assert!(max_norm > 0.0);
        assert!(max_norm < 0.1);
    }

    #[test]
    fn field_reconstruction_samples_modes() {
        let pi = std::f64::consts::PI;
        let domain = DomainSpec::with_full_control(vec![pi]).unwrap();
        let modes = enumerate_modes(&domain, 3, 0.0).unwrap();
        let y = ModalState::from_vec(vec![1.0, 0.0, 0.0]);
        let field = reconstruct_field(&y, &modes, &domain, &[5]).unwrap();
        assert_eq!(field.values.len(), 5);
        assert_eq!(field.values[0], 0.0);
        assert_eq!(field.values[4], 0.0);
        assert!((field.values[2] - (2.0 / pi).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn field_grid_quadrature_recovers_parseval() {
        let domain = DomainSpec::with_full_control(vec![1.0]).unwrap();
        let modes = enumerate_modes(&domain, 4, 0.0).unwrap();
        let y = ModalState::from_vec(vec![0.7, -0.3, 0.2, 0.1]);
        let expected: f64 = y.iter().map(|v| v * v).sum();
        // trapezoid on a fine grid approximates the squared-field integral
        let g = 2001;
        let field = reconstruct_field(&y, &modes, &domain, &[g]).unwrap();
        let h = 1.0 / (g as f64 - 1.0);
        let mut integral = 0.0;
        for (i, v) in field.values.iter().enumerate() {
            let w = if i == 0 || i == g - 1 { 0.5 } else { 1.0 };
            integral += w * v * v * h;
        }
        assert!((integral - expected).abs() < 1e-6);
    }

    #[test]
    fn f32_run_is_finite_and_decays() {
        let domain = DomainSpec::<f32>::new(vec![1.0], vec![0.0], vec![0.5]).unwrap();
        let cfg = SimConfig::<f32> {
            domain,
            m: 8,
            lambda: 5.0,
            d_bound: 0.0,
            sigma: 1e-4,
            shift: 0.0,
            dt: 1e-3,
            t_end: 0.5,
            scheme: Scheme::ImexEuler,
            y0: InitialProfile::FirstMode,
            disturbance: DisturbanceSpec::zero(8),
            log_every: 10,
            open_loop: false,
        };
        let out = run(&cfg).unwrap();
        assert!(out.trajectory.last().v < out.trajectory.samples[0].v);
    }
}
