//! Bounded test disturbances in modal coordinates.
//!
//! Every kind produces a modal coefficient vector `d(t)` the controller never
//! sees ahead of time, bounded so that `||d(t, ·)||_{L²(Ω)} <= D_d <= D`. The
//! profile-based kinds scale a fixed unit-norm modal profile `p` by a signal
//! `s(t)` with `|s| <= 1`. The adversarial kind instead mirrors the
//! controller's own rejection direction, `+D_d w / max(||w||_G, σ)` with
//! `w = 𝒞y`, which attains the worst case of the pairing the rejection term
//! has to dominate; its localized norm `sqrt(dᵀGd)` stays within `D_d`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::{ControllerParams, ModalState};
use crate::gram::GramMatrix;
use crate::{real, Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisturbanceKind {
    Zero,
    Constant,
    Sinusoid,
    SquareWave,
    RandomBounded,
    Adversarial,
}

/// Disturbance description; construct through [`DisturbanceSpec::new`] so the
/// amplitude bound and profile normalization hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSpec<T: Real> {
    kind: DisturbanceKind,
    amplitude: T,
    profile: DVector<T>,
    frequency: T,
    seed: u64,
    switch_period: T,
}

impl<T: Real> DisturbanceSpec<T> {
    /// Validates a disturbance against the controller bound `d_bound` and the
    /// truncation size `m`.
    ///
    /// `profile = None` defaults to the first-mode direction. A provided
    /// profile is normalized to unit Euclidean norm and zero-padded to length
    /// `m`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: DisturbanceKind,
        amplitude: T,
        profile: Option<Vec<T>>,
        frequency: T,
        seed: u64,
        switch_period: T,
        d_bound: T,
        m: usize,
    ) -> Result<Self> {
        if !(amplitude >= T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "disturbance amplitude must be nonnegative, got {amplitude}"
            )));
        }
        if amplitude > d_bound {
            return Err(Error::DisturbanceBound(format!(
                "amplitude {amplitude} exceeds the controller bound D = {d_bound}"
            )));
        }
        match kind {
            DisturbanceKind::Sinusoid | DisturbanceKind::SquareWave
                if !(frequency > T::zero()) =>
            {
                return Err(Error::InvalidConfig(format!(
                    "periodic disturbance needs a positive frequency, got {frequency}"
                )));
            }
            DisturbanceKind::RandomBounded if !(switch_period > T::zero()) => {
                return Err(Error::InvalidConfig(format!(
                    "random disturbance needs a positive switch period, got {switch_period}"
                )));
            }
            _ => {}
        }
        let profile = match profile {
            None => {
                let mut p = DVector::zeros(m);
                if m > 0 {
                    p[0] = T::one();
                }
                p
            }
            Some(values) => {
                if values.len() > m {
                    return Err(Error::DimensionMismatch(format!(
                        "profile has {} entries but the truncation is M = {m}",
                        values.len()
                    )));
                }
                let mut p = DVector::zeros(m);
                for (i, v) in values.into_iter().enumerate() {
                    p[i] = v;
                }
                let norm = p.norm();
                if !(norm > T::zero()) {
                    return Err(Error::InvalidConfig(
                        "disturbance profile must be a nonzero vector".into(),
                    ));
                }
                p / norm
            }
        };
        Ok(Self {
            kind,
            amplitude,
            profile,
            frequency,
            seed,
            switch_period,
        })
    }

    /// Zero disturbance of matching truncation.
    pub fn zero(m: usize) -> Self {
        Self {
            kind: DisturbanceKind::Zero,
            amplitude: T::zero(),
            profile: DVector::zeros(m),
            frequency: T::one(),
            seed: 0,
            switch_period: T::one(),
        }
    }

    pub fn kind(&self) -> DisturbanceKind {
        self.kind
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    /// Modal coefficients of `d(t)`.
    ///
    /// Pure in `(t, y)`: the random kind derives its value functionally from
    /// `(seed, floor(t / switch_period))`, so evaluation is reentrant and
    /// trajectories are reproducible from the seed alone.
    pub fn eval(
        &self,
        t: T,
        y: &ModalState<T>,
        params: &ControllerParams<T>,
        gram: &GramMatrix<T>,
    ) -> Result<ModalState<T>> {
        if !(t >= T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "disturbances are defined for t >= 0, got t = {t}"
            )));
        }
        let m = self.profile.len();
        match self.kind {
            DisturbanceKind::Zero => Ok(DVector::zeros(m)),
            DisturbanceKind::Constant => Ok(&self.profile * self.amplitude),
            DisturbanceKind::Sinusoid => {
                let s = (real::<T>(2.0) * T::pi() * self.frequency * t).sin();
                Ok(&self.profile * (self.amplitude * s))
            }
            DisturbanceKind::SquareWave => {
                let s = (real::<T>(2.0) * T::pi() * self.frequency * t).sin();
                let s = if s == T::zero() { T::zero() } else { s.signum() };
                Ok(&self.profile * (self.amplitude * s))
            }
            DisturbanceKind::RandomBounded => {
                let interval = (t / self.switch_period).floor();
                let k: u64 = nalgebra::try_convert::<T, f64>(interval)
                    .map(|x| x as u64)
                    .unwrap_or(0);
                let mut rng = ChaCha8Rng::seed_from_u64(
                    self.seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15),
                );
                let u: f64 = rng.gen_range(-1.0..=1.0);
                Ok(&self.profile * (self.amplitude * real::<T>(u)))
            }
            DisturbanceKind::Adversarial => {
                if gram.size() != y.len() {
                    return Err(Error::DimensionMismatch(
                        "Gram matrix does not match the state length".into(),
                    ));
                }
                let w = params.weighted_state(y);
                let r = gram.localized_norm(&w);
                if !r.is_finite() {
                    return Err(Error::NumericFault(
                        "non-finite state norm in the adversarial disturbance".into(),
                    ));
                }
                Ok(w * (self.amplitude / r.max(params.sigma)))
            }
        }
    }
}
