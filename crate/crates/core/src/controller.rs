//! Feedback gain synthesis and modal evaluation of both feedback terms.
//!
//! For a target decay rate `λ` with `N` controlled modes and spectral
//! constant `C`, the gains are
//!
//! ```text
//! γ = λ / C,            μ = 1 / C²              (all modes stable)
//! γ = (λ - τ₁ᵉ) / C,    μ = (λ - τ₁ᵉ)² / (λ²C²) (τ₁ᵉ <= 0, shifted case)
//! ```
//!
//! where `τ₁ᵉ` is the smallest effective eigenvalue. In both cases
//! `μ = (γ/λ)²`. The linear term damps the controlled modes, `ũ = -γ P_N y`.
//! The rejection term saturates at the disturbance bound `D`:
//!
//! ```text
//! û = -D w / max(r, σ),   w = 𝒞y = μ P_N y + P_N⊥ y,   r = ||χ_ω 𝒞y||
//! ```
//!
//! For `r >= σ` this is the exact unit-norm sign direction; below `σ` it
//! ramps linearly through zero (the single-valued surrogate of the
//! multivalued sign), which bounds the applied field by `D` at the price of a
//! stagnation floor of scale `σ`.

use nalgebra::DVector;
use serde::Serialize;

use crate::gram::{GramMatrix, SpectralConstant};
use crate::spectral::{controlled_mode_count, ModeSet};
use crate::{Error, Real, Result};

/// Modal coefficient vector `y_i = (y, e_i)_{L²(Ω)}`; its Euclidean norm is
/// the `L²(Ω)` norm of the field.
pub type ModalState<T> = DVector<T>;

/// Synthesized feedback parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControllerParams<T: Real> {
    /// Target decay rate of the Lyapunov function.
    pub lambda: T,
    /// Disturbance bound `D`; zero disables the rejection term.
    pub d_bound: T,
    /// Spectral constant of the controlled block.
    pub c_lambda: T,
    /// Linear feedback gain.
    pub gamma: T,
    /// Low-mode weight in the Lyapunov function.
    pub mu: T,
    /// Saturation scale of the rejection term.
    pub sigma: T,
    /// Number of controlled modes.
    pub n: usize,
    /// Constant potential shift of the eigenvalues.
    pub shift: T,
}

impl<T: Real> ControllerParams<T> {
    /// Fixes the gains for decay rate `lambda` given the spectral constant of
    /// the controlled block.
    ///
    /// `constant.n` must equal the controlled mode count of `modes` at
    /// `lambda`. The shifted gain formulas engage when the potential makes
    /// some effective eigenvalue nonpositive.
    pub fn design(
        lambda: T,
        constant: &SpectralConstant<T>,
        d_bound: T,
        sigma: T,
        modes: &ModeSet<T>,
    ) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "decay rate must be positive, got {lambda}"
            )));
        }
        if !(d_bound >= T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "disturbance bound must be nonnegative, got {d_bound}"
            )));
        }
        if !(sigma > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "regularization scale must be positive, got {sigma}"
            )));
        }
        if !(constant.value > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "spectral constant must be positive, got {}",
                constant.value
            )));
        }
        let n = controlled_mode_count(modes, lambda)?;
        if n != constant.n {
            return Err(Error::DimensionMismatch(format!(
                "spectral constant was computed for N={}, but lambda={lambda} selects N={n}",
                constant.n
            )));
        }
        let c = constant.value;
        let shift = modes.shift();
        let tau_min = modes.min_effective_eigenvalue();

        let gamma = if shift != T::zero() && tau_min <= T::zero() {
            let rate_gap = lambda - tau_min;
            if !(rate_gap > T::zero()) {
                return Err(Error::InfeasibleRate(format!(
                    "lambda = {lambda} does not exceed the smallest effective eigenvalue \
                     {tau_min}; no positive gain exists"
                )));
            }
            rate_gap / c
        } else {
            lambda / c
        };
        let mu = (gamma / lambda) * (gamma / lambda);

        Ok(Self {
            lambda,
            d_bound,
            c_lambda: c,
            gamma,
            mu,
            sigma,
            n,
            shift,
        })
    }

    /// `α = min(1, sqrt(μ))` in the norm sandwich `α²||y||² <= V(y)`.
    pub fn alpha(&self) -> T {
        T::one().min(self.mu.sqrt())
    }

    /// `β = max(1, sqrt(μ))` in the norm sandwich `V(y) <= β²||y||²`.
    pub fn beta(&self) -> T {
        T::one().max(self.mu.sqrt())
    }

    /// Weighted inner product `(u, v)_μ = μ Σ_{i<=N} u_i v_i + Σ_{i>N} u_i v_i`.
    pub fn mu_inner(&self, u: &ModalState<T>, v: &ModalState<T>) -> T {
        let mut low = T::zero();
        let mut high = T::zero();
        for i in 0..u.len().min(v.len()) {
            if i < self.n {
                low += u[i] * v[i];
            } else {
                high += u[i] * v[i];
            }
        }
        self.mu * low + high
    }

    /// `𝒞y = μ P_N y + P_N⊥ y` componentwise.
    pub fn weighted_state(&self, y: &ModalState<T>) -> ModalState<T> {
        ModalState::from_fn(y.len(), |i, _| if i < self.n { self.mu * y[i] } else { y[i] })
    }

    /// `𝒞⁻¹y`, scaling the first `N` components by `1/μ`.
    pub fn weighted_state_inverse(&self, y: &ModalState<T>) -> ModalState<T> {
        ModalState::from_fn(y.len(), |i, _| if i < self.n { y[i] / self.mu } else { y[i] })
    }

    /// Modal coefficients of the linear term `ũ = -γ P_N y`.
    pub fn linear_feedback(&self, y: &ModalState<T>) -> ModalState<T> {
        ModalState::from_fn(
            y.len(),
            |i, _| if i < self.n { -self.gamma * y[i] } else { T::zero() },
        )
    }

    /// Modal coefficients of the regularized rejection term
    /// `û = -D w / max(r, σ)` with `w = 𝒞y` and `r = ||χ_ω 𝒞y|| = sqrt(wᵀGw)`.
    ///
    /// The field applied through `χ_ω` then has `L²(Ω)` norm
    /// `sqrt(ûᵀGû) = D r / max(r, σ) <= D`. With `d_bound = 0` the term is
    /// identically zero.
    pub fn sign_feedback(&self, y: &ModalState<T>, gram: &GramMatrix<T>) -> Result<ModalState<T>> {
        if gram.size() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix of size {} applied to state of length {}",
                gram.size(),
                y.len()
            )));
        }
        if self.d_bound == T::zero() {
            return Ok(ModalState::zeros(y.len()));
        }
        let w = self.weighted_state(y);
        let r = gram.localized_norm(&w);
        if !r.is_finite() {
            return Err(Error::NumericFault(
                "non-finite state norm in the rejection term".into(),
            ));
        }
        let scale = -self.d_bound / r.max(self.sigma);
        Ok(w * scale)
    }

    /// Monotonicity gap `⟨A y₁ - A y₂, y₁ - y₂⟩_μ` of the closed-loop drift
    /// operator `A y = diag(τᵉ) y - G (ũ(y) + û(y))`, the modal form of the
    /// diffusion plus `ω`-localized feedback. Nonnegativity of the gap is the
    /// dissipativity property that makes the closed loop well posed; this is
    /// a diagnostic for property tests, not part of the control path.
    pub fn monotone_gap(
        &self,
        y1: &ModalState<T>,
        y2: &ModalState<T>,
        gram: &GramMatrix<T>,
        modes: &ModeSet<T>,
    ) -> Result<T> {
        if y1.len() != y2.len() {
            return Err(Error::DimensionMismatch(format!(
                "states of length {} and {}",
                y1.len(),
                y2.len()
            )));
        }
        if modes.len() != y1.len() {
            return Err(Error::DimensionMismatch(
                "mode set does not match the state length".into(),
            ));
        }
        let apply = |y: &ModalState<T>| -> Result<ModalState<T>> {
            let control = self.linear_feedback(y) + self.sign_feedback(y, gram)?;
            let mut a = ModalState::from_fn(y.len(), |i, _| modes.effective_eigenvalue(i) * y[i]);
            a -= gram.entries() * control;
            Ok(a)
        };
        let diff = y1 - y2;
        Ok(self.mu_inner(&(apply(y1)? - apply(y2)?), &diff))
    }
}
