//! Dirichlet-Laplacian eigenpairs on box domains.
//!
//! On `Ω = Π_k (0, L_k)` the eigenpairs of `-Δ` with zero boundary values are
//! known in closed form:
//!
//! ```text
//! e(x) = Π_k sqrt(2/L_k) sin(k_j π x_j / L_j),   τ = Σ_j (k_j π / L_j)²
//! ```
//!
//! with one mode per index tuple `(k_1, ..., k_dim)`, `k_j ≥ 1`. The basis is
//! orthonormal in `L²(Ω)`. An optional constant potential shifts every
//! eigenvalue by `c`; with `c < -τ_1` the low modes become unstable.

use serde::Serialize;

use crate::{real, Error, Real, Result};

/// Box domain `Ω = Π (0, L_k)` together with the control subdomain
/// `ω = Π (lo_k, hi_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<T: Real> {
    lengths: Vec<T>,
    omega_lo: Vec<T>,
    omega_hi: Vec<T>,
}

impl<T: Real> DomainSpec<T> {
    /// Validates the geometry: 1 to 3 axes, positive side lengths, and a
    /// control box of positive measure contained in `Ω`.
    pub fn new(lengths: Vec<T>, omega_lo: Vec<T>, omega_hi: Vec<T>) -> Result<Self> {
        let dim = lengths.len();
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if omega_lo.len() != dim || omega_hi.len() != dim {
            return Err(Error::InvalidDomain(format!(
                "control subdomain has {}:{} bounds for a {dim}-d domain",
                omega_lo.len(),
                omega_hi.len()
            )));
        }
        for k in 0..dim {
            if !(lengths[k] > T::zero()) {
                return Err(Error::InvalidDomain(format!(
                    "side length {} on axis {k} must be positive",
                    lengths[k]
                )));
            }
            if !(omega_lo[k] >= T::zero() && omega_lo[k] < omega_hi[k] && omega_hi[k] <= lengths[k])
            {
                return Err(Error::InvalidDomain(format!(
                    "need 0 <= lo < hi <= L on axis {k}, got lo={} hi={} L={}",
                    omega_lo[k], omega_hi[k], lengths[k]
                )));
            }
        }
        Ok(Self {
            lengths,
            omega_lo,
            omega_hi,
        })
    }

    /// Domain with `ω = Ω` (control everywhere).
    pub fn with_full_control(lengths: Vec<T>) -> Result<Self> {
        let lo = vec![T::zero(); lengths.len()];
        let hi = lengths.clone();
        Self::new(lengths, lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn omega_lo(&self) -> &[T] {
        &self.omega_lo
    }

    pub fn omega_hi(&self) -> &[T] {
        &self.omega_hi
    }

    /// True when `x` lies in the closure of `Ω`.
    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lengths)
                .all(|(&xi, &li)| xi >= T::zero() && xi <= li)
    }
}

/// One eigenpair: index tuple and eigenvalue of `-Δ` (unshifted).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode<T: Real> {
    pub index: Vec<u32>,
    pub eigenvalue: T,
}

/// The `M` smallest eigenpairs, sorted by `(τ, lexicographic index)`, plus the
/// constant potential shift applied to the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet<T: Real> {
    modes: Vec<Mode<T>>,
    shift: T,
}

impl<T: Real> ModeSet<T> {
    /// Truncation size `M`.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    /// Raw eigenvalue `τ_i` (0-based).
    pub fn eigenvalue(&self, i: usize) -> T {
        self.modes[i].eigenvalue
    }

    /// Effective eigenvalue `τ_i + c` driving mode `i`.
    pub fn effective_eigenvalue(&self, i: usize) -> T {
        self.modes[i].eigenvalue + self.shift
    }

    /// Smallest effective eigenvalue (negative when the shift destabilizes).
    pub fn min_effective_eigenvalue(&self) -> T {
        self.effective_eigenvalue(0)
    }

    pub fn max_effective_eigenvalue(&self) -> T {
        self.effective_eigenvalue(self.len() - 1)
    }

    /// Number of unstable modes (effective eigenvalue <= 0).
    pub fn unstable_count(&self) -> usize {
        (0..self.len())
            .take_while(|&i| self.effective_eigenvalue(i) <= T::zero())
            .count()
    }
}

fn eigenvalue_of<T: Real>(index: &[u32], lengths: &[T]) -> T {
    let pi = T::pi();
    index
        .iter()
        .zip(lengths)
        .map(|(&k, &l)| {
            let w = real::<T>(k as f64) * pi / l;
            w * w
        })
        .fold(T::zero(), |acc, v| acc + v)
}

/// Enumerates the `m` smallest Dirichlet eigenpairs of `-Δ` on the box, with
/// constant potential shift `c` recorded for the dynamics.
///
/// The candidate index box `[1, K]^dim` is doubled until the `m`-th smallest
/// candidate eigenvalue is strictly below `((K+1) π / L_max)²`, a lower bound
/// on every eigenvalue outside the box, which certifies that the selection is
/// complete. Ties are broken by lexicographic index so repeated calls yield
/// identical orderings.
pub fn enumerate_modes<T: Real>(domain: &DomainSpec<T>, m: usize, shift: T) -> Result<ModeSet<T>> {
    if m == 0 {
        return Err(Error::InvalidDomain("mode count M must be >= 1".into()));
    }
    let dim = domain.dim();
    let lengths = domain.lengths();
    let l_max = lengths
        .iter()
        .copied()
        .fold(T::zero(), |acc, l| if l > acc { l } else { acc });

    let mut bound = ((m as f64).powf(1.0 / dim as f64)).ceil() as u32 + 2;
    loop {
        let mut candidates: Vec<Mode<T>> = Vec::with_capacity((bound as usize).pow(dim as u32));
        let mut index = vec![1u32; dim];
        'fill: loop {
            candidates.push(Mode {
                index: index.clone(),
                eigenvalue: eigenvalue_of(&index, lengths),
            });
            // odometer over [1, bound]^dim
            for axis in (0..dim).rev() {
                if index[axis] < bound {
                    index[axis] += 1;
                    index[axis + 1..].iter_mut().for_each(|k| *k = 1);
                    continue 'fill;
                }
            }
            break;
        }
        candidates.sort_by(|a, b| {
            a.eigenvalue
                .partial_cmp(&b.eigenvalue)
                .expect("eigenvalues are finite")
                .then_with(|| a.index.cmp(&b.index))
        });

        if candidates.len() >= m {
            let outside_min = {
                let w = real::<T>((bound + 1) as f64) * T::pi() / l_max;
                w * w
            };
            if candidates[m - 1].eigenvalue < outside_min {
                candidates.truncate(m);
                return Ok(ModeSet {
                    modes: candidates,
                    shift,
                });
            }
        }
        bound *= 2;
    }
}

/// Number of controlled modes `N(λ) = #{i : τ_i + c <= λ}`, clamped to at
/// least 1 so the controlled block is never empty.
///
/// Errors when the truncation does not reach the threshold, i.e. the largest
/// effective eigenvalue is below `λ`.
pub fn controlled_mode_count<T: Real>(modes: &ModeSet<T>, lambda: T) -> Result<usize> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidConfig(format!(
            "decay rate must be positive, got {lambda}"
        )));
    }
    if modes.max_effective_eigenvalue() < lambda {
        return Err(Error::TruncationTooSmall(format!(
            "largest effective eigenvalue {} is below lambda = {}; increase M",
            modes.max_effective_eigenvalue(),
            lambda
        )));
    }
    let count = (0..modes.len())
        .take_while(|&i| modes.effective_eigenvalue(i) <= lambda)
        .count();
    Ok(count.max(1))
}

/// Evaluates the eigenfunction of `mode` at a point of `closure(Ω)`.
///
/// Boundary points return exactly zero.
pub fn eval_eigenfunction<T: Real>(
    mode: &Mode<T>,
    domain: &DomainSpec<T>,
    x: &[T],
) -> Result<T> {
    if x.len() != domain.dim() || mode.index.len() != domain.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, mode {} indices, domain dimension {}",
            x.len(),
            mode.index.len(),
            domain.dim()
        )));
    }
    if !domain.contains(x) {
        return Err(Error::InvalidDomain(format!(
            "evaluation point outside the domain closure: {x:?}"
        )));
    }
    let mut value = T::one();
    for (axis, (&xi, &li)) in x.iter().zip(domain.lengths()).enumerate() {
        if xi == T::zero() || xi == li {
            return Ok(T::zero());
        }
        let k = real::<T>(mode.index[axis] as f64);
        value *= (real::<T>(2.0) / li).sqrt() * (k * T::pi() * xi / li).sin();
    }
    Ok(value)
}
