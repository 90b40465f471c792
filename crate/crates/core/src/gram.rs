//! Gram matrix of eigenfunctions restricted to the control subdomain.
//!
//! Entry `G_ij = (e_i, e_j)_{L²(ω)}` couples mode `j` of a control field to
//! mode `i` of the state, because multiplying by the indicator of `ω` mixes
//! the eigenbasis. The leading `N x N` block is the controllability Gram of
//! the low modes; its smallest eigenvalue `C` is the spectral constant in
//!
//! ```text
//! || Σ a_n e_n ||²_{L²(ω)} = aᵀ G_N a >= C Σ a_n²
//! ```
//!
//! Entries are assembled from the per-axis antiderivatives (product-to-sum
//! for distinct frequencies, the sin² antiderivative on the diagonal), so the
//! matrix is exactly symmetric and bit-reproducible. Numerical quadrature is
//! used only as an independent oracle in the tests.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::spectral::{DomainSpec, ModeSet};
use crate::{real, Error, Real, Result};

/// Degeneracy tolerance on the spectral constant; below this the gains
/// `γ = λ/C` are meaningless noise.
const DEGENERACY_TOL: f64 = 1e-12;

/// `(2/L) ∫_a^b sin(kπx/L) sin(lπx/L) dx` in closed form.
///
/// Multidimensional Gram entries are products of per-axis overlaps.
pub fn sine_overlap<T: Real>(k: u32, l: u32, a: T, b: T, length: T) -> Result<T> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidConfig(format!(
            "sine indices must be >= 1, got k={k}, l={l}"
        )));
    }
    if !(a < b) {
        return Err(Error::EmptyInterval(format!("[{a}, {b}]")));
    }
    if !(a >= T::zero() && b <= length) {
        return Err(Error::InvalidDomain(format!(
            "interval [{a}, {b}] not contained in [0, {length}]"
        )));
    }
    let pi = T::pi();
    if k == l {
        // (2/L) ∫ sin²(kπx/L) = (b-a)/L - [sin(2kπx/L)]_a^b / (2kπ)
        let w = real::<T>(2.0 * k as f64) * pi;
        Ok((b - a) / length - ((w * b / length).sin() - (w * a / length).sin()) / w)
    } else {
        // product-to-sum: sin A sin B = (cos(A-B) - cos(A+B)) / 2
        let diff = real::<T>(k as f64 - l as f64) * pi;
        let sum = real::<T>((k + l) as f64) * pi;
        let sdiff = ((diff * b / length).sin() - (diff * a / length).sin()) / diff;
        let ssum = ((sum * b / length).sin() - (sum * a / length).sin()) / sum;
        Ok(sdiff - ssum)
    }
}

/// Symmetric `M x M` matrix of `ω`-restricted eigenfunction inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T: Real> {
    entries: DMatrix<T>,
    domain_hash: u64,
}

/// Smallest eigenvalue of the leading `N x N` Gram block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralConstant<T: Real> {
    pub value: T,
    pub n: usize,
}

fn fnv1a(bytes: &[u8], mut hash: u64) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

/// Stable identifier tying a Gram matrix to the domain and mode set it was
/// assembled from.
fn domain_hash<T: Real>(modes: &ModeSet<T>, domain: &DomainSpec<T>) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325;
    let shift = modes.shift();
    let scalars = domain
        .lengths()
        .iter()
        .chain(domain.omega_lo())
        .chain(domain.omega_hi())
        .chain(std::iter::once(&shift));
    for s in scalars {
        h = fnv1a(format!("{s};").as_bytes(), h);
    }
    for mode in modes.modes() {
        for &k in &mode.index {
            h = fnv1a(&k.to_le_bytes(), h);
        }
    }
    h
}

impl<T: Real> GramMatrix<T> {
    /// Assembles the full `M x M` matrix, upper triangle mirrored so that
    /// `G = Gᵀ` holds exactly.
    pub fn assemble(modes: &ModeSet<T>, domain: &DomainSpec<T>) -> Result<Self> {
        let m = modes.len();
        let dim = domain.dim();
        for mode in modes.modes() {
            if mode.index.len() != dim {
                return Err(Error::DimensionMismatch(
                    "mode indices do not match the domain dimension".into(),
                ));
            }
        }
        let mut entries = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut value = T::one();
                for axis in 0..dim {
                    value *= sine_overlap(
                        modes.modes()[i].index[axis],
                        modes.modes()[j].index[axis],
                        domain.omega_lo()[axis],
                        domain.omega_hi()[axis],
                        domain.lengths()[axis],
                    )?;
                }
                entries[(i, j)] = value;
                entries[(j, i)] = value;
            }
        }
        Ok(Self {
            entries,
            domain_hash: domain_hash(modes, domain),
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    /// True when this matrix was assembled from the given domain and modes.
    pub fn consistent_with(&self, modes: &ModeSet<T>, domain: &DomainSpec<T>) -> bool {
        self.domain_hash == domain_hash(modes, domain)
    }

    /// Quadratic pairing `uᵀ G v = (Σ u_i e_i, Σ v_j e_j)_{L²(ω)}`.
    pub fn pairing(&self, u: &DVector<T>, v: &DVector<T>) -> T {
        (&self.entries * v).dot(u)
    }

    /// `L²(ω)` norm of the field with modal coefficients `v`. Roundoff
    /// negatives clamp to zero; non-finite pairings propagate so callers can
    /// fault.
    pub fn localized_norm(&self, v: &DVector<T>) -> T {
        let q = self.pairing(v, v);
        if q > T::zero() {
            q.sqrt()
        } else if q.is_finite() {
            T::zero()
        } else {
            q
        }
    }

    /// Smallest eigenvalue of the leading `n x n` block via a symmetric
    /// eigensolve.
    ///
    /// Errors when the constant falls below the degeneracy tolerance, which
    /// signals that `ω` cannot observe `n` modes at working precision.
    pub fn spectral_constant(&self, n: usize) -> Result<SpectralConstant<T>> {
        if n == 0 || n > self.size() {
            return Err(Error::InvalidConfig(format!(
                "block size {n} outside 1..={}",
                self.size()
            )));
        }
        let block = self.entries.view((0, 0), (n, n)).into_owned();
        let eigen = block.symmetric_eigen();
        let mut smallest = eigen.eigenvalues[0];
        for &v in eigen.eigenvalues.iter() {
            if v < smallest {
                smallest = v;
            }
        }
        if smallest <= real::<T>(DEGENERACY_TOL) {
            return Err(Error::DegenerateSubdomain(format!(
                "smallest Gram eigenvalue {smallest} <= {DEGENERACY_TOL} for N={n}; \
                 the control subdomain is too small to observe that many modes"
            )));
        }
        Ok(SpectralConstant { value: smallest, n })
    }
}
