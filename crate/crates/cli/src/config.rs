//! Run configuration: TOML schema, validation, and resolution of defaults.
//!
//! A validated configuration is fully resolved — every optional field holds
//! its effective value — so the copy echoed into the run manifest re-parses
//! to an identical configuration, which is the reproducibility contract.

use serde::{Deserialize, Serialize};

use heatstab::disturbance::{DisturbanceKind, DisturbanceSpec};
use heatstab::simulator::{InitialProfile, Scheme, SimConfig};
use heatstab::spectral::DomainSpec;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub domain: DomainSection,
    pub model: ModelSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub disturbance: DisturbanceSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub lengths: Vec<f64>,
    pub omega_lo: Vec<f64>,
    pub omega_hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Truncation size M.
    pub modes: usize,
    /// Target decay rate.
    pub lambda: f64,
    /// Disturbance bound D (0 disables the rejection term).
    #[serde(default)]
    pub disturbance_bound: f64,
    /// Saturation scale; default 1e-6 * D (1e-6 when D = 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Constant potential shift.
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Step size; default min(0.1/lambda, 0.1/gamma).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Horizon; default 8/lambda.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<ProfileName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0_seed: Option<u64>,
    /// Explicit initial coefficients; overrides `y0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0_coeffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open_loop: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    ExponentialEuler,
    ImexEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    FirstMode,
    RandomUnit,
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    pub kind: KindName,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_period: Option<f64>,
    /// Modal profile; normalized, zero-padded to M. Default: first mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
}

impl Default for DisturbanceSection {
    fn default() -> Self {
        Self {
            kind: KindName::Zero,
            amplitude: 0.0,
            frequency: None,
            seed: None,
            switch_period: None,
            profile: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Zero,
    Constant,
    Sinusoid,
    SquareWave,
    RandomBounded,
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Grid resolution per axis for a field snapshot at t_end.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    /// Sweeping the bound sets the disturbance amplitude to the same value.
    #[serde(default)]
    pub disturbance_bound: Vec<f64>,
    #[serde(default)]
    pub omega: Vec<OmegaChoice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaChoice {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            self.sim.y0_seed = Some(seed);
            self.disturbance.seed = Some(seed);
        }
        if let Some(dt) = ov.dt {
            self.sim.dt = Some(dt);
        }
        if let Some(t_end) = ov.t_end {
            self.sim.t_end = Some(t_end);
        }
    }

    /// Validates the configuration and fills every default, returning a copy
    /// in which all optional fields are concrete. Validation of a resolved
    /// configuration is the identity.
    pub fn resolve(&self) -> Result<ConfigFile> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        // domain and model checks that do not need the design
        let _ = self.domain()?;
        if !(self.model.lambda > 0.0) {
            return Err(CliError::Config(format!(
                "model.lambda must be positive, got {}",
                self.model.lambda
            )));
        }
        if self.model.modes == 0 {
            return Err(CliError::Config("model.modes must be >= 1".into()));
        }
        if self.model.disturbance_bound < 0.0 {
            return Err(CliError::Config(
                "model.disturbance_bound must be nonnegative".into(),
            ));
        }

        let mut resolved = self.clone();
        let d = self.model.disturbance_bound;
        resolved.model.sigma = Some(match self.model.sigma {
            Some(s) if s > 0.0 => s,
            Some(s) => {
                return Err(CliError::Config(format!(
                    "model.sigma must be positive, got {s}"
                )))
            }
            None => {
                if d > 0.0 {
                    1e-6 * d
                } else {
                    1e-6
                }
            }
        });

        // the dt default needs the synthesized gain; resolve it from a design
        let design = crate::commands::design_for(&resolved)?;
        resolved.sim.dt = Some(match self.sim.dt {
            Some(dt) if dt > 0.0 => dt,
            Some(dt) => {
                return Err(CliError::Config(format!(
                    "sim.dt must be positive, got {dt}"
                )))
            }
            None => (0.1 / self.model.lambda).min(0.1 / design.gamma),
        });
        resolved.sim.t_end = Some(match self.sim.t_end {
            Some(t) if t > 0.0 => t,
            Some(t) => {
                return Err(CliError::Config(format!(
                    "sim.t_end must be positive, got {t}"
                )))
            }
            None => 8.0 / self.model.lambda,
        });
        resolved.sim.scheme = Some(self.sim.scheme.unwrap_or(SchemeName::ExponentialEuler));
        resolved.sim.log_every = Some(self.sim.log_every.unwrap_or(1).max(1));
        resolved.sim.y0 = Some(self.sim.y0.unwrap_or(ProfileName::FirstMode));
        resolved.sim.y0_seed = Some(self.sim.y0_seed.unwrap_or(1));
        resolved.sim.open_loop = Some(self.sim.open_loop.unwrap_or(false));

        resolved.disturbance.frequency = Some(self.disturbance.frequency.unwrap_or(1.0));
        resolved.disturbance.seed = Some(self.disturbance.seed.unwrap_or(0));
        resolved.disturbance.switch_period =
            Some(self.disturbance.switch_period.unwrap_or(0.1));

        // surface disturbance-spec violations (amplitude vs bound, profile)
        let _ = resolved.disturbance_spec()?;
        let _ = resolved.sim_config()?;
        Ok(resolved)
    }

    pub fn domain(&self) -> Result<DomainSpec<f64>> {
        DomainSpec::new(
            self.domain.lengths.clone(),
            self.domain.omega_lo.clone(),
            self.domain.omega_hi.clone(),
        )
        .map_err(CliError::from)
    }

    pub fn sigma(&self) -> f64 {
        self.model.sigma.expect("resolved config")
    }

    /// Disturbance of a resolved configuration.
    pub fn disturbance_spec(&self) -> Result<DisturbanceSpec<f64>> {
        let kind = match self.disturbance.kind {
            KindName::Zero => DisturbanceKind::Zero,
            KindName::Constant => DisturbanceKind::Constant,
            KindName::Sinusoid => DisturbanceKind::Sinusoid,
            KindName::SquareWave => DisturbanceKind::SquareWave,
            KindName::RandomBounded => DisturbanceKind::RandomBounded,
            KindName::Adversarial => DisturbanceKind::Adversarial,
        };
        DisturbanceSpec::new(
            kind,
            self.disturbance.amplitude,
            self.disturbance.profile.clone(),
            self.disturbance.frequency.expect("resolved config"),
            self.disturbance.seed.expect("resolved config"),
            self.disturbance.switch_period.expect("resolved config"),
            self.model.disturbance_bound,
            self.model.modes,
        )
        .map_err(CliError::from)
    }

    /// Simulator configuration of a resolved configuration.
    pub fn sim_config(&self) -> Result<SimConfig<f64>> {
        let y0 = match &self.sim.y0_coeffs {
            Some(coeffs) => InitialProfile::Coeffs(coeffs.clone()),
            None => match self.sim.y0.expect("resolved config") {
                ProfileName::FirstMode => InitialProfile::FirstMode,
                ProfileName::RandomUnit => InitialProfile::RandomUnit {
                    seed: self.sim.y0_seed.expect("resolved config"),
                },
                ProfileName::Bump => InitialProfile::Bump,
            },
        };
        Ok(SimConfig {
            domain: self.domain()?,
            m: self.model.modes,
            lambda: self.model.lambda,
            d_bound: self.model.disturbance_bound,
            sigma: self.sigma(),
            shift: self.model.shift,
            dt: self.sim.dt.expect("resolved config"),
            t_end: self.sim.t_end.expect("resolved config"),
            scheme: match self.sim.scheme.expect("resolved config") {
                SchemeName::ExponentialEuler => Scheme::ExponentialEuler,
                SchemeName::ImexEuler => Scheme::ImexEuler,
            },
            y0,
            disturbance: self.disturbance_spec()?,
            log_every: self.sim.log_every.expect("resolved config"),
            open_loop: self.sim.open_loop.expect("resolved config"),
        })
    }

    /// Cartesian product of the sweep lists, applied to this base
    /// configuration. Empty lists contribute the base value, so an empty
    /// sweep section yields exactly one cell.
    pub fn sweep_cells(&self) -> Result<Vec<ConfigFile>> {
        let lambdas: Vec<Option<f64>> = option_axis(&self.sweep.lambda);
        let sigmas: Vec<Option<f64>> = option_axis(&self.sweep.sigma);
        let bounds: Vec<Option<f64>> = option_axis(&self.sweep.disturbance_bound);
        let omegas: Vec<Option<&OmegaChoice>> = if self.sweep.omega.is_empty() {
            vec![None]
        } else {
            self.sweep.omega.iter().map(Some).collect()
        };

        let total = lambdas.len() * sigmas.len() * bounds.len() * omegas.len();
        const CELL_BUDGET: usize = 10_000;
        if total > CELL_BUDGET {
            return Err(CliError::Config(format!(
                "sweep spans {total} cells, above the budget of {CELL_BUDGET}"
            )));
        }

        let mut cells = Vec::with_capacity(total);
        for &lambda in &lambdas {
            for &sigma in &sigmas {
                for &bound in &bounds {
                    for &omega in &omegas {
                        let mut cell = self.clone();
                        cell.sweep = SweepSection::default();
                        if let Some(l) = lambda {
                            cell.model.lambda = l;
                            // rate-dependent defaults are recomputed per cell
                            if self.sim.dt.is_none() {
                                cell.sim.dt = None;
                            }
                            if self.sim.t_end.is_none() {
                                cell.sim.t_end = None;
                            }
                        }
                        if let Some(s) = sigma {
                            cell.model.sigma = Some(s);
                        }
                        if let Some(b) = bound {
                            cell.model.disturbance_bound = b;
                            cell.disturbance.amplitude = b;
                        }
                        if let Some(o) = omega {
                            cell.domain.omega_lo = o.lo.clone();
                            cell.domain.omega_hi = o.hi.clone();
                        }
                        cells.push(cell);
                    }
                }
            }
        }
        Ok(cells)
    }
}

fn option_axis(values: &[f64]) -> Vec<Option<f64>> {
    if values.is_empty() {
        vec![None]
    } else {
        values.iter().copied().map(Some).collect()
    }
}
