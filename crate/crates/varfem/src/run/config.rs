//! JSON experiment configuration.
//!
//! The schema is strict: unknown keys are rejected so that typos surface as
//! configuration errors instead of silently ignored settings.

use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub study: StudyConfig,
    #[serde(default)]
    pub canonical: CanonicalConfig,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.mesh.elements_t == 0 || self.mesh.elements_x == 0 {
            return Err("mesh element counts must be at least 1".into());
        }
        if !(self.mesh.t_range[1] - self.mesh.t_range[0] > 0.0)
            || !(self.mesh.x_range[1] - self.mesh.x_range[0] > 0.0)
        {
            return Err("mesh ranges must have positive length".into());
        }
        if self.problem.epsilon != 1 && self.problem.epsilon != -1 {
            return Err("epsilon must be +1 or -1".into());
        }
        if self.solver.tol <= 0.0 || self.solver.max_iter == 0 {
            return Err("solver tolerance and iteration budget must be positive".into());
        }
        if self.canonical.elements == 0 || self.canonical.steps == 0 {
            return Err("canonical simulation needs elements and steps".into());
        }
        if self.canonical.dt <= 0.0 {
            return Err("canonical time step must be positive".into());
        }
        if self.study.levels == 0 {
            return Err("study needs at least one level".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: Family,
    #[serde(default = "default_epsilon")]
    pub epsilon: i8,
    #[serde(default)]
    pub nonlinearity: NonlinearityConfig,
}

fn default_epsilon() -> i8 {
    -1
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Scalar wave/Poisson family with the configured nonlinearity.
    NonlinearWave,
    /// Massless scalar with the shift generator attached.
    ShiftWave,
    /// Two-component rotation-invariant family with the SO(2) generator.
    So2Pair,
    /// The SO(2) family with the symmetry deliberately broken (negative
    /// control for conservation checks).
    So2PairBroken,
    /// Elliptic problem forced so that `sin(pi t) sin(pi x)` is exact.
    ManufacturedPoisson,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct NonlinearityConfig {
    #[serde(default)]
    pub kind: NonlinearityKind,
    #[serde(default = "default_degree")]
    pub degree: u32,
    #[serde(default = "default_coefficient")]
    pub coefficient: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    #[default]
    Zero,
    Power,
}

fn default_degree() -> u32 {
    4
}

fn default_coefficient() -> f64 {
    1.0
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            degree: default_degree(),
            coefficient: default_coefficient(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub t_range: [f64; 2],
    pub x_range: [f64; 2],
    pub elements_t: usize,
    pub elements_x: usize,
    #[serde(default)]
    pub periodic_x: bool,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct BoundaryConfig {
    #[serde(default)]
    pub kind: BoundaryKind,
    #[serde(default)]
    pub value: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    #[default]
    Zero,
    Constant,
    /// `amplitude * sin(pi (x - t))` on every component (second components
    /// get a cosine variant).
    TravelingWave,
    /// `amplitude * sin(pi t) sin(pi x)` plus a component offset.
    StandingWave,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            kind: BoundaryKind::Zero,
            value: 0.0,
            amplitude: default_amplitude(),
        }
    }
}

impl BoundaryConfig {
    /// Trace value at a boundary point for a component.
    pub fn trace(&self, t: f64, x: f64, component: usize) -> f64 {
        use std::f64::consts::PI;
        match self.kind {
            BoundaryKind::Zero => 0.0,
            BoundaryKind::Constant => self.value,
            BoundaryKind::TravelingWave => {
                if component == 0 {
                    self.amplitude * (PI * (x - t)).sin()
                } else {
                    0.6 * self.amplitude * (PI * (x - t)).cos()
                }
            }
            BoundaryKind::StandingWave => {
                let base = (PI * t).sin() * (PI * x).sin();
                if component == 0 {
                    self.amplitude * base + self.value
                } else {
                    -0.5 * self.amplitude * base + self.value
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    50
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub t0: usize,
    pub x0: usize,
    pub t_elements: usize,
    pub x_elements: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Element-index rectangles; empty means a default interior block plus
    /// the full domain.
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
    /// Check selection; empty means every check applicable to the family.
    #[serde(default)]
    pub checks: Vec<CheckName>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            regions: Vec::new(),
            checks: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Stencil,
    Cochain,
    Naturality,
    LocalGlobal,
    CartanCrossValidation,
    Multisymplectic,
    Noether,
    Equivariance,
    TensorProduct,
    QuadratureOrdering,
}

impl CheckName {
    pub fn all() -> Vec<CheckName> {
        use CheckName::*;
        vec![
            Stencil,
            Cochain,
            Naturality,
            LocalGlobal,
            CartanCrossValidation,
            Multisymplectic,
            Noether,
            Equivariance,
            TensorProduct,
            QuadratureOrdering,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            CheckName::Stencil => "stencil",
            CheckName::Cochain => "cochain",
            CheckName::Naturality => "naturality",
            CheckName::LocalGlobal => "local_global",
            CheckName::CartanCrossValidation => "cartan_cross_validation",
            CheckName::Multisymplectic => "multisymplectic",
            CheckName::Noether => "noether",
            CheckName::Equivariance => "equivariance",
            CheckName::TensorProduct => "tensor_product",
            CheckName::QuadratureOrdering => "quadrature_ordering",
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_coarsest")]
    pub coarsest_t: usize,
    #[serde(default = "default_coarsest")]
    pub coarsest_x: usize,
    /// Study selection; empty means every study applicable to the family.
    #[serde(default)]
    pub targets: Vec<StudyTarget>,
}

fn default_levels() -> usize {
    3
}

fn default_coarsest() -> usize {
    8
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            levels: default_levels(),
            coarsest_t: default_coarsest(),
            coarsest_x: default_coarsest(),
            targets: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StudyTarget {
    ManufacturedL2,
    NoetherCurrent,
    CartanRing,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalConfig {
    #[serde(default = "default_canonical_elements")]
    pub elements: usize,
    #[serde(default = "default_true")]
    pub periodic: bool,
    #[serde(default = "default_x_range")]
    pub x_range: [f64; 2],
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub stepper: StepperConfig,
    #[serde(default = "default_mode")]
    pub mode: u32,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_velocity_offset")]
    pub velocity_offset: f64,
}

fn default_canonical_elements() -> usize {
    64
}

fn default_true() -> bool {
    true
}

fn default_x_range() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_dt() -> f64 {
    0.005
}

fn default_steps() -> usize {
    1000
}

fn default_mode() -> u32 {
    1
}

fn default_velocity_offset() -> f64 {
    0.3
}

impl Default for CanonicalConfig {
    fn default() -> Self {
        Self {
            elements: default_canonical_elements(),
            periodic: default_true(),
            x_range: default_x_range(),
            dt: default_dt(),
            steps: default_steps(),
            stepper: StepperConfig::Midpoint,
            mode: default_mode(),
            amplitude: default_amplitude(),
            velocity_offset: default_velocity_offset(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StepperConfig {
    #[default]
    Midpoint,
    ExplicitEuler,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> serde_json::Value {
        serde_json::json!({
            "problem": {"family": "shift_wave"},
            "mesh": {"t_range": [0.0, 1.0], "x_range": [0.0, 1.0],
                     "elements_t": 4, "elements_x": 4}
        })
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config: ExperimentConfig = serde_json::from_value(minimal_json()).unwrap();
        config.validate().unwrap();
        assert_eq!(config.problem.epsilon, -1);
        assert_eq!(config.solver.tol, 1e-10);
        assert_eq!(config.seed, 0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v = minimal_json();
        v["surprise"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
    }

    #[test]
    fn zero_elements_rejected() {
        let mut v = minimal_json();
        v["mesh"]["elements_t"] = serde_json::json!(0);
        let config: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(config.validate().is_err());
    }
}
