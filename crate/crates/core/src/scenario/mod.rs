//! JSON scenario files: ambient model, immersion preset, grid, flow settings
//! and which checks to run. Every field has an explicit default that shows up
//! in the resolved echo written next to the outputs.

use std::path::Path;

use nalgebra::{SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambient::{AlmostKahlerPair, AmbientError, AmbientModel, FlatSpace, KahlerPotential, Profile, DEFAULT_AMBIENT_STEP};
use crate::fields::TrigField;
use crate::flows::krf::KrfPotential;
use crate::flows::{AmbientMode, FlowConfig, FlowKind};
use crate::grid::{GridError, TorusGrid};
use crate::immersion::{presets, Immersion};
use crate::linalg::Vector;

mod report;
mod run;

pub use report::{check_suite, CheckItem, Report};
pub use run::{angle_table, run_flow, str_solve, symbol_suite, variation_suite, AngleTable, FlowOutput, StrSolveRequest, SymbolSuite, VariationSuite};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown scenario `{0}` (neither a file nor a preset)")]
    Unknown(String),
    #[error(transparent)]
    Ambient(#[from] AmbientError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn zero4() -> [f64; 4] {
    [0.0; 4]
}
fn one() -> f64 {
    1.0
}
fn unit_radii() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_delta() -> f64 {
    0.2
}
fn gaussian() -> Profile {
    Profile::Gaussian
}
fn ambient_step() -> f64 {
    DEFAULT_AMBIENT_STEP
}
fn identity2() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

/// Ambient model descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmbientSpec {
    /// Flat `C^2`, or the flat torus `C^2 / 2πZ^4` when `periodic`.
    Flat {
        #[serde(default)]
        periodic: bool,
    },
    /// `-log(1 - |z|²)` on the unit ball.
    ComplexHyperbolic,
    /// `log(1 + |z|²)` on the affine chart.
    FubiniStudy,
    /// `|z|²/2 + ε F(|x - c|²/w²)`.
    FlatPlusBump {
        epsilon: f64,
        center: [f64; 4],
        width: f64,
        #[serde(default = "gaussian")]
        profile: Profile,
    },
    /// Standard `ω` with `J` retracted from a bumped reference metric.
    AlmostKahler {
        epsilon: f64,
        center: [f64; 4],
        width: f64,
        #[serde(default = "ambient_step")]
        h_amb: f64,
    },
}

impl AmbientSpec {
    pub fn build(&self) -> Result<AmbientModel<4>, ScenarioError> {
        Ok(match self {
            Self::Flat { periodic } => AmbientModel::Flat(FlatSpace { periodic: *periodic }),
            Self::ComplexHyperbolic => AmbientModel::Potential(KahlerPotential::complex_hyperbolic()),
            Self::FubiniStudy => AmbientModel::Potential(KahlerPotential::fubini_study()),
            Self::FlatPlusBump { epsilon, center, width, profile } => {
                let mut p = KahlerPotential::flat_plus_gaussian(*epsilon, Vector::from(*center), *width);
                p.terms[1].profile = *profile;
                AmbientModel::Potential(p)
            }
            Self::AlmostKahler { epsilon, center, width, h_amb } => AmbientModel::AlmostKahler(
                AlmostKahlerPair::new(*epsilon, Vector::from(*center), *width)?.with_step(*h_amb),
            ),
        })
    }

    /// The potential, for models that have one.
    pub fn potential(&self) -> Option<KahlerPotential<4>> {
        match self.build() {
            Ok(AmbientModel::Potential(p)) => Some(p),
            _ => None,
        }
    }
}

/// One `cos`/`sin` pair of a trigonometric height function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub mode: [i64; 2],
    #[serde(default)]
    pub cos: [f64; 2],
    #[serde(default)]
    pub sin: [f64; 2],
}

/// Periodic height `u` of a graph torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HeightSpec {
    #[default]
    Zero,
    Trig { terms: Vec<TrigTerm> },
    Random { seed: u64, max_mode: i64, amplitude: f64 },
}

impl HeightSpec {
    pub fn field(&self) -> TrigField<2, 2> {
        match self {
            Self::Zero => TrigField::zero(),
            Self::Trig { terms } => TrigField::from_terms(
                terms.iter().map(|t| (t.mode, SVector::from(t.cos), SVector::from(t.sin))).collect(),
            ),
            Self::Random { seed, max_mode, amplitude } => {
                TrigField::random_mean_free(&mut ChaCha8Rng::seed_from_u64(*seed), *max_mode, *amplitude)
            }
        }
    }
}

/// Immersed torus preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ImmersionSpec {
    /// `z_k = c_k + r_k e^{iφ_k}`.
    Clifford {
        #[serde(default = "unit_radii")]
        radii: [f64; 2],
        #[serde(default = "zero4")]
        center: [f64; 4],
    },
    /// `(c_1 + r e^{iφ_1}, c_2 + r(e^{iφ_2} + δ e^{iφ_1}))`.
    Sheared {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "zero4")]
        center: [f64; 4],
    },
    /// `x = φ`, `y = 0` in the flat torus.
    Straight,
    /// `x = φ`, `y = slope φ + u(φ)` in the flat torus.
    Graph {
        #[serde(default = "identity2")]
        slope: [[f64; 2]; 2],
        #[serde(default)]
        height: HeightSpec,
    },
}

impl ImmersionSpec {
    pub fn build(&self, grid: TorusGrid<2>) -> Immersion<2, 4> {
        match self {
            Self::Clifford { radii, center } => presets::product_circles(grid, *radii, Vector::from(*center)),
            Self::Sheared { radius, delta, center } => presets::sheared(grid, *radius, *delta, Vector::from(*center)),
            Self::Straight => presets::straight(grid),
            Self::Graph { slope, height } => {
                let slope = SMatrix::<f64, 2, 2>::from_fn(|i, j| slope[i][j]);
                let field = height.field();
                presets::graph(grid, slope, move |p| field.eval(p).into())
            }
        }
    }
}

/// Potential box for the coupled Kähler-Ricci flow, centred on the bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KrfBoxSpec {
    /// Nodes per axis.
    pub nodes: usize,
    /// Half the box side, in units of the bump width.
    pub half_width: f64,
    /// Radius of the evolving region, in units of the bump width.
    pub active_radius: f64,
}

impl Default for KrfBoxSpec {
    fn default() -> Self {
        Self { nodes: 24, half_width: 3.5, active_radius: 3.4 }
    }
}

/// Which parts of the residual suite to run; inapplicable checks are skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckToggles {
    pub frames: bool,
    pub identities: bool,
    pub torsion: bool,
    pub lagrangian: bool,
    pub symbol: bool,
    pub calabi_yau: bool,
    pub einstein: bool,
}

impl Default for CheckToggles {
    fn default() -> Self {
        Self { frames: true, identities: true, torsion: true, lagrangian: true, symbol: true, calabi_yau: true, einstein: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: String,
    /// Write a JSON snapshot of the node positions at every flow record.
    pub snapshots: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: "out".into(), snapshots: false }
    }
}

fn default_resolution() -> usize {
    32
}
fn default_covector() -> [f64; 2] {
    [1.0, 0.5]
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub ambient: AmbientSpec,
    pub immersion: ImmersionSpec,
    /// Nodes per parameter axis.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub krf: KrfBoxSpec,
    #[serde(default)]
    pub checks: CheckToggles,
    #[serde(default)]
    pub output: OutputSpec,
    /// Seed for random sampling (frames, probes).
    #[serde(default)]
    pub seed: u64,
    /// Phase of the holomorphic volume form in flat scenarios.
    #[serde(default)]
    pub calabi_yau_phase: f64,
    /// Covector used by the symbol report.
    #[serde(default = "default_covector")]
    pub symbol_covector: [f64; 2],
}

/// Names accepted by [`Scenario::preset`].
pub const PRESETS: [&str; 9] = [
    "flat-clifford",
    "flat-sheared",
    "ch-sheared",
    "fs-sheared",
    "straight-torus",
    "graph-torus",
    "ak-sheared",
    "ak-clifford",
    "krf",
];

impl Scenario {
    fn with(name: &str, ambient: AmbientSpec, immersion: ImmersionSpec) -> Self {
        Self {
            name: name.into(),
            ambient,
            immersion,
            resolution: default_resolution(),
            flow: FlowConfig::default(),
            krf: KrfBoxSpec::default(),
            checks: CheckToggles::default(),
            output: OutputSpec::default(),
            seed: 0,
            calabi_yau_phase: 0.0,
            symbol_covector: default_covector(),
        }
    }

    /// Built-in scenarios.
    pub fn preset(name: &str) -> Option<Self> {
        let flat = AmbientSpec::Flat { periodic: false };
        let flat_torus = AmbientSpec::Flat { periodic: true };
        let ak = AmbientSpec::AlmostKahler { epsilon: 0.1, center: [1.0, 0.0, 1.0, 0.0], width: 0.7, h_amb: DEFAULT_AMBIENT_STEP };
        let sheared = |radius: f64| ImmersionSpec::Sheared { radius, delta: 0.2, center: zero4() };
        let clifford = ImmersionSpec::Clifford { radii: unit_radii(), center: zero4() };
        let mut s = match name {
            "flat-clifford" => Self::with(name, flat, clifford),
            "flat-sheared" => Self::with(name, flat, sheared(1.0)),
            "ch-sheared" | "ch-torus" => {
                let mut s = Self::with("ch-sheared", AmbientSpec::ComplexHyperbolic, sheared(0.5));
                s.flow.ambient_mode = AmbientMode::KeNormalized;
                s
            }
            "fs-sheared" | "fs-torus" => {
                let mut s = Self::with("fs-sheared", AmbientSpec::FubiniStudy, sheared(0.5));
                s.flow.ambient_mode = AmbientMode::KeNormalized;
                s
            }
            "straight-torus" => Self::with(name, flat_torus, ImmersionSpec::Straight),
            "graph-torus" => Self::with(
                name,
                flat_torus,
                ImmersionSpec::Graph {
                    slope: [[0.0, 0.0], [0.0, 0.0]],
                    height: HeightSpec::Trig {
                        terms: vec![TrigTerm { mode: [1, 1], cos: [0.1, 0.0], sin: [0.0, 0.15] }],
                    },
                },
            ),
            "ak-sheared" => Self::with(name, ak, sheared(1.0)),
            "ak-clifford" => Self::with(name, ak, clifford),
            "krf" => {
                let mut s = Self::with(
                    name,
                    AmbientSpec::FlatPlusBump { epsilon: 0.05, center: [1.0, 0.0, 1.2, 0.0], width: 0.6, profile: Profile::Gaussian },
                    sheared(1.0),
                );
                s.flow.ambient_mode = AmbientMode::KrfPotential;
                s.flow.steps = 50;
                s
            }
            _ => return None,
        };
        if matches!(name, "ch-sheared" | "ch-torus" | "fs-sheared" | "fs-torus") {
            s.flow.dt = 1e-3;
            s.flow.steps = 100;
        }
        Some(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let s: Self = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    /// Reads a scenario file, falling back to the preset of that name.
    pub fn load(source: &str) -> Result<Self, ScenarioError> {
        let path = Path::new(source);
        if path.exists() {
            return Self::from_json(&std::fs::read_to_string(path)?);
        }
        Self::preset(source).ok_or_else(|| ScenarioError::Unknown(source.into()))
    }

    /// Pretty JSON with every default spelled out.
    pub fn resolved_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |field, reason: &str| Err(ScenarioError::Invalid { field, reason: reason.into() });
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if self.resolution < 16 {
            return invalid("resolution", "needs at least 16 nodes per axis");
        }
        if !(self.flow.dt.is_finite() && self.flow.dt > 0.0) {
            return invalid("flow.dt", "must be positive and finite");
        }
        if !(self.flow.margin_min.is_finite() && self.flow.margin_min > 0.0) {
            return invalid("flow.margin_min", "must be positive and finite");
        }
        if !finite(&[self.calabi_yau_phase]) || !finite(&self.symbol_covector) {
            return invalid("calabi_yau_phase", "must be finite");
        }
        if let AmbientSpec::FlatPlusBump { epsilon, center, width, .. } | AmbientSpec::AlmostKahler { epsilon, center, width, .. } =
            &self.ambient
        {
            if !finite(&[*epsilon, *width]) || !finite(center) || *width <= 0.0 {
                return invalid("ambient", "bump parameters must be finite with positive width");
            }
        }
        if let AmbientSpec::AlmostKahler { h_amb, .. } = &self.ambient {
            if !(h_amb.is_finite() && *h_amb > 0.0) {
                return invalid("ambient.h_amb", "must be positive and finite");
            }
        }
        let ok = match &self.immersion {
            ImmersionSpec::Clifford { radii, center } => finite(radii) && finite(center) && radii.iter().all(|r| *r > 0.0),
            ImmersionSpec::Sheared { radius, delta, center } => finite(&[*radius, *delta]) && finite(center) && *radius > 0.0,
            ImmersionSpec::Straight => true,
            ImmersionSpec::Graph { slope, .. } => finite(&slope.concat()),
        };
        if !ok {
            return invalid("immersion", "parameters must be finite with positive radii");
        }
        if self.flow.ambient_mode == AmbientMode::KrfPotential {
            if !matches!(self.ambient, AmbientSpec::FlatPlusBump { .. }) {
                return invalid("flow.ambient_mode", "krf_potential needs a flat-plus-bump ambient");
            }
            if self.krf.nodes < 6 || !(self.krf.active_radius < self.krf.half_width) {
                return invalid("krf", "needs at least 6 nodes and active_radius < half_width");
            }
        }
        if self.flow.kind != FlowKind::Maslov && self.flow.ambient_mode == AmbientMode::KeNormalized && self.ambient.potential().is_none() {
            return invalid("flow.ambient_mode", "ke_normalized needs a Kähler potential");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid<2>, ScenarioError> {
        Ok(TorusGrid::uniform(self.resolution)?)
    }

    pub fn immersion(&self) -> Result<Immersion<2, 4>, ScenarioError> {
        Ok(self.immersion.build(self.grid()?))
    }

    pub fn model(&self) -> Result<AmbientModel<4>, ScenarioError> {
        self.ambient.build()
    }

    /// The evolving potential of a `krf_potential` run.
    pub fn krf_potential(&self) -> Option<KrfPotential<4>> {
        let AmbientSpec::FlatPlusBump { center, width, .. } = &self.ambient else {
            return None;
        };
        let base = self.ambient.potential()?;
        let c = Vector::from(*center);
        Some(KrfPotential::new(base, c, self.krf.half_width * width, self.krf.nodes, self.krf.active_radius * width))
    }

    /// Same scenario at another resolution.
    pub fn at_resolution(&self, resolution: usize) -> Self {
        Self { resolution, ..self.clone() }
    }
}
