//! JSON experiment configuration.
//!
//! A config file holds either one experiment object or
//! `{"experiments": [ … ]}`. Unknown fields are rejected; missing optional
//! fields take the defaults below.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operators::{
    from_nonexpansive, scaled_negation, Map, NonexpansiveMap, PseudocontractionInstance, ValidationBudget,
};
use crate::rates::{RateVariant, ScheduleKind, StepSchedule};
use crate::spaces::{Modulus, Space, Vector};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub space: SpaceSpec,
    pub operator: OperatorSpec,
    pub schedule: ScheduleSpec,
    pub x0: StartSpec,
    #[serde(default)]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_rates")]
    pub rates: Vec<RateVariant>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub seed: u64,
    /// Probe budget for the sampled moduli.
    #[serde(default = "default_probes")]
    pub probes: usize,
    /// Distance bound to the fixed point; defaults to `‖x₀ − p‖` rounded up.
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub certify: CertifySpec,
    #[serde(default)]
    pub moduli: ModuliSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// `{"experiments": [...]}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub experiments: Vec<ExperimentConfig>,
}

fn default_name() -> String {
    "experiment".to_owned()
}

fn default_rates() -> Vec<RateVariant> {
    vec![RateVariant::H3, RateVariant::H4]
}

fn default_n_max() -> usize {
    10_000
}

fn default_probes() -> usize {
    10_000
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Hilbert {
        dim: usize,
    },
    Lp {
        dim: usize,
        p: f64,
        #[serde(default)]
        c: Option<f64>,
        #[serde(default)]
        d: Option<f64>,
        #[serde(default)]
        eta: Option<Modulus>,
    },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<Space> {
        match self {
            SpaceSpec::Hilbert { dim } => Space::hilbert(*dim),
            SpaceSpec::Lp { dim, p, c, d, eta } => {
                let mut s = Space::lp(*dim, *p)?;
                if let Some(c) = c {
                    s = s.with_c(*c)?;
                }
                if let Some(d) = d {
                    s = s.with_d(*d)?;
                }
                if let Some(eta) = eta {
                    s = s.with_eta(*eta);
                }
                Ok(s)
            }
        }
    }
}

/// Maps with a closed form, usable as nonexpansive inputs or custom
/// operators.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `x ↦ −c·x`.
    ScaledNegation {
        c: f64,
    },
    /// Euclidean projection onto the ball of `radius` at the origin.
    BallProjection {
        radius: f64,
    },
    Constant {
        point: Vec<f64>,
    },
    /// `x ↦ A·x`, `A` given by rows.
    Linear {
        matrix: Vec<Vec<f64>>,
    },
}

impl MapSpec {
    fn build(&self, dim: usize) -> Result<NonexpansiveMap> {
        match self {
            MapSpec::ScaledNegation { c } => Ok(NonexpansiveMap::new(Map::scaled_negation(*c), Vector::zeros(dim))),
            MapSpec::BallProjection { radius } => Ok(NonexpansiveMap::ball_projection(dim, *radius)),
            MapSpec::Constant { point } => Ok(NonexpansiveMap::constant(Vector::new(point.clone())?)),
            MapSpec::Linear { matrix } => NonexpansiveMap::linear(matrix.clone()),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    ScaledNegation {
        c: f64,
    },
    FromNonexpansive {
        map: MapSpec,
        s: f64,
        #[serde(default)]
        validation_pairs: Option<usize>,
    },
    /// Any map; `k` is validated when given and found by bisection otherwise.
    Custom {
        map: MapSpec,
        #[serde(default)]
        fixed_point: Option<Vec<f64>>,
        #[serde(default)]
        k: Option<f64>,
        #[serde(default)]
        validation_pairs: Option<usize>,
    },
}

impl OperatorSpec {
    pub fn build(&self, space: &Space, seed: u64, tolerance: f64) -> Result<PseudocontractionInstance> {
        let budget = |pairs: &Option<usize>| ValidationBudget {
            pairs: pairs.unwrap_or(10_000),
            seed,
            tolerance,
            ..ValidationBudget::default()
        };
        match self {
            OperatorSpec::ScaledNegation { c } => scaled_negation(*c, space),
            OperatorSpec::FromNonexpansive {
                map,
                s,
                validation_pairs,
            } => from_nonexpansive(&map.build(space.dim())?, *s, space, &budget(validation_pairs)),
            OperatorSpec::Custom {
                map,
                fixed_point,
                k,
                validation_pairs,
            } => {
                let n = map.build(space.dim())?;
                let p = match fixed_point {
                    Some(p) => Vector::new(p.clone())?,
                    None => n.fixed_point.clone(),
                };
                let b = budget(validation_pairs);
                let label = format!("custom({})", n.map.label());
                match k {
                    Some(k) => PseudocontractionInstance::new(space.clone(), n.map, *k, p, label, &b),
                    None => PseudocontractionInstance::with_certified_k(space.clone(), n.map, p, label, &b),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant {
        a: f64,
        #[serde(default)]
        k: Option<f64>,
        #[serde(default)]
        d: Option<f64>,
    },
    HarmonicCapped {
        a: f64,
        cap: f64,
        #[serde(default)]
        k: Option<f64>,
        #[serde(default)]
        d: Option<f64>,
    },
}

impl ScheduleSpec {
    /// Strict schedule; `k`/`d` default to the operator's and the space's.
    pub fn build(&self, instance: &PseudocontractionInstance) -> Result<StepSchedule> {
        let (kind, k, d) = match *self {
            ScheduleSpec::Constant { a, k, d } => (ScheduleKind::Constant { a }, k, d),
            ScheduleSpec::HarmonicCapped { a, cap, k, d } => (ScheduleKind::HarmonicCapped { a, cap }, k, d),
        };
        StepSchedule::strict(kind, k.unwrap_or(instance.k()), d.unwrap_or(instance.space().d()))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum StartSpec {
    Literal(Vec<f64>),
    Random { random: RandomStart },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStart {
    pub radius: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    #[serde(default = "default_check_budget")]
    pub check_budget: usize,
    #[serde(default = "default_extension_cap")]
    pub extension_cap: usize,
    #[serde(default)]
    pub exhaustive: bool,
}

fn default_check_budget() -> usize {
    16
}

fn default_extension_cap() -> usize {
    10_000_000
}

impl Default for CertifySpec {
    fn default() -> Self {
        CertifySpec {
            check_budget: default_check_budget(),
            extension_cap: default_extension_cap(),
            exhaustive: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModuliSpec {
    pub tau_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Number of seeded base points `x` for the `β*` grid.
    pub beta_points: usize,
    pub lemma1_pairs: usize,
    pub alpha_grid_step: f64,
    pub lindenstrauss_grid_step: f64,
}

impl Default for ModuliSpec {
    fn default() -> Self {
        ModuliSpec {
            tau_grid: vec![0.1, 0.5, 1.0],
            eps_grid: vec![0.5, 1.0, 1.5, 2.0],
            t_grid: vec![0.0, 0.01, 0.1, 0.5, 1.0],
            beta_points: 3,
            lemma1_pairs: 100_000,
            alpha_grid_step: 1e-5,
            lindenstrauss_grid_step: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub trajectory: String,
    pub certificates: String,
    pub moduli: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            trajectory: "trajectory.csv".to_owned(),
            certificates: "certificates.json".to_owned(),
            moduli: "moduli.json".to_owned(),
        }
    }
}
