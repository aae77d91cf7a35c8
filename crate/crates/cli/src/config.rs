//! Scenario files (TOML). Matrices are row-major lists of rows. Regions are
//! numbered from 1 in the file, matching propositions `p1..pN`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use tubeplan::abstraction::AbstractionOptions;
use tubeplan::dynamics::{discretize_zoh, LtiModel};
use tubeplan::geometry::{Halfspace, Polytope, Workspace};
use tubeplan::runtime::{DisturbanceMode, DEFAULT_HORIZON};
use tubeplan::trajgen::TrajgenOptions;
use tubeplan::tubesynth::TubeOptions;

use crate::commands::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolytopeSpec {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Halfspaces {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    /// Planar convex hull of the points.
    Vertices {
        points: Vec<Vec<f64>>,
    },
    /// Regular polygon with a vertex on the positive first axis.
    Polygon {
        center: Vec<f64>,
        radius: f64,
        sides: usize,
    },
    /// Both representations, checked against each other.
    Both {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        vertices: Vec<Vec<f64>>,
    },
}

impl PolytopeSpec {
    pub fn build(&self, field: &str) -> Result<Polytope, CliError> {
        let err = |e: tubeplan::geometry::GeometryError| CliError::Validation(format!("{field}: {e}"));
        let halfspaces = |normals: &[Vec<f64>], offsets: &[f64]| -> Result<(usize, Vec<Halfspace>), CliError> {
            if normals.len() != offsets.len() || normals.is_empty() {
                return Err(CliError::Validation(format!("{field}: need one offset per normal")));
            }
            let dim = normals[0].len();
            Ok((dim, normals.iter().zip(offsets).map(|(a, b)| Halfspace::new(a.clone(), *b)).collect()))
        };
        match self {
            PolytopeSpec::Box { lo, hi } => Polytope::boxed(lo, hi).map_err(err),
            PolytopeSpec::Halfspaces { normals, offsets } => {
                let (dim, hs) = halfspaces(normals, offsets)?;
                let p = Polytope::from_halfspaces(dim, hs).map_err(err)?;
                if dim == 2 {
                    p.with_vertices().map_err(err)
                } else {
                    Ok(p)
                }
            }
            PolytopeSpec::Vertices { points } => Polytope::from_vertices_2d(points).map_err(err),
            PolytopeSpec::Polygon { center, radius, sides } => Polytope::regular_polygon(center, *radius, *sides).map_err(err),
            PolytopeSpec::Both { normals, offsets, vertices } => {
                let (dim, hs) = halfspaces(normals, offsets)?;
                Polytope::from_both(dim, hs, vertices.clone()).map_err(err)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    Continuous,
    Discrete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub kind: DynamicsKind,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    /// Required for continuous dynamics.
    pub sampling_period: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceSpec {
    pub bounding: PolytopeSpec,
    #[serde(default)]
    pub obstacles: Vec<PolytopeSpec>,
    pub regions: Vec<PolytopeSpec>,
    /// 1-based.
    pub init_region: usize,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_steps() -> usize {
    800
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeSpec {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub disturbance: DisturbanceMode,
    /// Defaults to the Chebyshev center of the initial region.
    pub initial_state: Option<Vec<f64>>,
}

impl Default for RuntimeSpec {
    fn default() -> Self {
        RuntimeSpec { horizon: DEFAULT_HORIZON, steps: 800, seeds: Vec::new(), disturbance: DisturbanceMode::Uniform, initial_state: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbstractionSpec {
    pub seed: u64,
    pub rrt_attempts: usize,
    pub multi_starts: usize,
    pub rrt_budget: usize,
    pub goal_bias: f64,
    pub input_resolution: usize,
    pub input_scale: f64,
    pub goal_margin: f64,
    pub clearance: f64,
    pub secondary_objective: bool,
}

impl Default for AbstractionSpec {
    fn default() -> Self {
        let a = AbstractionOptions::default();
        AbstractionSpec {
            seed: a.seed,
            rrt_attempts: a.rrt_attempts,
            multi_starts: a.multi_starts,
            rrt_budget: a.trajgen.budget,
            goal_bias: a.trajgen.goal_bias,
            input_resolution: a.trajgen.resolution,
            input_scale: a.trajgen.input_scale,
            goal_margin: a.trajgen.goal_margin,
            clearance: a.trajgen.clearance,
            secondary_objective: a.tubes.secondary_objective,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dynamics: DynamicsSpec,
    pub input_set: PolytopeSpec,
    pub disturbance_set: PolytopeSpec,
    /// Tube cross-section shape for every pair; defaults to each source
    /// region's own shape.
    pub tube_shape: Option<PolytopeSpec>,
    pub workspace: WorkspaceSpec,
    #[serde(default)]
    pub formulas: BTreeMap<String, String>,
    #[serde(default)]
    pub runtime: RuntimeSpec,
    #[serde(default)]
    pub abstraction: AbstractionSpec,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: LtiModel,
    pub workspace: Workspace,
    /// 0-based.
    pub init_region: usize,
    pub options: AbstractionOptions,
    pub initial_state: Vec<f64>,
}

fn matrix(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Validation(format!("{field}: expected a nonempty list of equal-length rows")));
    }
    Ok(DMatrix::from_row_iterator(r, c, rows.iter().flatten().copied()))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(self) -> Result<Scenario, CliError> {
        let a = matrix(&self.dynamics.a, "dynamics.a")?;
        let b = matrix(&self.dynamics.b, "dynamics.b")?;
        let (a, b) = match self.dynamics.kind {
            DynamicsKind::Discrete => (a, b),
            DynamicsKind::Continuous => {
                let h = self
                    .dynamics
                    .sampling_period
                    .ok_or_else(|| CliError::Validation("dynamics.sampling_period: required for continuous dynamics".into()))?;
                discretize_zoh(&a, &b, h).map_err(|e| CliError::Validation(format!("dynamics: {e}")))?
            }
        };
        let input = self.input_set.build("input_set")?;
        let disturbance = self.disturbance_set.build("disturbance_set")?;
        let model = LtiModel::new(a, b, input, disturbance).map_err(|e| CliError::Validation(format!("dynamics: {e}")))?;

        let ws_spec = &self.workspace;
        let bounding = ws_spec.bounding.build("workspace.bounding")?;
        let obstacles = ws_spec
            .obstacles
            .iter()
            .enumerate()
            .map(|(k, p)| p.build(&format!("workspace.obstacles[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let regions =
            ws_spec.regions.iter().enumerate().map(|(k, p)| p.build(&format!("workspace.regions[{k}]"))).collect::<Result<Vec<_>, _>>()?;
        let workspace = Workspace::new(bounding, obstacles, regions).map_err(|e| CliError::Validation(format!("workspace: {e}")))?;
        if workspace.dim() != model.state_dim() {
            return Err(CliError::Validation(format!(
                "workspace: dimension {} does not match the state dimension {}",
                workspace.dim(),
                model.state_dim()
            )));
        }
        let n = workspace.regions.len();
        if ws_spec.init_region == 0 || ws_spec.init_region > n {
            return Err(CliError::Validation(format!("workspace.init_region: {} is not in 1..={n}", ws_spec.init_region)));
        }
        let init_region = ws_spec.init_region - 1;
        let initial_state = match &self.runtime.initial_state {
            Some(x) => {
                if !workspace.regions[init_region].contains_point(x, 0.0) {
                    return Err(CliError::Validation("runtime.initial_state: not inside the initial region".into()));
                }
                x.clone()
            }
            None => workspace.region_centers[init_region].clone(),
        };
        for (name, text) in &self.formulas {
            tubeplan::ltl::parse_with_props(text, n).map_err(|e| CliError::Validation(format!("formulas.{name}: {e}")))?;
        }
        if self.runtime.horizon == 0 {
            return Err(CliError::Validation("runtime.horizon: must be at least 1".into()));
        }
        let shape = match &self.tube_shape {
            Some(spec) => Some(spec.build("tube_shape")?),
            None => None,
        };
        let ab = &self.abstraction;
        let options = AbstractionOptions {
            seed: ab.seed,
            rrt_attempts: ab.rrt_attempts,
            multi_starts: ab.multi_starts,
            shape,
            trajgen: TrajgenOptions {
                goal_bias: ab.goal_bias,
                budget: ab.rrt_budget,
                resolution: ab.input_resolution,
                input_scale: ab.input_scale,
                goal_margin: ab.goal_margin,
                clearance: ab.clearance,
            },
            tubes: TubeOptions { secondary_objective: ab.secondary_objective, ..TubeOptions::default() },
        };
        Ok(Scenario { config: self, model, workspace, init_region, options, initial_state })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        ScenarioConfig::load(path)?.validate()
    }

    pub fn formula(&self, name: &str) -> Result<(String, tubeplan::ltl::Formula), CliError> {
        let text = self.config.formulas.get(name).ok_or_else(|| CliError::Validation(format!("formulas.{name}: no such formula")))?;
        let f = tubeplan::ltl::parse_with_props(text, self.workspace.regions.len())
            .map_err(|e| CliError::Validation(format!("formulas.{name}: {e}")))?;
        Ok((text.clone(), f))
    }

    pub fn cache_key(&self) -> String {
        tubeplan::abstraction::cache_key(&self.model, &self.workspace, self.init_region, &self.options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case_study() -> ScenarioConfig {
        ScenarioConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/case_study.toml")).unwrap()
    }

    #[test]
    fn case_study_validates() {
        let s = case_study().validate().unwrap();
        assert_eq!(s.workspace.regions.len(), 4);
        assert_eq!(s.init_region, 1);
        assert_eq!(s.initial_state, vec![-4.0, -4.0]);
        assert_eq!(s.config.runtime.seeds.len(), 10);
        assert_eq!(s.model.disturbance_set.vertices().unwrap().len(), 8);
        // B = ∫ e^{Ac s} ds, so close to h·I
        assert!((s.model.b[(0, 0)] - 0.05).abs() < 1e-3);
        assert_eq!(s.formula("phi3").unwrap().0, "F p3 & F G p4");
        assert!(s.formula("phi9").is_err());
    }

    #[test]
    fn polytope_specs() {
        let tri = PolytopeSpec::Vertices { points: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.2, 0.2]] };
        assert_eq!(tri.build("t").unwrap().vertices().unwrap().len(), 3);
        let hs = PolytopeSpec::Halfspaces { normals: vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]], offsets: vec![0.0, 0.0, 1.0] };
        assert_eq!(hs.build("h").unwrap().vertices().unwrap().len(), 3);
        let short = PolytopeSpec::Halfspaces { normals: vec![vec![1.0, 0.0]], offsets: vec![] };
        assert!(matches!(short.build("s"), Err(CliError::Validation(m)) if m.starts_with("s:")));
        let oct = PolytopeSpec::Polygon { center: vec![0.0, 0.0], radius: 0.15, sides: 8 };
        assert!((oct.build("w").unwrap().support(&[1.0, 0.0]).unwrap() - 0.15).abs() < 1e-12);
        let bad_box = PolytopeSpec::Box { lo: vec![1.0], hi: vec![0.0] };
        assert!(bad_box.build("b").is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/case_study.toml")).unwrap();
        let err = ScenarioConfig::from_toml(&text.replace("horizon = 10", "horizon = 10\nhorizn = 3")).unwrap_err();
        assert!(err.to_string().contains("horizn"), "{err}");
    }

    #[test]
    fn initial_state_must_be_in_the_initial_region() {
        let mut c = case_study();
        c.runtime.initial_state = Some(vec![0.0, 3.0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn guide_example_validates() {
        let guide = include_str!("../../../book/src/cli.md");
        let start = guide.find("```toml\n").unwrap() + 8;
        let len = guide[start..].find("```").unwrap();
        let s = ScenarioConfig::from_toml(&guide[start..start + len]).unwrap().validate().unwrap();
        assert_eq!(s.workspace.regions.len(), 2);
        assert!(s.formula("shuttle").is_ok());
    }
}
