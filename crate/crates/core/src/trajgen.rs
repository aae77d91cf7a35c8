//! Nominal trajectories from a region's Chebyshev center into another region,
//! grown by an RRT over the disturbance-free dynamics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::LtiModel;
use crate::geometry::{GeometryError, Halfspace, Polytope, Workspace, GEO_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajgenError {
    #[error("source and target regions coincide ({0})")]
    SameRegion(usize),
    #[error("region index {0} out of range")]
    BadRegion(usize),
    #[error("start point of region {0} is not in the corridor")]
    StartOutside(usize),
    #[error("node budget {0} exhausted")]
    BudgetExhausted(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajgenOptions {
    pub goal_bias: f64,
    /// Maximum number of tree nodes.
    pub budget: usize,
    /// Input grid points per axis.
    pub resolution: usize,
    /// Candidate inputs are drawn from `input_scale·𝒰`, leaving the rest of
    /// the input set to the tube controller.
    pub input_scale: f64,
    /// The tree stops once a node is this deep inside the target region.
    pub goal_margin: f64,
    /// Nodes keep at least this distance from obstacles, other regions and
    /// the bounding set.
    pub clearance: f64,
}

impl Default for TrajgenOptions {
    fn default() -> Self {
        TrajgenOptions { goal_bias: 0.1, budget: 20_000, resolution: 5, input_scale: 1.0, goal_margin: 0.0, clearance: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NominalTrajectory {
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
}

impl NominalTrajectory {
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }
}

/// Grid of `resolution` points per axis over the bounding box of `scale·𝒰`,
/// filtered to `scale·𝒰`, plus the origin. Sorted and deduplicated.
pub fn candidate_inputs(input_set: &Polytope, resolution: usize, scale: f64) -> Result<Vec<Vec<f64>>, GeometryError> {
    let r = resolution.max(2);
    let (lo, hi) = input_set.bounding_box()?;
    let m = lo.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; m];
    loop {
        let u: Vec<f64> = (0..m).map(|k| scale * (lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / (r - 1) as f64)).collect();
        let scaled_ok = input_set.halfspaces().iter().all(|h| h.eval(&u) <= GEO_TOL + (scale - 1.0) * h.offset);
        if scaled_ok {
            out.push(u);
        }
        let mut k = 0;
        loop {
            if k == m {
                out.push(vec![0.0; m]);
                out.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
                out.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < r {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Corridor test with an extra clearance: at least `clearance` outside every
/// obstacle and non-endpoint region, and at least `clearance` inside the
/// bounding set.
fn clear_of(ws: &Workspace, x: &[f64], i: usize, j: usize, clearance: f64) -> bool {
    if !ws.in_corridor(x, i, j) {
        return false;
    }
    if clearance <= 0.0 {
        return true;
    }
    if ws.bounding.margin(x) < clearance {
        return false;
    }
    let outside = |p: &Polytope| p.halfspaces().iter().map(|h| h.eval(x)).fold(f64::NEG_INFINITY, f64::max) >= clearance;
    ws.obstacles.iter().all(outside) && ws.regions.iter().enumerate().all(|(n, r)| n == i || n == j || outside(r))
}

/// RRT from the Chebyshev center of region `i` into region `j`, staying in
/// `𝒳_ij` at every sample instant.
pub fn plan_nominal(
    model: &LtiModel,
    ws: &Workspace,
    i: usize,
    j: usize,
    seed: u64,
    opts: &TrajgenOptions,
) -> Result<NominalTrajectory, TrajgenError> {
    let start = ws.region_centers.get(i).ok_or(TrajgenError::BadRegion(i))?.clone();
    plan_nominal_from(model, ws, i, j, &start, seed, opts)
}

/// Same as [`plan_nominal`] from an arbitrary start point in region `i`.
pub fn plan_nominal_from(
    model: &LtiModel,
    ws: &Workspace,
    i: usize,
    j: usize,
    start: &[f64],
    seed: u64,
    opts: &TrajgenOptions,
) -> Result<NominalTrajectory, TrajgenError> {
    if i == j {
        return Err(TrajgenError::SameRegion(i));
    }
    let n_regions = ws.regions.len();
    if i >= n_regions {
        return Err(TrajgenError::BadRegion(i));
    }
    if j >= n_regions {
        return Err(TrajgenError::BadRegion(j));
    }
    let start = start.to_vec();
    if !ws.in_corridor(&start, i, j) || !ws.regions[i].contains_point(&start, GEO_TOL) {
        return Err(TrajgenError::StartOutside(i));
    }
    let goal_set = shrink(&ws.regions[j], opts.goal_margin)?;
    let goal_center = ws.region_centers[j].clone();
    let inputs = candidate_inputs(&model.input_set, opts.resolution, opts.input_scale)?;
    let (lo, hi) = ws.bounding.bounding_box()?;
    let n = start.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<Vec<f64>> = vec![start];
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX)];
    // Image of each candidate input, cached per node on demand.
    let b_images: Vec<Vec<f64>> = inputs.iter().map(|u| model.nominal(&vec![0.0; n], u)).collect();

    while nodes.len() < opts.budget {
        let sample: Vec<f64> =
            if rng.gen::<f64>() < opts.goal_bias { goal_center.clone() } else { (0..n).map(|k| rng.gen_range(lo[k]..=hi[k])).collect() };
        let nearest = nodes
            .iter()
            .enumerate()
            .map(|(idx, x)| (idx, sq_dist(x, &sample)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(idx, _)| idx)
            .expect("tree is never empty");
        let drift = model.nominal(&nodes[nearest], &vec![0.0; inputs[0].len()]);
        let best = b_images
            .iter()
            .enumerate()
            .map(|(k, bu)| {
                let next: Vec<f64> = drift.iter().zip(bu).map(|(a, b)| a + b).collect();
                (k, sq_dist(&next, &sample), next)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("candidate input set is never empty");
        let (k, _, next) = best;
        if !clear_of(ws, &next, i, j, opts.clearance) {
            continue;
        }
        nodes.push(next);
        parent.push((nearest, k));
        let last = nodes.len() - 1;
        if goal_set.contains_point(&nodes[last], 0.0) {
            let mut states = Vec::new();
            let mut controls = Vec::new();
            let mut at = last;
            while at != 0 {
                let (p, u) = parent[at];
                states.push(nodes[at].clone());
                controls.push(inputs[u].clone());
                at = p;
            }
            states.push(nodes[0].clone());
            states.reverse();
            controls.reverse();
            return Ok(NominalTrajectory { states, inputs: controls });
        }
    }
    Err(TrajgenError::BudgetExhausted(opts.budget))
}

fn shrink(p: &Polytope, margin: f64) -> Result<Polytope, GeometryError> {
    if margin <= 0.0 {
        return Ok(p.clone());
    }
    let hs: Vec<Halfspace> = p.halfspaces().iter().map(|h| Halfspace::new(h.normal.clone(), h.offset - margin)).collect();
    let shrunk = Polytope::from_halfspaces(p.dim(), hs)?;
    if shrunk.is_empty()? {
        Ok(p.clone())
    } else {
        Ok(shrunk)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Post-hoc check of every trajectory invariant; returns the first violation.
pub fn check_nominal(model: &LtiModel, ws: &Workspace, i: usize, j: usize, traj: &NominalTrajectory) -> Result<(), String> {
    let states = &traj.states;
    if states.len() != traj.inputs.len() + 1 {
        return Err(format!("{} states for {} inputs", states.len(), traj.inputs.len()));
    }
    if sq_dist(&states[0], &ws.region_centers[i]) > 0.0 {
        return Err("trajectory does not start at the region center".into());
    }
    for (k, u) in traj.inputs.iter().enumerate() {
        if !model.input_set.contains_point(u, GEO_TOL) {
            return Err(format!("input {k} outside the input set"));
        }
        let next = model.nominal(&states[k], u);
        let err = next.iter().zip(&states[k + 1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-10 {
            return Err(format!("dynamics mismatch {err:e} at step {k}"));
        }
    }
    for (k, x) in states.iter().enumerate() {
        if !ws.in_corridor(x, i, j) {
            return Err(format!("state {k} leaves the corridor"));
        }
    }
    if !ws.regions[j].contains_point(states.last().expect("nonempty"), GEO_TOL) {
        return Err("final state is not in the target region".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn candidate_input_examples() {
        let u1 = Polytope::boxed(&[-1.0], &[1.0]).unwrap();
        assert_eq!(candidate_inputs(&u1, 3, 1.0).unwrap(), vec![vec![-1.0], vec![0.0], vec![1.0]]);
        assert_eq!(candidate_inputs(&u1, 2, 1.0).unwrap(), vec![vec![-1.0], vec![0.0], vec![1.0]]);
        let u2 = Polytope::boxed(&[-6.0, -6.0], &[6.0, 6.0]).unwrap();
        assert_eq!(candidate_inputs(&u2, 3, 1.0).unwrap().len(), 9);
        assert_eq!(candidate_inputs(&u2, 5, 1.0).unwrap().len(), 25);
        let half = candidate_inputs(&u2, 3, 0.5).unwrap();
        assert!(half.iter().all(|u| u.iter().all(|v| v.abs() <= 3.0)));
        let tri = Polytope::from_vertices_2d(&[vec![-1.0, -1.0], vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let c = candidate_inputs(&tri, 4, 1.0).unwrap();
        assert!(c.iter().all(|u| tri.contains_point(u, 1e-9)));
        assert!(c.contains(&vec![0.0, 0.0]));
    }

    fn open_workspace(goal_blocked: bool) -> (LtiModel, Workspace) {
        let model = LtiModel::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            Polytope::boxed(&[-0.5, -0.5], &[0.5, 0.5]).unwrap(),
            Polytope::boxed(&[-0.01, -0.01], &[0.01, 0.01]).unwrap(),
        )
        .unwrap();
        let mut obstacles = Vec::new();
        if goal_blocked {
            for (lo, hi) in [([2.0, -1.0], [4.0, -0.6]), ([2.0, 0.6], [4.0, 1.0]), ([2.0, -0.6], [2.4, 0.6]), ([3.6, -0.6], [4.0, 0.6])] {
                obstacles.push(Polytope::boxed(&lo, &hi).unwrap());
            }
        }
        let ws = Workspace::new(
            Polytope::boxed(&[-5.0, -5.0], &[5.0, 5.0]).unwrap(),
            obstacles,
            vec![Polytope::boxed(&[-0.5, -0.5], &[0.5, 0.5]).unwrap(), Polytope::boxed(&[2.5, -0.5], &[3.5, 0.5]).unwrap()],
        )
        .unwrap();
        (model, ws)
    }

    #[test]
    fn open_plane_reaches_goal() {
        let (model, ws) = open_workspace(false);
        let t = plan_nominal(&model, &ws, 0, 1, 3, &TrajgenOptions::default()).unwrap();
        check_nominal(&model, &ws, 0, 1, &t).unwrap();
        let again = plan_nominal(&model, &ws, 0, 1, 3, &TrajgenOptions::default()).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn same_region_is_rejected() {
        let (model, ws) = open_workspace(false);
        assert_eq!(plan_nominal(&model, &ws, 1, 1, 0, &TrajgenOptions::default()), Err(TrajgenError::SameRegion(1)));
    }

    #[test]
    fn enclosed_goal_exhausts_budget() {
        let (model, ws) = open_workspace(true);
        let opts = TrajgenOptions { budget: 2000, ..TrajgenOptions::default() };
        assert_eq!(plan_nominal(&model, &ws, 0, 1, 0, &opts), Err(TrajgenError::BudgetExhausted(2000)));
    }
}
