//! Tubes around nominal trajectories: the joint tube LP, the reachability
//! certificate built on it, the multi-start variant, and the vertex-control
//! certificate for self-loops.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::LtiModel;
use crate::geometry::{self, contains_polytope, dot, intersects, section_to_polytope, GeometryError, Polytope, Workspace, GEO_TOL};
use crate::linsolve::{LinearProgram, LpError, LpStatus};
use crate::trajgen::{self, NominalTrajectory, TrajgenError, TrajgenOptions};

/// Lower bound on every tube scale.
pub const EPS_MIN: f64 = 1e-6;

/// Width at which the ε̄ bisection stops; ε̄ is reduced by the same amount
/// before use.
pub const BISECTION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TubeError {
    #[error("nominal point {0:?} is outside the corridor")]
    OutsideCorridor(Vec<f64>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Trajgen(#[from] TrajgenError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSequence {
    pub source: usize,
    pub target: usize,
    pub shape: Polytope,
    pub centers: Vec<Vec<f64>>,
    pub scales: Vec<f64>,
    /// `controls[ℓ][s]` is the input stored for vertex `s` of section `ℓ`,
    /// for `ℓ < L`.
    pub controls: Vec<Vec<Vec<f64>>>,
}

impl TubeSequence {
    /// Number of steps `L`.
    pub fn horizon(&self) -> usize {
        self.controls.len()
    }

    pub fn section(&self, ell: usize) -> Polytope {
        section_to_polytope(&self.shape, &self.centers[ell], self.scales[ell]).expect("scales are nonnegative")
    }

    /// Vertices of section `ℓ` in the shape's vertex order.
    pub fn section_vertices(&self, ell: usize) -> Vec<Vec<f64>> {
        self.shape
            .vertices()
            .expect("shape has vertices")
            .iter()
            .map(|z| z.iter().zip(&self.centers[ell]).map(|(zi, ci)| ci + self.scales[ell] * zi).collect())
            .collect()
    }
}

/// Tuning for the tube LP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeOptions {
    /// After maximizing `ε_0`, re-solve with `ε_0` held at its optimum and
    /// maximize `Σ ε_ℓ + contraction_weight · Σ μ_ℓ`, where `μ_ℓ` is extra
    /// clearance of the vertex images inside the next section. Picks, among
    /// the optimal tubes, one with room for open-loop prediction.
    pub secondary_objective: bool,
    pub contraction_weight: f64,
    /// Upper bound on each `μ_ℓ` as a fraction of `ε_{ℓ+1}`.
    pub max_contraction: f64,
}

impl Default for TubeOptions {
    fn default() -> Self {
        TubeOptions { secondary_objective: true, contraction_weight: 4.0, max_contraction: 0.5 }
    }
}

/// Largest `ε` with `x̂ ⊕ ε𝒵 ⊆ 𝒳_ij`, by bisection on `[0, diameter]`.
pub fn epsilon_bar(ws: &Workspace, i: usize, j: usize, center: &[f64], shape: &Polytope) -> Result<f64, TubeError> {
    if !ws.in_corridor(center, i, j) {
        return Err(TubeError::OutsideCorridor(center.to_vec()));
    }
    let fits = |eps: f64| -> Result<bool, TubeError> { Ok(ws.set_in_corridor(&section_to_polytope(shape, center, eps)?, i, j)?) };
    let mut lo = 0.0;
    let mut hi = ws.bounding.box_diameter()?;
    if fits(hi)? {
        return Ok(hi);
    }
    while hi - lo >= BISECTION_TOL / 2.0 {
        let mid = 0.5 * (lo + hi);
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Default tube shape: region `i` translated so its Chebyshev center is at
/// the origin.
pub fn default_shape(ws: &Workspace, i: usize) -> Polytope {
    let c: Vec<f64> = ws.region_centers[i].iter().map(|v| -v).collect();
    ws.regions[i].translate(&c)
}

/// Variable layout of the tube LP.
struct Layout {
    horizon: usize,
    vertices: usize,
    inputs: usize,
    with_margins: bool,
}

impl Layout {
    fn eps(&self, ell: usize) -> usize {
        ell
    }
    fn u(&self, ell: usize, s: usize, k: usize) -> usize {
        self.horizon + 1 + (ell * self.vertices + s) * self.inputs + k
    }
    fn margin(&self, ell: usize) -> usize {
        self.horizon + 1 + self.horizon * self.vertices * self.inputs + ell
    }
    fn nvars(&self) -> usize {
        self.horizon + 1 + self.horizon * self.vertices * self.inputs + if self.with_margins { self.horizon } else { 0 }
    }
}

/// Solves the tube LP along `traj` from region `i` to region `j`.
/// `Ok(None)` means the LP is infeasible.
pub fn synthesize_tubes(
    model: &LtiModel,
    ws: &Workspace,
    i: usize,
    j: usize,
    traj: &NominalTrajectory,
    shape: &Polytope,
    opts: &TubeOptions,
) -> Result<Option<TubeSequence>, TubeError> {
    let horizon = traj.horizon();
    let mut eps_bar = Vec::with_capacity(horizon + 1);
    for x in &traj.states {
        let e = epsilon_bar(ws, i, j, x, shape)? - BISECTION_TOL;
        if e < EPS_MIN {
            return Ok(None);
        }
        eps_bar.push(e);
    }
    let first = solve_tube_lp(model, ws, j, traj, shape, &eps_bar, None, opts)?;
    let Some(point) = first else { return Ok(None) };
    let point = if opts.secondary_objective {
        match solve_tube_lp(model, ws, j, traj, shape, &eps_bar, Some(point[0]), opts)? {
            Some(p) => p,
            None => point,
        }
    } else {
        point
    };

    let layout = Layout { horizon, vertices: shape.require_vertices()?.len(), inputs: model.input_dim(), with_margins: false };
    let scales: Vec<f64> = (0..=horizon).map(|l| point[layout.eps(l)]).collect();
    let controls = (0..horizon)
        .map(|l| (0..layout.vertices).map(|s| (0..layout.inputs).map(|k| point[layout.u(l, s, k)]).collect()).collect())
        .collect();
    Ok(Some(TubeSequence { source: i, target: j, shape: shape.clone(), centers: traj.states.clone(), scales, controls }))
}

#[allow(clippy::too_many_arguments)]
fn solve_tube_lp(
    model: &LtiModel,
    ws: &Workspace,
    j: usize,
    traj: &NominalTrajectory,
    shape: &Polytope,
    eps_bar: &[f64],
    eps0_floor: Option<f64>,
    opts: &TubeOptions,
) -> Result<Option<Vec<f64>>, TubeError> {
    let horizon = traj.horizon();
    let zs = shape.require_vertices()?;
    let n = model.state_dim();
    let m = model.input_dim();
    let secondary = eps0_floor.is_some();
    let layout = Layout { horizon, vertices: zs.len(), inputs: m, with_margins: secondary };
    let mut lp = LinearProgram::new(layout.nvars());

    for (l, &bar) in eps_bar.iter().enumerate() {
        lp.set_bounds(layout.eps(l), EPS_MIN, bar);
        // Wide tubes are the natural starting guess; it spares most of phase 1.
        lp.prefer_upper(layout.eps(l));
    }
    if let Some(floor) = eps0_floor {
        let lo = (floor - 1e-9).clamp(EPS_MIN, eps_bar[0]);
        lp.set_bounds(layout.eps(0), lo, eps_bar[0]);
    }

    // Inputs: axis-aligned halfspaces of 𝒰 become bounds, the rest rows.
    let mut u_bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); m];
    let mut u_rows = Vec::new();
    for h in model.input_set.halfspaces() {
        let nz: Vec<usize> = (0..m).filter(|&k| h.normal[k] != 0.0).collect();
        if nz.len() == 1 && (h.normal[nz[0]].abs() - 1.0).abs() < 1e-15 {
            let k = nz[0];
            if h.normal[k] > 0.0 {
                u_bounds[k].1 = u_bounds[k].1.min(h.offset);
            } else {
                u_bounds[k].0 = u_bounds[k].0.max(-h.offset);
            }
        } else {
            u_rows.push(h.clone());
        }
    }
    for l in 0..horizon {
        for s in 0..zs.len() {
            for (k, (lo, hi)) in u_bounds.iter().enumerate() {
                lp.set_bounds(layout.u(l, s, k), *lo, *hi);
            }
            for h in &u_rows {
                let terms: Vec<(usize, f64)> = (0..m).map(|k| (layout.u(l, s, k), h.normal[k])).collect();
                lp.add_sparse(&terms, crate::linsolve::Relation::Le, h.offset);
            }
        }
    }

    // Terminal containment: a·x̂_L + ε_L·h_𝒵(a) <= b for each halfspace of ℛ_j.
    let x_last = &traj.states[horizon];
    for h in ws.regions[j].halfspaces() {
        let hz = shape.support(&h.normal)?;
        lp.add_sparse(&[(layout.eps(horizon), hz)], crate::linsolve::Relation::Le, h.offset - dot(&h.normal, x_last));
    }

    // Robust step, one row per (ℓ, s, q):
    // ε_ℓ a_q·A z_s + a_q·B u_{ℓ,s} - b_q ε_{ℓ+1} (+ b_q μ_ℓ) <= a_q·(x̂_{ℓ+1} - A x̂_ℓ) - h_𝒲(a_q)
    let bt = model.b.transpose();
    let az: Vec<Vec<f64>> = zs.iter().map(|z| model.nominal(z, &vec![0.0; m])).collect();
    for h in shape.halfspaces() {
        let hw = model.disturbance_support(&h.normal);
        let b_row: Vec<f64> = (&bt * nalgebra::DVector::from_column_slice(&h.normal)).as_slice().to_vec();
        for l in 0..horizon {
            let drift = model.nominal(&traj.states[l], &vec![0.0; m]);
            let rhs = dot(&h.normal, &traj.states[l + 1]) - dot(&h.normal, &drift) - hw;
            for (s, azs) in az.iter().enumerate() {
                let mut terms = vec![(layout.eps(l), dot(&h.normal, azs)), (layout.eps(l + 1), -h.offset)];
                for (k, &bk) in b_row.iter().enumerate() {
                    if bk != 0.0 {
                        terms.push((layout.u(l, s, k), bk));
                    }
                }
                if secondary {
                    terms.push((layout.margin(l), h.offset));
                }
                lp.add_sparse(&terms, crate::linsolve::Relation::Le, rhs);
            }
        }
    }
    debug_assert_eq!(n, x_last.len());

    if secondary {
        for l in 0..horizon {
            // μ_ℓ <= max_contraction · ε_{ℓ+1}
            lp.add_sparse(&[(layout.margin(l), 1.0), (layout.eps(l + 1), -opts.max_contraction)], crate::linsolve::Relation::Le, 0.0);
            lp.set_objective_coeff(layout.margin(l), opts.contraction_weight);
        }
        for l in 0..=horizon {
            lp.set_objective_coeff(layout.eps(l), 1.0);
        }
    } else {
        lp.set_objective_coeff(layout.eps(0), 1.0);
    }

    let sol = lp.solve()?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.point),
        LpStatus::Infeasible => None,
        LpStatus::Unbounded => unreachable!("all tube variables are bounded"),
    })
}

/// Re-verifies a tube sequence against its set-theoretic definition:
/// sections in the corridor, terminal section inside the target, robust
/// vertex images, admissible vertex controls.
pub fn check_tube_sequence(model: &LtiModel, ws: &Workspace, seq: &TubeSequence) -> Result<(), String> {
    let (i, j) = (seq.source, seq.target);
    let horizon = seq.horizon();
    let geo = |e: GeometryError| e.to_string();
    for l in 0..=horizon {
        if seq.scales[l] < EPS_MIN - GEO_TOL {
            return Err(format!("scale {l} below minimum"));
        }
        if !ws.set_in_corridor(&seq.section(l), i, j).map_err(geo)? {
            return Err(format!("section {l} leaves the corridor"));
        }
    }
    if !contains_polytope(&seq.section(horizon), &ws.regions[j]).map_err(geo)? {
        return Err("terminal section is not inside the target region".into());
    }
    for l in 0..horizon {
        let next = geometry::erode_halfspaces(&seq.section(l + 1), &model.disturbance_set).map_err(geo)?;
        for (s, v) in seq.section_vertices(l).iter().enumerate() {
            let u = &seq.controls[l][s];
            if !model.input_set.contains_point(u, GEO_TOL) {
                return Err(format!("control ({l},{s}) outside the input set"));
            }
            let img = model.nominal(v, u);
            if !next.contains_point(&img, 1e-7) {
                return Err(format!("vertex image ({l},{s}) misses the eroded next section by {:e}", -next.margin(&img)));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReachStatus {
    Reachable,
    NotCertified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachCertificate {
    pub source: usize,
    pub target: usize,
    pub status: ReachStatus,
    /// One sequence, or several whose initial sections cover the source
    /// region together.
    pub tubes: Vec<TubeSequence>,
    pub diagnostics: Vec<String>,
}

/// Outcome of the two conditions that make a tube sequence a reachability
/// witness.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachChecks {
    pub covers_source: bool,
    pub no_return: bool,
}

/// The source region inside `𝒳_0` (coverage) and, from the first section
/// that meets the target on, no section meeting the source (no return).
pub fn reach_checks(seq: &TubeSequence, ws: &Workspace) -> Result<ReachChecks, GeometryError> {
    let (i, j) = (seq.source, seq.target);
    let covers_source = contains_polytope(&ws.regions[i], &seq.section(0))?;
    Ok(ReachChecks { covers_source, no_return: no_return(seq, ws, i, j)? })
}

fn no_return(seq: &TubeSequence, ws: &Workspace, i: usize, j: usize) -> Result<bool, GeometryError> {
    let horizon = seq.horizon();
    let mut first = None;
    for l in 1..horizon {
        if intersects(&seq.section(l), &ws.regions[j])? {
            first = Some(l);
            break;
        }
    }
    if let Some(first) = first {
        for l in first..horizon {
            if intersects(&seq.section(l), &ws.regions[i])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Certificate for a single tube sequence.
pub fn check_reachability(seq: &TubeSequence, ws: &Workspace) -> Result<ReachCertificate, GeometryError> {
    let checks = reach_checks(seq, ws)?;
    let mut diagnostics = Vec::new();
    if !checks.covers_source {
        diagnostics.push("coverage failed: source region not inside the initial section".to_string());
    }
    if !checks.no_return {
        diagnostics.push("no-return failed: a section meets the source after meeting the target".to_string());
    }
    let status = if diagnostics.is_empty() { ReachStatus::Reachable } else { ReachStatus::NotCertified };
    Ok(ReachCertificate { source: seq.source, target: seq.target, status, tubes: vec![seq.clone()], diagnostics })
}

/// Every cell center of a δ-grid over `region` (δ = 0.02 × diameter) lies
/// in some initial section.
pub fn grid_covered(region: &Polytope, sections: &[Polytope]) -> Result<bool, GeometryError> {
    let (lo, hi) = region.bounding_box()?;
    let diameter = lo.iter().zip(&hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt();
    let delta = 0.02 * diameter;
    let n = lo.len();
    let counts: Vec<usize> = (0..n).map(|k| (((hi[k] - lo[k]) / delta).ceil() as usize).max(1)).collect();
    let mut idx = vec![0usize; n];
    loop {
        let p: Vec<f64> = (0..n)
            .map(|k| {
                let step = (hi[k] - lo[k]) / counts[k] as f64;
                lo[k] + step * (idx[k] as f64 + 0.5)
            })
            .collect();
        if region.contains_point(&p, GEO_TOL) && !sections.iter().any(|s| s.contains_point(&p, GEO_TOL)) {
            return Ok(false);
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(true);
            }
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Tube pipeline from `M` random starting points in region `i`. Reachable
/// when every sequence passes the no-return check and the initial sections
/// cover region `i` on the δ-grid.
#[allow(clippy::too_many_arguments)]
pub fn multi_start_reachability(
    model: &LtiModel,
    ws: &Workspace,
    i: usize,
    j: usize,
    starts: usize,
    seed: u64,
    shape: &Polytope,
    traj_opts: &TrajgenOptions,
    tube_opts: &TubeOptions,
) -> Result<ReachCertificate, TubeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = &ws.regions[i];
    let (lo, hi) = region.bounding_box()?;
    let mut tubes = Vec::new();
    let mut diagnostics = Vec::new();
    for m in 0..starts.max(1) {
        let start = loop {
            let p: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect();
            if region.contains_point(&p, 0.0) {
                break p;
            }
        };
        let traj = match trajgen::plan_nominal_from(model, ws, i, j, &start, rng.gen(), traj_opts) {
            Ok(t) => t,
            Err(e) => {
                diagnostics.push(format!("start {m}: {e}"));
                continue;
            }
        };
        match synthesize_tubes(model, ws, i, j, &traj, shape, tube_opts)? {
            Some(seq) => {
                if no_return(&seq, ws, i, j)? {
                    tubes.push(seq);
                } else {
                    diagnostics.push(format!("start {m}: no-return failed"));
                }
            }
            None => diagnostics.push(format!("start {m}: tube LP infeasible")),
        }
    }
    let sections: Vec<Polytope> = tubes.iter().map(|t| t.section(0)).collect();
    let covered = !tubes.is_empty() && grid_covered(region, &sections)?;
    if !covered {
        diagnostics.push("initial sections do not cover the source region".to_string());
    }
    Ok(ReachCertificate {
        source: i,
        target: j,
        status: if covered { ReachStatus::Reachable } else { ReachStatus::NotCertified },
        tubes,
        diagnostics,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceCertificate {
    pub region: usize,
    pub invariant: bool,
    /// Vertices of the region and the control stored for each.
    pub vertices: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
    /// Smallest clearance of a vertex image inside `ℛ ⊖ 𝒲`.
    pub margin: f64,
}

/// For each vertex `v` of `region`, the input `u ∈ 𝒰` maximizing the
/// clearance of `A v + B u` inside `region ⊖ 𝒲`. Invariant iff every
/// clearance is nonnegative.
pub fn check_invariance(model: &LtiModel, region: &Polytope, index: usize) -> Result<InvarianceCertificate, TubeError> {
    let verts = match region.vertices() {
        Some(v) => v.to_vec(),
        None => geometry::vertices_2d(region)?,
    };
    let eroded = geometry::erode_halfspaces(region, &model.disturbance_set)?;
    let m = model.input_dim();
    let mut controls = Vec::with_capacity(verts.len());
    let mut worst = f64::INFINITY;
    let bt = model.b.transpose();
    for v in &verts {
        let drift = model.nominal(v, &vec![0.0; m]);
        let mut lp = LinearProgram::new(m + 1);
        lp.set_free(m);
        for k in 0..m {
            lp.set_free(k);
        }
        let mut obj = vec![0.0; m + 1];
        obj[m] = 1.0;
        lp.set_objective(obj);
        for h in model.input_set.halfspaces() {
            let mut row = h.normal.clone();
            row.push(0.0);
            lp.add_le(row, h.offset);
        }
        for h in eroded.halfspaces() {
            // a·(drift + B u) + t <= b
            let mut row: Vec<f64> = (&bt * nalgebra::DVector::from_column_slice(&h.normal)).as_slice().to_vec();
            row.push(1.0);
            lp.add_le(row, h.offset - dot(&h.normal, &drift));
        }
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => {
                worst = worst.min(sol.point[m]);
                controls.push(sol.point[..m].to_vec());
            }
            _ => {
                worst = f64::NEG_INFINITY;
                controls.push(vec![0.0; m]);
            }
        }
    }
    Ok(InvarianceCertificate { region: index, invariant: worst >= 0.0, vertices: verts, controls, margin: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn square(c: [f64; 2], r: f64) -> Polytope {
        Polytope::boxed(&[c[0] - r, c[1] - r], &[c[0] + r, c[1] + r]).unwrap()
    }

    fn unit_z() -> Polytope {
        square([0.0, 0.0], 1.0)
    }

    fn plane_ws(obstacles: Vec<Polytope>, regions: Vec<Polytope>) -> Workspace {
        Workspace::new(square([0.0, 0.0], 5.0), obstacles, regions).unwrap()
    }

    #[test]
    fn epsilon_bar_examples() {
        let regions = vec![square([-4.0, -4.0], 0.2), square([4.0, -4.0], 0.2)];
        let ws = plane_ws(vec![Polytope::boxed(&[2.0, 2.0], &[3.0, 3.0]).unwrap()], regions.clone());
        assert!((epsilon_bar(&ws, 0, 1, &[0.0, 0.0], &unit_z()).unwrap() - 2.0).abs() < 1e-6);
        let open = plane_ws(vec![], regions.clone());
        assert!((epsilon_bar(&open, 0, 1, &[0.0, 0.0], &unit_z()).unwrap() - 5.0).abs() < 1e-6);
        let near = plane_ws(vec![Polytope::boxed(&[0.001, -1.0], &[1.0, 1.0]).unwrap()], regions);
        assert!((epsilon_bar(&near, 0, 1, &[0.0, 0.0], &unit_z()).unwrap() - 1e-3).abs() < 1e-6);
        assert!(matches!(epsilon_bar(&near, 0, 1, &[0.5, 0.0], &unit_z()), Err(TubeError::OutsideCorridor(_))));
    }

    #[test]
    fn invariance_examples() {
        let ident =
            LtiModel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2), square([0.0, 0.0], 1.0), square([0.0, 0.0], 0.05)).unwrap();
        let cert = check_invariance(&ident, &square([1.0, 1.0], 0.5), 0).unwrap();
        assert!(cert.invariant);
        let big_w =
            LtiModel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2), square([0.0, 0.0], 1.0), square([0.0, 0.0], 0.6)).unwrap();
        assert!(!check_invariance(&big_w, &square([1.0, 1.0], 0.5), 0).unwrap().invariant);
        let expand =
            LtiModel::new(DMatrix::identity(2, 2) * 2.0, DMatrix::zeros(2, 2), square([0.0, 0.0], 1.0), square([0.0, 0.0], 0.01)).unwrap();
        assert!(!check_invariance(&expand, &square([0.0, 0.0], 0.5), 0).unwrap().invariant);
    }

    #[test]
    fn grid_coverage_union() {
        let region = square([0.0, 0.0], 0.5);
        let left = Polytope::boxed(&[-0.6, -0.6], &[0.02, 0.6]).unwrap();
        let right = Polytope::boxed(&[-0.02, -0.6], &[0.6, 0.6]).unwrap();
        assert!(grid_covered(&region, &[left.clone(), right]).unwrap());
        assert!(!grid_covered(&region, &[left]).unwrap());
    }
}
