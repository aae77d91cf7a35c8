//! Online execution of a plan: the tube guide spliced from library entries,
//! vertex-interpolation control, self-triggered communication times and the
//! closed-loop simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{TransitionSystem, TubeLibrary};
use crate::dynamics::LtiModel;
use crate::geometry::{dot, GeometryError, Polytope, Workspace};
use crate::linsolve::{LinearProgram, LpError, LpStatus};
use crate::ltl::Plan;
use crate::tubesynth::{InvarianceCertificate, ReachCertificate};

/// Slack allowed in the containment tests behind `ℓ*`.
pub const COMM_TOL: f64 = 1e-9;
/// Slack before a state counts as having left its tube section.
pub const TUBE_TOL: f64 = 1e-7;
/// Largest reconstruction residual accepted from the interpolation LP.
pub const LAMBDA_TOL: f64 = 1e-7;

pub const DEFAULT_HORIZON: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuntimeError {
    #[error("no library entry for the edge ({0}, {1})")]
    MissingEntry(usize, usize),
    #[error("k={k}: point is outside the section (residual {residual:e})")]
    Interpolation { k: usize, residual: f64 },
    #[error("k={k}: state is in no initial section of the next leg")]
    NoBranch { k: usize },
    #[error("k={k}: state left the tube section (margin {margin:e})")]
    TubeExit { k: usize, margin: f64, log: Box<RunLog> },
    #[error("k={k}: next communication time is zero")]
    ZeroCommTime { k: usize },
    #[error("initial state is not in the first section")]
    StartOutside,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug)]
enum LegEntry<'a> {
    Transition(&'a ReachCertificate),
    SelfLoop(&'a InvarianceCertificate, &'a Polytope),
}

#[derive(Clone, Debug)]
struct Instance {
    start: usize,
    branch: Option<usize>,
}

/// What the guide says about time step `k`.
#[derive(Clone, Debug)]
pub struct StepView {
    pub section: Polytope,
    pub vertices: Vec<Vec<f64>>,
    /// `None` when the step opens a leg whose tube is chosen only once the
    /// state there is measured; `section` is then the previous leg's final
    /// section.
    pub controls: Option<Vec<Vec<f64>>>,
}

/// The sequences `𝒳*_k`, `𝒰*_k`, produced lazily by walking the plan's
/// region sequence and splicing library entries.
#[derive(Clone, Debug)]
pub struct Guide<'a> {
    plan: Plan,
    /// Entry for plan leg `i` (from `s*_i` to `s*_{i+1}`), one period's
    /// worth: prefix legs followed by suffix legs.
    entries: Vec<LegEntry<'a>>,
    instances: Vec<Instance>,
}

impl<'a> Guide<'a> {
    pub fn new(ws: &'a Workspace, ts: &TransitionSystem, library: &'a TubeLibrary, plan: &Plan) -> Result<Self, RuntimeError> {
        let legs = plan.prefix.len() + plan.suffix.len() - 1;
        let mut entries = Vec::with_capacity(legs);
        for i in 0..legs {
            let (a, b) = (plan.state_at(i), plan.state_at(i + 1));
            let entry = if a == b {
                let cert = library.self_loop(ts.region(a)).ok_or(RuntimeError::MissingEntry(a, b))?;
                LegEntry::SelfLoop(cert, &ws.regions[ts.region(a)])
            } else {
                let cert = library.transition(ts.region(a), ts.region(b)).ok_or(RuntimeError::MissingEntry(a, b))?;
                if cert.tubes.is_empty() {
                    return Err(RuntimeError::MissingEntry(a, b));
                }
                LegEntry::Transition(cert)
            };
            entries.push(entry);
        }
        let mut guide = Guide { plan: plan.clone(), entries, instances: Vec::new() };
        guide.push_instance(0);
        Ok(guide)
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    /// Entry index of plan leg `i`; legs past the prefix wrap around the
    /// suffix.
    fn entry_index(&self, leg: usize) -> usize {
        let p = self.plan.prefix.len();
        if leg + 1 < p {
            leg
        } else {
            p - 1 + (leg + 1 - p) % self.plan.suffix.len()
        }
    }

    fn entry(&self, leg: usize) -> &LegEntry<'a> {
        &self.entries[self.entry_index(leg)]
    }

    fn push_instance(&mut self, start: usize) {
        let leg = self.instances.len();
        let branch = match self.entry(leg) {
            LegEntry::Transition(c) if c.tubes.len() > 1 => None,
            _ => Some(0),
        };
        self.instances.push(Instance { start, branch });
    }

    fn leg_len(&self, leg: usize) -> Option<usize> {
        let branch = self.instances[leg].branch?;
        Some(match self.entry(leg) {
            LegEntry::Transition(c) => c.tubes[branch].horizon(),
            LegEntry::SelfLoop(..) => 1,
        })
    }

    /// Leg instance covering `k`, extending the guide as needed. `None`
    /// when an undecided leg starts before `k`.
    fn locate(&mut self, k: usize) -> Option<usize> {
        loop {
            let last = self.instances.len() - 1;
            let start = self.instances[last].start;
            if k < start {
                return Some(self.instances.partition_point(|inst| inst.start <= k) - 1);
            }
            let len = match self.leg_len(last) {
                Some(len) => len,
                None => return (k == start).then_some(last),
            };
            if k < start + len {
                return Some(last);
            }
            self.push_instance(start + len);
        }
    }

    /// Index of the plan state whose leg covers `k` (for reporting).
    pub fn leg_at(&mut self, k: usize) -> Option<usize> {
        self.locate(k)
    }

    /// Chooses the tube of an undecided leg starting at `k`: the first one
    /// whose initial section contains `x`.
    pub fn decide(&mut self, k: usize, x: &[f64]) -> Result<(), RuntimeError> {
        let Some(leg) = self.locate(k) else { return Err(RuntimeError::NoBranch { k }) };
        if self.instances[leg].branch.is_some() {
            return Ok(());
        }
        let LegEntry::Transition(cert) = self.entry(leg) else { unreachable!("self-loop legs are always decided") };
        let best = cert.tubes.iter().position(|t| t.section(0).contains_point(x, TUBE_TOL)).ok_or(RuntimeError::NoBranch { k })?;
        self.instances[leg].branch = Some(best);
        Ok(())
    }

    /// `𝒳*_k` with its vertices and vertex controls.
    pub fn view(&mut self, k: usize) -> Option<StepView> {
        let leg = self.locate(k)?;
        let inst = self.instances[leg].clone();
        let Some(branch) = inst.branch else {
            // undecided leg: only the previous leg's final section is known
            let prev = leg.checked_sub(1)?;
            let prev_branch = self.instances[prev].branch?;
            let section = match self.entry(prev) {
                LegEntry::Transition(c) => {
                    let t = &c.tubes[prev_branch];
                    t.section(t.horizon())
                }
                LegEntry::SelfLoop(_, region) => (*region).clone(),
            };
            return Some(StepView { section, vertices: Vec::new(), controls: None });
        };
        let offset = k - inst.start;
        Some(match self.entry(leg) {
            LegEntry::Transition(c) => {
                let t = &c.tubes[branch];
                StepView { section: t.section(offset), vertices: t.section_vertices(offset), controls: Some(t.controls[offset].clone()) }
            }
            LegEntry::SelfLoop(cert, region) => {
                StepView { section: (*region).clone(), vertices: cert.vertices.clone(), controls: Some(cert.controls.clone()) }
            }
        })
    }
}

/// Convex weights `λ` with `Σ λ_s v_s = x`. Among the solutions, the LP
/// minimizes `Σ s·λ_s`, which prefers low vertex indices and makes the
/// choice deterministic.
pub fn interpolate_lambda(vertices: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>, RuntimeError> {
    let p = vertices.len();
    let n = x.len();
    let mut lp = LinearProgram::new(p);
    lp.set_objective((0..p).map(|s| -(s as f64)).collect());
    lp.add_eq(vec![1.0; p], 1.0);
    for d in 0..n {
        lp.add_eq(vertices.iter().map(|v| v[d]).collect(), x[d]);
    }
    let sol = lp.solve()?;
    if sol.status == LpStatus::Optimal {
        return Ok(sol.point);
    }
    // x may sit on the boundary up to rounding: accept the closest
    // combination if it reconstructs x within LAMBDA_TOL.
    let mut lp = LinearProgram::new(p + 2 * n);
    let mut obj = vec![0.0; p + 2 * n];
    for v in obj.iter_mut().skip(p) {
        *v = -1.0;
    }
    lp.set_objective(obj);
    let mut row = vec![0.0; p + 2 * n];
    row[..p].fill(1.0);
    lp.add_eq(row, 1.0);
    for d in 0..n {
        let mut row: Vec<f64> = vertices.iter().map(|v| v[d]).collect();
        row.resize(p + 2 * n, 0.0);
        row[p + 2 * d] = 1.0;
        row[p + 2 * d + 1] = -1.0;
        lp.add_eq(row, x[d]);
    }
    let sol = lp.solve()?;
    let residual = if sol.is_optimal() { -sol.objective } else { f64::INFINITY };
    if residual <= LAMBDA_TOL {
        let lambda = sol.point[..p].to_vec();
        return Ok(lambda);
    }
    Err(RuntimeError::Interpolation { k: 0, residual })
}

/// Inputs `u_k..u_{k+h−1}`, nominals `x̂_k..x̂_{k+h}` and the sections
/// `𝒳*_k..𝒳*_{k+h}`. `h < H` when the guide reaches a leg whose tube is
/// chosen only on arrival.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub k: usize,
    pub inputs: Vec<Vec<f64>>,
    pub nominals: Vec<Vec<f64>>,
    pub sections: Vec<Polytope>,
}

impl Prediction {
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }
}

pub fn compute_controls(guide: &mut Guide, model: &LtiModel, k: usize, x: &[f64], horizon: usize) -> Result<Prediction, RuntimeError> {
    guide.decide(k, x)?;
    let mut pred = Prediction { k, inputs: Vec::new(), nominals: vec![x.to_vec()], sections: Vec::new() };
    let mut xhat = x.to_vec();
    for ell in 0..=horizon {
        let view = guide.view(k + ell).ok_or(RuntimeError::NoBranch { k: k + ell })?;
        pred.sections.push(view.section);
        if ell == horizon {
            break;
        }
        let Some(controls) = view.controls else { break };
        let lambda = interpolate_lambda(&view.vertices, &xhat).map_err(|e| match e {
            RuntimeError::Interpolation { residual, .. } => RuntimeError::Interpolation { k: k + ell, residual },
            e => e,
        })?;
        let mut u = vec![0.0; model.input_dim()];
        for (l, c) in lambda.iter().zip(&controls) {
            for (ui, ci) in u.iter_mut().zip(c) {
                *ui += l * ci;
            }
        }
        xhat = model.nominal(&xhat, &u);
        pred.inputs.push(u);
        pred.nominals.push(xhat.clone());
    }
    Ok(pred)
}

/// Largest `ℓ′ ≤ h` such that `x̂_{k+ℓ} ⊕ 𝒲_ℓ ⊆ 𝒳*_{k+ℓ}` for all
/// `ℓ ≤ ℓ′`, tested per halfspace with the accumulated disturbance
/// support.
pub fn next_comm_time(model: &LtiModel, pred: &Prediction) -> usize {
    let h = pred.horizon();
    for ell in 0..=h {
        let section = &pred.sections[ell];
        let ok = section.halfspaces().iter().all(|hs| {
            let spread = if ell == 0 { 0.0 } else { model.accumulated_disturbance_support(ell, &hs.normal) };
            dot(&hs.normal, &pred.nominals[ell]) + spread <= hs.offset + COMM_TOL
        });
        if !ok {
            return ell.saturating_sub(1);
        }
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DisturbanceMode {
    /// Uniform in `𝒲` by rejection sampling.
    #[default]
    Uniform,
    /// A uniformly chosen vertex of `𝒲`.
    Adversarial,
}

impl std::str::FromStr for DisturbanceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(DisturbanceMode::Uniform),
            "adversarial" => Ok(DisturbanceMode::Adversarial),
            other => Err(format!("unknown disturbance mode `{other}`")),
        }
    }
}

pub fn sample_disturbance(model: &LtiModel, mode: DisturbanceMode, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w = &model.disturbance_set;
    match mode {
        DisturbanceMode::Adversarial => {
            let verts = w.vertices().expect("disturbance set has vertices");
            verts[rng.gen_range(0..verts.len())].clone()
        }
        DisturbanceMode::Uniform => {
            let (lo, hi) = w.bounding_box().expect("disturbance set is bounded");
            loop {
                let p: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| if h > l { rng.gen_range(*l..*h) } else { *l }).collect();
                if w.contains_point(&p, 0.0) {
                    return p;
                }
            }
        }
    }
}

/// One communication: the packet sent and what it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct CommInstant {
    pub k: usize,
    pub ell_star: usize,
    pub prediction: Prediction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    /// `x_0..x_steps`
    pub states: Vec<Vec<f64>>,
    /// `u_k`, `w_k` applied between `x_k` and `x_{k+1}`, for `k ≤ steps`.
    pub inputs: Vec<Vec<f64>>,
    pub disturbances: Vec<Vec<f64>>,
    pub comm: Vec<bool>,
    /// `ℓ*_k` at communication instants.
    pub ell_star: Vec<Option<usize>>,
    /// `h_X(x_k)`.
    pub letters: Vec<usize>,
    pub instants: Vec<CommInstant>,
    pub seed: u64,
    pub config_hash: String,
}

impl RunLog {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Communication instants in `[0, steps]`.
    pub fn comm_count(&self) -> usize {
        self.comm.iter().filter(|&&c| c).count()
    }
}

/// Algorithm loop: measure, predict `H` steps, send the first `ℓ*` inputs,
/// run them open loop under sampled disturbances, repeat. Stops with the
/// full log if a state leaves its section.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    model: &LtiModel,
    ws: &Workspace,
    mut guide: Guide,
    x0: &[f64],
    horizon: usize,
    steps: usize,
    seed: u64,
    mode: DisturbanceMode,
) -> Result<RunLog, RuntimeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = RunLog {
        states: vec![x0.to_vec()],
        inputs: Vec::new(),
        disturbances: Vec::new(),
        comm: Vec::new(),
        ell_star: Vec::new(),
        letters: Vec::new(),
        instants: Vec::new(),
        seed,
        config_hash: String::new(),
    };
    guide.decide(0, x0).map_err(|_| RuntimeError::StartOutside)?;
    let first = guide.view(0).ok_or(RuntimeError::StartOutside)?;
    if first.section.margin(x0) < -TUBE_TOL {
        return Err(RuntimeError::StartOutside);
    }
    let mut k = 0;
    let mut x = x0.to_vec();
    while k <= steps {
        let pred = compute_controls(&mut guide, model, k, &x, horizon)?;
        let ell_star = next_comm_time(model, &pred);
        if ell_star == 0 {
            return Err(RuntimeError::ZeroCommTime { k });
        }
        for ell in 0..ell_star {
            let kk = k + ell;
            let u = &pred.inputs[ell];
            let w = sample_disturbance(model, mode, &mut rng);
            let next = model.nominal(&x, u).iter().zip(&w).map(|(a, b)| a + b).collect::<Vec<_>>();
            if kk <= steps {
                log.inputs.push(u.clone());
                log.disturbances.push(w);
                log.comm.push(ell == 0);
                log.ell_star.push((ell == 0).then_some(ell_star));
                log.letters.push(ws.region_of(&x).map_or(0, |r| r + 1));
                if kk < steps {
                    log.states.push(next.clone());
                }
            }
            let margin = pred.sections[ell + 1].margin(&next);
            x = next;
            if margin < -TUBE_TOL {
                return Err(RuntimeError::TubeExit { k: kk + 1, margin, log: Box::new(log) });
            }
        }
        log.instants.push(CommInstant { k, ell_star, prediction: pred });
        k += ell_star;
    }
    Ok(log)
}

/// Communication instants of a periodic scheme over the same window.
pub fn periodic_count(steps: usize) -> usize {
    steps + 1
}
