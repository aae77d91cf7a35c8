//! The finite transition system over regions of interest, the tube and
//! control library attached to its edges, and an on-disk cache of both.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::LtiModel;
use crate::geometry::{Polytope, Workspace};
use crate::trajgen::{self, TrajgenOptions};
use crate::tubesynth::{self, InvarianceCertificate, ReachCertificate, ReachStatus, TubeOptions};

/// Bump when the cache layout changes.
pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbstractionOptions {
    pub seed: u64,
    /// Fresh RRT runs from the region center before falling back to
    /// multi-start.
    pub rrt_attempts: usize,
    /// Starting points for the multi-start fallback (0 disables it).
    pub multi_starts: usize,
    /// Tube cross-section shape; `None` uses each source region's own shape.
    pub shape: Option<Polytope>,
    pub trajgen: TrajgenOptions,
    pub tubes: TubeOptions,
}

impl Default for AbstractionOptions {
    fn default() -> Self {
        AbstractionOptions {
            seed: 0,
            rrt_attempts: 5,
            multi_starts: 4,
            shape: None,
            trajgen: TrajgenOptions::default(),
            tubes: TubeOptions::default(),
        }
    }
}

/// `𝒯 = (S, s_init, δ, Π, g)`. State `s` stands for region `s` and carries
/// proposition `s + 1`; proposition 0 is the dummy symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSystem {
    pub states: usize,
    pub initial: usize,
    /// Sorted, duplicate-free.
    pub edges: Vec<(usize, usize)>,
}

impl TransitionSystem {
    pub fn new(states: usize, initial: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = edges.into_iter().filter(|&(a, b)| a < states && b < states).collect();
        edges.sort_unstable();
        edges.dedup();
        TransitionSystem { states, initial, edges }
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.binary_search(&(from, to)).is_ok()
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.edges.partition_point(|&(a, _)| a < from);
        self.edges[start..].iter().take_while(move |&&(a, _)| a == from).map(|&(_, b)| b)
    }

    /// `g(s)`.
    pub fn label(&self, state: usize) -> usize {
        state + 1
    }

    /// `Γ(s)`: index of the region behind a state.
    pub fn region(&self, state: usize) -> usize {
        state
    }

    /// `Γ⁻¹`.
    pub fn state_of_region(&self, region: usize) -> Option<usize> {
        (region < self.states).then_some(region)
    }
}

/// Library entries, one per edge of `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeLibrary {
    /// Certified transitions between distinct regions, sorted by pair.
    pub transitions: Vec<ReachCertificate>,
    /// Invariant regions, sorted by index.
    pub self_loops: Vec<InvarianceCertificate>,
}

impl TubeLibrary {
    pub fn transition(&self, from: usize, to: usize) -> Option<&ReachCertificate> {
        self.transitions.iter().find(|c| c.source == from && c.target == to)
    }

    pub fn self_loop(&self, region: usize) -> Option<&InvarianceCertificate> {
        self.self_loops.iter().find(|c| c.region == region)
    }
}

/// How a pair or self-loop job went.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub source: usize,
    pub target: usize,
    pub certified: bool,
    /// Tube sequences in the certificate (0 when not certified).
    pub tubes: usize,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Abstraction {
    pub system: TransitionSystem,
    pub library: TubeLibrary,
    pub reports: Vec<JobReport>,
}

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error("initial region {0} does not exist")]
    BadInitialRegion(usize),
    #[error("state {x:?} is outside the free space")]
    OutsideFreeSpace { x: Vec<f64> },
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format: {0}")]
    Format(#[from] serde_json::Error),
    #[error("cache version {found}, expected {CACHE_VERSION}")]
    Version { found: u32 },
}

/// Seed for attempt `attempt` of pair `(i, j)`.
fn job_seed(seed: u64, i: usize, j: usize, attempt: usize) -> u64 {
    // splitmix64 over the packed job id
    let mut z = seed ^ ((i as u64) << 40 | (j as u64) << 20 | attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Reachability job for one ordered pair: RRT from the region center with
/// up to `rrt_attempts` seeds, then multi-start.
pub fn certify_pair(model: &LtiModel, ws: &Workspace, i: usize, j: usize, opts: &AbstractionOptions) -> ReachCertificate {
    let shape = opts.shape.clone().unwrap_or_else(|| tubesynth::default_shape(ws, i));
    let mut diagnostics = Vec::new();
    for attempt in 0..opts.rrt_attempts {
        let seed = job_seed(opts.seed, i, j, attempt);
        let traj = match trajgen::plan_nominal(model, ws, i, j, seed, &opts.trajgen) {
            Ok(t) => t,
            Err(e) => {
                diagnostics.push(format!("attempt {attempt}: {e}"));
                continue;
            }
        };
        let seq = match tubesynth::synthesize_tubes(model, ws, i, j, &traj, &shape, &opts.tubes) {
            Ok(Some(seq)) => seq,
            Ok(None) => {
                diagnostics.push(format!("attempt {attempt}: tube LP infeasible (L = {})", traj.horizon()));
                continue;
            }
            Err(e) => {
                diagnostics.push(format!("attempt {attempt}: {e}"));
                continue;
            }
        };
        match tubesynth::check_reachability(&seq, ws) {
            Ok(mut cert) if cert.status == ReachStatus::Reachable => {
                diagnostics.push(format!("attempt {attempt}: certified (L = {})", seq.horizon()));
                cert.diagnostics = diagnostics;
                return cert;
            }
            Ok(cert) => diagnostics.extend(cert.diagnostics.into_iter().map(|d| format!("attempt {attempt}: {d}"))),
            Err(e) => diagnostics.push(format!("attempt {attempt}: {e}")),
        }
    }
    if opts.multi_starts > 0 {
        let seed = job_seed(opts.seed, i, j, opts.rrt_attempts);
        match tubesynth::multi_start_reachability(model, ws, i, j, opts.multi_starts, seed, &shape, &opts.trajgen, &opts.tubes) {
            Ok(mut cert) => {
                diagnostics.extend(cert.diagnostics.drain(..).map(|d| format!("multi-start: {d}")));
                cert.diagnostics = diagnostics;
                return cert;
            }
            Err(e) => diagnostics.push(format!("multi-start: {e}")),
        }
    }
    ReachCertificate { source: i, target: j, status: ReachStatus::NotCertified, tubes: Vec::new(), diagnostics }
}

enum Job {
    Pair(ReachCertificate),
    Loop(Result<InvarianceCertificate, String>, usize),
}

/// Runs every self-loop and ordered-pair job (concurrently) and assembles
/// `𝒯` and its library. Uncertified edges are left out.
pub fn build(model: &LtiModel, ws: &Workspace, init_region: usize, opts: &AbstractionOptions) -> Result<Abstraction, AbstractionError> {
    let n = ws.regions.len();
    if init_region >= n {
        return Err(AbstractionError::BadInitialRegion(init_region));
    }
    let mut jobs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    jobs.extend((0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))));
    let done: Vec<Job> = jobs
        .par_iter()
        .map(|&(i, j)| {
            if i == j {
                Job::Loop(tubesynth::check_invariance(model, &ws.regions[i], i).map_err(|e| e.to_string()), i)
            } else {
                Job::Pair(certify_pair(model, ws, i, j, opts))
            }
        })
        .collect();

    let mut edges = Vec::new();
    let mut transitions = Vec::new();
    let mut self_loops = Vec::new();
    let mut reports = Vec::new();
    for job in done {
        match job {
            Job::Loop(Ok(cert), i) => {
                reports.push(JobReport {
                    source: i,
                    target: i,
                    certified: cert.invariant,
                    tubes: 0,
                    diagnostics: vec![format!("vertex clearance {:.6}", cert.margin)],
                });
                if cert.invariant {
                    edges.push((i, i));
                    self_loops.push(cert);
                }
            }
            Job::Loop(Err(e), i) => {
                reports.push(JobReport { source: i, target: i, certified: false, tubes: 0, diagnostics: vec![e] });
            }
            Job::Pair(cert) => {
                let certified = cert.status == ReachStatus::Reachable;
                reports.push(JobReport {
                    source: cert.source,
                    target: cert.target,
                    certified,
                    tubes: if certified { cert.tubes.len() } else { 0 },
                    diagnostics: cert.diagnostics.clone(),
                });
                if certified {
                    edges.push((cert.source, cert.target));
                    transitions.push(cert);
                }
            }
        }
    }
    transitions.sort_by_key(|c| (c.source, c.target));
    self_loops.sort_by_key(|c| c.region);
    reports.sort_by_key(|r| (r.source, r.target));
    Ok(Abstraction { system: TransitionSystem::new(n, init_region, edges), library: TubeLibrary { transitions, self_loops }, reports })
}

/// `h_X(x)`: proposition of the region containing `x`, or 0 in free space
/// outside every region.
pub fn label_state(ws: &Workspace, x: &[f64]) -> Result<usize, AbstractionError> {
    if !ws.in_free_space(x) {
        return Err(AbstractionError::OutsideFreeSpace { x: x.to_vec() });
    }
    Ok(ws.region_of(x).map_or(0, |r| r + 1))
}

/// Hex SHA-256 of everything the abstraction depends on.
pub fn cache_key(model: &LtiModel, ws: &Workspace, init_region: usize, opts: &AbstractionOptions) -> String {
    let bytes = serde_json::to_vec(&(CACHE_VERSION, model, ws, init_region, opts)).expect("inputs serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheFile {
    pub version: u32,
    pub key: String,
    pub abstraction: Abstraction,
}

impl CacheFile {
    pub fn save(&self, path: &Path) -> Result<(), AbstractionError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, AbstractionError> {
        let text = std::fs::read_to_string(path)?;
        let file: CacheFile = serde_json::from_str(&text)?;
        if file.version != CACHE_VERSION {
            return Err(AbstractionError::Version { found: file.version });
        }
        Ok(file)
    }
}

/// Loads the cache at `path` when its key matches, otherwise builds and
/// writes it. The flag reports a cache hit.
pub fn build_cached(
    model: &LtiModel,
    ws: &Workspace,
    init_region: usize,
    opts: &AbstractionOptions,
    path: &Path,
) -> Result<(Abstraction, bool), AbstractionError> {
    let key = cache_key(model, ws, init_region, opts);
    if let Ok(file) = CacheFile::load(path) {
        if file.key == key {
            return Ok((file.abstraction, true));
        }
    }
    let abstraction = build(model, ws, init_region, opts)?;
    CacheFile { version: CACHE_VERSION, key, abstraction: abstraction.clone() }.save(path)?;
    Ok((abstraction, false))
}
