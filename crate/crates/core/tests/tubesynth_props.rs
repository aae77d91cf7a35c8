mod oracles;

use nalgebra::DMatrix;
use proptest::prelude::*;
use tubeplan::dynamics::LtiModel;
use tubeplan::geometry::{Polytope, Workspace};
use tubeplan::runtime::interpolate_lambda;
use tubeplan::trajgen::{NominalTrajectory, TrajgenOptions};
use tubeplan::tubesynth::*;

use oracles::lp::vertex_enumeration_max;

fn interval(lo: f64, hi: f64) -> Polytope {
    Polytope::boxed(&[lo], &[hi]).unwrap()
}

fn square(c: [f64; 2], r: f64) -> Polytope {
    Polytope::boxed(&[c[0] - r, c[1] - r], &[c[0] + r, c[1] + r]).unwrap()
}

fn line_model(b: f64, w: f64) -> LtiModel {
    LtiModel::new(DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, b), interval(-1.0, 1.0), interval(-w, w)).unwrap()
}

fn line_ws(source: Polytope, target: Polytope) -> Workspace {
    Workspace::new(interval(-10.0, 10.0), vec![], vec![source, target]).unwrap()
}

fn traj(points: &[f64]) -> NominalTrajectory {
    NominalTrajectory { states: points.iter().map(|p| vec![*p]).collect(), inputs: points.windows(2).map(|w| vec![w[1] - w[0]]).collect() }
}

/// The toy LP written out by hand. Variables: ε0 ε1 ε2, then the inputs of
/// the two vertices (z = +1, z = −1) at steps 0 and 1.
fn toy_lp_rows(w: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let step = 1.0; // x̂_{ℓ+1} − x̂_ℓ
    for l in 0..2 {
        for (s, z) in [1.0f64, -1.0].into_iter().enumerate() {
            let u = 3 + 2 * l + s;
            for a in [1.0f64, -1.0] {
                // a(ε_ℓ z + u) − ε_{ℓ+1} <= a·step − w
                let mut row = vec![0.0; 7];
                row[l] = a * z;
                row[l + 1] = -1.0;
                row[u] = a;
                rows.push(row);
                rhs.push(a * step - w);
            }
        }
    }
    // terminal: 2 + ε2 <= 2.5, −2 + ε2 <= −1.5
    for _ in 0..2 {
        let mut row = vec![0.0; 7];
        row[2] = 1.0;
        rows.push(row);
        rhs.push(0.5);
    }
    let bars = [10.0, 9.0, 8.0];
    for v in 0..7 {
        let (lo, hi) = if v < 3 { (EPS_MIN, bars[v] - BISECTION_TOL) } else { (-1.0, 1.0) };
        let mut up = vec![0.0; 7];
        up[v] = 1.0;
        rows.push(up.clone());
        rhs.push(hi);
        up[v] = -1.0;
        rows.push(up);
        rhs.push(-lo);
    }
    (rows, rhs)
}

#[test]
fn toy_tube_lp_matches_enumeration() {
    let (rows, rhs) = toy_lp_rows(0.1);
    let mut c = vec![0.0; 7];
    c[0] = 1.0;
    let oracle = vertex_enumeration_max(&c, &rows, &rhs).unwrap();
    assert!((oracle - 0.3).abs() < 1e-9, "oracle {oracle}");

    // frozen from the oracle above
    const EPS0_GOLDEN: f64 = 0.3;
    let model = line_model(1.0, 0.1);
    let ws = line_ws(interval(-0.5, 0.5), interval(1.5, 2.5));
    for secondary in [false, true] {
        let opts = TubeOptions { secondary_objective: secondary, ..TubeOptions::default() };
        let seq = synthesize_tubes(&model, &ws, 0, 1, &traj(&[0.0, 1.0, 2.0]), &interval(-1.0, 1.0), &opts).unwrap().unwrap();
        assert!((seq.scales[0] - EPS0_GOLDEN).abs() < 1e-6, "{:?}", seq.scales);
        assert!(seq.scales[2] <= 0.5 + 1e-9);
        // each step may shrink by at most what it gains from the erosion margin
        for l in 0..2 {
            assert!(seq.scales[l] <= seq.scales[l + 1] - 0.1 + 1e-7);
        }
        check_tube_sequence(&model, &ws, &seq).unwrap();
    }
}

#[test]
fn disturbance_swallowing_target_is_infeasible() {
    let model = line_model(1.0, 0.6);
    let ws = line_ws(interval(-0.5, 0.5), interval(1.5, 2.5));
    let out = synthesize_tubes(&model, &ws, 0, 1, &traj(&[0.0, 1.0, 2.0]), &interval(-1.0, 1.0), &TubeOptions::default()).unwrap();
    assert!(out.is_none());
}

#[test]
fn static_tube() {
    // Without input authority the section cannot shrink: ε0 = ε1 = terminal bound.
    let ws = line_ws(interval(-5.0, -4.0), interval(1.0, 3.0));
    let t = NominalTrajectory { states: vec![vec![2.0], vec![2.0]], inputs: vec![vec![0.0]] };
    let zero_w =
        LtiModel::new(DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 0.0), interval(-1.0, 1.0), interval(0.0, 0.0)).unwrap();
    let seq = synthesize_tubes(&zero_w, &ws, 0, 1, &t, &interval(-1.0, 1.0), &TubeOptions::default()).unwrap().unwrap();
    assert!((seq.scales[0] - 1.0).abs() < 1e-6 && (seq.scales[1] - 1.0).abs() < 1e-6, "{:?}", seq.scales);
    // With B = 1 each vertex can be pulled in by |u| <= 1.
    let steer = line_model(1.0, 0.0);
    let seq = synthesize_tubes(&steer, &ws, 0, 1, &t, &interval(-1.0, 1.0), &TubeOptions::default()).unwrap().unwrap();
    assert!((seq.scales[0] - 2.0).abs() < 1e-6 && (seq.scales[1] - 1.0).abs() < 1e-6, "{:?}", seq.scales);
}

fn pair_ws() -> Workspace {
    Workspace::new(square([0.0, 0.0], 5.0), vec![], vec![square([0.0, 0.0], 0.5), square([3.0, 0.0], 0.5)]).unwrap()
}

fn manual_sequence(centers: &[[f64; 2]], scale: f64) -> TubeSequence {
    TubeSequence {
        source: 0,
        target: 1,
        shape: square([0.0, 0.0], 1.0),
        centers: centers.iter().map(|c| c.to_vec()).collect(),
        scales: vec![scale; centers.len()],
        controls: vec![vec![vec![0.0, 0.0]; 4]; centers.len() - 1],
    }
}

#[test]
fn small_initial_section_fails_coverage() {
    let ws = pair_ws();
    let cert = check_reachability(&manual_sequence(&[[0.0, 0.0], [1.5, 0.0], [3.0, 0.0]], 0.3), &ws).unwrap();
    assert_eq!(cert.status, ReachStatus::NotCertified);
    assert!(cert.diagnostics.iter().any(|d| d.starts_with("coverage")));
    assert!(!cert.diagnostics.iter().any(|d| d.starts_with("no-return")));
}

#[test]
fn returning_sequence_fails_no_return() {
    let ws = pair_ws();
    let seq = manual_sequence(&[[0.0, 0.0], [3.0, 0.0], [0.0, 0.0], [3.0, 0.0]], 0.5);
    let cert = check_reachability(&seq, &ws).unwrap();
    assert_eq!(cert.status, ReachStatus::NotCertified);
    assert!(cert.diagnostics.iter().any(|d| d.starts_with("no-return")));
    assert!(!cert.diagnostics.iter().any(|d| d.starts_with("coverage")));
    let direct = manual_sequence(&[[0.0, 0.0], [1.5, 0.0], [3.0, 0.0]], 0.5);
    assert_eq!(check_reachability(&direct, &ws).unwrap().status, ReachStatus::Reachable);
}

#[test]
fn multi_start_with_hopeless_disturbance() {
    let ws = pair_ws();
    let model = LtiModel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2), square([0.0, 0.0], 1.0), square([0.0, 0.0], 0.6)).unwrap();
    let cert =
        multi_start_reachability(&model, &ws, 0, 1, 3, 5, &square([0.0, 0.0], 1.0), &TrajgenOptions::default(), &TubeOptions::default())
            .unwrap();
    assert_eq!(cert.status, ReachStatus::NotCertified);
    assert!(cert.tubes.is_empty());
    assert_eq!(cert.diagnostics.iter().filter(|d| d.contains("infeasible")).count(), 3);
}

#[test]
fn single_start_agrees_with_its_own_checks() {
    let ws = pair_ws();
    let model =
        LtiModel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2) * 0.1, square([0.0, 0.0], 3.0), square([0.0, 0.0], 0.02)).unwrap();
    let shape = square([0.0, 0.0], 1.0);
    for seed in 0..4 {
        let cert =
            multi_start_reachability(&model, &ws, 0, 1, 1, seed, &shape, &TrajgenOptions::default(), &TubeOptions::default()).unwrap();
        assert!(cert.tubes.len() <= 1);
        let expected = match cert.tubes.first() {
            Some(t) => {
                check_tube_sequence(&model, &ws, t).unwrap();
                grid_covered(&ws.regions[0], &[t.section(0)]).unwrap() && reach_checks(t, &ws).unwrap().no_return
            }
            None => false,
        };
        assert_eq!(cert.status == ReachStatus::Reachable, expected, "seed {seed}");
    }
}

#[test]
fn vertex_controls_keep_a_square_invariant() {
    let model = LtiModel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2), square([0.0, 0.0], 1.0), square([0.0, 0.0], 0.05)).unwrap();
    let region = square([1.0, 1.0], 0.5);
    let cert = check_invariance(&model, &region, 0).unwrap();
    assert!(cert.invariant);
    let wv = model.disturbance_set.vertices().unwrap().to_vec();
    let n = 40;
    for a in 0..=n {
        for b in 0..=n {
            let x = vec![0.5 + a as f64 / n as f64, 0.5 + b as f64 / n as f64];
            let lambda = interpolate_lambda(&cert.vertices, &x).unwrap();
            let mut u = [0.0; 2];
            for (l, c) in lambda.iter().zip(&cert.controls) {
                u[0] += l * c[0];
                u[1] += l * c[1];
            }
            for w in &wv {
                let next = model.step(&x, &u, w).unwrap();
                assert!(region.contains_point(&next, 1e-9), "x {x:?} -> {next:?}");
            }
        }
    }
}

/// Cell centers of the δ-grid over `[0, 1]` (δ = 0.02) that fall outside
/// the union of the intervals.
fn uncovered_cells(intervals: &[(f64, f64)]) -> usize {
    (0..50)
        .filter(|c| {
            let p = 0.02 * (*c as f64 + 0.5);
            !intervals.iter().any(|(lo, hi)| *lo - 1e-9 <= p && p <= *hi + 1e-9)
        })
        .count()
}

proptest! {
    #[test]
    fn grid_coverage_matches_interval_union(a in -0.2..0.2f64, b in 0.2..0.8f64, c in 0.2..0.8f64, d in 0.8..1.2f64) {
        let sections = [(a, b), (c, d)];
        let polys: Vec<Polytope> = sections.iter().map(|(lo, hi)| interval(*lo, *hi)).collect();
        let covered = grid_covered(&interval(0.0, 1.0), &polys).unwrap();
        prop_assert_eq!(covered, uncovered_cells(&sections) == 0);
        // exact union covers ⇒ grid covers
        if a <= 0.0 && d >= 1.0 && c <= b {
            prop_assert!(covered);
        }
    }
}
