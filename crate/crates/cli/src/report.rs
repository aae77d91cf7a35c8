//! Run CSV (write and read back) and the SVG picture of a run.

use std::fmt::Write as _;
use std::path::Path;

use tubeplan::abstraction::{TransitionSystem, TubeLibrary};
use tubeplan::geometry::{vertices_2d, Polytope, Workspace};
use tubeplan::ltl::Plan;
use tubeplan::runtime::RunLog;

use crate::commands::CliError;

pub fn csv_header(n: usize, m: usize) -> Vec<String> {
    let mut h = vec!["k".to_string()];
    h.extend((0..n).map(|i| format!("x{i}")));
    h.extend((0..m).map(|i| format!("u{i}")));
    h.extend((0..n).map(|i| format!("w{i}")));
    h.extend(["comm_flag", "ell_star", "trace_letter"].map(String::from));
    h
}

pub fn write_run_csv(path: &Path, log: &RunLog) -> Result<(), CliError> {
    let n = log.states[0].len();
    let m = log.inputs.first().map_or(0, |u| u.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(e.to_string()))?;
    w.write_record(csv_header(n, m)).map_err(|e| CliError::Io(e.to_string()))?;
    for k in 0..log.states.len() {
        let mut row = vec![k.to_string()];
        row.extend(log.states[k].iter().map(|v| v.to_string()));
        row.extend(log.inputs[k].iter().map(|v| v.to_string()));
        row.extend(log.disturbances[k].iter().map(|v| v.to_string()));
        row.push(u8::from(log.comm[k]).to_string());
        row.push(log.ell_star[k].map_or(String::new(), |l| l.to_string()));
        row.push(format!("p{}", log.letters[k]));
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

/// States `x_k` from a run CSV, in row order.
pub fn read_run_states(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let bad = |msg: String| CliError::Validation(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let xcols: Vec<usize> =
        header.iter().enumerate().filter(|(_, h)| h.starts_with('x') && h[1..].parse::<usize>().is_ok()).map(|(i, _)| i).collect();
    if header.get(0) != Some("k") || xcols.is_empty() || !header.iter().any(|h| h == "comm_flag") {
        return Err(bad("missing k, x or comm_flag columns".into()));
    }
    let mut states = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let k: usize = rec.get(0).unwrap_or("").parse().map_err(|_| bad(format!("row {row}: bad k")))?;
        if k != row {
            return Err(bad(format!("row {row}: k = {k} out of sequence")));
        }
        let x = xcols
            .iter()
            .map(|&c| rec.get(c).unwrap_or("").parse::<f64>().map_err(|_| bad(format!("row {row}: bad state entry"))))
            .collect::<Result<Vec<_>, _>>()?;
        states.push(x);
    }
    if states.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok(states)
}

const SCALE: f64 = 60.0;

struct Frame {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Frame {
    fn pt(&self, p: &[f64]) -> (f64, f64) {
        ((p[0] - self.lo[0]) * SCALE + 20.0, (self.hi[1] - p[1]) * SCALE + 20.0)
    }

    fn poly(&self, out: &mut String, p: &Polytope, style: &str) {
        let verts = match p.vertices() {
            Some(v) => v.to_vec(),
            None => match vertices_2d(p) {
                Ok(v) => v,
                Err(_) => return,
            },
        };
        let pts: Vec<String> = verts
            .iter()
            .map(|v| {
                let (x, y) = self.pt(v);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(out, r#"<polygon points="{}" {style}/>"#, pts.join(" "));
    }
}

fn star(out: &mut String, x: f64, y: f64) {
    let pts: Vec<String> = (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { 6.0 } else { 2.5 };
            let t = std::f64::consts::PI * (i as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            format!("{:.3},{:.3}", x + r * t.cos(), y + r * t.sin())
        })
        .collect();
    let _ = writeln!(out, r#"<polygon points="{}" fill="red"/>"#, pts.join(" "));
}

/// Workspace, tube outlines for one pass over the plan, the trajectory and
/// its communication instants. Planar workspaces only.
pub fn render_svg(ws: &Workspace, ts: &TransitionSystem, library: &TubeLibrary, plan: &Plan, log: &RunLog) -> Result<String, CliError> {
    if ws.dim() != 2 {
        return Err(CliError::Validation("SVG output needs a planar workspace".into()));
    }
    let (lo, hi) = ws.bounding.bounding_box().map_err(|e| CliError::Io(e.to_string()))?;
    let frame = Frame { lo: lo.clone(), hi: hi.clone() };
    let (w, h) = ((hi[0] - lo[0]) * SCALE + 40.0, (hi[1] - lo[1]) * SCALE + 40.0);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    frame.poly(&mut out, &ws.bounding, r#"fill="none" stroke="black" stroke-width="1.5""#);
    for o in &ws.obstacles {
        frame.poly(&mut out, o, r##"fill="#888888" stroke="black""##);
    }
    for (i, r) in ws.regions.iter().enumerate() {
        frame.poly(&mut out, r, r##"fill="#9ecae1" fill-opacity="0.6" stroke="#3182bd""##);
        let (x, y) = frame.pt(&ws.region_centers[i]);
        let _ = writeln!(
            out,
            r#"<text x="{x:.3}" y="{y:.3}" font-size="14" text-anchor="middle" dominant-baseline="middle">R{}</text>"#,
            i + 1
        );
    }
    let states = plan.states(plan.len());
    for pair in states.windows(2) {
        if pair[0] == pair[1] {
            continue;
        }
        if let Some(cert) = library.transition(ts.region(pair[0]), ts.region(pair[1])) {
            for tube in &cert.tubes {
                for ell in 0..=tube.horizon() {
                    frame.poly(&mut out, &tube.section(ell), r##"fill="none" stroke="#31a354" stroke-opacity="0.25" stroke-width="0.5""##);
                }
            }
        }
    }
    let path: Vec<String> = log
        .states
        .iter()
        .map(|x| {
            let (px, py) = frame.pt(x);
            format!("{px:.3},{py:.3}")
        })
        .collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1"/>"#, path.join(" "));
    for (k, x) in log.states.iter().enumerate() {
        if log.comm[k] {
            let (px, py) = frame.pt(x);
            star(&mut out, px, py);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
