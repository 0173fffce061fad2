//! Self-contained SVG plots: planar trajectory traces, direction verdict
//! roses and `r_n` growth curves.

use std::f64::consts::TAU;
use std::fmt::Write;
use std::fs;
use std::path::Path;

use crate::direction_estimator::Verdict;
use crate::error::{Error, Result};

const SIZE: f64 = 400.0;
const PAD: f64 = 20.0;

#[derive(Clone, Debug, PartialEq)]
pub enum PlotData {
    /// Planar points `S_n`.
    Trajectory(Vec<[f64; 2]>),
    /// `(angle, verdict)` per grid direction.
    Rose(Vec<(f64, Verdict)>),
    /// `(n, r_n)` at checkpoints.
    Growth(Vec<(u64, f64)>),
}

impl PlotData {
    fn len(&self) -> usize {
        match self {
            PlotData::Trajectory(p) => p.len(),
            PlotData::Rose(w) => w.len(),
            PlotData::Growth(g) => g.len(),
        }
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Maps `[lo, hi]` to `[PAD, SIZE - PAD]`.
fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        PAD + (v - lo) / (hi - lo) * (SIZE - 2.0 * PAD)
    } else {
        SIZE / 2.0
    }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn polyline(points: &[(f64, f64)], stroke: &str) -> String {
    let mut s = format!("<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1\" points=\"");
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{x:.2},{y:.2}").unwrap();
    }
    s.push_str("\"/>\n");
    s
}

fn trajectory(points: &[[f64; 2]]) -> String {
    // equal aspect ratio so directions are not distorted
    let (x0, x1) = bounds(points.iter().map(|p| p[0]));
    let (y0, y1) = bounds(points.iter().map(|p| p[1]));
    let half = ((x1 - x0).max(y1 - y0) / 2.0).max(f64::MIN_POSITIVE);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let mapped: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            (
                scale(p[0], cx - half, cx + half),
                SIZE - scale(p[1], cy - half, cy + half),
            )
        })
        .collect();
    let mut s = header("trajectory");
    s += &polyline(&mapped, "black");
    let (ox, oy) = mapped[0];
    writeln!(s, "<circle cx=\"{ox:.2}\" cy=\"{oy:.2}\" r=\"3\" fill=\"red\"/>").unwrap();
    s + "</svg>\n"
}

fn rose(wedges: &[(f64, Verdict)]) -> String {
    let c = SIZE / 2.0;
    let r = c - PAD;
    let half = TAU / (2.0 * wedges.len() as f64);
    let mut s = header("direction verdicts");
    for (theta, v) in wedges {
        let (a, b) = (theta - half, theta + half);
        let (class, fill) = match v {
            Verdict::In => ("in", "#2b8cbe"),
            Verdict::Out => ("out", "#eeeeee"),
            Verdict::Undecided => ("undecided", "#fdae6b"),
        };
        writeln!(
            s,
            "<path class=\"wedge {class}\" fill=\"{fill}\" stroke=\"white\" d=\"M{c:.2},{c:.2} L{:.2},{:.2} A{r:.2},{r:.2} 0 0 0 {:.2},{:.2} Z\"/>",
            c + r * a.cos(),
            c - r * a.sin(),
            c + r * b.cos(),
            c - r * b.sin()
        )
        .unwrap();
    }
    s + "</svg>\n"
}

fn growth(rows: &[(u64, f64)]) -> String {
    let xs: Vec<f64> = rows.iter().map(|(n, _)| (*n as f64).max(1.0).log2()).collect();
    let (x0, x1) = bounds(xs.iter().copied());
    let (_, y1) = bounds(rows.iter().map(|r| r.1));
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(rows)
        .map(|(x, (_, r))| (scale(*x, x0, x1), SIZE - scale(*r, 0.0, y1.max(1e-12))))
        .collect();
    let mut s = header("inscribed radius against log2 n");
    s += &polyline(&pts, "black");
    s + "</svg>\n"
}

pub fn render(data: &PlotData) -> Result<String> {
    if data.len() == 0 {
        return Err(Error::InvalidInput("nothing to plot".into()));
    }
    Ok(match data {
        PlotData::Trajectory(p) => trajectory(p),
        PlotData::Rose(w) => rose(w),
        PlotData::Growth(g) => growth(g),
    })
}

/// Renders first, so a failed render never leaves a file behind.
pub fn emit_plot(data: &PlotData, path: &Path) -> Result<()> {
    let svg = render(data)?;
    fs::write(path, svg)?;
    Ok(())
}

fn parse_f(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("line {line}: not a number: {s:?}")))
}

/// Reads a trajectory, direction-estimate or hull CSV written by this crate.
pub fn from_csv(text: &str) -> Result<PlotData> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| Error::InvalidInput("empty CSV".into()))?;
    let cols: Vec<&str> = head.split(',').collect();
    let col = |name: &str| cols.iter().position(|c| *c == name);
    let rows: Vec<(usize, Vec<&str>)> = lines.map(|(i, l)| (i + 1, l.split(',').collect())).collect();
    if let (Some(v), Some(u0)) = (col("verdict"), col("u0")) {
        let m = rows.len();
        let planar = col("u2").is_none() && col("u1").is_some();
        let mut wedges = Vec::with_capacity(m);
        for (k, (line, r)) in rows.iter().enumerate() {
            let verdict = match r.get(v).copied() {
                Some("IN") => Verdict::In,
                Some("OUT") => Verdict::Out,
                Some("UNDECIDED") => Verdict::Undecided,
                other => return Err(Error::InvalidInput(format!("line {line}: bad verdict {other:?}"))),
            };
            let theta = if planar {
                let x = parse_f(r[u0], *line)?;
                let y = parse_f(r[u0 + 1], *line)?;
                y.atan2(x)
            } else {
                TAU * k as f64 / m as f64
            };
            wedges.push((theta, verdict));
        }
        return Ok(PlotData::Rose(wedges));
    }
    if let (Some(n), Some(r)) = (col("n"), col("r_n")) {
        let g = rows
            .iter()
            .map(|(line, row)| Ok((parse_f(row[n], *line)? as u64, parse_f(row[r], *line)?)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(PlotData::Growth(g));
    }
    if let (Some(s0), Some(_)) = (col("s0"), col("s1")) {
        if col("s2").is_some() {
            return Err(Error::UnsupportedDimension {
                dimension: cols.iter().filter(|c| c.starts_with('s')).count(),
                reason: "trajectory traces are planar".into(),
            });
        }
        let mut pts = Vec::with_capacity(rows.len() + 1);
        if rows.first().is_some_and(|(_, r)| r[0] != "0") {
            pts.push([0.0, 0.0]);
        }
        for (line, r) in &rows {
            let p = [parse_f(r[s0], *line)?, parse_f(r[s0 + 1], *line)?];
            if p.iter().all(|v| v.is_finite()) {
                pts.push(p);
            }
        }
        return Ok(PlotData::Trajectory(pts));
    }
    Err(Error::InvalidInput(format!("unrecognised CSV header: {head}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertex_count(svg: &str) -> usize {
        let start = svg.find("points=\"").unwrap() + 8;
        let end = start + svg[start..].find('"').unwrap();
        svg[start..end].split(' ').count()
    }

    #[test]
    fn three_point_trace() {
        let svg = render(&PlotData::Trajectory(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]])).unwrap();
        assert_eq!(vertex_count(&svg), 3);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_series_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.svg");
        assert!(emit_plot(&PlotData::Trajectory(vec![]), &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("x.svg");
        assert!(emit_plot(&PlotData::Growth(vec![(1, 0.0)]), &path).is_err());
    }

    #[test]
    fn full_circle_rose() {
        let wedges: Vec<(f64, Verdict)> = (0..64).map(|k| (TAU * k as f64 / 64.0, Verdict::In)).collect();
        let svg = render(&PlotData::Rose(wedges)).unwrap();
        assert_eq!(svg.matches("class=\"wedge in\"").count(), 64);
        assert_eq!(svg.matches("class=\"wedge").count(), 64);
    }

    #[test]
    fn csv_kinds_detected() {
        let t = "n,s0,s1,norm,u0,u1,max_jump,rest,k\n1,1,0,1,1,0,,,\n2,1,1,1.4,0.7,0.7,,,\n";
        assert_eq!(from_csv(t).unwrap(), PlotData::Trajectory(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]));
        let h = "n,r_n,vertex_count\n1,0,2\n2,0.5,4\n";
        assert_eq!(from_csv(h).unwrap(), PlotData::Growth(vec![(1, 0.0), (2, 0.5)]));
        let d = "index,u0,u1,verdict,top_level\n0,1,0,IN,3\n1,0,1,OUT,\n";
        match from_csv(d).unwrap() {
            PlotData::Rose(w) => assert_eq!(w[1].1, Verdict::Out),
            other => panic!("{other:?}"),
        }
        assert!(from_csv("a,b\n1,2\n").is_err());
        assert!(from_csv("").is_err());
    }
}
