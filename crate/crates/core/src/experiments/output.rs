//! CSV tables and minimal SVG line plots.
//!
//! Every float is written with 17 significant digits (`{:.16e}`) and rows
//! keep the order of their input, so a fixed config yields byte-identical
//! files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::bounds::EnvelopeReport;
use crate::discretization::Grid;
use crate::domain::{delta, Domain1D};
use crate::error::Result;
use crate::kernel::{big_g, script_g, Alpha, EnvelopeParams};

use super::{GapReport, JointSweep, SweepRecord};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SWEEP_HEADER: &str = "mu,alpha,h,xi,lambda,outcome,sup_n,runtime_s";
pub const TRAJECTORY_HEADER: &str = "t,x,n";
pub const FINAL_STATE_HEADER: &str = "x,n,delta,G,script_g";
pub const ENVELOPE_HEADER: &str = "scenario,ratio_min,ratio_max,c1,C1,decay_exponent,r2";
pub const JOINT_HEADER: &str = "alpha,mu,xi,abs_error,depth,hit";
pub const GAP_HEADER: &str = "mu,lambda,gap";

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRecord]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            num(r.mu),
            num(r.alpha),
            num(r.h),
            num(r.xi),
            num(r.lambda),
            r.outcome,
            num(r.sup_n),
            num(r.runtime_s)
        )?;
    }
    Ok(())
}

/// One row per (snapshot, node).
pub fn write_trajectory_csv<W: Write>(mut w: W, nodes: &[f64], trajectory: &[(f64, Vec<f64>)]) -> Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for (t, n) in trajectory {
        for (x, v) in nodes.iter().zip(n) {
            writeln!(w, "{},{},{}", num(*t), num(*x), num(*v))?;
        }
    }
    Ok(())
}

/// Final nodal state next to `δ`, `G` and `𝒢`.
pub fn write_final_state_csv<W: Write>(
    mut w: W,
    grid: &Grid,
    n: &[f64],
    minus: &Domain1D,
    plus: Option<&Domain1D>,
    alpha: Alpha,
    params: EnvelopeParams,
) -> Result<()> {
    writeln!(w, "{FINAL_STATE_HEADER}")?;
    let dom = grid.domain();
    for (&x, &v) in grid.nodes().iter().zip(n) {
        writeln!(
            w,
            "{},{},{},{},{}",
            num(x),
            num(v),
            num(delta(dom, x)),
            num(big_g(x, minus, plus, alpha)),
            num(script_g(x, dom, minus, plus, alpha, params))
        )?;
    }
    Ok(())
}

pub fn write_envelope_csv<W: Write>(mut w: W, rows: &[(String, EnvelopeReport)]) -> Result<()> {
    writeln!(w, "{ENVELOPE_HEADER}")?;
    let opt = |v: Option<f64>| num(v.unwrap_or(f64::NAN));
    for (name, r) in rows {
        writeln!(
            w,
            "{name},{},{},{},{},{},{}",
            num(r.ratio_min),
            num(r.ratio_max),
            num(r.fitted_c1),
            num(r.fitted_big_c1),
            opt(r.decay_exponent),
            opt(r.decay_r2)
        )?;
    }
    Ok(())
}

pub fn write_joint_csv<W: Write>(mut w: W, sweep: &JointSweep) -> Result<()> {
    writeln!(w, "{JOINT_HEADER}")?;
    for s in &sweep.steps {
        writeln!(w, "{},{},{},{},{},{}", num(s.alpha), num(s.mu), num(s.xi), num(s.error), s.depth, s.hit)?;
    }
    Ok(())
}

pub fn write_gap_csv<W: Write>(mut w: W, report: &GapReport) -> Result<()> {
    writeln!(w, "{GAP_HEADER}")?;
    for ((mu, l), g) in report.mus.iter().zip(&report.lambdas).zip(&report.gaps) {
        writeln!(w, "{},{},{}", num(*mu), num(*l), num(*g))?;
    }
    Ok(())
}

/// Creates `dir` and writes `name` inside it through `f`.
pub fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<std::path::PathBuf>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
{
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Line plot with linear axes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

impl LinePlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        LinePlot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn with_series(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { label: label.into(), points });
        self
    }

    pub fn to_svg(&self) -> String {
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = bounds(all().map(|p| p.0));
        let (y0, y1) = bounds(all().map(|p| p.1));
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<path d="M{LEFT} {TOP} V{} H{}" fill="none" stroke="black"/>"#,
            TOP + ph,
            LEFT + pw
        );
        for k in 0..=5 {
            let f = k as f64 / 5.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 20.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                py + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
            let ly = TOP + 16.0 * k as f64 + 8.0;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}
