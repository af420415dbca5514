//! Self-contained SVG line plots (no external references), with an
//! optional logarithmic y axis for decay curves.

use std::io::Write;
use std::path::Path;

use crate::config::CliError;

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
}

const W: f64 = 800.0;
const H: f64 = 500.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub fn emit_svg(series: &[Series], opts: &PlotOptions, path: &Path) -> Result<(), CliError> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(CliError::Usage("refusing to plot an empty series set".into()));
    }
    let ymap = |y: f64| if opts.log_y { y.max(1e-300).log10() } else { y };
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            let ym = ymap(y);
            ymin = ymin.min(ym);
            ymax = ymax.max(ym);
        }
    }
    if xmax <= xmin {
        xmax = xmin + 1.0;
    }
    if ymax <= ymin {
        ymax = ymin + 1.0;
    }
    let px = |x: f64| ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
    let py = |y: f64| H - MB - (ymap(y) - ymin) / (ymax - ymin) * (H - MT - MB);

    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">"
    )?;
    writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>")?;
    writeln!(
        out,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        W / 2.0,
        opts.title
    )?;
    // axes
    writeln!(
        out,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        H - MB,
        W - MR,
        H - MB
    )?;
    writeln!(
        out,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>",
        H - MB
    )?;
    // ticks
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let xv = xmin + f * (xmax - xmin);
        let xp = px(xv);
        writeln!(
            out,
            "<line x1=\"{xp:.2}\" y1=\"{}\" x2=\"{xp:.2}\" y2=\"{}\" stroke=\"black\"/>",
            H - MB,
            H - MB + 5.0
        )?;
        writeln!(
            out,
            "<text x=\"{xp:.2}\" y=\"{}\" text-anchor=\"middle\">{xv:.3}</text>",
            H - MB + 18.0
        )?;
        let yv = ymin + f * (ymax - ymin);
        let yp = H - MB - f * (H - MT - MB);
        let label = if opts.log_y {
            format!("1e{yv:.1}")
        } else {
            format!("{yv:.3}")
        };
        writeln!(
            out,
            "<line x1=\"{}\" y1=\"{yp:.2}\" x2=\"{ML}\" y2=\"{yp:.2}\" stroke=\"black\"/>",
            ML - 5.0
        )?;
        writeln!(
            out,
            "<text x=\"{}\" y=\"{yp:.2}\" text-anchor=\"end\" dominant-baseline=\"middle\">{label}</text>",
            ML - 8.0
        )?;
    }
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        H - 12.0,
        opts.x_label
    )?;
    writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        H / 2.0,
        H / 2.0,
        opts.y_label
    )?;
    // one polyline per series plus legend entry
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        )?;
        let lx = W - MR - 150.0;
        let ly = MT + 16.0 * k as f64 + 10.0;
        writeln!(
            out,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            lx + 20.0
        )?;
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            lx + 26.0,
            ly + 4.0,
            s.name
        )?;
    }
    writeln!(out, "</svg>")?;
    out.flush()?;
    Ok(())
}
