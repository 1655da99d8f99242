//! Static SVG rendering of sweep results.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sweep::{Output, SweepResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Perceptually ordered stops, dark to bright.
const COLORMAP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn colormap(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (COLORMAP.len() - 1) as f64;
    let i = (t.floor() as usize).min(COLORMAP.len() - 2);
    let f = t - i as f64;
    let (a, b) = (COLORMAP[i], COLORMAP[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0).max(f64::MIN_POSITIVE) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0).max(f64::MIN_POSITIVE) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, svg: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            svg,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        for x in ticks(self.x0, self.x1, 6) {
            let p = self.px(x);
            let _ = writeln!(
                svg,
                r#"<line x1="{p:.2}" y1="{b}" x2="{p:.2}" y2="{}" stroke="black"/><text x="{p:.2}" y="{}" text-anchor="middle">{}</text>"#,
                b + 5.0,
                b + 20.0,
                label(x)
            );
        }
        for y in ticks(self.y0, self.y1, 6) {
            let p = self.py(y);
            let _ = writeln!(
                svg,
                r#"<line x1="{}" y1="{p:.2}" x2="{l}" y2="{p:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                l - 5.0,
                l - 8.0,
                p + 4.0,
                label(y)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{xlabel}</text>"#,
            (l + r) / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{ylabel}</text>"#,
            (t + b) / 2.0,
            (t + b) / 2.0
        );
    }
}

fn open(title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<title>{title}</title>"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg
}

/// Curves of every numeric output against a single swept axis.
pub fn line_plot(result: &SweepResult, title: &str) -> Result<String> {
    let spec = &result.spec;
    if spec.axes.len() != 1 {
        return Err(Error::Usage("line plots need a one-axis sweep".into()));
    }
    let xs: Vec<f64> = result.rows.iter().map(|r| r.coordinates[0]).collect();
    let series: Vec<(Output, Vec<f64>)> = spec
        .outputs
        .iter()
        .filter_map(|&o| result.column(o).map(|c| (o, c)))
        .collect();
    if series.is_empty() || xs.is_empty() {
        return Err(Error::Usage("nothing numeric to plot".into()));
    }
    let ymax = series
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let ymin = series
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    let frame = Frame {
        x0: spec.axes[0].min,
        x1: spec.axes[0].max,
        y0: ymin,
        y1: if ymax > ymin { ymax * 1.05 } else { ymin + 1.0 },
    };

    let mut svg = open(title);
    frame.axes(&mut svg, spec.axes[0].param.name(), "nats");
    for (k, (o, ys)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#
        );
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            o.name()
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Colour-mapped cell grid of one output over a two-axis sweep. The first
/// axis runs vertically, the second horizontally.
pub fn density_plot(result: &SweepResult, output: Output, title: &str) -> Result<String> {
    let spec = &result.spec;
    if spec.axes.len() != 2 {
        return Err(Error::Usage("density plots need a two-axis sweep".into()));
    }
    let values = result
        .column(output)
        .ok_or_else(|| Error::Usage(format!("sweep has no numeric `{}` column", output.name())))?;
    let (ay, ax) = (spec.axes[0], spec.axes[1]);
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let vmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if vmax > vmin { vmax - vmin } else { 1.0 };

    // Cell edges sit halfway between samples.
    let half = |a: &crate::sweep::Axis| {
        if a.count > 1 {
            0.5 * (a.max - a.min) / (a.count - 1) as f64
        } else {
            0.5
        }
    };
    let frame = Frame {
        x0: ax.min - half(&ax),
        x1: ax.max + half(&ax),
        y0: ay.min - half(&ay),
        y1: ay.max + half(&ay),
    };

    let mut svg = open(title);
    let (hx, hy) = (half(&ax), half(&ay));
    let w = frame.px(ax.min + hx) - frame.px(ax.min - hx);
    let h = frame.py(ay.min - hy) - frame.py(ay.min + hy);
    svg.push_str("<g shape-rendering=\"crispEdges\">\n");
    for (row, v) in result.rows.iter().zip(&values) {
        let (y, x) = (row.coordinates[0], row.coordinates[1]);
        let _ = writeln!(
            svg,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
            frame.px(x - hx),
            frame.py(y + hy),
            w + 0.05,
            h + 0.05,
            colormap((v - vmin) / span)
        );
    }
    svg.push_str("</g>\n");
    frame.axes(&mut svg, ax.param.name(), ay.param.name());

    // Colour bar.
    let (bx, bw) = (WIDTH - RIGHT + 20.0, 18.0);
    let (bt, bb) = (TOP, HEIGHT - BOTTOM);
    let steps = 64;
    for i in 0..steps {
        let t = (i as f64 + 0.5) / steps as f64;
        let y = bb - (i + 1) as f64 * (bb - bt) / steps as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{bx}" y="{y:.2}" width="{bw}" height="{:.2}" fill="{}"/>"#,
            (bb - bt) / steps as f64 + 0.3,
            colormap(t)
        );
    }
    for v in ticks(vmin, vmin + span, 5) {
        let y = bb - (v - vmin) / span * (bb - bt);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}">{}</text>"#,
            bx + bw + 5.0,
            y + 4.0,
            label(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        bx + bw / 2.0,
        bt - 10.0,
        output.name()
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Line plot for one-axis sweeps, density plot of the first numeric output otherwise.
pub fn render(result: &SweepResult, title: &str) -> Result<String> {
    if result.spec.axes.len() == 1 {
        return line_plot(result, title);
    }
    let output = result
        .spec
        .outputs
        .iter()
        .copied()
        .find(|&o| result.column(o).is_some())
        .ok_or_else(|| Error::Usage("nothing numeric to plot".into()))?;
    density_plot(result, output, title)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steering::MomentSource;
    use crate::sweep::{run_sweep, Axis, FixedParams, Param, SweepSpec};

    #[test]
    fn tick_positions() {
        assert_eq!(ticks(0.0, 1.0, 5), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(ticks(0.0, 4.0, 6), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ticks(2.0, 2.0, 5), vec![2.0]);
    }

    #[test]
    fn colormap_ends() {
        assert_eq!(colormap(0.0), "#440154");
        assert_eq!(colormap(1.0), "#fde725");
        assert_eq!(colormap(2.0), "#fde725");
    }

    fn sweep(axes: Vec<Axis>, outputs: Vec<Output>) -> SweepResult {
        run_sweep(&SweepSpec {
            axes,
            fixed: FixedParams::default(),
            outputs,
            source: MomentSource::ClosedForm,
            note: None,
        })
        .unwrap()
    }

    #[test]
    fn line_plot_has_one_polyline_per_curve() {
        let res = sweep(
            vec![Axis::new(Param::Eta, 0.1, 0.9, 9)],
            vec![Output::GAb, Output::GBa, Output::Regime],
        );
        let svg = render(&res, "t").unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn density_plot_has_one_cell_per_point() {
        let res = sweep(
            vec![Axis::new(Param::SqueezeR, 0.0, 2.0, 3), Axis::new(Param::Eta, 0.1, 0.9, 4)],
            vec![Output::GDiff],
        );
        let svg = render(&res, "t").unwrap();
        let cells = svg.split("crispEdges").nth(1).unwrap().split("</g>").next().unwrap();
        assert_eq!(cells.matches("<rect").count(), 12);
        assert!(line_plot(&res, "t").is_err());
    }
}
