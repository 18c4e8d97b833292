//! SVG figures: dataset scatter, training curves, hidden-size sweep,
//! test-set predictions with misclassifications crossed out, and the
//! confusion matrix.
//!
//! Output is plain text built by hand, so identical inputs give identical
//! bytes. Coordinates are printed with two decimals.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::experiments::{RunResult, SweepResult};
use crate::geometry::{ClassLabel, GeometryParams};
use crate::io;
use crate::sampler::Dataset;
use crate::tinynet::{evaluate, Mlp};

pub const YIN_COLOR: &str = "steelblue";
pub const YANG_COLOR: &str = "darkorange";
pub const DOT_COLOR: &str = "seagreen";

pub fn class_color(c: ClassLabel) -> &'static str {
    match c {
        ClassLabel::Yin => YIN_COLOR,
        ClassLabel::Yang => YANG_COLOR,
        ClassLabel::Dot => DOT_COLOR,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    Scatter,
    Curves,
    Sweep,
    TestOverlay,
    Confusion,
}

impl FigureKind {
    pub const ALL: [FigureKind; 5] =
        [FigureKind::Scatter, FigureKind::Curves, FigureKind::Sweep, FigureKind::TestOverlay, FigureKind::Confusion];

    pub fn name(self) -> &'static str {
        match self {
            FigureKind::Scatter => "scatter",
            FigureKind::Curves => "curves",
            FigureKind::Sweep => "sweep",
            FigureKind::TestOverlay => "test_overlay",
            FigureKind::Confusion => "confusion",
        }
    }

    /// What the `inputs` of a [`FigureSpec`] must be, in order.
    pub fn expected_inputs(self) -> &'static [&'static str] {
        match self {
            FigureKind::Scatter => &["dataset CSV"],
            FigureKind::Curves | FigureKind::Confusion => &["run result JSON"],
            FigureKind::Sweep => &["sweep result JSON"],
            FigureKind::TestOverlay => &["dataset CSV", "network checkpoint JSON"],
        }
    }
}

impl std::str::FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown figure kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
}

impl FigureSpec {
    /// Reads the inputs and renders the figure without writing it.
    pub fn render(&self, geometry: &GeometryParams) -> Result<String> {
        let expected = self.kind.expected_inputs();
        if self.inputs.len() != expected.len() {
            return Err(Error::config(format!(
                "{} figure needs inputs: {}",
                self.kind.name(),
                expected.join(", ")
            )));
        }
        let input = |i: usize| self.inputs[i].as_path();
        Ok(match self.kind {
            FigureKind::Scatter => scatter(&io::load_dataset(input(0), geometry)?),
            FigureKind::Curves => curves(&io::load_json::<RunResult>(input(0))?),
            FigureKind::Sweep => sweep(&io::load_json::<SweepResult>(input(0))?),
            FigureKind::Confusion => confusion(&io::load_json::<RunResult>(input(0))?.confusion),
            FigureKind::TestOverlay => {
                let ds = io::load_dataset(input(0), geometry)?;
                let net = io::load_checkpoint(input(1))?;
                test_overlay_for(&net, &ds)?
            }
        })
    }

    pub fn write(&self, geometry: &GeometryParams) -> Result<()> {
        io::write_atomic(&self.output, self.render(geometry)?.as_bytes())
    }
}

struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        let mut s = Self { width, height, body: String::new() };
        s.raw(&format!(r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#));
        s
    }

    fn raw(&mut self, element: &str) {
        self.body.push_str(element);
        self.body.push('\n');
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: u32, content: &str) {
        self.raw(&format!(
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="{size}">{content}</text>"#
        ));
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, class: &str, stroke: &str) {
        self.raw(&format!(
            r#"<line class="{class}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1"/>"#
        ));
    }

    fn finish(self) -> String {
        let (w, h) = (self.width, self.height);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body
        )
    }
}

/// Maps data coordinates onto a rectangle of the canvas, with y pointing up.
#[derive(Clone, Copy)]
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        self.left + (v - lo) / (hi - lo) * self.width
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        self.top + self.height - (v - lo) / (hi - lo) * self.height
    }

    fn bottom(&self) -> f64 {
        self.top + self.height
    }

    fn axes(&self, svg: &mut Svg) {
        svg.line(self.left, self.bottom(), self.left + self.width, self.bottom(), "axis", "black");
        svg.line(self.left, self.top, self.left, self.bottom(), "axis", "black");
    }

    fn y_ticks(&self, svg: &mut Svg, ticks: &[f64]) {
        for &t in ticks {
            let y = self.y(t);
            svg.line(self.left - 4.0, y, self.left, y, "tick", "black");
            svg.text(self.left - 6.0, y + 4.0, "end", 11, &format!("{t:.2}"));
        }
    }
}

const SYMBOL_SIZE: f64 = 500.0;
const SYMBOL_MARGIN: f64 = 20.0;

fn symbol_frame(g: &GeometryParams) -> Frame {
    let side = SYMBOL_SIZE - 2.0 * SYMBOL_MARGIN;
    Frame {
        left: SYMBOL_MARGIN,
        top: SYMBOL_MARGIN,
        width: side,
        height: side,
        x_range: (0.0, g.extent()),
        y_range: (0.0, g.extent()),
    }
}

/// Outer circle and the S-shaped divide, as two paths.
fn symbol_outline(svg: &mut Svg, frame: &Frame, g: &GeometryParams) {
    let scale = frame.width / g.extent();
    let r = g.r_big() * scale;
    let (cx, cy) = (frame.x(g.r_big()), frame.y(g.r_big()));
    svg.raw(&format!(
        r#"<path class="outline" d="M {:.2} {cy:.2} A {r:.2} {r:.2} 0 1 0 {:.2} {cy:.2} A {r:.2} {r:.2} 0 1 0 {:.2} {cy:.2}" fill="none" stroke="gray"/>"#,
        cx - r,
        cx + r,
        cx - r
    ));
    let half = r / 2.0;
    svg.raw(&format!(
        r#"<path class="outline" d="M {:.2} {cy:.2} A {half:.2} {half:.2} 0 0 1 {cx:.2} {cy:.2} A {half:.2} {half:.2} 0 0 0 {:.2} {cy:.2}" fill="none" stroke="gray"/>"#,
        cx - r,
        cx + r
    ));
}

fn point(svg: &mut Svg, x: f64, y: f64, color: &str) {
    svg.raw(&format!(r#"<circle class="pt" cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#));
}

fn legend(svg: &mut Svg, x: f64, y: f64) {
    for (i, c) in ClassLabel::ALL.iter().enumerate() {
        let yy = y + 14.0 * i as f64;
        svg.raw(&format!(r#"<rect class="key" x="{x:.2}" y="{:.2}" width="8" height="8" fill="{}"/>"#, yy - 8.0, class_color(*c)));
        svg.text(x + 12.0, yy, "start", 11, c.name());
    }
}

/// One `circle.pt` per sample, colored by class.
pub fn scatter(ds: &Dataset) -> String {
    let frame = symbol_frame(&ds.geometry);
    let mut svg = Svg::new(SYMBOL_SIZE, SYMBOL_SIZE);
    symbol_outline(&mut svg, &frame, &ds.geometry);
    for s in &ds.samples {
        point(&mut svg, frame.x(s.x), frame.y(s.y), class_color(s.label));
    }
    legend(&mut svg, 4.0, 14.0);
    svg.finish()
}

/// Samples colored by predicted class; each misclassified one also gets a `path.miss` cross.
pub fn test_overlay(ds: &Dataset, predictions: &[ClassLabel]) -> Result<String> {
    if predictions.len() != ds.len() {
        return Err(Error::config(format!("{} predictions for {} samples", predictions.len(), ds.len())));
    }
    let frame = symbol_frame(&ds.geometry);
    let mut svg = Svg::new(SYMBOL_SIZE, SYMBOL_SIZE);
    symbol_outline(&mut svg, &frame, &ds.geometry);
    for (s, &p) in ds.samples.iter().zip(predictions) {
        point(&mut svg, frame.x(s.x), frame.y(s.y), class_color(p));
    }
    let arm = 4.0;
    for (s, &p) in ds.samples.iter().zip(predictions) {
        if p != s.label {
            let (x, y) = (frame.x(s.x), frame.y(s.y));
            svg.raw(&format!(
                r#"<path class="miss" d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}" stroke="black" stroke-width="1.5"/>"#,
                x - arm, y - arm, x + arm, y + arm, x - arm, y + arm, x + arm, y - arm
            ));
        }
    }
    legend(&mut svg, 4.0, 14.0);
    Ok(svg.finish())
}

pub fn test_overlay_for(net: &Mlp, ds: &Dataset) -> Result<String> {
    net.architecture().check_dataset_shape()?;
    test_overlay(ds, &evaluate(net, ds).predictions)
}

const PLOT_W: f64 = 560.0;
const PLOT_H: f64 = 360.0;

fn plot_frame(x_range: (f64, f64), y_range: (f64, f64)) -> Frame {
    Frame { left: 60.0, top: 20.0, width: PLOT_W - 80.0, height: PLOT_H - 70.0, x_range, y_range }
}

/// Smallest multiple of 0.1 at or above the largest value (at least 0.1).
fn error_ceiling(values: impl Iterator<Item = f64>) -> f64 {
    let max = values.fold(0.0f64, f64::max);
    ((max * 10.0).ceil() / 10.0).max(0.1)
}

fn polyline(svg: &mut Svg, class: &str, color: &str, pts: impl Iterator<Item = (f64, f64)>) {
    let points: Vec<String> = pts.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    svg.raw(&format!(
        r#"<polyline class="{class}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        points.join(" ")
    ));
}

/// Training and validation error per epoch, one `polyline` each.
pub fn curves(run: &RunResult) -> String {
    let c = &run.curves;
    let epochs = c.train_error.len().max(c.validation_error.len());
    let y_max = error_ceiling(c.train_error.iter().chain(&c.validation_error).copied());
    let frame = plot_frame((1.0, epochs.max(2) as f64), (0.0, y_max));
    let mut svg = Svg::new(PLOT_W, PLOT_H);
    frame.axes(&mut svg);
    frame.y_ticks(&mut svg, &[0.0, y_max / 2.0, y_max]);
    for (series, class, color) in [(&c.train_error, "train", "gray"), (&c.validation_error, "validation", "crimson")] {
        polyline(&mut svg, class, color, series.iter().enumerate().map(|(i, &e)| (frame.x((i + 1) as f64), frame.y(e))));
    }
    svg.text(frame.left + frame.width / 2.0, PLOT_H - 15.0, "middle", 12, "epoch");
    svg.text(frame.left + frame.width, frame.top + 12.0, "end", 11, "gray: training error, red: validation error");
    svg.text(frame.left + frame.width / 2.0, frame.bottom() + 16.0, "middle", 11, &format!("{} ({epochs} epochs)", run.scenario));
    svg.finish()
}

/// Mean final test error against hidden size (log axis), with ±1 std bars and every repetition.
pub fn sweep(result: &SweepResult) -> String {
    let entries = &result.entries;
    let sizes: Vec<f64> = entries.iter().map(|e| e.hidden as f64).collect();
    let lo = sizes.iter().copied().fold(f64::INFINITY, f64::min).max(1.0);
    let hi = sizes.iter().copied().fold(1.0f64, f64::max);
    let (lx, hx) = if hi > lo { (lo.ln(), hi.ln()) } else { (lo.ln() - 1.0, lo.ln() + 1.0) };
    let pad = 0.05 * (hx - lx);
    let y_max = error_ceiling(entries.iter().flat_map(|e| {
        e.test_errors.iter().copied().chain(std::iter::once(e.error.mean + e.error.std.unwrap_or(0.0)))
    }));
    let frame = plot_frame((lx - pad, hx + pad), (0.0, y_max));
    let mut svg = Svg::new(PLOT_W, PLOT_H);
    frame.axes(&mut svg);
    frame.y_ticks(&mut svg, &[0.0, y_max / 2.0, y_max]);
    for e in entries {
        let x = frame.x((e.hidden as f64).ln());
        svg.line(x, frame.bottom(), x, frame.bottom() + 4.0, "tick", "black");
        svg.text(x, frame.bottom() + 16.0, "middle", 11, &e.hidden.to_string());
        for &err in &e.test_errors {
            svg.raw(&format!(r#"<circle class="rep" cx="{x:.2}" cy="{:.2}" r="1.5" fill="lightgray"/>"#, frame.y(err)));
        }
        if let Some(std) = e.error.std {
            svg.line(x, frame.y(e.error.mean - std), x, frame.y(e.error.mean + std), "errbar", "black");
        }
    }
    polyline(
        &mut svg,
        "mean",
        "black",
        entries.iter().map(|e| (frame.x((e.hidden as f64).ln()), frame.y(e.error.mean))),
    );
    for e in entries {
        svg.raw(&format!(
            r#"<circle class="mean" cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#,
            frame.x((e.hidden as f64).ln()),
            frame.y(e.error.mean)
        ));
    }
    svg.text(frame.left + frame.width / 2.0, PLOT_H - 15.0, "middle", 12, "hidden layer size");
    svg.text(frame.left + frame.width, frame.top + 12.0, "end", 11, &format!("final test error, {} repetitions", result.reps));
    svg.finish()
}

/// 3×3 grid of `rect.cell`, shaded by row fraction and labelled with counts.
pub fn confusion(matrix: &[[usize; 3]; 3]) -> String {
    let cell = 90.0;
    let (left, top) = (110.0, 60.0);
    let size = left + 3.0 * cell + 20.0;
    let mut svg = Svg::new(size, top + 3.0 * cell + 30.0);
    svg.text(left + 1.5 * cell, 20.0, "middle", 12, "predicted");
    svg.text(20.0, top + 1.5 * cell, "middle", 12, "true");
    for (j, c) in ClassLabel::ALL.iter().enumerate() {
        svg.text(left + (j as f64 + 0.5) * cell, top - 8.0, "middle", 11, c.name());
        svg.text(left - 8.0, top + (j as f64 + 0.5) * cell + 4.0, "end", 11, c.name());
    }
    for (i, row) in matrix.iter().enumerate() {
        let total: usize = row.iter().sum();
        for (j, &count) in row.iter().enumerate() {
            let frac = if total == 0 { 0.0 } else { count as f64 / total as f64 };
            let (x, y) = (left + j as f64 * cell, top + i as f64 * cell);
            svg.raw(&format!(
                r#"<rect class="cell" x="{x:.2}" y="{y:.2}" width="{cell}" height="{cell}" fill="navy" fill-opacity="{frac:.3}" stroke="black"/>"#
            ));
            svg.text(x + cell / 2.0, y + cell / 2.0 + 5.0, "middle", 14, &count.to_string());
        }
    }
    svg.finish()
}
