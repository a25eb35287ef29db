//! Visual diagnostics: decision-boundary rasters, reliability diagrams,
//! confidence histograms, and weight-norm curves.
//!
//! Charts are emitted as self-contained SVG strings. Rendering is pure
//! formatting: the same inputs produce byte-identical output, which keeps
//! chart files diffable across reruns.

use std::fmt::Write as _;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::softmax;
use crate::mlp::MlpParameters;
use crate::trainer::EpochStats;
use crate::calibration::CalibrationReport;

/// Axis-aligned rectangle in feature space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// Bounding box of a two-feature dataset, padded on every side by
    /// `pad_fraction` of the box's extent.
    pub fn of_dataset(dataset: &Dataset, pad_fraction: f64) -> Result<Bounds> {
        if dataset.d() != 2 {
            return Err(Error::InvalidArgument(format!(
                "bounds need two-feature data, got {} features",
                dataset.d()
            )));
        }
        if !(pad_fraction >= 0.0 && pad_fraction.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pad fraction must be non-negative, got {pad_fraction}"
            )));
        }
        let mut b = Bounds {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for i in 0..dataset.n() {
            let p = dataset.sample(i);
            b.x_min = b.x_min.min(p[0]);
            b.x_max = b.x_max.max(p[0]);
            b.y_min = b.y_min.min(p[1]);
            b.y_max = b.y_max.max(p[1]);
        }
        // Degenerate extents still need a nonzero box to rasterize.
        let dx = (b.x_max - b.x_min).max(1e-9);
        let dy = (b.y_max - b.y_min).max(1e-9);
        Ok(Bounds {
            x_min: b.x_min - pad_fraction * dx,
            x_max: b.x_max + pad_fraction * dx,
            y_min: b.y_min - pad_fraction * dy,
            y_max: b.y_max + pad_fraction * dy,
        })
    }
}

/// Grid of class-0 probabilities over a [`Bounds`] rectangle.
///
/// `values` is row-major with `resolution` cells per side; row 0 is the
/// bottom of the box (`y_min` edge). Each value is the softmax probability
/// of class 0 at the cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRaster {
    pub bounds: Bounds,
    pub resolution: usize,
    values: Vec<f64>,
}

impl BoundaryRaster {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        assert!(
            ix < self.resolution && iy < self.resolution,
            "cell ({ix},{iy}) out of range for resolution {}",
            self.resolution
        );
        self.values[iy * self.resolution + ix]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Long-form CSV: `x,y,p0` per cell, rows bottom to top.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("x,y,p0\n");
        for iy in 0..self.resolution {
            for ix in 0..self.resolution {
                let (x, y) = self.cell_center(ix, iy);
                let _ = writeln!(out, "{x},{y},{}", self.get(ix, iy));
            }
        }
        out
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        let step_x = (self.bounds.x_max - self.bounds.x_min) / self.resolution as f64;
        let step_y = (self.bounds.y_max - self.bounds.y_min) / self.resolution as f64;
        (
            self.bounds.x_min + (ix as f64 + 0.5) * step_x,
            self.bounds.y_min + (iy as f64 + 0.5) * step_y,
        )
    }
}

/// Evaluates a trained two-class, two-feature network over a grid.
///
/// The network must take exactly two inputs and emit exactly two logits;
/// the decision boundary is the 0.5 level set of the resulting class-0
/// probability field.
pub fn boundary_raster(
    params: &MlpParameters,
    bounds: &Bounds,
    resolution: usize,
) -> Result<BoundaryRaster> {
    if params.arch().input_dim() != 2 || params.arch().classes() != 2 {
        return Err(Error::InvalidArgument(format!(
            "boundary raster needs a 2-in 2-class network, got {} inputs and {} classes",
            params.arch().input_dim(),
            params.arch().classes()
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    if !(bounds.x_min < bounds.x_max && bounds.y_min < bounds.y_max) {
        return Err(Error::InvalidArgument(
            "bounds must have positive extent in both axes".into(),
        ));
    }
    let mut raster = BoundaryRaster {
        bounds: *bounds,
        resolution,
        values: vec![0.0; resolution * resolution],
    };
    for iy in 0..resolution {
        for ix in 0..resolution {
            let (x, y) = raster.cell_center(ix, iy);
            let p = softmax(&params.logits(&[x, y]));
            raster.values[iy * resolution + ix] = p[0];
        }
    }
    Ok(raster)
}

/// Chart geometry and palette. The defaults render 640x480 with a small
/// margin; every chart is a standalone SVG document.
#[derive(Debug, Clone)]
pub struct ChartStyle {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
}

impl Default for ChartStyle {
    fn default() -> Self {
        ChartStyle {
            width: 640.0,
            height: 480.0,
            margin: 56.0,
        }
    }
}

const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Numbers in SVG attributes use fixed two-decimal precision so output is
/// byte-stable.
fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(style: &ChartStyle) -> Svg {
        Svg {
            body: String::new(),
            width: style.width,
            height: style.height,
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, title: Option<&str>) {
        let _ = write!(
            self.body,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"",
            fmt2(x),
            fmt2(y),
            fmt2(w.max(0.0)),
            fmt2(h.max(0.0))
        );
        match title {
            Some(t) => {
                let _ = writeln!(self.body, "><title>{}</title></rect>", xml_escape(t));
            }
            None => {
                let _ = writeln!(self.body, "/>");
            }
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"1\"{dash}/>",
            fmt2(x1),
            fmt2(y1),
            fmt2(x2),
            fmt2(y2)
        );
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\" font-family=\"sans-serif\" text-anchor=\"{anchor}\" fill=\"#333\">{}</text>",
            fmt2(x),
            fmt2(y),
            fmt2(size),
            xml_escape(content)
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", fmt2(*x), fmt2(*y)))
            .collect();
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>",
            coords.join(" ")
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"{}\" height=\"{}\">\n<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n{}</svg>\n",
            fmt2(self.width),
            fmt2(self.height),
            fmt2(self.width),
            fmt2(self.height),
            fmt2(self.width),
            fmt2(self.height),
            self.body
        )
    }
}

/// Plot area helper mapping unit coordinates into pixel space.
struct Frame {
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn new(style: &ChartStyle) -> Frame {
        Frame {
            left: style.margin,
            top: style.margin * 0.5,
            w: style.width - 1.5 * style.margin,
            h: style.height - 1.5 * style.margin,
        }
    }

    fn x(&self, unit: f64) -> f64 {
        self.left + unit * self.w
    }

    /// Unit y runs upward; SVG y runs downward.
    fn y(&self, unit: f64) -> f64 {
        self.top + (1.0 - unit) * self.h
    }
}

fn draw_unit_axes(svg: &mut Svg, frame: &Frame, x_label: &str, y_label: &str) {
    svg.line(frame.x(0.0), frame.y(0.0), frame.x(1.0), frame.y(0.0), "#333", false);
    svg.line(frame.x(0.0), frame.y(0.0), frame.x(0.0), frame.y(1.0), "#333", false);
    for k in 0..=4 {
        let u = k as f64 / 4.0;
        svg.text(frame.x(u), frame.y(0.0) + 16.0, 11.0, "middle", &format!("{u:.2}"));
        svg.text(frame.x(0.0) - 6.0, frame.y(u) + 4.0, 11.0, "end", &format!("{u:.2}"));
    }
    svg.text(frame.x(0.5), frame.y(0.0) + 34.0, 12.0, "middle", x_label);
    svg.text(frame.x(0.0) - 40.0, frame.y(1.0) - 8.0, 12.0, "start", y_label);
}

/// Reliability diagram: one blue bar per bin at its accuracy, an orange
/// gap bar from the top of the blue bar to the bin's mean confidence, and
/// the identity diagonal for reference. Empty bins draw nothing.
pub fn reliability_svg(report: &CalibrationReport, style: &ChartStyle) -> String {
    let mut svg = Svg::new(style);
    let frame = Frame::new(style);
    draw_unit_axes(&mut svg, &frame, "confidence", "accuracy");
    let bin_w = 1.0 / report.k as f64;
    for bin in &report.bins {
        if bin.count == 0 {
            continue;
        }
        let x0 = frame.x((bin.index - 1) as f64 * bin_w) + 1.0;
        let w = frame.x(bin_w) - frame.x(0.0) - 2.0;
        let title = format!(
            "bin {}: count={} acc={:.6} conf={:.6} gap={:.6}",
            bin.index, bin.count, bin.accuracy, bin.confidence, bin.gap
        );
        svg.rect(
            x0,
            frame.y(bin.accuracy),
            w,
            frame.y(0.0) - frame.y(bin.accuracy),
            "#1f77b4",
            Some(&title),
        );
        // Gap bar spans accuracy to confidence, downward when the model is
        // underconfident in this bin.
        let top = bin.accuracy.max(bin.confidence);
        let bottom = bin.accuracy.min(bin.confidence);
        svg.rect(
            x0 + w * 0.25,
            frame.y(top),
            w * 0.5,
            frame.y(bottom) - frame.y(top),
            "#ff7f0e",
            Some(&title),
        );
    }
    svg.line(frame.x(0.0), frame.y(0.0), frame.x(1.0), frame.y(1.0), "#888", true);
    svg.text(
        frame.x(0.05),
        frame.y(0.95),
        13.0,
        "start",
        &format!("ECE = {:.6}", report.ece),
    );
    svg.finish()
}

/// Confidence histogram: the fraction of predictions falling in each bin.
pub fn histogram_svg(report: &CalibrationReport, style: &ChartStyle) -> String {
    let mut svg = Svg::new(style);
    let frame = Frame::new(style);
    draw_unit_axes(&mut svg, &frame, "confidence", "fraction of samples");
    let bin_w = 1.0 / report.k as f64;
    for bin in &report.bins {
        let fraction = bin.count as f64 / report.n as f64;
        if bin.count == 0 {
            continue;
        }
        let x0 = frame.x((bin.index - 1) as f64 * bin_w) + 1.0;
        let w = frame.x(bin_w) - frame.x(0.0) - 2.0;
        svg.rect(
            x0,
            frame.y(fraction),
            w,
            frame.y(0.0) - frame.y(fraction),
            "#7f7f7f",
            Some(&format!("bin {}: {} of {}", bin.index, bin.count, report.n)),
        );
    }
    svg.text(
        frame.x(0.05),
        frame.y(0.95),
        13.0,
        "start",
        &format!("n = {}", report.n),
    );
    svg.finish()
}

/// Diverging cell color anchored at p = 0.5: blue for class 0, orange-red
/// for class 1, white at the boundary.
fn raster_color(p0: f64) -> String {
    let (r, g, b) = if p0 >= 0.5 {
        let t = (p0 - 0.5) * 2.0;
        (
            255.0 + t * (31.0 - 255.0),
            255.0 + t * (119.0 - 255.0),
            255.0 + t * (180.0 - 255.0),
        )
    } else {
        let t = (0.5 - p0) * 2.0;
        (
            255.0 + t * (214.0 - 255.0),
            255.0 + t * (89.0 - 255.0),
            255.0 + t * (39.0 - 255.0),
        )
    };
    format!("rgb({},{},{})", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Probability heatmap of a [`BoundaryRaster`] with the 0.5 level set
/// highlighted: any cell whose right or upper neighbor sits on the other
/// side of 0.5 is painted dark, tracing the decision boundary.
pub fn raster_svg(raster: &BoundaryRaster, style: &ChartStyle) -> String {
    let mut svg = Svg::new(style);
    let frame = Frame::new(style);
    let res = raster.resolution;
    let cell_w = frame.w / res as f64;
    let cell_h = frame.h / res as f64;
    for iy in 0..res {
        for ix in 0..res {
            let p = raster.get(ix, iy);
            let side = p >= 0.5;
            let mut on_boundary = false;
            if ix + 1 < res && (raster.get(ix + 1, iy) >= 0.5) != side {
                on_boundary = true;
            }
            if iy + 1 < res && (raster.get(ix, iy + 1) >= 0.5) != side {
                on_boundary = true;
            }
            let fill = if on_boundary {
                "#222222".to_string()
            } else {
                raster_color(p)
            };
            // Row iy sits at the bottom of the box, so it maps near y_min.
            let x = frame.left + ix as f64 * cell_w;
            let y = frame.top + (res - 1 - iy) as f64 * cell_h;
            // Cells overdraw their border slightly to avoid hairline gaps.
            svg.rect(x, y, cell_w + 0.5, cell_h + 0.5, &fill, None);
        }
    }
    svg.text(
        frame.x(0.0),
        frame.y(0.0) + 16.0,
        11.0,
        "start",
        &format!("x in [{:.3}, {:.3}]", raster.bounds.x_min, raster.bounds.x_max),
    );
    svg.text(
        frame.x(0.0),
        frame.y(0.0) + 30.0,
        11.0,
        "start",
        &format!("y in [{:.3}, {:.3}]", raster.bounds.y_min, raster.bounds.y_max),
    );
    svg.finish()
}

/// One row of the long-form weight-norm table.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub epoch: usize,
    pub name: String,
    pub norm: f64,
}

/// Flattens named training histories into long-form rows sorted by
/// `(epoch, name)`.
///
/// Histories must be non-empty and equally long (they are meant to be the
/// same protocol trained under different losses); names must be distinct.
pub fn weight_norm_series(histories: &[(&str, &[EpochStats])]) -> Result<Vec<SeriesRow>> {
    if histories.is_empty() {
        return Err(Error::InvalidArgument("no histories given".into()));
    }
    let len = histories[0].1.len();
    for (name, h) in histories {
        if h.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "history \"{name}\" is empty"
            )));
        }
        if h.len() != len {
            return Err(Error::InvalidArgument(format!(
                "history \"{name}\" has {} epochs, expected {len}",
                h.len()
            )));
        }
    }
    let mut names: Vec<&str> = histories.iter().map(|(n, _)| *n).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("history names must be distinct".into()));
    }
    let mut rows = Vec::with_capacity(histories.len() * len);
    for (name, history) in histories {
        for stats in *history {
            rows.push(SeriesRow {
                epoch: stats.epoch,
                name: name.to_string(),
                norm: stats.last_layer_weight_norm,
            });
        }
    }
    rows.sort_by(|a, b| a.epoch.cmp(&b.epoch).then_with(|| a.name.cmp(&b.name)));
    Ok(rows)
}

/// CSV form of [`weight_norm_series`] rows.
pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut out = String::from("epoch,name,last_layer_weight_norm\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{}", row.epoch, row.name, row.norm);
    }
    out
}

/// Line chart of last-layer weight norms over epochs, one polyline per
/// series name (names in first-appearance order), with a legend.
pub fn weight_norm_svg(rows: &[SeriesRow], style: &ChartStyle) -> String {
    let mut svg = Svg::new(style);
    let frame = Frame::new(style);
    let mut names: Vec<&str> = Vec::new();
    for row in rows {
        if !names.contains(&row.name.as_str()) {
            names.push(&row.name);
        }
    }
    let max_epoch = rows.iter().map(|r| r.epoch).max().unwrap_or(1).max(1);
    let max_norm = rows.iter().map(|r| r.norm).fold(0.0f64, f64::max).max(1e-12);
    svg.line(frame.x(0.0), frame.y(0.0), frame.x(1.0), frame.y(0.0), "#333", false);
    svg.line(frame.x(0.0), frame.y(0.0), frame.x(0.0), frame.y(1.0), "#333", false);
    for k in 0..=4 {
        let u = k as f64 / 4.0;
        svg.text(
            frame.x(u),
            frame.y(0.0) + 16.0,
            11.0,
            "middle",
            &format!("{}", (u * max_epoch as f64).round() as usize),
        );
        svg.text(
            frame.x(0.0) - 6.0,
            frame.y(u) + 4.0,
            11.0,
            "end",
            &format!("{:.2}", u * max_norm),
        );
    }
    svg.text(frame.x(0.5), frame.y(0.0) + 34.0, 12.0, "middle", "epoch");
    svg.text(frame.x(0.0) - 40.0, frame.y(1.0) - 8.0, 12.0, "start", "last-layer weight norm");
    for (s, name) in names.iter().enumerate() {
        let color = SERIES_COLORS[s % SERIES_COLORS.len()];
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.name == *name)
            .map(|r| {
                (
                    frame.x(r.epoch as f64 / max_epoch as f64),
                    frame.y(r.norm / max_norm),
                )
            })
            .collect();
        svg.polyline(&points, color);
        let ly = frame.y(1.0) + 14.0 * s as f64 + 4.0;
        svg.rect(frame.x(0.78), ly - 8.0, 10.0, 10.0, color, None);
        svg.text(frame.x(0.78) + 14.0, ly, 11.0, "start", name);
    }
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{compute_ece, Prediction};
    use crate::mlp::Architecture;
    use crate::numerics::Matrix;

    fn toy_report() -> CalibrationReport {
        // Confidences {0.9 right, 0.8 wrong} and {0.4, 0.3} both right:
        // bin 2 has accuracy 0.5 and mean confidence 0.85.
        let preds: Vec<Prediction> = [(0.9, true), (0.8, false), (0.4, true), (0.3, true)]
            .iter()
            .map(|&(confidence, correct)| Prediction {
                probs: vec![confidence, 1.0 - confidence],
                true_label: if correct { 0 } else { 1 },
                predicted_label: 0,
                confidence,
            })
            .collect();
        compute_ece(&preds, 2)
    }

    /// Minimal structural XML check: every opened tag closes in order.
    fn assert_well_formed(svg: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = svg;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').expect("unclosed angle bracket") + start;
            let tag = &rest[start + 1..end];
            rest = &rest[end + 1..];
            if tag.starts_with('?') || tag.starts_with('!') || tag.ends_with('/') {
                continue;
            }
            if let Some(name) = tag.strip_prefix('/') {
                let open = stack.pop().unwrap_or_else(|| panic!("stray </{name}>"));
                assert_eq!(open, name, "mismatched close tag");
            } else {
                let name: String = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    fn two_feature_dataset() -> Dataset {
        Dataset::new(
            Matrix::from_rows(&[vec![0.0, -1.0], vec![2.0, 1.0], vec![1.0, 0.5]]),
            vec![0, 1, 0],
            2,
        )
        .unwrap()
    }

    #[test]
    fn bounds_pad_the_bounding_box() {
        let b = Bounds::of_dataset(&two_feature_dataset(), 0.1).unwrap();
        assert!((b.x_min - -0.2).abs() < 1e-12);
        assert!((b.x_max - 2.2).abs() < 1e-12);
        assert!((b.y_min - -1.2).abs() < 1e-12);
        assert!((b.y_max - 1.2).abs() < 1e-12);
    }

    #[test]
    fn bounds_reject_non_planar_data() {
        let ds = Dataset::new(
            Matrix::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]]),
            vec![0, 1],
            2,
        )
        .unwrap();
        assert!(Bounds::of_dataset(&ds, 0.1).is_err());
    }

    fn unit_bounds() -> Bounds {
        Bounds {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        }
    }

    #[test]
    fn zero_network_rasters_to_one_half_everywhere() {
        let params = MlpParameters::zeros(&Architecture::new(2, vec![], 2).unwrap());
        let raster = boundary_raster(&params, &unit_bounds(), 8).unwrap();
        assert!(raster.values().iter().all(|p| *p == 0.5));
    }

    #[test]
    fn linear_model_raster_tracks_x() {
        // Logits (x, -x): p0 = sigmoid(2x), so p0 > 0.5 iff x > 0 and the
        // field increases left to right.
        let mut params = MlpParameters::zeros(&Architecture::new(2, vec![], 2).unwrap());
        params.layers_mut()[0].weight.set(0, 0, 1.0);
        params.layers_mut()[0].weight.set(1, 0, -1.0);
        let raster = boundary_raster(&params, &unit_bounds(), 10).unwrap();
        for iy in 0..10 {
            for ix in 0..9 {
                assert!(raster.get(ix, iy) < raster.get(ix + 1, iy));
            }
        }
        // Closed form at a cell center: p0 = 1 / (1 + exp(-2x)).
        let (x, _) = raster.cell_center(7, 3);
        let expected = 1.0 / (1.0 + (-2.0 * x).exp());
        assert!((raster.get(7, 3) - expected).abs() < 1e-12);
    }

    #[test]
    fn raster_is_invariant_to_common_logit_shifts() {
        let mut rng = crate::numerics::Rng::new(77);
        let arch = Architecture::new(2, vec![6], 2).unwrap();
        let params = MlpParameters::init(&arch, &mut rng);
        let mut shifted = params.clone();
        for b in &mut shifted.layers_mut()[1].bias {
            *b += 3.7;
        }
        let a = boundary_raster(&params, &unit_bounds(), 12).unwrap();
        let b = boundary_raster(&shifted, &unit_bounds(), 12).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn raster_rejects_wrong_shapes() {
        let three_class = MlpParameters::zeros(&Architecture::new(2, vec![], 3).unwrap());
        assert!(boundary_raster(&three_class, &unit_bounds(), 8).is_err());
        let three_in = MlpParameters::zeros(&Architecture::new(3, vec![], 2).unwrap());
        assert!(boundary_raster(&three_in, &unit_bounds(), 8).is_err());
        let ok = MlpParameters::zeros(&Architecture::new(2, vec![], 2).unwrap());
        assert!(boundary_raster(&ok, &unit_bounds(), 1).is_err());
    }

    #[test]
    fn raster_csv_has_header_and_every_cell() {
        let params = MlpParameters::zeros(&Architecture::new(2, vec![], 2).unwrap());
        let raster = boundary_raster(&params, &unit_bounds(), 4).unwrap();
        let csv = raster.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,p0");
        assert_eq!(lines.len(), 1 + 16);
    }

    #[test]
    fn reliability_svg_is_well_formed_and_annotated() {
        let svg = reliability_svg(&toy_report(), &ChartStyle::default());
        assert_well_formed(&svg);
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        // Bin 2 of the toy report: accuracy 0.5, mean confidence 0.85.
        assert!(svg.contains("acc=0.500000"), "missing bin annotation");
        assert!(svg.contains("conf=0.850000"), "missing bin annotation");
        assert!(svg.contains("ECE = 0.500000"));
    }

    #[test]
    fn charts_are_byte_deterministic() {
        let style = ChartStyle::default();
        let report = toy_report();
        assert_eq!(reliability_svg(&report, &style), reliability_svg(&report, &style));
        assert_eq!(histogram_svg(&report, &style), histogram_svg(&report, &style));
    }

    #[test]
    fn histogram_svg_is_well_formed() {
        let svg = histogram_svg(&toy_report(), &ChartStyle::default());
        assert_well_formed(&svg);
        assert!(svg.contains("n = 4"));
    }

    #[test]
    fn raster_svg_marks_a_boundary() {
        let mut params = MlpParameters::zeros(&Architecture::new(2, vec![], 2).unwrap());
        params.layers_mut()[0].weight.set(0, 0, 5.0);
        params.layers_mut()[0].weight.set(1, 0, -5.0);
        let raster = boundary_raster(&params, &unit_bounds(), 16).unwrap();
        let svg = raster_svg(&raster, &ChartStyle::default());
        assert_well_formed(&svg);
        assert!(svg.contains("#222222"), "no boundary cells painted");
    }

    fn fake_history(norms: &[f64]) -> Vec<EpochStats> {
        norms
            .iter()
            .enumerate()
            .map(|(i, n)| EpochStats {
                epoch: i + 1,
                train_loss: 1.0 / (i + 1) as f64,
                train_accuracy: 0.5,
                last_layer_weight_norm: *n,
            })
            .collect()
    }

    #[test]
    fn series_flattens_and_sorts_epoch_major() {
        let a = fake_history(&[1.0, 2.0, 3.0]);
        let b = fake_history(&[4.0, 5.0, 6.0]);
        let rows = weight_norm_series(&[("squentropy", &a), ("cross-entropy", &b)]).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].epoch, 1);
        assert_eq!(rows[0].name, "cross-entropy", "names tie-break alphabetically");
        assert_eq!(rows[1].name, "squentropy");
        assert_eq!(rows[5].norm, 3.0);
        let csv = series_csv(&rows);
        assert!(csv.starts_with("epoch,name,last_layer_weight_norm\n"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn series_single_history() {
        let a = fake_history(&[1.0, 1.5, 2.0]);
        let rows = weight_norm_series(&[("squentropy", &a)]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[0].epoch < w[1].epoch));
    }

    #[test]
    fn series_rejects_mismatched_or_duplicate_histories() {
        let a = fake_history(&[1.0, 2.0]);
        let b = fake_history(&[1.0, 2.0, 3.0]);
        assert!(weight_norm_series(&[("a", &a), ("b", &b)]).is_err());
        assert!(weight_norm_series(&[("a", &a), ("a", &a)]).is_err());
        assert!(weight_norm_series(&[]).is_err());
    }

    #[test]
    fn weight_norm_svg_draws_every_series() {
        let a = fake_history(&[1.0, 2.0, 3.0]);
        let b = fake_history(&[3.0, 2.0, 1.0]);
        let rows = weight_norm_series(&[("squentropy", &a), ("square", &b)]).unwrap();
        let svg = weight_norm_svg(&rows, &ChartStyle::default());
        assert_well_formed(&svg);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("squentropy") && svg.contains("square"));
    }
}
