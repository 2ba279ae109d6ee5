//! Chart data files.
//!
//! ```json
//! {"kind": "scatter", "classes": ["a", "b"], "points": [[x, y, class], ...]}
//! {"kind": "line", "classes": ["a", "b"], "series": [[[x, y], ...], ...]}
//! {"kind": "bar", "classes": ["a", "b", "c"], "bars": [v1, v2, v3]}
//! ```
//!
//! `classes` is optional; class indices are 0-based. An optional
//! `"canvas": {"width": w, "height": h}` sets the pixel canvas (400x400 by
//! default). Scatter coordinates are data units and get fit to the canvas.

use std::path::Path;

use datapal_core::charts::CanvasMapping;
use datapal_core::graph::default_alpha_shape_graph;
use datapal_core::{
    alpha_shape_graph, bars_to_graph, discretize_lines, knn_graph, BarChartData, Canvas,
    LabeledPointSet, LineChartData, NeighborGraph, Point,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::settings::GraphSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Scatter,
    Line,
    Bar,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// Data-space coordinates with their class labels.
    Scatter { points: Vec<(f64, f64)>, labels: Vec<usize> },
    Line(LineChartData),
    Bar(BarChartData),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartDataset {
    pub chart: Chart,
    pub class_names: Vec<String>,
    pub canvas: Canvas,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawCanvas {
    width: f64,
    height: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    kind: ChartKind,
    #[serde(default)]
    classes: Option<Vec<String>>,
    #[serde(default)]
    canvas: Option<RawCanvas>,
    #[serde(default)]
    points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    series: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    bars: Option<Vec<f64>>,
}

/// Pixel-space marks of a chart and their neighbor graph.
#[derive(Debug, Clone)]
pub struct Marks {
    pub points: LabeledPointSet,
    pub graph: NeighborGraph,
}

fn require<T>(value: Option<T>, kind: ChartKind, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::field(field, format!("required for a {kind:?} chart").to_lowercase()))
}

fn reject_extra(present: bool, kind: ChartKind, field: &str) -> Result<()> {
    if present {
        return Err(Error::field(field, format!("not allowed in a {kind:?} chart").to_lowercase()));
    }
    Ok(())
}

fn core_field(field: &str) -> impl Fn(datapal_core::Error) -> Error + '_ {
    move |e| match e {
        datapal_core::Error::Validation(message) => Error::field(field, message),
        other => Error::Core(other),
    }
}

impl ChartDataset {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDataset = serde_json::from_str(text)?;
        Self::from_raw(raw)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let raw: RawDataset = serde_json::from_value(value).map_err(|e| Error::field("dataset", e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawDataset) -> Result<Self> {
        let canvas = match raw.canvas {
            Some(c) => Canvas::new(c.width, c.height).map_err(core_field("canvas"))?,
            None => Canvas::default(),
        };
        let kind = raw.kind;
        let (chart, m) = match kind {
            ChartKind::Scatter => {
                reject_extra(raw.series.is_some(), kind, "series")?;
                reject_extra(raw.bars.is_some(), kind, "bars")?;
                let rows = require(raw.points, kind, "points")?;
                if rows.is_empty() {
                    return Err(Error::field("points", "at least one point is required"));
                }
                let mut points = Vec::with_capacity(rows.len());
                let mut labels = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    let field = format!("points[{i}]");
                    let &[x, y, c] = row.as_slice() else {
                        return Err(Error::field(field, format!("expected [x, y, class], got {} values", row.len())));
                    };
                    if !(x.is_finite() && y.is_finite()) {
                        return Err(Error::field(field, "coordinates must be finite"));
                    }
                    if !(c >= 0.0 && c.fract() == 0.0 && c < u32::MAX as f64) {
                        return Err(Error::field(field, format!("class index {c} is not a non-negative integer")));
                    }
                    points.push((x, y));
                    labels.push(c as usize);
                }
                let m = match &raw.classes {
                    Some(names) => names.len(),
                    None => labels.iter().max().map_or(0, |&l| l + 1),
                };
                if let Some(i) = labels.iter().position(|&l| l >= m) {
                    return Err(Error::field(
                        format!("points[{i}]"),
                        format!("class {} is not declared ({m} classes)", labels[i]),
                    ));
                }
                let mut seen = vec![false; m];
                for &l in &labels {
                    seen[l] = true;
                }
                if let Some(empty) = seen.iter().position(|s| !s) {
                    return Err(Error::field("classes", format!("class {empty} has no points")));
                }
                (Chart::Scatter { points, labels }, m)
            }
            ChartKind::Line => {
                reject_extra(raw.points.is_some(), kind, "points")?;
                reject_extra(raw.bars.is_some(), kind, "bars")?;
                let series: Vec<Vec<(f64, f64)>> = require(raw.series, kind, "series")?
                    .into_iter()
                    .map(|s| s.into_iter().map(|[x, y]| (x, y)).collect())
                    .collect();
                let m = series.len();
                (Chart::Line(LineChartData::new(series, canvas).map_err(core_field("series"))?), m)
            }
            ChartKind::Bar => {
                reject_extra(raw.points.is_some(), kind, "points")?;
                reject_extra(raw.series.is_some(), kind, "series")?;
                let bars = require(raw.bars, kind, "bars")?;
                let m = bars.len();
                (Chart::Bar(BarChartData::new(bars, canvas).map_err(core_field("bars"))?), m)
            }
        };
        let class_names = match raw.classes {
            Some(names) => {
                if names.len() != m {
                    return Err(Error::field(
                        "classes",
                        format!("{} names declared for {m} classes", names.len()),
                    ));
                }
                names
            }
            None => (0..m).map(|i| i.to_string()).collect(),
        };
        if m == 0 {
            return Err(Error::field("classes", "at least one class is required"));
        }
        Ok(ChartDataset {
            chart,
            class_names,
            canvas,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut doc = serde_json::Map::new();
        doc.insert("kind".into(), serde_json::to_value(self.kind()).unwrap());
        doc.insert("classes".into(), self.class_names.clone().into());
        doc.insert(
            "canvas".into(),
            serde_json::to_value(RawCanvas {
                width: self.canvas.width,
                height: self.canvas.height,
            })
            .unwrap(),
        );
        match &self.chart {
            Chart::Scatter { points, labels } => {
                let rows: Vec<Value> = points
                    .iter()
                    .zip(labels)
                    .map(|(&(x, y), &l)| serde_json::json!([x, y, l]))
                    .collect();
                doc.insert("points".into(), rows.into());
            }
            Chart::Line(lc) => {
                let series: Vec<Vec<[f64; 2]>> =
                    lc.series.iter().map(|s| s.iter().map(|&(x, y)| [x, y]).collect()).collect();
                doc.insert("series".into(), serde_json::to_value(series).unwrap());
            }
            Chart::Bar(bc) => {
                doc.insert("bars".into(), serde_json::to_value(&bc.values).unwrap());
            }
        }
        Value::Object(doc)
    }

    pub fn kind(&self) -> ChartKind {
        match self.chart {
            Chart::Scatter { .. } => ChartKind::Scatter,
            Chart::Line(_) => ChartKind::Line,
            Chart::Bar(_) => ChartKind::Bar,
        }
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Number of data marks: points, line vertices or bars.
    pub fn mark_count(&self) -> usize {
        match &self.chart {
            Chart::Scatter { points, .. } => points.len(),
            Chart::Line(lc) => lc.series.iter().map(Vec::len).sum(),
            Chart::Bar(bc) => bc.values.len(),
        }
    }

    /// Scatter points mapped onto the canvas.
    pub fn scatter_pixels(&self) -> Option<Vec<Point>> {
        match &self.chart {
            Chart::Scatter { points, .. } => {
                let mapping = CanvasMapping::fit(points, self.canvas);
                Some(points.iter().map(|&(x, y)| mapping.to_pixels(x, y)).collect())
            }
            _ => None,
        }
    }

    /// Pixel-space marks and their neighbor graph. Scatter points and line
    /// samples use the configured graph; bars are joined left to right.
    pub fn marks(&self, graph: &GraphSettings, spacing: f64) -> Result<Marks> {
        let points = match &self.chart {
            Chart::Scatter { labels, .. } => {
                let pixels = self.scatter_pixels().unwrap_or_default();
                LabeledPointSet::new(pixels, labels.clone(), self.class_count())?
            }
            Chart::Line(lc) => discretize_lines(lc, spacing)?,
            Chart::Bar(bc) => {
                let (points, graph) = bars_to_graph(bc)?;
                return Ok(Marks { points, graph });
            }
        };
        let graph = match *graph {
            GraphSettings::Alpha { radius: None } => default_alpha_shape_graph(&points),
            GraphSettings::Alpha { radius: Some(r) } => alpha_shape_graph(&points, r)?,
            GraphSettings::Knn { k } => knn_graph(&points, k)?,
        };
        Ok(Marks { points, graph })
    }
}
