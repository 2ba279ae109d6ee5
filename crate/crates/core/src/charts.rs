//! Line and bar charts expressed as labeled points.
//!
//! Line series are resampled into equidistant points in pixel space and then
//! handled like scatterplots. Bars become one point per bar at the rectangle
//! center, linked to the adjacent bars.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{GraphKind, LabeledPointSet, NeighborGraph, Point};

/// Default line resampling distance in pixels.
pub const DEFAULT_SPACING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas {
            width: 400.0,
            height: 400.0,
        }
    }
}

impl Canvas {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
            return Err(Error::Validation(alloc::format!(
                "canvas must have positive size, got {width}x{height}"
            )));
        }
        Ok(Canvas { width, height })
    }
}

/// Linear map from data coordinates to canvas pixels (y pointing down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanvasMapping {
    pub x_domain: (f64, f64),
    pub y_domain: (f64, f64),
    pub canvas: Canvas,
}

impl CanvasMapping {
    /// Fits the bounding box of `points` to the canvas.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a (f64, f64)>, canvas: Canvas) -> Self {
        let mut x_domain = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y_domain = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            x_domain = (x_domain.0.min(x), x_domain.1.max(x));
            y_domain = (y_domain.0.min(y), y_domain.1.max(y));
        }
        if x_domain.0 > x_domain.1 {
            x_domain = (0.0, 0.0);
        }
        if y_domain.0 > y_domain.1 {
            y_domain = (0.0, 0.0);
        }
        CanvasMapping {
            x_domain,
            y_domain,
            canvas,
        }
    }

    /// Degenerate (zero-width) domains map to the canvas center.
    pub fn to_pixels(&self, x: f64, y: f64) -> Point {
        let scale = |v: f64, (lo, hi): (f64, f64), size: f64| {
            if hi > lo {
                (v - lo) / (hi - lo) * size
            } else {
                size / 2.0
            }
        };
        Point::new(
            scale(x, self.x_domain, self.canvas.width),
            self.canvas.height - scale(y, self.y_domain, self.canvas.height),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChartData {
    /// One polyline per class, vertices in data coordinates.
    pub series: Vec<Vec<(f64, f64)>>,
    pub canvas: Canvas,
    /// Explicit data domains; the bounding box of all vertices otherwise.
    pub x_domain: Option<(f64, f64)>,
    pub y_domain: Option<(f64, f64)>,
}

impl LineChartData {
    pub fn new(series: Vec<Vec<(f64, f64)>>, canvas: Canvas) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::Validation("a line chart needs at least one series".into()));
        }
        for (s, line) in series.iter().enumerate() {
            if line.len() < 2 {
                return Err(Error::Validation(alloc::format!(
                    "series {s} has {} vertices, at least 2 are required",
                    line.len()
                )));
            }
            if line.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
                return Err(Error::Validation(alloc::format!("series {s} has non-finite coordinates")));
            }
            if let Some(v) = line.windows(2).position(|w| w[1].0 <= w[0].0) {
                return Err(Error::Validation(alloc::format!(
                    "series {s}: x must be strictly increasing (vertex {})",
                    v + 1
                )));
            }
        }
        Ok(LineChartData {
            series,
            canvas,
            x_domain: None,
            y_domain: None,
        })
    }

    pub fn mapping(&self) -> CanvasMapping {
        let mut m = CanvasMapping::fit(self.series.iter().flatten(), self.canvas);
        if let Some(d) = self.x_domain {
            m.x_domain = d;
        }
        if let Some(d) = self.y_domain {
            m.y_domain = d;
        }
        m
    }

    /// Series vertices mapped to pixels.
    pub fn pixel_series(&self) -> Vec<Vec<Point>> {
        let m = self.mapping();
        self.series
            .iter()
            .map(|line| line.iter().map(|&(x, y)| m.to_pixels(x, y)).collect())
            .collect()
    }
}

/// Resamples every series at equal arc-length steps in pixel space.
///
/// A polyline of pixel length `L` yields `max(2, floor(L / spacing) + 1)`
/// samples spread evenly from its first to its last vertex, so both endpoints
/// are always present and steep segments produce more samples per unit of x.
/// Each sample is labeled with its series index.
pub fn discretize_lines(lc: &LineChartData, spacing: f64) -> Result<LabeledPointSet> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!("spacing must be positive, got {spacing}")));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (class, line) in lc.pixel_series().iter().enumerate() {
        let samples = resample(line, spacing);
        labels.extend(core::iter::repeat_n(class, samples.len()));
        points.extend(samples);
    }
    LabeledPointSet::new(points, labels, lc.series.len())
}

fn resample(line: &[Point], spacing: f64) -> Vec<Point> {
    let lengths: Vec<f64> = line.windows(2).map(|w| w[0].distance(&w[1])).collect();
    let total: f64 = lengths.iter().sum();
    let count = (libm::floor(total / spacing + 1e-9) as usize + 1).max(2);
    let step = total / (count - 1) as f64;

    let mut out = Vec::with_capacity(count);
    let mut segment = 0;
    let mut walked = 0.0;
    for s in 0..count {
        if s == count - 1 {
            out.push(line[line.len() - 1]);
            break;
        }
        let target = s as f64 * step;
        while segment < lengths.len() - 1 && walked + lengths[segment] < target {
            walked += lengths[segment];
            segment += 1;
        }
        let (a, b) = (line[segment], line[segment + 1]);
        let t = if lengths[segment] > 0.0 {
            ((target - walked) / lengths[segment]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
    }
    out
}

/// Bars laid out left to right in equal bands of the canvas width.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChartData {
    pub values: Vec<f64>,
    pub canvas: Canvas,
    /// Fraction of each band left empty between bars.
    pub gap_ratio: f64,
}

impl BarChartData {
    pub fn new(values: Vec<f64>, canvas: Canvas) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Validation(alloc::format!(
                "a bar chart needs at least 2 bars, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation(alloc::format!(
                "bar {i} has invalid height {}",
                values[i]
            )));
        }
        Ok(BarChartData {
            values,
            canvas,
            gap_ratio: 0.2,
        })
    }

    /// Pixel rectangles `(x, y, width, height)` of the bars.
    pub fn rects(&self) -> Vec<(f64, f64, f64, f64)> {
        let band = self.canvas.width / self.values.len() as f64;
        let width = band * (1.0 - self.gap_ratio.clamp(0.0, 0.95));
        let max = self.values.iter().copied().fold(0.0, f64::max);
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let h = if max > 0.0 { v / max * self.canvas.height } else { 0.0 };
                let x = (i as f64 + 0.5) * band - width / 2.0;
                (x, self.canvas.height - h, width, h)
            })
            .collect()
    }
}

/// One point per bar at the center of its rectangle, joined to its
/// neighbors by a path graph. Edge distances are the center-to-center
/// lengths in pixels.
pub fn bars_to_graph(bc: &BarChartData) -> Result<(LabeledPointSet, NeighborGraph)> {
    let m = bc.values.len();
    if m < 2 {
        return Err(Error::Validation(alloc::format!("a bar chart needs at least 2 bars, got {m}")));
    }
    let points: Vec<Point> = bc
        .rects()
        .iter()
        .map(|&(x, y, w, h)| Point::new(x + w / 2.0, y + h / 2.0))
        .collect();
    let edges: Vec<(usize, usize, f64)> = (0..m - 1)
        .map(|i| (i, i + 1, points[i].distance(&points[i + 1])))
        .collect();
    let graph = NeighborGraph::from_edges(m, &edges, GraphKind::Path);
    let ps = LabeledPointSet::new(points, (0..m).collect(), m)?;
    Ok((ps, graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn chart(series: Vec<Vec<(f64, f64)>>, w: f64, h: f64) -> LineChartData {
        LineChartData::new(series, Canvas::new(w, h).unwrap()).unwrap()
    }

    #[test]
    fn horizontal_segment_sample_count() {
        // zero y-range maps to the vertical center
        let lc = chart(vec![vec![(0.0, 5.0), (1.0, 5.0)]], 100.0, 100.0);
        let ps = discretize_lines(&lc, 10.0).unwrap();
        assert_eq!(ps.len(), 11);
        assert_eq!(ps.points()[0], Point::new(0.0, 50.0));
        assert_eq!(ps.points()[10], Point::new(100.0, 50.0));
        for w in ps.points().windows(2) {
            assert!((w[0].distance(&w[1]) - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn steep_segment_gets_more_samples() {
        // arc length 100·√2 ≈ 141.4 → ⌊14.14⌋ + 1 = 15
        let lc = chart(vec![vec![(0.0, 0.0), (100.0, 100.0)]], 100.0, 100.0);
        let ps = discretize_lines(&lc, 10.0).unwrap();
        assert_eq!(ps.len(), 15);
        assert!(ps.len() > 11);
        assert_eq!(ps.points()[14], Point::new(100.0, 0.0));
    }

    #[test]
    fn single_series_labels() {
        let lc = chart(vec![vec![(0.0, 0.0), (1.0, 3.0), (2.0, 1.0)]], 400.0, 400.0);
        let ps = discretize_lines(&lc, 10.0).unwrap();
        assert!(ps.labels().iter().all(|&l| l == 0));
        assert!(discretize_lines(&lc, 0.0).is_err());
    }

    #[test]
    fn line_validation() {
        let canvas = Canvas::default();
        assert!(LineChartData::new(vec![vec![(0.0, 0.0)]], canvas).is_err());
        assert!(LineChartData::new(vec![vec![(0.0, 0.0), (0.0, 1.0)]], canvas).is_err());
        assert!(LineChartData::new(vec![vec![(1.0, 0.0), (0.0, 1.0)]], canvas).is_err());
        assert!(Canvas::new(0.0, 10.0).is_err());
    }

    #[test]
    fn two_equal_bars() {
        let bc = BarChartData::new(vec![3.0, 3.0], Canvas::new(80.0, 100.0).unwrap()).unwrap();
        let (ps, g) = bars_to_graph(&bc).unwrap();
        assert_eq!(ps.len(), 2);
        let edges = g.edges();
        assert_eq!(edges.len(), 1);
        assert!((edges[0].2 - 40.0).abs() < 1e-12);
    }

    #[test]
    fn bars_form_a_path() {
        let bc = BarChartData::new(vec![1.0, 5.0, 2.0], Canvas::default()).unwrap();
        let (_, g) = bars_to_graph(&bc).unwrap();
        let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.0, e.1)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
        assert!(BarChartData::new(vec![1.0], Canvas::default()).is_err());
        assert!(BarChartData::new(vec![1.0, -1.0], Canvas::default()).is_err());
    }

    #[test]
    fn similar_heights_are_closer() {
        let canvas = Canvas::default();
        let (_, equal) = bars_to_graph(&BarChartData::new(vec![5.0, 5.0, 10.0], canvas).unwrap()).unwrap();
        let (_, diff) = bars_to_graph(&BarChartData::new(vec![1.0, 9.0, 10.0], canvas).unwrap()).unwrap();
        assert!(equal.edges()[0].2 < diff.edges()[0].2);
    }

    proptest! {
        #[test]
        fn sample_count_tracks_arc_length(
            steps in proptest::collection::vec((0.1..50.0f64, -100.0..100.0f64), 1..8),
            spacing in 1.0..30.0f64,
        ) {
            let mut x = 0.0;
            let mut line = vec![(0.0, 0.0)];
            for (dx, y) in steps {
                x += dx;
                line.push((x, y));
            }
            let lc = chart(vec![line], 400.0, 400.0);
            let pixels = &lc.pixel_series()[0];
            let length: f64 = pixels.windows(2).map(|w| w[0].distance(&w[1])).sum();
            let expected = libm::floor(length / spacing) as i64 + 1;
            let n = discretize_lines(&lc, spacing).unwrap().len() as i64;
            prop_assert!((n - expected).abs() <= 1, "{} vs {}", n, expected);
            let again = discretize_lines(&lc, spacing).unwrap();
            prop_assert_eq!(again.len() as i64, n);
        }

        #[test]
        fn bar_graph_is_simple_path(values in proptest::collection::vec(0.0..100.0f64, 2..20)) {
            let m = values.len();
            let bc = BarChartData::new(values, Canvas::default()).unwrap();
            let (ps, g) = bars_to_graph(&bc).unwrap();
            prop_assert_eq!(ps.class_count(), m);
            let edges = g.edges();
            prop_assert_eq!(edges.len(), m - 1);
            for (k, e) in edges.iter().enumerate() {
                prop_assert_eq!((e.0, e.1), (k, k + 1));
                prop_assert!(e.2 > 0.0);
            }
        }
    }
}
