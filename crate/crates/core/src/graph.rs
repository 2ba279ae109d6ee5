//! Neighbor graphs over labeled 2-D marks.
//!
//! Three constructions are provided: the Delaunay edge set, the alpha-shape
//! graph (Delaunay edges whose endpoint balls of radius `alpha` intersect) and
//! a symmetrized k-nearest-neighbor graph.

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Offset applied to coincident points, in pixels.
pub const DUPLICATE_JITTER: f64 = 1e-6;

/// Multiple of the median Delaunay edge length used as the default alpha.
pub const DEFAULT_ALPHA_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    fn distance_squared(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Points in chart pixel coordinates, each tagged with a 0-based class index.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointSet {
    points: Vec<Point>,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
}

impl LabeledPointSet {
    /// Validates labels against `class_count` classes; every class must own
    /// at least one point.
    pub fn new(points: Vec<Point>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::SizeMismatch {
                expected: points.len(),
                found: labels.len(),
            });
        }
        if class_count == 0 {
            return Err(Error::Validation("at least one class is required".into()));
        }
        if let Some(p) = points.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::Validation(alloc::format!("point {p} has non-finite coordinates")));
        }
        let mut class_counts = vec![0; class_count];
        for (i, &label) in labels.iter().enumerate() {
            let slot = class_counts.get_mut(label).ok_or_else(|| {
                Error::Validation(alloc::format!(
                    "point {i} references class {label}, but only {class_count} classes exist"
                ))
            })?;
            *slot += 1;
        }
        if let Some(empty) = class_counts.iter().position(|&n| n == 0) {
            return Err(Error::Validation(alloc::format!("class {empty} has no points")));
        }
        Ok(LabeledPointSet {
            points,
            labels,
            class_counts,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_counts.len()
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Copy of the points with coincident coordinates pulled apart by
    /// [`DUPLICATE_JITTER`]. Returns the number of moved points.
    fn separated_points(&self) -> (Vec<Point>, usize) {
        let mut pts = self.points.clone();
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&a, &b| {
            pts[a]
                .x
                .total_cmp(&pts[b].x)
                .then(pts[a].y.total_cmp(&pts[b].y))
                .then(a.cmp(&b))
        });
        let mut moved = 0;
        let mut run = 0usize;
        for w in 1..order.len() {
            let (prev, cur) = (order[w - 1], order[w]);
            if self.points[prev] == self.points[cur] {
                run += 1;
                let angle = run as f64 * 2.399_963_229_728_653; // golden angle
                let radius = DUPLICATE_JITTER * libm::sqrt(run as f64);
                pts[cur].x += radius * libm::cos(angle);
                pts[cur].y += radius * libm::sin(angle);
                moved += 1;
            } else {
                run = 0;
            }
        }
        (pts, moved)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    Delaunay,
    AlphaShape { radius: f64 },
    Knn { k: usize },
    /// Adjacent bars of a bar chart.
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Symmetric neighbor lists without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    neighbors: Vec<Vec<Neighbor>>,
    kind: GraphKind,
    warnings: Vec<String>,
}

impl NeighborGraph {
    /// Builds the graph from undirected edges. Duplicate edges collapse;
    /// self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], kind: GraphKind) -> Self {
        let mut neighbors: Vec<Vec<Neighbor>> = vec![Vec::new(); n];
        for &(i, j, distance) in edges {
            if i == j {
                continue;
            }
            neighbors[i].push(Neighbor { index: j, distance });
            neighbors[j].push(Neighbor { index: i, distance });
        }
        for list in &mut neighbors {
            list.sort_by_key(|a| a.index);
            list.dedup_by_key(|n| n.index);
        }
        NeighborGraph {
            neighbors,
            kind,
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.neighbors[i]
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Undirected edges `(i, j, distance)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, list) in self.neighbors.iter().enumerate() {
            for n in list.iter().filter(|n| n.index > i) {
                out.push((i, n.index, n.distance));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Result of [`delaunay`]: undirected edges `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaunayEdges {
    pub edges: Vec<(usize, usize)>,
    /// Pixel positions actually triangulated (after duplicate separation).
    pub points: Vec<Point>,
    pub warnings: Vec<String>,
}

impl DelaunayEdges {
    pub fn lengths(&self) -> Vec<f64> {
        self.edges
            .iter()
            .map(|&(i, j)| self.points[i].distance(&self.points[j]))
            .collect()
    }

    /// `DEFAULT_ALPHA_FACTOR` times the median edge length, or 1 px when
    /// there are no edges.
    pub fn default_alpha(&self) -> f64 {
        let mut lengths = self.lengths();
        if lengths.is_empty() {
            return 1.0;
        }
        lengths.sort_by(f64::total_cmp);
        let mid = lengths.len() / 2;
        let median = if lengths.len() % 2 == 0 {
            (lengths[mid - 1] + lengths[mid]) / 2.0
        } else {
            lengths[mid]
        };
        DEFAULT_ALPHA_FACTOR * median
    }
}

fn duplicate_warning(moved: usize) -> Vec<String> {
    if moved == 0 {
        Vec::new()
    } else {
        vec![alloc::format!(
            "{moved} coincident point(s) were offset by {DUPLICATE_JITTER} px"
        )]
    }
}

/// Delaunay triangulation edges.
///
/// Fewer than three points, or points that are all collinear, yield the
/// chain of consecutive points ordered by `(x, y)`.
pub fn delaunay(ps: &LabeledPointSet) -> DelaunayEdges {
    let (points, moved) = ps.separated_points();
    let warnings = duplicate_warning(moved);
    let n = points.len();
    if n < 2 {
        return DelaunayEdges {
            edges: Vec::new(),
            points,
            warnings,
        };
    }

    let input: Vec<delaunator::Point> = points
        .iter()
        .map(|p| delaunator::Point { x: p.x, y: p.y })
        .collect();
    let triangles = if n >= 3 {
        Some(delaunator::triangulate(&input)).filter(|t| !t.triangles.is_empty())
    } else {
        None
    };

    let mut edges = Vec::new();
    if let Some(tri) = triangles {
        for e in 0..tri.triangles.len() {
            let twin = tri.halfedges[e];
            if twin == delaunator::EMPTY || e > twin {
                let a = tri.triangles[e];
                let b = tri.triangles[delaunator::next_halfedge(e)];
                edges.push((a.min(b), a.max(b)));
            }
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            points[a]
                .x
                .total_cmp(&points[b].x)
                .then(points[a].y.total_cmp(&points[b].y))
                .then(a.cmp(&b))
        });
        for w in order.windows(2) {
            edges.push((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    DelaunayEdges {
        edges,
        points,
        warnings,
    }
}

/// Alpha-shape graph with the given ball radius in pixels.
///
/// Keeps a Delaunay edge when the two balls of radius `alpha_radius` centered
/// at its endpoints intersect, i.e. when its length is at most
/// `2 * alpha_radius`. `f64::INFINITY` keeps every edge.
pub fn alpha_shape_graph(ps: &LabeledPointSet, alpha_radius: f64) -> Result<NeighborGraph> {
    let tri = delaunay(ps);
    alpha_shape_from_delaunay(&tri, alpha_radius)
}

/// Same as [`alpha_shape_graph`], reusing an existing triangulation.
pub fn alpha_shape_from_delaunay(tri: &DelaunayEdges, alpha_radius: f64) -> Result<NeighborGraph> {
    if !(alpha_radius > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "alpha radius must be positive, got {alpha_radius}"
        )));
    }
    let reach = 2.0 * alpha_radius;
    let edges: Vec<(usize, usize, f64)> = tri
        .edges
        .iter()
        .map(|&(i, j)| (i, j, tri.points[i].distance(&tri.points[j])))
        .filter(|&(_, _, d)| d <= reach)
        .collect();
    let mut graph = NeighborGraph::from_edges(
        tri.points.len(),
        &edges,
        GraphKind::AlphaShape {
            radius: alpha_radius,
        },
    );
    graph.warnings = tri.warnings.clone();
    Ok(graph)
}

/// Alpha-shape graph with `alpha = 1.5 x median Delaunay edge length`.
pub fn default_alpha_shape_graph(ps: &LabeledPointSet) -> NeighborGraph {
    let tri = delaunay(ps);
    let alpha = tri.default_alpha();
    // default_alpha is always positive
    alpha_shape_from_delaunay(&tri, alpha).unwrap_or_else(|_| {
        NeighborGraph::from_edges(tri.points.len(), &[], GraphKind::AlphaShape { radius: alpha })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Symmetrized k-nearest-neighbor graph: `j` is a neighbor of `i` when either
/// is among the other's `k` nearest points. Distance ties go to the lower
/// index.
pub fn knn_graph(ps: &LabeledPointSet, k: usize) -> Result<NeighborGraph> {
    let n = ps.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    let (points, moved) = ps.separated_points();

    // sweep outward along x from each point, pruning by the current k-th
    // nearest distance
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(a.cmp(&b)));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }

    let mut edges = Vec::with_capacity(n * k);
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
    for i in 0..n {
        heap.clear();
        let p = points[i];
        let offer = |j: usize, heap: &mut BinaryHeap<Candidate>| {
            let c = Candidate {
                d2: p.distance_squared(&points[j]),
                index: j,
            };
            if heap.len() < k {
                heap.push(c);
            } else if heap.peek().is_some_and(|worst| c < *worst) {
                heap.pop();
                heap.push(c);
            }
        };
        let r = rank[i];
        let (mut left, mut right) = (r, r + 1);
        loop {
            let bound = if heap.len() < k {
                f64::INFINITY
            } else {
                heap.peek().map_or(f64::INFINITY, |c| c.d2)
            };
            let left_open = left > 0 && {
                let dx = p.x - points[order[left - 1]].x;
                dx * dx <= bound
            };
            let right_open = right < n && {
                let dx = points[order[right]].x - p.x;
                dx * dx <= bound
            };
            if !left_open && !right_open {
                break;
            }
            if left_open {
                left -= 1;
                offer(order[left], &mut heap);
            }
            if right_open {
                offer(order[right], &mut heap);
                right += 1;
            }
        }
        for c in heap.iter() {
            edges.push((i, c.index, libm::sqrt(c.d2)));
        }
    }
    let mut graph = NeighborGraph::from_edges(n, &edges, GraphKind::Knn { k });
    graph.warnings = duplicate_warning(moved);
    Ok(graph)
}
