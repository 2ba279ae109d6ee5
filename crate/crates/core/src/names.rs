//! Color-name count matrix and the cosine name difference.
//!
//! The matrix stores, for every cell of a regular LAB grid, how often each
//! color term was used to name colors falling into that cell. A color is
//! looked up by its nearest cell center.
//!
//! Text format:
//!
//! ```text
//! bins=<n>,terms=<k>,spacing=<s>
//! term_1,...,term_k
//! L,a,b,count_1,...,count_k      (n rows)
//! ```

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::color::{ciede2000, srgb_to_lab, LabColor, RgbColor};
use crate::error::{Error, Result};
use crate::filter::HueTerm;
use crate::scoring::Palette;

/// Grid coordinates may deviate from exact multiples of the spacing by this
/// fraction of a cell.
const GRID_TOLERANCE: f64 = 1e-6;

type Cell = [i64; 3];

#[derive(Debug, Clone)]
pub struct NameCountMatrix {
    bins: Vec<LabColor>,
    terms: Vec<String>,
    counts: Vec<u32>,
    spacing: f64,
    origin: LabColor,
    unit_rows: Vec<f64>,
    cells: BTreeMap<Cell, usize>,
    max_ring: i64,
}

/// A row of the count matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NameVector {
    pub values: Vec<f64>,
}

impl NameVector {
    pub fn new(values: Vec<f64>) -> Self {
        NameVector { values }
    }
}

impl NameCountMatrix {
    /// Validates and indexes a matrix. `counts` is row-major, one row per bin.
    pub fn new(
        bins: Vec<LabColor>,
        terms: Vec<String>,
        counts: Vec<u32>,
        spacing: f64,
    ) -> Result<Self> {
        let k = terms.len();
        if bins.is_empty() || k == 0 {
            return Err(Error::Validation("name matrix needs at least one bin and one term".into()));
        }
        if counts.len() != bins.len() * k {
            return Err(Error::Validation(alloc::format!(
                "expected {} counts for {} bins x {} terms, found {}",
                bins.len() * k,
                bins.len(),
                k,
                counts.len()
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Validation(alloc::format!("grid spacing must be positive, got {spacing}")));
        }

        let origin = bins[0];
        let mut cells = BTreeMap::new();
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for (i, bin) in bins.iter().enumerate() {
            let cell = grid_cell(bin, &origin, spacing).ok_or_else(|| {
                Error::Validation(alloc::format!(
                    "bin {i} ({}, {}, {}) is not on the {spacing}-unit grid",
                    bin.l, bin.a, bin.b
                ))
            })?;
            if cells.insert(cell, i).is_some() {
                return Err(Error::Validation(alloc::format!("bin {i} duplicates an earlier bin")));
            }
            for axis in 0..3 {
                lo[axis] = lo[axis].min(cell[axis]);
                hi[axis] = hi[axis].max(cell[axis]);
            }
        }

        let mut unit_rows = Vec::with_capacity(counts.len());
        for (i, row) in counts.chunks(k).enumerate() {
            let norm = libm::sqrt(row.iter().map(|&c| f64::from(c) * f64::from(c)).sum());
            if norm == 0.0 {
                return Err(Error::Validation(alloc::format!("bin {i} has no positive count")));
            }
            unit_rows.extend(row.iter().map(|&c| f64::from(c) / norm));
        }
        let max_ring = (0..3).map(|axis| hi[axis] - lo[axis]).max().unwrap_or(0) + 1;

        Ok(NameCountMatrix {
            bins,
            terms,
            counts,
            spacing,
            origin,
            unit_rows,
            cells,
            max_ring,
        })
    }

    /// Parses the text format described in the module docs.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let (line_no, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let (n, k, spacing) = parse_header(line_no, header)?;

        let (line_no, names) = lines.next().ok_or_else(|| parse_err(2, "missing term line"))?;
        let terms: Vec<String> = names.split(',').map(|t| t.trim().to_string()).collect();
        if terms.len() != k || terms.iter().any(String::is_empty) {
            return Err(parse_err(
                line_no,
                &alloc::format!("expected {k} term names, found {}", terms.len()),
            ));
        }

        let mut bins = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n * k);
        for (line_no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if bins.len() == n {
                return Err(parse_err(line_no, &alloc::format!("more than the {n} declared rows")));
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 + k {
                return Err(parse_err(
                    line_no,
                    &alloc::format!("expected {} fields, found {}", 3 + k, fields.len()),
                ));
            }
            let coord = |i: usize| -> Result<f64> {
                fields[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(line_no, &alloc::format!("bad coordinate {:?}", fields[i])))
            };
            bins.push(LabColor {
                l: coord(0)?,
                a: coord(1)?,
                b: coord(2)?,
            });
            for field in &fields[3..] {
                let v: i64 = field
                    .parse()
                    .map_err(|_| parse_err(line_no, &alloc::format!("bad count {field:?}")))?;
                if v < 0 {
                    return Err(Error::Validation(alloc::format!(
                        "line {line_no}: negative count {v}"
                    )));
                }
                let v = u32::try_from(v)
                    .map_err(|_| parse_err(line_no, &alloc::format!("count {v} too large")))?;
                counts.push(v);
            }
        }
        if bins.len() != n {
            return Err(parse_err(
                text.lines().count(),
                &alloc::format!("header declares {n} rows, found {}", bins.len()),
            ));
        }
        NameCountMatrix::new(bins, terms, counts, spacing)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "bins={},terms={},spacing={}",
            self.bins.len(),
            self.terms.len(),
            self.spacing
        );
        let _ = writeln!(out, "{}", self.terms.join(","));
        for (bin, row) in self.bins.iter().zip(self.counts.chunks(self.terms.len())) {
            let _ = write!(out, "{},{},{}", bin.l, bin.a, bin.b);
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    /// A synthetic matrix over the eleven basic color terms.
    ///
    /// Each in-gamut cell of a `spacing`-unit grid gets, for every term, a count
    /// that decays with the CIEDE2000 distance to a focal color of that term.
    /// Useful as a default when no survey-derived matrix is available.
    pub fn basic_terms(spacing: f64) -> Result<Self> {
        const FOCAL: [(HueTerm, RgbColor); 11] = [
            (HueTerm::Blue, RgbColor::new(0x1F, 0x5F, 0xD0)),
            (HueTerm::Brown, RgbColor::new(0x8C, 0x56, 0x4B)),
            (HueTerm::Green, RgbColor::new(0x2C, 0xA0, 0x2C)),
            (HueTerm::Orange, RgbColor::new(0xF2, 0x8E, 0x2B)),
            (HueTerm::Pink, RgbColor::new(0xF4, 0xA6, 0xC8)),
            (HueTerm::Purple, RgbColor::new(0x7B, 0x3F, 0xA0)),
            (HueTerm::Red, RgbColor::new(0xD7, 0x19, 0x1C)),
            (HueTerm::Yellow, RgbColor::new(0xF5, 0xE1, 0x1B)),
            (HueTerm::Black, RgbColor::new(0x00, 0x00, 0x00)),
            (HueTerm::Grey, RgbColor::new(0x80, 0x80, 0x80)),
            (HueTerm::White, RgbColor::new(0xFF, 0xFF, 0xFF)),
        ];
        const SIGMA: f64 = 20.0;
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Validation(alloc::format!("grid spacing must be positive, got {spacing}")));
        }
        let focal: Vec<LabColor> = FOCAL.iter().map(|(_, c)| srgb_to_lab(*c)).collect();
        let steps = |lo: f64, hi: f64| -> i64 { libm::floor((hi - lo) / spacing) as i64 };

        let mut bins = Vec::new();
        let mut counts = Vec::new();
        for li in 0..=steps(0.0, 100.0) {
            for ai in 0..=steps(-125.0, 125.0) {
                for bi in 0..=steps(-125.0, 125.0) {
                    let bin = LabColor {
                        l: li as f64 * spacing,
                        a: -125.0 + ai as f64 * spacing,
                        b: -125.0 + bi as f64 * spacing,
                    };
                    if !bin.in_srgb_gamut() {
                        continue;
                    }
                    let row: Vec<u32> = focal
                        .iter()
                        .map(|f| {
                            let d = ciede2000(bin, *f) / SIGMA;
                            libm::round(1000.0 * libm::exp(-0.5 * d * d)) as u32
                        })
                        .collect();
                    if row.iter().all(|&c| c == 0) {
                        let nearest = (0..focal.len())
                            .min_by(|&x, &y| ciede2000(bin, focal[x]).total_cmp(&ciede2000(bin, focal[y])))
                            .unwrap_or(0);
                        counts.extend((0..focal.len()).map(|t| u32::from(t == nearest)));
                    } else {
                        counts.extend(row);
                    }
                    bins.push(bin);
                }
            }
        }
        let terms = FOCAL.iter().map(|(t, _)| t.name().to_string()).collect();
        NameCountMatrix::new(bins, terms, counts, spacing)
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn bins(&self) -> &[LabColor] {
        &self.bins
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn row(&self, bin: usize) -> &[u32] {
        let k = self.terms.len();
        &self.counts[bin * k..(bin + 1) * k]
    }

    /// Index of the bin center nearest to `c` (Euclidean LAB distance); ties
    /// go to the lowest index.
    pub fn nearest_bin(&self, c: &LabColor) -> usize {
        let q = [
            (c.l - self.origin.l) / self.spacing,
            (c.a - self.origin.a) / self.spacing,
            (c.b - self.origin.b) / self.spacing,
        ];
        let center = q.map(|v| libm::round(v) as i64);
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=self.max_ring + center.iter().map(|c| c.abs()).max().unwrap_or(0) {
            // every cell on this ring is at least (ring - 0.5) cells away
            if let Some((d2, _)) = best {
                let reach = (ring as f64 - 0.5) * self.spacing;
                if reach > 0.0 && reach * reach > d2 * (1.0 + 1e-12) {
                    break;
                }
            }
            self.visit_ring(center, ring, |idx| {
                let d2 = self.bins[idx].distance_squared(c);
                let better = match best {
                    None => true,
                    Some((bd, bi)) => d2 < bd || (d2 == bd && idx < bi),
                };
                if better {
                    best = Some((d2, idx));
                }
            });
        }
        best.map_or(0, |(_, i)| i)
    }

    fn visit_ring(&self, center: Cell, ring: i64, mut f: impl FnMut(usize)) {
        let mut visit = |cell: Cell| {
            if let Some(&idx) = self.cells.get(&cell) {
                f(idx);
            }
        };
        for dl in -ring..=ring {
            for da in -ring..=ring {
                let (l, a) = (center[0] + dl, center[1] + da);
                if dl.abs() == ring || da.abs() == ring {
                    for db in -ring..=ring {
                        visit([l, a, center[2] + db]);
                    }
                } else {
                    visit([l, a, center[2] - ring]);
                    visit([l, a, center[2] + ring]);
                }
            }
        }
    }

    /// Count row of the bin nearest to `c`.
    pub fn name_vector(&self, c: &LabColor) -> NameVector {
        let bin = self.nearest_bin(c);
        NameVector::new(self.row(bin).iter().map(|&v| f64::from(v)).collect())
    }

    /// Cosine name difference between two bins, using pre-normalized rows.
    pub fn bin_difference(&self, a: usize, b: usize) -> f64 {
        let k = self.terms.len();
        let ra = &self.unit_rows[a * k..(a + 1) * k];
        let rb = &self.unit_rows[b * k..(b + 1) * k];
        let dot: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
        (1.0 - dot).clamp(0.0, 1.0)
    }
}

fn grid_cell(c: &LabColor, origin: &LabColor, spacing: f64) -> Option<Cell> {
    let mut cell = [0i64; 3];
    for (slot, (v, o)) in cell.iter_mut().zip([(c.l, origin.l), (c.a, origin.a), (c.b, origin.b)]) {
        let q = (v - o) / spacing;
        let r = libm::round(q);
        if libm::fabs(q - r) > GRID_TOLERANCE {
            return None;
        }
        *slot = r as i64;
    }
    Some(cell)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_header(line_no: usize, header: &str) -> Result<(usize, usize, f64)> {
    let mut n = None;
    let mut k = None;
    let mut spacing = None;
    for field in header.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, &alloc::format!("bad header field {field:?}")))?;
        let bad = || parse_err(line_no, &alloc::format!("bad header value {value:?}"));
        match key.trim() {
            "bins" => n = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
            "terms" => k = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
            "spacing" => spacing = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
            other => return Err(parse_err(line_no, &alloc::format!("unknown header key {other:?}"))),
        }
    }
    match (n, k, spacing) {
        (Some(n), Some(k), Some(s)) => Ok((n, k, s)),
        _ => Err(parse_err(line_no, "header must declare bins, terms and spacing")),
    }
}

/// `1 - cos(t1, t2)`, in `[0, 1]` for non-negative vectors.
pub fn name_difference(t1: &NameVector, t2: &NameVector) -> Result<f64> {
    if t1.values.len() != t2.values.len() {
        return Err(Error::SizeMismatch {
            expected: t1.values.len(),
            found: t2.values.len(),
        });
    }
    let norm = |v: &NameVector| libm::sqrt(v.values.iter().map(|x| x * x).sum());
    let (n1, n2) = (norm(t1), norm(t2));
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::DegenerateVector);
    }
    let dot: f64 = t1.values.iter().zip(&t2.values).map(|(a, b)| a * b).sum();
    Ok((1.0 - dot / (n1 * n2)).clamp(0.0, 1.0))
}

/// Mean name difference over all unordered pairs of class colors. The
/// background does not take part.
pub fn palette_name_difference(m: &NameCountMatrix, p: &Palette) -> Result<f64> {
    let colors = p.colors();
    if colors.len() < 2 {
        return Err(Error::TooFewColors(colors.len()));
    }
    let bins: Vec<usize> = colors.iter().map(|c| m.nearest_bin(c)).collect();
    let mut sum = 0.0;
    for i in 0..bins.len() {
        for j in i + 1..bins.len() {
            sum += m.bin_difference(bins[i], bins[j]);
        }
    }
    let pairs = bins.len() * (bins.len() - 1) / 2;
    Ok(sum / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    const TINY: &str = "bins=2,terms=3,spacing=5\nred,green,blue\n50,0,0,3,1,0\n55,0,0,0,2,5\n";

    #[test]
    fn parses_well_formed_file() {
        let m = NameCountMatrix::parse_csv(TINY).unwrap();
        assert_eq!(m.bin_count(), 2);
        assert_eq!(m.term_count(), 3);
        assert_eq!(m.row(1), &[0, 2, 5]);
        let again = NameCountMatrix::parse_csv(&m.to_csv()).unwrap();
        assert_eq!(again.row(0), m.row(0));
        assert_eq!(again.bins(), m.bins());
    }

    #[test]
    fn negative_count_is_a_validation_error() {
        let text = "bins=1,terms=2,spacing=5\na,b\n50,0,0,-1,2\n";
        assert!(matches!(NameCountMatrix::parse_csv(text), Err(Error::Validation(_))));
    }

    #[test]
    fn all_zero_row_is_a_validation_error() {
        let text = "bins=1,terms=2,spacing=5\na,b\n50,0,0,0,0\n";
        assert!(matches!(NameCountMatrix::parse_csv(text), Err(Error::Validation(_))));
    }

    #[test]
    fn header_row_mismatch_is_a_parse_error() {
        let short = "bins=3,terms=3,spacing=5\nred,green,blue\n50,0,0,3,1,0\n55,0,0,0,2,5\n";
        assert!(matches!(NameCountMatrix::parse_csv(short), Err(Error::Parse { .. })));
        let wide = "bins=1,terms=2,spacing=5\nred,green\n50,0,0,3,1,0\n";
        assert!(matches!(NameCountMatrix::parse_csv(wide), Err(Error::Parse { line: 3, .. })));
        let names = "bins=1,terms=3,spacing=5\nred,green\n50,0,0,3,1,0\n";
        assert!(matches!(NameCountMatrix::parse_csv(names), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(NameCountMatrix::parse_csv("bins=x"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn off_grid_bins_are_rejected() {
        let text = "bins=2,terms=1,spacing=5\nx\n50,0,0,1\n52,0,0,1\n";
        assert!(matches!(NameCountMatrix::parse_csv(text), Err(Error::Validation(_))));
    }

    #[test]
    fn lookup_at_center_and_tie() {
        let m = NameCountMatrix::parse_csv(TINY).unwrap();
        assert_eq!(m.name_vector(&LabColor::new(55.0, 0.0, 0.0)).values, vec![0.0, 2.0, 5.0]);
        assert_eq!(m.nearest_bin(&LabColor::new(52.5, 0.0, 0.0)), 0);
        // bins listed in the opposite order: the tie still goes to index 0
        let flipped = "bins=2,terms=3,spacing=5\nred,green,blue\n55,0,0,0,2,5\n50,0,0,3,1,0\n";
        let m = NameCountMatrix::parse_csv(flipped).unwrap();
        assert_eq!(m.nearest_bin(&LabColor::new(52.5, 0.0, 0.0)), 0);
    }

    #[test]
    fn name_difference_examples() {
        let v = |x: &[f64]| NameVector::new(x.to_vec());
        assert_eq!(name_difference(&v(&[2.0, 3.0, 1.0]), &v(&[2.0, 3.0, 1.0])).unwrap(), 0.0);
        assert_eq!(name_difference(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).unwrap(), 1.0);
        let d = name_difference(&v(&[1.0, 1.0, 0.0]), &v(&[0.0, 1.0, 1.0])).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert_eq!(
            name_difference(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::DegenerateVector)
        );
    }

    #[test]
    fn palette_name_difference_cases() {
        let m = NameCountMatrix::parse_csv(TINY).unwrap();
        let a = LabColor::new(50.0, 0.0, 0.0);
        let b = LabColor::new(55.0, 0.0, 0.0);
        let white = LabColor::new(100.0, 0.0, 0.0);
        let pair = Palette::new(vec![a, b], white);
        let direct = name_difference(&m.name_vector(&a), &m.name_vector(&b)).unwrap();
        assert!((palette_name_difference(&m, &pair).unwrap() - direct).abs() < 1e-12);

        let same = Palette::new(vec![a, LabColor::new(49.0, 1.0, 0.0), a], white);
        assert!(palette_name_difference(&m, &same).unwrap().abs() < 1e-12);

        let single = Palette::new(vec![a], white);
        assert_eq!(palette_name_difference(&m, &single), Err(Error::TooFewColors(1)));
    }

    #[test]
    fn basic_term_matrix_is_valid() {
        let m = NameCountMatrix::basic_terms(10.0).unwrap();
        assert_eq!(m.term_count(), 11);
        assert!(m.bin_count() > 100);
        // focal red and focal blue should be named differently
        let red = m.name_vector(&srgb_to_lab(RgbColor::new(0xD7, 0x19, 0x1C)));
        let blue = m.name_vector(&srgb_to_lab(RgbColor::new(0x1F, 0x5F, 0xD0)));
        assert!(name_difference(&red, &blue).unwrap() > 0.5);
    }

    fn brute_nearest(m: &NameCountMatrix, c: &LabColor) -> usize {
        let mut best = 0;
        for i in 1..m.bin_count() {
            if m.bins()[i].distance_squared(c) < m.bins()[best].distance_squared(c) {
                best = i;
            }
        }
        best
    }

    fn lab() -> impl Strategy<Value = LabColor> {
        (0.0..=100.0f64, -128.0..=128.0f64, -128.0..=128.0f64)
            .prop_map(|(l, a, b)| LabColor::new(l, a, b))
    }

    proptest! {
        #[test]
        fn nearest_bin_matches_exhaustive_scan(c in lab()) {
            let m = NameCountMatrix::basic_terms(10.0).unwrap();
            prop_assert_eq!(m.nearest_bin(&c), brute_nearest(&m, &c));
        }

        #[test]
        fn name_difference_properties(
            x in proptest::collection::vec(0u32..50, 5),
            y in proptest::collection::vec(0u32..50, 5),
        ) {
            prop_assume!(x.iter().any(|&v| v > 0) && y.iter().any(|&v| v > 0));
            let vx = NameVector::new(x.iter().map(|&v| f64::from(v)).collect());
            let vy = NameVector::new(y.iter().map(|&v| f64::from(v)).collect());
            let d = name_difference(&vx, &vy).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, name_difference(&vy, &vx).unwrap());
            prop_assert!(name_difference(&vx, &vx).unwrap() < 1e-12);
        }

        #[test]
        fn palette_name_difference_matches_pairwise_mean(
            colors in proptest::collection::vec(lab(), 2..=6),
            rot in 0usize..6,
        ) {
            let m = NameCountMatrix::basic_terms(10.0).unwrap();
            let white = LabColor::new(100.0, 0.0, 0.0);
            let p = Palette::new(colors.clone(), white);
            let mut sum = 0.0;
            let mut pairs = 0;
            for i in 0..colors.len() {
                for j in 0..colors.len() {
                    if i != j {
                        sum += name_difference(&m.name_vector(&colors[i]), &m.name_vector(&colors[j])).unwrap();
                        pairs += 1;
                    }
                }
            }
            let got = palette_name_difference(&m, &p).unwrap();
            prop_assert!((got - sum / pairs as f64).abs() < 1e-9);

            let mut rotated = colors.clone();
            rotated.rotate_left(rot % colors.len());
            let permuted = palette_name_difference(&m, &Palette::new(rotated, white)).unwrap();
            prop_assert!((got - permuted).abs() < 1e-12);
        }
    }
}
