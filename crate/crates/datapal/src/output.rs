//! Palette JSON, SVG previews and energy traces.

use std::fmt::Write as _;

use datapal_core::{lab_to_srgb, srgb_to_lab, EnergyBreakdown, Palette, ScoreWeights, TracePoint};
use serde::{Deserialize, Serialize};

use crate::dataset::{Chart, ChartDataset};
use crate::error::{Error, Result};
use crate::settings::parse_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorEntry {
    pub class: String,
    pub hex: String,
    pub lab: [f64; 3],
    #[serde(default)]
    pub locked: bool,
}

/// Energy terms as reported to users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyDocument {
    /// Point distinctness divided by `pd_norm`.
    pub point_distinctness: f64,
    pub point_distinctness_raw: f64,
    pub pd_norm: f64,
    pub name_difference: f64,
    pub color_discrimination: f64,
    pub weights: [f64; 3],
    pub nd_factor: f64,
    pub cd_factor: f64,
    pub total: f64,
}

impl EnergyDocument {
    pub fn new(e: &EnergyBreakdown, sw: &ScoreWeights) -> Self {
        EnergyDocument {
            point_distinctness: e.pd_normalized,
            point_distinctness_raw: e.pd_raw,
            pd_norm: sw.pd_norm,
            name_difference: e.nd,
            color_discrimination: e.cd,
            weights: sw.omega,
            nd_factor: sw.nd_factor,
            cd_factor: sw.cd_factor,
            total: e.total,
        }
    }
}

/// `{"background": "#RRGGBB", "colors": [...], "energy": {...}}`.
///
/// Hex strings are authoritative when reading; `lab` is informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaletteDocument {
    pub background: String,
    pub colors: Vec<ColorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyDocument>,
}

fn hex_of(c: datapal_core::LabColor) -> String {
    lab_to_srgb(c).0.to_hex()
}

impl PaletteDocument {
    pub fn new(p: &Palette, class_names: &[String], energy: Option<EnergyDocument>) -> Self {
        let colors = p
            .colors()
            .iter()
            .enumerate()
            .map(|(i, &c)| ColorEntry {
                class: class_names.get(i).cloned().unwrap_or_else(|| i.to_string()),
                hex: hex_of(c),
                lab: [c.l, c.a, c.b],
                locked: p.is_locked(i),
            })
            .collect();
        PaletteDocument {
            background: hex_of(p.background()),
            colors,
            energy,
        }
    }

    pub fn to_palette(&self) -> Result<Palette> {
        let colors = self
            .colors
            .iter()
            .enumerate()
            .map(|(i, e)| Ok(srgb_to_lab(parse_hex(&format!("colors[{i}].hex"), &e.hex)?)))
            .collect::<Result<Vec<_>>>()?;
        let background = srgb_to_lab(parse_hex("background", &self.background)?);
        let locked = self.colors.iter().map(|e| e.locked).collect();
        Ok(Palette::with_locks(colors, background, locked)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("palette documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Radius of scatter marks in the preview.
const POINT_RADIUS: f64 = 3.0;
const LINE_WIDTH: f64 = 2.0;

/// SVG preview: a background rectangle, then one circle per scatter point,
/// one polyline per line series or one rectangle per bar.
pub fn render_svg(ds: &ChartDataset, p: &Palette) -> Result<String> {
    if p.len() != ds.class_count() {
        return Err(Error::Core(datapal_core::Error::SizeMismatch {
            expected: ds.class_count(),
            found: p.len(),
        }));
    }
    let hex: Vec<String> = p.colors().iter().map(|&c| hex_of(c)).collect();
    let (w, h) = (ds.canvas.width, ds.canvas.height);
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="{}"/>"#, hex_of(p.background())).unwrap();
    match &ds.chart {
        Chart::Scatter { labels, .. } => {
            let pixels = ds.scatter_pixels().unwrap_or_default();
            for (pt, &l) in pixels.iter().zip(labels) {
                writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="{POINT_RADIUS}" fill="{}"/>"#,
                    pt.x, pt.y, hex[l]
                )
                .unwrap();
            }
        }
        Chart::Line(lc) => {
            for (series, color) in lc.pixel_series().iter().zip(&hex) {
                let pts: Vec<String> = series.iter().map(|q| format!("{:.2},{:.2}", q.x, q.y)).collect();
                writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{LINE_WIDTH}"/>"#,
                    pts.join(" ")
                )
                .unwrap();
            }
        }
        Chart::Bar(bc) => {
            for (&(x, y, bw, bh), color) in bc.rects().iter().zip(&hex) {
                writeln!(
                    svg,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{bw:.2}" height="{bh:.2}" fill="{color}"/>"#
                )
                .unwrap();
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// `iteration,current_energy,best_energy` with one row per iteration.
pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("iteration,current_energy,best_energy\n");
    for t in trace {
        writeln!(out, "{},{},{}", t.iteration, t.current_energy, t.best_energy).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use datapal_core::RgbColor;

    fn palette(hex: &[&str]) -> Palette {
        let colors = hex.iter().map(|h| srgb_to_lab(RgbColor::from_hex(h).unwrap())).collect();
        Palette::new(colors, srgb_to_lab(RgbColor::WHITE))
    }

    #[test]
    fn one_point_one_circle() {
        let ds = ChartDataset::from_json(r#"{"kind":"scatter","points":[[3,4,0]]}"#).unwrap();
        let svg = render_svg(&ds, &palette(&["#336699"])).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains(r##"fill="#336699""##));
        assert!(svg.contains(r##"fill="#FFFFFF""##));
    }

    #[test]
    fn three_bars_three_rects_plus_background() {
        let ds = ChartDataset::from_json(r#"{"kind":"bar","bars":[1,2,3]}"#).unwrap();
        let svg = render_svg(&ds, &palette(&["#AA0000", "#00AA00", "#0000AA"])).unwrap();
        assert_eq!(svg.matches("<rect").count(), 4);
    }

    #[test]
    fn lines_render_as_polylines() {
        let ds = ChartDataset::from_json(r#"{"kind":"line","series":[[[0,0],[1,1]],[[0,1],[1,0]]]}"#).unwrap();
        let svg = render_svg(&ds, &palette(&["#AA0000", "#0000AA"])).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r##"stroke="#0000AA""##));
    }

    #[test]
    fn palette_size_must_match() {
        let ds = ChartDataset::from_json(r#"{"kind":"bar","bars":[1,2,3]}"#).unwrap();
        assert!(matches!(
            render_svg(&ds, &palette(&["#AA0000"])),
            Err(Error::Core(datapal_core::Error::SizeMismatch { expected: 3, found: 1 }))
        ));
    }

    #[test]
    fn palette_json_round_trip() {
        let mut p = palette(&["#E41A1C", "#377EB8", "#4DAF4A"]);
        p.set_locked(1, true);
        let doc = PaletteDocument::new(&p, &["a".into(), "b".into(), "c".into()], None);
        let text = doc.to_json();
        let back = PaletteDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_palette().unwrap(), p);
        assert_eq!(back.colors[1].hex, "#377EB8");
        assert!(back.colors[1].locked);
    }

    #[test]
    fn trace_has_a_header_and_one_row_per_point() {
        let t = [
            TracePoint { iteration: 0, current_energy: 1.0, best_energy: 1.0 },
            TracePoint { iteration: 1, current_energy: 0.5, best_energy: 1.0 },
        ];
        assert_eq!(trace_csv(&t), "iteration,current_energy,best_energy\n0,1,1\n1,0.5,1\n");
    }
}
