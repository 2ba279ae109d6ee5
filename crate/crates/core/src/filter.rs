//! Candidate-color filter: disliked colors, lightness bounds and hue terms.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::color::LabColor;
use crate::error::{Error, Result};

/// Rejection-sampling budget of [`sample_candidate`].
pub const SAMPLE_ATTEMPTS: usize = 10_000;

/// The eleven basic color terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HueTerm {
    Blue,
    Brown,
    Green,
    Orange,
    Pink,
    Purple,
    Red,
    Yellow,
    Black,
    Grey,
    White,
}

impl HueTerm {
    pub const ALL: [HueTerm; 11] = [
        HueTerm::Blue,
        HueTerm::Brown,
        HueTerm::Green,
        HueTerm::Orange,
        HueTerm::Pink,
        HueTerm::Purple,
        HueTerm::Red,
        HueTerm::Yellow,
        HueTerm::Black,
        HueTerm::Grey,
        HueTerm::White,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HueTerm::Blue => "blue",
            HueTerm::Brown => "brown",
            HueTerm::Green => "green",
            HueTerm::Orange => "orange",
            HueTerm::Pink => "pink",
            HueTerm::Purple => "purple",
            HueTerm::Red => "red",
            HueTerm::Yellow => "yellow",
            HueTerm::Black => "black",
            HueTerm::Grey => "grey",
            HueTerm::White => "white",
        }
    }

    /// Case-insensitive lookup; "gray" is accepted for grey.
    pub fn from_name(name: &str) -> Option<HueTerm> {
        let lower = name.trim();
        if lower.eq_ignore_ascii_case("gray") {
            return Some(HueTerm::Grey);
        }
        HueTerm::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(lower))
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for HueTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Half-open hue arc `[start, end)` in degrees. Wraps through 0° when
/// `start > end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HueArc {
    pub start: f64,
    pub end: f64,
}

impl HueArc {
    pub const fn new(start: f64, end: f64) -> Self {
        HueArc { start, end }
    }

    pub fn contains(&self, hue: f64) -> bool {
        if self.start <= self.end {
            hue >= self.start && hue < self.end
        } else {
            hue >= self.start || hue < self.end
        }
    }
}

/// Half-open interval `[min, max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub min: f64,
    pub max: f64,
}

impl Span {
    pub const fn new(min: f64, max: f64) -> Self {
        Span { min, max }
    }

    pub const fn at_least(min: f64) -> Self {
        Span { min, max: f64::INFINITY }
    }

    pub const fn below(max: f64) -> Self {
        Span { min: f64::NEG_INFINITY, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v < self.max
    }
}

/// Membership rule of one color term. Absent constraints match everything.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TermRule {
    pub hue: Option<HueArc>,
    pub lightness: Option<Span>,
    pub chroma: Option<Span>,
}

impl TermRule {
    pub fn matches(&self, c: &LabColor) -> bool {
        self.lightness.is_none_or(|s| s.contains(c.l))
            && self.chroma.is_none_or(|s| s.contains(c.chroma()))
            && self.hue.is_none_or(|h| h.contains(c.hue()))
    }
}

/// Term → LCH region table used by the hue filter.
///
/// The defaults are coarse bins; a color may belong to several terms (a
/// low-chroma green is also grey) or to none.
#[derive(Debug, Clone, PartialEq)]
pub struct HueTermTable {
    rules: [TermRule; 11],
}

impl Default for HueTermTable {
    fn default() -> Self {
        let hue = |s, e| Some(HueArc::new(s, e));
        let mut rules = [TermRule::default(); 11];
        rules[HueTerm::Red.index()].hue = hue(355.0, 20.0);
        rules[HueTerm::Orange.index()].hue = hue(20.0, 50.0);
        rules[HueTerm::Brown.index()] = TermRule {
            hue: hue(20.0, 50.0),
            lightness: Some(Span::new(20.0, 50.0)),
            chroma: None,
        };
        rules[HueTerm::Yellow.index()].hue = hue(50.0, 90.0);
        rules[HueTerm::Green.index()].hue = hue(90.0, 200.0);
        rules[HueTerm::Blue.index()].hue = hue(200.0, 280.0);
        rules[HueTerm::Purple.index()].hue = hue(280.0, 330.0);
        rules[HueTerm::Pink.index()] = TermRule {
            hue: hue(330.0, 355.0),
            lightness: Some(Span::at_least(65.0)),
            chroma: None,
        };
        rules[HueTerm::Black.index()] = TermRule {
            hue: None,
            lightness: Some(Span::below(20.0)),
            chroma: Some(Span::below(12.0)),
        };
        rules[HueTerm::White.index()] = TermRule {
            hue: None,
            lightness: Some(Span::at_least(92.0)),
            chroma: Some(Span::below(10.0)),
        };
        rules[HueTerm::Grey.index()] = TermRule {
            hue: None,
            lightness: Some(Span::new(20.0, 92.0)),
            chroma: Some(Span::below(12.0)),
        };
        HueTermTable { rules }
    }
}

impl HueTermTable {
    pub fn rule(&self, term: HueTerm) -> &TermRule {
        &self.rules[term.index()]
    }

    pub fn set_rule(&mut self, term: HueTerm, rule: TermRule) {
        self.rules[term.index()] = rule;
    }

    pub fn classify(&self, c: &LabColor) -> Vec<HueTerm> {
        HueTerm::ALL
            .into_iter()
            .filter(|t| self.rule(*t).matches(c))
            .collect()
    }
}

/// Hue band excluded within a lightness band. A color is rejected only when
/// both its hue and its lightness fall inside (closed intervals).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcludedBand {
    pub hue: (f64, f64),
    pub lightness: (f64, f64),
}

impl Default for ExcludedBand {
    fn default() -> Self {
        ExcludedBand {
            hue: (85.0, 114.0),
            lightness: (35.0, 75.0),
        }
    }
}

impl ExcludedBand {
    pub fn contains(&self, c: &LabColor) -> bool {
        let h = c.hue();
        (self.hue.0..=self.hue.1).contains(&h) && (self.lightness.0..=self.lightness.1).contains(&c.l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorFilter {
    /// Closed lightness interval candidates must fall into.
    pub lightness_range: (f64, f64),
    pub excluded_band: Option<ExcludedBand>,
    /// When set, a candidate must belong to at least one of these terms.
    pub allowed_terms: Option<Vec<HueTerm>>,
    pub term_table: HueTermTable,
}

impl Default for ColorFilter {
    fn default() -> Self {
        ColorFilter {
            lightness_range: (0.0, 100.0),
            excluded_band: Some(ExcludedBand::default()),
            allowed_terms: None,
            term_table: HueTermTable::default(),
        }
    }
}

impl ColorFilter {
    pub fn with_lightness(mut self, min: f64, max: f64) -> Self {
        self.lightness_range = (min, max);
        self
    }

    /// Restricts candidates to `terms`. An empty list or all eleven terms
    /// leave the filter unconstrained.
    pub fn with_terms(mut self, terms: &[HueTerm]) -> Self {
        let mut terms = terms.to_vec();
        terms.sort();
        terms.dedup();
        self.allowed_terms = if terms.is_empty() || terms.len() == HueTerm::ALL.len() {
            None
        } else {
            Some(terms)
        };
        self
    }

    /// Lightness range suited to `background`: dark backgrounds lift the
    /// minimum, light ones cap the maximum, keeping 25 units of contrast.
    pub fn lightness_for_background(background: &LabColor) -> (f64, f64) {
        let l = background.l;
        if l < 50.0 {
            (f64::max(35.0, l + 25.0), 95.0)
        } else {
            (15.0, f64::min(75.0, l - 25.0))
        }
    }

    /// Sets the lightness range from [`ColorFilter::lightness_for_background`].
    pub fn with_background_lightness(self, background: &LabColor) -> Self {
        let (lo, hi) = Self::lightness_for_background(background);
        self.with_lightness(lo, hi)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.lightness_range;
        if !(0.0..=100.0).contains(&lo) || !(0.0..=100.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidConfig(alloc::format!(
                "lightness range [{lo}, {hi}] must be an ordered interval within [0, 100]"
            )));
        }
        if matches!(&self.allowed_terms, Some(t) if t.is_empty()) {
            return Err(Error::InvalidConfig("allowed hue terms must not be empty".into()));
        }
        Ok(())
    }
}

/// True when `c` is an acceptable palette candidate under `f`.
pub fn passes_filter(c: &LabColor, f: &ColorFilter) -> bool {
    let (lo, hi) = f.lightness_range;
    if c.l < lo || c.l > hi {
        return false;
    }
    if f.excluded_band.is_some_and(|band| band.contains(c)) {
        return false;
    }
    match &f.allowed_terms {
        Some(terms) => terms.iter().any(|t| f.term_table.rule(*t).matches(c)),
        None => true,
    }
}

/// Draws a displayable color accepted by the filter.
///
/// Lightness is drawn uniformly from the filter's range and `a`, `b` from
/// `[-128, 128]`; the draw is snapped to the 8-bit sRGB grid before the filter
/// is checked.
pub fn sample_candidate<R: Rng + ?Sized>(f: &ColorFilter, rng: &mut R) -> Result<LabColor> {
    let (lo, hi) = f.lightness_range;
    for _ in 0..SAMPLE_ATTEMPTS {
        let l = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let a = rng.random_range(-128.0..=128.0);
        let b = rng.random_range(-128.0..=128.0);
        let c = LabColor::new(l, a, b);
        if !c.in_srgb_gamut() {
            continue;
        }
        let snapped = c.snap_to_srgb();
        if passes_filter(&snapped, f) {
            return Ok(snapped);
        }
    }
    Err(Error::FilterUnsatisfiable {
        attempts: SAMPLE_ATTEMPTS,
    })
}
