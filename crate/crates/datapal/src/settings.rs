//! Run configuration.
//!
//! [`RunSettings`] is the loose, serializable form shared by CLI flags and
//! HTTP requests (every field optional); [`RunSettings::resolve`] validates it
//! into a [`RunConfig`].

use std::time::Duration;

use datapal_core::{AnnealConfig, ColorFilter, HueTerm, HueTermTable, RgbColor, ScoreWeights};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default line resampling step in pixels.
pub const DEFAULT_SPACING: f64 = 10.0;

/// Neighbor graph for scatter points and line samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphSettings {
    /// Alpha-shape graph; `None` picks the radius from the data.
    Alpha { radius: Option<f64> },
    Knn { k: usize },
}

impl Default for GraphSettings {
    fn default() -> Self {
        GraphSettings::Alpha { radius: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub score: ScoreWeights,
    pub background: RgbColor,
    pub filter: ColorFilter,
    pub graph: GraphSettings,
    pub spacing: f64,
    pub anneal: AnnealConfig,
    /// Independent seeded runs; the best one wins.
    pub restarts: usize,
    /// Per-class fixed colors; empty when nothing is locked.
    pub locked: Vec<Option<RgbColor>>,
    /// Stop annealing after this long and keep the best palette so far.
    pub time_budget: Option<Duration>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            score: ScoreWeights::default(),
            background: RgbColor::WHITE,
            filter: ColorFilter::default(),
            graph: GraphSettings::default(),
            spacing: DEFAULT_SPACING,
            anneal: AnnealConfig::default(),
            restarts: 1,
            locked: Vec::new(),
            time_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    /// Weights of point distinctness, name difference, color discrimination.
    pub weights: Option<[f64; 3]>,
    /// Background as `#RRGGBB`.
    pub background: Option<String>,
    /// Allowed basic color terms; empty means any hue.
    pub hue_terms: Vec<String>,
    /// Closed lightness interval `[min, max]`.
    pub lightness: Option<[f64; 2]>,
    /// Derive the lightness interval from the background color.
    pub auto_lightness: bool,
    pub alpha: Option<f64>,
    pub knn: Option<usize>,
    pub spacing: Option<f64>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    /// One entry per class: `#RRGGBB` to lock that class, `null` otherwise.
    pub locked: Vec<Option<String>>,
    pub tau: Option<f64>,
    pub cooling: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub proposals_per_temperature: Option<usize>,
}

pub(crate) fn parse_hex(field: &str, hex: &str) -> Result<RgbColor> {
    RgbColor::from_hex(hex).map_err(|_| Error::field(field, format!("expected #RRGGBB, got {hex:?}")))
}

impl RunSettings {
    pub fn resolve(&self, terms: &HueTermTable) -> Result<RunConfig> {
        let defaults = RunConfig::default();
        let score = ScoreWeights::with_omega(self.weights.unwrap_or(defaults.score.omega));
        if score.omega.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::field("weights", "each weight must lie in [0, 1]"));
        }
        let background = match &self.background {
            Some(hex) => parse_hex("background", hex)?,
            None => defaults.background,
        };

        let mut filter = ColorFilter {
            term_table: terms.clone(),
            ..ColorFilter::default()
        };
        if self.auto_lightness && self.lightness.is_some() {
            return Err(Error::field("lightness", "cannot be combined with auto_lightness"));
        }
        if self.auto_lightness {
            filter = filter.with_background_lightness(&datapal_core::srgb_to_lab(background));
        }
        if let Some([lo, hi]) = self.lightness {
            filter = filter.with_lightness(lo, hi);
        }
        let mut hue_terms = Vec::with_capacity(self.hue_terms.len());
        for name in &self.hue_terms {
            hue_terms.push(
                HueTerm::from_name(name)
                    .ok_or_else(|| Error::field("hue_terms", format!("{name:?} is not a basic color term")))?,
            );
        }
        filter = filter.with_terms(&hue_terms);
        filter.validate().map_err(|e| Error::field("lightness", e.to_string()))?;

        let graph = match (self.alpha, self.knn) {
            (Some(_), Some(_)) => return Err(Error::field("graph", "choose either alpha or knn")),
            (Some(r), None) if !(r > 0.0) => return Err(Error::field("alpha", "radius must be positive")),
            (Some(r), None) => GraphSettings::Alpha { radius: Some(r) },
            (None, Some(0)) => return Err(Error::field("knn", "k must be at least 1")),
            (None, Some(k)) => GraphSettings::Knn { k },
            (None, None) => GraphSettings::default(),
        };
        let spacing = self.spacing.unwrap_or(DEFAULT_SPACING);
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::field("spacing", "must be positive"));
        }

        let d = &defaults.anneal;
        let anneal = AnnealConfig {
            seed: self.seed.unwrap_or(d.seed),
            tau: self.tau.unwrap_or(d.tau),
            cooling: self.cooling.unwrap_or(d.cooling),
            t_start: self.t_start.unwrap_or(d.t_start),
            t_end: self.t_end.unwrap_or(d.t_end),
            proposals_per_temperature: self.proposals_per_temperature.or(d.proposals_per_temperature),
            ..d.clone()
        };
        anneal.validate().map_err(|e| Error::field("anneal", e.to_string()))?;

        let restarts = self.restarts.unwrap_or(1);
        if restarts == 0 {
            return Err(Error::field("restarts", "must be at least 1"));
        }
        let locked = self
            .locked
            .iter()
            .enumerate()
            .map(|(i, hex)| hex.as_deref().map(|h| parse_hex(&format!("locked[{i}]"), h)).transpose())
            .collect::<Result<Vec<_>>>()?;

        Ok(RunConfig {
            score,
            background,
            filter,
            graph,
            spacing,
            anneal,
            restarts,
            locked,
            time_budget: None,
        })
    }
}
