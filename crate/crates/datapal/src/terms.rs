//! Hue-term tables as TOML (or JSON) documents.
//!
//! ```toml
//! [green]
//! hue = [90.0, 200.0]      # half-open arc, wraps through 0 when start > end
//! lightness_min = 20.0     # every bound is optional
//! chroma_max = 12.0
//! ```
//!
//! Terms that are not mentioned keep their default rule.

use std::collections::BTreeMap;
use std::path::Path;

use datapal_core::filter::{HueArc, Span};
use datapal_core::{HueTerm, HueTermTable, TermRule};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable form of one [`TermRule`]; absent bounds are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hue: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lightness_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lightness_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chroma_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chroma_max: Option<f64>,
}

fn span(min: Option<f64>, max: Option<f64>) -> Option<Span> {
    if min.is_none() && max.is_none() {
        return None;
    }
    Some(Span::new(min.unwrap_or(f64::NEG_INFINITY), max.unwrap_or(f64::INFINITY)))
}

fn bound(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl RuleSpec {
    pub fn from_rule(rule: &TermRule) -> Self {
        RuleSpec {
            hue: rule.hue.map(|h| [h.start, h.end]),
            lightness_min: rule.lightness.and_then(|s| bound(s.min)),
            lightness_max: rule.lightness.and_then(|s| bound(s.max)),
            chroma_min: rule.chroma.and_then(|s| bound(s.min)),
            chroma_max: rule.chroma.and_then(|s| bound(s.max)),
        }
    }

    pub fn to_rule(&self, term: &str) -> Result<TermRule> {
        if let Some([s, e]) = self.hue {
            if !((0.0..=360.0).contains(&s) && (0.0..=360.0).contains(&e)) {
                return Err(Error::field(format!("{term}.hue"), "angles must lie in [0, 360]"));
            }
        }
        for (name, min, max) in [
            ("lightness", self.lightness_min, self.lightness_max),
            ("chroma", self.chroma_min, self.chroma_max),
        ] {
            if let (Some(lo), Some(hi)) = (min, max) {
                if lo >= hi {
                    return Err(Error::field(format!("{term}.{name}"), format!("empty range [{lo}, {hi})")));
                }
            }
        }
        Ok(TermRule {
            hue: self.hue.map(|[s, e]| HueArc::new(s, e)),
            lightness: span(self.lightness_min, self.lightness_max),
            chroma: span(self.chroma_min, self.chroma_max),
        })
    }
}

/// The table keyed by term name.
pub fn table_to_specs(table: &HueTermTable) -> BTreeMap<&'static str, RuleSpec> {
    HueTerm::ALL
        .into_iter()
        .map(|t| (t.name(), RuleSpec::from_rule(table.rule(t))))
        .collect()
}

/// Applies overrides on top of the default table.
pub fn table_from_specs(specs: &BTreeMap<String, RuleSpec>) -> Result<HueTermTable> {
    let mut table = HueTermTable::default();
    for (name, spec) in specs {
        let term = HueTerm::from_name(name)
            .ok_or_else(|| Error::field(name.clone(), "not one of the 11 basic color terms"))?;
        table.set_rule(term, spec.to_rule(name)?);
    }
    Ok(table)
}

pub fn parse_term_table(text: &str) -> Result<HueTermTable> {
    let specs: BTreeMap<String, RuleSpec> = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| {
                let before = &text[..s.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (line, column)
            })
            .unwrap_or((0, 0));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    table_from_specs(&specs)
}

pub fn load_term_table(path: impl AsRef<Path>) -> Result<HueTermTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_term_table(&text)
}
