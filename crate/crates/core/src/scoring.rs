//! The palette objective and its three terms.
//!
//! ```text
//! E(P) = w0 * E_PD / pd_norm + w1 * nd_factor * E_ND + w2 * cd_factor * E_CD
//! ```
//!
//! Point distinctness only depends on the data through per-class-pair weights,
//! so the point set is folded into a [`ClassPairWeights`] matrix once and each
//! evaluation afterwards costs `O(m^2)` color differences.

use alloc::vec;
use alloc::vec::Vec;

use crate::color::{ciede2000, LabColor};
use crate::error::{Error, Result};
use crate::graph::{LabeledPointSet, NeighborGraph};
use crate::names::{palette_name_difference, NameCountMatrix};

/// Class colors `c_1..c_m` plus the background `c_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    colors: Vec<LabColor>,
    background: LabColor,
    locked: Vec<bool>,
}

impl Palette {
    /// A palette with every color unlocked.
    pub fn new(colors: Vec<LabColor>, background: LabColor) -> Self {
        let locked = vec![false; colors.len()];
        Palette {
            colors,
            background,
            locked,
        }
    }

    pub fn with_locks(colors: Vec<LabColor>, background: LabColor, locked: Vec<bool>) -> Result<Self> {
        if locked.len() != colors.len() {
            return Err(Error::SizeMismatch {
                expected: colors.len(),
                found: locked.len(),
            });
        }
        Ok(Palette {
            colors,
            background,
            locked,
        })
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn colors(&self) -> &[LabColor] {
        &self.colors
    }

    pub fn color(&self, i: usize) -> LabColor {
        self.colors[i]
    }

    pub fn background(&self) -> LabColor {
        self.background
    }

    pub fn locked(&self) -> &[bool] {
        &self.locked
    }

    pub fn is_locked(&self, i: usize) -> bool {
        self.locked[i]
    }

    pub fn set_locked(&mut self, i: usize, locked: bool) {
        self.locked[i] = locked;
    }

    pub fn unlocked_indices(&self) -> Vec<usize> {
        (0..self.colors.len()).filter(|&i| !self.locked[i]).collect()
    }

    /// Background followed by the class colors.
    pub fn with_background(&self) -> impl Iterator<Item = LabColor> + '_ {
        core::iter::once(self.background).chain(self.colors.iter().copied())
    }

    pub(crate) fn colors_mut(&mut self) -> &mut [LabColor] {
        &mut self.colors
    }
}

/// `w[j][k]`: summed `1/d` weights of class-`k` neighbors seen from points of
/// class `j`, each point's contribution divided by its neighbor count.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPairWeights {
    m: usize,
    w: Vec<f64>,
}

impl ClassPairWeights {
    pub fn from_matrix(m: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != m * m {
            return Err(Error::SizeMismatch {
                expected: m * m,
                found: w.len(),
            });
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation("pair weights must be finite and non-negative".into()));
        }
        Ok(ClassPairWeights { m, w })
    }

    pub fn class_count(&self) -> usize {
        self.m
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.w[j * self.m + k]
    }

    /// `w[j][k] + w[k][j]` for `j < k`, row-major over the upper triangle.
    pub fn symmetric_upper(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m * self.m.saturating_sub(1) / 2);
        for j in 0..self.m {
            for k in j + 1..self.m {
                out.push(self.get(j, k) + self.get(k, j));
            }
        }
        out
    }
}

/// Distance weight of a neighbor `d` pixels away.
pub fn distance_weight(d: f64) -> f64 {
    1.0 / d
}

/// Folds a labeled point set and its neighbor graph into class-pair weights.
pub fn precompute_pair_weights(ps: &LabeledPointSet, graph: &NeighborGraph) -> Result<ClassPairWeights> {
    if graph.len() != ps.len() {
        return Err(Error::SizeMismatch {
            expected: ps.len(),
            found: graph.len(),
        });
    }
    let m = ps.class_count();
    let labels = ps.labels();
    let mut w = vec![0.0; m * m];
    for (i, &class) in labels.iter().enumerate() {
        let neighbors = graph.neighbors(i);
        if neighbors.is_empty() {
            continue;
        }
        let share = 1.0 / neighbors.len() as f64;
        for nb in neighbors {
            w[class * m + labels[nb.index]] += share * distance_weight(nb.distance);
        }
    }
    ClassPairWeights::from_matrix(m, w)
}

/// `E_PD = sum_{j,k} w[j][k] * dE(c_j, c_k)`.
pub fn point_distinctness(w: &ClassPairWeights, p: &Palette) -> Result<f64> {
    if p.len() != w.class_count() {
        return Err(Error::SizeMismatch {
            expected: w.class_count(),
            found: p.len(),
        });
    }
    let colors = p.colors();
    let mut sum = 0.0;
    for j in 0..colors.len() {
        for k in j + 1..colors.len() {
            let pair = w.get(j, k) + w.get(k, j);
            if pair != 0.0 {
                sum += pair * ciede2000(colors[j], colors[k]);
            }
        }
    }
    Ok(sum)
}

/// Smallest CIEDE2000 distance among the class colors and the background.
pub fn color_discrimination(p: &Palette) -> f64 {
    let all: Vec<LabColor> = p.with_background().collect();
    let mut min = f64::INFINITY;
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            min = min.min(ciede2000(all[i], all[j]));
        }
    }
    if min.is_finite() {
        min
    } else {
        0.0
    }
}

/// Term weights and the internal balancing constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    /// Weights of point distinctness, name difference and color
    /// discrimination, each in `[0, 1]`.
    pub omega: [f64; 3],
    pub nd_factor: f64,
    pub cd_factor: f64,
    /// Divisor applied to the raw point distinctness.
    pub pd_norm: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            omega: [1.0, 1.0, 1.0],
            nd_factor: 2.0,
            cd_factor: 0.1,
            pd_norm: 1.0,
        }
    }
}

impl ScoreWeights {
    pub fn with_omega(omega: [f64; 3]) -> Self {
        ScoreWeights {
            omega,
            ..ScoreWeights::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidConfig(alloc::format!(
                "term weights must lie in [0, 1], got {:?}",
                self.omega
            )));
        }
        if !(self.nd_factor > 0.0 && self.cd_factor > 0.0 && self.pd_norm > 0.0)
            || !(self.nd_factor.is_finite() && self.cd_factor.is_finite() && self.pd_norm.is_finite())
        {
            return Err(Error::InvalidConfig(
                "nd_factor, cd_factor and pd_norm must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Combines raw term values into the objective.
    pub fn combine(&self, pd_raw: f64, nd: f64, cd: f64) -> EnergyBreakdown {
        let pd_normalized = pd_raw / self.pd_norm;
        let total = self.omega[0] * pd_normalized
            + self.omega[1] * self.nd_factor * nd
            + self.omega[2] * self.cd_factor * cd;
        EnergyBreakdown {
            pd_raw,
            pd_normalized,
            nd,
            cd,
            total,
        }
    }
}

/// The three terms of a scored palette and their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub pd_raw: f64,
    pub pd_normalized: f64,
    pub nd: f64,
    pub cd: f64,
    pub total: f64,
}

/// Scores every term. Palettes with a single class color have no color pairs;
/// their name difference is reported as 0.
pub fn energy_breakdown(
    w: &ClassPairWeights,
    nm: &NameCountMatrix,
    p: &Palette,
    sw: &ScoreWeights,
) -> Result<EnergyBreakdown> {
    let pd = point_distinctness(w, p)?;
    let nd = if p.len() < 2 {
        0.0
    } else {
        palette_name_difference(nm, p)?
    };
    let cd = color_discrimination(p);
    Ok(sw.combine(pd, nd, cd))
}

pub fn total_energy(
    w: &ClassPairWeights,
    nm: &NameCountMatrix,
    p: &Palette,
    sw: &ScoreWeights,
) -> Result<f64> {
    energy_breakdown(w, nm, p, sw).map(|e| e.total)
}
