//! Simulated annealing over palettes.
//!
//! Each iteration draws a neighbor of the current palette (recolor one class
//! by a small LAB offset, or swap two class colors), repairs any pair closer
//! than `tau`, scores it and accepts it with the Metropolis rule for
//! maximization. The best palette seen is kept. Temperatures fall
//! geometrically from `t_start` to `t_end`, with `proposals_per_temperature`
//! iterations at each level.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::color::{ciede2000, LabColor};
use crate::error::{Error, Result};
use crate::filter::{passes_filter, sample_candidate, ColorFilter};
use crate::names::NameCountMatrix;
use crate::scoring::{energy_breakdown, ClassPairWeights, EnergyBreakdown, Palette, ScoreWeights};

/// Offset draws tried before a recolor falls back to a fresh sample.
const PERTURB_ATTEMPTS: usize = 64;

/// Samples tried per slot when building the initial palette.
const INIT_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealConfig {
    /// Geometric cooling factor, in `(0, 1)`.
    pub cooling: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Minimum CIEDE2000 distance between any two palette colors, background
    /// included.
    pub tau: f64,
    /// Iterations per temperature level; the class count when `None`.
    pub proposals_per_temperature: Option<usize>,
    /// Recolor moves add a uniform offset in `[-r, r]` to each LAB channel.
    pub perturb_range: f64,
    pub swap_probability: f64,
    pub refine_max_attempts: usize,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            cooling: 0.99,
            t_start: 100_000.0,
            t_end: 0.001,
            tau: 10.0,
            proposals_per_temperature: None,
            perturb_range: 5.0,
            swap_probability: 0.3,
            refine_max_attempts: 1000,
            seed: 7,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return fail(alloc::format!("cooling must lie in (0, 1), got {}", self.cooling));
        }
        if !(self.t_end > 0.0 && self.t_end < self.t_start && self.t_start.is_finite()) {
            return fail(alloc::format!(
                "temperatures must satisfy 0 < t_end < t_start, got {} and {}",
                self.t_end,
                self.t_start
            ));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return fail(alloc::format!("tau must be positive, got {}", self.tau));
        }
        if !(self.perturb_range > 0.0 && self.perturb_range.is_finite()) {
            return fail(alloc::format!("perturb range must be positive, got {}", self.perturb_range));
        }
        if !(0.0..=1.0).contains(&self.swap_probability) {
            return fail(alloc::format!("swap probability must lie in [0, 1], got {}", self.swap_probability));
        }
        if self.refine_max_attempts == 0 || self.proposals_per_temperature == Some(0) {
            return fail("refine_max_attempts and proposals_per_temperature must be positive".into());
        }
        Ok(())
    }

    /// Number of temperature levels, `ceil(ln(t_end / t_start) / ln(cooling))`.
    pub fn temperature_steps(&self) -> usize {
        libm::ceil(libm::log(self.t_end / self.t_start) / libm::log(self.cooling)) as usize
    }

    pub fn proposals(&self, classes: usize) -> usize {
        self.proposals_per_temperature.unwrap_or(classes).max(1)
    }
}

/// Where the search starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// Random colors, except for the slots holding `Some(color)`, which stay
    /// fixed. An empty list means nothing is locked.
    Random { locked: Vec<Option<LabColor>> },
    /// A given palette; its lock flags are honored.
    Palette(Palette),
}

impl Start {
    pub fn random() -> Self {
        Start::Random { locked: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub current_energy: f64,
    pub best_energy: f64,
}

/// Snapshot passed to an [`Observer`] after each temperature level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub step: usize,
    pub total_steps: usize,
    pub iteration: usize,
    pub temperature: f64,
    pub current_energy: f64,
    pub best_energy: f64,
}

/// Receives progress on the optimizing thread; returning `Break` stops the
/// run early with the best palette found so far.
pub trait Observer {
    fn observe(&mut self, progress: &Progress) -> ControlFlow<()>;
}

impl<F: FnMut(&Progress) -> ControlFlow<()>> Observer for F {
    fn observe(&mut self, progress: &Progress) -> ControlFlow<()> {
        self(progress)
    }
}

/// Observer that never interrupts.
pub struct Unobserved;

impl Observer for Unobserved {
    fn observe(&mut self, _: &Progress) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    pub best_palette: Palette,
    pub best_energy: f64,
    pub breakdown: EnergyBreakdown,
    /// The score weights used, with `pd_norm` bound for this run.
    pub weights: ScoreWeights,
    pub trace: Vec<TracePoint>,
    pub iterations: usize,
    pub temperature_steps: usize,
    /// Seconds; left at 0 here, filled in by callers with a clock.
    pub wall_time: f64,
    /// Set when an observer stopped the run early.
    pub truncated: bool,
}

/// Metropolis acceptance for maximization: always take improvements, take a
/// loss `d` with probability `exp(-d / temperature)`.
pub fn accept<R: Rng + ?Sized>(e_new: f64, e_old: f64, temperature: f64, rng: &mut R) -> bool {
    if e_new >= e_old {
        return true;
    }
    let p = libm::exp((e_new - e_old) / temperature);
    rng.random::<f64>() < p
}

/// Random displayable, filter-passing color near `c`.
fn perturb<R: Rng + ?Sized>(c: LabColor, range: f64, f: &ColorFilter, rng: &mut R) -> Result<LabColor> {
    for _ in 0..PERTURB_ATTEMPTS {
        let moved = LabColor::new(
            c.l + rng.random_range(-range..=range),
            c.a + rng.random_range(-range..=range),
            c.b + rng.random_range(-range..=range),
        );
        if !moved.in_srgb_gamut() {
            continue;
        }
        let snapped = moved.snap_to_srgb();
        if passes_filter(&snapped, f) {
            return Ok(snapped);
        }
    }
    sample_candidate(f, rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    Swap(usize, usize),
    Recolor(usize, LabColor),
}

fn draw_move<R: Rng + ?Sized>(
    p: &Palette,
    cfg: &AnnealConfig,
    f: &ColorFilter,
    rng: &mut R,
) -> Result<Move> {
    let unlocked = p.unlocked_indices();
    if unlocked.is_empty() {
        return Err(Error::AllLocked);
    }
    if unlocked.len() >= 2 && rng.random::<f64>() < cfg.swap_probability {
        let i = rng.random_range(0..unlocked.len());
        let mut j = rng.random_range(0..unlocked.len() - 1);
        if j >= i {
            j += 1;
        }
        return Ok(Move::Swap(unlocked[i], unlocked[j]));
    }
    let i = unlocked[rng.random_range(0..unlocked.len())];
    Ok(Move::Recolor(i, perturb(p.color(i), cfg.perturb_range, f, rng)?))
}

/// A neighbor of `p`: swaps two unlocked colors with probability
/// `swap_probability`, otherwise moves one unlocked color by a random offset.
/// Locked colors and the background never change.
pub fn propose<R: Rng + ?Sized>(
    p: &Palette,
    cfg: &AnnealConfig,
    f: &ColorFilter,
    rng: &mut R,
) -> Result<Palette> {
    let mut q = p.clone();
    match draw_move(p, cfg, f, rng)? {
        Move::Swap(i, j) => q.colors_mut().swap(i, j),
        Move::Recolor(i, c) => q.colors_mut()[i] = c,
    }
    Ok(q)
}

/// Palette with a cached matrix of pairwise CIEDE2000 distances. Index 0 is
/// the background, index `i + 1` the class color `i`.
#[derive(Debug, Clone)]
struct Distances {
    palette: Palette,
    d: Vec<f64>,
    size: usize,
}

impl Distances {
    fn new(palette: Palette) -> Self {
        let size = palette.len() + 1;
        let mut s = Distances {
            palette,
            d: vec![0.0; size * size],
            size,
        };
        for i in 0..size {
            s.refresh(i);
        }
        s
    }

    fn color_at(&self, slot: usize) -> LabColor {
        if slot == 0 {
            self.palette.background()
        } else {
            self.palette.color(slot - 1)
        }
    }

    fn refresh(&mut self, slot: usize) {
        let c = self.color_at(slot);
        for other in 0..self.size {
            let v = if other == slot { 0.0 } else { ciede2000(c, self.color_at(other)) };
            self.d[slot * self.size + other] = v;
            self.d[other * self.size + slot] = v;
        }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.size + j]
    }

    fn set_color(&mut self, class: usize, c: LabColor) {
        self.palette.colors_mut()[class] = c;
        self.refresh(class + 1);
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.palette.colors_mut().swap(a, b);
        swap_slots(&mut self.d, self.size, a + 1, b + 1);
    }

    fn min_distance(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.size {
            for j in i + 1..self.size {
                min = min.min(self.get(i, j));
            }
        }
        if min.is_finite() {
            min
        } else {
            0.0
        }
    }

    /// Unlocked classes that take part in a pair closer than `tau`.
    fn violators(&self, tau: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for i in 0..self.size {
            for j in i + 1..self.size {
                if self.get(i, j) >= tau {
                    continue;
                }
                let movable = |slot: usize| slot > 0 && !self.palette.is_locked(slot - 1);
                match (movable(i), movable(j)) {
                    (false, false) => {
                        let name = |slot: usize| {
                            if slot == 0 {
                                String::from("the background")
                            } else {
                                alloc::format!("locked color {}", slot - 1)
                            }
                        };
                        return Err(Error::RefinementFailed {
                            reason: alloc::format!(
                                "{} and {} are {:.3} apart, below tau = {tau}",
                                name(i),
                                name(j),
                                self.get(i, j)
                            ),
                        });
                    }
                    (mi, mj) => {
                        if mi {
                            out.push(i - 1);
                        }
                        if mj {
                            out.push(j - 1);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

fn swap_slots(d: &mut [f64], size: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    for k in 0..size {
        d.swap(a * size + k, b * size + k);
    }
    for k in 0..size {
        d.swap(k * size + a, k * size + b);
    }
}

/// Perturbs unlocked members of too-close pairs until every pair is at least
/// `tau` apart. Returns the classes that were recolored.
fn refine_distances<R: Rng + ?Sized>(
    s: &mut Distances,
    tau: f64,
    f: &ColorFilter,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut touched = Vec::new();
    for _ in 0..cfg.refine_max_attempts {
        let violators = s.violators(tau)?;
        if violators.is_empty() {
            touched.sort_unstable();
            touched.dedup();
            return Ok(touched);
        }
        for class in violators {
            let c = perturb(s.palette.color(class), cfg.perturb_range, f, rng)?;
            s.set_color(class, c);
            touched.push(class);
        }
    }
    if s.violators(tau)?.is_empty() {
        touched.sort_unstable();
        touched.dedup();
        return Ok(touched);
    }
    Err(Error::RefinementFailed {
        reason: alloc::format!(
            "no palette with all pairs >= {tau} found after {} attempts (closest pair {:.3})",
            cfg.refine_max_attempts,
            s.min_distance()
        ),
    })
}

/// Repairs `p` so every pair of colors, background included, is at least
/// `tau` apart. Only unlocked colors in offending pairs are moved.
pub fn refine<R: Rng + ?Sized>(
    p: &Palette,
    tau: f64,
    f: &ColorFilter,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> Result<Palette> {
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!("tau must be positive, got {tau}")));
    }
    let mut s = Distances::new(p.clone());
    refine_distances(&mut s, tau, f, cfg, rng)?;
    Ok(s.palette)
}

/// Search state: distances plus cached name lookups and pair weights.
#[derive(Debug, Clone)]
struct SearchState {
    dist: Distances,
    bins: Vec<usize>,
    nd: Vec<f64>,
}

struct Objective<'a> {
    pair: Vec<f64>,
    names: &'a NameCountMatrix,
    weights: ScoreWeights,
    m: usize,
}

impl Objective<'_> {
    fn state(&self, palette: Palette) -> SearchState {
        let bins: Vec<usize> = palette.colors().iter().map(|c| self.names.nearest_bin(c)).collect();
        let mut s = SearchState {
            dist: Distances::new(palette),
            bins,
            nd: vec![0.0; self.m * self.m],
        };
        for i in 0..self.m {
            self.refresh_names(&mut s, i);
        }
        s
    }

    fn refresh_names(&self, s: &mut SearchState, class: usize) {
        s.bins[class] = self.names.nearest_bin(&s.dist.palette.color(class));
        for other in 0..self.m {
            let v = self.names.bin_difference(s.bins[class], s.bins[other]);
            s.nd[class * self.m + other] = v;
            s.nd[other * self.m + class] = v;
        }
    }

    fn recolor(&self, s: &mut SearchState, class: usize, c: LabColor) {
        s.dist.set_color(class, c);
        self.refresh_names(s, class);
    }

    fn swap(&self, s: &mut SearchState, a: usize, b: usize) {
        s.dist.swap(a, b);
        s.bins.swap(a, b);
        swap_slots(&mut s.nd, self.m, a, b);
    }

    fn raw_terms(&self, s: &SearchState) -> (f64, f64, f64) {
        let m = self.m;
        let mut pd = 0.0;
        let mut nd = 0.0;
        for j in 0..m {
            for k in j + 1..m {
                pd += self.pair[j * m + k] * s.dist.get(j + 1, k + 1);
                nd += s.nd[j * m + k];
            }
        }
        if m >= 2 {
            nd /= (m * (m - 1) / 2) as f64;
        }
        (pd, nd, s.dist.min_distance())
    }

    fn energy(&self, s: &SearchState) -> f64 {
        let (pd, nd, cd) = self.raw_terms(s);
        self.weights.combine(pd, nd, cd).total
    }
}

fn initial_palette<R: Rng + ?Sized>(
    m: usize,
    start: &Start,
    background: LabColor,
    f: &ColorFilter,
    tau: f64,
    rng: &mut R,
) -> Result<Palette> {
    match start {
        Start::Palette(p) => {
            if p.len() != m {
                return Err(Error::SizeMismatch {
                    expected: m,
                    found: p.len(),
                });
            }
            let mut colors = Vec::with_capacity(m);
            for (i, &c) in p.colors().iter().enumerate() {
                if p.is_locked(i) {
                    colors.push(c);
                } else {
                    let snapped = c.snap_to_srgb();
                    colors.push(if passes_filter(&snapped, f) {
                        snapped
                    } else {
                        sample_candidate(f, rng)?
                    });
                }
            }
            Palette::with_locks(colors, p.background(), p.locked().to_vec())
        }
        Start::Random { locked } => {
            if !locked.is_empty() && locked.len() != m {
                return Err(Error::SizeMismatch {
                    expected: m,
                    found: locked.len(),
                });
            }
            let fixed = |i: usize| locked.get(i).copied().flatten();
            let mut placed: Vec<LabColor> = core::iter::once(background)
                .chain((0..m).filter_map(fixed))
                .collect();
            let mut colors = Vec::with_capacity(m);
            for i in 0..m {
                if let Some(c) = fixed(i) {
                    colors.push(c);
                    continue;
                }
                let mut best: Option<(f64, LabColor)> = None;
                for _ in 0..INIT_ATTEMPTS {
                    let c = sample_candidate(f, rng)?;
                    let gap = placed.iter().map(|&q| ciede2000(c, q)).fold(f64::INFINITY, f64::min);
                    if best.is_none_or(|(g, _)| gap > g) {
                        best = Some((gap, c));
                    }
                    if gap >= tau {
                        break;
                    }
                }
                let (_, c) = best.ok_or(Error::FilterUnsatisfiable { attempts: 0 })?;
                placed.push(c);
                colors.push(c);
            }
            let flags = (0..m).map(|i| fixed(i).is_some()).collect();
            Palette::with_locks(colors, background, flags)
        }
    }
}

/// Runs the annealing search.
///
/// `weights` fixes the class count. The point-distinctness normalizer of
/// `score` is replaced by the raw point distinctness of the initial palette
/// (1 when that is zero).
#[allow(clippy::too_many_arguments)]
pub fn optimize<O: Observer + ?Sized>(
    weights: &ClassPairWeights,
    names: &NameCountMatrix,
    score: ScoreWeights,
    cfg: &AnnealConfig,
    filter: &ColorFilter,
    background: LabColor,
    start: &Start,
    observer: &mut O,
) -> Result<AnnealResult> {
    cfg.validate()?;
    filter.validate()?;
    score.validate()?;
    if score.omega.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidConfig("all term weights are zero".into()));
    }
    let m = weights.class_count();
    if m == 0 {
        return Err(Error::InvalidConfig("at least one class is required".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p0 = initial_palette(m, start, background, filter, cfg.tau, &mut rng)?;
    let mut dist0 = Distances::new(p0);
    refine_distances(&mut dist0, cfg.tau, filter, cfg, &mut rng)?;
    let p0 = dist0.palette;

    let mut pair = vec![0.0; m * m];
    for j in 0..m {
        for k in 0..m {
            if j != k {
                pair[j * m + k] = weights.get(j, k) + weights.get(k, j);
            }
        }
    }
    let mut objective = Objective {
        pair,
        names,
        weights: score,
        m,
    };
    let mut current = objective.state(p0);
    let (pd0, _, _) = objective.raw_terms(&current);
    objective.weights.pd_norm = if pd0 > 0.0 { pd0 } else { 1.0 };

    let mut current_energy = objective.energy(&current);
    let mut best = current.dist.palette.clone();
    let mut best_energy = current_energy;
    let steps = cfg.temperature_steps();
    let proposals = cfg.proposals(m);
    let searchable = !current.dist.palette.unlocked_indices().is_empty();

    let mut trace = Vec::with_capacity(if searchable { steps * proposals + 1 } else { 1 });
    trace.push(TracePoint {
        iteration: 0,
        current_energy,
        best_energy,
    });

    let mut iteration = 0;
    let mut executed_steps = 0;
    let mut truncated = false;
    let mut temperature = cfg.t_start;
    if searchable {
        for step in 0..steps {
            for _ in 0..proposals {
                iteration += 1;
                let mut candidate = current.clone();
                match draw_move(&candidate.dist.palette, cfg, filter, &mut rng)? {
                    Move::Swap(a, b) => objective.swap(&mut candidate, a, b),
                    Move::Recolor(i, c) => objective.recolor(&mut candidate, i, c),
                }
                // an unrepairable candidate is rejected; the current palette
                // is feasible already
                let repaired = match refine_distances(&mut candidate.dist, cfg.tau, filter, cfg, &mut rng) {
                    Ok(touched) => {
                        for class in touched {
                            objective.refresh_names(&mut candidate, class);
                        }
                        true
                    }
                    Err(Error::RefinementFailed { .. }) => false,
                    Err(e) => return Err(e),
                };
                if repaired {
                    let energy = objective.energy(&candidate);
                    if accept(energy, current_energy, temperature, &mut rng) {
                        current = candidate;
                        current_energy = energy;
                        if current_energy > best_energy {
                            best_energy = current_energy;
                            best = current.dist.palette.clone();
                        }
                    }
                }
                trace.push(TracePoint {
                    iteration,
                    current_energy,
                    best_energy,
                });
            }
            executed_steps = step + 1;
            let progress = Progress {
                step: executed_steps,
                total_steps: steps,
                iteration,
                temperature,
                current_energy,
                best_energy,
            };
            temperature *= cfg.cooling;
            if observer.observe(&progress).is_break() {
                truncated = executed_steps < steps;
                break;
            }
        }
    }

    let breakdown = energy_breakdown(weights, names, &best, &objective.weights)?;
    Ok(AnnealResult {
        best_palette: best,
        best_energy,
        breakdown,
        weights: objective.weights,
        trace,
        iterations: iteration,
        temperature_steps: executed_steps,
        wall_time: 0.0,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::{srgb_to_lab, RgbColor};
    use crate::graph::{default_alpha_shape_graph, LabeledPointSet, Point};
    use crate::scoring::{color_discrimination, precompute_pair_weights, total_energy};

    fn white() -> LabColor {
        srgb_to_lab(RgbColor::WHITE)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn sample_palette(m: usize, seed: u64) -> Palette {
        let f = ColorFilter::default();
        let mut r = rng(seed);
        let colors = (0..m).map(|_| sample_candidate(&f, &mut r).unwrap()).collect();
        Palette::new(colors, white())
    }

    fn dataset(m: usize, seed: u64) -> LabeledPointSet {
        let mut r = rng(seed);
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for class in 0..m {
            let (cx, cy) = (r.random_range(40.0..360.0), r.random_range(40.0..360.0));
            for _ in 0..15 {
                points.push(Point::new(cx + r.random_range(-30.0..30.0), cy + r.random_range(-30.0..30.0)));
                labels.push(class);
            }
        }
        LabeledPointSet::new(points, labels, m).unwrap()
    }

    fn quick_config(seed: u64) -> AnnealConfig {
        AnnealConfig {
            t_start: 10.0,
            cooling: 0.95,
            seed,
            ..AnnealConfig::default()
        }
    }

    #[test]
    fn default_step_count() {
        assert_eq!(AnnealConfig::default().temperature_steps(), 1833);
    }

    #[test]
    fn config_validation() {
        assert!(AnnealConfig::default().validate().is_ok());
        for cfg in [
            AnnealConfig { cooling: 1.0, ..AnnealConfig::default() },
            AnnealConfig { t_end: 1e6, ..AnnealConfig::default() },
            AnnealConfig { tau: 0.0, ..AnnealConfig::default() },
            AnnealConfig { swap_probability: 1.5, ..AnnealConfig::default() },
            AnnealConfig { proposals_per_temperature: Some(0), ..AnnealConfig::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn locked_slots_never_move() {
        let mut p = sample_palette(4, 1);
        for i in [0, 1, 3] {
            p.set_locked(i, true);
        }
        let cfg = AnnealConfig::default();
        let f = ColorFilter::default();
        let mut r = rng(2);
        let mut q = p.clone();
        for _ in 0..1000 {
            q = propose(&q, &cfg, &f, &mut r).unwrap();
            for i in [0, 1, 3] {
                assert_eq!(q.color(i), p.color(i));
            }
            assert_eq!(q.background(), p.background());
        }
        assert_ne!(q.color(2), p.color(2));
    }

    #[test]
    fn swap_exchanges_two_colors() {
        let p = sample_palette(2, 3);
        let cfg = AnnealConfig {
            swap_probability: 1.0,
            ..AnnealConfig::default()
        };
        let q = propose(&p, &cfg, &ColorFilter::default(), &mut rng(0)).unwrap();
        assert_eq!(q.colors(), &[p.color(1), p.color(0)]);
    }

    #[test]
    fn all_locked_cannot_move() {
        let p = Palette::with_locks(sample_palette(2, 3).colors().to_vec(), white(), vec![true, true]).unwrap();
        assert_eq!(
            propose(&p, &AnnealConfig::default(), &ColorFilter::default(), &mut rng(0)),
            Err(Error::AllLocked)
        );
    }

    #[test]
    fn proposals_are_deterministic() {
        let p = sample_palette(5, 9);
        let cfg = AnnealConfig::default();
        let f = ColorFilter::default();
        let run = |seed| {
            let mut r = rng(seed);
            let mut q = p.clone();
            let mut seq = Vec::new();
            for _ in 0..50 {
                q = propose(&q, &cfg, &f, &mut r).unwrap();
                seq.push(q.clone());
            }
            seq
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn refine_leaves_feasible_palettes_alone() {
        let p = Palette::new(
            vec![srgb_to_lab(RgbColor::new(200, 30, 30)), srgb_to_lab(RgbColor::new(30, 30, 200))],
            white(),
        );
        let q = refine(&p, 10.0, &ColorFilter::default(), &AnnealConfig::default(), &mut rng(0)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn refine_separates_duplicates() {
        let c = srgb_to_lab(RgbColor::new(30, 120, 200));
        let p = Palette::new(vec![c, c, srgb_to_lab(RgbColor::new(200, 30, 30))], white());
        let f = ColorFilter::default();
        let q = refine(&p, 10.0, &f, &AnnealConfig::default(), &mut rng(1)).unwrap();
        let all: Vec<LabColor> = q.with_background().collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                assert!(ciede2000(all[i], all[j]) >= 10.0);
            }
        }
        assert_eq!(q.color(2), p.color(2));
    }

    #[test]
    fn refine_fails_on_locked_duplicates() {
        let c = srgb_to_lab(RgbColor::new(30, 120, 200));
        let p = Palette::with_locks(vec![c, c], white(), vec![true, true]).unwrap();
        let r = refine(&p, 10.0, &ColorFilter::default(), &AnnealConfig::default(), &mut rng(0));
        assert!(matches!(r, Err(Error::RefinementFailed { .. })));
    }

    #[test]
    fn acceptance_rule() {
        let mut r = rng(0);
        assert!((0..100).all(|_| accept(2.0, 1.0, 1e-9, &mut r)));
        let hot = (0..10_000).filter(|_| accept(0.0, 10.0, 1e12, &mut r)).count();
        assert!(hot > 9_990);
        let t = 3.0;
        let half = (0..10_000)
            .filter(|_| accept(5.0 - t * core::f64::consts::LN_2, 5.0, t, &mut r))
            .count();
        assert!((half as f64 / 10_000.0 - 0.5).abs() < 0.02, "{half}");
    }

    #[test]
    fn cached_energy_matches_direct_scoring() {
        let ps = dataset(6, 4);
        let w = precompute_pair_weights(&ps, &default_alpha_shape_graph(&ps)).unwrap();
        let names = NameCountMatrix::basic_terms(10.0).unwrap();
        let sw = ScoreWeights {
            pd_norm: 7.0,
            ..ScoreWeights::default()
        };
        let mut pair = vec![0.0; 36];
        for j in 0..6 {
            for k in 0..6 {
                if j != k {
                    pair[j * 6 + k] = w.get(j, k) + w.get(k, j);
                }
            }
        }
        let obj = Objective {
            pair,
            names: &names,
            weights: sw,
            m: 6,
        };
        let mut s = obj.state(sample_palette(6, 12));
        let f = ColorFilter::default();
        let mut r = rng(3);
        for _ in 0..200 {
            match draw_move(&s.dist.palette, &AnnealConfig::default(), &f, &mut r).unwrap() {
                Move::Swap(a, b) => obj.swap(&mut s, a, b),
                Move::Recolor(i, c) => obj.recolor(&mut s, i, c),
            }
            let direct = total_energy(&w, &names, &s.dist.palette, &sw).unwrap();
            assert!((obj.energy(&s) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn single_class_respects_background() {
        let ps = dataset(1, 0);
        let w = precompute_pair_weights(&ps, &default_alpha_shape_graph(&ps)).unwrap();
        let names = NameCountMatrix::basic_terms(10.0).unwrap();
        let f = ColorFilter::default();
        let res = optimize(
            &w,
            &names,
            ScoreWeights::default(),
            &quick_config(1),
            &f,
            white(),
            &Start::random(),
            &mut Unobserved,
        )
        .unwrap();
        assert_eq!(res.best_palette.len(), 1);
        assert!(passes_filter(&res.best_palette.color(0), &f));
        assert!(ciede2000(res.best_palette.color(0), white()) >= 10.0);
    }

    #[test]
    fn optimize_is_deterministic_and_feasible() {
        let ps = dataset(5, 2);
        let w = precompute_pair_weights(&ps, &default_alpha_shape_graph(&ps)).unwrap();
        let names = NameCountMatrix::basic_terms(10.0).unwrap();
        let f = ColorFilter::default();
        let run = || {
            optimize(
                &w,
                &names,
                ScoreWeights::default(),
                &quick_config(3),
                &f,
                white(),
                &Start::random(),
                &mut Unobserved,
            )
            .unwrap()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(color_discrimination(&a.best_palette) >= 10.0);
        assert!(a.trace.windows(2).all(|w| w[1].best_energy >= w[0].best_energy));
        assert_eq!(a.trace.last().unwrap().best_energy, a.best_energy);
        assert!((a.breakdown.total - a.best_energy).abs() < 1e-9);
        assert_eq!(a.iterations, quick_config(3).temperature_steps() * 5);
    }

    #[test]
    fn observer_can_stop_early() {
        let ps = dataset(3, 2);
        let w = precompute_pair_weights(&ps, &default_alpha_shape_graph(&ps)).unwrap();
        let names = NameCountMatrix::basic_terms(10.0).unwrap();
        let mut stop_after_two = |p: &Progress| {
            if p.step >= 2 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        };
        let res = optimize(
            &w,
            &names,
            ScoreWeights::default(),
            &quick_config(3),
            &ColorFilter::default(),
            white(),
            &Start::random(),
            &mut stop_after_two,
        )
        .unwrap();
        assert!(res.truncated);
        assert_eq!(res.temperature_steps, 2);
        assert_eq!(res.iterations, 6);
    }

    #[test]
    fn zero_weights_are_rejected() {
        let ps = dataset(2, 2);
        let w = precompute_pair_weights(&ps, &default_alpha_shape_graph(&ps)).unwrap();
        let names = NameCountMatrix::basic_terms(10.0).unwrap();
        let r = optimize(
            &w,
            &names,
            ScoreWeights::with_omega([0.0, 0.0, 0.0]),
            &quick_config(3),
            &ColorFilter::default(),
            white(),
            &Start::random(),
            &mut Unobserved,
        );
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }
}
