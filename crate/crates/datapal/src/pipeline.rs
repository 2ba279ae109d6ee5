//! Dataset + configuration → optimized palette.

use std::ops::ControlFlow;
use std::path::Path;
use std::thread;
use std::time::Instant;

use datapal_core::{
    energy_breakdown, optimize, precompute_pair_weights, srgb_to_lab, AnnealConfig, AnnealResult,
    ClassPairWeights, EnergyBreakdown, LabColor, NameCountMatrix, Observer, Palette, Progress,
    ScoreWeights, Start,
};

use crate::dataset::{ChartDataset, Marks};
use crate::error::{Error, Result};
use crate::settings::RunConfig;

/// Grid spacing of the built-in name matrix, in LAB units.
pub const DEFAULT_NAME_SPACING: f64 = 5.0;

/// Loads a name-count matrix CSV, or builds the built-in basic-term matrix
/// when `path` is `None`.
pub fn load_name_matrix(path: Option<&Path>) -> Result<NameCountMatrix> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Ok(NameCountMatrix::parse_csv(&text)?)
        }
        None => Ok(NameCountMatrix::basic_terms(DEFAULT_NAME_SPACING)?),
    }
}

/// Stops a run once a deadline has passed.
pub struct Deadline(pub Instant);

impl Observer for Deadline {
    fn observe(&mut self, _: &Progress) -> ControlFlow<()> {
        if Instant::now() >= self.0 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// The winning run; its `wall_time` covers the whole pipeline.
    pub result: AnnealResult,
    /// Seed of the winning run.
    pub seed: u64,
    /// Best energy of every restart, in seed order.
    pub restart_energies: Vec<f64>,
    pub warnings: Vec<String>,
}

fn locked_start(ds: &ChartDataset, rc: &RunConfig) -> Result<Start> {
    let m = ds.class_count();
    if rc.locked.is_empty() {
        return Ok(Start::random());
    }
    if rc.locked.len() != m {
        return Err(Error::field(
            "locked",
            format!("{} entries for {m} classes", rc.locked.len()),
        ));
    }
    Ok(Start::Random {
        locked: rc.locked.iter().map(|c| c.map(srgb_to_lab)).collect(),
    })
}

/// Class-pair weights of a dataset under the configured graph.
pub fn dataset_weights(ds: &ChartDataset, rc: &RunConfig) -> Result<(Marks, ClassPairWeights)> {
    let marks = ds.marks(&rc.graph, rc.spacing)?;
    let weights = precompute_pair_weights(&marks.points, &marks.graph)?;
    Ok((marks, weights))
}

/// Builds the neighbor graph, folds it into class-pair weights and anneals.
///
/// With `restarts > 1` the runs use seeds `seed, seed + 1, ...` on separate
/// threads; the highest best energy wins, ties going to the lower seed.
pub fn run_pipeline(ds: &ChartDataset, rc: &RunConfig, names: &NameCountMatrix) -> Result<RunOutput> {
    let started = Instant::now();
    let (marks, weights) = dataset_weights(ds, rc)?;
    let start = locked_start(ds, rc)?;
    let background = srgb_to_lab(rc.background);
    let deadline = rc.time_budget.map(|b| started + b);

    let run = |seed: u64| -> Result<AnnealResult> {
        let cfg = AnnealConfig {
            seed,
            ..rc.anneal.clone()
        };
        let result = match deadline {
            Some(d) => optimize(&weights, names, rc.score, &cfg, &rc.filter, background, &start, &mut Deadline(d)),
            None => optimize(
                &weights,
                names,
                rc.score,
                &cfg,
                &rc.filter,
                background,
                &start,
                &mut datapal_core::Unobserved,
            ),
        };
        Ok(result?)
    };

    let seeds: Vec<u64> = (0..rc.restarts as u64).map(|r| rc.anneal.seed.wrapping_add(r)).collect();
    let results: Vec<Result<AnnealResult>> = if seeds.len() == 1 {
        vec![run(seeds[0])]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = seeds.iter().map(|&seed| s.spawn(move || run(seed))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("optimizer thread panicked"))
                .collect()
        })
    };
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let restart_energies: Vec<f64> = results.iter().map(|r| r.best_energy).collect();
    let (winner, mut result) = results
        .into_iter()
        .enumerate()
        .reduce(|best, next| if next.1.best_energy > best.1.best_energy { next } else { best })
        .expect("at least one restart");
    result.wall_time = started.elapsed().as_secs_f64();

    let mut warnings: Vec<String> = marks.graph.warnings().to_vec();
    if result.truncated {
        warnings.push(format!(
            "truncated: time budget reached after {} of {} temperature steps; returning the best palette so far",
            result.temperature_steps,
            rc.anneal.temperature_steps()
        ));
    }
    for (i, c) in rc.locked.iter().enumerate() {
        if let Some(c) = c {
            if !datapal_core::passes_filter(&srgb_to_lab(*c), &rc.filter) {
                warnings.push(format!("locked color {} of class {i} lies outside the color filter", c.to_hex()));
            }
        }
    }
    Ok(RunOutput {
        result,
        seed: seeds[winner],
        restart_energies,
        warnings,
    })
}

/// Scores a given palette without optimizing. Point distinctness is not
/// normalized (`pd_norm = 1`).
pub fn score_palette(
    ds: &ChartDataset,
    rc: &RunConfig,
    names: &NameCountMatrix,
    palette: &Palette,
) -> Result<(EnergyBreakdown, ScoreWeights)> {
    if palette.len() != ds.class_count() {
        return Err(Error::Core(datapal_core::Error::SizeMismatch {
            expected: ds.class_count(),
            found: palette.len(),
        }));
    }
    let (_, weights) = dataset_weights(ds, rc)?;
    let score = ScoreWeights {
        pd_norm: 1.0,
        ..rc.score
    };
    score.validate()?;
    Ok((energy_breakdown(&weights, names, palette, &score)?, score))
}

/// Lab colors of hex strings, for building palettes from user input.
pub fn palette_from_hex(colors: &[String], background: &str, locked: Option<&[bool]>) -> Result<Palette> {
    let parse = |field: String, hex: &str| -> Result<LabColor> {
        Ok(srgb_to_lab(crate::settings::parse_hex(&field, hex)?))
    };
    let lab = colors
        .iter()
        .enumerate()
        .map(|(i, h)| parse(format!("palette[{i}]"), h))
        .collect::<Result<Vec<_>>>()?;
    let bg = parse("background".into(), background)?;
    let flags = locked.map_or_else(|| vec![false; lab.len()], <[bool]>::to_vec);
    Ok(Palette::with_locks(lab, bg, flags)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use datapal_core::{ciede2000, color_discrimination};
    use std::time::Duration;

    fn small() -> ChartDataset {
        ChartDataset::from_json(
            r#"{"kind":"scatter","points":[[0,0,0],[1,0,0],[0,1,0],[5,5,1],[6,5,1],[5,6,1],[2,3,2],[3,2,2]]}"#,
        )
        .unwrap()
    }

    fn quick() -> RunConfig {
        let mut rc = RunConfig::default();
        rc.anneal.t_start = 10.0;
        rc.anneal.cooling = 0.9;
        rc
    }

    fn names() -> NameCountMatrix {
        NameCountMatrix::basic_terms(10.0).unwrap()
    }

    #[test]
    fn restarts_pick_the_best_seed() {
        let mut rc = quick();
        rc.restarts = 3;
        let out = run_pipeline(&small(), &rc, &names()).unwrap();
        assert_eq!(out.restart_energies.len(), 3);
        let best = out.restart_energies.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(out.result.best_energy, best);
        let idx = out.restart_energies.iter().position(|&e| e == best).unwrap();
        assert_eq!(out.seed, rc.anneal.seed + idx as u64);
        rc.restarts = 1;
        rc.anneal.seed = out.seed;
        let single = run_pipeline(&small(), &rc, &names()).unwrap();
        assert_eq!(single.result.best_palette, out.result.best_palette);
    }

    #[test]
    fn zero_budget_truncates_with_a_feasible_palette() {
        let mut rc = RunConfig::default();
        rc.time_budget = Some(Duration::ZERO);
        let out = run_pipeline(&small(), &rc, &names()).unwrap();
        assert!(out.result.truncated);
        assert!(out.warnings.iter().any(|w| w.starts_with("truncated")));
        assert!(color_discrimination(&out.result.best_palette) >= 10.0);
    }

    #[test]
    fn zero_weights_are_invalid_config() {
        let mut rc = quick();
        rc.score = ScoreWeights::with_omega([0.0; 3]);
        let e = run_pipeline(&small(), &rc, &names()).unwrap_err();
        assert!(matches!(e, Error::Core(datapal_core::Error::InvalidConfig(_))), "{e}");
    }

    #[test]
    fn lock_count_must_match_classes() {
        let mut rc = quick();
        rc.locked = vec![None];
        let e = run_pipeline(&small(), &rc, &names()).unwrap_err();
        assert!(matches!(&e, Error::Validation { field, .. } if field == "locked"));
    }

    #[test]
    fn scoring_uses_raw_point_distinctness() {
        let ds = small();
        let p = palette_from_hex(&["#FF0000".into(), "#0000FF".into(), "#00AA00".into()], "#FFFFFF", None).unwrap();
        let (e, sw) = score_palette(&ds, &RunConfig::default(), &names(), &p).unwrap();
        assert_eq!(sw.pd_norm, 1.0);
        assert_eq!(e.pd_raw, e.pd_normalized);
        let red_blue = ciede2000(p.color(0), p.color(1));
        assert!(e.cd <= red_blue);
    }
}
