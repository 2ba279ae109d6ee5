//! Stateless JSON API over the palette pipeline.
//!
//! * `POST /api/palette` optimizes (or, given a fixed palette, only scores) a
//!   palette for an inline dataset.
//! * `POST /api/score` scores a palette with raw point distinctness.
//! * `GET /api/meta` lists defaults, hue terms and request limits.
//!
//! The only shared state is the immutable name matrix; every request runs
//! on its own blocking thread.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use datapal::output::EnergyDocument;
use datapal::pipeline::palette_from_hex;
use datapal::terms::{table_from_specs, table_to_specs, RuleSpec};
use datapal::{run_pipeline, score_palette, ChartDataset, Error, PaletteDocument, RunSettings};
use datapal_core::{AnnealConfig, ColorFilter, HueTerm, HueTermTable, NameCountMatrix, ScoreWeights};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

/// Largest accepted dataset, in marks (points, line vertices or bars).
pub const MAX_POINTS: usize = 100_000;
pub const MAX_CLASSES: usize = 64;
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(30);

/// Response header carrying the pipeline wall time in seconds. It is kept out
/// of the body so that seeded requests produce byte-identical bodies.
pub const WALL_TIME_HEADER: HeaderName = HeaderName::from_static("x-wall-time");

pub struct AppState {
    pub names: NameCountMatrix,
    /// Annealing stops after this long and the best palette so far is returned.
    pub time_budget: Duration,
}

impl AppState {
    pub fn new(names: NameCountMatrix) -> Self {
        AppState {
            names,
            time_budget: DEFAULT_TIME_BUDGET,
        }
    }
}

/// Routes with permissive CORS; see [`app_with_cors`] to restrict origins.
pub fn app(state: Arc<AppState>) -> Router {
    app_with_cors(state, CorsLayer::permissive())
}

pub fn app_with_cors(state: Arc<AppState>, cors: CorsLayer) -> Router {
    Router::new()
        .route("/api/palette", post(palette))
        .route("/api/score", post(score))
        .route("/api/meta", get(meta))
        .layer(cors)
        .with_state(state)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaletteRequest {
    pub dataset: Value,
    #[serde(default)]
    pub settings: RunSettings,
    /// Hue-term rule overrides, keyed by term name.
    #[serde(default)]
    pub term_table: Option<BTreeMap<String, RuleSpec>>,
    /// A fixed palette (`#RRGGBB` per class) to score instead of optimizing.
    #[serde(default)]
    pub palette: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TraceSummary {
    pub iterations: u64,
    pub temperature_steps: u64,
    pub seed: u64,
    pub truncated: bool,
    pub restart_energies: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PaletteResponse {
    pub palette: PaletteDocument,
    pub energy: EnergyDocument,
    pub trace: TraceSummary,
    pub warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub dataset: Value,
    pub palette: Vec<String>,
    #[serde(default)]
    pub settings: RunSettings,
    #[serde(default)]
    pub term_table: Option<BTreeMap<String, RuleSpec>>,
}

/// Error body: `{"error": {"kind", "reason", "field"?, "message"}}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    reason: &'static str,
    field: Option<String>,
    message: String,
}

impl ApiError {
    fn bad_request(reason: &'static str, field: Option<String>, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            reason,
            field,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            reason: "internal",
            field: None,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        use datapal_core::Error as Core;
        let message = e.to_string();
        match e {
            Error::Validation { field, .. } => ApiError::bad_request("validation", Some(field), message),
            Error::Parse { .. } => ApiError::bad_request("parse", None, message),
            Error::Io { .. } => ApiError::internal(message),
            Error::Core(core) => {
                let (status, reason) = match core {
                    Core::RefinementFailed { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "refinement_failed"),
                    Core::FilterUnsatisfiable { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "filter_unsatisfiable"),
                    Core::InvalidConfig(_) => (StatusCode::BAD_REQUEST, "invalid_config"),
                    Core::SizeMismatch { .. } => (StatusCode::BAD_REQUEST, "size_mismatch"),
                    Core::InvalidK { .. } => (StatusCode::BAD_REQUEST, "invalid_k"),
                    _ => (StatusCode::BAD_REQUEST, "validation"),
                };
                ApiError {
                    status,
                    reason,
                    field: None,
                    message,
                }
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let kind = match self.status {
            StatusCode::BAD_REQUEST => "validation",
            StatusCode::UNPROCESSABLE_ENTITY => "infeasible",
            _ => "internal",
        };
        let mut error = json!({ "kind": kind, "reason": self.reason, "message": self.message });
        if let Some(field) = self.field {
            error["field"] = json!(field);
        }
        (self.status, Json(json!({ "error": error }))).into_response()
    }
}

/// Parses a JSON body, reporting malformed input as 400 rather than axum's
/// default 422 (which is reserved here for infeasible constraints).
fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("parse", None, format!("request body: {e}")))
}

fn load_dataset(value: Value) -> Result<ChartDataset, ApiError> {
    let ds = ChartDataset::from_value(value).map_err(|e| {
        let mut err = ApiError::from(e);
        err.field = Some(err.field.map_or_else(|| "dataset".into(), |f| format!("dataset.{f}")));
        err
    })?;
    if ds.mark_count() > MAX_POINTS {
        return Err(ApiError::bad_request(
            "too_large",
            Some("dataset".into()),
            format!(
                "{} marks exceed the limit of {MAX_POINTS}; pre-aggregate or subsample the data",
                ds.mark_count()
            ),
        ));
    }
    if ds.class_count() > MAX_CLASSES {
        return Err(ApiError::bad_request(
            "too_large",
            Some("dataset".into()),
            format!(
                "{} classes exceed the limit of {MAX_CLASSES}; merge small classes before requesting a palette",
                ds.class_count()
            ),
        ));
    }
    Ok(ds)
}

fn term_table(specs: Option<&BTreeMap<String, RuleSpec>>) -> Result<HueTermTable, ApiError> {
    match specs {
        Some(specs) => table_from_specs(specs).map_err(|e| {
            let mut err = ApiError::from(e);
            err.field = Some("term_table".into());
            err
        }),
        None => Ok(HueTermTable::default()),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn run_palette(state: &AppState, req: PaletteRequest) -> Result<(PaletteResponse, f64), ApiError> {
    let ds = load_dataset(req.dataset)?;
    let table = term_table(req.term_table.as_ref())?;
    let mut rc = req.settings.resolve(&table)?;
    rc.time_budget = Some(state.time_budget);

    if let Some(colors) = &req.palette {
        let started = std::time::Instant::now();
        let background = rc.background.to_hex();
        let p = palette_from_hex(colors, &background, Some(&vec![true; colors.len()]))?;
        let (energy, weights) = score_palette(&ds, &rc, &state.names, &p)?;
        let response = PaletteResponse {
            palette: PaletteDocument::new(&p, &ds.class_names, None),
            energy: EnergyDocument::new(&energy, &weights),
            trace: TraceSummary {
                iterations: 0,
                temperature_steps: 0,
                seed: rc.anneal.seed,
                truncated: false,
                restart_energies: Vec::new(),
            },
            warnings: vec!["fixed palette: scored without optimizing".into()],
        };
        return Ok((response, started.elapsed().as_secs_f64()));
    }

    let out = run_pipeline(&ds, &rc, &state.names)?;
    let r = &out.result;
    let response = PaletteResponse {
        palette: PaletteDocument::new(&r.best_palette, &ds.class_names, None),
        energy: EnergyDocument::new(&r.breakdown, &r.weights),
        trace: TraceSummary {
            iterations: r.iterations as u64,
            temperature_steps: r.temperature_steps as u64,
            seed: out.seed,
            truncated: r.truncated,
            restart_energies: out.restart_energies.clone(),
        },
        warnings: out.warnings.clone(),
    };
    Ok((response, r.wall_time))
}

async fn palette(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: PaletteRequest = parse_body(&body)?;
    let (response, wall_time) = blocking(move || run_palette(&state, req)).await?;
    let mut res = Json(response).into_response();
    let header = HeaderValue::from_str(&format!("{wall_time:.6}")).expect("numeric header");
    res.headers_mut().insert(WALL_TIME_HEADER, header);
    Ok(res)
}

fn run_score(state: &AppState, req: ScoreRequest) -> Result<EnergyDocument, ApiError> {
    let ds = load_dataset(req.dataset)?;
    let table = term_table(req.term_table.as_ref())?;
    let rc = req.settings.resolve(&table)?;
    let p = palette_from_hex(&req.palette, &rc.background.to_hex(), None)?;
    let (energy, weights) = score_palette(&ds, &rc, &state.names, &p)?;
    Ok(EnergyDocument::new(&energy, &weights))
}

async fn score(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let req: ScoreRequest = parse_body(&body)?;
    let energy = blocking(move || run_score(&state, req)).await?;
    Ok(Json(json!({ "energy": energy })))
}

/// Capabilities document: defaults, hue terms with their rules, limits.
pub fn meta_document(time_budget: Duration) -> Value {
    let anneal = AnnealConfig::default();
    let score = ScoreWeights::default();
    let filter = ColorFilter::default();
    let band = filter.excluded_band.expect("default filter excludes a band");
    let terms: Vec<&str> = HueTerm::ALL.iter().map(|t| t.name()).collect();
    json!({
        "defaults": {
            "tau": anneal.tau,
            "cooling": anneal.cooling,
            "t_start": anneal.t_start,
            "t_end": anneal.t_end,
            "temperature_steps": anneal.temperature_steps(),
            "proposals_per_temperature": "class count",
            "perturb_range": anneal.perturb_range,
            "swap_probability": anneal.swap_probability,
            "refine_max_attempts": anneal.refine_max_attempts,
            "seed": anneal.seed,
            "weights": score.omega,
            "nd_factor": score.nd_factor,
            "cd_factor": score.cd_factor,
            "background": "#FFFFFF",
            "lightness": [filter.lightness_range.0, filter.lightness_range.1],
            "excluded_band": { "hue": [band.hue.0, band.hue.1], "lightness": [band.lightness.0, band.lightness.1] },
            "graph": { "type": "alpha", "radius": "1.5 x median Delaunay edge" },
            "spacing": datapal::settings::DEFAULT_SPACING,
        },
        "auto_lightness": {
            "dark_background": "L_bg < 50: [max(35, L_bg + 25), 95]",
            "light_background": "L_bg >= 50: [15, min(75, L_bg - 25)]",
        },
        "hue_terms": terms,
        "term_table": table_to_specs(&HueTermTable::default()),
        "limits": {
            "max_points": MAX_POINTS,
            "max_classes": MAX_CLASSES,
            "time_budget_seconds": time_budget.as_secs_f64(),
        },
    })
}

async fn meta(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(meta_document(state.time_budget))
}
