use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use datapal_core::{ciede2000, passes_filter, srgb_to_lab, ColorFilter, HueTerm, HueTermTable, RgbColor};
use datapal_server::{app, AppState, WALL_TIME_HEADER};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn state() -> Arc<AppState> {
    static STATE: OnceLock<Arc<AppState>> = OnceLock::new();
    STATE
        .get_or_init(|| Arc::new(AppState::new(datapal::load_name_matrix(None).unwrap())))
        .clone()
}

fn router() -> Router {
    app(state())
}

struct Reply {
    status: StatusCode,
    wall_time: Option<f64>,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

async fn send(method: &str, uri: &str, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let res = router().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = res.status();
    let wall_time = res
        .headers()
        .get(WALL_TIME_HEADER)
        .map(|v| v.to_str().unwrap().parse().unwrap());
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, wall_time, body }
}

async fn post(uri: &str, body: Value) -> Reply {
    send("POST", uri, Some(body)).await
}

fn scatter() -> Value {
    let mut points = Vec::new();
    for class in 0..4 {
        for i in 0..15 {
            let x = (class % 2) as f64 * 10.0 + (i % 5) as f64;
            let y = (class / 2) as f64 * 10.0 + (i / 5) as f64 + 0.3 * class as f64;
            points.push(json!([x, y, class]));
        }
    }
    json!({"kind": "scatter", "classes": ["a", "b", "c", "d"], "points": points})
}

fn quick(extra: Value) -> Value {
    let mut s = json!({"t_start": 100.0, "cooling": 0.95, "seed": 11});
    for (k, v) in extra.as_object().unwrap() {
        s[k] = v.clone();
    }
    s
}

fn lab(hex: &str) -> datapal_core::LabColor {
    srgb_to_lab(RgbColor::from_hex(hex).unwrap())
}

fn assert_feasible(palette: &Value, filter: &ColorFilter) {
    let hexes: Vec<&str> = palette["colors"].as_array().unwrap().iter().map(|c| c["hex"].as_str().unwrap()).collect();
    let bg = lab(palette["background"].as_str().unwrap());
    let mut all: Vec<_> = hexes.iter().map(|h| lab(h)).collect();
    for (i, c) in palette["colors"].as_array().unwrap().iter().enumerate() {
        if !c["locked"].as_bool().unwrap() {
            assert!(passes_filter(&all[i], filter), "{} fails the filter", hexes[i]);
        }
    }
    all.push(bg);
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            assert!(ciede2000(all[i], all[j]) >= 10.0 - 1e-9, "{i},{j}");
        }
    }
}

fn recombines(e: &Value) {
    let f = |k: &str| e[k].as_f64().unwrap();
    let w: Vec<f64> = e["weights"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let total = w[0] * f("point_distinctness")
        + w[1] * f("nd_factor") * f("name_difference")
        + w[2] * f("cd_factor") * f("color_discrimination");
    assert!((total - f("total")).abs() < 1e-9);
}

#[tokio::test]
async fn seeded_palette_requests_are_identical_and_feasible() {
    let req = json!({"dataset": scatter(), "settings": quick(json!({}))});
    let (a, b) = tokio::join!(post("/api/palette", req.clone()), post("/api/palette", req));
    assert_eq!(a.status, StatusCode::OK, "{}", String::from_utf8_lossy(&a.body));
    assert_eq!(a.body, b.body);
    assert!(a.wall_time.unwrap() >= 0.0);

    let v = a.json();
    assert_eq!(v["palette"]["colors"].as_array().unwrap().len(), 4);
    assert_eq!(v["palette"]["colors"][2]["class"], "c");
    assert_feasible(&v["palette"], &ColorFilter::default());
    recombines(&v["energy"]);
    assert_eq!(v["trace"]["seed"], 11);
    assert!(v["trace"]["iterations"].as_u64().unwrap() > 0);
    assert_eq!(v["trace"]["truncated"], false);
}

#[tokio::test]
async fn locked_colors_come_back_verbatim() {
    let locks = json!([null, "#1F77B4", null, "#D62728"]);
    let req = json!({"dataset": scatter(), "settings": quick(json!({"locked": locks}))});
    let r = post("/api/palette", req).await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    let colors = &v["palette"]["colors"];
    assert_eq!(colors[1]["hex"], "#1F77B4");
    assert_eq!(colors[3]["hex"], "#D62728");
    assert_eq!(colors[1]["locked"], true);
    assert_eq!(colors[0]["locked"], false);
    assert_feasible(&v["palette"], &ColorFilter::default());
}

#[tokio::test]
async fn all_locked_returns_the_request_palette() {
    let hexes = ["#1F77B4", "#FF7F0E", "#2CA02C", "#9467BD"];
    let req = json!({"dataset": scatter(), "settings": {"locked": hexes}});
    let r = post("/api/palette", req).await;
    assert_eq!(r.status, StatusCode::OK, "{}", String::from_utf8_lossy(&r.body));
    let v = r.json();
    let got: Vec<&str> = v["palette"]["colors"].as_array().unwrap().iter().map(|c| c["hex"].as_str().unwrap()).collect();
    assert_eq!(got, hexes);
    assert_eq!(v["trace"]["iterations"], 0);

    let fixed = post("/api/palette", json!({"dataset": scatter(), "palette": hexes})).await;
    assert_eq!(fixed.status, StatusCode::OK);
    let f = fixed.json();
    assert_eq!(f["palette"]["colors"][3]["hex"], "#9467BD");
    assert_eq!(f["energy"]["pd_norm"], 1.0);
    recombines(&f["energy"]);
}

#[tokio::test]
async fn infeasible_locks_are_422_with_a_reason() {
    let locks = json!(["#1E78C8", "#2079CA", null, null]);
    let r = post("/api/palette", json!({"dataset": scatter(), "settings": {"locked": locks}})).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let e = &r.json()["error"];
    assert_eq!(e["kind"], "infeasible");
    assert_eq!(e["reason"], "refinement_failed");
}

#[tokio::test]
async fn hue_terms_restrict_returned_colors() {
    let req = json!({"dataset": scatter(), "settings": quick(json!({"hue_terms": ["green", "blue"]}))});
    let v = post("/api/palette", req).await.json();
    let table = HueTermTable::default();
    for c in v["palette"]["colors"].as_array().unwrap() {
        let terms = table.classify(&lab(c["hex"].as_str().unwrap()));
        assert!(terms.iter().any(|t| matches!(t, HueTerm::Green | HueTerm::Blue)), "{c}");
    }
}

#[tokio::test]
async fn dark_backgrounds_get_light_colors() {
    let req = json!({"dataset": scatter(), "settings": quick(json!({"background": "#101010", "auto_lightness": true}))});
    let v = post("/api/palette", req).await.json();
    assert_eq!(v["palette"]["background"], "#101010");
    let filter = ColorFilter::default().with_background_lightness(&lab("#101010"));
    assert_feasible(&v["palette"], &filter);
}

#[tokio::test]
async fn validation_errors_are_400_and_name_the_field() {
    let cases = [
        (json!({"dataset": scatter(), "settings": {"background": "white"}}), "background"),
        (json!({"dataset": scatter(), "settings": {"knn": 0}}), "knn"),
        (json!({"dataset": {"kind": "scatter", "points": [[0, 0, -1]]}}), "dataset.points[0]"),
        (json!({"dataset": scatter(), "settings": {"locked": ["#000000"]}}), "locked"),
    ];
    for (body, field) in cases {
        let r = post("/api/palette", body).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{field}");
        let e = &r.json()["error"];
        assert_eq!(e["kind"], "validation");
        assert_eq!(e["field"], field);
    }
    let zero = post("/api/palette", json!({"dataset": scatter(), "settings": {"weights": [0, 0, 0]}})).await;
    assert_eq!(zero.status, StatusCode::BAD_REQUEST);
    assert_eq!(zero.json()["error"]["reason"], "invalid_config");

    let raw = router()
        .oneshot(Request::post("/api/palette").body(Body::from("{not json")).unwrap())
        .await
        .unwrap();
    assert_eq!(raw.status(), StatusCode::BAD_REQUEST);
    let unknown = post("/api/palette", json!({"dataset": scatter(), "colour": 1})).await;
    assert_eq!(unknown.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn oversized_inputs_are_rejected() {
    let classes: Vec<String> = (0..65).map(|i| format!("c{i}")).collect();
    let bars: Vec<f64> = (0..65).map(f64::from).collect();
    let r = post("/api/palette", json!({"dataset": {"kind": "bar", "classes": classes, "bars": bars}})).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"]["reason"], "too_large");

    let points: Vec<Value> = (0..100_001).map(|i| json!([i % 1000, i / 1000, i % 2])).collect();
    let r = post("/api/palette", json!({"dataset": {"kind": "scatter", "points": points}})).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert!(r.json()["error"]["message"].as_str().unwrap().contains("pre-aggregate"));
}

#[tokio::test]
async fn score_reports_raw_terms() {
    let dup = post(
        "/api/score",
        json!({"dataset": scatter(), "palette": ["#1F77B4", "#1F77B4", "#2CA02C", "#D62728"]}),
    )
    .await;
    assert_eq!(dup.status, StatusCode::OK);
    let e = &dup.json()["energy"];
    assert_eq!(e["color_discrimination"], 0.0);
    assert_eq!(e["pd_norm"], 1.0);
    assert_eq!(e["point_distinctness"], e["point_distinctness_raw"]);
    recombines(e);

    let single = json!({"kind": "scatter", "points": [[0, 0, 0], [1, 0, 0], [0, 1, 0]]});
    let r = post("/api/score", json!({"dataset": single, "palette": ["#1F77B4"]})).await;
    assert_eq!(r.status, StatusCode::OK, "{}", String::from_utf8_lossy(&r.body));
    assert_eq!(r.json()["energy"]["point_distinctness"], 0.0);

    let short = post("/api/score", json!({"dataset": scatter(), "palette": ["#1F77B4"]})).await;
    assert_eq!(short.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn meta_lists_defaults_and_terms() {
    let r = send("GET", "/api/meta", None).await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    let d = &v["defaults"];
    assert_eq!(d["tau"], 10.0);
    assert_eq!(d["cooling"], 0.99);
    assert_eq!(d["t_start"], 100000.0);
    assert_eq!(d["t_end"], 0.001);
    assert_eq!(d["nd_factor"], 2.0);
    assert_eq!(d["cd_factor"], 0.1);
    assert_eq!(v["hue_terms"].as_array().unwrap().len(), 11);
    assert_eq!(v["term_table"].as_object().unwrap().len(), 11);
    assert_eq!(v["limits"]["max_points"], 100_000);
    assert_eq!(v["limits"]["max_classes"], 64);
    assert_eq!(v["limits"]["time_budget_seconds"], 30.0);
}

#[tokio::test]
async fn cors_preflight_is_answered() {
    let res = router()
        .oneshot(
            Request::builder()
                .method("OPTIONS")
                .uri("/api/palette")
                .header("origin", "http://localhost:5173")
                .header("access-control-request-method", "POST")
                .body(Body::empty())
                .unwrap(),
        )
        .await
        .unwrap();
    assert!(res.status().is_success());
    assert!(res.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test]
async fn time_budget_truncates_but_stays_feasible() {
    let state = Arc::new(AppState {
        names: datapal::load_name_matrix(None).unwrap(),
        time_budget: std::time::Duration::ZERO,
    });
    let res = app(state)
        .oneshot(
            Request::post("/api/palette")
                .body(Body::from(json!({"dataset": scatter()}).to_string()))
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let v: Value = serde_json::from_slice(&res.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!(v["trace"]["truncated"], true);
    assert!(v["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().starts_with("truncated")));
    assert_feasible(&v["palette"], &ColorFilter::default());
}
