use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use crossset_core::api::ViewResponse;
use crossset_core::{CellKey, Rational};
use serde_json::Value;

fn crossset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossset"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = crossset(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

const SAMPLE_CSV: &str = "A,B\nMusic;Family,Fun;Resp\nTraffic,Resp\nTraffic,Fun;Resp\n";

fn write_sample(dir: &Path) -> String {
    let path = dir.join("sample.csv");
    std::fs::write(&path, SAMPLE_CSV).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn s2_leaves_the_diagonal_empty() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("s2.csv");
    let table = table.to_str().unwrap();
    ok(&["generate", "--variant", "S2", "--n", "1000", "--seed", "1", "-o", table]);
    assert!(std::fs::read_to_string(table).unwrap().starts_with("A,B\n"));
    let body = ok(&["aggregate", "-i", table, "--counting", "element", "--collapse-all"]);
    let response: ViewResponse = serde_json::from_slice(&body).unwrap();
    let agg = response.aggregate;
    for i in 0..4 {
        let col = agg.columns.iter().position(|b| b.element == Some(i)).unwrap();
        let row = agg.rows.iter().position(|b| b.element == Some(i)).unwrap();
        assert_eq!(agg.columns[col].label, format!("a{}+0…", i + 1));
        assert_eq!(agg.rows[row].label, format!("b{}+0…", i + 1));
        assert!(agg.cell(col, row).is_zero());
        assert!(agg.get(&CellKey::collapsed(i, (i + 1) % 4)).unwrap().is_positive());
    }
}

#[test]
fn sample_aggregate_holds_a_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample(dir.path());
    let body = ok(&["aggregate", "-i", &input]);
    let agg = serde_json::from_slice::<ViewResponse>(&body).unwrap().aggregate;
    let col = agg.columns.iter().position(|b| b.label == "Music+1").unwrap();
    let row = agg.rows.iter().position(|b| b.label == "Fun+1").unwrap();
    assert_eq!(agg.cell(col, row), &Rational::new(1, 4));
}

#[test]
fn sample_combination_holds_a_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample(dir.path());
    let body = ok(&[
        "combinations",
        "-i",
        &input,
        "--col",
        "Music",
        "--row",
        "Fun",
        "--k",
        "1",
        "--l",
        "1",
    ]);
    let list: Value = serde_json::from_slice(&body).unwrap();
    let total: Rational = serde_json::from_value(list["totalValue"].clone()).unwrap();
    assert_eq!(total, Rational::new(1, 4));

    let tooltip = ok(&[
        "combinations",
        "-i",
        &input,
        "--col",
        "Music",
        "--row",
        "Fun",
        "--k",
        "1",
        "--l",
        "1",
        "--tooltip",
    ]);
    let tooltip = String::from_utf8(tooltip).unwrap();
    assert!(tooltip.lines().nth(1).unwrap().starts_with("total: 1/4"), "{tooltip}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(crossset(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(crossset(&["generate", "--variant", "S1"]).status.code(), Some(2));
    assert_eq!(
        crossset(&["generate", "--variant", "S9", "--seed", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        crossset(&["aggregate", "-i", "x.csv", "--cap", "C:2"]).status.code(),
        Some(2)
    );
}

#[test]
fn data_errors_exit_with_one_and_a_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample(dir.path());
    let out = crossset(&["aggregate", "-i", &input, "--cap", "A:0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[InvalidCap]"));

    let out = crossset(&["detail", "-i", &input, "--ea", "Opera", "--eb", "Fun"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[InvalidReference]"));

    let out = crossset(&["aggregate", "-i", "/nonexistent/table.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample(dir.path());
    let config = dir.path().join("view.json");
    std::fs::write(
        &config,
        r#"{"counting": "elementCentric", "capA": 1, "transform": "rankDense"}"#,
    )
    .unwrap();
    let config = config.to_str().unwrap();
    let body = ok(&[
        "aggregate",
        "-i",
        &input,
        "--config",
        config,
        "--counting",
        "item",
        "--show-empty",
        "B:false",
    ]);
    let response: ViewResponse = serde_json::from_slice(&body).unwrap();
    assert_eq!(response.aggregate.total, Rational::from_integer(3));
    assert!(response.transform.is_some());
    assert!(response.aggregate.columns.iter().any(|b| b.label == "Music+1…"));
    assert!(response.aggregate.show_empty_a && !response.aggregate.show_empty_b);
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample(dir.path());
    let brush = dir.path().join("brush.json");
    std::fs::write(&brush, r#"{"type": "elementPresent", "dim": "A", "element": 2}"#).unwrap();
    let svg = ok(&[
        "render",
        "-i",
        &input,
        "--brush",
        brush.to_str().unwrap(),
        "--negate",
        "B:Fun",
    ]);
    let svg = String::from_utf8(svg).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains(r#"class="brushed""#));
    assert!(svg.contains("¬Fun"));
}

#[test]
fn output_matches_the_service_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("drives.json");
    let table = table.to_str().unwrap();
    ok(&[
        "generate",
        "--variant",
        "drives",
        "--n",
        "400",
        "--seed",
        "21",
        "-o",
        table,
    ]);
    let cli = ok(&[
        "aggregate",
        "-i",
        table,
        "--cap",
        "B:2",
        "--collapse",
        "A:Traffic,Sport",
        "--negate",
        "A:Aggr",
        "--transform",
        "deviation",
    ]);

    let doc = std::fs::read(table).unwrap();
    let served = tokio::runtime::Runtime::new().unwrap().block_on(async move {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let app = crossset_service::router(Arc::new(crossset_service::AppState::new()));
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        let client = reqwest::Client::new();
        let handle: Value = client
            .post(format!("http://{addr}/datasets"))
            .body(doc)
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        let body = serde_json::json!({
            "capB": 2, "collapsedA": [2, 3], "negateA": [4], "transform": "deviation",
        });
        let resp = client
            .post(format!(
                "http://{addr}/datasets/{}/aggregate",
                handle["id"].as_str().unwrap()
            ))
            .json(&body)
            .send()
            .await
            .unwrap();
        assert!(resp.status().is_success());
        resp.bytes().await.unwrap().to_vec()
    });
    assert!(cli == served, "CLI and service output differ");
}
