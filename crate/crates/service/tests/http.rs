use std::sync::Arc;

use crossset_core::{AggregateResult, BrushOverlay, CellKey, Rational};
use crossset_service::{router, AppState, DatasetHandle};
use reqwest::{Client, StatusCode};
use serde_json::{json, Value};

async fn spawn(state: AppState) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(Arc::new(state))).await.unwrap() });
    format!("http://{addr}")
}

async fn post(client: &Client, url: &str, body: Value) -> (StatusCode, Vec<u8>) {
    let resp = client.post(url).json(&body).send().await.unwrap();
    let status = resp.status();
    (status, resp.bytes().await.unwrap().to_vec())
}

async fn generate(client: &Client, base: &str, variant: &str, n: usize, seed: u64) -> DatasetHandle {
    let (status, body) = post(
        client,
        &format!("{base}/generate"),
        json!({"variant": variant, "n": n, "seed": seed}),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&body));
    serde_json::from_slice(&body).unwrap()
}

fn aggregate_of(body: &[u8]) -> AggregateResult {
    let value: Value = serde_json::from_slice(body).unwrap();
    serde_json::from_value(value["aggregate"].clone()).unwrap()
}

#[tokio::test]
async fn catalog_lists_routes() {
    let base = spawn(AppState::new()).await;
    let catalog: Value = reqwest::get(&base).await.unwrap().json().await.unwrap();
    let paths: Vec<&str> = catalog
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["path"].as_str().unwrap())
        .collect();
    assert!(paths.contains(&"/datasets/{id}/aggregate"));
    assert!(paths.contains(&"/generate"));
}

#[tokio::test]
async fn generated_s1_concentrates_on_the_diagonal() {
    let base = spawn(AppState::new()).await;
    let client = Client::new();
    let handle = generate(&client, &base, "S1", 1000, 7).await;
    assert_eq!(handle.n, 1000);
    assert_eq!(handle.universe_a.elements, ["a1", "a2", "a3", "a4"]);
    let (status, body) = post(
        &client,
        &format!("{base}/datasets/{}/aggregate", handle.id),
        json!({"collapsedA": [0, 1, 2, 3], "collapsedB": [0, 1, 2, 3]}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let agg = aggregate_of(&body);
    for i in 0..4 {
        for j in (0..4).filter(|&j| j != i) {
            let diag = agg.get(&CellKey::collapsed(i, i)).unwrap();
            let off = agg.get(&CellKey::collapsed(i, j)).unwrap();
            assert!(diag > off, "({i},{i}) = {diag:?} vs ({i},{j}) = {off:?}");
        }
    }
}

#[tokio::test]
async fn repeated_requests_are_byte_identical() {
    let base = spawn(AppState::new()).await;
    let client = Client::new();
    let handle = generate(&client, &base, "drives", 500, 11).await;
    let again = generate(&client, &base, "drives", 500, 11).await;
    assert_eq!(handle.id, again.id);
    let url = format!("{base}/datasets/{}/aggregate", handle.id);
    let body = json!({"transform": "rankDense", "capB": 2, "negateA": [4]});
    let (s1, first) = post(&client, &url, body.clone()).await;
    let (s2, second) = post(&client, &url, body).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(first, second);
    assert!(
        first.ends_with(b"}\n"),
        "{:?}",
        String::from_utf8_lossy(&first[first.len().saturating_sub(80)..])
    );
}

#[tokio::test]
async fn invalid_cap_is_unprocessable() {
    let base = spawn(AppState::new()).await;
    let client = Client::new();
    let handle = generate(&client, &base, "S6", 50, 1).await;
    let (status, body) = post(
        &client,
        &format!("{base}/datasets/{}/aggregate", handle.id),
        json!({"capA": 0}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let err: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(err["error"]["code"], "InvalidCap");
}

#[tokio::test]
async fn malformed_and_unknown_requests() {
    let base = spawn(AppState::new()).await;
    let client = Client::new();
    let handle = generate(&client, &base, "S6", 10, 1).await;
    let resp = client
        .post(format!("{base}/datasets/{}/aggregate", handle.id))
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    let err: Value = resp.json().await.unwrap();
    assert_eq!(err["error"]["code"], "MalformedBody");

    let (status, body) = post(&client, &format!("{base}/datasets/ffff/aggregate"), json!({})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let err: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(err["error"]["code"], "NotFound");

    let (status, _) = post(
        &client,
        &format!("{base}/generate"),
        json!({"variant": "S1", "n": 0, "seed": 1}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn brushing_everything_reproduces_the_base() {
    let base = spawn(AppState::new()).await;
    let client = Client::new();
    let handle = generate(&client, &base, "S4", 300, 5).await;
    let (status, body) = post(
        &client,
        &format!("{base}/datasets/{}/brush", handle.id),
        json!({"brush": {"type": "cardinalityAtLeast", "dim": "A", "card": 0}}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    let overlay: BrushOverlay = serde_json::from_slice(&body).unwrap();
    assert_eq!(overlay.base, overlay.brushed);
    assert_eq!(overlay.item_ids, (0..300).collect::<Vec<_>>());
}

const SAMPLE_CSV: &str = "A,B\nMusic;Family,Fun;Resp\nTraffic,Resp\nTraffic,Fun;Resp\n";

#[tokio::test]
async fn uploaded_csv_drills_down() {
    let base = spawn(AppState::new()).await;
    let client = Client::new();
    let resp = client
        .post(format!("{base}/datasets?name=sample"))
        .header("content-type", "text/csv")
        .body(SAMPLE_CSV)
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::CREATED);
    let handle: DatasetHandle = resp.json().await.unwrap();
    assert_eq!(handle.name, "sample");
    assert_eq!(handle.universe_b.elements, ["Fun", "Resp"]);

    let url = format!("{base}/datasets/{}", handle.id);
    let (status, body) = post(
        &client,
        &format!("{url}/combinations"),
        json!({"col": 2, "row": 1, "k": 0, "l": 1}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    let list: Value = serde_json::from_slice(&body).unwrap();
    let total: Rational = serde_json::from_value(list["totalValue"].clone()).unwrap();
    assert_eq!(total, Rational::new(1, 2));
    assert_eq!(list["entries"].as_array().unwrap().len(), 1);

    let (status, body) = post(&client, &format!("{url}/detail"), json!({"eA": 2, "eB": 1})).await;
    assert_eq!(status, StatusCode::OK);
    let detail: Value = serde_json::from_slice(&body).unwrap();
    assert!(!detail["cells"].as_array().unwrap().is_empty());

    let csv = client
        .post(format!("{url}/aggregate"))
        .header("accept", "text/csv")
        .send()
        .await
        .unwrap();
    assert_eq!(csv.headers()["content-type"], "text/csv");
    let text = csv.text().await.unwrap();
    assert!(text.starts_with("col,row,k,l,colLabel,rowLabel,num,den,decimal\n"));

    let listed: Vec<DatasetHandle> = reqwest::get(format!("{base}/datasets"))
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(listed, vec![handle]);
}

#[tokio::test]
async fn datasets_persist_across_restarts() {
    let dir = std::env::temp_dir().join(format!("crossset-service-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let base = spawn(AppState::with_data_dir(&dir).await.unwrap()).await;
    let handle = generate(&Client::new(), &base, "S2", 40, 9).await;

    let reloaded = AppState::with_data_dir(&dir).await.unwrap();
    assert_eq!(reloaded.list().await, vec![handle]);
    std::fs::remove_dir_all(&dir).unwrap();
}
