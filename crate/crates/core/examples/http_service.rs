//! Drives the HTTP API in-process: upload a corpus, run an analysis, fetch
//! the map and the posts behind one place, and run a simulation.

use axum::body::Body;
use axum::http::{Request, StatusCode};
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::server::app;
use beliefmap::store::Store;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

async fn call(router: &axum::Router, method: &str, uri: &str, body: String) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::from(body))
        .expect("request");
    let resp = router.clone().oneshot(req).await.expect("infallible");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes().to_vec();
    (status, bytes)
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("json body")
}

#[tokio::main(flavor = "current_thread")]
async fn main() -> beliefmap::Result<()> {
    let dir = std::env::temp_dir().join("beliefmap-store-example");
    let router = app(Store::open(&dir)?, 100_000);

    let corpus = generate_synthetic_corpus(&SyntheticSpec::four_rooms(), 1)?;
    let (status, body) = call(&router, "POST", "/corpora", corpus.to_interchange()?).await;
    let created = json(&body);
    println!("POST /corpora -> {status} {}", created["counts"]);
    let corpus_id = created["corpus_id"].as_str().expect("id").to_string();

    let (status, body) = call(
        &router,
        "POST",
        &format!("/corpora/{corpus_id}/analyses"),
        String::new(),
    )
    .await;
    let run = json(&body);
    let run_id = run["run_id"].as_str().expect("run id").to_string();
    println!("POST analyses -> {status} {}", run["status"]);

    let (_, dot) = call(
        &router,
        "GET",
        &format!("/analyses/{run_id}/map?format=dot"),
        String::new(),
    )
    .await;
    println!(
        "{}",
        String::from_utf8_lossy(&dot)
            .lines()
            .take(8)
            .collect::<Vec<_>>()
            .join("\n")
    );

    let uri = format!("/analyses/{run_id}/sequences/0/posts?group=group1&contains=goblin,orc,stairs");
    let (_, posts) = call(&router, "GET", &uri, String::new()).await;
    let posts = json(&posts);
    println!(
        "{} group1 posts mention goblin, orc and stairs",
        posts.as_array().map_or(0, Vec::len)
    );

    let (status, body) = call(&router, "POST", "/simulations", r#"{"sim": {"dimensions": 2, "agent_count": 100, "sih": 2.0, "speed": 0.0005, "steps": 2000, "align_weight": 0.4, "cohesion_weight": 0.35, "noise_angle": 0.1745, "cells_per_axis": 10, "post_interval": 1, "seed": 1}}"#.to_string()).await;
    let sim = json(&body);
    println!(
        "POST /simulations -> {status} regime {} comparison {}",
        sim["regime"]["regime"], sim["comparison"]
    );
    Ok(())
}
