mod common;

use std::io::Cursor;
use std::sync::Arc;

use image::{ImageFormat, Rgb, RgbImage};
use provenance::interchange::{toy_embed, Label, RecordMeta};
use provenance::pipeline::{
    service, ClassifyResponse, Engine, EngineConfig, FrameworkMode, Health, Prediction,
};
use reqwest::StatusCode;
use serde_json::{json, Value};

struct Server {
    base: String,
    shutdown: tokio::sync::oneshot::Sender<()>,
    handle: tokio::task::JoinHandle<std::io::Result<()>>,
}

async fn start(engine: Arc<Engine>) -> Server {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let (shutdown, rx) = tokio::sync::oneshot::channel::<()>();
    let handle = tokio::spawn(service::serve(engine, listener, async {
        let _ = rx.await;
    }));
    Server { base, shutdown, handle }
}

impl Server {
    async fn stop(self) {
        let _ = self.shutdown.send(());
        self.handle.await.unwrap().unwrap();
    }
}

async fn error_code(resp: reqwest::Response) -> (StatusCode, String) {
    let status = resp.status();
    let body: Value = resp.json().await.unwrap();
    assert!(body["message"].is_string());
    (status, body["error"].as_str().unwrap().to_string())
}

#[tokio::test]
async fn rejects_bad_requests_with_reasons() {
    let fx = common::fixture(1, 0);
    let server = start(Arc::new(fx.engine)).await;
    let client = reqwest::Client::new();
    let url = format!("{}/classify", server.base);

    let resp = client
        .post(&url)
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(error_code(resp).await, (StatusCode::BAD_REQUEST, "malformed_body".into()));

    let resp = client.post(&url).json(&json!({"dim": 3, "components": [1.0, 2.0]})).send().await.unwrap();
    assert_eq!(error_code(resp).await, (StatusCode::BAD_REQUEST, "malformed_body".into()));

    let resp = client.post(&url).json(&json!({"dim": 3, "components": [1.0, 2.0, 3.0]})).send().await.unwrap();
    assert_eq!(
        error_code(resp).await,
        (StatusCode::UNPROCESSABLE_ENTITY, "dimension_mismatch".into())
    );

    let zeros = vec![0.0; common::FIXTURE_DIM];
    let resp = client
        .post(&url)
        .json(&json!({"dim": common::FIXTURE_DIM, "components": zeros}))
        .send()
        .await
        .unwrap();
    assert_eq!(error_code(resp).await, (StatusCode::UNPROCESSABLE_ENTITY, "zero_vector".into()));

    let resp = client.post(&url).header("content-type", "text/plain").body("hi").send().await.unwrap();
    assert_eq!(
        error_code(resp).await,
        (StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_media_type".into())
    );

    let resp = client
        .post(&url)
        .header("content-type", "image/png")
        .body(vec![1u8, 2, 3])
        .send()
        .await
        .unwrap();
    assert_eq!(error_code(resp).await, (StatusCode::BAD_REQUEST, "undecodable_image".into()));

    let v = &fx.ai[0].1;
    let resp = client
        .post(format!("{url}?mode=telepathy"))
        .json(&json!({"dim": v.dim(), "components": v.as_slice()}))
        .send()
        .await
        .unwrap();
    assert_eq!(error_code(resp).await, (StatusCode::BAD_REQUEST, "bad_mode".into()));
    server.stop().await;
}

#[tokio::test]
async fn mode_override_shapes_the_response() {
    let fx = common::fixture(2, 0);
    let server = start(Arc::new(fx.engine)).await;
    let client = reqwest::Client::new();
    let v = &fx.human[3].1;
    let body = json!({"dim": v.dim(), "components": v.as_slice()});
    for (mode, verified_present, sims_present) in
        [("hash_only", true, false), ("vector_only", false, true), ("hybrid", true, true)]
    {
        let raw: Value = client
            .post(format!("{}/classify?mode={mode}", server.base))
            .json(&body)
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        assert_eq!(raw["mode"], mode);
        assert_eq!(raw["prediction"], "human");
        assert_eq!(raw.get("verified").is_some(), verified_present, "{mode}");
        assert_eq!(raw.get("ai_similarity").is_some(), sims_present, "{mode}");
        assert_eq!(raw.get("nearest_human_id").is_some(), sims_present, "{mode}");
    }
    server.stop().await;
}

#[tokio::test]
async fn image_upload_is_toy_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let engine = Engine::init(dir.path(), 256, EngineConfig::default()).unwrap();
    let ai_img = RgbImage::from_fn(64, 64, |x, _| Rgb([(x * 4) as u8, 0, 0]));
    let human_img = RgbImage::from_fn(64, 64, |_, y| Rgb([0, (y * 4) as u8, 90]));
    let rec = |id: &str, label, img: &RgbImage| (RecordMeta::new(id, id, label, "train"), toy_embed(img).unwrap());
    engine.ingest(Label::Ai, "train", &[rec("a", Label::Ai, &ai_img)]).unwrap();
    engine.ingest(Label::Human, "train", &[rec("h", Label::Human, &human_img)]).unwrap();
    let server = start(Arc::new(engine)).await;

    let mut png = Vec::new();
    ai_img.write_to(&mut Cursor::new(&mut png), ImageFormat::Png).unwrap();
    let r: ClassifyResponse = reqwest::Client::new()
        .post(format!("{}/classify", server.base))
        .header("content-type", "image/png")
        .body(png)
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(r.prediction, Prediction::Ai);
    assert_eq!(r.verified, Some(true));
    assert_eq!(r.nearest_ai_id.as_deref(), Some("a"));
    server.stop().await;
}

#[tokio::test]
async fn health_on_fresh_and_empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let engine = Engine::init(dir.path(), 4, EngineConfig::default()).unwrap();
    let server = start(Arc::new(engine)).await;
    let client = reqwest::Client::new();
    let resp = client.get(format!("{}/health", server.base)).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let h: Health = resp.json().await.unwrap();
    assert_eq!(h.status, "ok");
    assert!(h.ledgers.iter().all(|l| l.chain == "valid"));
    assert!(h.collections.iter().all(|c| c.generation == 0));

    let resp = client
        .post(format!("{}/classify", server.base))
        .json(&json!({"dim": 4, "components": [1.0, 0.0, 0.0, 0.0]}))
        .send()
        .await
        .unwrap();
    assert_eq!(
        error_code(resp).await,
        (StatusCode::SERVICE_UNAVAILABLE, "not_determinable".into())
    );
    server.stop().await;
}

#[tokio::test]
async fn health_reports_tampering_after_start() {
    let fx = common::fixture(4, 0);
    let path = fx.dir.path().join("ledgers/human.lgr");
    let server = start(Arc::new(fx.engine)).await;
    let mut bytes = std::fs::read(&path).unwrap();
    let n = bytes.len();
    bytes[n - 50] ^= 0xFF;
    std::fs::write(&path, bytes).unwrap();
    let resp = reqwest::get(format!("{}/health", server.base)).await.unwrap();
    assert_eq!(resp.status(), StatusCode::SERVICE_UNAVAILABLE);
    let h: Health = resp.json().await.unwrap();
    assert_eq!(h.ledgers[1].chain, "invalid");
    assert_eq!(h.ledgers[1].first_bad_index, Some(19));
    server.stop().await;
}

#[tokio::test]
async fn unseen_vector_near_ai_cluster_is_ai_but_unverified() {
    let fx = common::fixture(5, 0);
    let mut near = fx.ai[0].1.as_slice().to_vec();
    near[0] += 0.01;
    let server = start(Arc::new(fx.engine)).await;
    let r: ClassifyResponse = reqwest::Client::new()
        .post(format!("{}/classify", server.base))
        .json(&json!({"dim": near.len(), "components": near}))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!((r.prediction, r.verified, r.mode), (Prediction::Ai, Some(false), FrameworkMode::Hybrid));
    assert!(!r.conflict);
    server.stop().await;
}
