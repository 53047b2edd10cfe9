#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, HeaderMap, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lectures_server::config::Config;
use lectures_server::http::{router, AppState};
use lectures_server::repo::{Change, CommitOutcome, Repository};
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

pub const BASE: &str = lectures_testkit::BASE;

pub struct Server {
    pub dir: TempDir,
    pub repo: Arc<Repository>,
    pub app: Router,
}

pub fn config() -> Config {
    Config::default().with_base_uri(BASE)
}

pub fn server() -> Server {
    let dir = tempfile::tempdir().unwrap();
    let repo = Arc::new(Repository::open(dir.path().join("repo"), config()).unwrap());
    let app = router(AppState { repo: Arc::clone(&repo) }, None);
    Server { dir, repo, app }
}

pub fn puts(files: &BTreeMap<String, String>) -> BTreeMap<String, Change> {
    files.iter().map(|(k, v)| (k.clone(), Change::Put(v.clone()))).collect()
}

/// A server whose HEAD holds the sample corpus.
pub fn corpus_server() -> Server {
    let s = server();
    let outcome = s.repo.commit(&puts(&lectures_testkit::corpus_files()), "test", "corpus").unwrap();
    assert_eq!(outcome, CommitOutcome::Accepted(1));
    s
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: String,
}

impl Reply {
    pub fn content_type(&self) -> &str {
        self.headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("")
    }

    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

pub async fn send(app: &Router, request: Request<Body>) -> Reply {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        headers,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub async fn get(app: &Router, uri: &str, accept: Option<&str>) -> Reply {
    let mut builder = Request::get(uri);
    if let Some(a) = accept {
        builder = builder.header(header::ACCEPT, a);
    }
    send(app, builder.body(Body::empty()).unwrap()).await
}

pub async fn post_json(app: &Router, uri: &str, body: &Value) -> Reply {
    let request = Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    send(app, request).await
}

/// `(concept, example)` pairs from a results document.
pub fn pairs(results: &Value) -> Vec<(String, String)> {
    results["results"]["bindings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| {
            (
                b["concept"]["value"].as_str().unwrap().to_string(),
                b["example"]["value"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}
