//! Linked Data endpoints over a [`Repository`].

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lectures_core::ontology::emit_ontology;
use lectures_core::query::{self, Binding, Pattern};
use lectures_core::rdf::{self, Term, TripleSet, Vocabulary};
use lectures_core::render::{render_document, PageOptions, RenderContext};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::repo::{Change, CommitOutcome, RepoError, Repository, Snapshot};

pub const OMDOC: &str = "application/omdoc+xml";
pub const TURTLE: &str = "text/turtle; charset=utf-8";
pub const NTRIPLES: &str = "application/n-triples";
pub const XHTML: &str = "application/xhtml+xml; charset=utf-8";
pub const HTML: &str = "text/html; charset=utf-8";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Media {
    Xhtml,
    Html,
    OmDoc,
    Turtle,
    NTriples,
}

impl Media {
    /// Offered representations in server preference order.
    pub const ALL: [Media; 5] = [Media::Xhtml, Media::Html, Media::OmDoc, Media::Turtle, Media::NTriples];

    pub fn essence(self) -> &'static str {
        match self {
            Media::Xhtml => "application/xhtml+xml",
            Media::Html => "text/html",
            Media::OmDoc => "application/omdoc+xml",
            Media::Turtle => "text/turtle",
            Media::NTriples => "application/n-triples",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            Media::Xhtml => XHTML,
            Media::Html => HTML,
            Media::OmDoc => OMDOC,
            Media::Turtle => TURTLE,
            Media::NTriples => NTRIPLES,
        }
    }
}

struct Range<'a> {
    kind: &'a str,
    sub: &'a str,
    q: f32,
    position: usize,
}

fn parse_accept(accept: &str) -> Vec<Range<'_>> {
    let mut out = Vec::new();
    for (position, item) in accept.split(',').enumerate() {
        let mut parts = item.split(';');
        let Some((kind, sub)) = parts.next().and_then(|m| m.trim().split_once('/')) else {
            continue;
        };
        let mut q = 1.0;
        for param in parts {
            if let Some((k, v)) = param.split_once('=') {
                if k.trim().eq_ignore_ascii_case("q") {
                    q = v.trim().parse::<f32>().unwrap_or(0.0).clamp(0.0, 1.0);
                }
            }
        }
        out.push(Range {
            kind: kind.trim(),
            sub: sub.trim(),
            q,
            position,
        });
    }
    out
}

/// Picks a representation for an `Accept` header value.
///
/// Each offer takes the quality of its most specific matching range; the
/// highest quality wins, then the more specific match, then the earlier
/// range, then server preference. `None` when nothing acceptable is offered.
pub fn negotiate(accept: Option<&str>) -> Option<Media> {
    let accept = match accept.map(str::trim) {
        None | Some("") => return Some(Media::Xhtml),
        Some(a) => a,
    };
    let ranges = parse_accept(accept);
    let mut best: Option<((f32, u8, std::cmp::Reverse<usize>), Media)> = None;
    for media in Media::ALL {
        let (kind, sub) = media.essence().split_once('/').expect("media type");
        let matched = ranges
            .iter()
            .filter_map(|r| {
                let specificity = if r.kind.eq_ignore_ascii_case(kind) && r.sub.eq_ignore_ascii_case(sub) {
                    2
                } else if r.kind.eq_ignore_ascii_case(kind) && r.sub == "*" {
                    1
                } else if r.kind == "*" && r.sub == "*" {
                    0
                } else {
                    return None;
                };
                Some((specificity, r))
            })
            .max_by_key(|(s, _)| *s);
        let Some((specificity, range)) = matched else {
            continue;
        };
        if range.q <= 0.0 {
            continue;
        }
        let key = (range.q, specificity, std::cmp::Reverse(range.position));
        if best.as_ref().is_none_or(|(k, _)| key.partial_cmp(k) == Some(std::cmp::Ordering::Greater)) {
            best = Some((key, media));
        }
    }
    best.map(|(_, m)| m)
}

#[derive(Clone)]
pub struct AppState {
    pub repo: Arc<Repository>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<RepoError> for ApiError {
    fn from(e: RepoError) -> Self {
        match e {
            RepoError::NoSuchRevision(_) => ApiError::bad_request(e.to_string()),
            RepoError::NoSuchPath { .. } => ApiError::not_found(e.to_string()),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Decoded query string; repeated keys keep every value.
struct Params(Vec<(String, String)>);

impl Params {
    fn parse(raw: Option<String>) -> Self {
        let raw = raw.unwrap_or_default();
        Params(form_urlencoded::parse(raw.as_bytes()).into_owned().collect())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn all(&self, key: &str) -> Vec<&str> {
        self.0.iter().filter(|(k, _)| k == key).map(|(_, v)| v.as_str()).collect()
    }

    fn rev(&self) -> ApiResult<Option<u64>> {
        match self.get("rev") {
            None => Ok(None),
            Some(r) => r
                .parse::<u64>()
                .map(Some)
                .map_err(|_| ApiError::bad_request(format!("malformed revision `{r}`"))),
        }
    }
}

fn snapshot(state: &AppState, params: &Params) -> ApiResult<Arc<Snapshot>> {
    let rev = params.rev()?;
    let repo = Arc::clone(&state.repo);
    Ok(repo.snapshot(rev)?)
}

fn vocab(state: &AppState) -> Vocabulary {
    Vocabulary::new(state.repo.config().ontology_ns.clone())
}

fn with_type(content_type: &'static str, body: String) -> Response {
    ([(header::CONTENT_TYPE, HeaderValue::from_static(content_type))], body).into_response()
}

/// Accepts a theory id or its full URI.
fn theory_uri(snapshot: &Snapshot, theory: &str) -> String {
    if theory.contains("://") {
        theory.to_string()
    } else {
        snapshot.build.collection.uris().theory(theory)
    }
}

fn term_json(term: &Term) -> Value {
    match term {
        Term::Iri(i) => json!({ "type": "uri", "value": i }),
        Term::Literal(l) => json!({ "type": "literal", "value": l }),
    }
}

fn results_json(vars: &[String], rows: &[Binding]) -> Value {
    let bindings: Vec<Value> = rows
        .iter()
        .map(|b| {
            let map: serde_json::Map<String, Value> =
                b.iter().map(|(k, v)| (k.clone(), term_json(v))).collect();
            Value::Object(map)
        })
        .collect();
    json!({ "head": { "vars": vars }, "results": { "bindings": bindings } })
}

fn pairs_json(pairs: &[(String, String)]) -> Value {
    let rows: Vec<Binding> = pairs
        .iter()
        .map(|(c, e)| {
            BTreeMap::from([
                ("concept".to_string(), Term::Iri(c.clone())),
                ("example".to_string(), Term::Iri(e.clone())),
            ])
        })
        .collect();
    results_json(&["concept".into(), "example".into()], &rows)
}

fn triples_json(triples: &TripleSet) -> Value {
    let list: Vec<Value> = triples
        .iter()
        .map(|t| {
            json!({
                "subject": t.subject,
                "predicate": t.predicate,
                "object": term_json(&t.object),
            })
        })
        .collect();
    json!({ "triples": list })
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let mut app = Router::new()
        .route("/", get(index))
        .route("/omdoc/{theory}", get(theory))
        .route("/neighborhood", get(neighborhood))
        .route("/query", post(query_handler))
        .route("/gaps", get(gaps))
        .route("/examples-for", get(examples_for))
        .route("/ontology", get(ontology))
        .route("/source/{*path}", get(source))
        .route("/commit", post(commit))
        .route("/revisions", get(revisions));
    if let Some(dir) = static_dir {
        app = app.nest_service("/static", ServeDir::new(dir));
    }
    app.with_state(state)
}

async fn index(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let head = state.repo.head();
    let uris = head.build.collection.uris();
    let theories: Vec<Value> = head
        .build
        .collection
        .theories
        .keys()
        .map(|id| json!({ "id": id, "uri": uris.theory(id) }))
        .collect();
    Ok(Json(json!({ "head": head.info.number, "theories": theories })))
}

async fn theory(
    State(state): State<AppState>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let params = Params::parse(raw);
    let snapshot = snapshot(&state, &params)?;
    let artifacts = snapshot
        .build
        .theories
        .get(&id)
        .ok_or_else(|| ApiError::not_found(format!("no theory `{id}`")))?;
    let accept = match headers.get(header::ACCEPT) {
        None => None,
        Some(v) => Some(
            v.to_str()
                .map_err(|_| ApiError::bad_request("unreadable Accept header"))?,
        ),
    };
    let media = negotiate(accept).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_ACCEPTABLE,
            format!(
                "available: {}",
                Media::ALL.map(Media::essence).join(", ")
            ),
        )
    })?;
    let body = match media {
        Media::OmDoc => artifacts.omdoc.clone(),
        Media::Turtle => rdf::to_turtle(&artifacts.triples, &vocab(&state)),
        Media::NTriples => rdf::to_ntriples(&artifacts.triples),
        Media::Xhtml | Media::Html => match params.get("notation") {
            None => artifacts.xhtml.clone(),
            Some(variant) => {
                let collection = &snapshot.build.collection;
                let ctx = RenderContext::from_collection(collection).with_variant(Some(variant));
                let options = PageOptions {
                    ontology_ns: state.repo.config().ontology_ns.clone(),
                    ..PageOptions::default()
                };
                render_document(&collection.theories[&id], collection, &ctx, &options)
                    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
            }
        },
    };
    let mut response = with_type(media.content_type(), body);
    response
        .headers_mut()
        .insert(header::VARY, HeaderValue::from_static("Accept"));
    Ok(response)
}

async fn neighborhood(
    State(state): State<AppState>,
    RawQuery(raw): RawQuery,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let params = Params::parse(raw);
    let uri = params
        .get("uri")
        .ok_or_else(|| ApiError::bad_request("missing `uri` parameter"))?;
    let snapshot = snapshot(&state, &params)?;
    let triples = query::neighborhood(&snapshot.store, uri)
        .ok_or_else(|| ApiError::not_found(format!("nothing is known about <{uri}>")))?;
    let wants_turtle = headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|a| a.contains("text/turtle"));
    if wants_turtle {
        Ok(with_type(TURTLE, rdf::to_turtle(&triples, &vocab(&state))))
    } else {
        Ok(Json(triples_json(&triples)).into_response())
    }
}

fn pattern_from_json(value: &Value) -> ApiResult<Pattern> {
    if let Some(text) = value.get("pattern").and_then(Value::as_str) {
        return Pattern::parse(text).map_err(|e| ApiError::bad_request(e.to_string()));
    }
    let list = value
        .get("patterns")
        .and_then(Value::as_array)
        .ok_or_else(|| ApiError::bad_request("expected `pattern`, `patterns` or `query`"))?;
    let mut triples = Vec::new();
    for item in list {
        match item {
            Value::String(text) => {
                let p = Pattern::parse(text).map_err(|e| ApiError::bad_request(e.to_string()))?;
                triples.extend(p.triples);
            }
            Value::Array(parts) if parts.len() == 3 => {
                let text: Vec<&str> = parts
                    .iter()
                    .map(|p| p.as_str().ok_or_else(|| ApiError::bad_request("pattern terms must be strings")))
                    .collect::<ApiResult<_>>()?;
                let line = Pattern::parse(&format!("{} {} {}", quote_term(text[0]), text[1], quote_term(text[2])))
                    .map_err(|e| ApiError::bad_request(e.to_string()))?;
                triples.extend(line.triples);
            }
            _ => return Err(ApiError::bad_request("each pattern is a string or an [s, p, o] array")),
        }
    }
    Pattern::new(triples).map_err(|e| ApiError::bad_request(e.to_string()))
}

/// Bare absolute IRIs in array form are accepted without angle brackets.
fn quote_term(t: &str) -> String {
    if t.contains("://") && !t.starts_with('<') && !t.starts_with('"') {
        format!("<{t}>")
    } else {
        t.to_string()
    }
}

fn prerequisites(value: &Value) -> ApiResult<Vec<String>> {
    match value.get("prereqs") {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| ApiError::bad_request("`prereqs` must be strings"))
            })
            .collect(),
        Some(_) => Err(ApiError::bad_request("`prereqs` must be an array")),
    }
}

fn run_examples_for(snapshot: &Snapshot, topic: &str, prereqs: &[String]) -> Value {
    let topic = theory_uri(snapshot, topic);
    let prereqs: Vec<String> = prereqs.iter().map(|p| theory_uri(snapshot, p)).collect();
    let pairs = query::examples_for(&snapshot.store, &topic, prereqs.iter().map(String::as_str));
    pairs_json(&pairs)
}

async fn query_handler(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let value: Value =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid JSON: {e}")))?;
    let rev = match value.get("rev") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| ApiError::bad_request("`rev` must be a revision number"))?,
        ),
    };
    let snapshot = state.repo.snapshot(rev)?;
    match value.get("query").and_then(Value::as_str) {
        Some("gaps") => Ok(Json(serde_json::to_value(query::find_gaps(&snapshot.store)).expect("serializable"))),
        Some("examples-for") => {
            let topic = value
                .get("topic")
                .and_then(Value::as_str)
                .ok_or_else(|| ApiError::bad_request("`examples-for` needs a `topic`"))?;
            Ok(Json(run_examples_for(&snapshot, topic, &prerequisites(&value)?)))
        }
        Some(other) => Err(ApiError::bad_request(format!("unknown query `{other}`"))),
        None => {
            let pattern = pattern_from_json(&value)?;
            let rows = snapshot
                .store
                .select(&pattern)
                .map_err(|e| ApiError::bad_request(e.to_string()))?;
            Ok(Json(results_json(&pattern.variables(), &rows)))
        }
    }
}

async fn gaps(State(state): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<Json<Value>> {
    let snapshot = snapshot(&state, &Params::parse(raw))?;
    Ok(Json(serde_json::to_value(query::find_gaps(&snapshot.store)).expect("serializable")))
}

async fn examples_for(State(state): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<Json<Value>> {
    let params = Params::parse(raw);
    let snapshot = snapshot(&state, &params)?;
    let topic = params
        .get("topic")
        .ok_or_else(|| ApiError::bad_request("missing `topic` parameter"))?;
    let prereqs: Vec<String> = params.all("prereq").into_iter().map(str::to_string).collect();
    Ok(Json(run_examples_for(&snapshot, topic, &prereqs)))
}

async fn ontology(State(state): State<AppState>) -> Response {
    with_type(TURTLE, emit_ontology(&vocab(&state)))
}

async fn source(
    State(state): State<AppState>,
    Path(path): Path<String>,
    RawQuery(raw): RawQuery,
) -> ApiResult<Response> {
    let rev = Params::parse(raw).rev()?;
    let text = state.repo.checkout(&path, rev)?;
    Ok(with_type("text/plain; charset=utf-8", text))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CommitRequest {
    #[serde(default)]
    author: String,
    #[serde(default)]
    message: String,
    changes: BTreeMap<String, Option<String>>,
}

async fn commit(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let request: CommitRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid commit: {e}")))?;
    let changes: BTreeMap<String, Change> = request
        .changes
        .into_iter()
        .map(|(path, text)| (path, text.map_or(Change::Delete, Change::Put)))
        .collect();
    let repo = Arc::clone(&state.repo);
    let outcome = tokio::task::spawn_blocking(move || repo.commit(&changes, &request.author, &request.message))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(match outcome {
        CommitOutcome::Accepted(n) => {
            (StatusCode::OK, Json(json!({ "outcome": "accepted", "revision": n }))).into_response()
        }
        CommitOutcome::Rejected(problems) => {
            let messages: Vec<String> = problems.iter().map(ToString::to_string).collect();
            (
                StatusCode::UNPROCESSABLE_ENTITY,
                Json(json!({ "outcome": "rejected", "problems": problems, "messages": messages })),
            )
                .into_response()
        }
    })
}

async fn revisions(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let log = state.repo.log()?;
    Ok(Json(serde_json::to_value(log).expect("serializable")))
}
