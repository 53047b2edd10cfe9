mod common;

use std::sync::Arc;

use axum::http::{header, StatusCode};
use common::{corpus_server, get, pairs, post_json, server, BASE};
use lectures_server::http::{router, AppState};
use lectures_testkit::parse_turtle;
use serde_json::json;

fn uri(fragment: &str) -> String {
    format!("{BASE}/omdoc/{fragment}")
}

#[tokio::test]
async fn index_lists_theories() {
    let s = corpus_server();
    let r = get(&s.app, "/", None).await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["head"], 1);
    assert_eq!(v["theories"].as_array().unwrap().len(), 6);
    assert_eq!(v["theories"][5]["uri"], uri("sets"));
}

#[tokio::test]
async fn theory_errors() {
    let s = corpus_server();
    assert_eq!(get(&s.app, "/omdoc/nothing", None).await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&s.app, "/omdoc/sets", Some("image/png")).await.status, StatusCode::NOT_ACCEPTABLE);
    assert_eq!(get(&s.app, "/omdoc/sets?rev=abc", None).await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&s.app, "/omdoc/sets?rev=7", None).await.status, StatusCode::BAD_REQUEST);
    let ok = get(&s.app, "/omdoc/sets?rev=1", None).await;
    assert_eq!(ok.status, StatusCode::OK);
    assert_eq!(ok.headers[header::VARY], "Accept");
}

#[tokio::test]
async fn representations() {
    let s = corpus_server();
    let cases = [
        (None, "application/xhtml+xml; charset=utf-8", "<!DOCTYPE html>"),
        (Some("*/*"), "application/xhtml+xml; charset=utf-8", "<!DOCTYPE html>"),
        (Some("text/html"), "text/html; charset=utf-8", "<!DOCTYPE html>"),
        (Some("application/omdoc+xml"), "application/omdoc+xml", "<?xml"),
        (Some("text/turtle"), "text/turtle; charset=utf-8", "@prefix o:"),
        (Some("application/n-triples"), "application/n-triples", "<http://"),
        (Some("text/turtle;q=0.2, application/omdoc+xml;q=0.9"), "application/omdoc+xml", "<?xml"),
    ];
    for (accept, content_type, start) in cases {
        let r = get(&s.app, "/omdoc/sets", accept).await;
        assert_eq!(r.status, StatusCode::OK, "{accept:?}");
        assert_eq!(r.content_type(), content_type, "{accept:?}");
        assert!(r.body.starts_with(start), "{accept:?}: {}", &r.body[..40]);
    }
    let head = s.repo.head();
    let nt = get(&s.app, "/omdoc/graphs", Some("application/n-triples")).await;
    assert_eq!(lectures_testkit::parse_ntriples(&nt.body).unwrap(), head.build.theories["graphs"].triples);
}

#[tokio::test]
async fn notation_parameter_switches_variant() {
    let s = corpus_server();
    let default = get(&s.app, "/omdoc/combinat", None).await.body;
    let fr = get(&s.app, "/omdoc/combinat?notation=fr", None).await.body;
    let unknown = get(&s.app, "/omdoc/combinat?notation=ru", None).await.body;
    assert!(fr.contains("<msubsup>") && !default.contains("<msubsup>"));
    assert_eq!(unknown, default);
}

#[tokio::test]
async fn neighborhood() {
    let s = corpus_server();
    let union = uri("sets#union");
    let r = get(&s.app, &format!("/neighborhood?uri={}", urlencode(&union)), None).await;
    assert_eq!(r.status, StatusCode::OK);
    let triples = r.json()["triples"].as_array().unwrap().clone();
    let has = |s: &str, p: &str, o: &str| {
        triples.iter().any(|t| t["subject"] == s && t["predicate"] == p && t["object"]["value"] == o)
    };
    assert!(has(&uri("sets"), "http://ex.org/ontology#declares", &union));
    assert!(has(&uri("sets#union-def"), "http://ex.org/ontology#defines", &union));
    assert!(has(&uri("sets#union-ex"), "http://ex.org/ontology#exemplifies", &union));
    assert!(has(
        &uri("sets#union-ex"),
        "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
        "http://ex.org/ontology#Example"
    ));

    let ttl = get(&s.app, &format!("/neighborhood?uri={}", urlencode(&union)), Some("text/turtle")).await;
    assert_eq!(ttl.content_type(), "text/turtle; charset=utf-8");
    assert_eq!(parse_turtle(&ttl.body).unwrap().len(), triples.len());

    assert_eq!(get(&s.app, "/neighborhood", None).await.status, StatusCode::BAD_REQUEST);
    let missing = get(&s.app, &format!("/neighborhood?uri={}", urlencode(&uri("sets#nothing"))), None).await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
}

fn urlencode(s: &str) -> String {
    form_urlencoded::byte_serialize(s.as_bytes()).collect()
}

#[tokio::test]
async fn pattern_queries() {
    let s = corpus_server();
    let r = post_json(&s.app, "/query", &json!({ "pattern": "?d o:defines <http://example.org/notes/omdoc/sets#union>" })).await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["head"]["vars"], json!(["d"]));
    assert_eq!(v["results"]["bindings"], json!([{ "d": { "type": "uri", "value": uri("sets#union-def") } }]));

    let r = post_json(
        &s.app,
        "/query",
        &json!({ "patterns": [["?t", "o:imports+", BASE.to_string() + "/omdoc/sets"], "?t a o:Theory"] }),
    )
    .await;
    let mut got: Vec<String> = r.json()["results"]["bindings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["t"]["value"].as_str().unwrap().to_string())
        .collect();
    got.sort();
    let want: Vec<String> = ["combinat", "formal-languages", "graphs", "operating-systems"].map(uri).to_vec();
    assert_eq!(got, want);

    let literal = post_json(&s.app, "/query", &json!({ "pattern": "?s o:title \"union-def\"" })).await.json();
    assert_eq!(literal["results"]["bindings"][0]["s"]["value"], uri("sets#union-def"));

    for bad in [json!({ "pattern": "?s ?p" }), json!({ "pattern": "?s ?p+ ?o" }), json!({ "nothing": 1 }), json!({ "query": "dance" })] {
        assert_eq!(post_json(&s.app, "/query", &bad).await.status, StatusCode::BAD_REQUEST, "{bad}");
    }
}

#[tokio::test]
async fn canned_queries() {
    let s = corpus_server();
    let via_get = get(&s.app, "/examples-for?topic=graphs&prereq=formal-languages", None).await.json();
    let via_post = post_json(
        &s.app,
        "/query",
        &json!({ "query": "examples-for", "topic": uri("graphs"), "prereqs": ["formal-languages"] }),
    )
    .await
    .json();
    assert_eq!(via_get, via_post);
    assert_eq!(via_get["head"]["vars"], json!(["concept", "example"]));
    assert!(pairs(&via_get).contains(&(uri("graphs#tree"), uri("formal-languages#parse-tree"))));

    let gaps = get(&s.app, "/gaps", None).await.json();
    assert_eq!(gaps, post_json(&s.app, "/query", &json!({ "query": "gaps" })).await.json());
    assert!(gaps["concepts_without_examples"].as_array().unwrap().iter().all(|c| c.is_string()));
    assert_eq!(get(&s.app, "/examples-for", None).await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn ontology_and_sources() {
    let s = corpus_server();
    let o = get(&s.app, "/ontology", None).await;
    assert_eq!(o.content_type(), "text/turtle; charset=utf-8");
    assert!(o.body.contains("o:exemplifies rdfs:domain o:Example"));
    assert!(parse_turtle(&o.body).is_ok());

    let src = get(&s.app, "/source/sets.stex", None).await;
    assert_eq!(src.status, StatusCode::OK);
    assert_eq!(src.body, lectures_testkit::corpus_files()["sets.stex"]);
    assert_eq!(get(&s.app, "/source/none.stex", None).await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&s.app, "/source/sets.stex?rev=0", None).await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn commits_over_http() {
    let s = server();
    let module = "\\begin{module}[id=tiny]\\symdef{t}{t}\\end{module}";
    let ok = post_json(&s.app, "/commit", &json!({ "author": "a", "message": "m", "changes": { "tiny.stex": module } })).await;
    assert_eq!(ok.status, StatusCode::OK);
    assert_eq!(ok.json(), json!({ "outcome": "accepted", "revision": 1 }));

    let bad = post_json(&s.app, "/commit", &json!({ "changes": { "bad.stex": "\\begin{module}[id=bad]" } })).await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
    let v = bad.json();
    assert_eq!(v["outcome"], "rejected");
    assert_eq!(v["problems"][0]["kind"], "build");
    assert_eq!(v["problems"][0]["problem"]["stage"], "parse");
    assert_eq!(v["problems"][0]["problem"]["path"], "bad.stex");

    let delete = post_json(&s.app, "/commit", &json!({ "changes": { "tiny.stex": null } })).await;
    assert_eq!(delete.json()["revision"], 2);
    assert_eq!(get(&s.app, "/omdoc/tiny", None).await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&s.app, "/omdoc/tiny?rev=1", None).await.status, StatusCode::OK);

    let garbage = axum::http::Request::post("/commit").body(axum::body::Body::from("{")).unwrap();
    assert_eq!(common::send(&s.app, garbage).await.status, StatusCode::BAD_REQUEST);
    let revisions = get(&s.app, "/revisions", None).await.json();
    assert_eq!(revisions.as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn static_assets() {
    let s = server();
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("jobad.js"), "// script").unwrap();
    let app = router(AppState { repo: Arc::clone(&s.repo) }, Some(dir.path().to_path_buf()));
    let r = get(&app, "/static/jobad.js", None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, "// script");
    assert_eq!(get(&app, "/static/missing.css", None).await.status, StatusCode::NOT_FOUND);
}
