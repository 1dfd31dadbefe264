use std::fs;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::Arc;

use lexkit::dela;
use lexkit::inflection::parse_paradigms;
use lexkit::service::{self, EntryJson, ErrorsJson, LexiconStore, PageJson, PreviewJson, SaveJson};
use lexkit::xml;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::json;

const PARADIGMS: &str = "PARADIGM N1\nstrip=0 append= number=singular\nstrip=0 append=s number=plural\n";

fn start(dir: &std::path::Path, assets: Option<std::path::PathBuf>) -> (service::RunningService, String) {
    let store = LexiconStore::open(dir.join("lex.xml"), parse_paradigms(PARADIGMS).unwrap()).unwrap();
    let running = service::start(Arc::new(store), SocketAddr::from((Ipv4Addr::LOCALHOST, 0)), assets).unwrap();
    let base = format!("http://{}", running.addr);
    (running, base)
}

fn field_names(resp: reqwest::blocking::Response) -> Vec<String> {
    resp.json::<ErrorsJson>().unwrap().errors.into_iter().map(|v| v.field).collect()
}

#[test]
fn entry_lifecycle_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dela::parse_delas("game.noun+reliability=1:N1\ncity.noun:N1\n").unwrap();
    fs::write(dir.path().join("lex.xml"), xml::write_lexicon(&lex)).unwrap();
    let (running, base) = start(dir.path(), None);
    let http = Client::new();

    let page: PageJson = http.get(format!("{base}/api/entries")).send().unwrap().json().unwrap();
    assert_eq!((page.total, page.offset, page.limit, page.entries.len()), (2, 0, 50, 2));
    let page: PageJson = http.get(format!("{base}/api/entries?offset=1&limit=5")).send().unwrap().json().unwrap();
    assert_eq!(page.entries[0].lemma, "city");
    let page: PageJson = http.get(format!("{base}/api/entries?q=gam")).send().unwrap().json().unwrap();
    assert_eq!(page.total, 1);
    let zero = http.get(format!("{base}/api/entries?limit=0")).send().unwrap();
    assert_eq!(zero.status(), StatusCode::BAD_REQUEST);

    let one: EntryJson = http.get(format!("{base}/api/entries/0")).send().unwrap().json().unwrap();
    assert_eq!(one.lemma, "game");
    assert_eq!(http.get(format!("{base}/api/entries/99")).send().unwrap().status(), StatusCode::NOT_FOUND);

    let created = http
        .post(format!("{base}/api/entries"))
        .json(&json!({"lemma": "hot dog", "pos": "noun", "inflection": {"paradigm": "N1"}}))
        .send()
        .unwrap();
    assert_eq!(created.status(), StatusCode::CREATED);
    let created: EntryJson = created.json().unwrap();
    assert_eq!(created.id, Some(2));

    let bad = http
        .post(format!("{base}/api/entries"))
        .json(&json!({"lemma": " ", "pos": "noun", "inflection": {"paradigm": "N9"}}))
        .send()
        .unwrap();
    assert_eq!(bad.status(), StatusCode::UNPROCESSABLE_ENTITY);
    let fields = field_names(bad);
    assert!(fields.contains(&"lemma".to_string()) && fields.contains(&"inflection.paradigm".to_string()));
    let garbage = http.post(format!("{base}/api/entries")).body("{").send().unwrap();
    assert_eq!(garbage.status(), StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(field_names(garbage), ["body"]);

    let updated: EntryJson = http
        .put(format!("{base}/api/entries/1"))
        .json(&json!({"lemma": "town", "pos": "noun", "features": [{"name": "reliability", "value": "2"}], "inflection": {"paradigm": "N1"}}))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!((updated.id, updated.lemma.as_str()), (Some(1), "town"));
    let missing = http
        .put(format!("{base}/api/entries/42"))
        .json(&json!({"lemma": "x", "pos": "noun"}))
        .send()
        .unwrap();
    assert_eq!(missing.status(), StatusCode::NOT_FOUND);

    assert_eq!(http.delete(format!("{base}/api/entries/0")).send().unwrap().status(), StatusCode::NO_CONTENT);
    assert_eq!(http.delete(format!("{base}/api/entries/0")).send().unwrap().status(), StatusCode::NOT_FOUND);

    let preview: PreviewJson = http
        .post(format!("{base}/api/preview-inflection"))
        .json(&json!({"lemma": "car", "pos": "noun", "inflection": {"paradigm": "N1"}}))
        .send()
        .unwrap()
        .json()
        .unwrap();
    let forms: Vec<&str> = preview.forms.iter().map(|f| f.form.as_str()).collect();
    assert_eq!(forms, ["car", "cars"]);

    let paradigms: serde_json::Value = http.get(format!("{base}/api/paradigms")).send().unwrap().json().unwrap();
    assert_eq!(paradigms, json!([{"name": "N1", "rule_count": 2}]));

    let saved: SaveJson = http.post(format!("{base}/api/save")).send().unwrap().json().unwrap();
    let on_disk = fs::read(dir.path().join("lex.xml")).unwrap();
    assert_eq!(saved.bytes, on_disk.len());
    let reloaded = xml::parse_lexicon(&on_disk, None).unwrap();
    let lemmas: Vec<&str> = reloaded.lemma_entries().unwrap().iter().map(|e| e.lemma.as_str()).collect();
    assert_eq!(lemmas, ["town", "hot dog"]);

    let home = http.get(format!("{base}/")).send().unwrap();
    assert_eq!(home.status(), StatusCode::OK);
    assert!(home.text().unwrap().contains("/api/entries"));
    running.stop().unwrap();
}

#[test]
fn serves_static_assets() {
    let dir = tempfile::tempdir().unwrap();
    let assets = dir.path().join("www");
    fs::create_dir(&assets).unwrap();
    fs::write(assets.join("index.html"), "<p>editor</p>").unwrap();
    let (running, base) = start(dir.path(), Some(assets));
    let http = Client::new();
    assert_eq!(http.get(format!("{base}/")).send().unwrap().text().unwrap(), "<p>editor</p>");
    assert_eq!(http.get(format!("{base}/api/entries")).send().unwrap().status(), StatusCode::OK);
    running.stop().unwrap();
}
