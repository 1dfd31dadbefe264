// Run the management service on a free port, edit an entry over HTTP and
// save the lexicon.

use std::error::Error;
use std::net::SocketAddr;
use std::sync::Arc;

use lexkit::inflection::parse_paradigms;
use lexkit::service::{start, EntryJson, LexiconStore, PageJson, PreviewJson, SaveJson};
use serde_json::json;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("lexicon.xml");
    let paradigms = parse_paradigms("PARADIGM N1\nstrip=0 append= number=singular\nstrip=0 append=s number=plural\n")?;
    let store = Arc::new(LexiconStore::open(&path, paradigms)?);
    let server = start(store, SocketAddr::from(([127, 0, 0, 1], 0)), None)?;
    let base = format!("http://{}", server.addr);
    let http = reqwest::blocking::Client::new();

    let game = json!({
        "lemma": "game", "pos": "noun",
        "features": [{"name": "reliability", "value": "1"}],
        "inflection": {"paradigm": "N1"}
    });
    let created: EntryJson = http.post(format!("{base}/api/entries")).json(&game).send()?.json()?;
    println!("created {created:?}");

    let preview: PreviewJson = http.post(format!("{base}/api/preview-inflection")).json(&game).send()?.json()?;
    println!("forms {:?}", preview.forms.iter().map(|f| &f.form).collect::<Vec<_>>());

    let mut edited = game.clone();
    edited["features"][0]["value"] = json!("2");
    let id = created.id.unwrap();
    http.put(format!("{base}/api/entries/{id}")).json(&edited).send()?.error_for_status()?;

    let rejected = http
        .put(format!("{base}/api/entries/{id}"))
        .json(&json!({"lemma": " ", "pos": "noun"}))
        .send()?;
    println!("invalid edit -> {} {}", rejected.status(), rejected.text()?);

    let saved: SaveJson = http.post(format!("{base}/api/save")).send()?.json()?;
    let page: PageJson = http.get(format!("{base}/api/entries?limit=10")).send()?.json()?;
    println!("saved {} bytes, {} entries", saved.bytes, page.total);
    println!("{}", std::fs::read_to_string(&path)?);

    server.stop()?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
