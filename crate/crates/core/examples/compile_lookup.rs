// Compile a generated lexicon into a minimal automaton, save it, load it
// back and look forms up.

use std::error::Error;

use lexkit::annotate::{lookup, CasePolicy};
use lexkit::fst::{compile, read_binary};
use lexkit::inflection::{expand_lexicon, flatten};
use lexkit::synth::{synthetic_lexicon, synthetic_paradigms, SynthConfig};
use lexkit::xml::write_lexicon;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = SynthConfig {
        lemmas: 2_000,
        ..Default::default()
    };
    let lemmas = synthetic_lexicon(&config);
    let word_forms = flatten(&expand_lexicon(&lemmas, &synthetic_paradigms())?)?;
    let entries = word_forms.word_forms().unwrap();

    let compiled = compile(entries)?;
    let bytes = compiled.write_binary();
    let xml_len = write_lexicon(&word_forms).len();
    let stats = compiled.stats();
    println!(
        "{} forms, {} keys, {} states, {} transitions",
        entries.len(),
        stats.key_count,
        stats.state_count,
        stats.transition_count
    );
    println!(
        "index {} bytes, {:.1}% of {} bytes of XML",
        bytes.len(),
        100.0 * bytes.len() as f64 / xml_len as f64,
        xml_len
    );

    let loaded = read_binary(&bytes)?;
    assert_eq!(loaded, compiled);
    let sample = &entries[entries.len() / 2];
    for tag in loaded.analyses(&sample.form) {
        println!("{} -> {}.{} {:?}", sample.form, tag.lemma, tag.pos, tag.features);
    }
    let capitalized = {
        let mut c = sample.form.chars();
        let first = c.next().unwrap();
        first.to_uppercase().chain(c).collect::<String>()
    };
    assert!(lookup(&loaded, &capitalized, CasePolicy::Exact).is_empty());
    assert!(!lookup(&loaded, &capitalized, CasePolicy::Smart).is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
