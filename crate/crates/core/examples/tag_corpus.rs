// Tag running text, recognising multi-word units by longest match.

use std::error::Error;

use lexkit::annotate::{read_annotated, tag_corpus, write_annotated, CasePolicy};
use lexkit::dela::parse_delaf;
use lexkit::fst::compile;

const DELAF: &str = "\
the,the.det
hot,hot.adjective
dog,dog.noun:number=singular
hot dog,hot dog.noun:number=singular
hot dogs,hot dog.noun:number=plural
sells,sell.verb:number=singular;person=3;tense=present
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let lexicon = parse_delaf(DELAF)?;
    let compiled = compile(lexicon.word_forms().unwrap())?;

    let text = "The man sells hot dogs, 2 for 5.";
    let annotated = tag_corpus(&compiled, text, CasePolicy::Smart);
    for t in &annotated {
        let tags: Vec<String> = t.tags.iter().map(|g| format!("{}.{}", g.lemma, g.pos)).collect();
        println!("{:>3}..{:<3} {:10} {}", t.token.start, t.token.end, t.token.surface, tags.join(" "));
    }
    let surfaces: Vec<&str> = annotated.iter().map(|t| t.token.surface.as_str()).collect();
    assert_eq!(surfaces, ["The", "man", "sells", "hot dogs", ",", "2", "for", "5", "."]);

    let xml = write_annotated(&annotated);
    assert_eq!(read_annotated(&xml)?, annotated);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
