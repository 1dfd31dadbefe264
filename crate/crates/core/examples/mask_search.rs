// Search a tagged corpus with sequences of lexical masks.

use std::error::Error;

use lexkit::annotate::{tag_corpus, CasePolicy};
use lexkit::dela::parse_delaf;
use lexkit::fst::compile;
use lexkit::masks::{parse_pattern_line, search};

const DELAF: &str = "\
the,the.det
game,game.noun+reliability=1:number=singular
games,game.noun+reliability=1:number=plural
new,new.adjective
rules,rule.noun:number=plural
rules,rule.verb:number=singular;person=3;tense=present
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let compiled = compile(parse_delaf(DELAF)?.word_forms().unwrap())?;
    let corpus = tag_corpus(&compiled, "The new games and the game rules", CasePolicy::Smart);

    for line in ["<.det> <.adjective> <.noun:number=plural>", "<game> <rule.noun>", "<.det> <>", "rules"] {
        let pattern = parse_pattern_line(line)?;
        let spans = search(&pattern, &corpus);
        for s in &spans {
            let words: Vec<&str> = corpus[s.first_token..=s.last_token]
                .iter()
                .map(|t| t.token.surface.as_str())
                .collect();
            println!("{line:45} {} {} {}", s.first_token, s.last_token, words.join(" "));
        }
        assert!(!spans.is_empty(), "{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
