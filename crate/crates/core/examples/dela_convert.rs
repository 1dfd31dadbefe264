// DELAF and DELAS text to XML and back.

use std::error::Error;

use lexkit::dela::{parse_delaf, parse_delas, write_delaf, write_delas};
use lexkit::xml::{parse_lexicon, write_lexicon};

const DELAF: &str = "\
games,game.noun+reliability=1:number=plural
game,game.noun+reliability=1:number=singular
hot dogs,hot dog.noun:number=plural
e\\.g\\.,e\\.g\\..adverb
";

const DELAS: &str = "\
game.noun+reliability=1:N1
the.det
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let word_forms = parse_delaf(DELAF)?;
    let xml = write_lexicon(&word_forms);
    println!("{}", String::from_utf8_lossy(&xml));

    let back = parse_lexicon(&xml, None)?;
    assert!(back.same_content(&word_forms));
    let delaf = write_delaf(back.word_forms().unwrap());
    print!("{delaf}");
    assert!(delaf.contains("e\\.g\\.,e\\.g\\..adverb"));

    let lemmas = parse_delas(DELAS)?;
    let xml = write_lexicon(&lemmas);
    println!("{}", String::from_utf8_lossy(&xml));
    let delas = write_delas(&parse_lexicon(&xml, None)?)?;
    print!("{delas}");
    assert_eq!(delas, DELAS);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
