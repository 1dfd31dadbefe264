// The lemma-based entry for "game", expanded with paradigm N1 into the
// mixed lexicon, then flattened into the word-form lexicon.

use std::error::Error;

use lexkit::inflection::{expand_lexicon, flatten, parse_paradigms};
use lexkit::model::LexiconKind;
use lexkit::xml::{parse_lexicon, write_lexicon};

const LEMMA_LEXICON: &str = "<dic>
<entry>
  <lemma>game</lemma>
  <pos name='noun'/>
  <f name='reliability' value='1'/>
  <inflection paradigm='N1'/>
</entry>
</dic>";

const PARADIGMS: &str = "PARADIGM N1
strip=0 append= number=singular
strip=0 append=s number=plural
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let paradigms = parse_paradigms(PARADIGMS)?;
    let lemmas = parse_lexicon(LEMMA_LEXICON.as_bytes(), Some(LexiconKind::Lemma))?;

    let mixed = expand_lexicon(&lemmas, &paradigms)?;
    println!("{}", String::from_utf8(write_lexicon(&mixed))?);

    let word_forms = flatten(&mixed)?;
    let xml = String::from_utf8(write_lexicon(&word_forms))?;
    println!("{xml}");

    assert_eq!(word_forms.len(), 2);
    assert!(xml.contains("<form>games</form>"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
