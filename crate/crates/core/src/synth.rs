//! Deterministic synthetic lexica and corpora for scaled experiments.
//!
//! Generated lemmas use a restricted alphabet (no `q`, `w`, `x`, `y`), so
//! words built from those letters are guaranteed to be unknown.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::inflection::{InflectionParadigm, InflectionRule, ParadigmSet};
use crate::model::{Feature, Inflection, LemmaEntry, Lexicon};

const CONSONANTS: &[char] = &['b', 'c', 'd', 'f', 'g', 'h', 'j', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'z'];
const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u', 'é', 'ü'];
const UNKNOWN_LETTERS: &[char] = &['q', 'w', 'x', 'y'];
const ENDINGS: &[&str] = &[
    "s", "es", "en", "er", "em", "ed", "ing", "a", "o", "i", "um", "ae", "is", "as", "os", "et", "it",
];
const SYMBOLS: &[&str] = &[",", ".", ";", ":", "!", "?", "(", ")", "-", "%"];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub lemmas: usize,
    /// Share of lemmas that also get a homograph entry with another part of
    /// speech.
    pub homograph_rate: f64,
    pub multiword_rate: f64,
    /// Share of lemmas containing a DELA-reserved character.
    pub reserved_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 2004,
            lemmas: 12_000,
            homograph_rate: 0.04,
            multiword_rate: 0.03,
            reserved_rate: 0.005,
        }
    }
}

fn paradigm_features(pos: &str, index: usize) -> Vec<Feature> {
    let f = |n: &str, v: &str| Feature::new(n, v);
    match pos {
        "noun" => {
            let cases = ["nominative", "accusative", "genitive", "dative", "vocative"];
            let number = if index.is_multiple_of(2) { "singular" } else { "plural" };
            vec![f("number", number), f("case", cases[index / 2])]
        }
        "verb" => match index {
            0 => vec![f("mood", "infinitive")],
            1..=6 => {
                let i = index - 1;
                let number = if i < 3 { "singular" } else { "plural" };
                vec![
                    f("number", number),
                    f("person", ["1", "2", "3"][i % 3]),
                    f("mood", "indicative"),
                    f("tense", "present"),
                ]
            }
            7..=9 => vec![
                f("number", "singular"),
                f("person", ["1", "2", "3"][index - 7]),
                f("mood", "indicative"),
                f("tense", "past"),
            ],
            _ => unreachable!(),
        },
        _ => {
            let genders = ["masculine", "feminine", "neuter", "common", "epicene"];
            let number = if index.is_multiple_of(2) { "singular" } else { "plural" };
            vec![f("number", number), f("gender", genders[index / 2])]
        }
    }
}

/// Ten paradigms of ten rules each: four nominal, four verbal, two
/// adjectival. Forms within one paradigm are pairwise distinct.
pub fn synthetic_paradigms() -> ParadigmSet {
    let mut set = ParadigmSet::new();
    let kinds = [("N", "noun", 4), ("V", "verb", 4), ("A", "adjective", 2)];
    let mut p = 0;
    for (prefix, pos, count) in kinds {
        for k in 1..=count {
            let strip = p % 3;
            let rules = (0..10)
                .map(|r| {
                    let (strip, append) = if r == 0 {
                        (0, "")
                    } else {
                        (strip, ENDINGS[(p * 3 + r) % ENDINGS.len()])
                    };
                    InflectionRule::new(strip, append, paradigm_features(pos, r))
                })
                .collect();
            set.insert(InflectionParadigm {
                name: format!("{prefix}{k}"),
                rules,
            })
            .expect("generated paradigms are valid");
            p += 1;
        }
    }
    set
}

/// Part of speech implied by a synthetic paradigm name.
pub fn paradigm_pos(name: &str) -> &'static str {
    match name.as_bytes().first() {
        Some(b'N') => "noun",
        Some(b'V') => "verb",
        _ => "adjective",
    }
}

fn word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(2..=4);
    let mut out = String::new();
    for _ in 0..syllables {
        out.push(*CONSONANTS.choose(rng).unwrap());
        out.push(*VOWELS.choose(rng).unwrap());
        if rng.gen_bool(0.3) {
            out.push(*CONSONANTS.choose(rng).unwrap());
        }
    }
    out
}

/// A lemma-based lexicon with `lemmas` distinct lemma strings (plus
/// homographs), every entry referring to one of [`synthetic_paradigms`].
pub fn synthetic_lexicon(config: &SynthConfig) -> Lexicon {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let names: Vec<String> = synthetic_paradigms().iter().map(|p| p.name.clone()).collect();
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    while seen.len() < config.lemmas {
        let mut lemma = word(&mut rng);
        if rng.gen_bool(config.multiword_rate) {
            lemma = format!("{lemma} {}", word(&mut rng));
        }
        if rng.gen_bool(config.reserved_rate) {
            let c = *['.', ',', '+', ':', '=', '\\', '#', ';'].choose(&mut rng).unwrap();
            lemma.insert(1, c);
        }
        if !seen.insert(lemma.clone()) {
            continue;
        }
        let mut features = vec![Feature::new("reliability", rng.gen_range(1..=3).to_string())];
        if rng.gen_bool(0.1) {
            features.push(Feature::new("domain", ["sport", "law", "food"].choose(&mut rng).unwrap().to_string()));
        }
        let paradigm = names.choose(&mut rng).unwrap().clone();
        let pos = paradigm_pos(&paradigm);
        if rng.gen_bool(config.homograph_rate) {
            let other = names
                .iter()
                .filter(|n| paradigm_pos(n) != pos)
                .collect::<Vec<_>>()
                .choose(&mut rng)
                .map(|n| n.to_string())
                .unwrap();
            entries.push((lemma.clone(), other, features.clone()));
        }
        entries.push((lemma, paradigm, features));
    }
    Lexicon::Lemma(
        entries
            .into_iter()
            .enumerate()
            .map(|(id, (lemma, paradigm, features))| {
                let pos = paradigm_pos(&paradigm);
                LemmaEntry::new(id as u64, lemma, pos, features, Inflection::Paradigm(paradigm))
            })
            .collect(),
    )
}

/// A word that cannot be a synthetic lexicon form.
pub fn unknown_word(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(3..=8);
    (0..len).map(|_| *UNKNOWN_LETTERS.choose(rng).unwrap()).collect()
}

/// Whitespace-separated running text of about `word_tokens` tokens drawn
/// from `forms`, with capitalized and upper-case variants, numbers,
/// punctuation and unknown words mixed in.
pub fn synthetic_corpus(forms: &[String], word_tokens: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(word_tokens * 8);
    let mut emitted = 0;
    while emitted < word_tokens {
        let roll: f64 = rng.gen();
        let piece = if roll < 0.82 && !forms.is_empty() {
            let form = forms.choose(&mut rng).unwrap();
            let style: f64 = rng.gen();
            if style < 0.1 {
                let mut chars = form.chars();
                let first = chars.next().unwrap();
                first.to_uppercase().chain(chars).collect()
            } else if style < 0.12 {
                form.to_uppercase()
            } else {
                form.clone()
            }
        } else if roll < 0.90 {
            unknown_word(&mut rng)
        } else if roll < 0.95 {
            rng.gen_range(0..100_000).to_string()
        } else {
            SYMBOLS.choose(&mut rng).unwrap().to_string()
        };
        emitted += piece.split(' ').count();
        out.push_str(&piece);
        out.push(if rng.gen_bool(0.07) { '\n' } else { ' ' });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflection::{expand_lexicon, flatten};

    #[test]
    fn paradigms_have_ten_distinct_rules() {
        let set = synthetic_paradigms();
        assert_eq!(set.len(), 10);
        for p in set.iter() {
            assert_eq!(p.rules.len(), 10);
            let shapes: HashSet<_> = p.rules.iter().map(|r| (r.strip, r.append.clone())).collect();
            assert_eq!(shapes.len(), 10, "{}", p.name);
        }
    }

    #[test]
    fn small_lexicon_is_deterministic_and_valid() {
        let config = SynthConfig {
            lemmas: 300,
            ..Default::default()
        };
        let a = synthetic_lexicon(&config);
        assert_eq!(a, synthetic_lexicon(&config));
        assert!(a.violations().is_empty());
        let distinct: HashSet<_> = a.lemma_entries().unwrap().iter().map(|e| e.lemma.clone()).collect();
        assert_eq!(distinct.len(), 300);
        let forms = flatten(&expand_lexicon(&a, &synthetic_paradigms()).unwrap()).unwrap();
        assert_eq!(forms.len(), a.len() * 10);
    }

    #[test]
    fn unknown_words_avoid_the_lexicon_alphabet() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let w = unknown_word(&mut rng);
            assert!(w.chars().all(|c| !CONSONANTS.contains(&c) && !VOWELS.contains(&c)));
        }
    }

    #[test]
    fn corpus_reaches_token_count() {
        let forms = vec!["game".to_string(), "hot dog".to_string()];
        let text = synthetic_corpus(&forms, 1000, 3);
        let words = text.split_whitespace().count();
        assert!((1000..1002).contains(&words));
        assert_eq!(text, synthetic_corpus(&forms, 1000, 3));
    }
}
