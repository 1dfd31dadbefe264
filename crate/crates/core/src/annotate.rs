//! Tokenization, case-aware lookup and corpus tagging with greedy
//! longest-match recognition of multi-word units.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::fst::CompiledLexicon;
pub use crate::model::WordTag;
use crate::model::{Feature, PartOfSpeech};
use crate::xml::{self, XmlError, XmlErrorKind};
use crate::xml_tree::{self, Element, LineIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    Number,
    Symbol,
}

impl TokenKind {
    fn of(c: char) -> TokenKind {
        if c.is_alphabetic() {
            TokenKind::Word
        } else if c.is_numeric() {
            TokenKind::Number
        } else {
            TokenKind::Symbol
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    /// Byte offsets into the source text, end exclusive.
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedToken {
    pub token: Token,
    pub tags: Vec<WordTag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CasePolicy {
    Exact,
    /// Also tries a lowercased initial and, for all-caps words, the fully
    /// lowercased form. Never uppercases.
    #[default]
    Smart,
}

impl FromStr for CasePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(CasePolicy::Exact),
            "smart" => Ok(CasePolicy::Smart),
            other => Err(format!("unknown case policy {other:?} (expected exact or smart)")),
        }
    }
}

/// Splits text into letter runs, digit runs and single symbols. Whitespace
/// separates tokens and produces none.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        let kind = TokenKind::of(c);
        let mut end = start + c.len_utf8();
        if kind != TokenKind::Symbol {
            while let Some(&(i, next)) = chars.peek() {
                if next.is_whitespace() || TokenKind::of(next) != kind {
                    break;
                }
                end = i + next.len_utf8();
                chars.next();
            }
        }
        tokens.push(Token {
            surface: text[start..end].to_string(),
            start,
            end,
            kind,
        });
    }
    tokens
}

fn push_unique(out: &mut Vec<WordTag>, tags: Vec<WordTag>) {
    for t in tags {
        if !out.contains(&t) {
            out.push(t);
        }
    }
}

/// Surface variants tried by the smart policy, the surface itself first.
pub fn case_variants(surface: &str) -> Vec<String> {
    let mut out = vec![surface.to_string()];
    let mut chars = surface.chars();
    if let Some(first) = chars.next() {
        if first.is_uppercase() {
            let lowered: String = first.to_lowercase().chain(chars).collect();
            if !out.contains(&lowered) {
                out.push(lowered);
            }
        }
    }
    let cased: Vec<char> = surface.chars().filter(|c| c.is_uppercase() || c.is_lowercase()).collect();
    if surface.chars().count() > 1 && !cased.is_empty() && cased.iter().all(|c| c.is_uppercase()) {
        let lowered = surface.to_lowercase();
        if !out.contains(&lowered) {
            out.push(lowered);
        }
    }
    out
}

/// Analyses of a surface form under a case policy; exact matches come first.
pub fn lookup(compiled: &CompiledLexicon, surface: &str, policy: CasePolicy) -> Vec<WordTag> {
    match policy {
        CasePolicy::Exact => compiled.analyses(surface),
        CasePolicy::Smart => {
            let mut out = Vec::new();
            for variant in case_variants(surface) {
                push_unique(&mut out, compiled.analyses(&variant));
            }
            out
        }
    }
}

fn is_known(compiled: &CompiledLexicon, surface: &str, policy: CasePolicy) -> bool {
    match policy {
        CasePolicy::Exact => compiled.rank_lookup(surface).is_some(),
        CasePolicy::Smart => case_variants(surface).iter().any(|v| compiled.rank_lookup(v).is_some()),
    }
}

/// Tags a text. Consecutive word tokens are joined with single spaces and
/// the longest run with a non-empty lookup becomes one token; number and
/// symbol tokens are never tagged.
pub fn tag_corpus(compiled: &CompiledLexicon, text: &str, policy: CasePolicy) -> Vec<AnnotatedToken> {
    let tokens = tokenize(text);
    let window = compiled.max_key_words().max(1);
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let token = &tokens[i];
        if token.kind != TokenKind::Word {
            out.push(AnnotatedToken {
                token: token.clone(),
                tags: Vec::new(),
            });
            i += 1;
            continue;
        }
        let run = tokens[i..]
            .iter()
            .take(window)
            .take_while(|t| t.kind == TokenKind::Word)
            .count();
        let mut matched = None;
        for len in (2..=run).rev() {
            let joined = tokens[i..i + len].iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
            if is_known(compiled, &joined, policy) {
                let tags = lookup(compiled, &joined, policy);
                let last = &tokens[i + len - 1];
                matched = Some((
                    len,
                    AnnotatedToken {
                        token: Token {
                            surface: joined,
                            start: token.start,
                            end: last.end,
                            kind: TokenKind::Word,
                        },
                        tags,
                    },
                ));
                break;
            }
        }
        match matched {
            Some((len, annotated)) => {
                out.push(annotated);
                i += len;
            }
            None => {
                out.push(AnnotatedToken {
                    token: token.clone(),
                    tags: lookup(compiled, &token.surface, policy),
                });
                i += 1;
            }
        }
    }
    out
}

/// Serializes an annotated corpus with the lexicon's element vocabulary.
pub fn write_annotated(annotated: &[AnnotatedToken]) -> Vec<u8> {
    let mut out = String::with_capacity(64 + annotated.len() * 200);
    out.push_str(xml_tree::DECLARATION);
    if annotated.is_empty() {
        out.push_str("<corpus></corpus>\n");
        return out.into_bytes();
    }
    out.push_str("<corpus>\n");
    for a in annotated {
        let _ = write!(out, "  <token start='{}' end='{}'>\n    <form>", a.token.start, a.token.end);
        xml_tree::push_text(&mut out, &a.token.surface);
        out.push_str("</form>\n");
        for t in &a.tags {
            out.push_str("    <tag>\n");
            xml::push_analysis(&mut out, "      ", &t.lemma, t.pos.name(), &t.features);
            out.push_str("    </tag>\n");
        }
        out.push_str("  </token>\n");
    }
    out.push_str("</corpus>\n");
    out.into_bytes()
}

fn corpus_error(index: &LineIndex<'_>, el: &Element, message: impl Into<String>) -> XmlError {
    let (line, column) = index.locate(el.offset);
    XmlError {
        line,
        column,
        kind: XmlErrorKind::Invalid,
        message: message.into(),
    }
}

fn read_tag(index: &LineIndex<'_>, el: &Element) -> Result<WordTag, XmlError> {
    let (mut lemma, mut pos, mut features) = (None, None, Vec::new());
    for c in &el.children {
        match c.name.as_str() {
            "lemma" => lemma = Some(c.text.clone()),
            "pos" => pos = c.attr("name").map(PartOfSpeech::new),
            "f" => match (c.attr("name"), c.attr("value")) {
                (Some(n), Some(v)) => features.push(Feature::new(n, v)),
                _ => return Err(corpus_error(index, c, "<f> needs name and value")),
            },
            other => return Err(corpus_error(index, c, format!("unexpected <{other}> in <tag>"))),
        }
    }
    match (lemma, pos) {
        (Some(lemma), Some(pos)) => Ok(WordTag { lemma, pos, features }),
        _ => Err(corpus_error(index, el, "<tag> needs <lemma> and <pos name=..>")),
    }
}

/// Reads an annotated corpus written by [`write_annotated`]. Token kinds are
/// recovered from the first character of the surface.
pub fn read_annotated(document: &[u8]) -> Result<Vec<AnnotatedToken>, XmlError> {
    let index = LineIndex::new(document);
    let root = xml_tree::parse_document(document).map_err(|e| {
        let (line, column) = index.locate(e.offset);
        XmlError {
            line,
            column,
            kind: XmlErrorKind::Malformed,
            message: e.message,
        }
    })?;
    if root.name != "corpus" {
        return Err(corpus_error(&index, &root, "root element must be <corpus>"));
    }
    let mut out = Vec::with_capacity(root.children.len());
    for el in &root.children {
        if el.name != "token" {
            return Err(corpus_error(&index, el, format!("unexpected <{}>", el.name)));
        }
        let offset = |name: &str| -> Result<usize, XmlError> {
            el.attr(name)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| corpus_error(&index, el, format!("<token> needs a numeric {name} attribute")))
        };
        let (start, end) = (offset("start")?, offset("end")?);
        let mut surface = None;
        let mut tags = Vec::new();
        for c in &el.children {
            match c.name.as_str() {
                "form" => surface = Some(c.text.clone()),
                "tag" => tags.push(read_tag(&index, c)?),
                other => return Err(corpus_error(&index, c, format!("unexpected <{other}> in <token>"))),
            }
        }
        let surface = surface.ok_or_else(|| corpus_error(&index, el, "<token> needs <form>"))?;
        let kind = surface.chars().next().map_or(TokenKind::Symbol, TokenKind::of);
        out.push(AnnotatedToken {
            token: Token {
                surface,
                start,
                end,
                kind,
            },
            tags,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::compile;
    use crate::model::WordFormEntry;
    use proptest::prelude::*;

    fn fig3_index() -> CompiledLexicon {
        compile(&[
            WordFormEntry::new(
                "game",
                "game",
                "noun",
                vec![Feature::new("reliability", "1"), Feature::new("number", "singular")],
            ),
            WordFormEntry::new(
                "games",
                "game",
                "noun",
                vec![Feature::new("reliability", "1"), Feature::new("number", "plural")],
            ),
        ])
        .unwrap()
    }

    fn games_tag() -> WordTag {
        WordTag::new(
            "game",
            "noun",
            vec![Feature::new("reliability", "1"), Feature::new("number", "plural")],
        )
    }

    #[test]
    fn tokenize_examples() {
        let t = tokenize("The games!");
        let view: Vec<_> = t.iter().map(|t| (t.surface.as_str(), t.start, t.end, t.kind)).collect();
        assert_eq!(
            view,
            [
                ("The", 0, 3, TokenKind::Word),
                ("games", 4, 9, TokenKind::Word),
                ("!", 9, 10, TokenKind::Symbol)
            ]
        );
        assert!(tokenize("").is_empty());
        let t = tokenize("hot dog");
        assert_eq!(t.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>(), ["hot", "dog"]);
    }

    #[test]
    fn tokenize_mixed_runs() {
        let t = tokenize("été42x--é");
        let view: Vec<_> = t.iter().map(|t| (t.surface.as_str(), t.kind)).collect();
        assert_eq!(
            view,
            [
                ("été", TokenKind::Word),
                ("42", TokenKind::Number),
                ("x", TokenKind::Word),
                ("-", TokenKind::Symbol),
                ("-", TokenKind::Symbol),
                ("é", TokenKind::Word)
            ]
        );
    }

    #[test]
    fn lookup_examples() {
        let idx = fig3_index();
        assert_eq!(lookup(&idx, "games", CasePolicy::Exact), vec![games_tag()]);
        assert_eq!(lookup(&idx, "Games", CasePolicy::Smart), vec![games_tag()]);
        assert!(lookup(&idx, "Games", CasePolicy::Exact).is_empty());
        assert_eq!(lookup(&idx, "GAMES", CasePolicy::Smart), vec![games_tag()]);
        assert!(lookup(&idx, "gAMES", CasePolicy::Smart).is_empty());
    }

    #[test]
    fn case_variant_rules() {
        assert_eq!(case_variants("Games"), ["Games", "games"]);
        assert_eq!(case_variants("GAMES"), ["GAMES", "gAMES", "games"]);
        assert_eq!(case_variants("A"), ["A", "a"]);
        assert_eq!(case_variants("McDonald"), ["McDonald", "mcDonald"]);
        assert_eq!(case_variants("x"), ["x"]);
        assert_eq!(case_variants("42"), ["42"]);
    }

    #[test]
    fn smart_puts_exact_matches_first() {
        let idx = compile(&[
            WordFormEntry::new("Bill", "Bill", "name", vec![]),
            WordFormEntry::new("bill", "bill", "noun", vec![]),
        ])
        .unwrap();
        let tags = lookup(&idx, "Bill", CasePolicy::Smart);
        assert_eq!(tags.iter().map(|t| t.pos.name()).collect::<Vec<_>>(), ["name", "noun"]);
    }

    #[test]
    fn multi_word_units_take_the_longest_match() {
        let idx = compile(&[
            WordFormEntry::new("hot", "hot", "adj", vec![]),
            WordFormEntry::new("dog", "dog", "noun", vec![]),
            WordFormEntry::new("hot dog", "hot dog", "noun", vec![]),
        ])
        .unwrap();
        let out = tag_corpus(&idx, "hot dog", CasePolicy::Exact);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].token.surface, "hot dog");
        assert_eq!((out[0].token.start, out[0].token.end), (0, 7));
        assert_eq!(out[0].tags, vec![WordTag::new("hot dog", "noun", vec![])]);
        let out = tag_corpus(&idx, "Hot  dog, hot\ndog dog", CasePolicy::Smart);
        let view: Vec<_> = out.iter().map(|a| a.token.surface.as_str()).collect();
        assert_eq!(view, ["Hot dog", ",", "hot dog", "dog"]);
        assert_eq!((out[0].token.start, out[0].token.end), (0, 8));
    }

    #[test]
    fn unknown_words_keep_empty_tags() {
        let out = tag_corpus(&fig3_index(), "xyzzy games 12.", CasePolicy::Smart);
        assert_eq!(out.len(), 4);
        assert!(out[0].tags.is_empty());
        assert_eq!(out[1].tags, vec![games_tag()]);
        assert!(out[2].tags.is_empty() && out[3].tags.is_empty());
    }

    #[test]
    fn annotated_xml_shape() {
        let out = tag_corpus(&fig3_index(), "games", CasePolicy::Exact);
        let xml = String::from_utf8(write_annotated(&out)).unwrap();
        let compact: String = xml.lines().skip(1).map(str::trim).collect();
        assert_eq!(
            compact,
            "<corpus><token start='0' end='5'><form>games</form><tag><lemma>game</lemma><pos name='noun'/>\
             <f name='reliability' value='1'/><f name='number' value='plural'/></tag></token></corpus>"
        );
        assert_eq!(read_annotated(xml.as_bytes()).unwrap(), out);
        let empty = String::from_utf8(write_annotated(&[])).unwrap();
        assert!(empty.ends_with("<corpus></corpus>\n"));
        assert!(read_annotated(empty.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn read_annotated_errors() {
        for doc in [
            "<corpus><token end='1'><form>a</form></token></corpus>",
            "<corpus><token start='0' end='1'></token></corpus>",
            "<corpus><token start='0' end='1'><form>a</form><tag><lemma>a</lemma></tag></token></corpus>",
            "<dic/>",
            "<corpus>",
        ] {
            assert!(read_annotated(doc.as_bytes()).is_err(), "{doc}");
        }
    }

    fn arb_tag() -> impl Strategy<Value = WordTag> {
        ("[a-z &<]{1,5}", "[a-z]{1,3}", proptest::collection::btree_map("[a-z]{1,3}", "[a-z'\"]{0,3}", 0..3))
            .prop_map(|(l, p, f)| WordTag::new(l, p, f.into_iter().map(|(n, v)| Feature::new(n, v)).collect()))
    }

    fn arb_token() -> impl Strategy<Value = AnnotatedToken> {
        (
            prop_oneof!["[a-zé]{1,6}( [a-z]{1,4})?", "[0-9]{1,3}", "[!?.,<&]"],
            0usize..1000,
            proptest::collection::vec(arb_tag(), 0..3),
        )
            .prop_map(|(surface, start, tags)| AnnotatedToken {
                token: Token {
                    kind: TokenKind::of(surface.chars().next().unwrap()),
                    end: start + surface.len(),
                    surface,
                    start,
                },
                tags,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn annotated_round_trip(corpus in proptest::collection::vec(arb_token(), 0..6)) {
            prop_assert_eq!(read_annotated(&write_annotated(&corpus)).unwrap(), corpus);
        }

        #[test]
        fn token_offsets_rebuild_text(text in "[a-z0-9 ,.!\n\té]{0,40}") {
            let tokens = tokenize(&text);
            let mut last = 0;
            for t in &tokens {
                prop_assert!(t.start < t.end && t.start >= last);
                prop_assert!(text[last..t.start].chars().all(char::is_whitespace));
                prop_assert_eq!(&text[t.start..t.end], t.surface.as_str());
                last = t.end;
            }
            prop_assert!(text[last..].chars().all(char::is_whitespace));
        }
    }

    fn arb_lexicon(multiword: bool) -> impl Strategy<Value = Vec<WordFormEntry>> {
        let form = if multiword { "[aAbé]{1,3}( [ab]{1,2}){0,2}" } else { "[aAbé]{1,3}" };
        proptest::collection::vec(
            (form, prop_oneof![Just("n"), Just("v")]).prop_map(|(f, p)| WordFormEntry::new(f.clone(), f, p, vec![])),
            0..12,
        )
    }

    fn arb_text() -> impl Strategy<Value = String> {
        proptest::collection::vec(prop_oneof!["[aAbBéÉ]{1,3}", "[0-9]{1,2}", "[.,!]"], 0..12)
            .prop_flat_map(|words| {
                let n = words.len();
                (Just(words), proptest::collection::vec(prop_oneof![Just(" "), Just("  "), Just("\n")], n))
            })
            .prop_map(|(words, gaps)| words.iter().zip(gaps).map(|(w, g)| format!("{w}{g}")).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn smart_extends_exact(entries in arb_lexicon(false), surface in "[aAbBéÉ]{1,3}") {
            let c = compile(&entries).unwrap();
            let exact = lookup(&c, &surface, CasePolicy::Exact);
            let smart = lookup(&c, &surface, CasePolicy::Smart);
            prop_assert_eq!(&smart[..exact.len()], &exact[..]);
            let expected: std::collections::BTreeSet<WordTag> =
                entries.iter().filter(|e| e.form == surface).map(|e| e.tag()).collect();
            prop_assert_eq!(exact.into_iter().collect::<std::collections::BTreeSet<_>>(), expected);
        }

        #[test]
        fn single_word_tagging_is_per_token_lookup(entries in arb_lexicon(false), text in arb_text()) {
            let c = compile(&entries).unwrap();
            for policy in [CasePolicy::Exact, CasePolicy::Smart] {
                let tagged = tag_corpus(&c, &text, policy);
                let tokens = tokenize(&text);
                prop_assert_eq!(tagged.len(), tokens.len());
                for (a, t) in tagged.iter().zip(&tokens) {
                    prop_assert_eq!(&a.token, t);
                    let expected = if t.kind == TokenKind::Word { lookup(&c, &t.surface, policy) } else { Vec::new() };
                    prop_assert_eq!(&a.tags, &expected);
                }
            }
        }

        #[test]
        fn multi_word_spans_cover_their_tokens(entries in arb_lexicon(true), text in arb_text()) {
            let c = compile(&entries).unwrap();
            let tokens = tokenize(&text);
            let tagged = tag_corpus(&c, &text, CasePolicy::Exact);
            let mut i = 0;
            for a in &tagged {
                let words = a.token.surface.split(' ').count();
                let covered = &tokens[i..i + words];
                prop_assert_eq!(a.token.start, covered[0].start);
                prop_assert_eq!(a.token.end, covered[words - 1].end);
                let joined = covered.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
                prop_assert_eq!(&a.token.surface, &joined);
                if words > 1 {
                    prop_assert!(!a.tags.is_empty());
                    prop_assert!(covered.iter().all(|t| t.kind == TokenKind::Word));
                }
                i += words;
            }
            prop_assert_eq!(i, tokens.len());
        }
    }
}
