//! Lexical masks: possibly underspecified word tags used as match
//! predicates, and finite automata over them.
//!
//! Mask syntax, with the DELA escaping rules (plus `<`, `>` and space):
//!
//! ```text
//! mask := '<' (form ',')? lemma? ('.' pos?)? (':' name '=' value (';' name '=' value)*)? '>'
//!       | form
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::annotate::AnnotatedToken;
use crate::escape::{self, Cursor};
use crate::model::{check_features, check_token, Feature, WordTag};

const MASK_RESERVED: &[char] = &[',', '.', '+', ':', ';', '=', '\\', '#', '<', '>', ' ', '\t', '\n'];

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LexicalMask {
    pub form: Option<String>,
    pub lemma: Option<String>,
    pub pos: Option<String>,
    pub features: Vec<Feature>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaskError {
    #[error("malformed mask {text:?}: {reason}")]
    Syntax { text: String, reason: String },
    #[error("a sequence pattern needs at least one mask")]
    EmptySequence,
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
}

impl LexicalMask {
    pub fn form(form: impl Into<String>) -> Self {
        LexicalMask {
            form: Some(form.into()),
            ..Default::default()
        }
    }

    fn tag_matches(&self, tag: &WordTag) -> bool {
        self.lemma.as_ref().is_none_or(|l| *l == tag.lemma)
            && self.pos.as_ref().is_none_or(|p| p == tag.pos.name())
            && self.features.iter().all(|f| tag.feature(&f.name) == Some(f.value.as_str()))
    }

    /// True when the mask constrains nothing but (possibly) the surface.
    fn surface_only(&self) -> bool {
        self.lemma.is_none() && self.pos.is_none() && self.features.is_empty()
    }

    /// Whether the token satisfies the mask. Surface comparison is exact;
    /// the other constraints must all hold on one of the token's tags.
    pub fn matches(&self, token: &AnnotatedToken) -> bool {
        if self.form.as_ref().is_some_and(|f| *f != token.token.surface) {
            return false;
        }
        self.surface_only() || token.tags.iter().any(|t| self.tag_matches(t))
    }
}

pub fn mask_matches(mask: &LexicalMask, token: &AnnotatedToken) -> bool {
    mask.matches(token)
}

impl fmt::Display for LexicalMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(form), true) = (&self.form, self.surface_only()) {
            return f.write_str(&escape::escape(form, MASK_RESERVED));
        }
        let mut out = String::from("<");
        if let Some(form) = &self.form {
            escape::escape_into(&mut out, form, MASK_RESERVED);
            out.push(',');
        }
        if let Some(lemma) = &self.lemma {
            escape::escape_into(&mut out, lemma, MASK_RESERVED);
        }
        if let Some(pos) = &self.pos {
            out.push('.');
            escape::escape_into(&mut out, pos, MASK_RESERVED);
        }
        for (i, feat) in self.features.iter().enumerate() {
            out.push(if i == 0 { ':' } else { ';' });
            escape::escape_into(&mut out, &feat.name, MASK_RESERVED);
            out.push('=');
            escape::escape_into(&mut out, &feat.value, MASK_RESERVED);
        }
        out.push('>');
        f.write_str(&out)
    }
}

fn parse_bracketed(units: &[escape::Unit]) -> Result<LexicalMask, String> {
    let mut cur = Cursor::new(units, MASK_RESERVED);
    let mut mask = LexicalMask::default();
    let first = cur.field(&[',', '.', ':'])?;
    if cur.peek_delim() == Some(',') {
        cur.bump();
        if first.is_empty() {
            return Err("empty form before ','".into());
        }
        mask.form = Some(first);
        let lemma = cur.field(&['.', ':'])?;
        mask.lemma = (!lemma.is_empty()).then_some(lemma);
    } else {
        mask.lemma = (!first.is_empty()).then_some(first);
    }
    if cur.peek_delim() == Some('.') {
        cur.bump();
        let pos = cur.field(&[':'])?;
        mask.pos = (!pos.is_empty()).then_some(pos);
    }
    if cur.peek_delim() == Some(':') {
        cur.bump();
        loop {
            let name = cur.field(&['='])?;
            cur.expect('=')?;
            let value = cur.field(&[';'])?;
            check_token(&name).map_err(|e| format!("feature {e}"))?;
            mask.features.push(Feature::new(name, value));
            if cur.at_end() {
                break;
            }
            cur.expect(';')?;
        }
        check_features(&mask.features)?;
    }
    if !cur.at_end() {
        return Err("trailing characters".into());
    }
    Ok(mask)
}

/// Parses the mask syntax described in the module documentation.
pub fn parse_mask(text: &str) -> Result<LexicalMask, MaskError> {
    let syntax = |reason: String| MaskError::Syntax {
        text: text.to_string(),
        reason,
    };
    let units = escape::lex(text).map_err(syntax)?;
    let is = |u: Option<&escape::Unit>, c: char| u.is_some_and(|u| !u.escaped && u.ch == c);
    if is(units.first(), '<') {
        if units.len() < 2 || !is(units.last(), '>') {
            return Err(syntax("missing closing '>'".into()));
        }
        return parse_bracketed(&units[1..units.len() - 1]).map_err(syntax);
    }
    if units.is_empty() {
        return Err(syntax("empty mask".into()));
    }
    if let Some(u) = units.iter().find(|u| !u.escaped && MASK_RESERVED.contains(&u.ch)) {
        return Err(syntax(format!("unexpected '{}' in a bare form", u.ch)));
    }
    Ok(LexicalMask::form(units.iter().map(|u| u.ch).collect::<String>()))
}

impl FromStr for LexicalMask {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_mask(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskTransition {
    pub from: usize,
    pub mask: LexicalMask,
    pub to: usize,
}

/// A nondeterministic automaton whose transitions are labelled by masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskPattern {
    states: usize,
    start: usize,
    finals: BTreeSet<usize>,
    transitions: Vec<MaskTransition>,
}

impl MaskPattern {
    pub fn new(
        states: usize,
        start: usize,
        finals: BTreeSet<usize>,
        transitions: Vec<MaskTransition>,
    ) -> Result<Self, MaskError> {
        let bad = |m: String| Err(MaskError::InvalidPattern(m));
        if start >= states {
            return bad(format!("start state {start} >= {states}"));
        }
        if finals.is_empty() {
            return bad("no final state".into());
        }
        if let Some(f) = finals.iter().find(|&&f| f >= states) {
            return bad(format!("final state {f} >= {states}"));
        }
        if let Some(t) = transitions.iter().find(|t| t.from >= states || t.to >= states) {
            return bad(format!("transition {} -> {} leaves the state range", t.from, t.to));
        }
        Ok(MaskPattern {
            states,
            start,
            finals,
            transitions,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn transitions(&self) -> &[MaskTransition] {
        &self.transitions
    }
}

/// A linear pattern: one transition per mask.
pub fn sequence_pattern(masks: Vec<LexicalMask>) -> Result<MaskPattern, MaskError> {
    if masks.is_empty() {
        return Err(MaskError::EmptySequence);
    }
    let n = masks.len();
    let transitions = masks
        .into_iter()
        .enumerate()
        .map(|(i, mask)| MaskTransition { from: i, mask, to: i + 1 })
        .collect();
    MaskPattern::new(n + 1, 0, BTreeSet::from([n]), transitions)
}

/// Parses a pattern file line: whitespace-separated masks forming a sequence.
pub fn parse_pattern_line(line: &str) -> Result<MaskPattern, MaskError> {
    let masks = escape::split_fields(line)
        .into_iter()
        .map(parse_mask)
        .collect::<Result<Vec<_>, _>>()?;
    sequence_pattern(masks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchSpan {
    pub first_token: usize,
    /// Inclusive.
    pub last_token: usize,
}

/// Longest accepting span for every start position, by state-set
/// simulation. Spans are sorted by first token and may overlap.
pub fn search(pattern: &MaskPattern, annotated: &[AnnotatedToken]) -> Vec<MatchSpan> {
    let mut spans = Vec::new();
    let mut current = vec![false; pattern.states];
    let mut next = vec![false; pattern.states];
    for first in 0..annotated.len() {
        current.fill(false);
        current[pattern.start] = true;
        let mut longest = None;
        for (at, token) in annotated.iter().enumerate().skip(first) {
            next.fill(false);
            let mut alive = false;
            for t in &pattern.transitions {
                if current[t.from] && !next[t.to] && t.mask.matches(token) {
                    next[t.to] = true;
                    alive = true;
                }
            }
            if !alive {
                break;
            }
            if pattern.finals.iter().any(|&f| next[f]) {
                longest = Some(at);
            }
            std::mem::swap(&mut current, &mut next);
        }
        if let Some(last_token) = longest {
            spans.push(MatchSpan {
                first_token: first,
                last_token,
            });
        }
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{Token, TokenKind};
    use proptest::prelude::*;

    fn token(surface: &str, tags: Vec<WordTag>) -> AnnotatedToken {
        AnnotatedToken {
            token: Token {
                surface: surface.into(),
                start: 0,
                end: surface.len(),
                kind: TokenKind::Word,
            },
            tags,
        }
    }

    fn games() -> AnnotatedToken {
        token(
            "games",
            vec![WordTag::new(
                "game",
                "noun",
                vec![Feature::new("reliability", "1"), Feature::new("number", "plural")],
            )],
        )
    }

    fn game() -> AnnotatedToken {
        token(
            "game",
            vec![WordTag::new(
                "game",
                "noun",
                vec![Feature::new("reliability", "1"), Feature::new("number", "singular")],
            )],
        )
    }

    fn the() -> AnnotatedToken {
        token("the", vec![WordTag::new("the", "det", vec![])])
    }

    #[test]
    fn mask_match_examples() {
        let plural_noun = parse_mask("<.noun:number=plural>").unwrap();
        assert!(plural_noun.matches(&games()));
        assert!(LexicalMask::default().matches(&games()));
        assert!(LexicalMask::default().matches(&token("xyzzy", vec![])));
        let plural = parse_mask("<:number=plural>").unwrap();
        assert!(!plural.matches(&game()));
    }

    #[test]
    fn form_only_masks_match_untagged_tokens() {
        assert!(parse_mask("xyzzy").unwrap().matches(&token("xyzzy", vec![])));
        assert!(!parse_mask("Xyzzy").unwrap().matches(&token("xyzzy", vec![])));
        assert!(!parse_mask("<xyzzy,x>").unwrap().matches(&token("xyzzy", vec![])));
    }

    #[test]
    fn missing_feature_fails() {
        assert!(!parse_mask("<:gender=f>").unwrap().matches(&games()));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_mask("<game.noun:number=plural>").unwrap(),
            LexicalMask {
                lemma: Some("game".into()),
                pos: Some("noun".into()),
                features: vec![Feature::new("number", "plural")],
                ..Default::default()
            }
        );
        assert_eq!(
            parse_mask("<.noun>").unwrap(),
            LexicalMask {
                pos: Some("noun".into()),
                ..Default::default()
            }
        );
        assert_eq!(parse_mask("games").unwrap(), LexicalMask::form("games"));
        assert_eq!(parse_mask("<>").unwrap(), LexicalMask::default());
        assert_eq!(
            parse_mask("<games,game>").unwrap(),
            LexicalMask {
                form: Some("games".into()),
                lemma: Some("game".into()),
                ..Default::default()
            }
        );
        assert_eq!(parse_mask("<hot\\ dog>").unwrap().lemma.as_deref(), Some("hot dog"));
    }

    #[test]
    fn parse_errors() {
        for text in ["", "<game", "<a:b>", "<a:=b>", "<a:x=1;x=2>", "a.b", "<a.b.c>", "<a>>", "<,x>"] {
            assert!(parse_mask(text).is_err(), "{text}");
        }
    }

    #[test]
    fn sequence_shapes() {
        let p = sequence_pattern(vec![LexicalMask::default()]).unwrap();
        assert_eq!((p.state_count(), p.transitions().len()), (2, 1));
        let p = sequence_pattern(vec![LexicalMask::default(), LexicalMask::default()]).unwrap();
        assert_eq!(p.state_count(), 3);
        assert_eq!(p.finals(), &BTreeSet::from([2]));
        assert_eq!(sequence_pattern(vec![]), Err(MaskError::EmptySequence));
    }

    #[test]
    fn invalid_patterns() {
        assert!(MaskPattern::new(1, 0, BTreeSet::new(), vec![]).is_err());
        assert!(MaskPattern::new(1, 1, BTreeSet::from([0]), vec![]).is_err());
        assert!(MaskPattern::new(
            2,
            0,
            BTreeSet::from([1]),
            vec![MaskTransition {
                from: 0,
                mask: LexicalMask::default(),
                to: 2
            }]
        )
        .is_err());
    }

    #[test]
    fn search_examples() {
        let pattern = parse_pattern_line("<.noun:number=plural>").unwrap();
        assert_eq!(
            search(&pattern, &[the(), games()]),
            vec![MatchSpan {
                first_token: 1,
                last_token: 1
            }]
        );
        assert!(search(&pattern, &[]).is_empty());
    }

    #[test]
    fn longest_span_per_start_with_loops() {
        // det? noun+ as an automaton with a self loop.
        let noun = parse_mask("<.noun>").unwrap();
        let det = parse_mask("<.det>").unwrap();
        let t = |from, mask: &LexicalMask, to| MaskTransition {
            from,
            mask: mask.clone(),
            to,
        };
        let p = MaskPattern::new(
            3,
            0,
            BTreeSet::from([2]),
            vec![t(0, &det, 1), t(0, &noun, 2), t(1, &noun, 2), t(2, &noun, 2)],
        )
        .unwrap();
        let corpus = [the(), games(), game(), the()];
        let spans: Vec<_> = search(&p, &corpus).iter().map(|s| (s.first_token, s.last_token)).collect();
        assert_eq!(spans, [(0, 2), (1, 2), (2, 2)]);
    }

    #[test]
    fn empty_masks_cover_every_window() {
        let p = sequence_pattern(vec![LexicalMask::default(); 3]).unwrap();
        let corpus = vec![the(); 5];
        assert_eq!(search(&p, &corpus).len(), 3);
        assert!(search(&p, &corpus[..2]).is_empty());
    }

    fn arb_mask() -> impl Strategy<Value = LexicalMask> {
        (
            proptest::option::of("[a-c<> ,.]{1,3}"),
            proptest::option::of("[a-c:;= ]{1,3}"),
            proptest::option::of("[a-c]{1,2}"),
            proptest::collection::btree_map("[a-c]{1,2}", "[a-c=;>]{0,2}", 0..3),
        )
            .prop_map(|(form, lemma, pos, f)| LexicalMask {
                form,
                lemma,
                pos,
                features: f.into_iter().map(|(n, v)| Feature::new(n, v)).collect(),
            })
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(mask in arb_mask()) {
            prop_assert_eq!(parse_mask(&mask.to_string()).unwrap(), mask);
        }

        #[test]
        fn dropping_a_constraint_never_shrinks_matches(
            mask in arb_mask(),
            which in 0usize..4,
            tags in proptest::collection::vec(
                ("[a-c:;= ]{1,3}", "[a-c]{1,2}", proptest::collection::btree_map("[a-c]{1,2}", "[a-c=;>]{0,2}", 0..3)),
                0..3,
            ),
            surface in "[a-c<> ,.]{1,3}",
        ) {
            let tags: Vec<WordTag> = tags
                .into_iter()
                .map(|(l, p, f)| WordTag::new(l, p, f.into_iter().map(|(n, v)| Feature::new(n, v)).collect()))
                .collect();
            let tok = token(&surface, tags.clone());
            let mut looser = mask.clone();
            match which {
                0 => looser.form = None,
                1 => looser.lemma = None,
                2 => looser.pos = None,
                _ => { looser.features.pop(); }
            }
            if mask.matches(&tok) {
                prop_assert!(looser.matches(&tok));
            }
            // Duplicate tags and unrelated extra tags never turn a match off.
            let mut more = tags.clone();
            more.extend(tags);
            more.push(WordTag::new("zz", "zz", vec![]));
            if mask.matches(&tok) {
                prop_assert!(mask.matches(&token(&surface, more)));
            }
        }
    }

    fn small_token() -> impl Strategy<Value = AnnotatedToken> {
        ("[ab]", proptest::collection::vec(("[ab]", "[nv]", proptest::option::of("[xy]")), 0..3)).prop_map(|(surface, tags)| {
            let tags = tags
                .into_iter()
                .map(|(l, p, n)| WordTag::new(l, p, n.map(|v| vec![Feature::new("number", v)]).unwrap_or_default()))
                .collect();
            token(&surface, tags)
        })
    }

    fn small_mask() -> impl Strategy<Value = LexicalMask> {
        (
            proptest::option::of("[ab]"),
            proptest::option::of("[ab]"),
            proptest::option::of("[nv]"),
            proptest::option::of("[xy]"),
        )
            .prop_map(|(form, lemma, pos, number)| LexicalMask {
                form,
                lemma,
                pos,
                features: number.map(|v| vec![Feature::new("number", v)]).unwrap_or_default(),
            })
    }

    fn small_pattern() -> impl Strategy<Value = MaskPattern> {
        (1usize..5)
            .prop_flat_map(|states| {
                (
                    Just(states),
                    0..states,
                    proptest::collection::btree_set(0..states, 1..=states),
                    proptest::collection::vec((0..states, small_mask(), 0..states), 0..7),
                )
            })
            .prop_map(|(states, start, finals, ts)| {
                let transitions = ts.into_iter().map(|(from, mask, to)| MaskTransition { from, mask, to }).collect();
                MaskPattern::new(states, start, finals, transitions).unwrap()
            })
    }

    /// Every path from `state` consuming `corpus[at..]`; records the last
    /// token of each accepted non-empty span.
    fn explore(p: &MaskPattern, corpus: &[AnnotatedToken], state: usize, at: usize, ends: &mut BTreeSet<usize>) {
        let Some(tok) = corpus.get(at) else { return };
        for t in p.transitions().iter().filter(|t| t.from == state && t.mask.matches(tok)) {
            if p.finals().contains(&t.to) {
                ends.insert(at);
            }
            explore(p, corpus, t.to, at + 1, ends);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn search_agrees_with_path_enumeration(p in small_pattern(), corpus in proptest::collection::vec(small_token(), 0..7)) {
            let mut expected = Vec::new();
            for first in 0..corpus.len() {
                let mut ends = BTreeSet::new();
                explore(&p, &corpus, p.start(), first, &mut ends);
                if let Some(&last_token) = ends.last() {
                    expected.push(MatchSpan { first_token: first, last_token });
                }
            }
            prop_assert_eq!(search(&p, &corpus), expected);
        }

        #[test]
        fn empty_mask_window_count(k in 1usize..5, corpus in proptest::collection::vec(small_token(), 0..9)) {
            let p = sequence_pattern(vec![LexicalMask::default(); k]).unwrap();
            let spans = search(&p, &corpus);
            prop_assert_eq!(spans.len(), (corpus.len() + 1).saturating_sub(k));
            prop_assert!(spans.iter().all(|s| s.last_token - s.first_token + 1 == k));
        }
    }
}
