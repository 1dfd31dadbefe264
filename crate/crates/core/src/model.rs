//! Domain types shared by the three lexicon models: lemma-based, mixed and
//! word-form.
//!
//! A lemma-based lexicon holds [`LemmaEntry`] values whose inflection is a
//! reference to a shared paradigm. A mixed lexicon embeds the complete list of
//! [`InflectedForm`]s in each lemma entry. A word-form lexicon holds one
//! [`WordFormEntry`] per inflected form, each repeating the lemma-level data.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Stable identifier of a lemma entry inside one lexicon.
pub type EntryId = u64;

/// Inflectional feature names, as opposed to lemma-level ones.
///
/// Used by the DELAF writer to decide which features of a word-form entry are
/// written as inflectional groups.
pub const INFLECTIONAL_FEATURES: &[&str] = &["number", "person", "mood", "tense", "gender", "case"];

/// A `name=value` pair, the `<f name='..' value='..'/>` element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub value: String,
}

impl Feature {
    pub fn new(name: impl Into<String>, value: impl Into<String>) -> Self {
        Feature {
            name: name.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.name, self.value)
    }
}

/// Open-vocabulary part-of-speech name, e.g. `noun`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartOfSpeech(String);

impl PartOfSpeech {
    pub fn new(name: impl Into<String>) -> Self {
        PartOfSpeech(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PartOfSpeech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One inflected form embedded in a mixed-model lemma entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InflectedForm {
    pub form: String,
    pub features: Vec<Feature>,
}

impl InflectedForm {
    pub fn new(form: impl Into<String>, features: Vec<Feature>) -> Self {
        InflectedForm {
            form: form.into(),
            features,
        }
    }
}

/// How a lemma entry describes its inflection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Inflection {
    /// Reference to a shared paradigm (lemma-based model).
    Paradigm(String),
    /// Complete list of inflected forms (mixed model). Never empty.
    Explicit(Vec<InflectedForm>),
    /// Uninflected item.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LemmaEntry {
    pub id: EntryId,
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub features: Vec<Feature>,
    pub inflection: Inflection,
}

impl LemmaEntry {
    pub fn new(
        id: EntryId,
        lemma: impl Into<String>,
        pos: impl Into<String>,
        features: Vec<Feature>,
        inflection: Inflection,
    ) -> Self {
        LemmaEntry {
            id,
            lemma: lemma.into(),
            pos: PartOfSpeech::new(pos),
            features,
            inflection,
        }
    }

    /// Checks every field invariant and reports one violation per offending
    /// field. An empty result means the entry is valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if let Err(message) = check_lemma_text(&self.lemma) {
            out.push(Violation::new("lemma", message));
        }
        if let Err(message) = check_token(self.pos.name()) {
            out.push(Violation::new("pos", message));
        }
        if let Err(message) = check_features(&self.features) {
            out.push(Violation::new("features", message));
        }
        match &self.inflection {
            Inflection::Paradigm(name) => {
                if let Err(message) = check_token(name) {
                    out.push(Violation::new("inflection.paradigm", message));
                }
            }
            Inflection::Explicit(forms) => {
                if forms.is_empty() {
                    out.push(Violation::new(
                        "inflection.forms",
                        "explicit inflection needs at least one form",
                    ));
                }
                for (i, form) in forms.iter().enumerate() {
                    if form.form.is_empty() {
                        out.push(Violation::new(format!("inflection.forms[{i}].form"), "form is empty"));
                    }
                    if let Err(message) = check_features(&form.features) {
                        out.push(Violation::new(format!("inflection.forms[{i}].features"), message));
                    }
                }
            }
            Inflection::None => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordFormEntry {
    pub form: String,
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub features: Vec<Feature>,
}

impl WordFormEntry {
    pub fn new(
        form: impl Into<String>,
        lemma: impl Into<String>,
        pos: impl Into<String>,
        features: Vec<Feature>,
    ) -> Self {
        WordFormEntry {
            form: form.into(),
            lemma: lemma.into(),
            pos: PartOfSpeech::new(pos),
            features,
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.form.is_empty() {
            out.push(Violation::new("form", "form is empty"));
        }
        if self.lemma.is_empty() {
            out.push(Violation::new("lemma", "lemma is empty"));
        }
        if let Err(message) = check_token(self.pos.name()) {
            out.push(Violation::new("pos", message));
        }
        if let Err(message) = check_features(&self.features) {
            out.push(Violation::new("features", message));
        }
        out
    }

    /// The analysis carried by this entry, without its form.
    pub fn tag(&self) -> WordTag {
        WordTag {
            lemma: self.lemma.clone(),
            pos: self.pos.clone(),
            features: self.features.clone(),
        }
    }
}

/// A lexical analysis attached to a token: a word-form entry minus its form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordTag {
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub features: Vec<Feature>,
}

impl WordTag {
    pub fn new(lemma: impl Into<String>, pos: impl Into<String>, features: Vec<Feature>) -> Self {
        WordTag {
            lemma: lemma.into(),
            pos: PartOfSpeech::new(pos),
            features,
        }
    }

    pub fn feature(&self, name: &str) -> Option<&str> {
        self.features
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.value.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LexiconKind {
    Lemma,
    Mixed,
    WordForm,
}

impl fmt::Display for LexiconKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LexiconKind::Lemma => "lemma",
            LexiconKind::Mixed => "mixed",
            LexiconKind::WordForm => "wordform",
        })
    }
}

/// The `<dic>` element: a whole lexicon of one kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lexicon {
    Lemma(Vec<LemmaEntry>),
    Mixed(Vec<LemmaEntry>),
    WordForm(Vec<WordFormEntry>),
}

impl Lexicon {
    pub fn empty(kind: LexiconKind) -> Self {
        match kind {
            LexiconKind::Lemma => Lexicon::Lemma(Vec::new()),
            LexiconKind::Mixed => Lexicon::Mixed(Vec::new()),
            LexiconKind::WordForm => Lexicon::WordForm(Vec::new()),
        }
    }

    pub fn kind(&self) -> LexiconKind {
        match self {
            Lexicon::Lemma(_) => LexiconKind::Lemma,
            Lexicon::Mixed(_) => LexiconKind::Mixed,
            Lexicon::WordForm(_) => LexiconKind::WordForm,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Lexicon::Lemma(e) | Lexicon::Mixed(e) => e.len(),
            Lexicon::WordForm(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lemma_entries(&self) -> Option<&[LemmaEntry]> {
        match self {
            Lexicon::Lemma(e) | Lexicon::Mixed(e) => Some(e),
            Lexicon::WordForm(_) => None,
        }
    }

    pub fn word_forms(&self) -> Option<&[WordFormEntry]> {
        match self {
            Lexicon::WordForm(e) => Some(e),
            _ => None,
        }
    }

    /// Checks all model invariants, including the kind constraints and id
    /// uniqueness. Violations are prefixed with the entry position.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            Lexicon::Lemma(entries) | Lexicon::Mixed(entries) => {
                let mixed = matches!(self, Lexicon::Mixed(_));
                let mut ids = HashSet::with_capacity(entries.len());
                for (i, entry) in entries.iter().enumerate() {
                    if !ids.insert(entry.id) {
                        out.push(Violation::new(format!("entries[{i}].id"), format!("duplicate id {}", entry.id)));
                    }
                    match (&entry.inflection, mixed) {
                        (Inflection::Explicit(_), false) => out.push(Violation::new(
                            format!("entries[{i}].inflection"),
                            "lemma lexicon entries cannot embed inflected forms",
                        )),
                        (Inflection::Paradigm(_), true) => out.push(Violation::new(
                            format!("entries[{i}].inflection"),
                            "mixed lexicon entries cannot reference paradigms",
                        )),
                        _ => {}
                    }
                    out.extend(entry.violations().into_iter().map(|v| v.nested(&format!("entries[{i}]"))));
                }
            }
            Lexicon::WordForm(entries) => {
                for (i, entry) in entries.iter().enumerate() {
                    out.extend(entry.violations().into_iter().map(|v| v.nested(&format!("entries[{i}]"))));
                }
            }
        }
        out
    }

    /// Structural equality: same kind and the same multiset of entries,
    /// ignoring lemma entry ids and entry order.
    pub fn same_content(&self, other: &Lexicon) -> bool {
        if self.kind() != other.kind() || self.len() != other.len() {
            return false;
        }
        match (self, other) {
            (Lexicon::WordForm(a), Lexicon::WordForm(b)) => {
                let mut a: Vec<_> = a.iter().collect();
                let mut b: Vec<_> = b.iter().collect();
                a.sort_by(|x, y| word_form_order(x, y));
                b.sort_by(|x, y| word_form_order(x, y));
                a == b
            }
            _ => {
                let strip = |l: &Lexicon| {
                    let mut v: Vec<_> = l
                        .lemma_entries()
                        .unwrap_or_default()
                        .iter()
                        .map(|e| LemmaEntry { id: 0, ..e.clone() })
                        .collect();
                    v.sort_by(|x, y| {
                        (&x.lemma, &x.pos, &x.features)
                            .cmp(&(&y.lemma, &y.pos, &y.features))
                            .then_with(|| format!("{:?}", x.inflection).cmp(&format!("{:?}", y.inflection)))
                    });
                    v
                };
                strip(self) == strip(other)
            }
        }
    }

    /// Same entries in the same order, ignoring lemma entry ids.
    pub fn same_sequence(&self, other: &Lexicon) -> bool {
        match (self, other) {
            (Lexicon::WordForm(a), Lexicon::WordForm(b)) => a == b,
            (Lexicon::Lemma(a), Lexicon::Lemma(b)) | (Lexicon::Mixed(a), Lexicon::Mixed(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(x, y)| {
                        x.lemma == y.lemma && x.pos == y.pos && x.features == y.features && x.inflection == y.inflection
                    })
            }
            _ => false,
        }
    }
}

fn word_form_order(a: &WordFormEntry, b: &WordFormEntry) -> std::cmp::Ordering {
    (&a.form, &a.lemma, &a.pos, &a.features).cmp(&(&b.form, &b.lemma, &b.pos, &b.features))
}

/// One broken invariant, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            message: message.into(),
        }
    }

    fn nested(self, prefix: &str) -> Self {
        Violation {
            field: format!("{prefix}.{}", self.field),
            message: self.message,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Names of features, parts of speech and paradigms: non-empty, no whitespace.
pub fn check_token(name: &str) -> Result<(), String> {
    if name.is_empty() {
        Err("name is empty".to_string())
    } else if name.chars().any(char::is_whitespace) {
        Err(format!("name {name:?} contains whitespace"))
    } else {
        Ok(())
    }
}

/// Lemmas may be multi-word units: single spaces between words, nothing
/// leading or trailing.
pub fn check_lemma_text(lemma: &str) -> Result<(), String> {
    if lemma.is_empty() {
        return Err("lemma is empty".to_string());
    }
    if lemma.starts_with(' ') || lemma.ends_with(' ') {
        return Err(format!("lemma {lemma:?} has leading or trailing space"));
    }
    if lemma.contains("  ") {
        return Err(format!("lemma {lemma:?} has consecutive spaces"));
    }
    Ok(())
}

pub fn check_features(features: &[Feature]) -> Result<(), String> {
    let mut seen = HashSet::with_capacity(features.len());
    for f in features {
        check_token(&f.name).map_err(|e| format!("feature {e}"))?;
        if !seen.insert(f.name.as_str()) {
            return Err(format!("duplicate feature name {:?}", f.name));
        }
    }
    Ok(())
}

/// Merges lemma-level features with inflectional ones.
///
/// Lemma-level features keep their order; on a name collision the inflectional
/// value replaces the lemma-level one in place. Non-colliding inflectional
/// features follow in their own order.
pub fn merge_features(lemma_features: &[Feature], inflectional_features: &[Feature]) -> Vec<Feature> {
    let mut merged: Vec<Feature> = lemma_features
        .iter()
        .map(|f| {
            inflectional_features
                .iter()
                .find(|g| g.name == f.name)
                .unwrap_or(f)
                .clone()
        })
        .collect();
    merged.extend(
        inflectional_features
            .iter()
            .filter(|g| !lemma_features.iter().any(|f| f.name == g.name))
            .cloned(),
    );
    merged
}
