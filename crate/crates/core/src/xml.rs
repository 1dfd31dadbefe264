//! The XML lexicon dialect, in its three shapes:
//!
//! ```text
//! lemma:    dic -> entry* ; entry -> lemma, pos, f*, inflection?
//! mixed:    dic -> entry* ; entry -> lemma, pos, f*, inflected* ; inflected -> form, f*
//! wordform: dic -> entry* ; entry -> form, lemma, pos, f*
//! pos: <pos name='..'/>   f: <f name='..' value='..'/>   inflection: <inflection paradigm='..'/>
//! ```
//!
//! Readers accept children in any order; the writer emits the order above
//! with two-space indentation and single-quoted attributes.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::model::{
    check_lemma_text, check_token, Feature, InflectedForm, Inflection, LemmaEntry, Lexicon, LexiconKind,
    WordFormEntry,
};
use crate::xml_tree::{self, Element, LineIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XmlErrorKind {
    Malformed,
    UnknownElement,
    UnknownAttribute,
    MissingAttribute,
    KindMismatch,
    DuplicateFeature,
    /// Any other content-model or field invariant violation.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct XmlError {
    pub line: usize,
    pub column: usize,
    pub kind: XmlErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

struct Issue {
    offset: usize,
    kind: XmlErrorKind,
    message: String,
}

#[derive(Default)]
struct Issues(Vec<Issue>);

impl Issues {
    fn push(&mut self, el: &Element, kind: XmlErrorKind, message: impl Into<String>) {
        self.0.push(Issue {
            offset: el.offset,
            kind,
            message: message.into(),
        });
    }
}

fn allow_attrs(el: &Element, allowed: &[&str], issues: &mut Issues) {
    for (k, _) in &el.attrs {
        if !allowed.contains(&k.as_str()) {
            issues.push(el, XmlErrorKind::UnknownAttribute, format!("unknown attribute {k:?} on <{}>", el.name));
        }
    }
}

fn required_attr<'e>(el: &'e Element, name: &str, issues: &mut Issues) -> Option<&'e str> {
    let v = el.attr(name);
    if v.is_none() {
        issues.push(
            el,
            XmlErrorKind::MissingAttribute,
            format!("<{}> is missing required attribute \"{name}\"", el.name),
        );
    }
    v
}

fn empty_element(el: &Element, issues: &mut Issues) {
    if !el.children.is_empty() || el.has_text() {
        issues.push(el, XmlErrorKind::Invalid, format!("<{}> must be empty", el.name));
    }
}

fn text_element(el: &Element, issues: &mut Issues) -> String {
    allow_attrs(el, &[], issues);
    if let Some(child) = el.children.first() {
        issues.push(child, XmlErrorKind::UnknownElement, format!("unexpected <{}> inside <{}>", child.name, el.name));
    }
    if el.text.is_empty() {
        issues.push(el, XmlErrorKind::Invalid, format!("<{}> is empty", el.name));
    }
    el.text.clone()
}

fn no_text(el: &Element, issues: &mut Issues) {
    if el.has_text() {
        issues.push(el, XmlErrorKind::Invalid, format!("unexpected text inside <{}>", el.name));
    }
}

fn pos_element(el: &Element, issues: &mut Issues) -> String {
    allow_attrs(el, &["name"], issues);
    empty_element(el, issues);
    let name = required_attr(el, "name", issues).unwrap_or_default();
    if let Err(e) = check_token(name) {
        issues.push(el, XmlErrorKind::Invalid, format!("part of speech {e}"));
    }
    name.to_string()
}

fn feature_element(el: &Element, seen: &mut HashSet<String>, issues: &mut Issues) -> Option<Feature> {
    allow_attrs(el, &["name", "value"], issues);
    empty_element(el, issues);
    let name = required_attr(el, "name", issues);
    let value = required_attr(el, "value", issues);
    let name = name?;
    if let Err(e) = check_token(name) {
        issues.push(el, XmlErrorKind::Invalid, format!("feature {e}"));
    }
    if !seen.insert(name.to_string()) {
        issues.push(el, XmlErrorKind::DuplicateFeature, format!("duplicate feature {name:?}"));
    }
    Some(Feature::new(name, value?))
}

/// Tracks the one-of children of an entry.
fn single<'e>(slot: &mut Option<&'e Element>, el: &'e Element, issues: &mut Issues) {
    if slot.is_some() {
        issues.push(el, XmlErrorKind::Invalid, format!("more than one <{}>", el.name));
    } else {
        *slot = Some(el);
    }
}

fn require<'e>(slot: Option<&'e Element>, entry: &Element, name: &str, issues: &mut Issues) -> Option<&'e Element> {
    if slot.is_none() {
        issues.push(entry, XmlErrorKind::Invalid, format!("<entry> is missing <{name}>"));
    }
    slot
}

fn inflected_element(el: &Element, issues: &mut Issues) -> InflectedForm {
    allow_attrs(el, &[], issues);
    no_text(el, issues);
    let mut form = None;
    let mut features = Vec::new();
    let mut seen = HashSet::new();
    for child in &el.children {
        match child.name.as_str() {
            "form" => single(&mut form, child, issues),
            "f" => features.extend(feature_element(child, &mut seen, issues)),
            other => issues.push(
                child,
                XmlErrorKind::UnknownElement,
                format!("unexpected <{other}> inside <inflected>"),
            ),
        }
    }
    if form.is_none() {
        issues.push(el, XmlErrorKind::Invalid, "<inflected> is missing <form>");
    }
    InflectedForm::new(form.map(|f| text_element(f, issues)).unwrap_or_default(), features)
}

fn entry_element(el: &Element, kind: LexiconKind, id: u64, issues: &mut Issues) -> Entry {
    allow_attrs(el, &[], issues);
    no_text(el, issues);
    let (mut form, mut lemma, mut pos, mut inflection) = (None, None, None, None);
    let mut inflected = Vec::new();
    let mut features = Vec::new();
    let mut seen = HashSet::new();
    for child in &el.children {
        match (child.name.as_str(), kind) {
            ("lemma", _) => single(&mut lemma, child, issues),
            ("pos", _) => single(&mut pos, child, issues),
            ("f", _) => features.extend(feature_element(child, &mut seen, issues)),
            ("form", LexiconKind::WordForm) => single(&mut form, child, issues),
            ("inflection", LexiconKind::Lemma) => single(&mut inflection, child, issues),
            ("inflected", LexiconKind::Mixed) => inflected.push(inflected_element(child, issues)),
            ("form" | "inflection" | "inflected", _) => issues.push(
                child,
                XmlErrorKind::KindMismatch,
                format!("<{}> is not allowed in a {kind} lexicon entry", child.name),
            ),
            (other, _) => issues.push(child, XmlErrorKind::UnknownElement, format!("unknown element <{other}>")),
        }
    }
    let lemma = require(lemma, el, "lemma", issues).map(|l| text_element(l, issues)).unwrap_or_default();
    let pos = require(pos, el, "pos", issues).map(|p| pos_element(p, issues)).unwrap_or_default();
    if kind == LexiconKind::WordForm {
        let form = require(form, el, "form", issues).map(|f| text_element(f, issues)).unwrap_or_default();
        return Entry::WordForm(WordFormEntry::new(form, lemma, pos, features));
    }
    if let Err(e) = check_lemma_text(&lemma) {
        if !lemma.is_empty() {
            issues.push(el, XmlErrorKind::Invalid, e);
        }
    }
    let inflection = if let Some(inf) = inflection {
        allow_attrs(inf, &["paradigm"], issues);
        empty_element(inf, issues);
        let name = required_attr(inf, "paradigm", issues).unwrap_or_default();
        if let Err(e) = check_token(name) {
            issues.push(inf, XmlErrorKind::Invalid, format!("paradigm {e}"));
        }
        Inflection::Paradigm(name.to_string())
    } else if inflected.is_empty() {
        Inflection::None
    } else {
        Inflection::Explicit(inflected)
    };
    Entry::Lemma(LemmaEntry::new(id, lemma, pos, features, inflection))
}

enum Entry {
    Lemma(LemmaEntry),
    WordForm(WordFormEntry),
}

fn detect_kind(root: &Element) -> Option<LexiconKind> {
    let has = |name: &str| root.children.iter().any(|e| e.children.iter().any(|c| c.name == name));
    if has("form") {
        Some(LexiconKind::WordForm)
    } else if has("inflected") {
        Some(LexiconKind::Mixed)
    } else if has("inflection") {
        Some(LexiconKind::Lemma)
    } else {
        // No inflection information at all: lemma and mixed readings agree.
        None
    }
}

fn interpret(root: &Element, expected: Option<LexiconKind>, issues: &mut Issues) -> Option<Lexicon> {
    if root.name != "dic" {
        issues.push(root, XmlErrorKind::UnknownElement, format!("root element must be <dic>, found <{}>", root.name));
        return None;
    }
    allow_attrs(root, &[], issues);
    no_text(root, issues);
    let kind = match (detect_kind(root), expected) {
        (Some(found), Some(want)) if found != want => {
            issues.push(root, XmlErrorKind::KindMismatch, format!("expected a {want} lexicon, found {found}"));
            return None;
        }
        (Some(found), _) => found,
        (None, Some(LexiconKind::WordForm)) if !root.children.is_empty() => {
            issues.push(root, XmlErrorKind::KindMismatch, "expected a wordform lexicon, found lemma entries");
            return None;
        }
        (None, want) => want.unwrap_or(LexiconKind::Lemma),
    };
    let mut lexicon = Lexicon::empty(kind);
    for el in &root.children {
        if el.name != "entry" {
            issues.push(el, XmlErrorKind::UnknownElement, format!("unknown element <{}>", el.name));
            continue;
        }
        let id = lexicon.len() as u64;
        match (&mut lexicon, entry_element(el, kind, id, issues)) {
            (Lexicon::Lemma(v) | Lexicon::Mixed(v), Entry::Lemma(e)) => v.push(e),
            (Lexicon::WordForm(v), Entry::WordForm(e)) => v.push(e),
            _ => unreachable!("entry shape follows the lexicon kind"),
        }
    }
    Some(lexicon)
}

fn run(document: &[u8], expected: Option<LexiconKind>) -> (Option<Lexicon>, Vec<XmlError>) {
    let mut issues = Issues::default();
    let lexicon = match xml_tree::parse_document(document) {
        Ok(root) => interpret(&root, expected, &mut issues),
        Err(e) => {
            issues.0.push(Issue {
                offset: e.offset,
                kind: XmlErrorKind::Malformed,
                message: e.message,
            });
            None
        }
    };
    if issues.0.is_empty() {
        return (lexicon, Vec::new());
    }
    let index = LineIndex::new(document);
    let errors = issues
        .0
        .into_iter()
        .map(|i| {
            let (line, column) = index.locate(i.offset);
            XmlError {
                line,
                column,
                kind: i.kind,
                message: i.message,
            }
        })
        .collect();
    (None, errors)
}

/// Parses an XML lexicon, detecting its kind from the element shapes.
///
/// A document without any inflection information reads as `expected_kind`
/// when that is lemma or mixed, and as a lemma lexicon otherwise. Entry ids are
/// assigned in document order from 0.
pub fn parse_lexicon(document: &[u8], expected_kind: Option<LexiconKind>) -> Result<Lexicon, XmlError> {
    match run(document, expected_kind) {
        (Some(lexicon), _) => Ok(lexicon),
        (None, errors) => Err(errors.into_iter().next().expect("failure carries an error")),
    }
}

/// Reports every problem that would make [`parse_lexicon`] fail.
pub fn validate(document: &[u8]) -> Vec<ValidationIssue> {
    run(document, None)
        .1
        .into_iter()
        .map(|e| ValidationIssue {
            line: e.line,
            column: e.column,
            message: e.message,
            severity: Severity::Error,
        })
        .collect()
}

fn push_features(out: &mut String, features: &[Feature], indent: &str) {
    for f in features {
        out.push_str(indent);
        out.push_str("<f name='");
        xml_tree::push_attr(out, &f.name);
        out.push_str("' value='");
        xml_tree::push_attr(out, &f.value);
        out.push_str("'/>\n");
    }
}

fn push_text_element(out: &mut String, indent: &str, name: &str, text: &str) {
    out.push_str(indent);
    out.push('<');
    out.push_str(name);
    out.push('>');
    xml_tree::push_text(out, text);
    out.push_str("</");
    out.push_str(name);
    out.push_str(">\n");
}

/// `<lemma>`, `<pos>` and `<f>` lines shared by lexicon entries and corpus
/// tags.
pub(crate) fn push_analysis(out: &mut String, indent: &str, lemma: &str, pos: &str, features: &[Feature]) {
    push_text_element(out, indent, "lemma", lemma);
    out.push_str(indent);
    out.push_str("<pos name='");
    xml_tree::push_attr(out, pos);
    out.push_str("'/>\n");
    push_features(out, features, indent);
}

/// Serializes a lexicon to canonical UTF-8 XML.
pub fn write_lexicon(lexicon: &Lexicon) -> Vec<u8> {
    let mut out = String::with_capacity(64 + lexicon.len() * 160);
    out.push_str(xml_tree::DECLARATION);
    if lexicon.is_empty() {
        out.push_str("<dic></dic>\n");
        return out.into_bytes();
    }
    out.push_str("<dic>\n");
    match lexicon {
        Lexicon::Lemma(entries) | Lexicon::Mixed(entries) => {
            for e in entries {
                out.push_str("  <entry>\n");
                push_analysis(&mut out, "    ", &e.lemma, e.pos.name(), &e.features);
                match &e.inflection {
                    Inflection::Paradigm(p) => {
                        out.push_str("    <inflection paradigm='");
                        xml_tree::push_attr(&mut out, p);
                        out.push_str("'/>\n");
                    }
                    Inflection::Explicit(forms) => {
                        for form in forms {
                            out.push_str("    <inflected>\n");
                            push_text_element(&mut out, "      ", "form", &form.form);
                            push_features(&mut out, &form.features, "      ");
                            out.push_str("    </inflected>\n");
                        }
                    }
                    Inflection::None => {}
                }
                out.push_str("  </entry>\n");
            }
        }
        Lexicon::WordForm(entries) => {
            for e in entries {
                out.push_str("  <entry>\n");
                push_text_element(&mut out, "    ", "form", &e.form);
                push_analysis(&mut out, "    ", &e.lemma, e.pos.name(), &e.features);
                out.push_str("  </entry>\n");
            }
        }
    }
    out.push_str("</dic>\n");
    out.into_bytes()
}
