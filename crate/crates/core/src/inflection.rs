//! Paradigm-driven generation of inflected forms.
//!
//! A paradigm is a named list of suffix-rewrite rules. Each rule removes a
//! number of trailing characters from the lemma, appends a suffix and
//! contributes inflectional features. Paradigm files hold one block per
//! paradigm:
//!
//! ```text
//! PARADIGM N1
//! strip=0 append= number=singular
//! strip=0 append=s number=plural
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::escape::{self, Cursor, DELA_RESERVED};
use crate::model::{check_features, check_token, merge_features, EntryId, Feature, InflectedForm, Inflection, LemmaEntry, Lexicon, WordFormEntry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflectionRule {
    /// Trailing characters (Unicode scalars) removed from the lemma.
    pub strip: usize,
    pub append: String,
    pub features: Vec<Feature>,
}

impl InflectionRule {
    pub fn new(strip: usize, append: impl Into<String>, features: Vec<Feature>) -> Self {
        InflectionRule {
            strip,
            append: append.into(),
            features,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflectionParadigm {
    pub name: String,
    pub rules: Vec<InflectionRule>,
}

/// Paradigms by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParadigmSet {
    paradigms: BTreeMap<String, InflectionParadigm>,
}

impl ParadigmSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a paradigm, refusing duplicate names, empty rule lists and
    /// duplicate feature names within a rule.
    pub fn insert(&mut self, paradigm: InflectionParadigm) -> Result<(), ParadigmError> {
        let invalid = |reason: String| ParadigmError::Invalid {
            name: paradigm.name.clone(),
            reason,
        };
        check_token(&paradigm.name).map_err(invalid)?;
        if paradigm.rules.is_empty() {
            return Err(invalid("paradigm has no rules".into()));
        }
        for (i, rule) in paradigm.rules.iter().enumerate() {
            check_features(&rule.features).map_err(|e| invalid(format!("rule {i}: {e}")))?;
        }
        if self.paradigms.contains_key(&paradigm.name) {
            return Err(ParadigmError::Duplicate(paradigm.name));
        }
        self.paradigms.insert(paradigm.name.clone(), paradigm);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&InflectionParadigm> {
        self.paradigms.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.paradigms.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &InflectionParadigm> {
        self.paradigms.values()
    }

    pub fn len(&self) -> usize {
        self.paradigms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paradigms.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParadigmError {
    #[error("line {line_number}: {reason}")]
    Parse { line_number: usize, reason: String },
    #[error("paradigm {0:?} is defined twice")]
    Duplicate(String),
    #[error("paradigm {name:?}: {reason}")]
    Invalid { name: String, reason: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InflectionError {
    #[error("cannot strip {strip} characters from {lemma:?}")]
    StripTooLong { lemma: String, strip: usize },
    #[error("rule produces an empty form from {lemma:?}")]
    EmptyForm { lemma: String },
    #[error("entry {id}: unknown paradigm {name:?}")]
    UnknownParadigm { id: EntryId, name: String },
    #[error("entry {id}, rule {rule_index}: {source}")]
    Rule {
        id: EntryId,
        rule_index: usize,
        #[source]
        source: Box<InflectionError>,
    },
    #[error("entry {id} ({lemma:?}) has no explicit inflected forms")]
    NotExpanded { id: EntryId, lemma: String },
    #[error("expected a {expected} lexicon, got {found}")]
    WrongKind { expected: &'static str, found: String },
}

/// Applies one rule to a lemma.
pub fn apply_rule(lemma: &str, rule: &InflectionRule) -> Result<InflectedForm, InflectionError> {
    let len = lemma.chars().count();
    if rule.strip > len {
        return Err(InflectionError::StripTooLong {
            lemma: lemma.to_string(),
            strip: rule.strip,
        });
    }
    let cut = lemma.char_indices().nth(len - rule.strip).map_or(lemma.len(), |(i, _)| i);
    let mut form = String::with_capacity(cut + rule.append.len());
    form.push_str(&lemma[..cut]);
    form.push_str(&rule.append);
    if form.is_empty() {
        return Err(InflectionError::EmptyForm {
            lemma: lemma.to_string(),
        });
    }
    Ok(InflectedForm::new(form, rule.features.clone()))
}

/// Replaces a paradigm reference with the explicit forms it generates.
/// Entries without a paradigm reference are returned unchanged.
pub fn expand_entry(entry: &LemmaEntry, paradigms: &ParadigmSet) -> Result<LemmaEntry, InflectionError> {
    let Inflection::Paradigm(name) = &entry.inflection else {
        return Ok(entry.clone());
    };
    let paradigm = paradigms.get(name).ok_or_else(|| InflectionError::UnknownParadigm {
        id: entry.id,
        name: name.clone(),
    })?;
    let forms = paradigm
        .rules
        .iter()
        .enumerate()
        .map(|(rule_index, rule)| {
            apply_rule(&entry.lemma, rule).map_err(|e| InflectionError::Rule {
                id: entry.id,
                rule_index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LemmaEntry {
        inflection: Inflection::Explicit(forms),
        ..entry.clone()
    })
}

/// Lemma lexicon to mixed lexicon. The first failing entry aborts the whole
/// expansion.
pub fn expand_lexicon(lexicon: &Lexicon, paradigms: &ParadigmSet) -> Result<Lexicon, InflectionError> {
    let Lexicon::Lemma(entries) = lexicon else {
        return Err(InflectionError::WrongKind {
            expected: "lemma",
            found: lexicon.kind().to_string(),
        });
    };
    let expanded = entries
        .iter()
        .map(|e| expand_entry(e, paradigms))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Lexicon::Mixed(expanded))
}

/// Mixed lexicon to word-form lexicon: every inflected form becomes an entry
/// carrying the lemma-level features merged with its own.
pub fn flatten(lexicon: &Lexicon) -> Result<Lexicon, InflectionError> {
    let Lexicon::Mixed(entries) = lexicon else {
        return Err(InflectionError::WrongKind {
            expected: "mixed",
            found: lexicon.kind().to_string(),
        });
    };
    let mut out = Vec::new();
    for e in entries {
        let Inflection::Explicit(forms) = &e.inflection else {
            return Err(InflectionError::NotExpanded {
                id: e.id,
                lemma: e.lemma.clone(),
            });
        };
        out.extend(forms.iter().map(|form| WordFormEntry {
            form: form.form.clone(),
            lemma: e.lemma.clone(),
            pos: e.pos.clone(),
            features: merge_features(&e.features, &form.features),
        }));
    }
    Ok(Lexicon::WordForm(out))
}

const FIELD_RESERVED: &[char] = &[',', '.', '+', ':', ';', '=', '\\', '#', ' ', '\t'];

fn parse_rule(line: &str) -> Result<InflectionRule, String> {
    let fields = escape::split_fields(line);
    let [strip, append, rest @ ..] = fields.as_slice() else {
        return Err("expected \"strip=<n> append=<suffix> [features]\"".into());
    };
    let strip = strip
        .strip_prefix("strip=")
        .ok_or("first field must be strip=<n>")?
        .parse::<usize>()
        .map_err(|e| format!("bad strip count: {e}"))?;
    let append = append.strip_prefix("append=").ok_or("second field must be append=<suffix>")?;
    let append: String = escape::lex(append)?.into_iter().map(|u| u.ch).collect();
    let mut features = Vec::new();
    match rest {
        [] => {}
        [pairs] => {
            let units = escape::lex(pairs)?;
            let mut cur = Cursor::new(&units, DELA_RESERVED);
            loop {
                let name = cur.field(&['='])?;
                cur.expect('=')?;
                let value = cur.field(&[';'])?;
                check_token(&name).map_err(|e| format!("feature {e}"))?;
                features.push(Feature::new(name, value));
                if cur.at_end() {
                    break;
                }
                cur.expect(';')?;
            }
            check_features(&features)?;
        }
        _ => return Err("features must be one field of name=value pairs separated by ';'".into()),
    }
    Ok(InflectionRule::new(strip, append, features))
}

/// Reads a paradigm file. Blank lines and `#` comments are skipped.
pub fn parse_paradigms(text: &str) -> Result<ParadigmSet, ParadigmError> {
    let mut set = ParadigmSet::new();
    let mut current: Option<(usize, InflectionParadigm)> = None;
    let finish = |set: &mut ParadigmSet, current: Option<(usize, InflectionParadigm)>| match current {
        Some((line_number, p)) => set.insert(p).map_err(|e| ParadigmError::Parse {
            line_number,
            reason: e.to_string(),
        }),
        None => Ok(()),
    };
    for (i, raw) in text.split('\n').enumerate() {
        let line_number = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut words = trimmed.split_whitespace();
        if words.next() == Some("PARADIGM") {
            let (Some(name), None) = (words.next(), words.next()) else {
                return Err(ParadigmError::Parse {
                    line_number,
                    reason: "expected \"PARADIGM <name>\"".into(),
                });
            };
            finish(&mut set, current.take())?;
            current = Some((
                line_number,
                InflectionParadigm {
                    name: name.to_string(),
                    rules: Vec::new(),
                },
            ));
            continue;
        }
        let Some((_, paradigm)) = current.as_mut() else {
            return Err(ParadigmError::Parse {
                line_number,
                reason: "rule before any PARADIGM header".into(),
            });
        };
        let rule = parse_rule(line).map_err(|reason| ParadigmError::Parse { line_number, reason })?;
        paradigm.rules.push(rule);
    }
    finish(&mut set, current)?;
    Ok(set)
}

/// Writes paradigms in name order, in the format read by [`parse_paradigms`].
pub fn write_paradigms(set: &ParadigmSet) -> String {
    let mut out = String::new();
    for (i, p) in set.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "PARADIGM {}", p.name);
        for rule in &p.rules {
            let _ = write!(out, "strip={} append=", rule.strip);
            escape::escape_into(&mut out, &rule.append, FIELD_RESERVED);
            for (j, f) in rule.features.iter().enumerate() {
                out.push(if j == 0 { ' ' } else { ';' });
                escape::escape_into(&mut out, &f.name, FIELD_RESERVED);
                out.push('=');
                escape::escape_into(&mut out, &f.value, FIELD_RESERVED);
            }
            out.push('\n');
        }
    }
    out
}
