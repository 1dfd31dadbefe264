//! DELAF and DELAS text formats.
//!
//! ```text
//! delaf_line := form ',' lemma '.' pos ('+' name '=' value)* (':' group)*
//! group      := name '=' value (';' name '=' value)*
//! delas_line := lemma '.' pos ('+' name '=' value)* (':' paradigm)?
//! ```
//!
//! Reserved characters (`, . + : ; = \ #`) are backslash-escaped inside
//! fields. Blank lines and lines starting with `#` are skipped.

use thiserror::Error;

use crate::escape::{self, Cursor, DELA_RESERVED};
use crate::model::{
    check_features, check_lemma_text, check_token, merge_features, Feature, Inflection, LemmaEntry, Lexicon,
    WordFormEntry, INFLECTIONAL_FEATURES,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DelaError {
    #[error("line {line_number}: {reason}")]
    Parse { line_number: usize, reason: String },
    #[error("cannot write {0}")]
    Unsupported(String),
}

fn parse_error(line_number: usize, reason: impl Into<String>) -> DelaError {
    DelaError::Parse {
        line_number,
        reason: reason.into(),
    }
}

/// Content lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// The part of a DELAF line after the form: lemma, pos, lemma-level
/// features and inflectional groups.
#[derive(Debug)]
pub(crate) struct AnalysisLine {
    pub lemma: String,
    pub pos: String,
    pub features: Vec<Feature>,
    pub groups: Vec<Vec<Feature>>,
}

impl AnalysisLine {
    /// One merged feature list per group; a single list when there are no
    /// groups.
    pub fn expand(self) -> impl Iterator<Item = (String, String, Vec<Feature>)> {
        let groups = if self.groups.is_empty() {
            vec![Vec::new()]
        } else {
            self.groups
        };
        let AnalysisLine {
            lemma, pos, features, ..
        } = self;
        groups
            .into_iter()
            .map(move |g| (lemma.clone(), pos.clone(), merge_features(&features, &g)))
    }
}

fn pair(cur: &mut Cursor<'_>, stops: &[char]) -> Result<Feature, String> {
    let name = cur.field(&['='])?;
    if cur.peek_delim() != Some('=') {
        return Err(format!("malformed pair {name:?}: missing '='"));
    }
    cur.bump();
    let value = cur.field(stops)?;
    check_token(&name).map_err(|e| format!("feature {e}"))?;
    Ok(Feature::new(name, value))
}

/// Parses `'.' pos ('+' pair)* (':' group)*` once the lemma field has been
/// consumed.
pub(crate) fn analysis_tail(cur: &mut Cursor<'_>, lemma: String) -> Result<AnalysisLine, String> {
    cur.expect('.').map_err(|_| "missing '.' before part of speech".to_string())?;
    let pos = cur.field(&['+', ':'])?;
    if pos.is_empty() {
        return Err("empty part of speech".into());
    }
    check_token(&pos).map_err(|e| format!("part of speech {e}"))?;
    let mut features = Vec::new();
    while cur.peek_delim() == Some('+') {
        cur.bump();
        features.push(pair(cur, &['+', ':'])?);
    }
    check_features(&features)?;
    let mut groups = Vec::new();
    while cur.peek_delim() == Some(':') {
        cur.bump();
        let mut group = vec![pair(cur, &[';', ':'])?];
        while cur.peek_delim() == Some(';') {
            cur.bump();
            group.push(pair(cur, &[';', ':'])?);
        }
        check_features(&group)?;
        groups.push(group);
    }
    if !cur.at_end() {
        return Err("trailing characters".into());
    }
    Ok(AnalysisLine {
        lemma,
        pos,
        features,
        groups,
    })
}

fn parse_delaf_line(line: &str) -> Result<Vec<WordFormEntry>, String> {
    let units = escape::lex(line)?;
    let mut cur = Cursor::new(&units, DELA_RESERVED);
    let form = cur.field(&[','])?;
    if cur.peek_delim() != Some(',') {
        return Err("missing ',' after form".into());
    }
    cur.bump();
    if form.is_empty() {
        return Err("empty form".into());
    }
    let lemma = cur.field(&['.'])?;
    if lemma.is_empty() {
        return Err("empty lemma".into());
    }
    let analysis = analysis_tail(&mut cur, lemma)?;
    Ok(analysis
        .expand()
        .map(|(lemma, pos, features)| WordFormEntry::new(form.clone(), lemma, pos, features))
        .collect())
}

/// Parses a DELAF text into a word-form lexicon, one entry per line and
/// inflectional group.
pub fn parse_delaf(text: &str) -> Result<Lexicon, DelaError> {
    let mut entries = Vec::new();
    for (n, line) in content_lines(text) {
        entries.extend(parse_delaf_line(line).map_err(|r| parse_error(n, r))?);
    }
    Ok(Lexicon::WordForm(entries))
}

fn write_pair(out: &mut String, f: &Feature) {
    escape::escape_into(out, &f.name, DELA_RESERVED);
    out.push('=');
    escape::escape_into(out, &f.value, DELA_RESERVED);
}

/// Writes `pos+lemma features:group` for a merged feature list. The
/// inflectional group is the longest feature suffix made of inflectional
/// feature names.
pub(crate) fn write_analysis_tail(out: &mut String, pos: &str, features: &[Feature]) {
    escape::escape_into(out, pos, DELA_RESERVED);
    let split = features.len()
        - features
            .iter()
            .rev()
            .take_while(|f| INFLECTIONAL_FEATURES.contains(&f.name.as_str()))
            .count();
    for f in &features[..split] {
        out.push('+');
        write_pair(out, f);
    }
    for (i, f) in features[split..].iter().enumerate() {
        out.push(if i == 0 { ':' } else { ';' });
        write_pair(out, f);
    }
}

/// `lemma.pos+f=v:g=v`, the analysis part of a DELAF line.
pub fn write_analysis(lemma: &str, pos: &str, features: &[Feature]) -> String {
    let mut out = String::new();
    escape::escape_into(&mut out, lemma, DELA_RESERVED);
    out.push('.');
    write_analysis_tail(&mut out, pos, features);
    out
}

/// Writes a canonical DELAF text: one analysis per line, sorted byte-wise by
/// form, lemma, part of speech and serialized features.
pub fn write_delaf(entries: &[WordFormEntry]) -> String {
    let mut keyed: Vec<(&WordFormEntry, String)> = entries
        .iter()
        .map(|e| {
            let mut tail = String::new();
            write_analysis_tail(&mut tail, "", &e.features);
            (e, tail)
        })
        .collect();
    keyed.sort_by(|(a, ta), (b, tb)| {
        (&a.form, &a.lemma, a.pos.name(), ta).cmp(&(&b.form, &b.lemma, b.pos.name(), tb))
    });
    let mut out = String::new();
    for (e, _) in keyed {
        escape::escape_into(&mut out, &e.form, DELA_RESERVED);
        out.push(',');
        out.push_str(&write_analysis(&e.lemma, e.pos.name(), &e.features));
        out.push('\n');
    }
    out
}

/// Sorts word-form entries into canonical DELAF order.
pub fn canonical_word_forms(entries: &[WordFormEntry]) -> Vec<WordFormEntry> {
    match parse_delaf(&write_delaf(entries)) {
        Ok(Lexicon::WordForm(e)) => e,
        _ => unreachable!("canonical DELAF output always parses"),
    }
}

fn parse_delas_line(line: &str, id: u64) -> Result<LemmaEntry, String> {
    let units = escape::lex(line)?;
    let mut cur = Cursor::new(&units, DELA_RESERVED);
    let lemma = cur.field(&['.'])?;
    check_lemma_text(&lemma)?;
    cur.expect('.').map_err(|_| "missing '.' before part of speech".to_string())?;
    let pos = cur.field(&['+', ':'])?;
    if pos.is_empty() {
        return Err("empty part of speech".into());
    }
    check_token(&pos).map_err(|e| format!("part of speech {e}"))?;
    let mut features = Vec::new();
    while cur.peek_delim() == Some('+') {
        cur.bump();
        features.push(pair(&mut cur, &['+', ':'])?);
    }
    check_features(&features)?;
    let inflection = if cur.peek_delim() == Some(':') {
        cur.bump();
        let name = cur.field(&[])?;
        check_token(&name).map_err(|e| format!("paradigm {e}"))?;
        Inflection::Paradigm(name)
    } else {
        Inflection::None
    };
    if !cur.at_end() {
        return Err("trailing characters".into());
    }
    Ok(LemmaEntry::new(id, lemma, pos, features, inflection))
}

/// Parses a DELAS text into a lemma lexicon. Ids follow line order from 0.
pub fn parse_delas(text: &str) -> Result<Lexicon, DelaError> {
    let mut entries = Vec::new();
    for (n, line) in content_lines(text) {
        let id = entries.len() as u64;
        entries.push(parse_delas_line(line, id).map_err(|r| parse_error(n, r))?);
    }
    Ok(Lexicon::Lemma(entries))
}

/// Writes canonical sorted DELAS lines. Fails on word-form lexica and on
/// entries embedding inflected forms.
pub fn write_delas(lexicon: &Lexicon) -> Result<String, DelaError> {
    let entries = lexicon
        .lemma_entries()
        .ok_or_else(|| DelaError::Unsupported("a word-form lexicon as DELAS".into()))?;
    let mut keyed = Vec::with_capacity(entries.len());
    for e in entries {
        let mut tail = String::new();
        for f in &e.features {
            tail.push('+');
            write_pair(&mut tail, f);
        }
        match &e.inflection {
            Inflection::Paradigm(p) => {
                tail.push(':');
                escape::escape_into(&mut tail, p, DELA_RESERVED);
            }
            Inflection::None => {}
            Inflection::Explicit(_) => {
                return Err(DelaError::Unsupported(format!(
                    "entry {} ({}) with explicit inflected forms as DELAS",
                    e.id, e.lemma
                )))
            }
        }
        keyed.push((e, tail));
    }
    keyed.sort_by(|(a, ta), (b, tb)| (&a.lemma, a.pos.name(), ta).cmp(&(&b.lemma, b.pos.name(), tb)));
    let mut out = String::new();
    for (e, tail) in keyed {
        escape::escape_into(&mut out, &e.lemma, DELA_RESERVED);
        out.push('.');
        escape::escape_into(&mut out, e.pos.name(), DELA_RESERVED);
        out.push_str(&tail);
        out.push('\n');
    }
    Ok(out)
}
