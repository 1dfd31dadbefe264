//! Compilation of word-form lexica into a minimal deterministic acyclic
//! automaton whose keys are numbered by lexicographic rank.
//!
//! The automaton stores no payload on its states, so every right-language
//! equivalent pair of states can be merged. Analyses live in a side pool and
//! are addressed by the rank of the key, computed during the walk from the
//! per-state `accepted_count`.
//!
//! An analysis is split into two strings of DELAF analysis syntax
//! (`lemma.pos+f=v:g=v`): the lemma written relative to the key (number of
//! trailing characters to remove, then the suffix to append) and the tail
//! after the dot. Both live once in a string table. Pool records are a `u16`
//! analysis count followed by `u32` string-table index pairs; identical
//! records are stored once and shared between ranks.

use std::collections::HashMap;

use thiserror::Error;

use crate::dela;
use crate::escape::{self, Cursor, DELA_RESERVED};
use crate::model::{WordFormEntry, WordTag};

pub const MAGIC: &[u8; 4] = b"LXC1";
pub const VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 5 * 4;
const STATE_LEN: usize = 1 + 4 + 4 + 2;
const TRANSITION_LEN: usize = 4 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct State {
    pub is_final: bool,
    /// Number of keys accepted from this state, the empty key included when
    /// the state is final.
    pub accepted_count: u32,
    pub first_transition: u32,
    pub transition_count: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub label: char,
    pub target: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledLexicon {
    states: Vec<State>,
    transitions: Vec<Transition>,
    strings: Vec<String>,
    payload_offsets: Vec<u32>,
    payload_pool: Vec<u8>,
    max_key_words: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompiledStats {
    pub state_count: usize,
    pub transition_count: usize,
    pub serialized_bytes: usize,
    pub key_count: usize,
    pub analysis_count: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("form {form:?} has {count} analyses, more than a record can hold")]
    TooManyAnalyses { form: String, count: usize },
    #[error("state fan-out of {0} transitions exceeds the index format")]
    FanOut(usize),
    #[error("{0} exceeds the 32-bit limits of the index format")]
    Capacity(&'static str),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BinaryError {
    #[error("not a compiled lexicon (bad magic)")]
    BadMagic,
    #[error("unsupported index version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated index: needed {needed} bytes, found {available}")]
    Truncated { needed: usize, available: usize },
    #[error("{what} {index} out of bounds (limit {bound})")]
    IndexOutOfBounds { what: &'static str, index: u64, bound: u64 },
    #[error("malformed index: {0}")]
    Malformed(String),
}

struct Node {
    is_final: bool,
    edges: Vec<(char, usize)>,
}

/// Incremental construction over sorted keys: the path of the previous key
/// stays open and is folded into the register once a new key diverges from
/// it.
struct Builder {
    nodes: Vec<Node>,
    free: Vec<usize>,
    register: HashMap<(bool, Vec<(char, usize)>), usize>,
    path: Vec<usize>,
    previous: Vec<char>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            nodes: vec![Node {
                is_final: false,
                edges: Vec::new(),
            }],
            free: Vec::new(),
            register: HashMap::new(),
            path: vec![0],
            previous: Vec::new(),
        }
    }

    fn alloc(&mut self) -> usize {
        let node = Node {
            is_final: false,
            edges: Vec::new(),
        };
        match self.free.pop() {
            Some(i) => {
                self.nodes[i] = node;
                i
            }
            None => {
                self.nodes.push(node);
                self.nodes.len() - 1
            }
        }
    }

    fn fold(&mut self, depth: usize) {
        while self.path.len() > depth + 1 {
            let child = self.path.pop().expect("path below depth");
            let parent = *self.path.last().expect("root stays on the path");
            let key = (self.nodes[child].is_final, std::mem::take(&mut self.nodes[child].edges));
            match self.register.get(&key) {
                Some(&existing) => {
                    self.nodes[parent].edges.last_mut().expect("parent links child").1 = existing;
                    self.free.push(child);
                }
                None => {
                    self.nodes[child].edges = key.1.clone();
                    self.register.insert(key, child);
                }
            }
        }
    }

    /// Keys must arrive strictly increasing.
    fn insert(&mut self, key: &str) {
        let word: Vec<char> = key.chars().collect();
        let common = self.previous.iter().zip(&word).take_while(|(a, b)| a == b).count();
        self.fold(common);
        for &c in &word[common..] {
            let node = self.alloc();
            let last = *self.path.last().expect("root stays on the path");
            self.nodes[last].edges.push((c, node));
            self.path.push(node);
        }
        let last = *self.path.last().expect("root stays on the path");
        self.nodes[last].is_final = true;
        self.previous = word;
    }

    /// Numbers reachable nodes in reverse post-order so that every
    /// transition points to a higher state index and the root is state 0.
    fn finish(mut self) -> Result<(Vec<State>, Vec<Transition>), CompileError> {
        self.fold(0);
        let mut order = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![(0usize, 0usize)];
        seen[0] = true;
        while let Some((node, next)) = stack.last_mut() {
            let node = *node;
            if let Some(&(_, child)) = self.nodes[node].edges.get(*next) {
                *next += 1;
                if !seen[child] {
                    seen[child] = true;
                    stack.push((child, 0));
                }
            } else {
                order.push(node);
                stack.pop();
            }
        }
        order.reverse();
        let mut id = vec![u32::MAX; self.nodes.len()];
        for (i, &n) in order.iter().enumerate() {
            id[n] = i as u32;
        }
        let mut states = Vec::with_capacity(order.len());
        let mut transitions = Vec::new();
        for &n in &order {
            let node = &self.nodes[n];
            let count = u16::try_from(node.edges.len()).map_err(|_| CompileError::FanOut(node.edges.len()))?;
            let first = u32::try_from(transitions.len()).map_err(|_| CompileError::Capacity("transition count"))?;
            states.push(State {
                is_final: node.is_final,
                accepted_count: 0,
                first_transition: first,
                transition_count: count,
            });
            transitions.extend(node.edges.iter().map(|&(label, t)| Transition { label, target: id[t] }));
        }
        fill_counts(&mut states, &transitions);
        Ok((states, transitions))
    }
}

/// Accepted counts, assuming every transition points forward.
fn fill_counts(states: &mut [State], transitions: &[Transition]) {
    for i in (0..states.len()).rev() {
        let s = states[i];
        let below: u64 = transitions[s.first_transition as usize..][..s.transition_count as usize]
            .iter()
            .map(|t| states[t.target as usize].accepted_count as u64)
            .sum();
        states[i].accepted_count = (below + s.is_final as u64).min(u32::MAX as u64) as u32;
    }
}

fn relative_lemma(form: &str, lemma: &str) -> String {
    let common = form.chars().zip(lemma.chars()).take_while(|(a, b)| a == b).count();
    let strip = form.chars().count() - common;
    let append: String = lemma.chars().skip(common).collect();
    let mut out = strip.to_string();
    if append.starts_with(|c: char| c.is_ascii_digit()) {
        out.push('\\');
    }
    escape::escape_into(&mut out, &append, DELA_RESERVED);
    out
}

/// String-table index pairs of the record at `offset`.
fn decode_record(pool: &[u8], offset: usize, strings: usize) -> Result<Vec<(usize, usize)>, String> {
    let word = |at: usize| {
        pool.get(at..at + 4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
            .ok_or("record past end of pool")
    };
    let count = pool
        .get(offset..offset + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]) as usize)
        .ok_or("record header past end of pool")?;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let at = offset + 2 + i * 8;
        let (lemma, tail) = (word(at)?, word(at + 4)?);
        if lemma >= strings || tail >= strings {
            return Err(format!("string index {} out of bounds", lemma.max(tail)));
        }
        out.push((lemma, tail));
    }
    Ok(out)
}

fn decode_analysis(form: &str, lemma: &str, tail: &str) -> Result<WordTag, String> {
    let units = escape::lex(&format!("{lemma}.{tail}"))?;
    let mut cur = Cursor::new(&units, DELA_RESERVED);
    let strip = cur.number().ok_or("analysis does not start with a strip count")?;
    let append = cur.field(&['.'])?;
    let len = form.chars().count();
    let keep = len.saturating_sub(strip);
    let mut lemma: String = form.chars().take(keep).collect();
    lemma.push_str(&append);
    let line = dela::analysis_tail(&mut cur, lemma)?;
    let mut tags = line.expand();
    let (lemma, pos, features) = tags.next().ok_or("empty analysis")?;
    if tags.next().is_some() {
        return Err("analysis holds several groups".into());
    }
    Ok(WordTag::new(lemma, pos, features))
}

/// Compiles word-form entries. Keys are the distinct forms; the analyses of
/// a form are deduplicated and ordered by their DELAF serialization, so the
/// result depends only on the form-to-analyses mapping.
pub fn compile(entries: &[WordFormEntry]) -> Result<CompiledLexicon, CompileError> {
    let mut rows: Vec<(&str, String, &WordFormEntry)> = entries
        .iter()
        .map(|e| (e.form.as_str(), dela::write_analysis(&e.lemma, e.pos.name(), &e.features), e))
        .collect();
    rows.sort_unstable_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    rows.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let mut builder = Builder::new();
    let mut payload_offsets = Vec::new();
    let mut payload_pool = Vec::new();
    let mut shared: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut strings = Vec::new();
    let mut string_ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |text: String| -> Result<u32, CompileError> {
        if let Some(&id) = string_ids.get(&text) {
            return Ok(id);
        }
        let id = u32::try_from(strings.len()).map_err(|_| CompileError::Capacity("string table"))?;
        strings.push(text.clone());
        string_ids.insert(text, id);
        Ok(id)
    };
    let mut record = Vec::new();
    for group in rows.chunk_by(|a, b| a.0 == b.0) {
        let form = group[0].0;
        builder.insert(form);
        let count = u16::try_from(group.len()).map_err(|_| CompileError::TooManyAnalyses {
            form: form.to_string(),
            count: group.len(),
        })?;
        record.clear();
        record.extend_from_slice(&count.to_le_bytes());
        for (_, _, e) in group {
            let mut tail = String::new();
            dela::write_analysis_tail(&mut tail, e.pos.name(), &e.features);
            record.extend_from_slice(&intern(relative_lemma(form, &e.lemma))?.to_le_bytes());
            record.extend_from_slice(&intern(tail)?.to_le_bytes());
        }
        let offset = match shared.get(&record) {
            Some(&o) => o,
            None => {
                let o = u32::try_from(payload_pool.len()).map_err(|_| CompileError::Capacity("payload pool"))?;
                payload_pool.extend_from_slice(&record);
                shared.insert(record.clone(), o);
                o
            }
        };
        payload_offsets.push(offset);
    }
    u32::try_from(payload_pool.len()).map_err(|_| CompileError::Capacity("payload pool"))?;
    u32::try_from(payload_offsets.len()).map_err(|_| CompileError::Capacity("key count"))?;
    let (states, transitions) = builder.finish()?;
    Ok(CompiledLexicon::assemble(states, transitions, strings, payload_offsets, payload_pool))
}

impl CompiledLexicon {
    fn assemble(
        states: Vec<State>,
        transitions: Vec<Transition>,
        strings: Vec<String>,
        payload_offsets: Vec<u32>,
        payload_pool: Vec<u8>,
    ) -> Self {
        let mut c = CompiledLexicon {
            states,
            transitions,
            strings,
            payload_offsets,
            payload_pool,
            max_key_words: 0,
        };
        c.max_key_words = c.longest_key_words();
        c
    }

    fn longest_key_words(&self) -> usize {
        // Most spaces on a path to a final state; None when no final state is
        // reachable.
        let mut best: Vec<Option<usize>> = vec![None; self.states.len()];
        for i in (0..self.states.len()).rev() {
            let s = self.states[i];
            let mut b = s.is_final.then_some(0);
            for t in self.out(i) {
                if let Some(v) = best[t.target as usize] {
                    let v = v + usize::from(t.label == ' ');
                    b = Some(b.map_or(v, |x: usize| x.max(v)));
                }
            }
            best[i] = b;
        }
        best.first().copied().flatten().map_or(0, |spaces| spaces + 1)
    }

    fn out(&self, state: usize) -> &[Transition] {
        let s = self.states[state];
        &self.transitions[s.first_transition as usize..][..s.transition_count as usize]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn key_count(&self) -> usize {
        self.payload_offsets.len()
    }

    /// Word count of the longest key, counting space-separated words.
    pub fn max_key_words(&self) -> usize {
        self.max_key_words
    }

    /// Rank of `key` among all accepted keys in lexicographic (scalar) order.
    pub fn rank_lookup(&self, key: &str) -> Option<usize> {
        self.rank_lookup_counting(key).0
    }

    /// [`Self::rank_lookup`] that also reports the number of states visited.
    pub fn rank_lookup_counting(&self, key: &str) -> (Option<usize>, usize) {
        let mut state = 0usize;
        let mut visits = 1;
        let mut rank = 0usize;
        for c in key.chars() {
            let s = self.states[state];
            rank += s.is_final as usize;
            let out = self.out(state);
            let Ok(i) = out.binary_search_by_key(&c, |t| t.label) else {
                return (None, visits);
            };
            rank += out[..i]
                .iter()
                .map(|t| self.states[t.target as usize].accepted_count as usize)
                .sum::<usize>();
            state = out[i].target as usize;
            visits += 1;
        }
        (self.states[state].is_final.then_some(rank), visits)
    }

    /// Analyses stored for `key`, in compiled order.
    pub fn analyses(&self, key: &str) -> Vec<WordTag> {
        let Some(rank) = self.rank_lookup(key) else {
            return Vec::new();
        };
        let offset = self.payload_offsets[rank] as usize;
        decode_record(&self.payload_pool, offset, self.strings.len())
            .and_then(|pairs| {
                pairs
                    .into_iter()
                    .map(|(l, t)| decode_analysis(key, &self.strings[l], &self.strings[t]))
                    .collect()
            })
            .expect("records are validated at construction")
    }

    /// All keys in rank order.
    pub fn keys(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.key_count());
        let mut prefix = String::new();
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        if self.states[0].is_final {
            out.push(String::new());
        }
        while let Some((state, next)) = stack.last_mut() {
            let out_edges = self.out(*state);
            if let Some(t) = out_edges.get(*next) {
                *next += 1;
                prefix.push(t.label);
                if self.states[t.target as usize].is_final {
                    out.push(prefix.clone());
                }
                stack.push((t.target as usize, 0));
            } else {
                stack.pop();
                if !stack.is_empty() {
                    prefix.pop();
                }
            }
        }
        out
    }

    pub fn stats(&self) -> CompiledStats {
        let mut seen = HashMap::new();
        let analysis_count = self
            .payload_offsets
            .iter()
            .map(|&o| {
                *seen.entry(o).or_insert_with(|| {
                    u16::from_le_bytes([self.payload_pool[o as usize], self.payload_pool[o as usize + 1]]) as usize
                })
            })
            .sum();
        CompiledStats {
            state_count: self.states.len(),
            transition_count: self.transitions.len(),
            serialized_bytes: self.serialized_len(),
            key_count: self.key_count(),
            analysis_count,
        }
    }

    fn serialized_len(&self) -> usize {
        HEADER_LEN
            + self.states.len() * STATE_LEN
            + self.transitions.len() * TRANSITION_LEN
            + self.strings.iter().map(|s| 4 + s.len()).sum::<usize>()
            + self.payload_offsets.len() * 4
            + self.payload_pool.len()
    }

    /// Little-endian binary image, see [`read_binary`].
    pub fn write_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for n in [
            self.states.len(),
            self.transitions.len(),
            self.strings.len(),
            self.payload_offsets.len(),
            self.payload_pool.len(),
        ] {
            out.extend_from_slice(&(n as u32).to_le_bytes());
        }
        for s in &self.states {
            out.push(s.is_final as u8);
            out.extend_from_slice(&s.accepted_count.to_le_bytes());
            out.extend_from_slice(&s.first_transition.to_le_bytes());
            out.extend_from_slice(&s.transition_count.to_le_bytes());
        }
        for t in &self.transitions {
            out.extend_from_slice(&(t.label as u32).to_le_bytes());
            out.extend_from_slice(&t.target.to_le_bytes());
        }
        for s in &self.strings {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        for o in &self.payload_offsets {
            out.extend_from_slice(&o.to_le_bytes());
        }
        out.extend_from_slice(&self.payload_pool);
        out
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], BinaryError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(BinaryError::Truncated {
            needed: self.at.saturating_add(n),
            available: self.bytes.len(),
        })?;
        let slice = &self.bytes[self.at..end];
        self.at = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, BinaryError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, BinaryError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, BinaryError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

fn out_of_bounds(what: &'static str, index: u64, bound: u64) -> BinaryError {
    BinaryError::IndexOutOfBounds { what, index, bound }
}

/// Reads and fully validates a binary index. Transitions must point to
/// higher state indices, which the writer guarantees.
pub fn read_binary(bytes: &[u8]) -> Result<CompiledLexicon, BinaryError> {
    let mut r = ByteReader { bytes, at: 0 };
    if r.take(4).map_err(|_| BinaryError::BadMagic)? != MAGIC {
        return Err(BinaryError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(BinaryError::UnsupportedVersion(version));
    }
    let state_count = r.u32()? as usize;
    let transition_count = r.u32()? as usize;
    let string_count = r.u32()? as usize;
    let key_count = r.u32()? as usize;
    let pool_len = r.u32()? as usize;
    let needed = HEADER_LEN as u64
        + state_count as u64 * STATE_LEN as u64
        + transition_count as u64 * TRANSITION_LEN as u64
        + string_count as u64 * 4
        + key_count as u64 * 4
        + pool_len as u64;
    if needed > bytes.len() as u64 {
        return Err(BinaryError::Truncated {
            needed: needed as usize,
            available: bytes.len(),
        });
    }
    if state_count == 0 {
        return Err(BinaryError::Malformed("no root state".into()));
    }
    let mut states = Vec::with_capacity(state_count);
    for _ in 0..state_count {
        let is_final = match r.u8()? {
            0 => false,
            1 => true,
            b => return Err(BinaryError::Malformed(format!("final flag {b}"))),
        };
        states.push(State {
            is_final,
            accepted_count: r.u32()?,
            first_transition: r.u32()?,
            transition_count: r.u16()?,
        });
    }
    let mut transitions = Vec::with_capacity(transition_count);
    for _ in 0..transition_count {
        let raw = r.u32()?;
        let label = char::from_u32(raw).ok_or_else(|| BinaryError::Malformed(format!("label {raw:#x} is not a Unicode scalar")))?;
        let target = r.u32()?;
        if target as usize >= state_count {
            return Err(out_of_bounds("transition target", target as u64, state_count as u64));
        }
        transitions.push(Transition { label, target });
    }
    let mut strings = Vec::with_capacity(string_count);
    for _ in 0..string_count {
        let len = r.u32()? as usize;
        let text = std::str::from_utf8(r.take(len)?).map_err(|_| BinaryError::Malformed("string is not UTF-8".into()))?;
        strings.push(text.to_string());
    }
    let mut payload_offsets = Vec::with_capacity(key_count);
    for _ in 0..key_count {
        let o = r.u32()?;
        if o as usize >= pool_len {
            return Err(out_of_bounds("payload offset", o as u64, pool_len as u64));
        }
        payload_offsets.push(o);
    }
    let payload_pool = r.take(pool_len)?.to_vec();
    if r.at < bytes.len() {
        return Err(BinaryError::Malformed(format!("{} trailing bytes", bytes.len() - r.at)));
    }

    for (i, s) in states.iter().enumerate() {
        let end = s.first_transition as u64 + s.transition_count as u64;
        if end > transition_count as u64 {
            return Err(out_of_bounds("transition range end", end, transition_count as u64));
        }
        let out = &transitions[s.first_transition as usize..end as usize];
        if out.windows(2).any(|w| w[0].label >= w[1].label) {
            return Err(BinaryError::Malformed(format!("state {i} labels are not strictly increasing")));
        }
        if out.iter().any(|t| t.target as usize <= i) {
            return Err(BinaryError::Malformed(format!("state {i} has a backward transition")));
        }
    }
    let mut expected = states.clone();
    fill_counts(&mut expected, &transitions);
    if expected != states {
        return Err(BinaryError::Malformed("accepted counts are inconsistent".into()));
    }
    if states[0].accepted_count as usize != key_count {
        return Err(BinaryError::Malformed(format!(
            "root accepts {} keys but {key_count} payload offsets are present",
            states[0].accepted_count
        )));
    }
    let mut checked = std::collections::HashSet::new();
    for &o in &payload_offsets {
        if checked.insert(o) {
            let pairs = decode_record(&payload_pool, o as usize, strings.len()).map_err(BinaryError::Malformed)?;
            for (l, t) in pairs {
                decode_analysis("", &strings[l], &strings[t])
                    .map_err(|e| BinaryError::Malformed(format!("record at {o}: {e}")))?;
            }
        }
    }
    Ok(CompiledLexicon::assemble(states, transitions, strings, payload_offsets, payload_pool))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Feature;
    use proptest::prelude::*;
    use std::collections::{BTreeSet, HashSet};

    fn fig3() -> Vec<WordFormEntry> {
        vec![
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
        ]
    }

    fn keys(words: &[&str]) -> Vec<WordFormEntry> {
        words.iter().map(|w| WordFormEntry::new(*w, *w, "x", vec![])).collect()
    }

    #[test]
    fn figure_three_automaton() {
        let c = compile(&fig3()).unwrap();
        let s = c.stats();
        assert_eq!((s.state_count, s.transition_count, s.key_count, s.analysis_count), (6, 5, 2, 2));
        assert_eq!(c.rank_lookup("game"), Some(0));
        assert_eq!(c.rank_lookup("games"), Some(1));
        assert_eq!(c.rank_lookup("gam"), None);
        assert_eq!(c.rank_lookup("gamesx"), None);
        assert_eq!(c.analyses("games"), vec![fig3()[1].tag()]);
        assert_eq!(c.keys(), ["game", "games"]);
    }

    #[test]
    fn empty_and_single() {
        let c = compile(&[]).unwrap();
        assert_eq!((c.states().len(), c.transitions().len()), (1, 0));
        assert!(!c.states()[0].is_final);
        assert_eq!(c.rank_lookup(""), None);
        assert_eq!(c.max_key_words(), 0);
        let c = compile(&keys(&["a"])).unwrap();
        assert_eq!((c.states().len(), c.transitions().len()), (2, 1));
        assert_eq!(c.states()[0].accepted_count, 1);
    }

    #[test]
    fn suffixes_are_shared() {
        // cat, cats, hat, hats: the "at"/"ats" tails merge.
        let c = compile(&keys(&["cats", "cat", "hats", "hat"])).unwrap();
        assert_eq!(c.states().len(), 5);
        assert_eq!(c.transitions().len(), 5);
        let ranks: Vec<_> = ["cat", "cats", "hat", "hats"].iter().map(|k| c.rank_lookup(k)).collect();
        assert_eq!(ranks, [Some(0), Some(1), Some(2), Some(3)]);
    }

    #[test]
    fn lemma_is_stored_relative_to_the_form() {
        let entries = vec![
            WordFormEntry::new("tries", "try", "verb", vec![]),
            WordFormEntry::new("went", "go", "verb", vec![]),
            WordFormEntry::new("a1", "a12", "x", vec![]),
            WordFormEntry::new("x", "x.y,z", "p", vec![Feature::new("case", "a:b")]),
        ];
        let c = compile(&entries).unwrap();
        for e in &entries {
            assert_eq!(c.analyses(&e.form), vec![e.tag()]);
        }
        assert_eq!(relative_lemma("tries", "try"), "3y");
        assert_eq!(relative_lemma("a1", "a12"), "0\\2");
    }

    #[test]
    fn records_are_shared_and_deduplicated() {
        let mut entries = keys(&["bat", "cat", "cat"]);
        entries.push(WordFormEntry::new("cat", "cat", "y", vec![]));
        let c = compile(&entries).unwrap();
        assert_eq!(c.analyses("cat").len(), 2);
        assert_eq!(c.analyses("bat").len(), 1);
        let s = c.stats();
        assert_eq!(s.analysis_count, 3);
        // bat and cat-as-x share a record only if their analyses coincide.
        let single = compile(&keys(&["bat", "cat"])).unwrap();
        assert_eq!(single.payload_offsets[0], single.payload_offsets[1]);
    }

    #[test]
    fn order_of_entries_does_not_matter() {
        let mut a = fig3();
        a.push(WordFormEntry::new("game", "game", "verb", vec![]));
        let mut b = a.clone();
        b.reverse();
        assert_eq!(compile(&a).unwrap().write_binary(), compile(&b).unwrap().write_binary());
    }

    #[test]
    fn multi_word_key_width() {
        let c = compile(&keys(&["hot", "hot dog", "a b c"])).unwrap();
        assert_eq!(c.max_key_words(), 3);
    }

    #[test]
    fn binary_round_trip() {
        let c = compile(&fig3()).unwrap();
        let bytes = c.write_binary();
        assert_eq!(&bytes[..4], MAGIC);
        assert_eq!(bytes.len(), c.stats().serialized_bytes);
        let back = read_binary(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.write_binary(), bytes);
    }

    #[test]
    fn binary_errors() {
        let c = compile(&fig3()).unwrap();
        let bytes = c.write_binary();
        let mut bad = bytes.clone();
        bad[0] ^= 0xff;
        assert_eq!(read_binary(&bad), Err(BinaryError::BadMagic));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert_eq!(read_binary(&bad), Err(BinaryError::UnsupportedVersion(2)));
        assert!(matches!(read_binary(&bytes[..bytes.len() - 1]), Err(BinaryError::Truncated { .. })));
        assert!(matches!(read_binary(&bytes[..10]), Err(BinaryError::Truncated { .. })));
        assert_eq!(read_binary(&bytes[..2]), Err(BinaryError::BadMagic));
        // first transition target
        let target_at = HEADER_LEN + 6 * STATE_LEN + 4;
        let mut bad = bytes.clone();
        bad[target_at..target_at + 4].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(read_binary(&bad), Err(BinaryError::IndexOutOfBounds { what: "transition target", .. })));
        let strings_len: usize = c.strings.iter().map(|s| 4 + s.len()).sum();
        let offsets_at = HEADER_LEN + 6 * STATE_LEN + 5 * TRANSITION_LEN + strings_len;
        let mut bad = bytes.clone();
        bad[offsets_at..offsets_at + 4].copy_from_slice(&10_000u32.to_le_bytes());
        assert!(matches!(read_binary(&bad), Err(BinaryError::IndexOutOfBounds { what: "payload offset", .. })));
        // first string index of the first record
        let pool_at = offsets_at + 2 * 4 + 2;
        let mut bad = bytes.clone();
        bad[pool_at..pool_at + 4].copy_from_slice(&77u32.to_le_bytes());
        assert!(matches!(read_binary(&bad), Err(BinaryError::Malformed(m)) if m.contains("string index")));
        let mut bad = bytes.clone();
        bad[HEADER_LEN + 1] ^= 1;
        assert!(matches!(read_binary(&bad), Err(BinaryError::Malformed(_))));
        let mut bad = bytes;
        bad.push(0);
        assert!(matches!(read_binary(&bad), Err(BinaryError::Malformed(_))));
    }

    fn arb_entries() -> impl Strategy<Value = Vec<WordFormEntry>> {
        let entry = (
            "[abcé ]{1,5}",
            "[a-c.,\\\\]{1,4}",
            prop_oneof![Just("n"), Just("v")],
            proptest::option::of("[a-c]{1,2}"),
        )
            .prop_map(|(form, lemma, pos, number)| {
                let features = number.map(|v| vec![Feature::new("number", v)]).unwrap_or_default();
                WordFormEntry::new(form, lemma, pos, features)
            });
        proptest::collection::vec(entry, 0..25)
    }

    /// Distinct right languages over all prefixes: the size of the minimal
    /// trim automaton.
    fn minimal_state_count(keys: &BTreeSet<String>) -> usize {
        let mut languages: HashSet<BTreeSet<&str>> = HashSet::new();
        let mut prefixes: HashSet<&str> = HashSet::new();
        for k in keys {
            for (i, _) in k.char_indices().chain([(k.len(), ' ')]) {
                prefixes.insert(&k[..i]);
            }
        }
        if prefixes.is_empty() {
            prefixes.insert("");
        }
        for p in prefixes {
            languages.insert(keys.iter().filter_map(|k| k.strip_prefix(p)).collect());
        }
        languages.len()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn agrees_with_linear_scan(entries in arb_entries(), probes in proptest::collection::vec("[abcd é]{0,5}", 0..10)) {
            let c = compile(&entries).unwrap();
            let keys: BTreeSet<String> = entries.iter().map(|e| e.form.clone()).collect();
            prop_assert_eq!(c.key_count(), keys.len());
            prop_assert_eq!(c.keys(), keys.iter().cloned().collect::<Vec<_>>());
            for (rank, k) in keys.iter().enumerate() {
                prop_assert_eq!(c.rank_lookup(k), Some(rank));
                let expected: BTreeSet<WordTag> = entries.iter().filter(|e| &e.form == k).map(|e| e.tag()).collect();
                let got = c.analyses(k);
                prop_assert_eq!(got.len(), expected.len());
                prop_assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), expected);
            }
            for p in probes.iter().chain(keys.iter()) {
                let (rank, visits) = c.rank_lookup_counting(p);
                prop_assert_eq!(rank.is_some(), keys.contains(p));
                prop_assert!(visits <= p.chars().count() + 1);
                if !keys.contains(p) {
                    prop_assert!(c.analyses(p).is_empty());
                }
            }
        }

        #[test]
        fn minimal_and_order_independent(entries in arb_entries(), seed in any::<u64>()) {
            let c = compile(&entries).unwrap();
            let keys: BTreeSet<String> = entries.iter().map(|e| e.form.clone()).collect();
            prop_assert_eq!(c.states().len(), minimal_state_count(&keys));
            let mut shuffled = entries.clone();
            let mut x = seed | 1;
            for i in (1..shuffled.len()).rev() {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                shuffled.swap(i, (x % (i as u64 + 1)) as usize);
            }
            let bytes = c.write_binary();
            prop_assert_eq!(compile(&shuffled).unwrap().write_binary(), bytes.clone());
            prop_assert_eq!(read_binary(&bytes).unwrap(), c);
        }
    }
}
