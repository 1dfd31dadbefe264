//! Lexicon management toolkit: lemma and word-form lexicons, DELA and XML
//! formats, paradigm-based inflection, compiled minimal automata, corpus
//! annotation and lexical-mask search.

pub mod annotate;
pub mod cli;
pub mod dela;
pub(crate) mod escape;
pub mod fst;
pub mod inflection;
pub mod masks;
pub mod model;
pub mod service;
pub mod synth;
pub mod xml;
pub(crate) mod xml_tree;
