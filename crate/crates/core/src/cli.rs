//! Command-line front end. Every subcommand is a short composition of
//! library calls; `run` takes its streams as arguments so it can be driven
//! from tests.

use std::fs;
use std::io::{self, Read, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::annotate::{self, CasePolicy};
use crate::dela::{self, DelaError};
use crate::fst::{self, BinaryError, CompileError, CompiledLexicon};
use crate::inflection::{self, InflectionError, ParadigmError, ParadigmSet};
use crate::masks::{self, MaskError};
use crate::model::{Lexicon, LexiconKind, WordFormEntry};
use crate::service::{self, LexiconStore, ServiceError};
use crate::xml::{self, Severity, XmlError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    DataError = 1,
    UsageError = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error(transparent)]
    Inflection(#[from] InflectionError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Dela(#[from] DelaError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("{0}")]
    Invalid(String),
}

fn input_error(path: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Input {
        path: path.to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Delaf,
    Delas,
    Xml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    Exact,
    Smart,
}

impl From<CaseArg> for CasePolicy {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Exact => CasePolicy::Exact,
            CaseArg::Smart => CasePolicy::Smart,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lexkit", version, about = "Lexicon conversion, inflection, compilation and corpus tagging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// File arguments accept `-` for standard input or output.
#[derive(Debug, Subcommand)]
enum Command {
    /// Convert between DELAF, DELAS and XML.
    Convert {
        #[arg(long, value_enum)]
        from: Format,
        #[arg(long, value_enum)]
        to: Format,
        input: String,
        output: String,
    },
    /// Expand paradigm references: lemma XML or DELAS to mixed XML.
    Inflect {
        #[arg(long)]
        paradigms: String,
        input: String,
        output: String,
    },
    /// Mixed XML to word-form XML.
    Flatten { input: String, output: String },
    /// Word-form XML or DELAF to a binary index.
    Compile { input: String, output: String },
    /// Automaton statistics of a binary index.
    Stats { index: String },
    /// Analyses of one form, as DELAF lines.
    Lookup {
        index: String,
        form: String,
        #[arg(long, value_enum, default_value = "smart")]
        case: CaseArg,
    },
    /// Tag running text into an annotated-corpus XML document.
    Tag {
        index: String,
        text: String,
        output: String,
        #[arg(long, value_enum, default_value = "smart")]
        case: CaseArg,
    },
    /// Tag running text and print the spans matched by each pattern line.
    Search {
        index: String,
        text: String,
        patterns: String,
        #[arg(long, value_enum, default_value = "smart")]
        case: CaseArg,
    },
    /// Report XML validation issues, one per line.
    Validate { input: String },
    /// Serve the management API over HTTP on 127.0.0.1.
    Serve {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        paradigms: String,
        #[arg(long)]
        port: u16,
        /// Directory of static viewer files served at `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn read(&mut self, path: &str) -> Result<Vec<u8>, CliError> {
        let io_err = |source| CliError::Io {
            path: path.to_string(),
            source,
        };
        if path == "-" {
            let mut buf = Vec::new();
            self.stdin.read_to_end(&mut buf).map_err(io_err)?;
            Ok(buf)
        } else {
            fs::read(path).map_err(io_err)
        }
    }

    fn read_text(&mut self, path: &str) -> Result<String, CliError> {
        String::from_utf8(self.read(path)?).map_err(|_| input_error(path, "not UTF-8"))
    }

    fn write(&mut self, path: &str, bytes: &[u8]) -> Result<(), CliError> {
        let io_err = |source| CliError::Io {
            path: path.to_string(),
            source,
        };
        if path == "-" {
            self.stdout.write_all(bytes).map_err(io_err)
        } else {
            fs::write(path, bytes).map_err(io_err)
        }
    }

    fn print(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.stdout, "{line}").map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
    }

    fn index(&mut self, path: &str) -> Result<CompiledLexicon, CliError> {
        fst::read_binary(&self.read(path)?).map_err(|e: BinaryError| input_error(path, e))
    }

    fn paradigms(&mut self, path: &str) -> Result<ParadigmSet, CliError> {
        let text = self.read_text(path)?;
        inflection::parse_paradigms(&text).map_err(|e: ParadigmError| input_error(path, e))
    }
}

fn looks_like_xml(bytes: &[u8]) -> bool {
    let bytes = bytes.strip_prefix(b"\xef\xbb\xbf").unwrap_or(bytes);
    bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'<')
}

fn parse_xml(path: &str, bytes: &[u8]) -> Result<Lexicon, CliError> {
    xml::parse_lexicon(bytes, None).map_err(|e: XmlError| input_error(path, e))
}

fn read_lexicon(io: &mut Io, path: &str, format: Format) -> Result<Lexicon, CliError> {
    let bytes = io.read(path)?;
    match format {
        Format::Xml => parse_xml(path, &bytes),
        Format::Delaf | Format::Delas => {
            let text = String::from_utf8(bytes).map_err(|_| input_error(path, "not UTF-8"))?;
            let parsed = if format == Format::Delaf {
                dela::parse_delaf(&text)
            } else {
                dela::parse_delas(&text)
            };
            parsed.map_err(|e| input_error(path, e))
        }
    }
}

/// Word forms of a word-form lexicon, or of a mixed one after flattening.
fn word_forms(lexicon: Lexicon) -> Result<Vec<WordFormEntry>, CliError> {
    let lexicon = match lexicon.kind() {
        LexiconKind::Mixed => inflection::flatten(&lexicon)?,
        _ => lexicon,
    };
    match lexicon {
        Lexicon::WordForm(entries) => Ok(entries),
        other => Err(CliError::Invalid(format!(
            "expected a word-form or mixed lexicon, found a {} lexicon (run inflect first)",
            other.kind()
        ))),
    }
}

fn read_corpus(io: &mut Io, index: &str, text: &str, case: CaseArg) -> Result<Vec<annotate::AnnotatedToken>, CliError> {
    let compiled = io.index(index)?;
    let text = io.read_text(text)?;
    Ok(annotate::tag_corpus(&compiled, &text, case.into()))
}

fn execute(command: Command, io: &mut Io) -> Result<ExitStatus, CliError> {
    match command {
        Command::Convert { from, to, input, output } => {
            let lexicon = read_lexicon(io, &input, from)?;
            let bytes = match to {
                Format::Xml => xml::write_lexicon(&lexicon),
                Format::Delaf => dela::write_delaf(&word_forms(lexicon)?).into_bytes(),
                Format::Delas => dela::write_delas(&lexicon)?.into_bytes(),
            };
            io.write(&output, &bytes)?;
        }
        Command::Inflect { paradigms, input, output } => {
            let paradigms = io.paradigms(&paradigms)?;
            let bytes = io.read(&input)?;
            let format = if looks_like_xml(&bytes) { Format::Xml } else { Format::Delas };
            let lexicon = match format {
                Format::Xml => parse_xml(&input, &bytes)?,
                _ => {
                    let text = String::from_utf8(bytes).map_err(|_| input_error(&input, "not UTF-8"))?;
                    dela::parse_delas(&text).map_err(|e| input_error(&input, e))?
                }
            };
            let mixed = inflection::expand_lexicon(&lexicon, &paradigms)?;
            io.write(&output, &xml::write_lexicon(&mixed))?;
        }
        Command::Flatten { input, output } => {
            let bytes = io.read(&input)?;
            let flat = inflection::flatten(&parse_xml(&input, &bytes)?)?;
            io.write(&output, &xml::write_lexicon(&flat))?;
        }
        Command::Compile { input, output } => {
            let bytes = io.read(&input)?;
            let lexicon = if looks_like_xml(&bytes) {
                parse_xml(&input, &bytes)?
            } else {
                let text = String::from_utf8(bytes).map_err(|_| input_error(&input, "not UTF-8"))?;
                dela::parse_delaf(&text).map_err(|e| input_error(&input, e))?
            };
            let compiled = fst::compile(&word_forms(lexicon)?)?;
            io.write(&output, &compiled.write_binary())?;
        }
        Command::Stats { index } => {
            let s = io.index(&index)?.stats();
            for line in [
                format!("state_count={}", s.state_count),
                format!("transition_count={}", s.transition_count),
                format!("key_count={}", s.key_count),
                format!("analysis_count={}", s.analysis_count),
                format!("serialized_bytes={}", s.serialized_bytes),
            ] {
                io.print(&line)?;
            }
        }
        Command::Lookup { index, form, case } => {
            let compiled = io.index(&index)?;
            for tag in annotate::lookup(&compiled, &form, case.into()) {
                let entry = WordFormEntry::new(form.clone(), tag.lemma, tag.pos.name(), tag.features);
                io.stdout.write_all(dela::write_delaf(&[entry]).as_bytes()).map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
            }
        }
        Command::Tag {
            index,
            text,
            output,
            case,
        } => {
            let started = Instant::now();
            let annotated = read_corpus(io, &index, &text, case)?;
            io.write(&output, &annotate::write_annotated(&annotated))?;
            let _ = writeln!(io.stderr, "elapsed_ms={}", started.elapsed().as_millis());
        }
        Command::Search {
            index,
            text,
            patterns,
            case,
        } => {
            let annotated = read_corpus(io, &index, &text, case)?;
            let pattern_text = io.read_text(&patterns)?;
            for (n, line) in pattern_text.lines().enumerate() {
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let pattern = masks::parse_pattern_line(line)
                    .map_err(|e: MaskError| input_error(&patterns, format!("line {}: {e}", n + 1)))?;
                for span in masks::search(&pattern, &annotated) {
                    let surface = annotated[span.first_token..=span.last_token]
                        .iter()
                        .map(|t| t.token.surface.as_str())
                        .collect::<Vec<_>>()
                        .join(" ");
                    io.print(&format!("{} {} {surface}", span.first_token, span.last_token))?;
                }
            }
        }
        Command::Validate { input } => {
            let issues = xml::validate(&io.read(&input)?);
            for issue in &issues {
                io.print(&issue.to_string())?;
            }
            if issues.iter().any(|i| i.severity == Severity::Error) {
                return Ok(ExitStatus::DataError);
            }
        }
        Command::Serve {
            lexicon,
            paradigms,
            port,
            assets,
        } => {
            let paradigms = io.paradigms(&paradigms)?;
            let store = Arc::new(LexiconStore::open(&lexicon, paradigms)?);
            let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
            let io_err = |source| CliError::Io {
                path: addr.to_string(),
                source,
            };
            let running = service::start(store, addr, assets).map_err(io_err)?;
            let _ = writeln!(io.stderr, "listening on http://{}", running.addr);
            running.wait().map_err(io_err)?;
        }
    }
    Ok(ExitStatus::Success)
}

/// Runs one command line (without the program name).
pub fn run<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("lexkit")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() {
                ExitStatus::UsageError
            } else {
                ExitStatus::Success
            };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return status;
        }
    };
    let mut io = Io { stdin, stdout, stderr };
    match execute(cli.command, &mut io) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            ExitStatus::DataError
        }
    }
}

/// Convenience for file-only invocations.
pub fn run_paths(args: &[&str]) -> (ExitStatus, Vec<u8>, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let status = run(args.iter().copied(), &mut io::empty(), &mut out, &mut err);
    (status, out, err)
}
