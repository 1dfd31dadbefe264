//! A small element tree built on quick-xml events, with byte offsets kept for
//! diagnostics, plus the escaping helpers used by the writers.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

#[derive(Debug, Default)]
pub(crate) struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
    pub text: String,
    /// Byte offset of the opening `<`.
    pub offset: usize,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn has_text(&self) -> bool {
        !self.text.trim().is_empty()
    }
}

/// A syntax error at a byte offset.
#[derive(Debug)]
pub(crate) struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

fn syntax(offset: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        offset,
        message: message.into(),
    }
}

fn start_element(e: &BytesStart<'_>, offset: usize) -> Result<Element, SyntaxError> {
    let name = std::str::from_utf8(e.name().as_ref())
        .map_err(|_| syntax(offset, "element name is not UTF-8"))?
        .to_string();
    let mut attrs = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| syntax(offset, format!("malformed attribute: {err}")))?;
        let key = std::str::from_utf8(attr.key.as_ref())
            .map_err(|_| syntax(offset, "attribute name is not UTF-8"))?
            .to_string();
        let value = attr
            .unescape_value()
            .map_err(|err| syntax(offset, format!("attribute {key:?}: {err}")))?
            .into_owned();
        attrs.push((key, value));
    }
    Ok(Element {
        name,
        attrs,
        offset,
        ..Default::default()
    })
}

/// Parses a whole UTF-8 document and returns its root element.
pub(crate) fn parse_document(doc: &[u8]) -> Result<Element, SyntaxError> {
    let text = std::str::from_utf8(doc).map_err(|e| syntax(e.valid_up_to(), "document is not valid UTF-8"))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let bom = doc.len() - text.len();
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let offset = reader.buffer_position() as usize + bom;
        let event = reader.read_event().map_err(|e| {
            syntax(reader.error_position() as usize + bom, format!("malformed XML: {e}"))
        })?;
        match event {
            Event::Start(e) => stack.push(start_element(&e, offset)?),
            Event::Empty(e) => {
                let el = start_element(&e, offset)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(syntax(offset, "more than one root element")),
                }
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| syntax(offset, "unexpected closing tag"))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(syntax(offset, "more than one root element")),
                }
            }
            Event::Text(t) => {
                let s = t.unescape().map_err(|e| syntax(offset, format!("malformed text: {e}")))?;
                match stack.last_mut() {
                    Some(parent) => parent.text.push_str(&s),
                    None if s.trim().is_empty() => {}
                    None => return Err(syntax(offset, "text outside the root element")),
                }
            }
            Event::CData(c) => {
                let s = std::str::from_utf8(&c).map_err(|_| syntax(offset, "CDATA is not UTF-8"))?;
                match stack.last_mut() {
                    Some(parent) => parent.text.push_str(s),
                    None => return Err(syntax(offset, "CDATA outside the root element")),
                }
            }
            Event::Decl(_) | Event::PI(_) | Event::Comment(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if let Some(open) = stack.last() {
        return Err(syntax(open.offset, format!("element <{}> is never closed", open.name)));
    }
    root.ok_or_else(|| syntax(0, "document has no root element"))
}

/// 1-based line and column (in characters) of a byte offset.
pub(crate) struct LineIndex<'a> {
    text: &'a [u8],
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub fn new(text: &'a [u8]) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.iter().enumerate().filter(|(_, b)| **b == b'\n').map(|(i, _)| i + 1));
        LineIndex { text, line_starts }
    }

    pub fn locate(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.text.len());
        let line = self.line_starts.partition_point(|&s| s <= offset);
        let start = self.line_starts[line - 1];
        let column = String::from_utf8_lossy(&self.text[start..offset]).chars().count() + 1;
        (line, column)
    }
}

fn escape_into(out: &mut String, s: &str, attribute: bool) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\'' if attribute => out.push_str("&apos;"),
            '"' if attribute => out.push_str("&quot;"),
            '\n' | '\t' if attribute => out.push_str(&format!("&#{};", c as u32)),
            c if c == '\r' || (c.is_control() && c != '\n' && c != '\t') => {
                out.push_str(&format!("&#{};", c as u32))
            }
            c => out.push(c),
        }
    }
}

pub(crate) fn push_text(out: &mut String, s: &str) {
    escape_into(out, s, false);
}

pub(crate) fn push_attr(out: &mut String, s: &str) {
    escape_into(out, s, true);
}

pub(crate) const DECLARATION: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
