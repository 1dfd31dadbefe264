//! Backslash escaping shared by the line-oriented text formats (DELAF, DELAS,
//! paradigm files and lexical masks).
//!
//! Any character may be escaped with a backslash and then stands for itself;
//! `\n` and `\r` stand for line feed and carriage return. Writers escape only
//! what the grammar needs.

/// Characters with structural meaning in DELA lines.
pub(crate) const DELA_RESERVED: &[char] = &[',', '.', '+', ':', ';', '=', '\\', '#'];

/// One input character after unescaping. `escaped` characters never act as
/// delimiters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Unit {
    pub ch: char,
    pub escaped: bool,
}

pub(crate) fn escape_into(out: &mut String, s: &str, reserved: &[char]) {
    for c in s.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if c == '\\' || reserved.contains(&c) => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
}

pub(crate) fn escape(s: &str, reserved: &[char]) -> String {
    let mut out = String::with_capacity(s.len());
    escape_into(&mut out, s, reserved);
    out
}

pub(crate) fn lex(s: &str) -> Result<Vec<Unit>, String> {
    let mut out = Vec::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            let next = chars.next().ok_or_else(|| "dangling backslash at end of line".to_string())?;
            let ch = match next {
                'n' => '\n',
                'r' => '\r',
                other => other,
            };
            out.push(Unit { ch, escaped: true });
        } else {
            out.push(Unit { ch: c, escaped: false });
        }
    }
    Ok(out)
}

/// A cursor over lexed units with delimiter-aware field extraction.
pub(crate) struct Cursor<'a> {
    units: &'a [Unit],
    pos: usize,
    reserved: &'a [char],
}

impl<'a> Cursor<'a> {
    pub fn new(units: &'a [Unit], reserved: &'a [char]) -> Self {
        Cursor { units, pos: 0, reserved }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.units.len()
    }

    /// The next character if it is an unescaped delimiter.
    pub fn peek_delim(&self) -> Option<char> {
        self.units.get(self.pos).filter(|u| !u.escaped).map(|u| u.ch)
    }

    pub fn bump(&mut self) {
        self.pos += 1;
    }

    pub fn expect(&mut self, c: char) -> Result<(), String> {
        match self.peek_delim() {
            Some(d) if d == c => {
                self.bump();
                Ok(())
            }
            _ => Err(format!("expected '{c}'")),
        }
    }

    /// Reads up to (not including) the next unescaped character in `stops`.
    /// An unescaped reserved character that is not a stop is an error.
    pub fn field(&mut self, stops: &[char]) -> Result<String, String> {
        let mut out = String::new();
        while let Some(u) = self.units.get(self.pos) {
            if !u.escaped {
                if stops.contains(&u.ch) {
                    break;
                }
                if self.reserved.contains(&u.ch) {
                    return Err(format!("unexpected '{}'", u.ch));
                }
            }
            out.push(u.ch);
            self.pos += 1;
        }
        Ok(out)
    }

    /// Leading unescaped ASCII digits, parsed as a number.
    pub fn number(&mut self) -> Option<usize> {
        let start = self.pos;
        let mut n: usize = 0;
        while let Some(u) = self.units.get(self.pos) {
            match u.ch.to_digit(10) {
                Some(d) if !u.escaped && u.ch.is_ascii_digit() => {
                    n = n.checked_mul(10)?.checked_add(d as usize)?;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        (self.pos > start).then_some(n)
    }
}

/// Splits on unescaped whitespace, keeping escapes intact in each field.
pub(crate) fn split_fields(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        if c == '\\' {
            escaped = true;
            start.get_or_insert(i);
        } else if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(&line[s..i]);
            }
        } else {
            start.get_or_insert(i);
        }
    }
    if let Some(s) = start {
        out.push(&line[s..]);
    }
    out
}
