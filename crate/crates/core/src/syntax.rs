//! Character cursor shared by the text formats.

use crate::{Error, Result};

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$' || c == '\''
}

pub(crate) fn is_valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

pub(crate) fn is_element_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_$#.*:'-+".contains(c)
}

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    pub(crate) fn line(&self) -> usize {
        self.line
    }

    pub(crate) fn pos(&self) -> (usize, usize) {
        (self.line, self.col)
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col, msg)
    }

    /// Skips blanks and `#` comments, optionally stopping at newlines.
    pub(crate) fn skip_space(&mut self, cross_lines: bool) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while matches!(self.peek(), Some(c) if c != '\n') {
                    self.bump();
                }
            } else if c == '\n' && !cross_lines {
                return;
            } else if c.is_whitespace() {
                self.bump();
            } else {
                return;
            }
        }
    }

    pub(crate) fn ws(&mut self) {
        self.skip_space(true);
    }

    pub(crate) fn at_eof(&mut self) -> bool {
        self.ws();
        self.peek().is_none()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(c) => self.error(format!("expected {wanted}, found '{c}'")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub(crate) fn peek_ident(&mut self) -> Option<&'a str> {
        self.ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if is_ident_start(c) => {}
            _ => return None,
        }
        let end = chars
            .find(|&(_, c)| !is_ident_char(c))
            .map_or(rest.len(), |(i, _)| i);
        Some(&rest[..end])
    }

    pub(crate) fn ident(&mut self) -> Result<String> {
        match self.peek_ident() {
            Some(word) => {
                for _ in word.chars() {
                    self.bump();
                }
                Ok(word.to_string())
            }
            None => Err(self.unexpected("an identifier")),
        }
    }

    /// Consumes `word` only when it forms a whole identifier.
    pub(crate) fn keyword(&mut self, word: &str) -> bool {
        if self.peek_ident() == Some(word) {
            for _ in word.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    pub(crate) fn element(&mut self) -> Result<String> {
        self.ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|&(_, c)| !is_element_char(c))
            .map_or(rest.len(), |(i, _)| i);
        if end == 0 {
            return Err(self.unexpected("an element name"));
        }
        let word = &rest[..end];
        for _ in word.chars() {
            self.bump();
        }
        Ok(word.to_string())
    }

    pub(crate) fn integer(&mut self) -> Result<String> {
        self.ws();
        let mut out = String::new();
        if self.peek() == Some('-') {
            self.bump();
            out.push('-');
        }
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            self.bump();
            out.push(c);
        }
        if out.trim_start_matches('-').is_empty() {
            return Err(self.unexpected("an integer"));
        }
        Ok(out)
    }
}
