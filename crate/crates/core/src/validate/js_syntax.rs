//! JSON syntax check that reports the first error the way a JavaScript
//! `JSON.parse` does ("Unexpected token c in JSON at position 0",
//! "Unexpected end of JSON input", ...). Positions count UTF-16 code units.

/// Returns the JavaScript-style error detail, or `None` for well-formed JSON.
pub fn js_syntax_error(text: &str) -> Option<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut p = Parser {
        chars: &chars,
        idx: 0,
    };
    match p.document() {
        Ok(()) => None,
        Err(err) => Some(err.render(&chars)),
    }
}

enum Fault {
    Token(usize),
    String(usize),
    Number(usize),
    End,
}

impl Fault {
    fn render(&self, chars: &[char]) -> String {
        let pos = |idx: usize| chars[..idx].iter().map(|c| c.len_utf16()).sum::<usize>();
        match *self {
            Fault::Token(i) => format!("Unexpected token {} in JSON at position {}", chars[i], pos(i)),
            Fault::String(i) => format!("Unexpected string in JSON at position {}", pos(i)),
            Fault::Number(i) => format!("Unexpected number in JSON at position {}", pos(i)),
            Fault::End => "Unexpected end of JSON input".to_string(),
        }
    }
}

struct Parser<'a> {
    chars: &'a [char],
    idx: usize,
}

type Step = Result<(), Fault>;

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\n' | '\r')) {
            self.idx += 1;
        }
    }

    /// Error for an unexpected character at the cursor, classified the way
    /// V8 does: a stray string or number is reported as such.
    fn unexpected(&self) -> Fault {
        match self.peek() {
            None => Fault::End,
            Some('"') => Fault::String(self.idx),
            Some(c) if c.is_ascii_digit() || c == '-' => Fault::Number(self.idx),
            Some(_) => Fault::Token(self.idx),
        }
    }

    fn document(&mut self) -> Step {
        self.skip_ws();
        self.value()?;
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected()),
        }
    }

    fn value(&mut self) -> Step {
        match self.peek() {
            None => Err(Fault::End),
            Some('{') => self.object(),
            Some('[') => self.array(),
            Some('"') => self.string(),
            Some('t') => self.literal("true"),
            Some('f') => self.literal("false"),
            Some('n') => self.literal("null"),
            Some(c) if c == '-' || c.is_ascii_digit() => self.number(),
            Some(_) => Err(Fault::Token(self.idx)),
        }
    }

    fn literal(&mut self, word: &str) -> Step {
        for expected in word.chars() {
            match self.peek() {
                None => return Err(Fault::End),
                Some(c) if c == expected => self.idx += 1,
                Some(_) => return Err(Fault::Token(self.idx)),
            }
        }
        Ok(())
    }

    fn digits(&mut self) -> Step {
        match self.peek() {
            None => Err(Fault::End),
            Some(c) if c.is_ascii_digit() => {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.idx += 1;
                }
                Ok(())
            }
            Some(_) => Err(Fault::Token(self.idx)),
        }
    }

    fn number(&mut self) -> Step {
        if self.peek() == Some('-') {
            self.idx += 1;
        }
        if self.peek() == Some('0') {
            self.idx += 1;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(Fault::Number(self.idx));
            }
        } else {
            self.digits()?;
        }
        if self.peek() == Some('.') {
            self.idx += 1;
            self.digits()?;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            self.idx += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.idx += 1;
            }
            self.digits()?;
        }
        Ok(())
    }

    fn string(&mut self) -> Step {
        self.idx += 1;
        loop {
            match self.peek() {
                None => return Err(Fault::End),
                Some('"') => {
                    self.idx += 1;
                    return Ok(());
                }
                Some('\\') => {
                    self.idx += 1;
                    match self.peek() {
                        None => return Err(Fault::End),
                        Some('"' | '\\' | '/' | 'b' | 'f' | 'n' | 'r' | 't') => self.idx += 1,
                        Some('u') => {
                            self.idx += 1;
                            for _ in 0..4 {
                                match self.peek() {
                                    None => return Err(Fault::End),
                                    Some(c) if c.is_ascii_hexdigit() => self.idx += 1,
                                    Some(_) => return Err(Fault::Token(self.idx)),
                                }
                            }
                        }
                        Some(_) => return Err(Fault::Token(self.idx)),
                    }
                }
                Some(c) if (c as u32) < 0x20 => return Err(Fault::Token(self.idx)),
                Some(_) => self.idx += 1,
            }
        }
    }

    fn array(&mut self) -> Step {
        self.idx += 1;
        self.skip_ws();
        if self.peek() == Some(']') {
            self.idx += 1;
            return Ok(());
        }
        loop {
            self.skip_ws();
            self.value()?;
            self.skip_ws();
            match self.peek() {
                Some(',') => self.idx += 1,
                Some(']') => {
                    self.idx += 1;
                    return Ok(());
                }
                _ => return Err(self.unexpected()),
            }
        }
    }

    fn object(&mut self) -> Step {
        self.idx += 1;
        self.skip_ws();
        if self.peek() == Some('}') {
            self.idx += 1;
            return Ok(());
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some('"') => self.string()?,
                None => return Err(Fault::End),
                Some(_) => return Err(Fault::Token(self.idx)),
            }
            self.skip_ws();
            match self.peek() {
                Some(':') => self.idx += 1,
                _ => return Err(self.unexpected()),
            }
            self.skip_ws();
            self.value()?;
            self.skip_ws();
            match self.peek() {
                Some(',') => self.idx += 1,
                Some('}') => {
                    self.idx += 1;
                    return Ok(());
                }
                _ => return Err(self.unexpected()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::js_syntax_error;

    #[test]
    fn well_formed_documents_pass() {
        for ok in ["{}", " [1, -2.5e3, \"x\\u00e9\", true, null] ", "\"s\"", "0"] {
            assert_eq!(js_syntax_error(ok), None, "{ok}");
        }
    }

    #[test]
    fn leading_word() {
        assert_eq!(
            js_syntax_error("code: {\"alias\": \"x\"}").unwrap(),
            "Unexpected token c in JSON at position 0"
        );
    }

    #[test]
    fn semicolon_position() {
        let text = r#"{"alias": "Warm up", "trigger": [{"platform": "time", "at": "07:00:00"};"#;
        let pos = text.find(';').unwrap();
        assert_eq!(
            js_syntax_error(text).unwrap(),
            format!("Unexpected token ; in JSON at position {pos}")
        );
    }

    #[test]
    fn misc_faults() {
        assert_eq!(js_syntax_error("").unwrap(), "Unexpected end of JSON input");
        assert_eq!(js_syntax_error("{\"a\":1").unwrap(), "Unexpected end of JSON input");
        assert_eq!(
            js_syntax_error("{\"a\":1 \"b\":2}").unwrap(),
            "Unexpected string in JSON at position 7"
        );
        assert_eq!(js_syntax_error("[1 2]").unwrap(), "Unexpected number in JSON at position 3");
        assert_eq!(js_syntax_error("{a:1}").unwrap(), "Unexpected token a in JSON at position 1");
        assert_eq!(js_syntax_error("[1,]").unwrap(), "Unexpected token ] in JSON at position 3");
        assert_eq!(js_syntax_error("{} x").unwrap(), "Unexpected token x in JSON at position 3");
    }

    #[test]
    fn positions_count_utf16_units() {
        assert_eq!(
            js_syntax_error("[\"😀\" x]").unwrap(),
            "Unexpected token x in JSON at position 6"
        );
    }

    #[test]
    fn agrees_with_serde_on_validity() {
        for text in ["{\"a\": [1, {\"b\": null}]}", "{\"a\" 1}", "[01]", "tru", "\"\\q\"", "1.", "-"] {
            assert_eq!(
                js_syntax_error(text).is_none(),
                serde_json::from_str::<serde_json::Value>(text).is_ok(),
                "{text}"
            );
        }
    }
}
