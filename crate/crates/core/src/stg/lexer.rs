// SPDX-License-Identifier: Apache-2.0

//! Token stream for the subset of Verilog-2005 needed to read module
//! interfaces. Comments, attributes and compiler directives are dropped.

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Raw numeric literal text, e.g. `8'hff`, `32`, `1.5`.
    Number(String),
    Str(String),
    /// `` `NAME `` macro use outside a directive line.
    Macro(String),
    /// `$name` system identifier.
    System(String),
    Sym(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
}

impl Token {
    pub fn is_sym(&self, s: &str) -> bool {
        matches!(&self.tok, Tok::Sym(x) if *x == s)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.tok, Tok::Ident(x) if x == kw)
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.tok {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }
}

const SYMS: &[&str] = &[
    "**", "<<<", ">>>", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+:", "-:", "(", ")", "[", "]", "{",
    "}", ";", ",", ":", ".", "#", "=", "+", "-", "*", "/", "%", "<", ">", "!", "~", "&", "|", "^", "?",
    "@", "'",
];

/// Directives whose remaining line is skipped.
const LINE_DIRECTIVES: &[&str] = &[
    "timescale",
    "define",
    "undef",
    "include",
    "ifdef",
    "ifndef",
    "elsif",
    "else",
    "endif",
    "default_nettype",
    "resetall",
    "celldefine",
    "endcelldefine",
    "line",
    "pragma",
    "begin_keywords",
    "end_keywords",
    "nounconnected_drive",
    "unconnected_drive",
];

pub(crate) fn tokenize(src: &str) -> Vec<Token> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let n = chars.len();

    while i < n {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // Comments.
        if c == '/' && i + 1 < n && chars[i + 1] == '/' {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && i + 1 < n && chars[i + 1] == '*' {
            i += 2;
            while i < n && !(chars[i] == '*' && i + 1 < n && chars[i + 1] == '/') {
                if chars[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            i = (i + 2).min(n);
            continue;
        }
        // Attributes `(* ... *)`, but not the `@(*)` sensitivity list.
        if c == '(' && i + 1 < n && chars[i + 1] == '*' {
            let mut j = i + 2;
            while j < n && chars[j] == ' ' {
                j += 1;
            }
            if j < n && chars[j] != ')' {
                i += 2;
                while i < n && !(chars[i] == '*' && i + 1 < n && chars[i + 1] == ')') {
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    i += 1;
                }
                i = (i + 2).min(n);
                continue;
            }
        }
        if c == '`' {
            let start = i + 1;
            let mut j = start;
            while j < n && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let name: String = chars[start..j].iter().collect();
            if LINE_DIRECTIVES.contains(&name.as_str()) {
                // Multi-line `define bodies continue with a trailing backslash.
                while j < n && chars[j] != '\n' {
                    if chars[j] == '\\' && j + 1 < n && chars[j + 1] == '\n' {
                        line += 1;
                        j += 1;
                    }
                    j += 1;
                }
            } else {
                out.push(Token { tok: Tok::Macro(name), line });
            }
            i = j.max(i + 1);
            continue;
        }
        if c == '"' {
            let mut j = i + 1;
            let mut s = String::new();
            while j < n && chars[j] != '"' && chars[j] != '\n' {
                if chars[j] == '\\' && j + 1 < n {
                    s.push(chars[j + 1]);
                    j += 2;
                    continue;
                }
                s.push(chars[j]);
                j += 1;
            }
            out.push(Token { tok: Tok::Str(s), line });
            i = (j + 1).min(n);
            continue;
        }
        if c == '\\' {
            // Escaped identifier runs to the next whitespace.
            let mut j = i + 1;
            while j < n && !chars[j].is_whitespace() {
                j += 1;
            }
            let s: String = chars[i + 1..j].iter().collect();
            out.push(Token { tok: Tok::Ident(s), line });
            i = j;
            continue;
        }
        if c == '$' {
            let mut j = i + 1;
            while j < n && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '$') {
                j += 1;
            }
            let s: String = chars[i + 1..j].iter().collect();
            out.push(Token { tok: Tok::System(s), line });
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < n && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '$') {
                j += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[i..j].iter().collect()), line });
            i = j;
            continue;
        }
        if c.is_ascii_digit() || (c == '\'' && i + 1 < n && is_base_char(chars[i + 1], chars.get(i + 2))) {
            let j = scan_number(&chars, i);
            out.push(Token { tok: Tok::Number(chars[i..j].iter().collect()), line });
            i = j;
            continue;
        }
        if let Some(sym) = SYMS.iter().find(|s| matches_at(&chars, i, s)) {
            out.push(Token { tok: Tok::Sym(sym), line });
            i += sym.len();
            continue;
        }
        // Anything else is dropped; the parser reports structure errors.
        i += 1;
    }
    out
}

fn is_base_char(c: char, next: Option<&char>) -> bool {
    match c {
        'b' | 'B' | 'o' | 'O' | 'd' | 'D' | 'h' | 'H' => true,
        's' | 'S' => matches!(next, Some('b' | 'B' | 'o' | 'O' | 'd' | 'D' | 'h' | 'H')),
        _ => false,
    }
}

fn matches_at(chars: &[char], i: usize, s: &str) -> bool {
    let mut k = i;
    s.chars().all(|sc| {
        let ok = chars.get(k) == Some(&sc);
        k += 1;
        ok
    })
}

fn scan_number(chars: &[char], start: usize) -> usize {
    let n = chars.len();
    let mut j = start;
    while j < n && (chars[j].is_ascii_digit() || chars[j] == '_') {
        j += 1;
    }
    // Real number: 1.5 or 1e3.
    if j < n && chars[j] == '.' && j + 1 < n && chars[j + 1].is_ascii_digit() {
        j += 1;
        while j < n && (chars[j].is_ascii_digit() || chars[j] == '_') {
            j += 1;
        }
    }
    if j < n && (chars[j] == 'e' || chars[j] == 'E') && j > start {
        let mut k = j + 1;
        if k < n && (chars[k] == '+' || chars[k] == '-') {
            k += 1;
        }
        if k < n && chars[k].is_ascii_digit() {
            j = k;
            while j < n && chars[j].is_ascii_digit() {
                j += 1;
            }
            return j;
        }
    }
    // Based literal, optionally separated from the size by spaces.
    let mut k = j;
    while k < n && chars[k] == ' ' {
        k += 1;
    }
    if k < n && chars[k] == '\'' && k + 1 < n && is_base_char(chars[k + 1], chars.get(k + 2)) {
        k += 1;
        if chars[k] == 's' || chars[k] == 'S' {
            k += 1;
        }
        k += 1;
        while k < n && chars[k] == ' ' {
            k += 1;
        }
        while k < n && (chars[k].is_ascii_hexdigit() || matches!(chars[k], '_' | 'x' | 'X' | 'z' | 'Z' | '?')) {
            k += 1;
        }
        return k;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn skips_comments_attributes_directives() {
        let t = toks("`timescale 1ns/1ps\n(* keep *) module /* x */ m; // hi\nendmodule");
        assert_eq!(t, vec![Tok::Ident("module".into()), Tok::Ident("m".into()), Tok::Sym(";"), Tok::Ident("endmodule".into())]);
    }

    #[test]
    fn star_sensitivity_is_not_an_attribute() {
        let t = toks("always @(*) y = a;");
        assert!(t.contains(&Tok::Sym("*")));
        assert!(t.contains(&Tok::Ident("y".into())));
    }

    #[test]
    fn numbers_and_lines() {
        let t = tokenize("a\n8'hFF 4 'b1 32 'sd3\n1.5");
        let nums: Vec<_> = t.iter().filter_map(|t| match &t.tok { Tok::Number(n) => Some((n.clone(), t.line)), _ => None }).collect();
        assert_eq!(nums, vec![("8'hFF".into(), 2), ("4 'b1".into(), 2), ("32 'sd3".into(), 2), ("1.5".into(), 3)]);
    }
}
