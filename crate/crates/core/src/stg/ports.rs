// SPDX-License-Identifier: Apache-2.0

//! Module interface extraction for ANSI and non-ANSI Verilog-2005 headers.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexer::{tokenize, Tok, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
    InOut,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::In => "input",
            Direction::Out => "output",
            Direction::InOut => "inout",
        })
    }
}

/// Semantic group of a port. Inputs get one of the first three; outputs
/// are always `Observed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    ClockReset,
    Control,
    Datapath,
    Observed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    pub width: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
}

impl Port {
    pub fn new(name: impl Into<String>, direction: Direction, width: u32) -> Self {
        Self { name: name.into(), direction, width, category: None }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PortError {
    #[error("module '{0}' not found")]
    ModuleNotFound(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

const MAX_WIDTH: i128 = 1 << 20;
const MAX_PARAM_DEPTH: usize = 32;

const NET_KEYWORDS: &[&str] = &[
    "wire", "reg", "tri", "logic", "supply0", "supply1", "wand", "wor", "tri0", "tri1", "triand", "trior",
    "trireg", "uwire", "var", "integer", "time", "signed", "unsigned",
];

fn direction_kw(t: &Token) -> Option<Direction> {
    match t.ident()? {
        "input" => Some(Direction::In),
        "output" => Some(Direction::Out),
        "inout" => Some(Direction::InOut),
        _ => None,
    }
}

fn syntax(line: usize, message: impl Into<String>) -> PortError {
    PortError::Syntax { line, message: message.into() }
}

/// Names of every module declared in `src`, in source order.
pub fn module_names(src: &str) -> Vec<String> {
    let toks = tokenize(src);
    toks.windows(2)
        .filter(|w| w[0].is_kw("module") || w[0].is_kw("macromodule"))
        .filter_map(|w| w[1].ident().map(str::to_string))
        .collect()
}

/// Reads the port list of `top_module`, one [`Port`] per declared port in
/// header order. Widths come from `[msb:lsb]` ranges (constant expressions
/// over literals and module parameters), defaulting to 1.
pub fn parse_ports(src: &str, top_module: &str) -> Result<Vec<Port>, PortError> {
    let toks = tokenize(src);
    let start = toks
        .windows(2)
        .position(|w| (w[0].is_kw("module") || w[0].is_kw("macromodule")) && w[1].ident() == Some(top_module))
        .ok_or_else(|| PortError::ModuleNotFound(top_module.to_string()))?;
    ModuleParser { toks: &toks, pos: start + 2, params: HashMap::new() }.parse()
}

struct ModuleParser<'a> {
    toks: &'a [Token],
    pos: usize,
    params: HashMap<String, Vec<Token>>,
}

impl<'a> ModuleParser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn last_line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(1, |t| t.line)
    }

    /// Returns the tokens strictly inside a balanced group opened at `self.pos`.
    fn take_group(&mut self) -> Result<&'a [Token], PortError> {
        let open_line = self.last_line();
        let begin = self.pos + 1;
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match &t.tok {
                Tok::Sym("(") | Tok::Sym("[") | Tok::Sym("{") => depth += 1,
                Tok::Sym(")") | Tok::Sym("]") | Tok::Sym("}") => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        let inner = &self.toks[begin..self.pos];
                        self.pos += 1;
                        return Ok(inner);
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        Err(syntax(open_line, "unbalanced parenthesis"))
    }

    fn parse(mut self) -> Result<Vec<Port>, PortError> {
        if self.peek().is_some_and(|t| t.is_sym("#")) {
            self.pos += 1;
            if !self.peek().is_some_and(|t| t.is_sym("(")) {
                return Err(syntax(self.last_line(), "expected '(' after '#'"));
            }
            let group = self.take_group()?;
            self.collect_header_params(group)?;
        }

        let port_list: Option<&[Token]> = match self.peek() {
            Some(t) if t.is_sym("(") => Some(self.take_group()?),
            _ => None,
        };
        match self.peek() {
            Some(t) if t.is_sym(";") => self.pos += 1,
            _ => return Err(syntax(self.last_line(), "expected ';' after module header")),
        }

        let body_end = self.toks[self.pos..]
            .iter()
            .position(|t| t.is_kw("endmodule"))
            .map_or(self.toks.len(), |p| self.pos + p);
        let body = &self.toks[self.pos..body_end];
        self.collect_body_params(body);

        let items = match port_list {
            None => return Ok(Vec::new()),
            Some(list) => split_top_level(list, ","),
        };
        if items.len() == 1 && items[0].is_empty() {
            return Ok(Vec::new());
        }
        let ansi = items.first().and_then(|i| i.first()).is_some_and(|t| direction_kw(t).is_some());
        let ports = if ansi { self.parse_ansi(&items)? } else { self.parse_non_ansi(&items, body)? };

        let mut seen = std::collections::HashSet::new();
        for p in &ports {
            if !seen.insert(p.name.as_str()) {
                return Err(syntax(self.last_line(), format!("duplicate port '{}'", p.name)));
            }
        }
        Ok(ports)
    }

    fn collect_header_params(&mut self, group: &[Token]) -> Result<(), PortError> {
        for item in split_top_level(group, ",") {
            let Some(eq) = item.iter().position(|t| t.is_sym("=")) else {
                if let Some(t) = item.first() {
                    return Err(syntax(t.line, "parameter without default value"));
                }
                continue;
            };
            // The name is the last identifier before '='.
            let name = item[..eq].iter().rev().find_map(|t| t.ident()).map(str::to_string);
            match name {
                Some(n) => {
                    self.params.insert(n, item[eq + 1..].to_vec());
                }
                None => return Err(syntax(item[eq].line, "malformed parameter declaration")),
            }
        }
        Ok(())
    }

    fn collect_body_params(&mut self, body: &[Token]) {
        let mut i = 0;
        while i < body.len() {
            if body[i].is_kw("parameter") || body[i].is_kw("localparam") {
                let end = body[i..].iter().position(|t| t.is_sym(";")).map_or(body.len(), |p| i + p);
                for item in split_top_level(&body[i + 1..end], ",") {
                    if let Some(eq) = item.iter().position(|t| t.is_sym("=")) {
                        if let Some(n) = item[..eq].iter().rev().find_map(|t| t.ident()) {
                            self.params.entry(n.to_string()).or_insert_with(|| item[eq + 1..].to_vec());
                        }
                    }
                }
                i = end;
            }
            i += 1;
        }
    }

    fn parse_ansi(&self, items: &[&[Token]]) -> Result<Vec<Port>, PortError> {
        let mut ports = Vec::new();
        let mut current: Option<(Direction, u32)> = None;
        for item in items {
            let Some(first) = item.first() else {
                return Err(syntax(self.last_line(), "empty port declaration"));
            };
            let mut i = 0;
            if let Some(dir) = direction_kw(first) {
                i += 1;
                let mut width = None;
                let mut is_integer = false;
                while let Some(t) = item.get(i) {
                    match t.ident() {
                        Some(kw) if NET_KEYWORDS.contains(&kw) => {
                            is_integer |= kw == "integer";
                            i += 1;
                        }
                        _ => break,
                    }
                }
                if item.get(i).is_some_and(|t| t.is_sym("[")) {
                    let (w, next) = self.range_width(item, i)?;
                    width = Some(w);
                    i = next;
                }
                let width = width.unwrap_or(if is_integer { 32 } else { 1 });
                current = Some((dir, width));
            }
            let Some((dir, width)) = current else {
                return Err(syntax(first.line, "port declared without a direction"));
            };
            let name_tok = item.get(i).ok_or_else(|| syntax(first.line, "missing port name"))?;
            let name = name_tok
                .ident()
                .filter(|n| !NET_KEYWORDS.contains(n))
                .ok_or_else(|| syntax(name_tok.line, format!("unparsable port declaration near {:?}", name_tok.tok)))?;
            i += 1;
            match item.get(i) {
                None => {}
                Some(t) if t.is_sym("=") => {}
                Some(t) if t.is_sym("[") => {
                    return Err(syntax(t.line, format!("unpacked dimension on port '{name}' is not supported")))
                }
                Some(t) => return Err(syntax(t.line, format!("unexpected token after port '{name}'"))),
            }
            ports.push(Port::new(name, dir, width));
        }
        Ok(ports)
    }

    fn parse_non_ansi(&self, items: &[&[Token]], body: &[Token]) -> Result<Vec<Port>, PortError> {
        let mut names = Vec::new();
        for item in items {
            match item {
                [t] if t.ident().is_some() => names.push((t.ident().unwrap().to_string(), t.line)),
                [] => return Err(syntax(self.last_line(), "empty port in port list")),
                [t, ..] => return Err(syntax(t.line, "unsupported port expression in non-ANSI port list")),
            }
        }

        let mut dirs: HashMap<String, (Direction, Option<u32>)> = HashMap::new();
        let mut nets: HashMap<String, u32> = HashMap::new();
        let mut i = 0;
        while i < body.len() {
            let t = &body[i];
            if t.is_kw("task") || t.is_kw("function") {
                let end_kw = if t.is_kw("task") { "endtask" } else { "endfunction" };
                i = body[i..].iter().position(|x| x.is_kw(end_kw)).map_or(body.len(), |p| i + p + 1);
                continue;
            }
            let dir = direction_kw(t);
            let is_net = t.ident().is_some_and(|k| NET_KEYWORDS.contains(&k) && k != "signed" && k != "unsigned");
            if dir.is_none() && !is_net {
                i += 1;
                continue;
            }
            let end = body[i..].iter().position(|x| x.is_sym(";")).map_or(body.len(), |p| i + p);
            let stmt = &body[i + 1..end];
            let mut j = 0;
            let mut is_integer = t.is_kw("integer");
            while let Some(k) = stmt.get(j).and_then(|x| x.ident()) {
                if NET_KEYWORDS.contains(&k) {
                    is_integer |= k == "integer";
                    j += 1;
                } else {
                    break;
                }
            }
            let mut width = None;
            if stmt.get(j).is_some_and(|x| x.is_sym("[")) {
                let (w, next) = self.range_width(stmt, j)?;
                width = Some(w);
                j = next;
            } else if is_integer {
                width = Some(32);
            }
            for decl in split_top_level(&stmt[j.min(stmt.len())..], ",") {
                let Some(n) = decl.first().and_then(|x| x.ident()) else { continue };
                match dir {
                    Some(d) => {
                        dirs.insert(n.to_string(), (d, width));
                    }
                    None => {
                        if let Some(w) = width {
                            nets.insert(n.to_string(), w);
                        }
                    }
                }
            }
            i = end + 1;
        }

        names
            .into_iter()
            .map(|(name, line)| {
                let (dir, width) = dirs
                    .get(&name)
                    .copied()
                    .ok_or_else(|| syntax(line, format!("port '{name}' has no direction declaration")))?;
                let width = width.or_else(|| nets.get(&name).copied()).unwrap_or(1);
                Ok(Port::new(name, dir, width))
            })
            .collect()
    }

    /// Width of the `[msb:lsb]` range starting at `toks[at]`; returns the
    /// index just past the closing bracket.
    fn range_width(&self, toks: &[Token], at: usize) -> Result<(u32, usize), PortError> {
        let line = toks[at].line;
        let mut depth = 0usize;
        let mut close = None;
        for (k, t) in toks.iter().enumerate().skip(at) {
            if t.is_sym("[") {
                depth += 1;
            } else if t.is_sym("]") {
                depth -= 1;
                if depth == 0 {
                    close = Some(k);
                    break;
                }
            }
        }
        let close = close.ok_or_else(|| syntax(line, "unterminated range"))?;
        let inner = &toks[at + 1..close];
        let parts = split_top_level(inner, ":");
        if parts.len() != 2 {
            return Err(syntax(line, "range must have the form [msb:lsb]"));
        }
        let msb = self.eval(parts[0], 0)?;
        let lsb = self.eval(parts[1], 0)?;
        let width = (msb - lsb).abs() + 1;
        if width > MAX_WIDTH {
            return Err(syntax(line, format!("port width {width} is out of range")));
        }
        Ok((width as u32, close + 1))
    }

    fn eval(&self, toks: &[Token], depth: usize) -> Result<i128, PortError> {
        let line = toks.first().map_or(self.last_line(), |t| t.line);
        if depth > MAX_PARAM_DEPTH {
            return Err(syntax(line, "parameter references nest too deeply"));
        }
        let mut ev = ExprEval { toks, pos: 0, parser: self, depth, line };
        let v = ev.expr(0)?;
        if ev.pos != toks.len() {
            return Err(syntax(line, "unsupported constant expression"));
        }
        Ok(v)
    }
}

/// Splits at `sep` symbols that are not nested inside brackets.
fn split_top_level<'t>(toks: &'t [Token], sep: &str) -> Vec<&'t [Token]> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match &t.tok {
            Tok::Sym("(") | Tok::Sym("[") | Tok::Sym("{") => depth += 1,
            Tok::Sym(")") | Tok::Sym("]") | Tok::Sym("}") => depth = depth.saturating_sub(1),
            Tok::Sym(s) if *s == sep && depth == 0 => {
                out.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&toks[start..]);
    out
}

struct ExprEval<'p, 't> {
    toks: &'t [Token],
    pos: usize,
    parser: &'p ModuleParser<'p>,
    depth: usize,
    line: usize,
}

impl ExprEval<'_, '_> {
    fn err(&self, msg: impl Into<String>) -> PortError {
        syntax(self.toks.get(self.pos).map_or(self.line, |t| t.line), msg)
    }

    fn binop(&self) -> Option<(&'static str, u8)> {
        match &self.toks.get(self.pos)?.tok {
            Tok::Sym(s) => {
                let prec = match *s {
                    "**" => 5,
                    "*" | "/" | "%" => 4,
                    "+" | "-" => 3,
                    "<<" | ">>" | "<<<" | ">>>" => 2,
                    _ => return None,
                };
                Some((s, prec))
            }
            _ => None,
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<i128, PortError> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.binop() {
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            // `**` is right-associative.
            let next = if op == "**" { prec } else { prec + 1 };
            let rhs = self.expr(next)?;
            lhs = self.apply(op, lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn apply(&self, op: &str, a: i128, b: i128) -> Result<i128, PortError> {
        let overflow = || self.err("arithmetic overflow in constant expression");
        match op {
            "+" => a.checked_add(b).ok_or_else(overflow),
            "-" => a.checked_sub(b).ok_or_else(overflow),
            "*" => a.checked_mul(b).ok_or_else(overflow),
            "/" => a.checked_div(b).ok_or_else(|| self.err("division by zero")),
            "%" => a.checked_rem(b).ok_or_else(|| self.err("division by zero")),
            "**" => {
                let e = u32::try_from(b).map_err(|_| overflow())?;
                a.checked_pow(e).ok_or_else(overflow)
            }
            "<<" | "<<<" => {
                let s = u32::try_from(b).ok().filter(|s| *s < 100).ok_or_else(overflow)?;
                a.checked_mul(1i128 << s).ok_or_else(overflow)
            }
            ">>" | ">>>" => {
                let s = u32::try_from(b).ok().filter(|s| *s < 127).ok_or_else(overflow)?;
                Ok(a >> s)
            }
            _ => Err(self.err(format!("unsupported operator '{op}'"))),
        }
    }

    fn unary(&mut self) -> Result<i128, PortError> {
        let t = self.toks.get(self.pos).ok_or_else(|| self.err("expected constant expression"))?;
        match &t.tok {
            Tok::Sym("-") => {
                self.pos += 1;
                let v = self.unary()?;
                v.checked_neg().ok_or_else(|| self.err("arithmetic overflow"))
            }
            Tok::Sym("+") => {
                self.pos += 1;
                self.unary()
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let v = self.expr(0)?;
                if !self.toks.get(self.pos).is_some_and(|t| t.is_sym(")")) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Tok::Number(text) => {
                self.pos += 1;
                parse_int_literal(text).ok_or_else(|| syntax(t.line, format!("unsupported number '{text}' in range")))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                let body = self
                    .parser
                    .params
                    .get(name)
                    .ok_or_else(|| syntax(t.line, format!("unknown identifier '{name}' in range")))?;
                self.parser.eval(body, self.depth + 1)
            }
            Tok::System(name) if name == "clog2" => {
                self.pos += 1;
                if !self.toks.get(self.pos).is_some_and(|t| t.is_sym("(")) {
                    return Err(self.err("expected '(' after $clog2"));
                }
                self.pos += 1;
                let v = self.expr(0)?;
                if !self.toks.get(self.pos).is_some_and(|t| t.is_sym(")")) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(clog2(v))
            }
            other => Err(syntax(t.line, format!("unsupported token {other:?} in range"))),
        }
    }
}

fn clog2(v: i128) -> i128 {
    if v <= 1 {
        return 0;
    }
    128 - (v - 1).leading_zeros() as i128
}

fn parse_int_literal(text: &str) -> Option<i128> {
    let clean: String = text.chars().filter(|c| *c != '_' && *c != ' ').collect();
    match clean.find('\'') {
        None => clean.parse::<i128>().ok(),
        Some(q) => {
            let mut rest = clean[q + 1..].chars();
            let mut base = rest.next()?;
            if base == 's' || base == 'S' {
                base = rest.next()?;
            }
            let radix = match base.to_ascii_lowercase() {
                'b' => 2,
                'o' => 8,
                'd' => 10,
                'h' => 16,
                _ => return None,
            };
            i128::from_str_radix(rest.as_str(), radix).ok()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn widths(ports: &[Port]) -> Vec<(&str, Direction, u32)> {
        ports.iter().map(|p| (p.name.as_str(), p.direction, p.width)).collect()
    }

    #[test]
    fn ansi_header() {
        let p = parse_ports("module m(input clk, input [7:0] a, output reg [3:0] y);\nendmodule", "m").unwrap();
        assert_eq!(widths(&p), vec![("clk", Direction::In, 1), ("a", Direction::In, 8), ("y", Direction::Out, 4)]);
        assert!(p.iter().all(|p| p.category.is_none()));
    }

    #[test]
    fn ascending_range() {
        let p = parse_ports("module m(input [0:3] b); endmodule", "m").unwrap();
        assert_eq!(p[0].width, 4);
    }

    #[test]
    fn missing_module() {
        assert_eq!(parse_ports("", "top"), Err(PortError::ModuleNotFound("top".into())));
        assert_eq!(parse_ports("", "top").unwrap_err().to_string(), "module 'top' not found");
        assert!(parse_ports("module other(input a); endmodule", "top").is_err());
    }

    #[test]
    fn direction_carries_over() {
        let src = "module m(input wire signed [15:0] a, b, output y, z);endmodule";
        let p = parse_ports(src, "m").unwrap();
        assert_eq!(
            widths(&p),
            vec![("a", Direction::In, 16), ("b", Direction::In, 16), ("y", Direction::Out, 1), ("z", Direction::Out, 1)]
        );
    }

    #[test]
    fn non_ansi_header() {
        let src = "
module acc(clk, rst_n, d, q);
  parameter W = 6;
  input clk, rst_n;
  input [W-1:0] d;
  output q;
  reg [W:0] q;
  task t; input [99:0] ignored; begin end endtask
endmodule";
        let p = parse_ports(src, "acc").unwrap();
        assert_eq!(
            widths(&p),
            vec![("clk", Direction::In, 1), ("rst_n", Direction::In, 1), ("d", Direction::In, 6), ("q", Direction::Out, 7)]
        );
    }

    #[test]
    fn parameterised_ansi_header() {
        let src = "module f #(parameter N = 4, parameter integer DEPTH = 2**N, localparam AW = $clog2(DEPTH))
                     (input [AW-1:0] addr, input [N*2-1:0] data, output [(N<<1)-1:0] q); endmodule";
        let p = parse_ports(src, "f").unwrap();
        assert_eq!(widths(&p), vec![("addr", Direction::In, 4), ("data", Direction::In, 8), ("q", Direction::Out, 8)]);
    }

    #[test]
    fn picks_named_module_among_many() {
        let src = "module a(input x); endmodule\nmodule b(output [1:0] z); endmodule";
        assert_eq!(parse_ports(src, "b").unwrap()[0].width, 2);
        assert_eq!(module_names(src), vec!["a", "b"]);
    }

    #[test]
    fn no_ports() {
        assert!(parse_ports("module tb; endmodule", "tb").unwrap().is_empty());
        assert!(parse_ports("module tb(); endmodule", "tb").unwrap().is_empty());
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_ports("module m(\n  input [7:0] a,\n  input [W-1:0] b\n); endmodule", "m").unwrap_err();
        assert_eq!(err, PortError::Syntax { line: 3, message: "unknown identifier 'W' in range".into() });

        let err = parse_ports("module m(a, b);\n input a;\nendmodule", "m").unwrap_err();
        assert!(matches!(err, PortError::Syntax { line: 1, .. }), "{err}");
        assert!(err.to_string().contains("'b' has no direction"));

        let err = parse_ports("module m(input a [0:3]); endmodule", "m").unwrap_err();
        assert!(err.to_string().contains("unpacked"));
    }

    #[test]
    fn duplicate_port_rejected() {
        assert!(parse_ports("module m(input a, output a); endmodule", "m").is_err());
    }

    #[test]
    fn clog2_values() {
        assert_eq!([0, 1, 2, 3, 4, 5, 8, 9].map(clog2), [0, 0, 1, 2, 2, 3, 3, 4]);
    }
}
