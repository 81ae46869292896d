//! Hand-rolled lexer and recursive-descent parser for `.lvl` programs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dsl::ast::{LevelProgram, MechanicsParams, MobSpec, PlacementSpec, Region};
use crate::dsl::validate::validate;
use crate::registry::{AchSet, Achievement, Block, Item, MobKind};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DslError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: u32, col: u32, message: String },
    #[error("semantic error: {0}")]
    Semantic(String),
}

impl DslError {
    fn at(line: u32, col: u32, message: impl Into<String>) -> DslError {
        DslError::Parse {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokenKind {
    Ident,
    Str,
    Int,
    Number,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Eq,
    Semi,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    text: String,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Token>, DslError> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();

    macro_rules! push {
        ($kind:expr, $text:expr, $col:expr) => {
            tokens.push(Token {
                kind: $kind,
                text: $text,
                line,
                col: $col,
            })
        };
    }

    while let Some(&c) = chars.peek() {
        let start_col = col;
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '{' => {
                chars.next();
                col += 1;
                push!(TokenKind::LBrace, "{".into(), start_col);
            }
            '}' => {
                chars.next();
                col += 1;
                push!(TokenKind::RBrace, "}".into(), start_col);
            }
            '(' => {
                chars.next();
                col += 1;
                push!(TokenKind::LParen, "(".into(), start_col);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(TokenKind::RParen, ")".into(), start_col);
            }
            '=' => {
                chars.next();
                col += 1;
                push!(TokenKind::Eq, "=".into(), start_col);
            }
            ';' => {
                chars.next();
                col += 1;
                push!(TokenKind::Semi, ";".into(), start_col);
            }
            ',' => {
                chars.next();
                col += 1;
                push!(TokenKind::Comma, ",".into(), start_col);
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\n') | None => {
                            return Err(DslError::at(line, start_col, "unterminated string"));
                        }
                        Some(c) => {
                            col += 1;
                            s.push(c);
                        }
                    }
                }
                push!(TokenKind::Str, s, start_col);
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut s = String::new();
                let mut is_float = false;
                if c == '-' {
                    s.push(c);
                    chars.next();
                    col += 1;
                }
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else if c == '.' && !is_float {
                        is_float = true;
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if s == "-" || s.ends_with('.') {
                    return Err(DslError::at(line, start_col, format!("bad number `{s}`")));
                }
                let kind = if is_float { TokenKind::Number } else { TokenKind::Int };
                push!(kind, s, start_col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push!(TokenKind::Ident, s, start_col);
            }
            c => {
                return Err(DslError::at(line, start_col, format!("unexpected character `{c}`")));
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        line,
        col,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn current(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> DslError {
        let t = self.current();
        DslError::at(t.line, t.col, message)
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, DslError> {
        if self.current().kind == kind {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected {what}, found `{}`", self.current().text)))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), DslError> {
        if self.current().kind == TokenKind::Ident && self.current().text == kw {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`, found `{}`", self.current().text)))
        }
    }

    fn int(&mut self, what: &str) -> Result<i64, DslError> {
        let t = self.expect(TokenKind::Int, what)?;
        t.text
            .parse::<i64>()
            .map_err(|_| DslError::at(t.line, t.col, format!("bad integer `{}`", t.text)))
    }

    fn int_in(&mut self, what: &str, lo: i64, hi: i64) -> Result<i64, DslError> {
        let t = self.current().clone();
        let v = self.int(what)?;
        if v < lo || v > hi {
            return Err(DslError::at(
                t.line,
                t.col,
                format!("{what} out of range: {v} not in [{lo}, {hi}]"),
            ));
        }
        Ok(v)
    }

    /// NUMBER: integer or decimal literal.
    fn number(&mut self, what: &str) -> Result<f64, DslError> {
        let t = self.current().clone();
        match t.kind {
            TokenKind::Int | TokenKind::Number => {
                self.advance();
                t.text
                    .parse::<f64>()
                    .map_err(|_| DslError::at(t.line, t.col, format!("bad number `{}`", t.text)))
            }
            _ => Err(self.error(format!("expected {what}, found `{}`", t.text))),
        }
    }

    fn region(&mut self) -> Result<Region, DslError> {
        let t = self.current().clone();
        if t.kind != TokenKind::Ident {
            return Err(self.error("expected region (`at` or `near`)"));
        }
        match t.text.as_str() {
            "at" => {
                self.advance();
                self.expect(TokenKind::LParen, "`(`")?;
                let row = self.int_in("row", 0, 11)? as u8;
                self.expect(TokenKind::Comma, "`,`")?;
                let col = self.int_in("col", 0, 11)? as u8;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(Region::At { row, col })
            }
            "near" => {
                self.advance();
                self.expect(TokenKind::LBrace, "`{`")?;
                self.expect_keyword("min")?;
                self.expect(TokenKind::Eq, "`=`")?;
                let min = self.int_in("min", 1, 1000)? as u16;
                self.expect(TokenKind::Semi, "`;`")?;
                self.expect_keyword("max")?;
                self.expect(TokenKind::Eq, "`=`")?;
                let max = self.int_in("max", 1, 1000)? as u16;
                self.expect(TokenKind::Semi, "`;`")?;
                self.expect_keyword("n")?;
                self.expect(TokenKind::Eq, "`=`")?;
                let n = self.int_in("n", 1, 1000)? as u16;
                self.expect(TokenKind::RBrace, "`}`")?;
                Ok(Region::Near { min, max, n })
            }
            other => Err(self.error(format!("expected region (`at` or `near`), found `{other}`"))),
        }
    }

    fn achievement_set(&mut self, what: &str) -> Result<AchSet, DslError> {
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut set = AchSet::EMPTY;
        if self.current().kind == TokenKind::RBrace {
            self.advance();
            return Ok(set); // empty set; the validator decides if that is legal
        }
        loop {
            let t = self.expect(TokenKind::Ident, "achievement id")?;
            let ach = Achievement::from_name(&t.text).ok_or_else(|| {
                DslError::Semantic(format!("unknown achievement `{}` in {what}", t.text))
            })?;
            if set.contains(ach) {
                return Err(DslError::Semantic(format!(
                    "duplicate achievement `{}` in {what}",
                    t.text
                )));
            }
            set.insert(ach);
            match self.current().kind {
                TokenKind::Comma => {
                    self.advance();
                }
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                _ => return Err(self.error("expected `,` or `}` in achievement list")),
            }
        }
        Ok(set)
    }

    fn program(&mut self) -> Result<LevelProgram, DslError> {
        self.expect_keyword("level")?;
        let name_tok = self.expect(TokenKind::Str, "level name string")?;
        if name_tok.text.is_empty() {
            return Err(DslError::Semantic("level name must not be empty".into()));
        }
        self.expect(TokenKind::LBrace, "`{`")?;

        let mut floor: Option<u8> = None;
        let mut inventory: Option<BTreeMap<Item, u16>> = None;
        let mut placements: Vec<PlacementSpec> = Vec::new();
        let mut mobs: Vec<MobSpec> = Vec::new();
        let mut mechanics: Option<MechanicsParams> = None;
        let mut goal: Option<AchSet> = None;
        let mut completed: Option<AchSet> = None;

        loop {
            let t = self.current().clone();
            match t.kind {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Ident => match t.text.as_str() {
                    "floor" => {
                        if floor.is_some() {
                            return Err(DslError::Semantic("duplicate `floor` statement".into()));
                        }
                        self.advance();
                        self.expect(TokenKind::Eq, "`=`")?;
                        floor = Some(self.int_in("floor", 0, 255)? as u8);
                    }
                    "inventory" => {
                        if inventory.is_some() {
                            return Err(DslError::Semantic("duplicate `inventory` block".into()));
                        }
                        self.advance();
                        self.expect(TokenKind::LBrace, "`{`")?;
                        let mut inv = BTreeMap::new();
                        while self.current().kind != TokenKind::RBrace {
                            let it = self.expect(TokenKind::Ident, "item name")?;
                            let item = Item::from_name(&it.text).ok_or_else(|| {
                                DslError::Semantic(format!("unknown item `{}`", it.text))
                            })?;
                            if inv.contains_key(&item) {
                                return Err(DslError::Semantic(format!(
                                    "duplicate inventory item `{}`",
                                    it.text
                                )));
                            }
                            self.expect(TokenKind::Eq, "`=`")?;
                            let count = self.int_in("item count", 0, 9)? as u16;
                            self.expect(TokenKind::Semi, "`;`")?;
                            inv.insert(item, count);
                        }
                        self.advance();
                        inventory = Some(inv);
                    }
                    "place" => {
                        self.advance();
                        self.expect(TokenKind::LBrace, "`{`")?;
                        self.expect_keyword("block")?;
                        self.expect(TokenKind::Eq, "`=`")?;
                        let bt = self.expect(TokenKind::Ident, "block id")?;
                        let block = Block::from_name(&bt.text).ok_or_else(|| {
                            DslError::Semantic(format!("unknown block `{}`", bt.text))
                        })?;
                        self.expect(TokenKind::Semi, "`;`")?;
                        let region = self.region()?;
                        self.expect(TokenKind::RBrace, "`}`")?;
                        placements.push(PlacementSpec {
                            block,
                            region,
                            on_blocks: vec![Block::Grass],
                        });
                    }
                    "mob" => {
                        self.advance();
                        self.expect(TokenKind::LBrace, "`{`")?;
                        self.expect_keyword("kind")?;
                        self.expect(TokenKind::Eq, "`=`")?;
                        let kt = self.expect(TokenKind::Ident, "mob kind")?;
                        let kind = MobKind::from_name(&kt.text).ok_or_else(|| {
                            DslError::Semantic(format!("unknown mob kind `{}`", kt.text))
                        })?;
                        self.expect(TokenKind::Semi, "`;`")?;
                        self.expect_keyword("n")?;
                        self.expect(TokenKind::Eq, "`=`")?;
                        let count = self.int_in("mob count", 1, 1000)? as u16;
                        self.expect(TokenKind::Semi, "`;`")?;
                        let region = self.region()?;
                        self.expect(TokenKind::RBrace, "`}`")?;
                        let (min, max, n) = match region {
                            Region::Near { min, max, n } => (min, max, n),
                            Region::At { .. } => {
                                return Err(DslError::Semantic(
                                    "mob region must be an annulus (`near`)".into(),
                                ))
                            }
                        };
                        if n != count {
                            return Err(DslError::Semantic(format!(
                                "mob region n ({n}) must equal mob count ({count})"
                            )));
                        }
                        mobs.push(MobSpec { kind, count, min, max });
                    }
                    "mechanics" => {
                        if mechanics.is_some() {
                            return Err(DslError::Semantic("duplicate `mechanics` block".into()));
                        }
                        self.advance();
                        self.expect(TokenKind::LBrace, "`{`")?;
                        let mut m = MechanicsParams::default();
                        let mut seen: Vec<String> = Vec::new();
                        while self.current().kind != TokenKind::RBrace {
                            let ft = self.expect(TokenKind::Ident, "mechanics field")?;
                            if m.get(&ft.text).is_none() {
                                return Err(DslError::Semantic(format!(
                                    "unknown mechanics field `{}`",
                                    ft.text
                                )));
                            }
                            if seen.contains(&ft.text) {
                                return Err(DslError::Semantic(format!(
                                    "duplicate mechanics field `{}`",
                                    ft.text
                                )));
                            }
                            self.expect(TokenKind::Eq, "`=`")?;
                            let value = self.number("mechanics value")?;
                            if value < 0.0 {
                                return Err(DslError::Semantic(format!(
                                    "mechanics field `{}` must be >= 0, got {value}",
                                    ft.text
                                )));
                            }
                            if ft.text == "monsters_killed_to_clear" && value.fract() != 0.0 {
                                return Err(DslError::Semantic(
                                    "monsters_killed_to_clear must be an integer".into(),
                                ));
                            }
                            self.expect(TokenKind::Semi, "`;`")?;
                            m.set(&ft.text, value);
                            seen.push(ft.text);
                        }
                        self.advance();
                        mechanics = Some(m);
                    }
                    "goal" => {
                        if goal.is_some() {
                            return Err(DslError::Semantic("duplicate `goal` block".into()));
                        }
                        self.advance();
                        goal = Some(self.achievement_set("goal")?);
                    }
                    "completed" => {
                        if completed.is_some() {
                            return Err(DslError::Semantic("duplicate `completed` block".into()));
                        }
                        self.advance();
                        completed = Some(self.achievement_set("completed")?);
                    }
                    other => {
                        return Err(self.error(format!("unknown statement `{other}`")));
                    }
                },
                _ => return Err(self.error("expected statement or `}`")),
            }
        }
        self.expect(TokenKind::Eof, "end of input")?;

        let goal = goal.ok_or_else(|| DslError::Semantic("program has no `goal` block".into()))?;
        Ok(LevelProgram {
            name: name_tok.text,
            floor: floor.unwrap_or(0),
            inventory_overrides: inventory.unwrap_or_default(),
            placements,
            mob_placements: mobs,
            mechanics: mechanics.unwrap_or_default(),
            goal,
            completed: completed.unwrap_or_default(),
            source_text: String::new(),
        })
    }
}

/// Parse DSL text into a validated program. `source_text` keeps the input
/// verbatim.
pub fn parse(text: &str) -> Result<LevelProgram, DslError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut program = parser.program()?;
    program.source_text = text.to_string();
    let errors = validate(&program);
    if let Some(first) = errors.into_iter().next() {
        return Err(DslError::Semantic(first));
    }
    Ok(program)
}
