//! Line-oriented chain file format.
//!
//! ```text
//! # comment
//! n 3
//! L 2
//! code 1 generator
//! 101
//! code 2 explicit
//! 000
//! 111
//! ```

use std::fmt::Write as _;

use ccc_core::{BinaryCode, BitWord, CodeChain};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid symbol '{symbol}' at level {level}, row {row} (line {line})")]
    InvalidSymbol {
        symbol: char,
        level: usize,
        row: usize,
        line: usize,
    },
    #[error("row {row} of level {level} has length {found}, expected {expected} (line {line})")]
    RowLength {
        level: usize,
        row: usize,
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("expected {expected} code blocks, found {found}")]
    LevelCount { expected: usize, found: usize },
    #[error("level {level} is declared twice (line {line})")]
    DuplicateLevel { level: usize, line: usize },
    #[error("level {level} is declared out of order (line {line}); expected level {expected}")]
    LevelOrder {
        level: usize,
        expected: usize,
        line: usize,
    },
    #[error("code at level {level} has no rows")]
    EmptyCode { level: usize },
    #[error("invalid chain: {0}")]
    Chain(#[from] ccc_core::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Explicit,
    Generator,
}

struct Block {
    level: usize,
    kind: Kind,
    rows: Vec<BitWord>,
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn header_value(line: usize, tokens: &[&str], key: &str) -> Result<usize, ParseError> {
    match tokens {
        [k, v] if *k == key => v.parse().map_err(|_| {
            syntax(
                line,
                format!("'{key}' expects a positive integer, got '{v}'"),
            )
        }),
        _ => Err(syntax(line, format!("expected '{key} <integer>'"))),
    }
}

/// Parses a chain file. Generator blocks are expanded by linear span.
pub fn parse_chain(text: &str) -> Result<CodeChain, ParseError> {
    let mut n: Option<usize> = None;
    let mut levels: Option<usize> = None;
    let mut blocks: Vec<Block> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if n.is_none() {
            let v = header_value(line, &tokens, "n")?;
            if v == 0 {
                return Err(syntax(line, "'n' must be positive"));
            }
            n = Some(v);
            continue;
        }
        if levels.is_none() {
            let v = header_value(line, &tokens, "L")?;
            if v == 0 {
                return Err(syntax(line, "'L' must be positive"));
            }
            levels = Some(v);
            continue;
        }
        let (n, total) = (n.unwrap(), levels.unwrap());
        if tokens[0] == "code" {
            let [_, lv, kind] = tokens[..] else {
                return Err(syntax(line, "expected 'code <level> explicit|generator'"));
            };
            let level: usize = lv
                .parse()
                .map_err(|_| syntax(line, format!("invalid level '{lv}'")))?;
            let kind = match kind {
                "explicit" => Kind::Explicit,
                "generator" => Kind::Generator,
                other => {
                    return Err(syntax(
                        line,
                        format!("unknown code kind '{other}' (expected explicit or generator)"),
                    ))
                }
            };
            if blocks.iter().any(|b| b.level == level) {
                return Err(ParseError::DuplicateLevel { level, line });
            }
            let expected = blocks.len() + 1;
            if level != expected {
                if level == 0 || level > total {
                    return Err(syntax(line, format!("level {level} outside 1..={total}")));
                }
                return Err(ParseError::LevelOrder {
                    level,
                    expected,
                    line,
                });
            }
            if let Some(prev) = blocks.last() {
                if prev.rows.is_empty() {
                    return Err(ParseError::EmptyCode { level: prev.level });
                }
            }
            blocks.push(Block {
                level,
                kind,
                rows: Vec::new(),
            });
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(syntax(
                line,
                format!("unexpected '{content}' before the first code block"),
            ));
        };
        if tokens.len() != 1 {
            return Err(syntax(line, "a row must be a single word over {0,1}"));
        }
        let row = block.rows.len() + 1;
        let mut bits = Vec::with_capacity(n);
        for ch in content.chars() {
            match ch {
                '0' => bits.push(0u8),
                '1' => bits.push(1u8),
                symbol => {
                    return Err(ParseError::InvalidSymbol {
                        symbol,
                        level: block.level,
                        row,
                        line,
                    })
                }
            }
        }
        if bits.len() != n {
            return Err(ParseError::RowLength {
                level: block.level,
                row,
                expected: n,
                found: bits.len(),
                line,
            });
        }
        block.rows.push(BitWord::from_bits(&bits)?);
    }

    let (Some(n), Some(total)) = (n, levels) else {
        return Err(syntax(
            text.lines().count().max(1),
            "missing 'n' or 'L' header",
        ));
    };
    if let Some(b) = blocks.iter().find(|b| b.rows.is_empty()) {
        return Err(ParseError::EmptyCode { level: b.level });
    }
    if blocks.len() != total {
        return Err(ParseError::LevelCount {
            expected: total,
            found: blocks.len(),
        });
    }
    let codes = blocks
        .into_iter()
        .map(|b| match b.kind {
            Kind::Explicit => BinaryCode::from_words(n, b.rows),
            Kind::Generator => BinaryCode::span(n, &b.rows),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CodeChain::new(codes)?)
}

/// Canonical text form. Codes carrying a nonempty generator list are written
/// as generator blocks, all others explicitly.
pub fn print_chain(chain: &CodeChain) -> String {
    let mut out = String::new();
    writeln!(out, "n {}", chain.n()).unwrap();
    writeln!(out, "L {}", chain.levels()).unwrap();
    for (i, code) in chain.codes().iter().enumerate() {
        match code.generators() {
            Some(gens) if !gens.is_empty() => {
                writeln!(out, "code {} generator", i + 1).unwrap();
                for g in gens {
                    writeln!(out, "{g}").unwrap();
                }
            }
            _ => {
                writeln!(out, "code {} explicit", i + 1).unwrap();
                for w in code.words() {
                    writeln!(out, "{w}").unwrap();
                }
            }
        }
    }
    out
}
