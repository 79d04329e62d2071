//! Line-oriented presentation format.
//!
//! ```text
//! # comment
//! generators: x1 x2 x3 x4
//! order: deglex x1 > x2 > x3 > x4
//! mode: ERE
//! rule beta: x1 x3 => x2 x4
//! rule gamma: x1 x2 => x1
//! modulo commutation
//! ```
//!
//! Words are space-separated generator names and `1` denotes the empty word.
//! `modulo commutation` expands to one rule `x_i x_j => x_j x_i` per pair
//! with `x_i` greater in the declared order; an explicit `modulo id: u == v`
//! stores the left-to-right orientation, which only fixes Irr(E).

use crate::presentation::{
    Generator, Mode, OrderKind, OrderSpec, PolygraphModulo, Rule, RuleKind, Word,
};
use std::collections::HashSet;
use std::fmt;

/// Parse failure with position information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: {}",
            self.line, self.col, self.msg
        )
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        msg: msg.into(),
    })
}

struct Builder {
    generators: Vec<Generator>,
    r_rules: Vec<Rule>,
    e_rules: Vec<Rule>,
    mode: Option<Mode>,
    precedence: Option<Vec<u32>>,
    commutation: bool,
    ids: HashSet<String>,
}

impl Builder {
    fn lookup(&self, name: &str, line: usize, col: usize) -> Result<u32, ParseError> {
        match self.generators.iter().position(|g| g.name == name) {
            Some(i) => Ok(i as u32),
            None => err(line, col, format!("unknown generator {name}")),
        }
    }

    fn word(&self, tokens: &[(usize, &str)], line: usize) -> Result<Word, ParseError> {
        if tokens.len() == 1 && tokens[0].1 == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::with_capacity(tokens.len());
        for &(col, t) in tokens {
            letters.push(self.lookup(t, line, col)?);
        }
        Ok(Word(letters))
    }
}

/// Tokens of a line with 1-based column positions.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        let end = line.find('#').unwrap_or(line.len());
        out.push((s + 1, line[s..end].trim_end()));
    }
    out
}

/// Parses a presentation from source text and validates it.
pub fn parse_presentation(text: &str) -> Result<PolygraphModulo, ParseError> {
    let mut b = Builder {
        generators: Vec::new(),
        r_rules: Vec::new(),
        e_rules: Vec::new(),
        mode: None,
        precedence: None,
        commutation: false,
        ids: HashSet::new(),
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let (col0, head) = tokens[0];
        match head {
            "generators:" => {
                if !b.generators.is_empty() {
                    return err(line, col0, "duplicate generators line");
                }
                for &(col, name) in &tokens[1..] {
                    if name == "1" {
                        return err(line, col, "generator may not be named 1");
                    }
                    if b.generators.iter().any(|g| g.name == name) {
                        return err(line, col, format!("duplicate generator {name}"));
                    }
                    b.generators.push(Generator {
                        name: name.to_string(),
                    });
                }
                if b.generators.is_empty() {
                    return err(line, col0, "generators line lists no names");
                }
            }
            "order:" => {
                if tokens.len() < 2 || tokens[1].1 != "deglex" {
                    return err(
                        line,
                        col0,
                        "order line must read `order: deglex n1 > n2 > ...`",
                    );
                }
                let mut prec = Vec::new();
                let mut expect_name = true;
                for &(col, t) in &tokens[2..] {
                    if expect_name {
                        let idx = b.lookup(t, line, col)?;
                        if prec.contains(&idx) {
                            return err(line, col, format!("generator {t} listed twice in order"));
                        }
                        prec.push(idx);
                    } else if t != ">" {
                        return err(line, col, "expected `>` between order entries");
                    }
                    expect_name = !expect_name;
                }
                if expect_name || prec.len() != b.generators.len() {
                    return err(line, col0, "order must list every generator exactly once");
                }
                b.precedence = Some(prec);
            }
            "mode:" => {
                if tokens.len() != 2 {
                    return err(line, col0, "mode line must read `mode: R|ER|RE|ERE`");
                }
                let (col, m) = tokens[1];
                match Mode::parse(m) {
                    Some(mode) => b.mode = Some(mode),
                    None => return err(line, col, format!("unknown mode {m}")),
                }
            }
            "rule" | "modulo" => {
                if head == "modulo" && tokens.len() == 2 && tokens[1].1 == "commutation" {
                    b.commutation = true;
                    continue;
                }
                if tokens.len() < 2 {
                    return err(line, col0, "missing rule id");
                }
                let (idcol, idtok) = tokens[1];
                let id = match idtok.strip_suffix(':') {
                    Some(s) if !s.is_empty() => s.to_string(),
                    _ => return err(line, idcol, "rule id must end with `:`"),
                };
                if !b.ids.insert(id.clone()) {
                    return err(line, idcol, format!("duplicate rule id {id}"));
                }
                let sep = if head == "rule" { "=>" } else { "==" };
                let body = &tokens[2..];
                let sep_pos = match body.iter().position(|&(_, t)| t == sep) {
                    Some(i) => i,
                    None => return err(line, col0, format!("rule body must contain `{sep}`")),
                };
                let lhs = b.word(&body[..sep_pos], line)?;
                let rhs = b.word(&body[sep_pos + 1..], line)?;
                if lhs.is_empty() {
                    return err(
                        line,
                        col0,
                        format!("rule {id}: left-hand side may not be empty"),
                    );
                }
                let kind = if head == "rule" {
                    RuleKind::Primary
                } else {
                    RuleKind::Modulo
                };
                let rule = Rule { id, kind, lhs, rhs };
                if kind == RuleKind::Primary {
                    b.r_rules.push(rule);
                } else {
                    b.e_rules.push(rule);
                }
            }
            _ => return err(line, col0, format!("unrecognised directive {head}")),
        }
    }

    if b.generators.is_empty() {
        return err(0, 0, "presentation declares no generators");
    }
    let mode = match b.mode {
        Some(m) => m,
        None => return err(0, 0, "presentation declares no mode"),
    };
    let precedence = b
        .precedence
        .unwrap_or_else(|| (0..b.generators.len() as u32).collect());

    if b.commutation {
        // one rule per pair, greater generator first
        for i in 0..precedence.len() {
            for j in i + 1..precedence.len() {
                let hi = precedence[i];
                let lo = precedence[j];
                let id = format!(
                    "a_{}_{}",
                    b.generators[hi as usize].name, b.generators[lo as usize].name
                );
                if !b.ids.insert(id.clone()) {
                    return err(0, 0, format!("duplicate rule id {id}"));
                }
                b.e_rules.push(Rule {
                    id,
                    kind: RuleKind::Modulo,
                    lhs: Word(vec![hi, lo]),
                    rhs: Word(vec![lo, hi]),
                });
            }
        }
    }

    // canonical-deglex is only sound when E is a commutation system
    let commutation_like = b.e_rules.iter().all(|r| {
        r.lhs.degree() == 2
            && r.rhs.degree() == 2
            && r.lhs.0[0] == r.rhs.0[1]
            && r.lhs.0[1] == r.rhs.0[0]
            && r.lhs.0[0] != r.lhs.0[1]
    });
    let kind = if b.commutation || (!b.e_rules.is_empty() && commutation_like) {
        OrderKind::CanonicalDeglex
    } else {
        OrderKind::Deglex
    };

    Ok(PolygraphModulo {
        generators: b.generators,
        r_rules: b.r_rules,
        e_rules: b.e_rules,
        mode,
        order: OrderSpec { kind, precedence },
        commutation_e: b.commutation,
    })
}

/// Parses one word given as space-separated generator names (`1` = empty).
pub fn parse_word(p: &PolygraphModulo, text: &str) -> Result<Word, ParseError> {
    let trimmed = text.trim();
    if trimmed == "1" {
        return Ok(Word::empty());
    }
    let mut letters = Vec::new();
    for (i, tok) in trimmed.split_whitespace().enumerate() {
        match p.generator_index(tok) {
            Some(idx) => letters.push(idx),
            None => {
                return Err(ParseError {
                    line: 1,
                    col: i + 1,
                    msg: format!("unknown generator {tok}"),
                })
            }
        }
    }
    Ok(Word(letters))
}

/// Emits the presentation in the input grammar, deterministically.
pub fn serialize_presentation(p: &PolygraphModulo) -> String {
    let mut out = String::new();
    out.push_str("generators:");
    for g in &p.generators {
        out.push(' ');
        out.push_str(&g.name);
    }
    out.push('\n');
    out.push_str("order: deglex ");
    let names: Vec<&str> = p
        .order
        .precedence
        .iter()
        .map(|&i| p.generators[i as usize].name.as_str())
        .collect();
    out.push_str(&names.join(" > "));
    out.push('\n');
    out.push_str(&format!("mode: {}\n", p.mode.as_str()));
    for r in &p.r_rules {
        out.push_str(&format!(
            "rule {}: {} => {}\n",
            r.id,
            p.display_word(&r.lhs),
            p.display_word(&r.rhs)
        ));
    }
    if p.commutation_e {
        out.push_str("modulo commutation\n");
    } else {
        for r in &p.e_rules {
            out.push_str(&format!(
                "modulo {}: {} == {}\n",
                r.id,
                p.display_word(&r.lhs),
                p.display_word(&r.rhs)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::GOLDEN_62;

    #[test]
    fn golden_counts() {
        let p = parse_presentation(GOLDEN_62).unwrap();
        assert_eq!(p.generators.len(), 4);
        assert_eq!(p.r_rules.len(), 2);
        // C(4,2) commutation rules
        assert_eq!(p.e_rules.len(), 6);
        assert_eq!(p.mode, Mode::Ere);
        assert_eq!(p.order.kind, OrderKind::CanonicalDeglex);
    }

    #[test]
    fn commutation_rule_count_is_choose_two() {
        for k in 2..=6usize {
            let gens: Vec<String> = (1..=k).map(|i| format!("g{i}")).collect();
            let text = format!(
                "generators: {}\nmode: ERE\nmodulo commutation\n",
                gens.join(" ")
            );
            let p = parse_presentation(&text).unwrap();
            assert_eq!(p.e_rules.len(), k * (k - 1) / 2);
        }
    }

    #[test]
    fn empty_rule_blocks_parse() {
        let p = parse_presentation("generators: a b\nmode: R\n").unwrap();
        assert!(p.r_rules.is_empty() && p.e_rules.is_empty());
    }

    #[test]
    fn undeclared_generator_named_in_error() {
        let text = "generators: a b\nmode: R\nrule r0: a x9 => b\n";
        let e = parse_presentation(text).unwrap_err();
        assert!(e.msg.contains("x9"), "{e}");
        assert_eq!(e.line, 3);
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = "generators: a b\nmode: R\nrule r0: a => b\nrule r0: b => a\n";
        let e = parse_presentation(text).unwrap_err();
        assert!(e.msg.contains("duplicate rule id"));
    }

    #[test]
    fn unknown_mode_rejected() {
        let e = parse_presentation("generators: a\nmode: XYZ\n").unwrap_err();
        assert!(e.msg.contains("unknown mode"));
    }

    #[test]
    fn empty_lhs_rejected() {
        let e = parse_presentation("generators: a\nmode: R\nrule r0: 1 => a\n").unwrap_err();
        assert!(e.msg.contains("left-hand side"));
    }

    #[test]
    fn round_trip_is_structural_identity() {
        for text in [
            GOLDEN_62,
            crate::test_fixtures::SQUIER_TOY,
            crate::test_fixtures::NON_E_NORMALIZING,
        ] {
            let p = parse_presentation(text).unwrap();
            let again = parse_presentation(&serialize_presentation(&p)).unwrap();
            assert_eq!(p, again);
        }
    }
}
