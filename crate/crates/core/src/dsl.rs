//! Line-oriented text format for protocol programs (`.qproto` files).
//!
//! One statement per line, `#` starts a comment, blank lines are ignored,
//! LF and CRLF both accepted. Keywords are lowercase and case-sensitive:
//!
//! ```text
//! param chi = NUMBER          # Stark-shift coefficient (default 0)
//! param delta = NUMBER        # detuning (default 0)
//! cutoff INT                  # Fock cutoff per mode (default 20, minimum 6)
//! prepare atom e|g|superposition
//! prepare cavity A|B fock INT
//! rotate ANGLE                # ANGLE := NUMBER | pi | pi/2 | NUMBER*pi
//! interact A|B NUMBER         # scaled interaction time
//! measure atom e|g [sample INT]   # optional seed switches to sample mode
//! ```
//!
//! `param` and `cutoff` lines may appear anywhere but apply to the whole
//! program and may not repeat. Numbers are plain decimal literals with
//! optional sign and exponent. Parsing stops at the first error; value
//! errors (occupations beyond the cutoff, negative interaction times, a
//! cutoff below 6) are reported as parse errors too, pointing at the
//! offending token.
//!
//! [`format`] renders the canonical form: explicit `param`/`cutoff` lines
//! first (defaults included), one step per line, single spaces, numbers in
//! their shortest round-trippable decimal form. `parse` and `format` are
//! mutually inverse on well-formed programs.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use thiserror::Error;

use crate::fockspace::{AtomLevel, CavityLabel, Params};
use crate::protocol::{AtomPrep, MeasureMode, Program, Step};

/// Canonical file extension for protocol sources.
pub const FILE_EXTENSION: &str = "qproto";

/// Parse failure with a 1-based source location.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message} (found '{token}')")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>, token: &str) -> Self {
        Self {
            line,
            column,
            message: message.into(),
            token: token.to_string(),
        }
    }
}

/// `(column, text)` tokens of one statement; `=` always stands alone.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let body = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() || ch == '=' {
            if let Some(s) = start.take() {
                tokens.push((s + 1, &body[s..i]));
            }
            if ch == '=' {
                tokens.push((i + 1, &body[i..i + 1]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push((s + 1, &body[s..]));
    }
    tokens
}

struct Cursor<'a> {
    line: usize,
    tokens: &'a [(usize, &'a str)],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.tokens.get(self.pos) {
            Some(&(col, tok)) => {
                self.pos += 1;
                Ok((col, tok))
            }
            None => {
                let (col, tok) = self.tokens[self.pos - 1];
                Err(ParseError::new(
                    self.line,
                    col,
                    format!("expected {what} after '{tok}'"),
                    tok,
                ))
            }
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some(&(col, tok)) => Err(ParseError::new(
                self.line,
                col,
                "unexpected trailing token",
                tok,
            )),
        }
    }
}

fn parse_number(line: usize, col: usize, tok: &str) -> Result<f64, ParseError> {
    let plausible = !tok.is_empty()
        && tok
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    let value = if plausible { tok.parse::<f64>().ok() } else { None };
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(ParseError::new(line, col, "expected a number", tok)),
    }
}

fn parse_int(line: usize, col: usize, tok: &str, what: &str) -> Result<u64, ParseError> {
    if !tok.is_empty() && tok.chars().all(|c| c.is_ascii_digit()) {
        if let Ok(v) = tok.parse::<u64>() {
            return Ok(v);
        }
    }
    Err(ParseError::new(
        line,
        col,
        format!("expected {what} (an unsigned integer)"),
        tok,
    ))
}

fn parse_angle(line: usize, col: usize, tok: &str) -> Result<f64, ParseError> {
    if tok == "pi" {
        return Ok(PI);
    }
    if tok == "pi/2" {
        return Ok(FRAC_PI_2);
    }
    if let Some(prefix) = tok.strip_suffix("*pi") {
        return Ok(parse_number(line, col, prefix).map_err(|_| {
            ParseError::new(line, col, "expected a number before '*pi'", tok)
        })? * PI);
    }
    parse_number(line, col, tok)
        .map_err(|_| ParseError::new(line, col, "expected an angle (number, pi, pi/2, or N*pi)", tok))
}

fn parse_cavity(line: usize, col: usize, tok: &str) -> Result<CavityLabel, ParseError> {
    match tok {
        "A" => Ok(CavityLabel::A),
        "B" => Ok(CavityLabel::B),
        _ => Err(ParseError::new(
            line,
            col,
            "expected cavity label A or B",
            tok,
        )),
    }
}

fn parse_level(line: usize, col: usize, tok: &str) -> Result<AtomLevel, ParseError> {
    match tok {
        "e" => Ok(AtomLevel::Excited),
        "g" => Ok(AtomLevel::Ground),
        _ => Err(ParseError::new(
            line,
            col,
            "expected atom level e or g",
            tok,
        )),
    }
}

/// A parsed step together with the location of its occupation argument,
/// kept for the deferred cutoff check.
struct PendingStep {
    step: Step,
    fock: Option<(usize, usize, String)>,
}

#[derive(Default)]
struct ParamSlot {
    value: Option<f64>,
}

impl ParamSlot {
    fn set(
        &mut self,
        value: f64,
        line: usize,
        col: usize,
        tok: &str,
        name: &str,
    ) -> Result<(), ParseError> {
        if self.value.is_some() {
            return Err(ParseError::new(
                line,
                col,
                format!("duplicate declaration of {name}"),
                tok,
            ));
        }
        self.value = Some(value);
        Ok(())
    }
}

/// Parses a protocol source into a [`Program`]. The first error wins.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let mut chi = ParamSlot::default();
    let mut delta = ParamSlot::default();
    let mut cutoff: Option<usize> = None;
    let mut cutoff_seen = false;
    let mut pending: Vec<PendingStep> = Vec::new();

    for (idx, raw_line) in src.lines().enumerate() {
        let line = idx + 1;
        let tokens = tokenize(raw_line);
        if tokens.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line,
            tokens: &tokens,
            pos: 1,
        };
        let (kw_col, keyword) = tokens[0];
        match keyword {
            "param" => {
                let (name_col, name) = cur.next("parameter name chi or delta")?;
                let slot = match name {
                    "chi" => &mut chi,
                    "delta" => &mut delta,
                    _ => {
                        return Err(ParseError::new(
                            line,
                            name_col,
                            "expected parameter name chi or delta",
                            name,
                        ))
                    }
                };
                let (eq_col, eq) = cur.next("'='")?;
                if eq != "=" {
                    return Err(ParseError::new(line, eq_col, "expected '='", eq));
                }
                let (val_col, val_tok) = cur.next("a number")?;
                let value = parse_number(line, val_col, val_tok)?;
                cur.finish()?;
                slot.set(value, line, kw_col, keyword, name)?;
            }
            "cutoff" => {
                let (val_col, val_tok) = cur.next("a cutoff value")?;
                let value = parse_int(line, val_col, val_tok, "a cutoff value")? as usize;
                cur.finish()?;
                if cutoff_seen {
                    return Err(ParseError::new(
                        line,
                        kw_col,
                        "duplicate declaration of cutoff",
                        keyword,
                    ));
                }
                if value < Params::MIN_CUTOFF {
                    return Err(ParseError::new(
                        line,
                        val_col,
                        format!("cutoff must be at least {}", Params::MIN_CUTOFF),
                        val_tok,
                    ));
                }
                cutoff_seen = true;
                cutoff = Some(value);
            }
            "prepare" => {
                let (what_col, what) = cur.next("'atom' or 'cavity'")?;
                match what {
                    "atom" => {
                        let (lvl_col, lvl) = cur.next("atom level e, g, or superposition")?;
                        let prep = match lvl {
                            "superposition" => AtomPrep::Superposition,
                            _ => AtomPrep::Level(parse_level(line, lvl_col, lvl).map_err(
                                |_| {
                                    ParseError::new(
                                        line,
                                        lvl_col,
                                        "expected atom level e, g, or superposition",
                                        lvl,
                                    )
                                },
                            )?),
                        };
                        cur.finish()?;
                        pending.push(PendingStep {
                            step: Step::PrepareAtom(prep),
                            fock: None,
                        });
                    }
                    "cavity" => {
                        let (lbl_col, lbl) = cur.next("cavity label A or B")?;
                        let cavity = parse_cavity(line, lbl_col, lbl)?;
                        let (kw2_col, kw2) = cur.next("'fock'")?;
                        if kw2 != "fock" {
                            return Err(ParseError::new(line, kw2_col, "expected 'fock'", kw2));
                        }
                        let (n_col, n_tok) = cur.next("a Fock occupation")?;
                        let n = parse_int(line, n_col, n_tok, "a Fock occupation")? as usize;
                        cur.finish()?;
                        pending.push(PendingStep {
                            step: Step::PrepareCavity { cavity, n },
                            fock: Some((line, n_col, n_tok.to_string())),
                        });
                    }
                    _ => {
                        return Err(ParseError::new(
                            line,
                            what_col,
                            "expected 'atom' or 'cavity'",
                            what,
                        ))
                    }
                }
            }
            "rotate" => {
                let (a_col, a_tok) = cur.next("an angle")?;
                let theta = parse_angle(line, a_col, a_tok)?;
                cur.finish()?;
                pending.push(PendingStep {
                    step: Step::Rotate { theta },
                    fock: None,
                });
            }
            "interact" => {
                let (lbl_col, lbl) = cur.next("cavity label A or B")?;
                let cavity = parse_cavity(line, lbl_col, lbl)?;
                let (t_col, t_tok) = cur.next("an interaction time")?;
                let tau = parse_number(line, t_col, t_tok)?;
                if tau < 0.0 {
                    return Err(ParseError::new(
                        line,
                        t_col,
                        "interaction time must be non-negative",
                        t_tok,
                    ));
                }
                cur.finish()?;
                pending.push(PendingStep {
                    step: Step::Interact { cavity, tau },
                    fock: None,
                });
            }
            "measure" => {
                let (kw2_col, kw2) = cur.next("'atom'")?;
                if kw2 != "atom" {
                    return Err(ParseError::new(line, kw2_col, "expected 'atom'", kw2));
                }
                let (lvl_col, lvl) = cur.next("atom level e or g")?;
                let outcome = parse_level(line, lvl_col, lvl)?;
                let mode = if cur.tokens.len() > cur.pos {
                    let (s_col, s_tok) = cur.next("'sample'")?;
                    if s_tok != "sample" {
                        return Err(ParseError::new(
                            line,
                            s_col,
                            "expected 'sample' or end of statement",
                            s_tok,
                        ));
                    }
                    let (seed_col, seed_tok) = cur.next("a seed")?;
                    let seed = parse_int(line, seed_col, seed_tok, "a seed")?;
                    MeasureMode::Sample { seed }
                } else {
                    MeasureMode::PostSelect
                };
                cur.finish()?;
                pending.push(PendingStep {
                    step: Step::MeasureAtom { outcome, mode },
                    fock: None,
                });
            }
            _ => {
                return Err(ParseError::new(
                    line,
                    kw_col,
                    "unknown keyword",
                    keyword,
                ))
            }
        }
    }

    let params = Params::new(
        chi.value.unwrap_or(0.0),
        delta.value.unwrap_or(0.0),
        cutoff.unwrap_or(Params::default().cutoff),
    )
    .expect("parameter values were validated during parsing");

    // Occupations can only be checked once the cutoff is known.
    let mut steps = Vec::with_capacity(pending.len());
    for item in pending {
        if let (Step::PrepareCavity { n, .. }, Some((line, col, tok))) = (&item.step, &item.fock)
        {
            if *n > params.cutoff {
                return Err(ParseError::new(
                    *line,
                    *col,
                    format!("occupation {n} exceeds the cutoff {}", params.cutoff),
                    tok,
                ));
            }
        }
        steps.push(item.step);
    }

    Ok(Program { params, steps })
}

/// Renders the canonical text of a program: explicit parameter lines first,
/// then one statement per step.
pub fn format(prog: &Program) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "param chi = {}", prog.params.chi);
    let _ = writeln!(out, "param delta = {}", prog.params.delta);
    let _ = writeln!(out, "cutoff {}", prog.params.cutoff);
    for step in &prog.steps {
        let _ = match step {
            Step::PrepareAtom(AtomPrep::Level(level)) => {
                writeln!(out, "prepare atom {level}")
            }
            Step::PrepareAtom(AtomPrep::Superposition) => {
                writeln!(out, "prepare atom superposition")
            }
            Step::PrepareCavity { cavity, n } => {
                writeln!(out, "prepare cavity {cavity} fock {n}")
            }
            Step::Rotate { theta } => writeln!(out, "rotate {theta}"),
            Step::Interact { cavity, tau } => writeln!(out, "interact {cavity} {tau}"),
            Step::MeasureAtom {
                outcome,
                mode: MeasureMode::PostSelect,
            } => writeln!(out, "measure atom {outcome}"),
            Step::MeasureAtom {
                outcome,
                mode: MeasureMode::Sample { seed },
            } => writeln!(out, "measure atom {outcome} sample {seed}"),
        };
    }
    out
}
