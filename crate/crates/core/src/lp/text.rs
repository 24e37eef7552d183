//! Line-oriented text form of a [`LinearProgram`].
//!
//! ```text
//! # comments start with '#'
//! vars 2
//! minimize -1 -1
//! con 1*x0 -1*x1 <= 1
//! bound x0 0 5
//! bound x1 -inf inf
//! ```
//!
//! Variables default to `[0, inf)`. `dump` writes one constraint per line and
//! `parse(dump(lp))` reproduces `lp`.

use std::fmt::Write as _;

use super::{Bounds, Constraint, LinearProgram, Relation};
use crate::error::{Error, Result};

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

pub fn dump(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {}", lp.num_vars);
    let obj: Vec<String> = lp.objective.iter().map(|c| num(*c)).collect();
    let _ = writeln!(out, "minimize {}", obj.join(" "));
    for c in &lp.constraints {
        let terms: Vec<String> = c
            .coeffs
            .iter()
            .map(|(j, a)| format!("{}*x{j}", num(*a)))
            .collect();
        let _ = writeln!(out, "con {} {} {}", terms.join(" "), c.relation, num(c.rhs));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        if *b != Bounds::NONNEGATIVE {
            let _ = writeln!(out, "bound x{j} {} {}", num(b.lower), num(b.upper));
        }
    }
    out
}

fn parse_num(tok: &str) -> std::result::Result<f64, String> {
    match tok {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| format!("bad number `{tok}`")),
    }
}

fn parse_var(tok: &str) -> std::result::Result<usize, String> {
    tok.strip_prefix('x')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad variable `{tok}`"))
}

pub fn parse(src: &str) -> Result<LinearProgram> {
    let mut lp: Option<LinearProgram> = None;
    for (lineno, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::MalformedLp(format!("line {}: {m}", lineno + 1));
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();

        if head == "vars" {
            if lp.is_some() {
                return Err(err("duplicate `vars`".into()));
            }
            let n = rest
                .first()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err("`vars` needs a count".into()))?;
            lp = Some(LinearProgram::new(n));
            continue;
        }
        let prog = lp
            .as_mut()
            .ok_or_else(|| err("`vars` must come first".into()))?;
        match head {
            "minimize" => {
                prog.objective = rest
                    .iter()
                    .map(|t| parse_num(t))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(err)?;
            }
            "con" => {
                if rest.len() < 2 {
                    return Err(err("constraint needs a relation and rhs".into()));
                }
                let (terms, tail) = rest.split_at(rest.len() - 2);
                let relation = match tail[0] {
                    "<=" => Relation::Le,
                    "=" | "==" => Relation::Eq,
                    ">=" => Relation::Ge,
                    other => return Err(err(format!("bad relation `{other}`"))),
                };
                let rhs = parse_num(tail[1]).map_err(err)?;
                let coeffs = terms
                    .iter()
                    .map(|t| {
                        let (a, v) = t
                            .split_once('*')
                            .ok_or_else(|| format!("term `{t}` is not coef*xN"))?;
                        Ok((parse_var(v)?, parse_num(a)?))
                    })
                    .collect::<std::result::Result<_, String>>()
                    .map_err(err)?;
                prog.constraints.push(Constraint {
                    coeffs,
                    relation,
                    rhs,
                });
            }
            "bound" => {
                if rest.len() != 3 {
                    return Err(err("bound needs `xN lower upper`".into()));
                }
                let j = parse_var(rest[0]).map_err(err)?;
                let b = Bounds::new(
                    parse_num(rest[1]).map_err(err)?,
                    parse_num(rest[2]).map_err(err)?,
                );
                *prog
                    .bounds
                    .get_mut(j)
                    .ok_or_else(|| err(format!("variable x{j} out of range")))? = b;
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    lp.ok_or_else(|| Error::MalformedLp("missing `vars` line".into()))
}
