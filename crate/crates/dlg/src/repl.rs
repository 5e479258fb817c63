//! Terminal dialog runner. Each input line is one utterance of
//! space-separated `question=response` pairs, or one of `:undo`, `:redo`,
//! `:quit`.

use std::io::{BufRead, Write};

use mixdialog_core::peval::Bindings;
use mixdialog_core::stager::{Outcome, SessionState, Stage, Utterance};
use mixdialog_core::{QuestionId, Response};

/// Parses one input line into an utterance.
pub fn parse_utterance(line: &str) -> Result<Utterance, String> {
    let mut b = Bindings::new();
    for pair in line.split_whitespace() {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| format!("expected question=response, got `{pair}`"))?;
        let q = QuestionId::new(k).ok_or_else(|| format!("invalid question `{k}`"))?;
        let r = Response::new(v).ok_or_else(|| format!("invalid response `{v}`"))?;
        if b.insert(q, r).is_some() {
            return Err(format!("`{k}` given twice"));
        }
    }
    Utterance::new(b).ok_or_else(|| "empty utterance".to_owned())
}

fn print_prompt(s: &SessionState, out: &mut dyn Write) -> std::io::Result<()> {
    let Stage::Open(script) = s.stage() else {
        return Ok(());
    };
    let parts: Vec<String> = s
        .askable()
        .iter()
        .map(|q| {
            let vals: Vec<&str> = script
                .domain(q)
                .map(|d| d.allowed().iter().map(Response::as_str).collect())
                .unwrap_or_default();
            format!("{q} ({})", vals.join(" "))
        })
        .collect();
    writeln!(out, "askable: {}", parts.join(" | "))?;
    write!(out, "> ")?;
    out.flush()
}

pub fn format_bindings(b: &Bindings) -> String {
    b.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs `session` until completion, `:quit`, or end of input.
pub fn run(
    mut session: SessionState,
    input: impl BufRead,
    out: &mut dyn Write,
) -> std::io::Result<SessionState> {
    print_prompt(&session, out)?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        match line {
            "" => {}
            ":quit" => break,
            ":undo" | ":redo" => {
                let r = if line == ":undo" {
                    session.undo()
                } else {
                    session.redo()
                };
                match r {
                    Ok(()) => writeln!(out, "{}", &line[1..])?,
                    Err(e) => writeln!(out, "{e}")?,
                }
            }
            _ => match parse_utterance(line) {
                Err(e) => writeln!(out, "rejected: parse ({e})")?,
                Ok(u) => match session.step(&u).outcome {
                    Outcome::Accepted => writeln!(out, "accepted")?,
                    Outcome::Rejected(r) => writeln!(out, "rejected: {} ({r})", r.kind())?,
                    Outcome::Completed(c) => {
                        writeln!(
                            out,
                            "completed: {} {}",
                            c.action,
                            format_bindings(&c.bindings)
                        )?;
                        return Ok(session);
                    }
                },
            },
        }
        print_prompt(&session, out)?;
    }
    writeln!(out)?;
    Ok(session)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_lines() {
        assert_eq!(
            parse_utterance("size=small blend=dark")
                .unwrap()
                .bindings()
                .len(),
            2
        );
        assert!(parse_utterance("size").is_err());
        assert!(parse_utterance("size=a size=b").is_err());
        assert!(parse_utterance("   ").is_err());
    }
}
