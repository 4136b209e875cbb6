//! Plain-text dump in the CPLEX LP file format.
//!
//! Only a keyword subset is emitted: `Minimize`, `Subject To`, `Bounds`,
//! `Generals`, `End`. Names are sanitized by mapping `[` to `(` and `]` to
//! `)`, since brackets are not legal in LP-format identifiers.

use std::fmt::Write;

use super::problem::{Sense, SparseProblem};

pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '[' => '(',
            ']' => ')',
            ' ' => '_',
            c => c,
        })
        .collect()
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut first = true;
    let mut width = 0;
    for (v, name) in terms {
        let piece = if first {
            if v < 0.0 {
                format!("- {} {}", fmt_num(-v), name)
            } else {
                format!("{} {}", fmt_num(v), name)
            }
        } else if v < 0.0 {
            format!(" - {} {}", fmt_num(-v), name)
        } else {
            format!(" + {} {}", fmt_num(v), name)
        };
        if width + piece.len() > 200 {
            out.push_str("\n   ");
            width = 0;
        }
        width += piece.len();
        out.push_str(&piece);
        first = false;
    }
    if first {
        out.push('0');
    }
}

/// Renders `problem` as LP-format text.
pub fn to_lp_string(problem: &SparseProblem) -> String {
    let mut out = String::new();
    let names: Vec<String> = problem.columns().iter().map(|c| sanitize(&c.key)).collect();
    out.push_str("\\ generated by scgep\nMinimize\n obj: ");
    write_terms(
        &mut out,
        problem
            .columns()
            .iter()
            .zip(&names)
            .filter(|(c, _)| c.cost != 0.0)
            .map(|(c, n)| (c.cost, n.clone())),
    );
    if problem.objective_offset != 0.0 {
        let _ = write!(out, " + {} __offset", fmt_num(problem.objective_offset));
    }
    out.push_str("\nSubject To\n");
    for (i, row) in problem.rows().iter().enumerate() {
        let _ = write!(out, " {}: ", sanitize(&row.key));
        write_terms(
            &mut out,
            problem
                .row_entries(i)
                .iter()
                .map(|&(c, v)| (v, names[c].clone())),
        );
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    if problem.objective_offset != 0.0 {
        out.push_str(" __offset = 1\n");
    }
    for (c, n) in problem.columns().iter().zip(&names) {
        if c.lower == c.upper {
            let _ = writeln!(out, " {n} = {}", fmt_num(c.lower));
        } else if c.lower == f64::NEG_INFINITY && c.upper == f64::INFINITY {
            let _ = writeln!(out, " {n} free");
        } else {
            let _ = writeln!(out, " {} <= {n} <= {}", fmt_num(c.lower), fmt_num(c.upper));
        }
    }
    let ints: Vec<&String> = problem
        .columns()
        .iter()
        .zip(&names)
        .filter(|(c, _)| c.integer)
        .map(|(_, n)| n)
        .collect();
    if !ints.is_empty() {
        out.push_str("Generals\n");
        for n in ints {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}
