//! Plain-text formats for star operations, finite spaces and mapping tables.
//!
//! All formats are whitespace separated, one record per line. Blank lines and
//! anything after `#` are ignored. Indices are 1-based in star files and
//! 0-based (point labels) in space and table files.
//!
//! * star: `n`, then `n` rows of `n` entries in `1..=n`.
//! * finite space: `p`, then `p` rows of the distance matrix, then `p` rows
//!   of the `0/1` order matrix (`1` in row `i`, column `j` means `i ⪯ j`).
//! * F-table: `pⁿ` lines `x₁ … xₙ value`, each argument tuple exactly once.
//! * g-table: `p` lines `x gx`, each point exactly once.

use std::fmt::Write as _;

use ntuple_core::map::tuple_count;
use ntuple_core::{FiniteSpace, FiniteTable, StarOp, UnaryTable};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    /// 1-based line in the source text; 0 for whole-file problems.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with their line numbers.
fn records(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let body = l.split('#').next().unwrap_or("");
            let fields: Vec<&str> = body.split_whitespace().collect();
            (!fields.is_empty()).then_some((i + 1, fields))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T, FormatError> {
    field
        .parse()
        .map_err(|_| err(line, format!("expected {what}, found `{field}`")))
}

fn header(recs: &[(usize, Vec<&str>)], what: &str) -> Result<usize, FormatError> {
    let (line, fields) = recs.first().ok_or_else(|| err(0, format!("empty {what} file")))?;
    if fields.len() != 1 {
        return Err(err(*line, format!("first line must hold only the {what} size")));
    }
    parse_num(*line, fields[0], "a size")
}

fn expect_rows(recs: &[(usize, Vec<&str>)], rows: usize) -> Result<(), FormatError> {
    let found = recs.len().saturating_sub(1);
    if found != rows {
        let line = recs.get(rows + 1).map_or(0, |r| r.0);
        return Err(err(line, format!("expected {rows} data lines, found {found}")));
    }
    Ok(())
}

pub fn parse_star(text: &str) -> Result<StarOp, FormatError> {
    let recs = records(text);
    let n = header(&recs, "star")?;
    expect_rows(&recs, n)?;
    let mut rows = Vec::with_capacity(n);
    for (line, fields) in &recs[1..] {
        if fields.len() != n {
            return Err(err(*line, format!("expected {n} entries, found {}", fields.len())));
        }
        rows.push(
            fields
                .iter()
                .map(|f| parse_num::<usize>(*line, f, "a 1-based index"))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    StarOp::new(n, &rows).map_err(|e| {
        let line = match e {
            ntuple_core::StarError::EntryOutOfRange { row, .. } => recs.get(row).map_or(0, |r| r.0),
            _ => 0,
        };
        err(line, e.to_string())
    })
}

pub fn format_star(star: &StarOp) -> String {
    let mut out = format!("{}\n", star.n());
    for row in star.to_matrix() {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

/// Parses and validates a finite space; every metric and order axiom must
/// hold.
pub fn parse_finite_space(text: &str) -> Result<FiniteSpace, FormatError> {
    let recs = records(text);
    let p = header(&recs, "space")?;
    expect_rows(&recs, 2 * p)?;
    let mut dist = Vec::with_capacity(p);
    let mut leq = Vec::with_capacity(p);
    for (idx, (line, fields)) in recs[1..].iter().enumerate() {
        if fields.len() != p {
            return Err(err(*line, format!("expected {p} entries, found {}", fields.len())));
        }
        if idx < p {
            dist.push(
                fields
                    .iter()
                    .map(|f| parse_num::<f64>(*line, f, "a distance"))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        } else {
            leq.push(
                fields
                    .iter()
                    .map(|f| match *f {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        other => Err(err(*line, format!("order entries are 0 or 1, found `{other}`"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
    }
    let space = FiniteSpace::new(&dist, &leq).map_err(|e| err(0, e.to_string()))?;
    if let Some(v) = space.validate().first() {
        return Err(err(0, format!("{v:?}")));
    }
    Ok(space)
}

pub fn format_finite_space(space: &FiniteSpace) -> String {
    let mut out = format!("{}\n", space.len());
    for row in space.dist_table() {
        let cells: Vec<String> = row.iter().map(|d| format!("{d:?}")).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    for row in space.order_table() {
        let cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

pub fn parse_f_table(text: &str, p: usize, n: usize) -> Result<FiniteTable, FormatError> {
    let count = tuple_count(p, n).ok_or_else(|| err(0, "p^n overflows"))?;
    let mut values: Vec<Option<usize>> = vec![None; count];
    for (line, fields) in records(text) {
        if fields.len() != n + 1 {
            return Err(err(
                line,
                format!("expected {n} arguments and a value, found {} fields", fields.len()),
            ));
        }
        let mut idx = 0usize;
        for f in &fields[..n] {
            let a: usize = parse_num(line, f, "a point")?;
            if a >= p {
                return Err(err(line, format!("point {a} is outside 0..{p}")));
            }
            idx = idx * p + a;
        }
        let value: usize = parse_num(line, fields[n], "a point")?;
        if value >= p {
            return Err(err(line, format!("value {value} is outside 0..{p}")));
        }
        if values[idx].replace(value).is_some() {
            return Err(err(line, "argument tuple listed twice"));
        }
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(err(0, format!("{missing} of {count} argument tuples are missing")));
    }
    FiniteTable::new(p, n, values.into_iter().flatten().collect()).map_err(|e| err(0, e.to_string()))
}

pub fn format_f_table(table: &FiniteTable, n: usize) -> String {
    let p = table.p();
    let mut args = vec![0; n];
    let mut out = String::new();
    for (idx, v) in table.values().iter().enumerate() {
        ntuple_core::map::decode_tuple(idx, p, &mut args);
        let cells: Vec<String> = args.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{} {v}", cells.join(" "));
    }
    out
}

pub fn parse_g_table(text: &str, p: usize) -> Result<UnaryTable, FormatError> {
    let mut values: Vec<Option<usize>> = vec![None; p];
    for (line, fields) in records(text) {
        if fields.len() != 2 {
            return Err(err(line, format!("expected `x gx`, found {} fields", fields.len())));
        }
        let x: usize = parse_num(line, fields[0], "a point")?;
        let gx: usize = parse_num(line, fields[1], "a point")?;
        if x >= p || gx >= p {
            return Err(err(line, format!("points must lie in 0..{p}")));
        }
        if values[x].replace(gx).is_some() {
            return Err(err(line, format!("point {x} listed twice")));
        }
    }
    if let Some(x) = values.iter().position(Option::is_none) {
        return Err(err(0, format!("no value for point {x}")));
    }
    UnaryTable::new(values.into_iter().flatten().collect()).map_err(|e| err(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_round_trip() {
        for star in [
            StarOp::borcut_triple(),
            StarOp::karapinar_quadruple(),
            StarOp::skew_1(5).unwrap(),
        ] {
            assert_eq!(parse_star(&format_star(&star)).unwrap(), star);
        }
        let s = parse_star("# coupled\n2\n1 2  # first row\n\n2 1\n").unwrap();
        assert_eq!(s, StarOp::coupled());
    }

    #[test]
    fn star_errors() {
        let e = parse_star("2\n1 0\n2 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_star("2\n1 2\n").is_err());
        assert!(parse_star("2\n1 2\n2 1\n1 1\n").is_err());
        assert_eq!(parse_star("2\n1 x\n2 1\n").unwrap_err().line, 2);
        assert!(parse_star("").is_err());
        assert!(parse_star("1\n1\n").is_err());
    }

    #[test]
    fn finite_space_round_trip() {
        let chain = FiniteSpace::chain(3);
        assert_eq!(parse_finite_space(&format_finite_space(&chain)).unwrap(), chain);
        let text = "2\n0 1\n1 0\n1 1\n0 1\n";
        assert_eq!(parse_finite_space(text).unwrap(), FiniteSpace::chain(2));
    }

    #[test]
    fn finite_space_rejects_bad_axioms() {
        assert!(parse_finite_space("2\n0 1\n2 0\n1 1\n0 1\n").is_err());
        assert!(parse_finite_space("2\n0 1\n1 0\n1 1\n1 1\n").is_err());
        assert!(parse_finite_space("2\n0 1\n1 0\n1 2\n0 1\n").is_err());
    }

    #[test]
    fn tables() {
        let min = FiniteTable::tabulate(3, 2, |a| a[0].min(a[1])).unwrap();
        assert_eq!(parse_f_table(&format_f_table(&min, 2), 3, 2).unwrap(), min);
        assert!(parse_f_table("0 0 0\n0 1 0\n1 0 0\n", 2, 2).is_err());
        assert!(parse_f_table("0 0 0\n0 0 1\n1 0 0\n1 1 1\n", 2, 2).is_err());
        assert!(parse_f_table("0 0 2\n0 1 0\n1 0 0\n1 1 1\n", 2, 2).is_err());
        let g = parse_g_table("0 1\n1 0\n", 2).unwrap();
        assert_eq!(g.values(), &[1, 0]);
        assert!(parse_g_table("0 1\n", 2).is_err());
        assert!(parse_g_table("0 1\n0 0\n", 2).is_err());
    }
}
