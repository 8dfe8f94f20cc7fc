//! LP interchange files (CPLEX LP syntax).
//!
//! Only what the programs here need: a minimization objective, equality rows,
//! `0 <= x <= u` bounds and an optional `Binary` section. The objective
//! constant and the mapping back to the full augmented vector travel in `\`
//! comment lines, which other readers ignore.

use std::fmt::Write as _;
use std::path::Path;

use crate::solver::{CscMatrix, LinearProgram};
use crate::{Error, Result};

const TERMS_PER_LINE: usize = 8;

fn write_terms(s: &mut String, lead: &str, terms: &[(f64, &str)]) {
    let _ = write!(s, "{lead}");
    if terms.is_empty() {
        return;
    }
    for (k, (c, name)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            s.push_str("\n   ");
        }
        let sign = if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) { '-' } else { '+' };
        let _ = write!(s, " {sign} {} {name}", c.abs());
    }
}

/// Render `lp`; `binary` adds the integrality section.
pub fn write_lp(lp: &LinearProgram, binary: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "\\ willmore-ilp {}", if binary { "ILP" } else { "LP" });
    let _ = writeln!(s, "\\ offset: {}", lp.objective_offset);
    let _ = writeln!(s, "\\ full_len: {}", lp.full_len);
    for (name, &j) in lp.col_names.iter().zip(&lp.columns) {
        let _ = writeln!(s, "\\ column: {name} {j}");
    }
    for &(j, v) in &lp.fixed {
        let _ = writeln!(s, "\\ fixed: {j} {v}");
    }
    let _ = writeln!(s, "Minimize");
    let obj: Vec<(f64, &str)> = lp
        .objective
        .iter()
        .zip(&lp.col_names)
        .filter(|(c, _)| **c != 0.0)
        .map(|(c, n)| (*c, n.as_str()))
        .collect();
    write_terms(&mut s, " obj:", &obj);
    s.push('\n');
    let _ = writeln!(s, "Subject To");
    let mut rows: Vec<Vec<(f64, &str)>> = vec![Vec::new(); lp.rows()];
    for (i, j, v) in lp.matrix.triplets() {
        rows[i].push((v, lp.col_names[j].as_str()));
    }
    for (i, terms) in rows.iter().enumerate() {
        let lead = format!(" {}:", lp.row_names[i]);
        if terms.is_empty() {
            // A row without free variables; keep it so infeasibility survives.
            let zero = lp.col_names.first().map(|n| vec![(0.0, n.as_str())]).unwrap_or_default();
            write_terms(&mut s, &lead, &zero);
        } else {
            write_terms(&mut s, &lead, terms);
        }
        let _ = writeln!(s, " = {}", lp.rhs[i]);
    }
    let _ = writeln!(s, "Bounds");
    for (name, u) in lp.col_names.iter().zip(&lp.upper) {
        let _ = writeln!(s, " 0 <= {name} <= {u}");
    }
    if binary {
        let _ = writeln!(s, "Binary");
        for chunk in lp.col_names.chunks(TERMS_PER_LINE) {
            let _ = writeln!(s, " {}", chunk.join(" "));
        }
    }
    let _ = writeln!(s, "End");
    s
}

pub fn export_lp_file(lp: &LinearProgram, path: &Path, binary: bool) -> Result<()> {
    std::fs::write(path, write_lp(lp, binary))?;
    Ok(())
}

/// A parsed LP file and whether it declared binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFile {
    pub lp: LinearProgram,
    pub binary: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Objective,
    Constraints,
    Bounds,
    Binary,
    End,
}

struct Tok<'a> {
    text: &'a str,
    line: usize,
}

pub fn parse_lp(text: &str, path: &str) -> Result<LpFile> {
    let mut offset = 0.0;
    let mut full_len = None;
    let mut mapping: Vec<(String, usize)> = Vec::new();
    let mut fixed = Vec::new();
    let mut section = Section::Header;
    let mut obj_toks: Vec<Tok> = Vec::new();
    let mut con_toks: Vec<Tok> = Vec::new();
    let mut bounds: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut binary_names: Vec<(usize, &str)> = Vec::new();
    let mut saw_binary = false;

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('\\') {
            let c = comment.trim();
            let bad = |what: &str| Error::parse(path, ln, format!("malformed `{what}` comment"));
            if let Some(v) = c.strip_prefix("offset:") {
                offset = v.trim().parse().map_err(|_| bad("offset"))?;
            } else if let Some(v) = c.strip_prefix("full_len:") {
                full_len = Some(v.trim().parse::<usize>().map_err(|_| bad("full_len"))?);
            } else if let Some(v) = c.strip_prefix("column:") {
                let mut it = v.split_whitespace();
                let (Some(name), Some(j), None) = (it.next(), it.next(), it.next()) else {
                    return Err(bad("column"));
                };
                mapping.push((name.to_string(), j.parse().map_err(|_| bad("column"))?));
            } else if let Some(v) = c.strip_prefix("fixed:") {
                let mut it = v.split_whitespace();
                let (Some(j), Some(x), None) = (it.next(), it.next(), it.next()) else {
                    return Err(bad("fixed"));
                };
                fixed.push((
                    j.parse::<usize>().map_err(|_| bad("fixed"))?,
                    x.parse::<f64>().map_err(|_| bad("fixed"))?,
                ));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        let next = match lower.as_str() {
            "minimize" | "minimum" | "min" => Some(Section::Objective),
            "maximize" | "maximum" | "max" => {
                return Err(Error::parse(path, ln, "only minimization is supported"))
            }
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" | "bound" => Some(Section::Bounds),
            "binary" | "binaries" | "bin" => {
                saw_binary = true;
                Some(Section::Binary)
            }
            "general" | "generals" | "gen" => {
                return Err(Error::parse(path, ln, "general integers are not supported"))
            }
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        let toks = line.split_whitespace().map(|t| Tok { text: t, line: ln });
        match section {
            Section::Header => return Err(Error::parse(path, ln, "text before `Minimize`")),
            Section::Objective => obj_toks.extend(toks),
            Section::Constraints => con_toks.extend(toks),
            Section::Bounds => bounds.push((ln, line.split_whitespace().collect())),
            Section::Binary => binary_names.extend(line.split_whitespace().map(|n| (ln, n))),
            Section::End => return Err(Error::parse(path, ln, "text after `End`")),
        }
    }
    if section != Section::End {
        return Err(Error::parse(path, text.lines().count(), "missing `End`"));
    }

    // Columns are declared by the bounds section, in order.
    let mut names: Vec<String> = Vec::new();
    let mut upper = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (ln, b) in &bounds {
        match b.as_slice() {
            [lo, "<=", name, "<=", hi] => {
                if lo.parse::<f64>() != Ok(0.0) {
                    return Err(Error::parse(path, *ln, "lower bounds other than 0 are not supported"));
                }
                let u: f64 = hi
                    .parse()
                    .map_err(|_| Error::parse(path, *ln, format!("bad upper bound `{hi}`")))?;
                if index.insert(name.to_string(), names.len()).is_some() {
                    return Err(Error::parse(path, *ln, format!("`{name}` bounded twice")));
                }
                names.push(name.to_string());
                upper.push(u);
            }
            _ => return Err(Error::parse(path, *ln, "expected `0 <= name <= upper`")),
        }
    }
    for (ln, n) in &binary_names {
        if !index.contains_key(*n) {
            return Err(Error::parse(path, *ln, format!("binary `{n}` has no bounds")));
        }
    }

    let mut objective = vec![0.0; names.len()];
    let obj_rows = parse_rows(&obj_toks, path, &index, false)?;
    match obj_rows.as_slice() {
        [] => {}
        [(_, terms, _)] => {
            for &(j, c) in terms {
                objective[j] += c;
            }
        }
        _ => return Err(Error::parse(path, obj_toks[0].line, "more than one objective")),
    }
    let rows = parse_rows(&con_toks, path, &index, true)?;
    let mut triplets = Vec::new();
    let mut rhs = Vec::new();
    let mut row_names = Vec::new();
    for (i, (name, terms, r)) in rows.into_iter().enumerate() {
        for (j, c) in terms {
            triplets.push((i, j, c));
        }
        rhs.push(r);
        row_names.push(name);
    }
    let matrix = CscMatrix::from_triplets(rhs.len(), names.len(), &triplets);
    let columns: Vec<usize> = if mapping.is_empty() {
        (0..names.len()).collect()
    } else {
        if mapping.len() != names.len() || mapping.iter().zip(&names).any(|((a, _), b)| a != b) {
            return Err(Error::parse(path, 1, "column comments do not match the bounds section"));
        }
        mapping.iter().map(|m| m.1).collect()
    };
    let lp = LinearProgram {
        objective,
        objective_offset: offset,
        matrix,
        rhs,
        upper,
        full_len: full_len.unwrap_or(names.len()),
        columns,
        fixed,
        col_names: names,
        row_names,
    };
    lp.validate()
        .map_err(|e| Error::parse(path, 1, format!("inconsistent program: {e}")))?;
    Ok(LpFile {
        lp,
        binary: saw_binary,
    })
}

type Row = (String, Vec<(usize, f64)>, f64);

/// Parses `name: [+|-] [coef] var ... [= rhs]` sequences.
fn parse_rows(
    toks: &[Tok],
    path: &str,
    index: &std::collections::HashMap<String, usize>,
    equality: bool,
) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let mut k = 0;
    while k < toks.len() {
        let t = &toks[k];
        let name = t
            .text
            .strip_suffix(':')
            .ok_or_else(|| Error::parse(path, t.line, format!("expected `name:`, found `{}`", t.text)))?
            .to_string();
        k += 1;
        let mut terms = Vec::new();
        let mut rhs = None;
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        while k < toks.len() {
            let t = &toks[k];
            if t.text.ends_with(':') {
                break;
            }
            k += 1;
            match t.text {
                "+" => sign = 1.0,
                "-" => sign = -1.0,
                "=" if equality => {
                    let r = toks
                        .get(k)
                        .ok_or_else(|| Error::parse(path, t.line, "missing right-hand side"))?;
                    rhs = Some(
                        r.text
                            .parse::<f64>()
                            .map_err(|_| Error::parse(path, r.line, format!("bad rhs `{}`", r.text)))?,
                    );
                    k += 1;
                    break;
                }
                "<=" | ">=" | "<" | ">" | "=<" | "=>" => {
                    return Err(Error::parse(path, t.line, "only equality rows are supported"))
                }
                s => {
                    if let Ok(v) = s.parse::<f64>() {
                        coef = Some(v);
                    } else {
                        let j = *index.get(s).ok_or_else(|| {
                            Error::parse(path, t.line, format!("unknown variable `{s}`"))
                        })?;
                        terms.push((j, sign * coef.take().unwrap_or(1.0)));
                        sign = 1.0;
                    }
                }
            }
        }
        let rhs = match (equality, rhs) {
            (true, Some(r)) => r,
            (true, None) => {
                return Err(Error::parse(path, toks[k - 1].line, format!("row `{name}` has no `= rhs`")))
            }
            (false, _) => 0.0,
        };
        rows.push((name, terms, rhs));
    }
    Ok(rows)
}

pub fn import_lp_file(path: &Path) -> Result<LpFile> {
    let text = std::fs::read_to_string(path)?;
    parse_lp(&text, &path.display().to_string())
}
