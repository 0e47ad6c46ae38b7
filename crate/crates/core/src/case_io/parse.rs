use super::{CaseError, RawBranch, RawBus, RawCase, RawGen, RawGenCost};

#[derive(Debug)]
struct Matrix {
    name: String,
    rows: Vec<(usize, Vec<f64>)>,
}

enum State {
    Top,
    Matrix { name: String, start: usize },
    Cell,
}

/// Removes a `%` comment, ignoring `%` inside single-quoted strings.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '\'' => in_str = !in_str,
            '%' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_number(tok: &str, line: usize) -> Result<f64, CaseError> {
    match tok {
        "Inf" | "inf" | "+Inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().map_err(|_| CaseError::Parse {
            line,
            message: format!("invalid number `{tok}`"),
        }),
    }
}

/// Parses MATPOWER case text into raw tables.
pub fn parse_case(text: &str) -> Result<RawCase, CaseError> {
    let mut name = None;
    let mut base_mva = None;
    let mut matrices: Vec<Matrix> = Vec::new();
    let mut state = State::Top;
    let mut row: Vec<f64> = Vec::new();
    let mut row_line = 0;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let mut rest = strip_comment(raw_line).trim();
        while !rest.is_empty() {
            match state {
                State::Cell => match rest.find('}') {
                    Some(pos) => {
                        rest = rest[pos + 1..].trim_start_matches(';').trim();
                        state = State::Top;
                    }
                    None => rest = "",
                },
                State::Top => {
                    if let Some(r) = rest.strip_prefix("function") {
                        if let Some((_, n)) = r.split_once('=') {
                            name = Some(n.trim().trim_end_matches(';').to_string());
                        }
                        rest = "";
                        continue;
                    }
                    let Some((lhs, rhs)) = rest.split_once('=') else {
                        return Err(CaseError::Parse {
                            line: lineno,
                            message: format!("unexpected text `{rest}`"),
                        });
                    };
                    let key = lhs.trim();
                    let key = key.strip_prefix("mpc.").unwrap_or(key).to_string();
                    let rhs = rhs.trim();
                    if let Some(body) = rhs.strip_prefix('[') {
                        matrices.push(Matrix {
                            name: key.clone(),
                            rows: Vec::new(),
                        });
                        state = State::Matrix {
                            name: key,
                            start: lineno,
                        };
                        rest = body;
                    } else if let Some(body) = rhs.strip_prefix('{') {
                        state = State::Cell;
                        rest = body;
                    } else {
                        let value = rhs.trim_end_matches(';').trim();
                        if key == "baseMVA" {
                            base_mva = Some(parse_number(value, lineno)?);
                        }
                        rest = "";
                    }
                }
                State::Matrix { .. } => {
                    let end = rest.find([';', ']']);
                    let (chunk, delim) = match end {
                        Some(pos) => (&rest[..pos], Some(rest.as_bytes()[pos])),
                        None => (rest, None),
                    };
                    for tok in chunk.split(|c: char| c.is_whitespace() || c == ',') {
                        if tok.is_empty() {
                            continue;
                        }
                        if row.is_empty() {
                            row_line = lineno;
                        }
                        row.push(parse_number(tok, lineno)?);
                    }
                    let matrix = matrices.last_mut().expect("matrix started");
                    match delim {
                        Some(b';') => {
                            if !row.is_empty() {
                                matrix.rows.push((row_line, std::mem::take(&mut row)));
                            }
                            rest = rest[end.unwrap() + 1..].trim();
                        }
                        Some(_) => {
                            if !row.is_empty() {
                                matrix.rows.push((row_line, std::mem::take(&mut row)));
                            }
                            rest = rest[end.unwrap() + 1..].trim_start_matches(';').trim();
                            state = State::Top;
                        }
                        None => rest = "",
                    }
                }
            }
        }
        // A line break inside brackets also ends a row.
        if let State::Matrix { .. } = state {
            if !row.is_empty() {
                let matrix = matrices.last_mut().expect("matrix started");
                matrix.rows.push((row_line, std::mem::take(&mut row)));
            }
        }
    }
    if let State::Matrix { name, start } = state {
        return Err(CaseError::Parse {
            line: start,
            message: format!("matrix `{name}` is not closed"),
        });
    }

    let base_mva = base_mva.ok_or(CaseError::MissingTable("baseMVA"))?;
    let take = |key: &'static str| -> Result<&Matrix, CaseError> {
        matrices
            .iter()
            .find(|m| m.name == key)
            .ok_or(CaseError::MissingTable(key))
    };
    let bus = take("bus")?;
    let gen = take("gen")?;
    let branch = take("branch")?;
    let gencost = take("gencost")?;
    for m in [bus, gen, branch, gencost] {
        check_rectangular(m)?;
    }

    Ok(RawCase {
        name,
        base_mva,
        bus: rows_of(bus, 13, |line, v| RawBus {
            line,
            id: v[0],
            kind: v[1],
            pd: v[2],
            qd: v[3],
            gs: v[4],
            bs: v[5],
            area: v[6],
            vm: v[7],
            va: v[8],
            base_kv: v[9],
            zone: v[10],
            vmax: v[11],
            vmin: v[12],
            extra: v[13..].to_vec(),
        })?,
        gen: rows_of(gen, 10, |line, v| RawGen {
            line,
            bus: v[0],
            pg: v[1],
            qg: v[2],
            qmax: v[3],
            qmin: v[4],
            vg: v[5],
            mbase: v[6],
            status: v[7],
            pmax: v[8],
            pmin: v[9],
            extra: v[10..].to_vec(),
        })?,
        branch: rows_of(branch, 11, |line, v| RawBranch {
            line,
            from: v[0],
            to: v[1],
            r: v[2],
            x: v[3],
            b: v[4],
            rate_a: v[5],
            rate_b: v[6],
            rate_c: v[7],
            ratio: v[8],
            angle: v[9],
            status: v[10],
            extra: v[11..].to_vec(),
        })?,
        gencost: gencost_rows(gencost)?,
    })
}

fn check_rectangular(m: &Matrix) -> Result<(), CaseError> {
    if let Some((_, first)) = m.rows.first() {
        for (line, r) in &m.rows {
            if r.len() != first.len() {
                return Err(CaseError::Parse {
                    line: *line,
                    message: format!(
                        "row of `{}` has {} columns, expected {}",
                        m.name,
                        r.len(),
                        first.len()
                    ),
                });
            }
        }
    }
    Ok(())
}

fn rows_of<T>(m: &Matrix, min_cols: usize, f: impl Fn(usize, &[f64]) -> T) -> Result<Vec<T>, CaseError> {
    m.rows
        .iter()
        .map(|(line, r)| {
            if r.len() < min_cols {
                Err(CaseError::Parse {
                    line: *line,
                    message: format!("`{}` rows need at least {min_cols} columns, found {}", m.name, r.len()),
                })
            } else {
                Ok(f(*line, r))
            }
        })
        .collect()
}

fn gencost_rows(m: &Matrix) -> Result<Vec<RawGenCost>, CaseError> {
    m.rows
        .iter()
        .map(|(line, r)| {
            let err = |message: String| CaseError::Parse { line: *line, message };
            if r.len() < 4 {
                return Err(err(format!("`gencost` rows need at least 4 columns, found {}", r.len())));
            }
            let n = r[3];
            if n < 0.0 || n.fract() != 0.0 {
                return Err(err(format!("invalid coefficient count {n}")));
            }
            // Piecewise-linear rows store n (x, y) pairs.
            let width = if r[0] == 1.0 { 2 * n as usize } else { n as usize };
            if r.len() < 4 + width {
                return Err(err(format!("`gencost` row declares {width} values but has {}", r.len() - 4)));
            }
            Ok(RawGenCost {
                line: *line,
                model: r[0],
                startup: r[1],
                shutdown: r[2],
                coefficients: r[4..4 + width].to_vec(),
                extra: r[4 + width..].to_vec(),
            })
        })
        .collect()
}
