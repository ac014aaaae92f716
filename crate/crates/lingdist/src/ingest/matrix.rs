//! Distance-matrix CSV: header `tag:kind,lang1,...,langn`; row i is
//! `langi,v_i1,...,v_in`. Values carry 9 significant digits; symmetry is
//! checked on read to 1e-9 and the matrix is stored once, triangularly.

use crate::model::{DistanceMatrix, LanguageId, MatrixKind, ModelError};

use super::{lines, parse_language, ParseError};

/// 9 significant digits, infinity spelled `inf`.
fn fmt_sig9(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.8e}")
    }
}

pub fn write_distance_matrix(m: &DistanceMatrix) -> Result<String, ModelError> {
    let forbidden = |s: &str| s.contains(',') || s.contains(':') || s.contains('\n');
    if forbidden(m.metric_tag()) {
        return Err(ModelError::Unserializable(format!(
            "metric tag {:?} contains a reserved character",
            m.metric_tag()
        )));
    }
    for lang in m.index() {
        if forbidden(lang.as_str()) {
            return Err(ModelError::Unserializable(format!(
                "language id {lang} contains a reserved character"
            )));
        }
    }
    let mut out = String::new();
    out.push_str(m.metric_tag());
    out.push(':');
    out.push_str(m.kind().as_str());
    for lang in m.index() {
        out.push(',');
        out.push_str(lang.as_str());
    }
    out.push('\n');
    for i in 0..m.len() {
        out.push_str(m.index()[i].as_str());
        for j in 0..m.len() {
            out.push(',');
            out.push_str(&fmt_sig9(m.get(i, j)));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn read_distance_matrix(input: &str) -> Result<DistanceMatrix, ParseError> {
    let mut rows = lines(input);
    let (header_line, header) = rows.next().ok_or(ParseError::MalformedHeader {
        line: 1,
        detail: "missing header".into(),
    })?;
    let cells: Vec<&str> = header.split(',').collect();
    let (tag, kind_str) = cells[0].rsplit_once(':').ok_or(ParseError::MalformedHeader {
        line: header_line,
        detail: "first header cell must be metric_tag:kind".into(),
    })?;
    let kind = match kind_str {
        "distance" => MatrixKind::Distance,
        "similarity" => MatrixKind::Similarity,
        other => {
            return Err(ParseError::MalformedHeader {
                line: header_line,
                detail: format!("kind must be distance or similarity, found {other:?}"),
            })
        }
    };
    let mut index = Vec::with_capacity(cells.len() - 1);
    for cell in &cells[1..] {
        index.push(parse_language(header_line, cell)?);
    }
    let n = index.len();

    let mut grid: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (line, row) in rows {
        let i = grid.len();
        if i >= n {
            return Err(ParseError::RowCount {
                expected: n,
                found: i + 1,
            });
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != n + 1 {
            return Err(ParseError::MalformedRow {
                line,
                expected: format!("{}", n + 1),
                found: fields.len(),
            });
        }
        if fields[0] != index[i].as_str() {
            return Err(ParseError::RowLabelMismatch {
                line,
                expected: index[i].clone(),
                found: fields[0].to_string(),
            });
        }
        let mut values = Vec::with_capacity(n);
        for raw in &fields[1..] {
            let v: f64 = raw.parse().map_err(|_| ParseError::BadValue {
                line,
                raw: (*raw).to_string(),
            })?;
            if v.is_nan() || v < 0.0 {
                return Err(ParseError::BadValue {
                    line,
                    raw: (*raw).to_string(),
                });
            }
            values.push(v);
        }
        grid.push(values);
    }
    if grid.len() != n {
        return Err(ParseError::RowCount {
            expected: n,
            found: grid.len(),
        });
    }

    for i in 0..n {
        if kind == MatrixKind::Distance && grid[i][i] != 0.0 {
            return Err(ParseError::NonzeroDiagonal {
                lang: index[i].clone(),
                value: grid[i][i],
            });
        }
        for j in (i + 1)..n {
            let (a, b) = (grid[i][j], grid[j][i]);
            if a != b {
                let delta = (a - b).abs();
                if !(delta <= 1e-9) {
                    return Err(ParseError::AsymmetryDetected {
                        x: index[i].clone(),
                        y: index[j].clone(),
                        v_xy: a,
                        v_yx: b,
                        delta,
                    });
                }
            }
        }
    }

    DistanceMatrix::from_rows_unchecked(index, kind, tag.to_string(), &grid)
        .map_err(|e| ParseError::Invalid { line: 1, source: e })
}
