//! Reader and writer for the EUC_2D subset of TSPLIB.
//!
//! Distances are exact Euclidean values. TSPLIB's canonical `nint` rounding
//! is not applied, so published optimal lengths for rounded instances will
//! differ slightly.

use std::fmt::Write as _;

use super::{build_distance_matrix, TspInstance};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_tsplib(text: &str) -> Result<TspInstance> {
    let mut dimension: Option<(usize, usize)> = None;
    let mut weight_type: Option<String> = None;
    let mut in_coords = false;
    let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut count = 0usize;
    let mut last_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(line_no, format!("expected `id x y`, got `{line}`")));
            }
            let id: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad node id `{}`", fields[0])))?;
            let x: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad x `{}`", fields[1])))?;
            let y: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad y `{}`", fields[2])))?;
            let n = coords.len();
            if id == 0 || id > n {
                return Err(parse_err(line_no, format!("node id {id} outside 1..={n}")));
            }
            if coords[id - 1].replace((x, y)).is_some() {
                return Err(parse_err(line_no, format!("duplicate node id {id}")));
            }
            count += 1;
            continue;
        }
        if line == "NODE_COORD_SECTION" {
            let Some((n, _)) = dimension else {
                return Err(parse_err(line_no, "NODE_COORD_SECTION before DIMENSION"));
            };
            match weight_type.as_deref() {
                Some("EUC_2D") => {}
                Some(other) => {
                    return Err(Error::UnsupportedFormat(format!("EDGE_WEIGHT_TYPE {other}")))
                }
                None => return Err(parse_err(line_no, "missing EDGE_WEIGHT_TYPE")),
            }
            coords = vec![None; n];
            in_coords = true;
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(parse_err(line_no, format!("unrecognized line `{line}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "DIMENSION" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad DIMENSION `{value}`")))?;
                dimension = Some((n, line_no));
            }
            "EDGE_WEIGHT_TYPE" => {
                if value != "EUC_2D" {
                    return Err(Error::UnsupportedFormat(format!("EDGE_WEIGHT_TYPE {value}")));
                }
                weight_type = Some(value.to_string());
            }
            "TYPE" if value != "TSP" => {
                return Err(Error::UnsupportedFormat(format!("TYPE {value}")));
            }
            _ => {}
        }
    }

    let Some((n, dim_line)) = dimension else {
        return Err(parse_err(last_line, "missing DIMENSION"));
    };
    if !in_coords {
        return Err(parse_err(last_line, "missing NODE_COORD_SECTION"));
    }
    if count != n {
        return Err(parse_err(
            last_line,
            format!("DIMENSION {n} (line {dim_line}) but {count} coordinates"),
        ));
    }
    let pts: Vec<(f64, f64)> = coords.into_iter().map(|c| c.expect("counted")).collect();
    build_distance_matrix(&pts).map_err(|e| parse_err(dim_line, e.to_string()))
}

/// Writes an instance with coordinates as a TSPLIB EUC_2D document.
pub fn write_tsplib(instance: &TspInstance, name: &str) -> Result<String> {
    let coords = instance
        .coords()
        .ok_or_else(|| Error::UnsupportedFormat("instance has no coordinates".into()))?;
    let mut out = String::new();
    let _ = writeln!(out, "NAME : {name}");
    let _ = writeln!(out, "TYPE : TSP");
    let _ = writeln!(out, "DIMENSION : {}", instance.n());
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE : EUC_2D");
    let _ = writeln!(out, "NODE_COORD_SECTION");
    for (i, (x, y)) in coords.iter().enumerate() {
        let _ = writeln!(out, "{} {x} {y}", i + 1);
    }
    out.push_str("EOF\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: &str = "NAME : tri\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 0\n3 0 4\nEOF\n";

    #[test]
    fn minimal_document() {
        let t = parse_tsplib(TRI).unwrap();
        assert_eq!(t.n(), 3);
        assert_eq!(t.dist(1, 2), 5.0);
    }

    #[test]
    fn no_space_before_colon() {
        let t = parse_tsplib(&TRI.replace(" : ", ": ")).unwrap();
        assert_eq!(t.n(), 3);
    }

    #[test]
    fn dimension_mismatch() {
        let doc = TRI.replace("DIMENSION : 3", "DIMENSION : 4");
        assert!(matches!(parse_tsplib(&doc), Err(Error::Parse { .. })));
    }

    #[test]
    fn explicit_is_unsupported() {
        let doc = TRI.replace("EUC_2D", "EXPLICIT");
        assert!(matches!(parse_tsplib(&doc), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn bad_coordinate_reports_line() {
        let doc = TRI.replace("2 3 0", "2 x 0");
        match parse_tsplib(&doc) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_out_of_range_ids() {
        assert!(parse_tsplib(&TRI.replace("3 0 4", "2 0 4")).is_err());
        assert!(parse_tsplib(&TRI.replace("3 0 4", "4 0 4")).is_err());
    }

    #[test]
    fn write_then_parse() {
        let t = TspInstance::random_euclidean(12, 7).unwrap();
        let doc = write_tsplib(&t, "r12").unwrap();
        assert_eq!(parse_tsplib(&doc).unwrap(), t);
    }
}
