//! PrefLib-style weak orders with ties: `count: alt,{alt,alt},alt`.
//!
//! Alternatives are 1-based in the file and 0-based in the result. Lines
//! starting with `#` are metadata; `# NUMBER ALTERNATIVES: m` fixes the
//! number of alternatives, otherwise the largest one mentioned is used.
//! Alternatives an agent does not rank are appended as one final class.

use crate::error::IoError;
use crate::io::instance_file::{cursor, parse_classes};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreflibProfile {
    pub m: usize,
    /// One entry per agent after expanding multiplicities.
    pub orders: Vec<Vec<Vec<usize>>>,
}

pub fn parse_preflib(text: &str, m: Option<usize>) -> Result<PreflibProfile, IoError> {
    let mut declared = m;
    let mut rows: Vec<(usize, usize, Vec<Vec<usize>>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(meta) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = meta.split_once(':') {
                if key.trim().eq_ignore_ascii_case("NUMBER ALTERNATIVES") && m.is_none() {
                    let v = value
                        .trim()
                        .parse()
                        .map_err(|_| IoError::parse(line_no, 1, "bad NUMBER ALTERNATIVES value"))?;
                    declared = Some(v);
                }
            }
            continue;
        }
        let (count_text, order_text) = raw
            .split_once(':')
            .ok_or_else(|| IoError::parse(line_no, 1, "expected `count: order`"))?;
        let count: usize = count_text.trim().parse().map_err(|_| {
            IoError::parse(line_no, 1, format!("bad count `{}`", count_text.trim()))
        })?;
        let offset = count_text.len() + 1;
        let mut c = cursor(line_no, order_text);
        let classes = parse_classes(&mut c, 1).map_err(|e| match e {
            IoError::Parse {
                line,
                column,
                message,
            } => IoError::Parse {
                line,
                column: column + offset,
                message,
            },
            other => other,
        })?;
        let mut seen = std::collections::BTreeSet::new();
        for &a in classes.iter().flatten() {
            if !seen.insert(a) {
                return Err(IoError::parse(
                    line_no,
                    1,
                    format!("alternative {} ranked twice", a + 1),
                ));
            }
        }
        rows.push((line_no, count, classes));
    }

    let m = declared.unwrap_or_else(|| {
        rows.iter()
            .flat_map(|r| r.2.iter().flatten())
            .map(|a| a + 1)
            .max()
            .unwrap_or(0)
    });
    let mut orders = Vec::new();
    for (line, count, mut classes) in rows {
        if let Some(&bad) = classes.iter().flatten().find(|&&a| a >= m) {
            return Err(IoError::UnknownAlternative {
                line,
                alternative: (bad + 1).to_string(),
            });
        }
        let mut ranked = vec![false; m];
        classes.iter().flatten().for_each(|&a| ranked[a] = true);
        let rest: Vec<usize> = (0..m).filter(|&a| !ranked[a]).collect();
        if !rest.is_empty() {
            classes.push(rest);
        }
        orders.extend(std::iter::repeat_n(classes, count));
    }
    Ok(PreflibProfile { m, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicity_and_ties() {
        let p = parse_preflib("3: 1,{2,3},4\n", Some(4)).unwrap();
        assert_eq!(p.orders.len(), 3);
        assert!(p
            .orders
            .iter()
            .all(|o| o == &vec![vec![0], vec![1, 2], vec![3]]));
    }

    #[test]
    fn unranked_become_last_class() {
        let p = parse_preflib("# NUMBER ALTERNATIVES: 3\n1: 1\n", None).unwrap();
        assert_eq!(p.orders, vec![vec![vec![0], vec![1, 2]]]);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(
            parse_preflib("1: 1,{2,3\n", Some(3)),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            parse_preflib("1: 1,}2\n", Some(3)),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            parse_preflib("1 1,2\n", Some(3)),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            parse_preflib("1: 1,1\n", Some(3)),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            parse_preflib("1: 1,5\n", Some(3)),
            Err(IoError::UnknownAlternative { line: 1, ref alternative }) if alternative == "5"
        ));
        assert!(matches!(
            parse_preflib("1: 0\n", Some(3)),
            Err(IoError::Parse { .. })
        ));
    }
}
