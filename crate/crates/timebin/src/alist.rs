//! Sparse parity-check matrices in alist format.
//!
//! Layout: `n m`, the maximum column and row degrees, the column degrees,
//! the row degrees, then one line per column listing its (1-based) checks
//! and one line per row listing its (1-based) variables. Short lists are
//! padded with zeros.

use std::fmt::Write as _;

use timebin_core::reconcile::LinearCode;

pub fn to_alist(code: &LinearCode) -> String {
    let cols = code.var_checks();
    let rows = code.checks();
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut s = String::new();
    let line = |s: &mut String, items: &mut dyn Iterator<Item = usize>| {
        let parts: Vec<String> = items.map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{}", parts.join(" "));
    };
    line(&mut s, &mut [code.n(), code.m()].into_iter());
    line(&mut s, &mut [max_col, max_row].into_iter());
    line(&mut s, &mut cols.iter().map(Vec::len));
    line(&mut s, &mut rows.iter().map(Vec::len));
    for list in cols {
        line(&mut s, &mut padded(list, max_col));
    }
    for list in rows {
        line(&mut s, &mut padded(list, max_row));
    }
    s
}

fn padded(list: &[u32], width: usize) -> impl Iterator<Item = usize> + '_ {
    list.iter()
        .map(|&x| x as usize + 1)
        .chain(std::iter::repeat(0))
        .take(width)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("alist line {line}: {reason}")]
pub struct AlistError {
    pub line: usize,
    pub reason: String,
}

/// Parses alist text. Row lists are authoritative; column lists must agree
/// with them.
pub fn from_alist(text: &str) -> Result<LinearCode, AlistError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let mut next = |want: Option<usize>| -> Result<(usize, Vec<usize>), AlistError> {
        let (i, l) = lines.next().ok_or(AlistError {
            line: 0,
            reason: "unexpected end of file".into(),
        })?;
        let nums = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| AlistError {
                line: i + 1,
                reason: e.to_string(),
            })?;
        if let Some(w) = want {
            if nums.len() != w {
                return Err(AlistError {
                    line: i + 1,
                    reason: format!("expected {w} numbers, found {}", nums.len()),
                });
            }
        }
        Ok((i + 1, nums))
    };

    let (_, dims) = next(Some(2))?;
    let (n, m) = (dims[0], dims[1]);
    let (_, maxes) = next(Some(2))?;
    let (_, col_deg) = next(Some(n))?;
    let (_, row_deg) = next(Some(m))?;
    let mut cols = Vec::with_capacity(n);
    for &deg in &col_deg {
        let (line, nums) = next(None)?;
        cols.push(entries(line, &nums, deg, maxes[0], m)?);
    }
    let mut rows = Vec::with_capacity(m);
    for &deg in &row_deg {
        let (line, nums) = next(None)?;
        rows.push(entries(line, &nums, deg, maxes[1], n)?);
    }

    let mut from_rows = vec![Vec::new(); n];
    for (c, row) in rows.iter().enumerate() {
        for &v in row {
            from_rows[v as usize].push(c as u32);
        }
    }
    for (v, (mut a, b)) in cols.into_iter().zip(&from_rows).enumerate() {
        a.sort_unstable();
        if &a != b {
            return Err(AlistError {
                line: 5 + v,
                reason: format!("column {} disagrees with the row lists", v + 1),
            });
        }
    }
    LinearCode::new(n, rows).map_err(|e| AlistError {
        line: 0,
        reason: e.to_string(),
    })
}

fn entries(
    line: usize,
    nums: &[usize],
    deg: usize,
    max: usize,
    limit: usize,
) -> Result<Vec<u32>, AlistError> {
    let bad = |reason: String| AlistError { line, reason };
    if nums.len() < deg || nums.len() > max.max(deg) {
        return Err(bad(format!(
            "expected {deg} entries (padded to {max}), found {}",
            nums.len()
        )));
    }
    if nums[deg..].iter().any(|&x| x != 0) {
        return Err(bad("non-zero padding".into()));
    }
    nums[..deg]
        .iter()
        .map(|&x| {
            if x == 0 || x > limit {
                Err(bad(format!("index {x} outside 1..={limit}")))
            } else {
                Ok((x - 1) as u32)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use timebin_core::reconcile::make_regular_ldpc;

    #[test]
    fn round_trip() {
        let code = make_regular_ldpc(60, 3, 6, 5).unwrap();
        let text = to_alist(&code);
        assert!(text.starts_with("60 30\n3 6\n"));
        assert_eq!(from_alist(&text).unwrap(), code);
    }

    #[test]
    fn small_irregular_code() {
        let code = LinearCode::new(4, vec![vec![0, 1, 2], vec![2, 3]]).unwrap();
        let text = to_alist(&code);
        assert_eq!(
            text,
            "4 2\n2 3\n1 1 2 1\n3 2\n1 0\n1 0\n1 2\n2 0\n1 2 3\n3 4 0\n"
        );
        assert_eq!(from_alist(&text).unwrap(), code);
    }

    #[test]
    fn rejects_inconsistent_lists() {
        let bad = "2 1\n1 2\n1 1\n2\n1\n2\n1 1\n";
        assert!(from_alist(bad).is_err());
        assert!(from_alist("2 1\n1 2\n1 1\n").is_err());
        assert!(from_alist("2 1\n1 2\n1 1\n2\n1\n1\n1 3\n").is_err());
    }
}
