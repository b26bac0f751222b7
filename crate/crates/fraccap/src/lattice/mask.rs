//! The `FRACMASK v1` text format:
//!
//! ```text
//! FRACMASK v1
//! N h nx [ny]
//! <ny rows of nx characters 0/1>
//! ```
//!
//! One row in one dimension.  In two dimensions the first row is the top
//! (largest `y`).  Mask cell `(0, 0)` sits at the origin.

use alloc::string::String;

use super::LatticeDomain;
use crate::prelude::*;

/// Inactive layers added around a loaded mask.
pub const MASK_PADDING: usize = 2;

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Mask { line, message: message.into() }
}

pub fn parse_fracmask(text: &str) -> Result<LatticeDomain> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    match lines.next() {
        Some((_, "FRACMASK v1")) => {}
        Some((n, _)) => return Err(bad(n, "expected `FRACMASK v1`")),
        None => return Err(bad(1, "empty file")),
    }
    let (n, header) = lines.next().ok_or_else(|| bad(2, "missing header"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let dim: usize = match fields.first().copied() {
        Some("1") => 1,
        Some("2") => 2,
        _ => return Err(bad(n, "dimension must be 1 or 2")),
    };
    if fields.len() != dim + 2 {
        return Err(bad(n, format!("expected {} header fields", dim + 2)));
    }
    let h: f64 = fields[1].parse().map_err(|_| bad(n, "spacing is not a number"))?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(bad(n, "spacing must be positive"));
    }
    let size = |f: &str| -> Result<usize> {
        match f.parse::<usize>() {
            Ok(v) if v > 0 && !f.starts_with('+') => Ok(v),
            _ => Err(bad(n, format!("bad extent `{f}`"))),
        }
    };
    let nx = size(fields[2])?;
    let ny = if dim == 2 { size(fields[3])? } else { 1 };
    let mut rows = Vec::with_capacity(ny);
    for _ in 0..ny {
        let (ln, row) = lines.next().ok_or_else(|| bad(n + rows.len() + 1, "missing row"))?;
        if row.len() != nx {
            return Err(bad(ln, format!("row has {} characters, expected {nx}", row.len())));
        }
        let cells: Result<Vec<bool>> = row
            .bytes()
            .map(|b| match b {
                b'0' => Ok(false),
                b'1' => Ok(true),
                _ => Err(bad(ln, "rows may only contain 0 and 1")),
            })
            .collect();
        rows.push(cells?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(bad(ln, "trailing content"));
    }
    let mut bits = vec![false; nx * ny];
    for (k, row) in rows.iter().enumerate() {
        let j = ny - 1 - k;
        bits[j * nx..(j + 1) * nx].copy_from_slice(row);
    }
    LatticeDomain::from_cell_mask(dim, h, [nx, ny], &bits, MASK_PADDING)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_mask() {
        let dom = parse_fracmask("FRACMASK v1\n1 0.25 6\n011110\n").unwrap();
        assert_eq!(dom.count(), 4);
        assert!(dom.contains_point([0.3, 0.0]));
        assert!(!dom.contains_point([0.1, 0.0]));
    }

    #[test]
    fn first_row_is_the_top() {
        let dom = parse_fracmask("FRACMASK v1\n2 1 4 4\n1111\n1111\n1111\n1110\n").unwrap();
        assert_eq!(dom.count(), 15);
        assert!(!dom.contains_point([3.5, 0.5]));
        assert!(dom.contains_point([3.5, 3.5]));
    }

    #[test]
    fn parsing_is_strict() {
        for text in [
            "",
            "FRACMASK v2\n1 1 3\n111\n",
            "FRACMASK v1\n1 1 3 1\n111\n",
            "FRACMASK v1\n1  1 3\n111\n",
            "FRACMASK v1\n1 -1 3\n111\n",
            "FRACMASK v1\n1 1 3\n11\n",
            "FRACMASK v1\n1 1 3\n1x1\n",
            "FRACMASK v1\n1 1 3\n111\n\n",
            "FRACMASK v1\n2 1 3 3\n111\n111\n",
        ] {
            assert!(matches!(parse_fracmask(text), Err(Error::Mask { .. })), "{text:?}");
        }
    }
}
