//! The shape mini-language:
//!
//! ```text
//! interval:a,b | ball:cx[,cy],r | rect:x0,y0,x1,y1 | slab:L,w
//! mask:<path>  | punctured:<spec>;i[,j];...
//! ```
//!
//! `slab:L,w` is `(-L, L) × (-w, w)`.  Punctured cells are global lattice
//! indices, so their position depends on the spacing.

use std::path::PathBuf;

use fraccap::lattice::{parse_fracmask, LatticeDomain, LatticeSet, Shape};

use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    Shape { shape: Shape, dim: usize },
    Mask(PathBuf),
    Punctured { base: Box<ShapeSpec>, cells: Vec<[i64; 2]> },
}

fn numbers(kind: &str, body: &str) -> Result<Vec<f64>, Error> {
    body.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Shape(format!("{kind}: `{t}` is not a number")))
        })
        .collect()
}

fn arity(kind: &str, v: &[f64], allowed: &[usize]) -> Result<(), Error> {
    if allowed.contains(&v.len()) {
        Ok(())
    } else {
        Err(Error::Shape(format!("{kind} takes {allowed:?} numbers, got {}", v.len())))
    }
}

impl ShapeSpec {
    pub fn parse(spec: &str) -> Result<Self, Error> {
        let (kind, body) =
            spec.split_once(':').ok_or_else(|| Error::Shape(format!("`{spec}` has no `kind:` prefix")))?;
        match kind {
            "interval" => {
                let v = numbers(kind, body)?;
                arity(kind, &v, &[2])?;
                if v[0] >= v[1] {
                    return Err(Error::Shape("interval needs a < b".into()));
                }
                Ok(ShapeSpec::Shape { shape: Shape::Interval { a: v[0], b: v[1] }, dim: 1 })
            }
            "ball" => {
                let v = numbers(kind, body)?;
                arity(kind, &v, &[2, 3])?;
                let r = *v.last().unwrap();
                if r <= 0.0 {
                    return Err(Error::Shape("ball radius must be positive".into()));
                }
                let (center, dim) = if v.len() == 2 { ([v[0], 0.0], 1) } else { ([v[0], v[1]], 2) };
                Ok(ShapeSpec::Shape { shape: Shape::ball(center, r), dim })
            }
            "rect" => {
                let v = numbers(kind, body)?;
                arity(kind, &v, &[4])?;
                if v[0] >= v[2] || v[1] >= v[3] {
                    return Err(Error::Shape("rect needs x0 < x1 and y0 < y1".into()));
                }
                Ok(ShapeSpec::Shape { shape: Shape::Rectangle { lo: [v[0], v[1]], hi: [v[2], v[3]] }, dim: 2 })
            }
            "slab" => {
                let v = numbers(kind, body)?;
                arity(kind, &v, &[2])?;
                if v[0] <= 0.0 || v[1] <= 0.0 {
                    return Err(Error::Shape("slab sizes must be positive".into()));
                }
                Ok(ShapeSpec::Shape { shape: Shape::Slab { half_length: v[0], half_width: v[1] }, dim: 2 })
            }
            "mask" => {
                if body.is_empty() {
                    return Err(Error::Shape("mask needs a path".into()));
                }
                Ok(ShapeSpec::Mask(PathBuf::from(body)))
            }
            "punctured" => {
                let mut parts = body.split(';');
                let base = ShapeSpec::parse(parts.next().unwrap_or_default())?;
                let dim = base.dim()?;
                let mut cells = Vec::new();
                for part in parts {
                    let idx: Result<Vec<i64>, _> = part.split(',').map(|t| t.trim().parse::<i64>()).collect();
                    let idx = idx.map_err(|_| Error::Shape(format!("punctured: bad cell `{part}`")))?;
                    match (dim, idx.as_slice()) {
                        (1, [i]) => cells.push([*i, 0]),
                        (2, [i, j]) => cells.push([*i, *j]),
                        _ => return Err(Error::Shape(format!("punctured: cell `{part}` needs {dim} indices"))),
                    }
                }
                if cells.is_empty() {
                    return Err(Error::Shape("punctured needs at least one cell".into()));
                }
                Ok(ShapeSpec::Punctured { base: Box::new(base), cells })
            }
            _ => Err(Error::Shape(format!("unknown shape kind `{kind}`"))),
        }
    }

    /// Dimension; masks are read to find it.
    pub fn dim(&self) -> Result<usize, Error> {
        match self {
            ShapeSpec::Shape { dim, .. } => Ok(*dim),
            ShapeSpec::Mask(path) => Ok(load_mask(path)?.dim()),
            ShapeSpec::Punctured { base, .. } => base.dim(),
        }
    }

    /// The lattice domain at spacing `h`.  Masks carry their own spacing,
    /// which must agree with `h`.
    pub fn domain(&self, h: f64) -> Result<LatticeDomain, Error> {
        match self {
            ShapeSpec::Shape { shape, dim } => Ok(LatticeDomain::from_shape(shape, *dim, h)?),
            ShapeSpec::Mask(path) => {
                let dom = load_mask(path)?;
                check_spacing(&dom, h)?;
                Ok(dom)
            }
            ShapeSpec::Punctured { base, cells } => {
                let dom = base.domain(h)?;
                let mut set = dom.set().clone();
                remove_cells(&mut set, cells);
                Ok(LatticeDomain::from_set(set)?)
            }
        }
    }

    /// The cells of this shape on `host`'s lattice; `closed` selects cells
    /// touching the closure.
    pub fn select_on(&self, host: &LatticeDomain, closed: bool) -> Result<LatticeSet, Error> {
        match self {
            ShapeSpec::Shape { shape, dim } => {
                if *dim != host.dim() {
                    return Err(Error::Shape(format!(
                        "a {dim}-dimensional shape on a {}-dimensional lattice",
                        host.dim()
                    )));
                }
                Ok(host.select(shape, closed))
            }
            ShapeSpec::Mask(path) => {
                let dom = load_mask(path)?;
                check_spacing(&dom, host.h())?;
                let grid = *host.grid();
                let mut set = LatticeSet::empty(grid);
                for c in dom.active_cells() {
                    let g = dom.grid().global(c);
                    let idx = grid
                        .index_of_global(g)
                        .ok_or_else(|| Error::Shape("mask reaches outside the host lattice".into()))?;
                    set.insert(idx);
                }
                Ok(set)
            }
            ShapeSpec::Punctured { base, cells } => {
                let mut set = base.select_on(host, closed)?;
                remove_cells(&mut set, cells);
                Ok(set)
            }
        }
    }
}

fn remove_cells(set: &mut LatticeSet, cells: &[[i64; 2]]) {
    let grid = *set.grid();
    for &g in cells {
        if let Some(idx) = grid.index_of_global(g) {
            set.remove(idx);
        }
    }
}

fn check_spacing(dom: &LatticeDomain, h: f64) -> Result<(), Error> {
    if (dom.h() - h).abs() > 1e-12 * h {
        return Err(Error::Shape(format!("mask spacing {} differs from h = {h}", dom.h())));
    }
    Ok(())
}

pub fn load_mask(path: &std::path::Path) -> Result<LatticeDomain, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_fracmask(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        assert_eq!(ShapeSpec::parse("interval:0,1").unwrap().dim().unwrap(), 1);
        assert_eq!(ShapeSpec::parse("ball:0,1").unwrap().dim().unwrap(), 1);
        assert_eq!(ShapeSpec::parse("ball:0,0,1").unwrap().dim().unwrap(), 2);
        assert_eq!(ShapeSpec::parse("rect:0,0,1,0.5").unwrap().dim().unwrap(), 2);
        assert_eq!(ShapeSpec::parse("slab:8,1").unwrap().dim().unwrap(), 2);
        let p = ShapeSpec::parse("punctured:rect:0,0,1,0.5;8,4;9,4").unwrap();
        assert!(matches!(p, ShapeSpec::Punctured { ref cells, .. } if cells == &vec![[8, 4], [9, 4]]));
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in [
            "",
            "interval",
            "interval:1,0",
            "ball:0",
            "rect:0,0,1",
            "cube:1",
            "punctured:interval:0,1",
            "punctured:interval:0,1;1,2",
            "interval:0,x",
        ] {
            assert!(ShapeSpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn punctured_interval_loses_one_cell() {
        let spec = ShapeSpec::parse("punctured:interval:0,1;2").unwrap();
        assert_eq!(spec.domain(0.25).unwrap().count(), 3);
    }
}
