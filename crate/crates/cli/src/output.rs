//! File formats and atomic writes.
//!
//! Field CSVs start with `# grid <dim> <nx> [<ny>] <h> <t>` followed by one
//! line per grid row (`y` ascending), values comma separated. PGM frames are
//! binary P5 with maxval 255 and `round(255 · min(ρ, 1))` per cell, top row
//! first.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use congested_crowd_core::transport::TransportPlan;
use congested_crowd_core::Grid;

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Shortest round-trip decimal, switching to exponent form for very large or
/// small magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn field_csv(grid: &Grid, t: f64, values: &[f64]) -> String {
    assert_eq!(values.len(), grid.len());
    let mut s = format!("# grid {} {}", grid.dim(), grid.nx());
    if grid.dim() == 2 {
        let _ = write!(s, " {}", grid.ny());
    }
    let _ = writeln!(s, " {} {}", num(grid.spacing(0)), num(t));
    for row in values.chunks(grid.nx()) {
        let line: Vec<String> = row.iter().map(|v| num(*v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub t: f64,
    pub values: Vec<f64>,
}

pub fn read_field_csv(text: &str) -> Result<FieldFile, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let words: Vec<&str> = header.split_whitespace().collect();
    let bad = || format!("malformed header `{header}`");
    if words.len() < 2 || words[0] != "#" || words[1] != "grid" {
        return Err(bad());
    }
    let nums = &words[2..];
    let dim: usize = nums.first().and_then(|w| w.parse().ok()).ok_or_else(bad)?;
    if nums.len() != dim + 3 || !(1..=2).contains(&dim) {
        return Err(bad());
    }
    let nx: usize = nums[1].parse().map_err(|_| bad())?;
    let ny: usize = if dim == 2 { nums[2].parse().map_err(|_| bad())? } else { 1 };
    let h: f64 = nums[dim + 1].parse().map_err(|_| bad())?;
    let t: f64 = nums[dim + 2].parse().map_err(|_| bad())?;
    let mut values = Vec::with_capacity(nx * ny);
    for (k, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|w| w.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("row {}: {e}", k + 1))?;
        if row.len() != nx {
            return Err(format!("row {} has {} values, expected {nx}", k + 1, row.len()));
        }
        values.extend(row);
    }
    if values.len() != nx * ny {
        return Err(format!("expected {ny} rows, got {}", values.len() / nx.max(1)));
    }
    Ok(FieldFile { dim, nx, ny, h, t, values })
}

pub fn pgm(grid: &Grid, values: &[f64]) -> Vec<u8> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for row in (0..ny).rev() {
        for v in &values[row * nx..(row + 1) * nx] {
            out.push((255.0 * v.clamp(0.0, 1.0)).round() as u8);
        }
    }
    out
}

/// One `i,j,mass` line per nonzero entry, `mass` in absolute units.
pub fn plan_csv(plan: &TransportPlan) -> String {
    let mut s = String::from("i,j,mass\n");
    for &(i, j, m) in plan.entries() {
        let _ = writeln!(s, "{i},{j},{}", num(m));
    }
    s
}

/// Comma-separated table with a header row.
pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -0.1, 1e-300, 123456.789, 2.5e20, 1.0 / 3.0, -7e-5] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x, "{}", num(x));
        }
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1e-10), "1e-10");
    }

    #[test]
    fn field_round_trip_2d() {
        let g = Grid::rect([2.0, 1.0], [4, 2]).unwrap();
        let v: Vec<f64> = (0..8).map(|i| i as f64 / 7.0).collect();
        let text = field_csv(&g, 0.25, &v);
        assert!(text.starts_with("# grid 2 4 2 0.5 0.25\n"));
        let f = read_field_csv(&text).unwrap();
        assert_eq!((f.dim, f.nx, f.ny, f.h, f.t), (2, 4, 2, 0.5, 0.25));
        assert_eq!(f.values, v);
    }

    #[test]
    fn field_header_1d() {
        let g = Grid::line(2.0, 4).unwrap();
        let text = field_csv(&g, 0.0, &[0.0, 0.5, 1.0, 0.25]);
        assert_eq!(text, "# grid 1 4 0.5 0\n0,0.5,1,0.25\n");
        assert!(read_field_csv("# grid 1 4 0.5 0\n0,0.5,1\n").is_err());
        assert!(read_field_csv("# mesh 1 4 0.5 0\n").is_err());
    }

    #[test]
    fn pgm_scales_and_clips() {
        let g = Grid::rect([2.0, 2.0], [2, 2]).unwrap();
        // Top row (largest y) first.
        assert_eq!(pgm(&g, &[0.5, 1.2, 0.0, 1.0]), b"P5\n2 2\n255\n\x00\xff\x80\xff".to_vec());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
