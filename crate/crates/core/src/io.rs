//! Text formats for fields and diagnostic series.
//!
//! Both formats are plain CSV preceded by `#` header lines. The first header
//! line carries a format tag; floats use the shortest representation that
//! reads back to the same value, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::morawetz::DiagnosticsSeries;
use crate::scalar::Real;

pub const FIELD_FORMAT: &str = "hartree-field/1";
pub const TRAJECTORY_FORMAT: &str = "hartree-trajectory/1";

pub const TRAJECTORY_COLUMNS: [&str; 12] = [
    "t",
    "M",
    "E",
    "E0",
    "P",
    "grad_sq",
    "lambda_sq",
    "z",
    "zp",
    "zpp",
    "mass_in_ball_R",
    "exported_mass",
];

/// Shortest round-trip decimal form of `x`.
///
/// Plain notation in `[1e-4, 1e16)`, exponent notation otherwise.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

/// Writes `u` as `r,re(u),im(u)` rows under a header naming `r_max` and `n`.
pub fn write_field<T: Real, W: Write>(mut w: W, u: &RadialField<T>) -> Result<()> {
    let g = u.grid();
    let mut s = String::new();
    let _ = writeln!(s, "# format={FIELD_FORMAT}");
    let _ = writeln!(s, "# r_max={} n={}", fmt_f64(g.r_max().to_f64_lossy()), g.n());
    s.push_str("r,re(u),im(u)\n");
    for (r, z) in g.nodes().iter().zip(u.values()) {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_f64(r.to_f64_lossy()),
            fmt_f64(z.re.to_f64_lossy()),
            fmt_f64(z.im.to_f64_lossy())
        );
    }
    w.write_all(s.as_bytes()).map_err(io_err)
}

/// Parses a field written by [`write_field`]. The grid is rebuilt from the
/// header and every `r` column entry must match its node.
pub fn read_field<T: Real, R: BufRead>(reader: R) -> Result<RadialField<T>> {
    let bad = |m: String| Error::Format(m);
    let mut lines = reader.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((_, Err(e))) => Err(io_err(e)),
            None => Err(Error::Format(format!("missing {what}"))),
        }
    };
    let (_, tag) = next("format line")?;
    if tag.trim() != format!("# format={FIELD_FORMAT}") {
        return Err(bad(format!("unsupported format line {tag:?}")));
    }
    let (_, dims) = next("grid line")?;
    let mut r_max = None;
    let mut n = None;
    for item in dims.trim_start_matches('#').split_whitespace() {
        match item.split_once('=') {
            Some(("r_max", v)) => r_max = v.parse::<f64>().ok(),
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            _ => return Err(bad(format!("unexpected header item {item:?}"))),
        }
    }
    let (Some(r_max), Some(n)) = (r_max, n) else {
        return Err(bad("header must give r_max and n".into()));
    };
    let grid = RadialGrid::new(T::cst(r_max), n)?;
    let (_, cols) = next("column line")?;
    if cols.trim() != "r,re(u),im(u)" {
        return Err(bad(format!("unexpected columns {cols:?}")));
    }
    let mut values = Vec::with_capacity(n);
    for (line_no, line) in lines.map(|(i, l)| (i + 1, l)) {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("line {line_no}: {e}")))?;
        if nums.len() != 3 {
            return Err(bad(format!("line {line_no}: expected 3 columns, found {}", nums.len())));
        }
        let k = values.len();
        if k >= n {
            return Err(bad(format!("line {line_no}: more than n = {n} rows")));
        }
        let node = grid.nodes()[k].to_f64_lossy();
        if (nums[0] - node).abs() > 1e-12 * r_max {
            return Err(bad(format!("line {line_no}: r = {} is not node {k} ({node})", nums[0])));
        }
        values.push(Complex::new(T::cst(nums[1]), T::cst(nums[2])));
    }
    if values.len() != n {
        return Err(bad(format!("expected {n} rows, found {}", values.len())));
    }
    RadialField::new(&grid, values)
}

pub fn save_field<T: Real>(path: &Path, u: &RadialField<T>) -> Result<()> {
    let f = std::fs::File::create(path).map_err(io_err)?;
    write_field(std::io::BufWriter::new(f), u)
}

pub fn load_field<T: Real>(path: &Path) -> Result<RadialField<T>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    read_field(std::io::BufReader::new(f))
}

/// Writes the series as CSV with [`TRAJECTORY_COLUMNS`]. `mass_in_ball_R` is the
/// series for `radius`, which must be one of the sampled radii. Each entry of
/// `provenance` becomes a `#` line after the format tag.
pub fn write_trajectory<W: Write>(mut w: W, series: &DiagnosticsSeries, radius: f64, provenance: &[String]) -> Result<()> {
    let k = series
        .radius_index(radius)
        .ok_or_else(|| Error::InvalidArgument(format!("radius {radius} was not sampled")))?;
    let mut s = String::new();
    let _ = writeln!(s, "# format={TRAJECTORY_FORMAT}");
    let _ = writeln!(s, "# R={}", fmt_f64(radius));
    for line in provenance {
        for part in line.lines() {
            let _ = writeln!(s, "# {part}");
        }
    }
    s.push_str(&TRAJECTORY_COLUMNS.join(","));
    s.push('\n');
    for i in 0..series.len() {
        let row = [
            series.t[i],
            series.mass[i],
            series.energy[i],
            series.energy_free[i],
            series.p_energy[i],
            series.grad_sq[i],
            series.lambda_sq[i],
            series.z[i],
            series.zp[i],
            series.zpp[i],
            series.mass_in_ball[k][i],
            series.exported_mass[i],
        ];
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    w.write_all(s.as_bytes()).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_roundtrip_is_bitwise() {
        let g = RadialGrid::<f64>::new(7.5, 64).unwrap();
        let u = RadialField::from_complex_fn(&g, |r| Complex::new((-r * r).exp() / 3.0, (r * 0.7).sin() * 1e-9));
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let back: RadialField<f64> = read_field(buf.as_slice()).unwrap();
        assert!(back.grid().same_as(&g));
        for (a, b) in u.values().iter().zip(back.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let mut again = Vec::new();
        write_field(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn field_header_is_checked() {
        let text = "# format=hartree-field/9\n# r_max=1 n=1\nr,re(u),im(u)\n0.5,1,0\n";
        assert!(matches!(read_field::<f64, _>(text.as_bytes()), Err(Error::Format(_))));
        let head = "# format=hartree-field/1\n# r_max=5 n=4\nr,re(u),im(u)\n";
        let short = format!("{head}1,1,0\n2,1,0\n3,1,0\n");
        assert!(read_field::<f64, _>(short.as_bytes()).is_err());
        let off_node = format!("{head}1,1,0\n2.5,1,0\n3,1,0\n4,1,0\n");
        assert!(read_field::<f64, _>(off_node.as_bytes()).is_err());
        let ok = format!("{head}1,1,0\n2,0.5,-1\n3,1,0\n4,1,0\n");
        let u = read_field::<f64, _>(ok.as_bytes()).unwrap();
        assert_eq!(u.values()[1], Complex::new(0.5, -1.0));
    }

    #[test]
    fn formatting_switches_notation() {
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(1.5), "1.5");
        assert_eq!(fmt_f64(1e-20), "1e-20");
        assert_eq!(fmt_f64(-2.5e20), "-2.5e20");
        assert_eq!(fmt_f64(0.1 + 0.2), "0.30000000000000004");
    }

    proptest! {
        #[test]
        fn fmt_roundtrips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_f64(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
