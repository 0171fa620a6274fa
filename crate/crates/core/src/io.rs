//! Plain-text formats read and written by the command-line tool.
//!
//! Every file starts with a `# format=1` comment line. Lines starting with `#`
//! and blank lines are ignored on input. Floating-point values are written with
//! 17 significant digits so they read back exactly.

use std::fmt::Write as _;

use crate::analytic::ComparisonRow;
use crate::error::{Result, SwdftError};
use crate::estimation::EstimateResult;
use crate::signals::{CompositeSpec, LocalSignalSpec};
use crate::transform::{view_scalar, CoefView, ComplexCoef, RealSignal, SwdftGrid};

pub const FORMAT_LINE: &str = "# format=1";

/// Formats `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(line: usize, field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| SwdftError::Parse {
        line,
        msg: format!("not a number: '{field}'"),
    })
}

fn parse_usize(line: usize, field: &str) -> Result<usize> {
    field.trim().parse().map_err(|_| SwdftError::Parse {
        line,
        msg: format!("not a non-negative integer: '{field}'"),
    })
}

/// One sample per line, with an optional `x` header.
pub fn parse_signal_csv(text: &str) -> Result<RealSignal> {
    let mut values = Vec::new();
    for (i, (line, l)) in data_lines(text).enumerate() {
        if i == 0 && l.eq_ignore_ascii_case("x") {
            continue;
        }
        values.push(parse_f64(line, l)?);
    }
    RealSignal::new(values)
}

pub fn signal_csv(x: &RealSignal) -> String {
    let mut s = format!("{FORMAT_LINE}\nx\n");
    for v in x.samples() {
        let _ = writeln!(s, "{}", fmt_f64(*v));
    }
    s
}

/// Column selection for grid output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridColumns {
    /// `re,im,mod2,phase`
    #[default]
    All,
    /// A single view; `Complex` writes `re,im`.
    View(CoefView),
}

impl GridColumns {
    fn names(self) -> &'static [&'static str] {
        match self {
            GridColumns::All => &["re", "im", "mod2", "phase"],
            GridColumns::View(CoefView::Complex) => &["re", "im"],
            GridColumns::View(CoefView::RealPart) => &["re"],
            GridColumns::View(CoefView::ImagPart) => &["im"],
            GridColumns::View(CoefView::SquaredModulus) => &["mod2"],
            GridColumns::View(CoefView::Phase) => &["phase"],
        }
    }
}

fn column_value(c: ComplexCoef, name: &str) -> f64 {
    let kind = match name {
        "re" => CoefView::RealPart,
        "im" => CoefView::ImagPart,
        "mod2" => CoefView::SquaredModulus,
        _ => CoefView::Phase,
    };
    view_scalar(c, kind).expect("scalar view")
}

/// Long format: one `(k, p)` per line, ordered by `k` then `p`. `p` is the
/// absolute sample index of the window's right edge.
pub fn grid_csv(g: &SwdftGrid, columns: GridColumns) -> String {
    let names = columns.names();
    let mut s = format!("{FORMAT_LINE}\nk,p,{}\n", names.join(","));
    for (k, p, c) in g.iter() {
        let _ = write!(s, "{k},{p}");
        for name in names {
            let _ = write!(s, ",{}", fmt_f64(column_value(c, name)));
        }
        s.push('\n');
    }
    s
}

/// A parsed long-format grid: rows of `(k, p, values...)` plus column names.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub columns: Vec<String>,
    pub rows: Vec<(usize, usize, Vec<f64>)>,
}

impl GridTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn parse_grid_csv(text: &str) -> Result<GridTable> {
    let mut lines = data_lines(text);
    let (hline, header) = lines.next().ok_or(SwdftError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let names: Vec<&str> = header.split(',').collect();
    if names.len() < 3 || names[0] != "k" || names[1] != "p" {
        return Err(SwdftError::Parse {
            line: hline,
            msg: format!("unexpected header '{header}'"),
        });
    }
    let columns: Vec<String> = names[2..].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (line, l) in lines {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != names.len() {
            return Err(SwdftError::Parse {
                line,
                msg: format!("expected {} fields", names.len()),
            });
        }
        let vals = f[2..].iter().map(|v| parse_f64(line, v)).collect::<Result<Vec<_>>>()?;
        rows.push((parse_usize(line, f[0])?, parse_usize(line, f[1])?, vals));
    }
    Ok(GridTable { columns, rows })
}

/// Composite signal file:
///
/// ```text
/// # format=1
/// N=64
/// sigma=0.5
/// seed=7
/// S,L,A,F,phi
/// 17,31,1,8,1
/// ```
pub fn parse_composite_spec(text: &str) -> Result<CompositeSpec> {
    let (mut len, mut sigma, mut seed) = (None, 0.0, 0u64);
    let mut components = Vec::new();
    let mut in_table = false;
    for (line, l) in data_lines(text) {
        if !in_table {
            if let Some((key, value)) = l.split_once('=') {
                match key.trim() {
                    "N" => len = Some(parse_usize(line, value)?),
                    "sigma" => sigma = parse_f64(line, value)?,
                    "seed" => {
                        seed = value.trim().parse().map_err(|_| SwdftError::Parse {
                            line,
                            msg: format!("bad seed '{value}'"),
                        })?
                    }
                    other => {
                        return Err(SwdftError::Parse {
                            line,
                            msg: format!("unknown key '{other}'"),
                        })
                    }
                }
                continue;
            }
            let header: Vec<&str> = l.split(',').map(str::trim).collect();
            if header != ["S", "L", "A", "F", "phi"] {
                return Err(SwdftError::Parse {
                    line,
                    msg: "expected header S,L,A,F,phi".into(),
                });
            }
            in_table = true;
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 5 {
            return Err(SwdftError::Parse {
                line,
                msg: "expected 5 fields S,L,A,F,phi".into(),
            });
        }
        components.push(LocalSignalSpec::new(
            parse_usize(line, f[0])?,
            parse_usize(line, f[1])?,
            parse_f64(line, f[2])?,
            parse_f64(line, f[3])?,
            parse_f64(line, f[4])?,
        )?);
    }
    let len = len.ok_or(SwdftError::InvalidSpec("missing N=".into()))?;
    let spec = CompositeSpec {
        components,
        len,
        sigma,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn composite_spec_text(spec: &CompositeSpec) -> String {
    let mut s = format!(
        "{FORMAT_LINE}\nN={}\nsigma={}\nseed={}\nS,L,A,F,phi\n",
        spec.len, spec.sigma, spec.seed
    );
    for c in &spec.components {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            c.start(),
            c.length(),
            c.amplitude(),
            c.frequency(),
            c.phase()
        );
    }
    s
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut s = format!("{FORMAT_LINE}\nk,p,state,q,re_closed,im_closed,re_direct,im_direct,absdiff\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            r.p,
            r.state,
            r.q,
            fmt_f64(r.closed.re),
            fmt_f64(r.closed.im),
            fmt_f64(r.direct.re),
            fmt_f64(r.direct.im),
            fmt_f64(r.abs_diff())
        );
    }
    s
}

/// Phase unit for estimate output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseUnit {
    #[default]
    Radians,
    Cycles,
}

/// `kstar,S,L,A,F,f,phi,mseA,mseB,mseC` plus a `degenerate` flag.
pub fn estimate_csv(e: &EstimateResult, unit: PhaseUnit) -> String {
    let phi = match unit {
        PhaseUnit::Radians => e.phase,
        PhaseUnit::Cycles => e.phase_cycles(),
    };
    format!(
        "{FORMAT_LINE}\nkstar,S,L,A,F,f,phi,mseA,mseB,mseC,degenerate\n{},{},{},{},{},{},{},{},{},{},{}\n",
        e.k_star,
        e.start,
        e.length,
        fmt_f64(e.amplitude),
        fmt_f64(e.frequency),
        fmt_f64(e.cycles_per_window),
        fmt_f64(phi),
        fmt_f64(e.mse_a),
        fmt_f64(e.mse_b),
        fmt_f64(e.mse_c),
        e.degenerate
    )
}

/// `x,D` pairs.
pub fn xy_csv(names: (&str, &str), points: &[(f64, f64)]) -> String {
    let mut s = format!("{FORMAT_LINE}\n{},{}\n", names.0, names.1);
    for (x, y) in points {
        let _ = writeln!(s, "{},{}", fmt_f64(*x), fmt_f64(*y));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::swdft_direct;

    #[test]
    fn signal_round_trip_is_exact() {
        let x = RealSignal::new(vec![0.1, -1.0 / 3.0, 1e-300, 12345.678]).unwrap();
        assert_eq!(parse_signal_csv(&signal_csv(&x)).unwrap(), x);
    }

    #[test]
    fn signal_without_header() {
        let x = parse_signal_csv("1\n2.5\n\n# note\n-3\n").unwrap();
        assert_eq!(x.samples(), &[1.0, 2.5, -3.0]);
    }

    #[test]
    fn signal_errors() {
        assert!(matches!(
            parse_signal_csv("x\n1\nfoo\n"),
            Err(SwdftError::Parse { line: 3, .. })
        ));
        assert!(parse_signal_csv("x\n").is_err());
    }

    #[test]
    fn grid_round_trip() {
        let x = RealSignal::new((0..12).map(|t| (t as f64 * 0.7).sin()).collect()).unwrap();
        let g = swdft_direct(&x, 4).unwrap();
        let t = parse_grid_csv(&grid_csv(&g, GridColumns::All)).unwrap();
        assert_eq!(t.columns, ["re", "im", "mod2", "phase"]);
        assert_eq!(t.rows.len(), 4 * 9);
        for ((k, p, v), (k2, p2, c)) in t.rows.iter().zip(g.iter()) {
            assert_eq!((*k, *p), (k2, p2));
            assert_eq!(v[0], c.re);
            assert_eq!(v[1], c.im);
        }
        let t = parse_grid_csv(&grid_csv(&g, GridColumns::View(CoefView::SquaredModulus))).unwrap();
        assert_eq!(t.columns, ["mod2"]);
    }

    #[test]
    fn spec_round_trip() {
        let text = "# format=1\nN=64\nsigma=0.5\nseed=7\nS,L,A,F,phi\n17,31,1,8,1\n0,10,2,3.5,0\n";
        let spec = parse_composite_spec(text).unwrap();
        assert_eq!(spec.len, 64);
        assert_eq!(spec.components.len(), 2);
        assert_eq!(parse_composite_spec(&composite_spec_text(&spec)).unwrap(), spec);
    }

    #[test]
    fn spec_errors() {
        assert!(parse_composite_spec("S,L,A,F,phi\n1,2,1,1,0\n").is_err());
        assert!(parse_composite_spec("N=10\nS,L,A,F,phi\n5,10,1,1,0\n").is_err());
        assert!(parse_composite_spec("N=10\nfoo=1\n").is_err());
        assert!(parse_composite_spec("N=10\nS,L,A,F,phi\n1,2,1\n").is_err());
    }

    #[test]
    fn float_format_has_17_digits() {
        let s = fmt_f64(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }
}
