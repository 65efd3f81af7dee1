//! CSV files exchanged with the command-line tool.
//!
//! | file            | columns                                  |
//! |-----------------|------------------------------------------|
//! | points          | `x,y` (origin on the first data row)     |
//! | tree            | `child_index,ancestor_index`             |
//! | forest          | `child_index,ancestor_index` (root: itself) |
//! | chi             | `r,chi,chi_tilde`                        |
//! | interface       | `r,theta,defined`                        |
//! | sectors         | `replicate,m,color,phi`                  |
//!
//! Reals are written with 17 significant digits so they read back exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::geometry::Point;
use crate::interfaces::InterfaceTrace;
use crate::montecarlo::ReplicateRecord;
use crate::ppp::PointSet;
use crate::tree::{Forest, Tree};
use crate::{Error, Result};

/// Lossless decimal form of an `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `header` and `rows` (already formatted) to `path`.
pub fn write_rows<I, R>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<str>,
{
    let mut w = create(path)?;
    let go = || -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        for row in rows {
            writeln!(w, "{}", row.as_ref())?;
        }
        w.flush()
    };
    go().map_err(io_err(path))
}

pub fn write_points(path: &Path, ps: &PointSet) -> Result<()> {
    write_rows(
        path,
        "x,y",
        ps.points()
            .iter()
            .map(|p| format!("{},{}", fmt_real(p.x), fmt_real(p.y))),
    )
}

/// Reads a points file. The window radius defaults to the largest norm.
pub fn read_points(path: &Path, window_radius: Option<f64>) -> Result<PointSet> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(io_err(path))?;
    let points = parse_points(path, &text)?;
    let window =
        window_radius.unwrap_or_else(|| points.iter().map(|p| p.norm()).fold(0.0, f64::max));
    PointSet::from_points(points, window)
}

fn parse_points(path: &Path, text: &str) -> Result<Vec<Point>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line: line as u64,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "x,y" => {}
        Some((_, h)) => {
            return Err(parse_err(
                1,
                format!("expected header \"x,y\", found {h:?}"),
            ))
        }
        None => return Err(parse_err(1, "empty file".into())),
    }
    let mut points = Vec::new();
    for (k, line) in lines {
        let line_no = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_err(
                line_no,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line_no, format!("invalid number {s:?}")))
        };
        points.push(Point::new(num(fields[0])?, num(fields[1])?));
    }
    if points.first() != Some(&Point::ORIGIN) {
        return Err(parse_err(2, "the first point must be the origin".into()));
    }
    Ok(points)
}

pub fn write_tree(path: &Path, t: &Tree<'_>) -> Result<()> {
    write_rows(
        path,
        "child_index,ancestor_index",
        t.ancestors()
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{i},{a}")),
    )
}

pub fn write_forest(path: &Path, f: &Forest<'_>) -> Result<()> {
    write_rows(
        path,
        "child_index,ancestor_index",
        f.ancestors()
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{i},{}", a.unwrap_or(i))),
    )
}

/// Reads an ancestor map written by [`write_tree`] and validates it against `ps`.
pub fn read_tree<'p>(path: &Path, ps: &'p PointSet) -> Result<Tree<'p>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_to_error(path, e))?;
    let mut ancestor = vec![usize::MAX; ps.len()];
    for row in rdr.records() {
        let row = row.map_err(|e| csv_to_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |k: usize| -> Result<usize> {
            row.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("field {} is not an index", k + 1),
                })
        };
        let (c, a) = (field(0)?, field(1)?);
        if c >= ps.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("index {c} out of range"),
            });
        }
        ancestor[c] = a;
    }
    Tree::from_ancestors(ps, ancestor)
}

fn csv_to_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

pub fn write_chi(path: &Path, rows: &[(f64, usize, Option<usize>)]) -> Result<()> {
    write_rows(
        path,
        "r,chi,chi_tilde",
        rows.iter().map(|&(r, c, ct)| {
            format!(
                "{},{c},{}",
                fmt_real(r),
                ct.map_or(String::new(), |v| v.to_string())
            )
        }),
    )
}

pub fn write_interface(path: &Path, tr: &InterfaceTrace) -> Result<()> {
    write_rows(
        path,
        "r,theta,defined",
        tr.samples.iter().map(|s| {
            format!(
                "{},{},{}",
                fmt_real(s.r),
                s.theta.map_or(String::new(), fmt_real),
                s.defined()
            )
        }),
    )
}

/// One row per sector of every replicate with at least two sectors.
pub fn write_sectors(path: &Path, records: &[ReplicateRecord]) -> Result<()> {
    write_rows(
        path,
        "replicate,m,color,phi",
        records.iter().flat_map(|rec| {
            rec.sectors.iter().enumerate().map(move |(k, &phi)| {
                format!(
                    "{},{},{},{}",
                    rec.index,
                    rec.m_unbounded,
                    k + 1,
                    fmt_real(phi)
                )
            })
        }),
    )
}

/// One row of a sectors file.
#[derive(Clone, Copy, Debug, PartialEq, serde::Deserialize)]
pub struct SectorRow {
    pub replicate: usize,
    pub m: usize,
    pub color: usize,
    pub phi: f64,
}

pub fn read_sectors(path: &Path) -> Result<Vec<SectorRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_to_error(path, e))?;
    rdr.deserialize()
        .map(|row| row.map_err(|e| csv_to_error(path, e)))
        .collect()
}

/// Raw per-replicate CSVs, one per measurement family, written into `dir`.
///
/// * `replicates.csv`: `replicate,seed,point_count,children_of_o,m_unbounded,lead_interface,degenerate_trace`
/// * `sectors.csv`: `replicate,m,color,phi` (colour is the label rank among surviving colours)
/// * `chi.csv`: `replicate,r,chi,chi_tilde`
/// * `agreement.csv`: `replicate,center_abscissa,agrees`
/// * `spine.csv`: `replicate,r,bifurcations`
/// * `directions.csv`: `replicate,analysis_radius,paths`
pub fn write_records(dir: &Path, records: &[ReplicateRecord]) -> Result<()> {
    write_rows(
        &dir.join("replicates.csv"),
        "replicate,seed,point_count,children_of_o,m_unbounded,lead_interface,degenerate_trace",
        records.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.index,
                r.seed,
                r.point_count,
                r.children_of_o,
                r.m_unbounded,
                r.lead_interface.map_or(String::new(), fmt_real),
                r.degenerate_trace
            )
        }),
    )?;
    write_sectors(&dir.join("sectors.csv"), records)?;
    write_rows(
        &dir.join("chi.csv"),
        "replicate,r,chi,chi_tilde",
        records.iter().flat_map(|rec| {
            rec.chi_grid.iter().map(move |c| {
                format!(
                    "{},{},{},{}",
                    rec.index,
                    fmt_real(c.r),
                    c.chi,
                    c.chi_tilde.map_or(String::new(), |v| v.to_string())
                )
            })
        }),
    )?;
    write_rows(
        &dir.join("agreement.csv"),
        "replicate,center_abscissa,agrees",
        records.iter().flat_map(|rec| {
            rec.agreement_flags
                .iter()
                .map(move |&(c, ok)| format!("{},{},{ok}", rec.index, fmt_real(c)))
        }),
    )?;
    write_rows(
        &dir.join("spine.csv"),
        "replicate,r,bifurcations",
        records.iter().flat_map(|rec| {
            rec.spine_counts
                .iter()
                .map(move |&(r, v)| format!("{},{},{v}", rec.index, fmt_real(r)))
        }),
    )?;
    write_rows(
        &dir.join("directions.csv"),
        "replicate,analysis_radius,paths",
        records.iter().flat_map(|rec| {
            rec.direction_multiplicity
                .iter()
                .map(move |&(a, n)| format!("{},{},{n}", rec.index, fmt_real(a)))
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppp::sample_palm_ppp;
    use crate::tree::build_rst_indexed;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("radial-tree-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn points_round_trip_exactly() {
        let ps = sample_palm_ppp(1.0, 6.0, 3).unwrap();
        let path = tmp("points.csv");
        write_points(&path, &ps).unwrap();
        let back = read_points(&path, Some(6.0)).unwrap();
        assert_eq!(back.points(), ps.points());
        let t = build_rst_indexed(&ps);
        let tp = tmp("tree.csv");
        write_tree(&tp, &t).unwrap();
        assert_eq!(read_tree(&tp, &back).unwrap().ancestors(), t.ancestors());
    }

    #[test]
    fn parse_error_reports_line() {
        let path = tmp("bad.csv");
        std::fs::write(&path, "x,y\n0,0\n1.5,2\n3,oops\n").unwrap();
        match read_points(&path, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&path, "x,y\n1,0\n").unwrap();
        assert!(matches!(read_points(&path, None), Err(Error::Parse { .. })));
    }

    #[test]
    fn sectors_round_trip() {
        let recs = crate::montecarlo::run_monte_carlo(&crate::MonteCarloConfig {
            base_seed: 4,
            ..crate::MonteCarloConfig::for_window(8, 1.0, 15.0)
        })
        .unwrap();
        let path = tmp("sectors.csv");
        write_sectors(&path, &recs).unwrap();
        let rows = read_sectors(&path).unwrap();
        assert_eq!(
            rows.len(),
            recs.iter().map(|r| r.sectors.len()).sum::<usize>()
        );
        for row in &rows {
            assert_eq!(recs[row.replicate].sectors[row.color - 1], row.phi);
        }
        std::fs::write(&path, "replicate,m,color,phi\n0,2,1,x\n").unwrap();
        assert!(matches!(
            read_sectors(&path),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn real_format_is_lossless() {
        for v in [
            0.1,
            -1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            59.999_999_999_999_99,
        ] {
            assert_eq!(fmt_real(v).parse::<f64>().unwrap(), v);
        }
    }
}
