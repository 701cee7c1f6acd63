//! File formats: CSV for trajectories, anchor sets, range logs, transforms,
//! and experiment outputs; PGM heightmaps for grids.
//!
//! Data files that round-trip (trajectories, anchor sets, logs) are written
//! with Rust's shortest-roundtrip float formatting, so `parse(emit(x)) == x`
//! exactly. Report files (stats, sweep, rgap, restored, printed scores) use
//! fixed 6-decimal formatting instead.

use crate::experiments::{MethodStats, RestoredPoint, RgapStudy, SweepPoint};
use crate::field::{FieldLog, GeoTransform, ReplayOutcome};
use crate::{HarnessError, Result};
use anchorlab_core::gdop::{LvtGrid, OsapMap};
use anchorlab_core::geometry::{Anchor, AnchorSet, Point2D, Trajectory};
use anchorlab_core::localizers::Method;
use anchorlab_core::noise::NoiseKind;
use std::io::Write;

fn parse_f64(line: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| HarnessError::parse(line, format!("bad number '{}'", field.trim())))
}

// ---------------------------------------------------------------------------
// Trajectories: header `x,y`, one point per line.
// ---------------------------------------------------------------------------

pub fn write_trajectory_csv<W: Write>(mut w: W, t: &Trajectory) -> Result<()> {
    writeln!(w, "x,y")?;
    for p in t.points() {
        writeln!(w, "{},{}", p.x, p.y)?;
    }
    Ok(())
}

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("x,y")) {
            continue;
        }
        let mut it = line.split(',');
        let (x, y) = match (it.next(), it.next(), it.next()) {
            (Some(x), Some(y), None) => (parse_f64(i + 1, x)?, parse_f64(i + 1, y)?),
            _ => return Err(HarnessError::parse(i + 1, "expected 'x,y'")),
        };
        points.push(Point2D::new(x, y));
    }
    Trajectory::new(points).map_err(HarnessError::Core)
}

// ---------------------------------------------------------------------------
// Anchor sets: header `id,x,y`. With a transform, coordinates are read as
// `id,lon,lat` and mapped to local meters.
// ---------------------------------------------------------------------------

pub fn write_anchors_csv<W: Write>(mut w: W, set: &AnchorSet) -> Result<()> {
    writeln!(w, "id,x,y")?;
    for a in set.anchors() {
        writeln!(w, "{},{},{}", a.id, a.position.x, a.position.y)?;
    }
    Ok(())
}

pub fn parse_anchors_csv(text: &str, geo: Option<&GeoTransform>) -> Result<AnchorSet> {
    let mut anchors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("id,") {
                continue;
            }
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(HarnessError::parse(i + 1, "expected 'id,x,y'"));
        }
        let id: u32 = fields[0]
            .trim()
            .parse()
            .map_err(|_| HarnessError::parse(i + 1, format!("bad anchor id '{}'", fields[0])))?;
        let a = parse_f64(i + 1, fields[1])?;
        let b = parse_f64(i + 1, fields[2])?;
        let position = match geo {
            Some(t) => crate::field::geo_to_local(t, a, b),
            None => Point2D::new(a, b),
        };
        anchors.push(Anchor::new(id, position));
    }
    AnchorSet::new(anchors).map_err(HarnessError::Core)
}

// ---------------------------------------------------------------------------
// Range logs: header `epoch,d1,...,dm[,x_true,y_true]`. The epoch column
// doubles as a timestamp in seconds for field logs.
// ---------------------------------------------------------------------------

pub fn write_log_csv<W: Write>(mut w: W, log: &FieldLog) -> Result<()> {
    let m = log.anchor_count();
    let with_truth = log.records().iter().all(|r| r.truth.is_some());
    write!(w, "epoch")?;
    for k in 1..=m {
        write!(w, ",d{k}")?;
    }
    if with_truth {
        write!(w, ",x_true,y_true")?;
    }
    writeln!(w)?;
    for r in log.records() {
        write!(w, "{}", r.time)?;
        for d in &r.distances {
            write!(w, ",{d}")?;
        }
        if with_truth {
            let t = r.truth.unwrap();
            write!(w, ",{},{}", t.x, t.y)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Parses a range log. The distance column count comes from the header when
/// present (columns named `d<k>`), otherwise from the first data row, where
/// trailing `x_true,y_true` columns are recognized by an explicit header
/// only. Malformed rows are skipped and counted, not fatal.
pub fn parse_log_csv(text: &str, gap_threshold: f64) -> Result<FieldLog> {
    let mut rows: Vec<(f64, Vec<f64>, Option<Point2D>)> = Vec::new();
    let mut skipped = 0usize;
    let mut layout: Option<(usize, bool)> = None; // (m, has_truth)

    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if i == 0 && line.to_ascii_lowercase().starts_with("epoch") {
            let m = fields.iter().filter(|f| {
                let f = f.trim().to_ascii_lowercase();
                f.starts_with('d') && f[1..].chars().all(|c| c.is_ascii_digit()) && f.len() > 1
            });
            let m = m.count();
            let has_truth = fields
                .iter()
                .any(|f| f.trim().eq_ignore_ascii_case("x_true"));
            if m >= 2 {
                layout = Some((m, has_truth));
            }
            continue;
        }
        let (m, has_truth) = *layout.get_or_insert_with(|| (fields.len() - 1, false));
        let expected = 1 + m + if has_truth { 2 } else { 0 };
        if fields.len() != expected {
            skipped += 1;
            continue;
        }
        let parse_all = || -> Option<(f64, Vec<f64>, Option<Point2D>)> {
            let time = fields[0].trim().parse::<f64>().ok()?;
            let mut distances = Vec::with_capacity(m);
            for f in &fields[1..=m] {
                distances.push(f.trim().parse::<f64>().ok()?);
            }
            let truth = if has_truth {
                let x = fields[m + 1].trim().parse::<f64>().ok()?;
                let y = fields[m + 2].trim().parse::<f64>().ok()?;
                Some(Point2D::new(x, y))
            } else {
                None
            };
            Some((time, distances, truth))
        };
        match parse_all() {
            Some(row) => rows.push(row),
            None => skipped += 1,
        }
    }
    FieldLog::from_rows(rows, gap_threshold, skipped)
}

// ---------------------------------------------------------------------------
// Geo transforms: header `x0,y0,xf,yf,alpha`, one row.
// ---------------------------------------------------------------------------

pub fn parse_transform_csv(text: &str) -> Result<GeoTransform> {
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.to_ascii_lowercase().starts_with("x0") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(HarnessError::parse(i + 1, "expected 'x0,y0,xf,yf,alpha'"));
        }
        let v: Result<Vec<f64>> = fields.iter().map(|f| parse_f64(i + 1, f)).collect();
        let v = v?;
        return GeoTransform::new(v[0], v[1], v[2], v[3], v[4]);
    }
    Err(HarnessError::invalid("transform file has no data row"))
}

// ---------------------------------------------------------------------------
// Grids: CSV matrix with a `# nx ny` header comment; 8-bit PGM heightmap
// with the value scaling declared in a header comment. Infinite cells map
// to gray level 255.
// ---------------------------------------------------------------------------

pub fn write_lvt_csv<W: Write>(mut w: W, grid: &LvtGrid) -> Result<()> {
    writeln!(w, "# {} {}", grid.nx(), grid.ny())?;
    for iy in 0..grid.ny() {
        let row: Vec<String> = (0..grid.nx()).map(|ix| grid.get(ix, iy).to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_lvt_pgm<W: Write>(mut w: W, grid: &LvtGrid) -> Result<()> {
    let (lo, hi) = grid.finite_range().unwrap_or((0.0, 0.0));
    writeln!(w, "P5")?;
    writeln!(w, "# min {lo:.6} max {hi:.6} inf 255")?;
    writeln!(w, "{} {}", grid.nx(), grid.ny())?;
    writeln!(w, "255")?;
    let span = hi - lo;
    let mut bytes = Vec::with_capacity(grid.nx() * grid.ny());
    // PGM rows go top-down; grid rows go bottom-up
    for iy in (0..grid.ny()).rev() {
        for ix in 0..grid.nx() {
            let v = grid.get(ix, iy);
            let b = if !v.is_finite() {
                255u8
            } else if span > 0.0 {
                (254.0 * (v - lo) / span).round() as u8
            } else {
                0u8
            };
            bytes.push(b);
        }
    }
    w.write_all(&bytes)?;
    Ok(())
}

/// OSAP maps export the winning pair as its index in the map's pair list;
/// `-1` marks nodes with no evaluable pair. The pair list itself goes into a
/// second header comment.
pub fn write_osap_csv<W: Write>(mut w: W, map: &OsapMap) -> Result<()> {
    writeln!(w, "# {} {}", map.nx(), map.ny())?;
    let pairs: Vec<String> = map
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, (a, b))| format!("{k}:{a}-{b}"))
        .collect();
    writeln!(w, "# pairs {}", pairs.join(" "))?;
    for iy in 0..map.ny() {
        let row: Vec<String> = (0..map.nx())
            .map(|ix| match map.get(ix, iy).and_then(|p| map.pair_index(p)) {
                Some(k) => k.to_string(),
                None => "-1".into(),
            })
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_osap_pgm<W: Write>(mut w: W, map: &OsapMap) -> Result<()> {
    let n = map.pairs().len();
    writeln!(w, "P5")?;
    writeln!(w, "# min 0 max {} none 255", n.saturating_sub(1))?;
    writeln!(w, "{} {}", map.nx(), map.ny())?;
    writeln!(w, "255")?;
    let mut bytes = Vec::with_capacity(map.nx() * map.ny());
    for iy in (0..map.ny()).rev() {
        for ix in 0..map.nx() {
            let b = match map.get(ix, iy).and_then(|p| map.pair_index(p)) {
                Some(k) if n > 1 => (254 * k / (n - 1)) as u8,
                Some(_) => 0u8,
                None => 255u8,
            };
            bytes.push(b);
        }
    }
    w.write_all(&bytes)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Report files (fixed 6-decimal formatting).
// ---------------------------------------------------------------------------

pub fn noise_kind_name(kind: NoiseKind) -> &'static str {
    match kind {
        NoiseKind::Gaussian => "gaussian",
        NoiseKind::Uniform => "uniform",
    }
}

pub fn write_stats_csv<W: Write>(
    mut w: W,
    ap: &str,
    level: f64,
    stats: &[MethodStats],
) -> Result<()> {
    writeln!(w, "method,ap,level,ave,std,time")?;
    for s in stats {
        writeln!(
            w,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            s.method.name(),
            ap,
            level,
            s.mean,
            s.std,
            s.seconds_per_traversal
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepPoint]) -> Result<()> {
    writeln!(w, "ap,model,level,method,ave,std")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.6},{},{:.6},{:.6}",
            r.anchors,
            noise_kind_name(r.kind),
            r.level,
            r.method.name(),
            r.mean,
            r.std
        )?;
    }
    Ok(())
}

pub fn write_restored_csv<W: Write>(mut w: W, points: &[RestoredPoint]) -> Result<()> {
    writeln!(w, "index,x_true,y_true,x_lsm,y_lsm,x_gdm,y_gdm,x_tplm,y_tplm")?;
    let cell = |p: Option<Point2D>| match p {
        Some(p) => format!("{:.6},{:.6}", p.x, p.y),
        None => ",".into(),
    };
    for r in points {
        writeln!(
            w,
            "{},{:.6},{:.6},{},{},{}",
            r.index,
            r.truth.x,
            r.truth.y,
            cell(r.lsm),
            cell(r.gdm),
            cell(r.tplm)
        )?;
    }
    Ok(())
}

pub fn write_rgap_csv<W: Write>(mut w: W, study: &RgapStudy) -> Result<()> {
    writeln!(
        w,
        "placement,score,lsm_ave,lsm_std,gdm_ave,gdm_std,tplm_ave,tplm_std"
    )?;
    for row in &study.rows {
        let cell = |m: Method| match row.stats_for(m) {
            Some(s) => format!("{:.6},{:.6}", s.mean, s.std),
            None => ",".into(),
        };
        writeln!(
            w,
            "{},{:.6},{},{},{}",
            row.placement,
            row.score,
            cell(Method::Lsm),
            cell(Method::Gdm),
            cell(Method::Tplm)
        )?;
    }
    Ok(())
}

/// Restored trajectories from a log replay: one file per method is the
/// caller's concern; this writes one method column pair per available point.
pub fn write_replay_csv<W: Write>(mut w: W, outcome: &ReplayOutcome, method: Method) -> Result<()> {
    writeln!(w, "epoch,x,y,gap")?;
    for p in &outcome.points {
        let pos = match method {
            Method::Lsm => p.lsm,
            Method::Gdm => p.gdm,
            Method::Tplm => p.tplm,
        };
        match pos {
            Some(q) => writeln!(
                w,
                "{},{:.6},{:.6},{}",
                p.time,
                q.x,
                q.y,
                p.gap_before as u8
            )?,
            None => writeln!(w, "{},,,{}", p.time, p.gap_before as u8)?,
        }
    }
    Ok(())
}
