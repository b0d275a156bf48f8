//! Columnar text format for lifted paths.
//!
//! Layout:
//!
//! ```text
//! lifted-path v1
//! dim 2
//! depth 2
//! interpolation linear
//! columns time log1[...] log2[...]
//! 0.0000000000000000e0 0.0000000000000000e0 ...
//! ...
//! ```
//!
//! Each data row holds the grid time followed by the point's log
//! coordinates, level blocks in order (level m contributes dim^m columns).
//! Values are printed with 17 significant digits, which pins down an f64
//! exactly, so write -> parse -> write reproduces the file byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use roughwalk_core::{GroupElement, Interpolation, LiftedPath};
use roughwalk_core::group::LieElement;
use roughwalk_core::series::TensorSeries;

#[derive(Debug)]
pub enum PathFileError {
    Io(std::io::Error),
    Malformed { line: usize, why: String },
    Rebuild(String),
}

impl std::fmt::Display for PathFileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PathFileError::Io(e) => write!(f, "path file io: {e}"),
            PathFileError::Malformed { line, why } => {
                write!(f, "malformed path file at line {line}: {why}")
            }
            PathFileError::Rebuild(why) => write!(f, "cannot rebuild path: {why}"),
        }
    }
}

impl std::error::Error for PathFileError {}

impl From<std::io::Error> for PathFileError {
    fn from(e: std::io::Error) -> Self {
        PathFileError::Io(e)
    }
}

fn malformed(line: usize, why: impl Into<String>) -> PathFileError {
    PathFileError::Malformed { line, why: why.into() }
}

fn interpolation_tag(interpolation: Interpolation) -> &'static str {
    match interpolation {
        Interpolation::LinearLift => "linear",
        Interpolation::LogLinear => "log-linear",
    }
}

fn parse_interpolation(tag: &str) -> Option<Interpolation> {
    match tag {
        "linear" => Some(Interpolation::LinearLift),
        "log-linear" => Some(Interpolation::LogLinear),
        _ => None,
    }
}

/// Renders the path to the text format. All rows carry time plus one column
/// per log coordinate; the first row is the unit point, so its coordinates
/// are exact zeros.
pub fn render(path: &LiftedPath) -> String {
    let dim = path.dim();
    let depth = path.depth();
    let mut out = String::new();
    out.push_str("lifted-path v1\n");
    let _ = writeln!(out, "dim {dim}");
    let _ = writeln!(out, "depth {depth}");
    let _ = writeln!(out, "interpolation {}", interpolation_tag(path.interpolation()));
    out.push_str("columns time");
    for m in 1..=depth {
        let _ = write!(out, " log{m}[{}]", dim.pow(m as u32));
    }
    out.push('\n');
    for (t, point) in path.times().iter().zip(path.points()) {
        let _ = write!(out, "{t:.16e}");
        let log = point.log();
        for m in 1..=depth {
            for value in log.series().level(m).expect("level exists") {
                let _ = write!(out, " {value:.16e}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write(path: &LiftedPath, file: &Path) -> Result<(), PathFileError> {
    std::fs::write(file, render(path))?;
    Ok(())
}

fn header_field<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
) -> Result<(usize, &'a str), PathFileError> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| malformed(0, format!("missing {key} header")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| malformed(no, format!("expected `{key} ...`")))?;
    Ok((no, rest.trim()))
}

/// Parses the text format back into a lifted path. Numbers are parsed with
/// the standard float parser, so everything `render` wrote comes back with
/// identical bits.
pub fn parse(text: &str) -> Result<LiftedPath, PathFileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, "lifted-path v1")) => {}
        Some((no, other)) => {
            return Err(malformed(no, format!("unknown format marker {other:?}")))
        }
        None => return Err(malformed(0, "empty file")),
    }
    let (no, dim_text) = header_field(&mut lines, "dim")?;
    let dim: usize = dim_text
        .parse()
        .map_err(|_| malformed(no, format!("bad dim {dim_text:?}")))?;
    let (no, depth_text) = header_field(&mut lines, "depth")?;
    let depth: usize = depth_text
        .parse()
        .map_err(|_| malformed(no, format!("bad depth {depth_text:?}")))?;
    let (no, tag) = header_field(&mut lines, "interpolation")?;
    let interpolation = parse_interpolation(tag)
        .ok_or_else(|| malformed(no, format!("unknown interpolation tag {tag:?}")))?;
    let (no, _) = header_field(&mut lines, "columns")?;
    if dim == 0 || depth == 0 {
        return Err(malformed(no, "dim and depth must be positive"));
    }
    let coords: usize = (1..=depth).map(|m| dim.pow(m as u32)).sum();

    let mut times = Vec::new();
    let mut points: Vec<GroupElement> = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let time_text = fields.next().ok_or_else(|| malformed(no, "empty row"))?;
        let time: f64 = time_text
            .parse()
            .map_err(|_| malformed(no, format!("bad time {time_text:?}")))?;
        if !time.is_finite() {
            return Err(malformed(no, "non-finite time"));
        }
        let mut series = TensorSeries::zero(dim, depth)
            .map_err(|e| PathFileError::Rebuild(e.to_string()))?;
        let mut consumed = 0usize;
        for m in 1..=depth {
            let block = series.level_mut(m).expect("level exists");
            for slot in block.iter_mut() {
                let text = fields.next().ok_or_else(|| {
                    malformed(no, format!("row has fewer than {coords} coordinates"))
                })?;
                let value: f64 = text
                    .parse()
                    .map_err(|_| malformed(no, format!("bad coordinate {text:?}")))?;
                if !value.is_finite() {
                    return Err(malformed(no, "non-finite coordinate"));
                }
                *slot = value;
                consumed += 1;
            }
        }
        debug_assert_eq!(consumed, coords);
        if fields.next().is_some() {
            return Err(malformed(no, format!("row has more than {coords} coordinates")));
        }
        let lie = LieElement::from_series(series)
            .map_err(|e| PathFileError::Rebuild(e.to_string()))?;
        times.push(time);
        points.push(lie.exp());
    }
    LiftedPath::new(times, points, interpolation)
        .map_err(|e| PathFileError::Rebuild(e.to_string()))
}

pub fn read(file: &Path) -> Result<LiftedPath, PathFileError> {
    let text = std::fs::read_to_string(file)?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_path(dim: usize, depth: usize, steps: usize, seed: u64) -> LiftedPath {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..steps * dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        LiftedPath::lift_linear_chords(dim, depth, &samples).unwrap()
    }

    #[test]
    fn render_parse_render_is_byte_identical() {
        for (dim, depth) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
            let path = sample_path(dim, depth, 12, 1000 + dim as u64 + depth as u64);
            let first = render(&path);
            let parsed = parse(&first).unwrap();
            let second = render(&parsed);
            assert_eq!(first, second, "dim {dim} depth {depth}");
        }
    }

    #[test]
    fn parse_recovers_exact_log_coordinates() {
        let path = sample_path(2, 2, 9, 77);
        let parsed = parse(&render(&path)).unwrap();
        assert_eq!(parsed.times(), path.times());
        assert_eq!(parsed.interpolation(), path.interpolation());
        for (a, b) in path.points().iter().zip(parsed.points()) {
            let la = a.log();
            let lb = b.log();
            for m in 1..=2 {
                let xa = la.series().level(m).unwrap();
                let xb = lb.series().level(m).unwrap();
                for (va, vb) in xa.iter().zip(xb) {
                    assert_eq!(va.to_bits(), vb.to_bits(), "level {m}");
                }
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("walk.path");
        let path = sample_path(2, 2, 20, 5);
        write(&path, &file).unwrap();
        let back = read(&file).unwrap();
        assert_eq!(render(&path), render(&back));
    }

    #[test]
    fn malformed_inputs_are_reported_with_line_numbers() {
        let good = render(&sample_path(2, 2, 4, 3));

        let wrong_marker = good.replacen("lifted-path v1", "lifted-path v9", 1);
        assert!(matches!(
            parse(&wrong_marker),
            Err(PathFileError::Malformed { line: 1, .. })
        ));

        let bad_tag = good.replacen("interpolation linear", "interpolation cubic", 1);
        assert!(matches!(
            parse(&bad_tag),
            Err(PathFileError::Malformed { line: 4, .. })
        ));

        let mut truncated: Vec<&str> = good.lines().collect();
        let last = truncated.len() - 1;
        let shortened = truncated[last]
            .rsplit_once(' ')
            .map(|(head, _)| head.to_string())
            .unwrap();
        truncated[last] = &shortened;
        let text = truncated.join("\n");
        assert!(matches!(
            parse(&text),
            Err(PathFileError::Malformed { why, .. }) if why.contains("fewer")
        ));

        let with_nan = good.replacen("0.0000000000000000e0", "NaN", 1);
        assert!(parse(&with_nan).is_err());
    }

    #[test]
    fn log_linear_tag_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let chordal = LiftedPath::lift_linear_chords(2, 2, &samples).unwrap();
        let path = LiftedPath::new(
            chordal.times().to_vec(),
            chordal.points().to_vec(),
            Interpolation::LogLinear,
        )
        .unwrap();
        let back = parse(&render(&path)).unwrap();
        assert_eq!(back.interpolation(), Interpolation::LogLinear);
    }
}
