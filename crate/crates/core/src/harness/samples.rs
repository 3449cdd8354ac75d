//! Plain-text sample files.
//!
//! ```text
//! #space n=6 c=6
//! 0 3 5 1 2 0
//! ...
//! ```
//!
//! One sample per line, `n` base-10 categories in `[0, c)`, lowest position first.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::space::{CategoricalSpace, ElementIndex, SparseSampleSet};

pub fn header(space: CategoricalSpace) -> String {
    format!("#space n={} c={}", space.n(), space.c())
}

fn parse_header(line: &str) -> Option<(u32, u32)> {
    let rest = line.trim().strip_prefix("#space")?;
    let (mut n, mut c) = (None, None);
    for field in rest.split_whitespace() {
        match field.split_once('=')? {
            ("n", v) => n = Some(v.parse().ok()?),
            ("c", v) => c = Some(v.parse().ok()?),
            _ => return None,
        }
    }
    Some((n?, c?))
}

pub fn write_samples(path: &Path, space: CategoricalSpace, samples: &[ElementIndex]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header(space))?;
    let mut line = String::new();
    for &x in samples {
        line.clear();
        for (i, digit) in space.decode(x)?.into_iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&digit.to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

type NumberedLines = std::iter::Enumerate<std::io::Lines<BufReader<File>>>;

fn file_error(path: &Path, message: String) -> Error {
    Error::SampleFile {
        path: path.to_path_buf(),
        message,
    }
}

/// Opens `path` and consumes its header, which must declare `space`.
fn open_checked(path: &Path, space: CategoricalSpace) -> Result<NumberedLines> {
    let fail = |message: String| file_error(path, message);
    let reader = BufReader::new(File::open(path).map_err(|e| fail(e.to_string()))?);
    let mut lines = reader.lines().enumerate();
    let (n, c) = loop {
        match lines.next() {
            None => return Err(fail("missing `#space n=<n> c=<c>` header".into())),
            Some((_, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break parse_header(&line)
                    .ok_or_else(|| fail(format!("malformed header `{}`", line.trim())))?;
            }
        }
    };
    if n != space.n() || c != space.c() {
        return Err(fail(format!(
            "file declares n={n} c={c}, configured space is {space}"
        )));
    }
    Ok(lines)
}

/// Checks that the file exists and its header matches `space`.
pub fn check_header(path: &Path, space: CategoricalSpace) -> Result<()> {
    open_checked(path, space).map(drop)
}

/// Reads every sample in file order, validating the header against `space`.
pub fn read_samples(path: &Path, space: CategoricalSpace) -> Result<Vec<ElementIndex>> {
    let fail = |message: String| file_error(path, message);
    let lines = open_checked(path, space)?;
    let n = space.n();

    let mut out = Vec::new();
    let mut tuple = Vec::with_capacity(n as usize);
    for (lineno, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        tuple.clear();
        for tok in trimmed.split_whitespace() {
            let v: u32 = tok
                .parse()
                .map_err(|_| fail(format!("line {}: `{tok}` is not a category", lineno + 1)))?;
            tuple.push(v);
        }
        let x = space
            .encode(&tuple)
            .map_err(|e| fail(format!("line {}: {e}", lineno + 1)))?;
        out.push(x);
    }
    Ok(out)
}

pub fn read_sample_set(path: &Path, space: CategoricalSpace) -> Result<SparseSampleSet> {
    SparseSampleSet::from_indices(space, read_samples(path, space)?)
}
