// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Output sinks: stdout, or a file replaced atomically.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

/// Writes the whole payload to `out`, or to stdout when `out` is `None`.
/// Files are written to a temporary sibling and renamed into place.
pub fn emit(out: Option<&Path>, payload: &[u8]) -> io::Result<()> {
    match out {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(payload)?;
            stdout.flush()
        }
        Some(path) => {
            let dir = parent_dir(path);
            let mut tmp = NamedTempFile::new_in(&dir)?;
            tmp.write_all(payload)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Pretty JSON with a trailing newline.
pub fn json_document<T: serde::Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

/// One compact JSON object per line.
pub fn json_lines<T: serde::Serialize>(rows: impl IntoIterator<Item = T>) -> serde_json::Result<Vec<u8>> {
    let mut buf = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut buf, &row)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

/// CSV with a header row taken from the field names of `T`.
pub fn csv_table<T: serde::Serialize>(rows: impl IntoIterator<Item = T>) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Serialize)]
    struct Row {
        a: u32,
        b: f64,
    }

    #[test]
    fn csv_has_header() {
        let out = csv_table([Row { a: 1, b: 0.5 }, Row { a: 2, b: 0.25 }]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b\n1,0.5\n2,0.25\n");
    }

    #[test]
    fn json_lines_empty() {
        let out = json_lines(Vec::<Row>::new()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn atomic_file_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        emit(Some(&path), b"first").unwrap();
        emit(Some(&path), b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
