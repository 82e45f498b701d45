use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, content),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()
        }
    }
}
