use std::io::Write;
use std::path::Path;

/// Writes through a temporary file in the target directory, then renames,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `<index>_<name>` with anything outside `[A-Za-z0-9_-]` replaced, so
/// duplicate or awkward names still map to distinct safe file names.
pub fn file_stem(index: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{index:03}_{clean}")
}

/// `-15.5` → `m15p5`.
pub fn angle_tag(deg: f64) -> String {
    let s = format!("{}", deg.abs()).replace('.', "p");
    if deg < 0.0 {
        format!("m{s}")
    } else {
        s
    }
}
