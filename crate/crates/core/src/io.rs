//! Small file helpers shared by the exporters.

use std::io::Write;
use std::path::Path;

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Formats a value with 12 significant digits in scientific notation.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        // Avoid "-0.00000000000e0" for negative zero.
        return "0.00000000000e0".to_string();
    }
    format!("{v:.11e}")
}
