//! CSV and JSON writers. Numbers are written as `{:.16e}` (17 significant
//! digits, '.' separator), lines end in '\n'.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))
}

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_string<R>(header: &[&str], rows: R) -> String
where
    R: IntoIterator,
    R::Item: AsRef<[f64]>,
{
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        for (i, x) in row.as_ref().iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{x:.16e}");
        }
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn write_csv<R>(dir: &Path, name: &str, header: &[&str], rows: R) -> Result<PathBuf, CliError>
where
    R: IntoIterator,
    R::Item: AsRef<[f64]>,
{
    let path = dir.join(name);
    write_text(&path, &csv_string(header, rows))?;
    Ok(path)
}

pub fn json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    write_text(&path, &json_string(value))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(-2.0), "-2.0000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let s = csv_string(&["a", "b"], [[1.0, 2.0], [3.0, 4.5]]);
        assert_eq!(
            s,
            "a,b\n1.0000000000000000e0,2.0000000000000000e0\n3.0000000000000000e0,4.5000000000000000e0\n"
        );
    }
}
