use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use hypex_core::{Error, Result};

/// One numeric column, optionally under a single header line. `-` reads stdin.
pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?
    };
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_nan() => return Err(Error::Data(format!("line {}: NaN in series", i + 1))),
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::Data(format!("line {}: {field:?} is not a number", i + 1))),
        }
    }
    if out.is_empty() {
        return Err(Error::Data("series is empty".into()));
    }
    Ok(out)
}

pub fn write_series<W: Write>(mut w: W, series: &[f64]) -> Result<()> {
    writeln!(w, "phi")?;
    for v in series {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// Writes to `path`, or stdout when `None`.
pub fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let mut w = io::BufWriter::new(fs::File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}
