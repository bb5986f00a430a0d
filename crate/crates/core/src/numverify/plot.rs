use std::io::Write;

use crate::error::{Error, Result};

/// Header row then one comma-separated sample per line, LF endings.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let io = |e: csv::Error| Error::DomainError(format!("csv output: {}", e));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.flush().map_err(|e| Error::DomainError(format!("csv output: {}", e)))?;
    Ok(())
}
