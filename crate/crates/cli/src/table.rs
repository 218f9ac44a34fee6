use std::io::Write;

use netsense_core::platforms::HBAR;

use crate::CliError;

/// A CSV table preceded by one `#` metadata line.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    config_hash: Option<String>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new(), config_hash: None }
    }

    pub fn with_config_hash(mut self, hash: &str) -> Self {
        self.config_hash = Some(hash.to_owned());
        self
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn metadata(&self) -> String {
        format!(
            "# netsense {}; config_sha256={}; hbar={HBAR:e}; frequency=angular",
            env!("CARGO_PKG_VERSION"),
            self.config_hash.as_deref().unwrap_or("none"),
        )
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        writeln!(out, "{}", self.metadata())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

/// Shortest round-trip representation of a float.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
