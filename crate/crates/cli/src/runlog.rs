//! Structured run log. Each line is `<elapsed_ms> <LEVEL> [<cell>] <message>`.
//! Timings live only here so that every other output file is reproducible.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use log::Level;

use crate::{io_err, Result};

pub struct RunLog {
    file: Mutex<Option<File>>,
    start: Instant,
}

impl RunLog {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let file = File::create(path).map_err(io_err(path))?;
        Ok(Self {
            file: Mutex::new(Some(file)),
            start: Instant::now(),
        })
    }

    /// Forwards to the `log` facade only.
    pub fn disabled() -> Self {
        Self {
            file: Mutex::new(None),
            start: Instant::now(),
        }
    }

    pub fn event(&self, level: Level, cell: &str, message: &str) {
        log::log!(level, "[{cell}] {message}");
        let ms = self.start.elapsed().as_millis();
        let mut guard = self.file.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(f) = guard.as_mut() {
            let _ = writeln!(f, "{ms} {level} [{cell}] {message}");
        }
    }

    pub fn info(&self, cell: &str, message: &str) {
        self.event(Level::Info, cell, message);
    }

    pub fn warn(&self, cell: &str, message: &str) {
        self.event(Level::Warn, cell, message);
    }

    pub fn error(&self, cell: &str, message: &str) {
        self.event(Level::Error, cell, message);
    }
}
