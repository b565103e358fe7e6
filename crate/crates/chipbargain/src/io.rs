//! JSON Lines game logs on disk.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chipbargain_core::log::{GameLog, LogError, LogLine};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}")]
    Json { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("{path}")]
    Log { path: PathBuf, source: LogError },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

pub fn read_logs(path: &Path) -> Result<Vec<GameLog>, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_logs(BufReader::new(file), path)
}

pub fn parse_logs<R: BufRead>(reader: R, path: &Path) -> Result<Vec<GameLog>, IoError> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LogLine = serde_json::from_str(&line)
            .map_err(|source| IoError::Json { path: path.to_path_buf(), line: i + 1, source })?;
        lines.push(parsed);
    }
    GameLog::collect_lines(lines).map_err(|source| IoError::Log { path: path.to_path_buf(), source })
}

pub fn write_game<W: Write>(out: &mut W, log: &GameLog) -> std::io::Result<()> {
    for line in log.lines() {
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes games to `<path>.partial` and renames it into place on `finish`.
/// If the writer is dropped early, the `.partial` file is left behind as a
/// marker of the incomplete run.
pub struct LogWriter {
    path: PathBuf,
    partial: PathBuf,
    out: BufWriter<File>,
}

impl LogWriter {
    pub fn create(path: &Path) -> Result<Self, IoError> {
        let mut partial = path.as_os_str().to_owned();
        partial.push(".partial");
        let partial = PathBuf::from(partial);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let file = File::create(&partial).map_err(io_err(&partial))?;
        Ok(LogWriter { path: path.to_path_buf(), partial, out: BufWriter::new(file) })
    }

    pub fn write(&mut self, log: &GameLog) -> Result<(), IoError> {
        write_game(&mut self.out, log).map_err(io_err(&self.partial))
    }

    pub fn finish(mut self) -> Result<PathBuf, IoError> {
        self.out.flush().map_err(io_err(&self.partial))?;
        fs::rename(&self.partial, &self.path).map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

/// Appends finished games to a JSONL file, creating it if needed.
pub fn append_game(path: &Path, log: &GameLog) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = fs::OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    write_game(&mut out, log).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}
