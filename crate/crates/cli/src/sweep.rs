//! Parameter grids and the resumable, ordered record writer used by the
//! sweep commands.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use crowdgame_core::algebra::Rational;
use crowdgame_core::game::{parse_rational, Params};
use rayon::prelude::*;

/// `start:stop:count`, evenly spaced and inclusive at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub start: Rational,
    pub stop: Rational,
    pub count: usize,
}

impl FromStr for Axis {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            bail!("grid axis must look like start:stop:count, got {s:?}");
        };
        let count: usize = count.trim().parse().context("grid count")?;
        if count == 0 {
            bail!("grid count must be at least 1");
        }
        Ok(Axis {
            start: parse_rational(start)?,
            stop: parse_rational(stop)?,
            count,
        })
    }
}

impl Axis {
    pub fn values(&self, shift: &Rational) -> Vec<Rational> {
        if self.count == 1 {
            return vec![&self.start + shift];
        }
        let step =
            (&self.stop - &self.start) / Rational::from_integer((self.count as i64 - 1).into());
        (0..self.count)
            .map(|k| &self.start + &step * Rational::from_integer((k as i64).into()) + shift)
            .collect()
    }
}

/// Row-major grid (d outer, q inner) of the points inside the unit square.
pub fn grid(d: &Axis, q: &Axis, shift: &Rational) -> Vec<Params> {
    let qs = q.values(shift);
    d.values(shift)
        .into_iter()
        .flat_map(|dv| {
            qs.iter()
                .filter_map(move |qv| Params::new(dv.clone(), qv.clone()).ok())
        })
        .collect()
}

/// Text that identifies a point in the completion log.
pub fn point_key(p: &Params) -> String {
    format!("{},{}", p.d(), p.q())
}

fn log_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".done");
    PathBuf::from(name)
}

/// Where records go. With a file, progress is logged after each point so
/// an interrupted sweep picks up where it stopped.
pub struct Sink {
    out: Box<dyn Write>,
    log: Option<(File, PathBuf)>,
    offset: u64,
    skip: usize,
}

impl Sink {
    pub fn stdout(header: Option<&str>) -> Result<Self> {
        let mut out: Box<dyn Write> = Box::new(io::stdout().lock());
        if let Some(h) = header {
            writeln!(out, "{h}")?;
        }
        Ok(Sink {
            out,
            log: None,
            offset: 0,
            skip: 0,
        })
    }

    /// Open `path`, resuming from its completion log when one exists and
    /// agrees with `keys`.
    pub fn file(path: &Path, header: Option<&str>, keys: &[String], fresh: bool) -> Result<Self> {
        let log = log_path(path);
        let mut done: Vec<(String, u64)> = Vec::new();
        if !fresh && log.exists() && path.exists() {
            for line in BufReader::new(File::open(&log)?).lines() {
                let line = line?;
                let Some((key, off)) = line.rsplit_once('\t') else {
                    break;
                };
                let Ok(off) = off.parse::<u64>() else { break };
                done.push((key.to_string(), off));
            }
            for (k, (key, _)) in done.iter().enumerate() {
                if keys.get(k) != Some(key) {
                    bail!(
                        "{} belongs to a different sweep; rerun with --fresh to overwrite",
                        path.display()
                    );
                }
            }
        }
        let resumed = !done.is_empty();
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .write(true)
            .truncate(false)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let mut offset = 0;
        if resumed {
            offset = done.last().map(|d| d.1).unwrap_or(0);
            file.set_len(offset)?;
        } else {
            file.set_len(0)?;
            if let Some(h) = header {
                writeln!(file, "{h}")?;
                offset = h.len() as u64 + 1;
            }
        }
        file.seek(io::SeekFrom::Start(offset))?;
        let mut log_file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(false)
            .open(&log)?;
        if resumed {
            let mut text = String::new();
            for (k, o) in &done {
                text.push_str(&format!("{k}\t{o}\n"));
            }
            log_file.set_len(0)?;
            log_file.write_all(text.as_bytes())?;
        } else {
            log_file.set_len(0)?;
        }
        log_file.seek(io::SeekFrom::End(0))?;
        Ok(Sink {
            out: Box::new(file),
            log: Some((log_file, log)),
            offset,
            skip: done.len(),
        })
    }

    /// Number of leading points already written.
    pub fn completed(&self) -> usize {
        self.skip
    }

    fn record(&mut self, key: &str, lines: &[String]) -> Result<()> {
        for line in lines {
            writeln!(self.out, "{line}")?;
            self.offset += line.len() as u64 + 1;
        }
        self.out.flush()?;
        if let Some((log, _)) = &mut self.log {
            writeln!(log, "{key}\t{}", self.offset)?;
            log.flush()?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        if let Some((_, path)) = self.log.take() {
            fs::remove_file(path)?;
        }
        Ok(())
    }
}

/// Compute `lines_for` at each point on the rayon pool and write the
/// results in point order. Points already recorded in the sink are skipped.
pub fn run<P, F>(points: &[P], keys: &[String], mut sink: Sink, lines_for: F) -> Result<()>
where
    P: Sync,
    F: Fn(&P) -> Result<Vec<String>> + Sync,
{
    let start = sink.completed();
    let batch = rayon::current_num_threads().max(1);
    let mut k = start;
    while k < points.len() {
        let end = (k + batch).min(points.len());
        let results: Vec<Result<Vec<String>>> = points[k..end].par_iter().map(&lines_for).collect();
        for (j, r) in results.into_iter().enumerate() {
            sink.record(&keys[k + j], &r?)?;
        }
        k = end;
    }
    sink.finish()
}
