//! CSV artifacts and run manifests.
//!
//! All CSV files are comma-separated with a header row, `.` decimal
//! separator, LF line endings, and floats printed with 17 significant
//! digits so re-reading reproduces the exact binary values.

use crate::energy::RemainderRecord;
use crate::solver::SpaceTimeField;
use crate::swr::IterationHistory;
use crate::Result;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// 17 significant digits; round-trips f64 exactly.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(fs::File::create(path)?)
}

/// Write rows of already-formatted cells under a header line.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "{header}")?;
    for row in rows {
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

/// Per-iteration history: `k,residual,error,elapsed_s`.
pub fn write_iteration_history(path: &Path, history: &IterationHistory) -> Result<()> {
    let rows: Vec<Vec<String>> = history
        .records
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                format_float(r.residual),
                format_float(r.global_error),
                format_float(r.elapsed_s),
            ]
        })
        .collect();
    write_csv(path, "k,residual,error,elapsed_s", &rows)
}

/// Field dump `j,x,n,t,u`, row-major in `n` then `j`, reported levels only.
pub fn write_field(path: &Path, field: &SpaceTimeField) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "j,x,n,t,u")?;
    for n in 0..=field.step_count() {
        let t = n as f64 * field.dt;
        let level = field.level(n);
        for (j, u) in level.iter().enumerate() {
            let x = field.x_left + j as f64 * field.dx;
            writeln!(
                f,
                "{j},{},{n},{},{}",
                format_float(x),
                format_float(t),
                format_float(*u)
            )?;
        }
    }
    Ok(())
}

/// Energy trace `n,t,E_K,E_P,E`.
pub fn write_energy_trace(
    path: &Path,
    rows: &[(usize, f64, crate::energy::EnergySnapshot)],
) -> Result<()> {
    let formatted: Vec<Vec<String>> = rows
        .iter()
        .map(|(n, t, e)| {
            vec![
                n.to_string(),
                format_float(*t),
                format_float(e.kinetic),
                format_float(e.potential),
                format_float(e.total),
            ]
        })
        .collect();
    write_csv(path, "n,t,E_K,E_P,E", &formatted)
}

/// Remainder records `i,k,n,R,lhs,ratio`.
pub fn write_remainders(path: &Path, records: &[RemainderRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.subdomain.to_string(),
                r.iteration.to_string(),
                r.level.to_string(),
                format_float(r.remainder),
                format_float(r.lhs),
                format_float(r.ratio),
            ]
        })
        .collect();
    write_csv(path, "i,k,n,R,lhs,ratio", &rows)
}

/// Run manifest: tool identity, timestamps, per-run summaries, discovered
/// constants, and a verbatim copy of the resolved configuration. The
/// manifest is itself a loadable configuration file, so
/// `wave1d <cmd> --config manifest.txt` reproduces the run; the `[tool]`,
/// `[results]` and `[constants]` section names are reserved for the
/// manifest's own entries.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    sections: Vec<(String, Vec<(String, String)>)>,
    config_echo: String,
}

impl Manifest {
    pub fn new(experiment: &str) -> Self {
        let mut m = Manifest::default();
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        m.push("tool", "name", env!("CARGO_PKG_NAME"));
        m.push("tool", "version", env!("CARGO_PKG_VERSION"));
        m.push("tool", "unix_time", now.to_string());
        m.push("tool", "experiment", experiment);
        m
    }

    pub fn push(&mut self, section: &str, key: &str, value: impl Into<String>) {
        if let Some((_, entries)) = self.sections.iter_mut().find(|(s, _)| s == section) {
            entries.push((key.to_string(), value.into()));
        } else {
            self.sections
                .push((section.to_string(), vec![(key.to_string(), value.into())]));
        }
    }

    /// Attach the configuration echo reproduced verbatim at the end of the
    /// manifest.
    pub fn push_config_echo(&mut self, echo: &str) {
        self.config_echo = echo.to_string();
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = create(path)?;
        for (section, entries) in &self.sections {
            writeln!(f, "[{section}]")?;
            for (k, v) in entries {
                writeln!(f, "{k} = {v}")?;
            }
            writeln!(f)?;
        }
        if !self.config_echo.is_empty() {
            writeln!(f, "# resolved configuration; this manifest re-runs the experiment")?;
            write!(f, "{}", self.config_echo)?;
        }
        Ok(())
    }
}

/// Resolve the output directory: `WAVE1D_OUT` beats the CLI flag, which
/// beats the config value, which beats `runs/<experiment>`.
pub fn resolve_out_dir(
    cli: Option<&Path>,
    config_value: Option<&str>,
    experiment: &str,
) -> PathBuf {
    if let Ok(env) = std::env::var("WAVE1D_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(c) = config_value {
        return PathBuf::from(c);
    }
    PathBuf::from("runs").join(experiment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_has_17_digits_and_round_trips() {
        let x = 0.3055381944444444;
        let s = format_float(x);
        assert!(s.contains('e'));
        let back: f64 = s.parse().unwrap();
        assert_eq!(back, x);
        let y = 1.0 / 3.0;
        assert_eq!(format_float(y).parse::<f64>().unwrap(), y);
    }

    #[test]
    fn csv_has_lf_endings() {
        let dir = std::env::temp_dir().join("wave1d-test-csv");
        let path = dir.join("t.csv");
        write_csv(&path, "a,b", &[vec!["1".into(), "2".into()]]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(!bytes.windows(2).any(|w| w == b"\r\n"));
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), "a,b\n1,2\n");
        let _ = std::fs::remove_dir_all(&dir);
    }
}
