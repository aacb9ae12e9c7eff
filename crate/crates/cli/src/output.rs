//! CSV artifacts: `#` metadata header, plain data rows, atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// Full round-trip precision (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn num3(v: f64) -> String {
    format!("{v:.3}")
}

pub struct CsvDoc {
    header: Vec<String>,
    body: csv::Writer<Vec<u8>>,
    footer: Vec<String>,
}

impl CsvDoc {
    pub fn new(command: &str, scenario_sha256: &str, config_echo: &str) -> Self {
        let mut header = vec![format!("# commons-lab {command}"), format!("# scenario_sha256: {scenario_sha256}")];
        header.extend(config_echo.lines().filter(|l| !l.is_empty()).map(|l| format!("# {l}")));
        CsvDoc {
            header,
            body: csv::Writer::from_writer(Vec::new()),
            footer: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.header.push(format!("# {}", line.into()));
    }

    pub fn row<I, S>(&mut self, fields: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.body.write_record(fields)?;
        Ok(())
    }

    /// `# key,value` line after the data.
    pub fn footer(&mut self, key: &str, value: f64) {
        self.footer.push(format!("# {key},{}", num(value)));
    }

    pub fn footer_line(&mut self, line: String) {
        self.footer.push(format!("# {line}"));
    }

    pub fn render(self) -> anyhow::Result<String> {
        let body = String::from_utf8(self.body.into_inner().context("flushing csv")?)?;
        let mut out = String::new();
        for l in &self.header {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&body);
        for l in &self.footer {
            out.push_str(l);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    drop(f);
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// `out.csv` -> `out.<tag>.csv`.
pub fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

/// Sends each document to its file, or all of them to stdout without `--out`.
pub fn emit(out: Option<&Path>, docs: Vec<(Option<&str>, String)>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            for (tag, text) in docs {
                let target = tag.map_or_else(|| path.to_path_buf(), |t| sibling(path, t));
                write_atomic(&target, &text)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for (_, text) in docs {
                stdout.write_all(text.as_bytes())?;
            }
        }
    }
    Ok(())
}
