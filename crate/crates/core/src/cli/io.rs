//! File formats used by the command-line tool.

use std::io::Write;
use std::path::Path as FsPath;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::path::Path;

/// Version stamped on every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance on the spacing of a `time,value` series.
pub const SPACING_TOLERANCE: f64 = 1e-9;

/// A JSON document with a top-level `schema_version`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            body,
        }
    }
}

/// Write `bytes` to `target` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(target: &FsPath, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match target.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => FsPath::new("."),
    };
    let io = |e: std::io::Error| CliError::io(format!("{}: {e}", target.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(target).map_err(|e| io(e.error))?;
    Ok(())
}

/// Write to `target`, or to standard output when absent.
pub fn emit(target: Option<&FsPath>, bytes: &[u8]) -> Result<(), CliError> {
    match target {
        Some(t) => write_atomic(t, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(format!("stdout: {e}"))),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(&Versioned::new(value)).map_err(|e| CliError::io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Parse JSON, reporting the JSON pointer of the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        CliError::validation(format!("{what}: at \"{pointer}\": {}", e.inner()))
    })
}

pub fn read_text(file: &FsPath) -> Result<String, CliError> {
    std::fs::read_to_string(file).map_err(|e| CliError::validation(format!("{}: {e}", file.display())))
}

pub fn read_json<T: DeserializeOwned>(file: &FsPath) -> Result<T, CliError> {
    parse_json(&read_text(file)?, &file.display().to_string())
}

/// Read a versioned JSON document, rejecting other schema versions.
pub fn read_versioned<T: DeserializeOwned>(file: &FsPath) -> Result<T, CliError> {
    let doc: Versioned<T> = read_json(file)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::validation(format!(
            "{}: unsupported schema_version {}",
            file.display(),
            doc.schema_version
        )));
    }
    Ok(doc.body)
}

/// Series parsed from CSV, with the spacing when a time column is present.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFile {
    pub values: Vec<f64>,
    pub delta: Option<f64>,
}

impl SeriesFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::validation(format!("{origin}: {msg}"));
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        let timed = match cols.as_slice() {
            ["value"] => false,
            ["time", "value"] => true,
            _ => return Err(bad(format!("expected header `value` or `time,value`, got `{}`", cols.join(",")))),
        };
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let num = |s: &str| -> Result<f64, CliError> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("row {}: `{s}` is not a finite number", i + 1)))
            };
            if timed {
                times.push(num(&record[0])?);
                values.push(num(&record[1])?);
            } else {
                values.push(num(&record[0])?);
            }
        }
        if values.len() < 2 {
            return Err(bad(format!("need at least 2 rows, got {}", values.len())));
        }
        let delta = if timed {
            let n = times.len();
            let delta = (times[n - 1] - times[0]) / (n - 1) as f64;
            if !(delta > 0.0) {
                return Err(bad("times must increase".into()));
            }
            for (i, w) in times.windows(2).enumerate() {
                if ((w[1] - w[0]) - delta).abs() > SPACING_TOLERANCE * delta {
                    return Err(bad(format!(
                        "row {}: spacing {} differs from {delta} beyond relative tolerance {SPACING_TOLERANCE:e}",
                        i + 2,
                        w[1] - w[0]
                    )));
                }
            }
            Some(delta)
        } else {
            None
        };
        Ok(Self { values, delta })
    }

    pub fn read(file: &FsPath) -> Result<Self, CliError> {
        Self::parse(&read_text(file)?, &file.display().to_string())
    }

    /// Path with the file's spacing, or `fallback` for a single-column file.
    pub fn into_path(self, fallback: Option<f64>) -> Result<Path, CliError> {
        let delta = self
            .delta
            .or(fallback)
            .ok_or_else(|| CliError::validation("series has no time column; pass --delta".into()))?;
        Path::new(self.values, delta).map_err(|e| CliError::validation(e.to_string()))
    }
}

/// `time,value` CSV with `time = (i + 1) Δ`.
pub fn series_csv(path: &Path) -> Vec<u8> {
    let mut out = String::from("time,value\n");
    for (i, v) in path.values().iter().enumerate() {
        out.push_str(&format!("{},{}\n", (i + 1) as f64 * path.delta(), v));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_formats() {
        let s = SeriesFile::parse("value\n1\n2.5\n-3\n", "t").unwrap();
        assert_eq!(s.values, vec![1.0, 2.5, -3.0]);
        assert_eq!(s.delta, None);
        let s = SeriesFile::parse("time,value\n0.5,1\n1.0,2\n1.5,3\n", "t").unwrap();
        assert_eq!(s.delta, Some(0.5));
        assert_eq!(
            SeriesFile::parse("time,value\n0.5,1\n1.0,2\n1.6,3\n", "t").unwrap_err().code,
            2
        );
        assert_eq!(SeriesFile::parse("value\n1\n", "t").unwrap_err().code, 2);
        assert_eq!(SeriesFile::parse("value\n1\nNaN\n", "t").unwrap_err().code, 2);
        assert_eq!(SeriesFile::parse("x,y\n1,2\n3,4\n", "t").unwrap_err().code, 2);
    }

    #[test]
    fn written_series_reads_back() {
        let p = Path::new(vec![0.25, -1.5, 3.0, 1e-7], 0.1).unwrap();
        let text = String::from_utf8(series_csv(&p)).unwrap();
        let back = SeriesFile::parse(&text, "t").unwrap().into_path(None).unwrap();
        assert_eq!(back.values(), p.values());
        assert!((back.delta() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn pointer_names_offending_field() {
        #[derive(Debug, Deserialize)]
        #[allow(dead_code)]
        struct Inner {
            hurst: f64,
        }
        #[derive(Debug, Deserialize)]
        #[allow(dead_code)]
        struct Outer {
            items: Vec<Inner>,
        }
        let err = parse_json::<Outer>(r#"{"items":[{"hurst":0.5},{"hurst":"x"}]}"#, "cfg").unwrap_err();
        assert!(err.message.contains("/items/1/hurst"), "{}", err.message);
    }
}
