//! Dataset ingestion and artifact emission.
//!
//! Two dataset formats are supported. CSV files carry a header row; every
//! column is a feature unless the last one is named `label`, which is then
//! read as a class id. The binary format is a 16-byte header (magic `HTSN`,
//! little-endian u32 point count, little-endian u32 dimension count, four
//! reserved bytes) followed by the row-major matrix as little-endian f64,
//! with labels in an optional `<file>.labels` sidecar of little-endian u32.
//!
//! All writers go through a temp file in the target directory plus a rename,
//! so readers never observe a half-written artifact.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hyptsne::affinity::DataMatrix;
use hyptsne::geometry::PoincarePoint;
use hyptsne::report::RunReport;

pub const BINARY_MAGIC: [u8; 4] = *b"HTSN";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FileFormat {
    Csv,
    Binary,
}

impl fmt::Display for FileFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FileFormat::Csv => "csv",
            FileFormat::Binary => "binary",
        })
    }
}

/// Pick a format from the file extension: `.csv` is CSV, `.htsn` and `.bin`
/// are binary. Used when no explicit `--format` is given.
pub fn infer_format(path: &Path) -> Option<FileFormat> {
    match path.extension()?.to_str()? {
        "csv" => Some(FileFormat::Csv),
        "htsn" | "bin" => Some(FileFormat::Binary),
        _ => None,
    }
}

/// Explicit `--format` wins; otherwise fall back to the extension.
pub fn resolve_format(path: &Path, explicit: Option<FileFormat>) -> Result<FileFormat> {
    explicit.or_else(|| infer_format(path)).with_context(|| {
        format!(
            "cannot infer the format of {} from its extension; pass --format",
            path.display()
        )
    })
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub data: DataMatrix,
    pub labels: Option<Vec<u32>>,
}

pub fn load_dataset(path: &Path, format: FileFormat) -> Result<Dataset> {
    match format {
        FileFormat::Csv => load_csv(path),
        FileFormat::Binary => load_binary(path),
    }
}

fn load_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;

    let headers = reader
        .headers()
        .with_context(|| format!("{}: cannot read header row", path.display()))?
        .clone();
    if headers.is_empty() {
        bail!("{}: empty header row", path.display());
    }
    let has_label = headers
        .iter()
        .next_back()
        .is_some_and(|h| h.eq_ignore_ascii_case("label"));
    let dims = headers.len() - usize::from(has_label);
    if dims == 0 {
        bail!("{}: header has a label column but no feature columns", path.display());
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0usize;
    for record in reader.records() {
        let record = record.with_context(|| format!("{}: malformed row", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            bail!(
                "{}: line {line}: expected {} fields, found {}",
                path.display(),
                headers.len(),
                record.len()
            );
        }
        for (col, field) in record.iter().take(dims).enumerate() {
            let v: f64 = field.parse().with_context(|| {
                format!(
                    "{}: line {line}: column `{}`: cannot parse {field:?} as a number",
                    path.display(),
                    &headers[col]
                )
            })?;
            if !v.is_finite() {
                bail!(
                    "{}: line {line}: column `{}`: non-finite value {v}",
                    path.display(),
                    &headers[col]
                );
            }
            values.push(v);
        }
        if has_label {
            let field = &record[dims];
            let label: u32 = field.parse().with_context(|| {
                format!(
                    "{}: line {line}: cannot parse label {field:?} as an unsigned integer",
                    path.display()
                )
            })?;
            labels.push(label);
        }
        n += 1;
    }
    if n == 0 {
        bail!("{}: no data rows", path.display());
    }
    Ok(Dataset {
        data: DataMatrix::new(n, dims, values),
        labels: has_label.then_some(labels),
    })
}

fn load_binary(path: &Path) -> Result<Dataset> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    if bytes.len() < HEADER_LEN {
        bail!(
            "{}: truncated header: {} bytes, need {HEADER_LEN}",
            path.display(),
            bytes.len()
        );
    }
    if bytes[..4] != BINARY_MAGIC {
        bail!(
            "{}: bad magic at offset 0: expected \"HTSN\", found {:?}",
            path.display(),
            &bytes[..4]
        );
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = HEADER_LEN + n * d * 8;
    if bytes.len() != expected {
        bail!(
            "{}: payload size mismatch: header declares {n} x {d} points \
             ({expected} bytes total), file has {} bytes",
            path.display(),
            bytes.len()
        );
    }
    if n == 0 || d == 0 {
        bail!("{}: header declares an empty {n} x {d} matrix", path.display());
    }
    let mut values = Vec::with_capacity(n * d);
    for (k, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            bail!(
                "{}: non-finite value at row {}, column {} (byte offset {})",
                path.display(),
                k / d,
                k % d,
                HEADER_LEN + k * 8
            );
        }
        values.push(v);
    }

    let labels = load_label_sidecar(path, n)?;
    Ok(Dataset { data: DataMatrix::new(n, d, values), labels })
}

fn label_sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".labels");
    PathBuf::from(os)
}

fn load_label_sidecar(path: &Path, n: usize) -> Result<Option<Vec<u32>>> {
    let sidecar = label_sidecar_path(path);
    if !sidecar.exists() {
        return Ok(None);
    }
    let bytes = std::fs::read(&sidecar)
        .with_context(|| format!("cannot read {}", sidecar.display()))?;
    if bytes.len() != n * 4 {
        bail!(
            "{}: expected {n} labels ({} bytes), found {} bytes",
            sidecar.display(),
            n * 4,
            bytes.len()
        );
    }
    Ok(Some(
        bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    ))
}

pub fn save_dataset(
    path: &Path,
    format: FileFormat,
    data: &DataMatrix,
    labels: Option<&[u32]>,
) -> Result<()> {
    if let Some(l) = labels {
        assert_eq!(l.len(), data.n(), "one label per row");
    }
    match format {
        FileFormat::Csv => save_csv(path, data, labels),
        FileFormat::Binary => save_binary(path, data, labels),
    }
}

fn save_csv(path: &Path, data: &DataMatrix, labels: Option<&[u32]>) -> Result<()> {
    let mut out = String::new();
    for j in 0..data.dims() {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&format!("f{j}"));
    }
    if labels.is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for i in 0..data.n() {
        let mut first = true;
        for v in data.row(i) {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        if let Some(l) = labels {
            out.push_str(&format!(",{}", l[i]));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

fn save_binary(path: &Path, data: &DataMatrix, labels: Option<&[u32]>) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + data.values().len() * 8);
    bytes.extend_from_slice(&BINARY_MAGIC);
    bytes.extend_from_slice(&u32::try_from(data.n()).context("too many rows for u32")?.to_le_bytes());
    bytes.extend_from_slice(&u32::try_from(data.dims()).context("too many columns for u32")?.to_le_bytes());
    bytes.extend_from_slice(&[0u8; 4]);
    for v in data.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path, &bytes)?;
    if let Some(l) = labels {
        let mut label_bytes = Vec::with_capacity(l.len() * 4);
        for v in l {
            label_bytes.extend_from_slice(&v.to_le_bytes());
        }
        write_atomic(&label_sidecar_path(path), &label_bytes)?;
    }
    Ok(())
}

/// Write through a temp file in the same directory plus an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    // Temp files are created 0600; published artifacts should be readable.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let _ = std::fs::set_permissions(path, std::fs::Permissions::from_mode(0o644));
    }
    Ok(())
}

/// `index,x,y[,label]` rows; floats print with Rust's shortest-roundtrip
/// formatting, so reading them back reproduces the exact bits.
pub fn write_embedding_csv(
    path: &Path,
    embedding: &[PoincarePoint],
    labels: Option<&[u32]>,
) -> Result<()> {
    let mut out = String::from(if labels.is_some() { "index,x,y,label\n" } else { "index,x,y\n" });
    for (i, p) in embedding.iter().enumerate() {
        match labels {
            Some(l) => out.push_str(&format!("{i},{},{},{}\n", p.x, p.y, l[i])),
            None => out.push_str(&format!("{i},{},{}\n", p.x, p.y)),
        }
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_report_json(path: &Path, report: &RunReport) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_atomic(path, json.as_bytes())
}
