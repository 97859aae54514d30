use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::IrType;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const MANIFEST_SCHEMA: u32 = 1;

/// One measured direction and the stereo WAV holding its IR pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub azimuth: f64,
    pub elevation: f64,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
}

/// Index of an on-disk IR set.
///
/// ```text
/// schema=1<TAB>subject=H3<TAB>ir_type=BRIR<TAB>rate=48000
/// 0<TAB>0<TAB>ir_00000.wav
/// 45<TAB>35.264389682<TAB>ir_00001.wav
/// ```
///
/// Blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct IrManifest {
    pub schema: u32,
    pub subject_id: String,
    pub ir_type: IrType,
    pub sample_rate_hz: u32,
    pub entries: Vec<ManifestEntry>,
}

impl IrManifest {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format(origin, "empty manifest"))?;

        let (mut schema, mut subject, mut ir_type, mut rate) = (None, None, None, None);
        for field in header.split('\t') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::format(origin, format!("bad header field {field:?}")))?;
            match key.trim() {
                "schema" => schema = value.trim().parse::<u32>().ok(),
                "subject" => subject = Some(value.trim().to_string()),
                "ir_type" => ir_type = Some(value.trim().parse::<IrType>()?),
                "rate" => rate = value.trim().parse::<u32>().ok(),
                other => return Err(Error::format(origin, format!("unknown header key {other:?}"))),
            }
        }
        let schema = schema.ok_or_else(|| Error::format(origin, "header lacks schema"))?;
        if schema != MANIFEST_SCHEMA {
            return Err(Error::format(origin, format!("unsupported manifest schema {schema}")));
        }
        let missing = |what: &str| Error::format(origin, format!("header lacks {what}"));
        let mut manifest = IrManifest {
            schema,
            subject_id: subject.ok_or_else(|| missing("subject"))?,
            ir_type: ir_type.ok_or_else(|| missing("ir_type"))?,
            sample_rate_hz: rate.ok_or_else(|| missing("rate"))?,
            entries: Vec::new(),
        };
        for (n, line) in lines {
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |why: &str| Error::format(origin, format!("line {}: {why}", n + 1));
            if cols.len() != 3 {
                return Err(bad("expected azimuth, elevation and path separated by tabs"));
            }
            let azimuth = cols[0].trim().parse::<f64>().map_err(|_| bad("bad azimuth"))?;
            let elevation = cols[1].trim().parse::<f64>().map_err(|_| bad("bad elevation"))?;
            manifest.entries.push(ManifestEntry {
                azimuth,
                elevation,
                path: PathBuf::from(cols[2]),
            });
        }
        Ok(manifest)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Serializes with shortest round-trip float formatting.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "schema={}\tsubject={}\tir_type={}\trate={}\n",
            self.schema, self.subject_id, self.ir_type, self.sample_rate_hz
        );
        for e in &self.entries {
            let _ = writeln!(s, "{}\t{}\t{}", e.azimuth, e.elevation, e.path.display());
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
