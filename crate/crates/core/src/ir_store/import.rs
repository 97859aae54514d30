//! Import of per-direction stereo WAV folders whose file names encode the
//! measurement angles.

use std::path::{Path, PathBuf};

use regex::Regex;

use super::{read_ir_wav, set_dir, IrManifest, IrType, ManifestEntry, MANIFEST_FILE, MANIFEST_SCHEMA};
use crate::error::{Error, Result};
use crate::geometry::{angular_distance, Direction, DUPLICATE_TOL_DEG};

/// How file names map to directions.
#[derive(Debug, Clone)]
pub struct ImportOptions {
    /// Template matched against each file stem. `{az}` and `{el}` capture
    /// signed decimals; either `.` or `,` may separate the fraction.
    pub pattern: String,
    /// The captured elevation is an inclination from the zenith
    /// (`elevation = 90 - value`).
    pub elevation_is_inclination: bool,
    pub azimuth_offset_deg: f64,
    pub elevation_offset_deg: f64,
    /// Copy WAVs into the destination; otherwise the manifest points at the
    /// source files by absolute path.
    pub copy_files: bool,
}

impl Default for ImportOptions {
    fn default() -> Self {
        ImportOptions {
            pattern: "azi_{az}_ele_{el}".into(),
            elevation_is_inclination: false,
            azimuth_offset_deg: 0.0,
            elevation_offset_deg: 0.0,
            copy_files: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImportReport {
    pub manifest: IrManifest,
    pub manifest_path: PathBuf,
    /// Files left out, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

fn compile(pattern: &str) -> Result<Regex> {
    const NUM: &str = r"[-+]?\d+(?:[.,]\d+)?";
    if !pattern.contains("{az}") || !pattern.contains("{el}") {
        return Err(Error::InvalidArgument(format!(
            "import pattern {pattern:?} must contain both {{az}} and {{el}}"
        )));
    }
    let mut re = String::new();
    let mut rest = pattern;
    while let Some(pos) = rest.find('{') {
        re.push_str(&regex::escape(&rest[..pos]));
        let tail = &rest[pos..];
        if let Some(t) = tail.strip_prefix("{az}") {
            re.push_str(&format!("(?P<az>{NUM})"));
            rest = t;
        } else if let Some(t) = tail.strip_prefix("{el}") {
            re.push_str(&format!("(?P<el>{NUM})"));
            rest = t;
        } else {
            re.push_str(r"\{");
            rest = &tail[1..];
        }
    }
    re.push_str(&regex::escape(rest));
    Regex::new(&re).map_err(|e| Error::InvalidArgument(format!("bad import pattern {pattern:?}: {e}")))
}

fn number(s: &str) -> f64 {
    s.replace(',', ".").parse().expect("regex admits only decimals")
}

/// Imports a folder of per-direction stereo IR files into `dest_root`.
///
/// Files are visited in name order. Unparsable names and unreadable or
/// mismatched WAVs are skipped with a warning; when two files resolve to
/// the same direction the first one wins.
pub fn import_sadie(
    source_dir: impl AsRef<Path>,
    dest_root: impl AsRef<Path>,
    subject_id: &str,
    ir_type: IrType,
    sample_rate_hz: u32,
    options: &ImportOptions,
) -> Result<ImportReport> {
    let source_dir = source_dir.as_ref();
    let re = compile(&options.pattern)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(source_dir)
        .map_err(|e| Error::io(source_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|x| x.eq_ignore_ascii_case("wav"))
        })
        .collect();
    files.sort();

    let dest = set_dir(dest_root.as_ref(), subject_id, ir_type, sample_rate_hz);
    let mut skipped = Vec::new();
    let mut accepted: Vec<(Direction, PathBuf)> = Vec::new();
    for file in files {
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let Some(caps) = re.captures(stem) else {
            skipped.push((file, "file name does not match the pattern".to_string()));
            continue;
        };
        let az = number(&caps["az"]) + options.azimuth_offset_deg;
        let raw_el = number(&caps["el"]);
        let el = if options.elevation_is_inclination { 90.0 - raw_el } else { raw_el } + options.elevation_offset_deg;
        let direction = Direction::new(az, el)?;
        if let Some((prev, prev_file)) = accepted
            .iter()
            .find(|(d, _)| angular_distance(*d, direction) < DUPLICATE_TOL_DEG)
        {
            skipped.push((
                file.clone(),
                format!("duplicate of {} ({prev}); first occurrence kept", prev_file.display()),
            ));
            continue;
        }
        if let Err(e) = read_ir_wav(&file, sample_rate_hz) {
            skipped.push((file, e.to_string()));
            continue;
        }
        accepted.push((direction, file));
    }
    for (file, why) in &skipped {
        log::warn!("skipping {}: {why}", file.display());
    }
    if accepted.is_empty() {
        return Err(Error::EmptyImport {
            dir: source_dir.to_path_buf(),
            pattern: options.pattern.clone(),
        });
    }

    std::fs::create_dir_all(&dest).map_err(|e| Error::io(&dest, e))?;
    let mut entries = Vec::with_capacity(accepted.len());
    for (direction, file) in accepted {
        let path = if options.copy_files {
            let name = PathBuf::from(file.file_name().expect("listed files have names"));
            let target = dest.join(&name);
            std::fs::copy(&file, &target).map_err(|e| Error::io(&target, e))?;
            name
        } else {
            file.canonicalize().map_err(|e| Error::io(&file, e))?
        };
        entries.push(ManifestEntry {
            azimuth: direction.azimuth(),
            elevation: direction.elevation(),
            path,
        });
    }
    let manifest = IrManifest {
        schema: MANIFEST_SCHEMA,
        subject_id: subject_id.to_string(),
        ir_type,
        sample_rate_hz,
        entries,
    };
    let manifest_path = dest.join(MANIFEST_FILE);
    manifest.write(&manifest_path)?;
    Ok(ImportReport {
        manifest,
        manifest_path,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{write_wav, AudioBuffer, WavEncoding};
    use crate::ir_store::load_ir_set;

    fn stereo(rate: u32, tag: f64) -> AudioBuffer {
        AudioBuffer::stereo(rate, vec![tag, 0.0, 0.25], vec![0.0, tag, -0.25]).unwrap()
    }

    #[test]
    fn pattern_compiles_to_anchored_captures() {
        let re = compile("azi_{az}_ele_{el}").unwrap();
        let c = re.captures("SADIE_azi_12,5_ele_-30_DFC").unwrap();
        assert_eq!(number(&c["az"]), 12.5);
        assert_eq!(number(&c["el"]), -30.0);
        assert!(compile("azi_{az}").is_err());
        assert!(compile("a.{az}.{el}").unwrap().captures("axb").is_none());
    }

    #[test]
    fn skips_unparsable_names_and_keeps_first_duplicate() {
        let src = tempfile::tempdir().unwrap();
        let dst = tempfile::tempdir().unwrap();
        for az in 0..9 {
            let name = format!("azi_{}_ele_0.wav", az * 40);
            write_wav(src.path().join(name), &stereo(48000, az as f64 / 10.0), WavEncoding::Float32).unwrap();
        }
        write_wav(src.path().join("readme.wav"), &stereo(48000, 0.9), WavEncoding::Float32).unwrap();
        write_wav(src.path().join("azi_360_ele_0.wav"), &stereo(48000, 0.9), WavEncoding::Float32).unwrap();
        let r = import_sadie(src.path(), dst.path(), "H3", IrType::Brir, 48000, &ImportOptions::default()).unwrap();
        assert_eq!(r.manifest.entries.len(), 9);
        assert_eq!(r.skipped.len(), 2);
        assert!(r.skipped.iter().any(|(p, why)| p.ends_with("readme.wav") && why.contains("pattern")));
        // "azi_0_" sorts before "azi_360_"
        assert!(r.skipped.iter().any(|(p, why)| p.ends_with("azi_360_ele_0.wav") && why.contains("duplicate")));
        let set = load_ir_set(dst.path(), "H3", IrType::Brir, 48000).unwrap();
        assert_eq!(set.len(), 9);
        assert_eq!(set.point(0).left[0], 0.0);
    }

    #[test]
    fn inclination_and_reference_mode() {
        let src = tempfile::tempdir().unwrap();
        let dst = tempfile::tempdir().unwrap();
        for (i, (az, inc)) in [(0, 90), (90, 90), (0, 0), (180, 120)].iter().enumerate() {
            let name = format!("pos_{az}.{inc}.wav");
            write_wav(src.path().join(name), &stereo(44100, i as f64 * 0.1), WavEncoding::Pcm24).unwrap();
        }
        let opts = ImportOptions {
            pattern: "pos_{az}.{el}".into(),
            elevation_is_inclination: true,
            copy_files: false,
            ..Default::default()
        };
        let r = import_sadie(src.path(), dst.path(), "D1", IrType::Hrir, 44100, &opts).unwrap();
        let els: Vec<f64> = r.manifest.entries.iter().map(|e| e.elevation).collect();
        assert!(els.contains(&90.0) && els.contains(&-30.0) && els.contains(&0.0));
        assert!(r.manifest.entries.iter().all(|e| e.path.is_absolute()));
        assert_eq!(load_ir_set(dst.path(), "D1", IrType::Hrir, 44100).unwrap().len(), 4);
    }

    #[test]
    fn nothing_matching_is_an_empty_import() {
        let src = tempfile::tempdir().unwrap();
        let dst = tempfile::tempdir().unwrap();
        write_wav(src.path().join("x.wav"), &stereo(48000, 0.1), WavEncoding::Float32).unwrap();
        let err = import_sadie(src.path(), dst.path(), "H3", IrType::Brir, 48000, &ImportOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyImport { .. }));
    }

    #[test]
    fn mismatched_rate_is_skipped() {
        let src = tempfile::tempdir().unwrap();
        let dst = tempfile::tempdir().unwrap();
        write_wav(src.path().join("azi_0_ele_0.wav"), &stereo(44100, 0.1), WavEncoding::Float32).unwrap();
        write_wav(src.path().join("azi_90_ele_0.wav"), &stereo(48000, 0.1), WavEncoding::Float32).unwrap();
        let r = import_sadie(src.path(), dst.path(), "H3", IrType::Brir, 48000, &ImportOptions::default()).unwrap();
        assert_eq!(r.manifest.entries.len(), 1);
        assert!(r.skipped[0].1.contains("44100"));
    }
}
