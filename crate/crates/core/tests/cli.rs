use std::path::Path;
use std::process::{Command, Output};

use spatialmix::audio::read_wav;

fn spatialmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatialmix")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scenes() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

#[test]
fn layouts_lists_channels() {
    let out = spatialmix(&["layouts", "7.1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[3].contains("LFE"));

    let all = String::from_utf8(spatialmix(&["layouts"]).stdout).unwrap();
    for name in spatialmix::layouts::SUPPORTED_LAYOUTS {
        assert!(all.lines().any(|l| l == name), "{name}");
    }
}

#[test]
fn unknown_layout_fails_with_message() {
    let out = spatialmix(&["layouts", "3.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn synth_then_mix_binaural_and_stereo() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    assert!(spatialmix(&["synth-irs", "--data-root", s(&root)]).status.success());
    let scene = scenes().join("four_tracks.toml");

    let binaural = dir.path().join("out/mix.wav");
    let out = spatialmix(&["mix", s(&scene), "--data-root", s(&root), "-o", s(&binaural), "--float"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mixed = read_wav(&binaural).unwrap();
    assert_eq!(mixed.num_channels(), 2);
    assert_eq!(mixed.sample_rate(), 48000);
    assert!(mixed.channel(0).iter().any(|&x| x != 0.0));

    let stereo = dir.path().join("stereo.wav");
    let out = spatialmix(&["mix", s(&scene), "--stereo", "--data-root", s(&root), "-o", s(&stereo), "--normalize", "peak", "--float"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let st = read_wav(&stereo).unwrap();
    let peak = (0..2).flat_map(|c| st.channel(c).iter().copied()).fold(0.0f64, |m, x| m.max(x.abs()));
    assert!((peak - 1.0).abs() < 1e-6, "{peak}");
}

#[test]
fn mix_without_ir_set_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = spatialmix(&[
        "mix",
        s(&scenes().join("four_tracks.toml")),
        "--data-root",
        s(&dir.path().join("empty")),
        "-o",
        s(&dir.path().join("x.wav")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("x.wav").exists());
}

#[test]
fn render_surround_checks_channel_count() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    assert!(spatialmix(&["synth-irs", "--data-root", s(&root)]).status.success());
    let program = spatialmix::audio::AudioBuffer::new(48000, vec![vec![0.1; 64]; 6]).unwrap();
    let input = dir.path().join("five_one.wav");
    spatialmix::audio::write_wav(&input, &program, spatialmix::audio::WavEncoding::Float32).unwrap();

    let ok = dir.path().join("bin.wav");
    let out = spatialmix(&["render-surround", s(&input), "--input-layout", "5.1", "--subject", "SYNTH", "--layout", "7.1.4", "--data-root", s(&root), "-o", s(&ok)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_wav(&ok).unwrap().num_channels(), 2);

    let out = spatialmix(&["render-surround", s(&input), "--input-layout", "7.1", "--subject", "SYNTH", "--data-root", s(&root), "-o", s(&dir.path().join("bad.wav"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn triangulate_prints_plan() {
    let out = spatialmix(&["triangulate", "--azimuth", "77", "--elevation", "33", "--distribution", "lebedev50"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("enclosing triangle"), "{text}");
    assert!(text.contains("sum 1.000000"), "{text}");
}

#[test]
fn dataset_writes_manifest_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    assert!(spatialmix(&["synth-irs", "--data-root", s(&root)]).status.success());
    let grid = dir.path().join("grid.toml");
    std::fs::write(
        &grid,
        format!(
            "schema = 1\nazimuths = [0, 90]\nelevations = [0]\nsubject_ids = [\"SYNTH\"]\nir_types = [\"HRIR\"]\nlayouts = [\"none\"]\nmodes = [\"nearest\"]\nlevels = [0.5]\nreverb_amounts = [0.0]\nreverb_types = [1]\nsample_rates = [48000]\nsources = [{:?}]\n",
            s(&scenes().join("audio/bass.wav"))
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("ds");
    let run = || spatialmix(&["dataset", s(&grid), "--data-root", s(&root), "-o", s(&out_dir)]);
    assert!(run().status.success());
    let manifest = std::fs::read_to_string(out_dir.join(spatialmix::cli::dataset::DATASET_MANIFEST)).unwrap();
    let lines: Vec<&str> = manifest.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0].split('\t').count(), spatialmix::cli::dataset::MANIFEST_COLUMNS.len());
    assert!(run().status.success());
    assert_eq!(std::fs::read_to_string(out_dir.join(spatialmix::cli::dataset::DATASET_MANIFEST)).unwrap(), manifest);
}
