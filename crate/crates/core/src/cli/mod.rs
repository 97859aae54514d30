//! The `spatialmix` command line.

pub mod dataset;
pub mod plot;
pub mod scene;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::audio::{read_wav, write_wav, WavEncoding};
use crate::dsp::ReverbBank;
use crate::error::{Error, Result};
use crate::geometry::{find_enclosing_triangle, Direction, DirectionGrid};
use crate::interpolation::{plan_on_grid, InterpolationMode, InterpolationPlan, PlanOptions, DEFAULT_SNAP_DEG};
use crate::ir_store::{import_sadie, load_ir_set, synthesize_ir_set, write_ir_set, Distribution, ImportOptions, IrType};
use crate::layouts::{get_layout, speaker_directions, SUPPORTED_LAYOUTS};
use crate::mixer::{mix_tracks_binaural, mix_tracks_stereo, render_surround_to_binaural, MixConfig, MixResult};

use dataset::{run_dataset, DatasetGrid, DatasetOptions, DEFAULT_JOB_CAP};
use scene::load_scene;

#[derive(Debug, Parser)]
#[command(name = "spatialmix", version, about = "Binaural mixing, surround simulation and dataset generation")]
pub struct Cli {
    /// Root of the IR data tree (`<root>/<subject>/<HRIR|BRIR>/<rate>/`).
    #[arg(long, global = true, default_value = "data")]
    pub data_root: PathBuf,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Peak-normalize the result.
    #[arg(long, default_value = "off")]
    pub normalize: String,

    /// Write 32-bit float instead of 24-bit PCM.
    #[arg(long)]
    pub float: bool,
}

impl OutputArgs {
    fn encoding(&self) -> WavEncoding {
        if self.float {
            WavEncoding::Float32
        } else {
            WavEncoding::Pcm24
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mix the tracks of a scene file to a binaural (or panned stereo) WAV.
    Mix {
        scene: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Override the scene's interpolation mode.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        subject: Option<String>,
        #[arg(long)]
        ir_type: Option<String>,
        #[arg(long)]
        rate: Option<u32>,
        /// Override the scene's layout; `none` for a direct render.
        #[arg(long)]
        layout: Option<String>,
        /// Seed of the synthetic reverbs.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the constant-power stereo mixer and each track's `pan`.
        #[arg(long)]
        stereo: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Render a channel-encoded surround WAV to binaural.
    RenderSurround {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        input_layout: String,
        /// Defaults to the input layout.
        #[arg(long)]
        layout: Option<String>,
        #[arg(long)]
        subject: String,
        #[arg(long, default_value = "HRIR")]
        ir_type: String,
        /// Defaults to the input file's rate.
        #[arg(long)]
        rate: Option<u32>,
        #[arg(long, default_value = "auto")]
        mode: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Render every combination of a dataset grid file.
    Dataset {
        grid: PathBuf,
        #[arg(short, long)]
        output_dir: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Run grids larger than the job cap.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = DEFAULT_JOB_CAP)]
        job_cap: usize,
        /// Override the grid's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Find the triangle enclosing a direction and plot the triangulation.
    Triangulate {
        #[arg(long, allow_hyphen_values = true)]
        azimuth: f64,
        #[arg(long, allow_hyphen_values = true)]
        elevation: f64,
        /// SVG output path.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Use a layout's speaker directions.
        #[arg(long, conflicts_with_all = ["distribution", "subject"])]
        layout: Option<String>,
        /// Use a synthetic point distribution (`lebedev50`, `ring:<step>:<el>,...`).
        #[arg(long, conflicts_with = "subject")]
        distribution: Option<String>,
        /// Use the directions of a stored IR set.
        #[arg(long)]
        subject: Option<String>,
        #[arg(long, default_value = "HRIR")]
        ir_type: String,
        #[arg(long, default_value_t = 48000)]
        rate: u32,
        #[arg(long, default_value_t = DEFAULT_SNAP_DEG)]
        snap: f64,
    },
    /// Import a folder of per-direction stereo WAVs into the data root.
    ImportSadie {
        source: PathBuf,
        #[arg(long)]
        subject: String,
        #[arg(long, default_value = "HRIR")]
        ir_type: String,
        #[arg(long, default_value_t = 48000)]
        rate: u32,
        /// File-stem template with `{az}` and `{el}`.
        #[arg(long, default_value = "azi_{az}_ele_{el}")]
        pattern: String,
        /// The `{el}` value is an inclination from the zenith.
        #[arg(long)]
        inclination: bool,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        azimuth_offset: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        elevation_offset: f64,
        /// Reference the source files instead of copying them.
        #[arg(long)]
        link: bool,
    },
    /// Write a synthetic IR set into the data root.
    SynthIrs {
        #[arg(long, default_value = "lebedev50")]
        distribution: String,
        #[arg(long, default_value = "SYNTH")]
        subject: String,
        #[arg(long, default_value = "HRIR")]
        ir_type: String,
        #[arg(long, default_value_t = 48000)]
        rate: u32,
        #[arg(long, default_value_t = 256)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print speaker layouts (all, or one by name).
    Layouts { name: Option<String> },
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let root = &cli.data_root;
    match &cli.command {
        Command::Mix { scene, output, mode, subject, ir_type, rate, layout, seed, stereo, out } => {
            let mut s = load_scene(scene)?;
            let c = &mut s.config;
            if let Some(m) = mode {
                c.interpolation_mode = m.parse()?;
            }
            if let Some(v) = subject {
                c.subject_id = v.clone();
            }
            if let Some(v) = ir_type {
                c.ir_type = v.parse()?;
            }
            if let Some(v) = rate {
                c.sample_rate_hz = *v;
            }
            if let Some(l) = layout {
                c.speaker_layout = (!l.eq_ignore_ascii_case("none")).then(|| l.clone());
            }
            if out.normalize != "off" {
                c.normalize = out.normalize.parse()?;
            }
            if let Some(l) = &c.speaker_layout {
                get_layout(l)?;
            }
            let reverbs = ReverbBank::load(root, c.sample_rate_hz, *seed)?;
            let result = if *stereo {
                mix_tracks_stereo(&s.tracks, &s.pans, &s.config, &reverbs)?
            } else {
                let set = load_ir_set(root, &c.subject_id, c.ir_type, c.sample_rate_hz)?;
                mix_tracks_binaural(&s.tracks, &s.config, &set, &reverbs)?
            };
            if *stereo {
                for (t, p) in s.tracks.iter().zip(&s.pans) {
                    println!("{}: pan {p}", t.name);
                }
            }
            report_mix(&result, s.config.speaker_layout.as_deref())?;
            write_output(output, &result, out.encoding())
        }
        Command::RenderSurround { input, output, input_layout, layout, subject, ir_type, rate, mode, out } => {
            let program = read_wav(input)?;
            let ir_type: IrType = ir_type.parse()?;
            let rate = rate.unwrap_or(program.sample_rate());
            let output_layout = layout.as_deref().unwrap_or(input_layout);
            let input_l = get_layout(input_layout)?;
            get_layout(output_layout)?;
            if program.num_channels() != input_l.len() {
                return Err(Error::ChannelCount {
                    layout: input_l.name.to_string(),
                    expected: input_l.len(),
                    actual: program.num_channels(),
                });
            }
            let mut cfg = MixConfig::new(subject.clone(), rate, ir_type);
            cfg.interpolation_mode = mode.parse()?;
            cfg.normalize = out.normalize.parse()?;
            let set = load_ir_set(root, subject, ir_type, rate)?;
            let result = render_surround_to_binaural(&program, input_layout, output_layout, &cfg, &set)?;
            report_mix(&result, Some(output_layout))?;
            write_output(output, &result, out.encoding())
        }
        Command::Dataset { grid, output_dir, jobs, force, job_cap, seed } => {
            let mut g = DatasetGrid::read(grid)?;
            if let Some(s) = seed {
                g.seed = *s;
            }
            let base = grid.parent().unwrap_or(Path::new("."));
            let report = run_dataset(
                &g,
                base,
                &DatasetOptions {
                    data_root: root.clone(),
                    out_dir: output_dir.clone(),
                    jobs: *jobs,
                    force: *force,
                    job_cap: *job_cap,
                },
            )?;
            let failed = report.failed();
            println!(
                "{} jobs, {} ok, {failed} failed; manifest {}",
                report.records.len(),
                report.records.len() - failed,
                report.manifest_path.display()
            );
            Ok(if failed > 0 { 1 } else { 0 })
        }
        Command::Triangulate { azimuth, elevation, plot, layout, distribution, subject, ir_type, rate, snap } => {
            let points = if let Some(l) = layout {
                speaker_directions(&get_layout(l)?)
            } else if let Some(s) = subject {
                load_ir_set(root, s, ir_type.parse()?, *rate)?.grid().directions().to_vec()
            } else {
                distribution.as_deref().unwrap_or("lebedev50").parse::<Distribution>()?.directions()?
            };
            let query = Direction::new(*azimuth, *elevation)?;
            let grid = DirectionGrid::new(points);
            let t = grid.triangulation()?;
            println!("{} points, {} triangles", grid.len(), t.triangles().len());
            let enclosing = find_enclosing_triangle(t, query);
            match &enclosing {
                Ok(e) => {
                    println!(
                        "enclosing triangle {:?} (rotated azimuth {}, rotated elevation {})",
                        e.vertex_indices, e.rotated_azimuth, e.rotated_elevation
                    );
                    for &i in &e.vertex_indices {
                        println!("  #{i} {}", grid.direction(i));
                    }
                }
                Err(e) => println!("{e}"),
            }
            let options = PlanOptions { snap_threshold_deg: *snap, ..PlanOptions::default() };
            let p = plan_on_grid(&grid, query, InterpolationMode::ThreePoint, &options)?;
            print_plan("query", &grid, &p);
            if let Some(path) = plot {
                let highlight: Vec<usize> = p.entries.iter().map(|e| e.0).collect();
                let shown = if p.entries.len() == 1 { None } else { enclosing.as_ref().ok() };
                let svg = plot::triangulation_svg(t, query, shown, &highlight);
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                }
                std::fs::write(path, svg).map_err(|e| Error::io(path, e))?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::ImportSadie { source, subject, ir_type, rate, pattern, inclination, azimuth_offset, elevation_offset, link } => {
            let opts = ImportOptions {
                pattern: pattern.clone(),
                elevation_is_inclination: *inclination,
                azimuth_offset_deg: *azimuth_offset,
                elevation_offset_deg: *elevation_offset,
                copy_files: !*link,
            };
            let r = import_sadie(source, root, subject, ir_type.parse()?, *rate, &opts)?;
            println!(
                "imported {} directions, skipped {}; manifest {}",
                r.manifest.entries.len(),
                r.skipped.len(),
                r.manifest_path.display()
            );
            Ok(0)
        }
        Command::SynthIrs { distribution, subject, ir_type, rate, length, seed } => {
            let set = synthesize_ir_set(&distribution.parse()?, *rate, *length, *seed)?.relabel(subject.clone(), ir_type.parse()?);
            write_ir_set(&set, root)?;
            println!(
                "wrote {} {} {} Hz: {} points of {} samples under {}",
                set.subject_id(),
                set.ir_type(),
                set.sample_rate(),
                set.len(),
                set.ir_len(),
                root.display()
            );
            Ok(0)
        }
        Command::Layouts { name } => {
            let names: Vec<&str> = match name {
                Some(n) => vec![n.as_str()],
                None => SUPPORTED_LAYOUTS.to_vec(),
            };
            for n in names {
                let l = get_layout(n)?;
                println!("{}\nchannel\tlabel\tazimuth\televation", l.name);
                for line in l.to_string().lines().skip(1) {
                    println!("{line}");
                }
            }
            Ok(0)
        }
    }
}

fn print_plan(name: &str, grid: &DirectionGrid, p: &InterpolationPlan) {
    let parts: Vec<String> = p
        .entries
        .iter()
        .map(|&(i, w)| format!("#{i} {} {w:.6}", grid.direction(i)))
        .collect();
    println!(
        "{name}: {} [{}] sum {:.6}, achieved {} error {:.4} deg",
        p.mode_used,
        parts.join(", "),
        p.weight_sum(),
        p.achieved_direction,
        p.achieved_error_deg
    );
    for w in &p.warnings {
        println!("  warning: {w}");
    }
}

fn report_mix(r: &MixResult, layout: Option<&str>) -> Result<()> {
    let layout = layout.map(get_layout).transpose()?;
    for t in &r.tracks {
        let parts: Vec<String> = t
            .plan
            .entries
            .iter()
            .map(|&(i, w)| match (&t.speaker_channels, &layout) {
                (Some(ch), Some(l)) => format!("{} {w:.6}", l.channels[ch[i]].label),
                _ => format!("#{i} {w:.6}"),
            })
            .collect();
        println!(
            "{}: {} [{}] achieved {} error {:.4} deg",
            t.name,
            t.plan.mode_used,
            parts.join(", "),
            t.plan.achieved_direction,
            t.plan.achieved_error_deg
        );
    }
    if r.gain != 1.0 {
        println!("normalized by {:.6}", r.gain);
    }
    if r.clipped {
        println!("warning: output peaks at {:.4} and clips", r.peak);
    }
    Ok(())
}

fn write_output(path: &Path, r: &MixResult, encoding: WavEncoding) -> Result<i32> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_wav(path, &r.audio, encoding)?;
    println!("wrote {} ({} frames)", path.display(), r.audio.len());
    Ok(0)
}
