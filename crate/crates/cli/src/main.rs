//! `trajproto` command-line pipeline: synth/ingest -> align -> quantize -> report/export.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use trajproto::align::{align_all, train_alignment, AlignTrainConfig};
use trajproto::datagen::{generate_sgtd, write_labels_csv, SgtdConfig};
use trajproto::ingest::{build_dataset, dataset_to_tracks, parse_csv, tracks_to_dataset, write_csv, IngestConfig};
use trajproto::normalize::{normalize_dataset, NormalizedBatch, DEFAULT_EPS_DISP};
use trajproto::persist::{fmt_real, ModelFile, ModelKind};
use trajproto::quantize::{per_prototype_error, quantization_error, refine_traced, train_lvq, LvqConfig};
use trajproto::report::ReportSummary;
use trajproto::svg::{coordinates_csv, render, Series, SvgOptions};
use trajproto::{AlignmentModel, Dataset, Error, PrototypeSet};

#[derive(Parser)]
#[command(name = "trajproto", version, about = "Trajectory prototype discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the labeled synthetic dataset.
    Synth(SynthArgs),
    /// Decimate and segment `track_id,frame,x,y` tracks into fixed-length samples.
    Ingest(IngestArgs),
    /// Train the alignment regressor and prototype.
    Align(AlignArgs),
    /// Train LVQ prototypes on aligned samples and refine them.
    Quantize(QuantizeArgs),
    /// Print a quantization report.
    Report(ReportArgs),
    /// Render trajectories or prototypes to SVG plus a coordinate CSV.
    Export(ExportArgs),
}

#[derive(clap::Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    /// Label CSV path; defaults to `<out stem>.labels.csv`.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 31)]
    m: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 125)]
    constant: usize,
    #[arg(long, default_value_t = 33)]
    accelerated: usize,
    #[arg(long, default_value_t = 29)]
    curve_left: usize,
    #[arg(long, default_value_t = 13)]
    curve_right: usize,
}

#[derive(clap::Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Keep every n-th frame.
    #[arg(long, default_value_t = 5)]
    factor: usize,
    #[arg(long, default_value_t = 54)]
    m: usize,
    /// Window stride in decimated frames; defaults to `--m`.
    #[arg(long)]
    stride: Option<usize>,
    /// Split tracks at frame gaps larger than this; defaults to `--factor`.
    #[arg(long)]
    max_gap: Option<i64>,
}

#[derive(clap::Args)]
struct AlignArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Alignment model file.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch `epoch,loss` CSV; defaults to `<out stem>.loss.csv`.
    #[arg(long)]
    loss_out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    s_min: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EPS_DISP)]
    eps_disp: f64,
}

#[derive(clap::Args)]
struct QuantizeArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Alignment model produced by `align`.
    #[arg(long)]
    model: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    delta_min: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EPS_DISP)]
    eps_disp: f64,
}

#[derive(clap::Args)]
struct ReportArgs {
    /// Refined prototype file, or a `quantize` output directory.
    path: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Raw,
    Normalized,
    Aligned,
    Prototypes,
}

#[derive(clap::Args)]
struct ExportArgs {
    #[arg(long, value_enum)]
    what: What,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Alignment model, for `--what aligned`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Prototype file, for `--what prototypes`.
    #[arg(long)]
    prototypes: Option<PathBuf>,
    /// SVG path; the coordinate CSV goes next to it.
    #[arg(long)]
    out: PathBuf,
    /// Marker spacing for prototypes; 0 disables markers.
    #[arg(long, default_value_t = 1)]
    marker_every: usize,
    #[arg(long, default_value_t = DEFAULT_EPS_DISP)]
    eps_disp: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Ingest(a) => ingest(a),
        Command::Align(a) => align(a),
        Command::Quantize(a) => quantize(a),
        Command::Report(a) => report(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for usage and I/O problems, 2 for bad data, 3 for diverged training.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::DivergedTraining { .. } => 3,
                Error::InvalidConfig(_) | Error::Io(_) => 1,
                _ => 2,
            };
        }
        if cause.is::<io::Error>() {
            return 1;
        }
    }
    1
}

/// `dir/stem.suffix` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let tracks = parse_csv(io::BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    if tracks.is_empty() {
        return Err(Error::EmptyResult(format!("{} holds no trajectories", path.display())).into());
    }
    tracks_to_dataset(tracks).with_context(|| format!("reading {}", path.display()))
}

fn dataset_csv(ds: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&dataset_to_tracks(ds), &mut buf)?;
    Ok(buf)
}

fn load_file(path: &Path, kind: ModelKind) -> Result<ModelFile> {
    let f = ModelFile::load(path).with_context(|| format!("loading {}", path.display()))?;
    f.expect_kind(kind)
        .with_context(|| format!("loading {}", path.display()))
}

fn normalized(ds: &Dataset, eps: f64) -> Result<NormalizedBatch<f64>> {
    let batch = normalize_dataset(ds, eps)?;
    if !batch.rejected.is_empty() {
        eprintln!("rejected {} degenerate samples", batch.rejected.len());
    }
    Ok(batch)
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = SgtdConfig {
        constant: a.constant,
        accelerated: a.accelerated,
        curve_left: a.curve_left,
        curve_right: a.curve_right,
        m: a.m,
        seed: a.seed,
        ..SgtdConfig::default()
    };
    let data = generate_sgtd(&cfg)?;
    let labels_path = a.labels.unwrap_or_else(|| sibling(&a.out, "labels.csv"));
    let mut labels = Vec::new();
    write_labels_csv(&data, &mut labels)?;
    write(&a.out, dataset_csv(&data.dataset)?)?;
    write(&labels_path, labels)?;
    println!(
        "wrote {} samples (constant {}, accelerated {}, curve_left {}, curve_right {}) with M = {}",
        data.dataset.len(),
        cfg.constant,
        cfg.accelerated,
        cfg.curve_left,
        cfg.curve_right,
        cfg.m
    );
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let cfg = IngestConfig {
        decimation_factor: a.factor,
        segment_length: a.m,
        stride: a.stride.unwrap_or(a.m),
        max_frame_gap: a.max_gap,
    };
    cfg.validate()?;
    let file = fs::File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let tracks =
        parse_csv::<f64, _>(io::BufReader::new(file)).with_context(|| format!("reading {}", a.input.display()))?;
    let ds = build_dataset(&tracks, &cfg)?;
    write(&a.out, dataset_csv(&ds)?)?;
    println!("{} tracks -> {} samples of {} points", tracks.len(), ds.len(), ds.m());
    Ok(())
}

fn align(a: AlignArgs) -> Result<()> {
    let d = AlignTrainConfig::default();
    let cfg = AlignTrainConfig {
        learning_rate: a.lr.unwrap_or(d.learning_rate),
        epochs: a.epochs.unwrap_or(d.epochs),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        seed: a.seed.unwrap_or(d.seed),
        s_min: a.s_min.unwrap_or(d.s_min),
        hidden_width: a.hidden.unwrap_or(d.hidden_width),
    };
    cfg.validate()?;
    let ds = read_dataset(&a.dataset)?;
    let batch = normalized(&ds, a.eps_disp)?;
    let run = train_alignment(&batch.samples, &cfg)?;

    let mut file = run.model.to_model_file();
    file.push_config("config", &cfg.echo());
    file.push("config.eps_disp", format!("{:?}", a.eps_disp));
    let mut losses = String::from("epoch,loss\n");
    for (i, l) in run.loss_history.iter().enumerate() {
        let _ = writeln!(losses, "{},{}", i + 1, fmt_real(*l));
    }
    write(&a.out, file.to_text())?;
    write(&a.loss_out.unwrap_or_else(|| sibling(&a.out, "loss.csv")), losses)?;
    let last = run.loss_history.last().copied().unwrap_or(f64::NAN);
    println!("final loss {last:.6e}; rejected {} samples", batch.rejected.len());
    Ok(())
}

fn quantize(a: QuantizeArgs) -> Result<()> {
    let d = LvqConfig::default();
    let cfg = LvqConfig {
        k: a.k,
        gamma: a.gamma.unwrap_or(d.gamma),
        learning_rate: a.lr.unwrap_or(d.learning_rate),
        epochs: a.epochs.unwrap_or(d.epochs),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        seed: a.seed.unwrap_or(d.seed),
        refine_tau: a.tau.unwrap_or(d.refine_tau),
        refine_delta_min: a.delta_min.unwrap_or(d.refine_delta_min),
    };
    cfg.validate()?;
    let model_file = load_file(&a.model, ModelKind::Alignment)?;
    let model = AlignmentModel::from_model_file(&model_file)?;
    let ds = read_dataset(&a.dataset)?;
    let batch = normalized(&ds, a.eps_disp)?;
    if batch.samples.len() < cfg.k {
        bail!(Error::InvalidConfig(format!(
            "K = {} exceeds the {} usable samples",
            cfg.k,
            batch.samples.len()
        )));
    }
    let aligned = align_all(&model, &batch.samples)?;
    let result = train_lvq(&aligned, &cfg)?;
    let refined = refine_traced(&result, &aligned, cfg.refine_tau, cfg.refine_delta_min)?;
    let set = refined.prototypes;

    let mut echo: Vec<(String, String)> = model_file
        .section("config")
        .into_iter()
        .map(|(k, v)| (format!("align.{k}"), v))
        .collect();
    echo.extend(cfg.echo().into_iter().map(|(k, v)| (format!("lvq.{k}"), v)));

    let summary = ReportSummary::new(
        &set,
        &per_prototype_error(&set, &aligned)?,
        batch.rejected.len(),
        cfg.k,
        quantization_error(&set, &aligned)?,
        echo.clone(),
    )?;
    let mut unrefined_file = result.prototypes.to_model_file();
    unrefined_file.push_config("config", &echo);
    let mut refined_file = set.to_model_file();
    refined_file.push_config("config", &echo);
    summary.write_into(&mut refined_file);

    let assignments = trajproto::quantize::assign_all(&set, &aligned)?;
    let mut csv = String::from("sample_id,prototype_index\n");
    for (s, k) in aligned.iter().zip(&assignments) {
        let _ = writeln!(csv, "{},{k}", s.id());
    }

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write(&a.out.join("prototypes.txt"), unrefined_file.to_text())?;
    write(&a.out.join("refined.txt"), refined_file.to_text())?;
    write(&a.out.join("assignments.csv"), csv)?;
    write(&a.out.join("report.txt"), summary.to_key_values())?;
    print!("{}", summary.to_table());
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let path = if a.path.is_dir() {
        a.path.join("refined.txt")
    } else {
        a.path
    };
    let file = load_file(&path, ModelKind::PrototypeSet)?;
    let summary = ReportSummary::from_model_file(&file).with_context(|| format!("reading {}", path.display()))?;
    // Assembled first so a failure prints nothing.
    let out = format!("{}\n{}", summary.to_table(), summary.to_key_values());
    print!("{out}");
    Ok(())
}

fn require<'a>(opt: &'a Option<PathBuf>, flag: &str, what: &str) -> Result<&'a PathBuf> {
    match opt {
        Some(p) => Ok(p),
        None => bail!(Error::InvalidConfig(format!("--what {what} needs {flag}"))),
    }
}

fn to_series(id: &str, points: &[trajproto::Point2]) -> Series {
    Series {
        id: id.to_string(),
        points: points.to_vec(),
    }
}

fn export(a: ExportArgs) -> Result<()> {
    let (series, markers, title): (Vec<Series>, _, _) = match a.what {
        What::Raw => {
            let ds = read_dataset(require(&a.dataset, "--dataset", "raw")?)?;
            let s = ds.samples().iter().map(|t| to_series(t.id(), t.points())).collect();
            (s, None, "raw")
        }
        What::Normalized => {
            let ds = read_dataset(require(&a.dataset, "--dataset", "normalized")?)?;
            let batch = normalized(&ds, a.eps_disp)?;
            let s = batch
                .samples
                .iter()
                .map(|t| to_series(t.source_id(), t.points()))
                .collect();
            (s, None, "normalized")
        }
        What::Aligned => {
            let ds = read_dataset(require(&a.dataset, "--dataset", "aligned")?)?;
            let model_path = require(&a.model, "--model", "aligned")?;
            let model = AlignmentModel::from_model_file(&load_file(model_path, ModelKind::Alignment)?)?;
            let batch = normalized(&ds, a.eps_disp)?;
            let aligned = align_all(&model, &batch.samples)?;
            let s = aligned.iter().map(|t| to_series(t.id(), t.points())).collect();
            (s, None, "aligned")
        }
        What::Prototypes => {
            let path = require(&a.prototypes, "--prototypes", "prototypes")?;
            let set = PrototypeSet::from_model_file(&load_file(path, ModelKind::PrototypeSet)?)?;
            let s = set.prototypes().iter().map(|t| to_series(t.id(), t.points())).collect();
            (s, Some(a.marker_every), "prototypes")
        }
    };
    let opts = SvgOptions {
        marker_every: markers.filter(|&k| k > 0),
        title: Some(title.to_string()),
    };
    let Some(svg) = render(&series, &opts) else {
        bail!(Error::EmptyResult("nothing to plot".into()));
    };
    write(&a.out, svg)?;
    write(&a.out.with_extension("csv"), coordinates_csv(&series))?;
    println!("{} series -> {}", series.len(), a.out.display());
    Ok(())
}
