use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use addl::export;
use addl::pipeline::{self, TrainConfig};
use addl::{load_dataset, load_model, save_dataset, save_model, DatasetFormat};
use addl_core::dataset::{split_train_test, synth_generate_with};
use addl_core::{
    block_energy, block_energy_wpx, roc_one_vs_rest, DiagnosticsSummary, Hyperparams, LabeledDataset, Latent,
    SynthSpec,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Serialize)]
#[command(name = "addl", version, about = "Analysis discriminative dictionary learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Generate a labeled union-of-subspaces dataset.
    Synth(SynthArgs),
    /// Train a model and write the bundle plus the objective trace.
    Train(TrainArgs),
    /// Score a trained bundle on a labeled dataset.
    Eval(EvalArgs),
    /// Train the full model and its alpha/tau/lambda = 0 variants.
    Ablate(ExperimentArgs),
    /// Accuracy under additive Gaussian noise of increasing variance.
    NoiseSweep(NoiseArgs),
    /// Coherence, atom norms and block energy of a trained bundle.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Serialize)]
struct SynthArgs {
    #[arg(long)]
    classes: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    per_class: usize,
    #[arg(long)]
    subspace: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, value_enum, default_value_t = LatentArg::HalfNormal)]
    latent: LatentArg,
    #[arg(long)]
    seed: u64,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the output file's extension (`.bin` or CSV).
    #[arg(long, value_enum)]
    format: Option<DatasetFormat>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum LatentArg {
    HalfNormal,
    Gaussian,
}

#[derive(Args, Serialize)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// Defaults to the data file's extension (`.bin` or CSV).
    #[arg(long, value_enum)]
    format: Option<DatasetFormat>,
    /// Split the data per class into this many training samples and the rest
    /// for testing.
    #[arg(long)]
    per_class_train: Option<usize>,
}

#[derive(Args, Serialize)]
struct HyperArgs {
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    #[arg(long, default_value_t = 0.001)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-4)]
    gamma: f64,
    #[arg(long, default_value_t = 5)]
    atoms_per_class: usize,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol_obj: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol_p: f64,
    #[arg(long)]
    project_atoms: bool,
    /// Scale every sample to unit Euclidean norm (after PCA, if any).
    #[arg(long)]
    unit_norm: bool,
    /// Reduce with PCA fitted on the training data, keeping this energy fraction.
    #[arg(long)]
    pca_energy: Option<f64>,
    /// Solve per-class blocks on a thread pool. Results are identical.
    #[arg(long)]
    parallel: bool,
}

impl HyperArgs {
    fn config(&self, seed: u64) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            hyper: Hyperparams {
                alpha: self.alpha,
                tau: self.tau,
                lambda: self.lambda,
                gamma: self.gamma,
                k: self.atoms_per_class,
                max_iter: self.max_iter,
                tol_obj: self.tol_obj,
                tol_p: self.tol_p,
                project_atoms: self.project_atoms,
                seed,
                ..Hyperparams::default()
            },
            unit_norm: self.unit_norm,
            pca_energy: self.pca_energy,
            parallel: self.parallel,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    hyper: HyperArgs,
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Seed for `--per-class-train`.
    #[arg(long)]
    seed: Option<u64>,
    /// Predict by smallest class reconstruction residual.
    #[arg(long)]
    residual: bool,
    /// Write one-vs-rest ROC curves per class.
    #[arg(long)]
    roc: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    hyper: HyperArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct NoiseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    exp: ExperimentArgs,
    /// Comma-separated noise variances.
    #[arg(long, value_delimiter = ',', required = true)]
    variances: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Samples {
    Train,
    Test,
}

#[derive(Args, Serialize)]
struct DiagnoseArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Seed for `--per-class-train`.
    #[arg(long)]
    seed: Option<u64>,
    /// Which half of a `--per-class-train` split to project.
    #[arg(long, value_enum, default_value_t = Samples::Test)]
    samples: Samples,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(cli, a),
        Command::Train(a) => train(cli, a),
        Command::Eval(a) => eval(cli, a),
        Command::Ablate(a) => ablate(cli, a),
        Command::NoiseSweep(a) => noise_sweep(cli, a),
        Command::Diagnose(a) => diagnose(cli, a),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_manifest(path: &Path, cli: &Cli) -> Result<()> {
    write(path, serde_json::to_string_pretty(&cli.command)? + "\n")
}

fn format_for(path: &Path, explicit: Option<DatasetFormat>) -> DatasetFormat {
    explicit.unwrap_or_else(|| DatasetFormat::from_path(path))
}

fn check_input(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("input file {} does not exist", path.display());
    }
    Ok(())
}

impl DataArgs {
    fn check(&self) -> Result<()> {
        check_input(&self.data)?;
        if self.per_class_train == Some(0) {
            bail!("--per-class-train must be at least 1");
        }
        Ok(())
    }

    fn load(&self) -> Result<LabeledDataset> {
        Ok(load_dataset(&self.data, format_for(&self.data, self.format))?)
    }

    fn format(&self) -> DatasetFormat {
        format_for(&self.data, self.format)
    }

    /// `(train, test)`. Without a split both are the full dataset.
    fn load_split(&self, seed: Option<u64>) -> Result<(LabeledDataset, LabeledDataset)> {
        let ds = self.load()?;
        match self.per_class_train {
            Some(m) => {
                let seed = seed.context("--per-class-train needs --seed")?;
                Ok(split_train_test(&ds, m, seed)?)
            }
            None => Ok((ds.clone(), ds)),
        }
    }
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        classes: a.classes,
        subspace: a.subspace,
        dim: a.dim,
        per_class: a.per_class,
        noise_sigma: a.noise,
        latent: match a.latent {
            LatentArg::HalfNormal => Latent::HalfNormal,
            LatentArg::Gaussian => Latent::Gaussian,
        },
        seed: a.seed,
    };
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_dir(parent)?;
    }
    let ds = synth_generate_with(&spec)?;
    save_dataset(&ds, &a.out, format_for(&a.out, a.format))?;
    let mut manifest = a.out.clone().into_os_string();
    manifest.push(".manifest.json");
    write_manifest(Path::new(&manifest), cli)?;
    println!("n={} N={} c={}", ds.dim(), ds.len(), ds.class_count());
    Ok(())
}

fn train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    a.data.check()?;
    let cfg = a.hyper.config(a.seed)?;
    prepare_dir(&a.out)?;
    let ds = a.data.load()?;
    let train = match a.data.per_class_train {
        Some(m) => {
            let (train, test) = split_train_test(&ds, m, a.seed)?;
            let fmt = a.data.format();
            save_dataset(&train, &a.out.join(format!("train.{}", fmt.extension())), fmt)?;
            save_dataset(&test, &a.out.join(format!("test.{}", fmt.extension())), fmt)?;
            train
        }
        None => ds,
    };
    let fitted = pipeline::fit(&train, &cfg)?;
    save_model(&fitted.bundle, &a.out.join("model.addl"))?;
    write(&a.out.join("trace.csv"), export::trace_csv(&fitted.trace))?;
    write_manifest(&a.out.join("manifest.json"), cli)?;
    let last = fitted.trace.records.last().map_or(fitted.trace.initial.total, |r| r.objective.total);
    println!(
        "iterations={} stop_reason={} objective={last}",
        fitted.trace.iterations,
        fitted.trace.stop_reason.as_str()
    );
    Ok(())
}

#[derive(Serialize)]
struct Metrics {
    accuracy: f64,
    per_class_accuracy: Vec<f64>,
    samples: usize,
    rule: &'static str,
}

fn eval(cli: &Cli, a: &EvalArgs) -> Result<()> {
    check_input(&a.model)?;
    a.data.check()?;
    if a.data.per_class_train.is_some() && a.seed.is_none() {
        bail!("--per-class-train needs --seed");
    }
    prepare_dir(&a.out)?;
    let bundle = load_model(&a.model)?;
    let (_, test) = a.data.load_split(a.seed)?;
    let ev = pipeline::evaluate(&bundle, &test, a.residual)?;
    write(&a.out.join("predictions.csv"), export::predictions_csv(&ev.predictions, test.labels(), &ev.scores))?;
    if a.roc {
        for l in 0..bundle.model.class_count {
            let curve = roc_one_vs_rest(&ev.scores, test.labels(), l)?;
            write(&a.out.join(format!("roc_class_{l}.csv")), export::roc_csv(&curve))?;
        }
    }
    let metrics = Metrics {
        accuracy: ev.accuracy,
        per_class_accuracy: ev.per_class.clone(),
        samples: test.len(),
        rule: if a.residual { "residual" } else { "soft_labels" },
    };
    write(&a.out.join("metrics.json"), serde_json::to_string_pretty(&metrics)? + "\n")?;
    write_manifest(&a.out.join("manifest.json"), cli)?;
    println!("accuracy={}", ev.accuracy);
    for (l, acc) in ev.per_class.iter().enumerate() {
        println!("class {l}: {acc}");
    }
    Ok(())
}

fn ablate(cli: &Cli, a: &ExperimentArgs) -> Result<()> {
    a.data.check()?;
    let cfg = a.hyper.config(a.seed)?;
    prepare_dir(&a.out)?;
    let (train, test) = a.data.load_split(Some(a.seed))?;
    let rows = pipeline::ablate(&train, &test, &cfg)?;
    let csv = export::table_csv(
        ["variant", "alpha", "tau", "lambda", "accuracy"],
        rows.iter().map(|r| {
            [r.variant.to_string(), r.alpha.to_string(), r.tau.to_string(), r.lambda.to_string(), r.accuracy.to_string()]
        }),
    );
    write(&a.out.join("ablation.csv"), &csv)?;
    write_manifest(&a.out.join("manifest.json"), cli)?;
    print!("{csv}");
    Ok(())
}

fn noise_sweep(cli: &Cli, a: &NoiseArgs) -> Result<()> {
    let e = &a.exp;
    e.data.check()?;
    let cfg = e.hyper.config(e.seed)?;
    if let Some(v) = a.variances.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        bail!("variance {v} must be finite and >= 0");
    }
    prepare_dir(&e.out)?;
    let (train, test) = e.data.load_split(Some(e.seed))?;
    let rows = pipeline::noise_sweep(&train, &test, &cfg, &a.variances, e.seed)?;
    let csv =
        export::table_csv(["variance", "accuracy"], rows.iter().map(|(v, acc)| [v.to_string(), acc.to_string()]));
    write(&e.out.join("noise_sweep.csv"), &csv)?;
    write_manifest(&e.out.join("manifest.json"), cli)?;
    print!("{csv}");
    Ok(())
}

fn diagnose(cli: &Cli, a: &DiagnoseArgs) -> Result<()> {
    check_input(&a.model)?;
    a.data.check()?;
    if a.data.per_class_train.is_some() && a.seed.is_none() {
        bail!("--per-class-train needs --seed");
    }
    prepare_dir(&a.out)?;
    let bundle = load_model(&a.model)?;
    let (train, test) = a.data.load_split(a.seed)?;
    let raw = match a.samples {
        Samples::Train => train,
        Samples::Test => test,
    };
    if raw.dim() != bundle.input_dim() {
        return Err(addl_core::Error::DimensionMismatch { expected: bundle.input_dim(), found: raw.dim() }.into());
    }
    let ds = bundle.preprocess.apply(&raw)?;
    let model = &bundle.model;
    let summary = DiagnosticsSummary::compute(model, &ds)?;
    let px_report = block_energy(model, &ds)?;
    let wpx_report = block_energy_wpx(model, &ds)?;
    let px = model.projection() * ds.features();
    write(&a.out.join("diagnostics.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    write(&a.out.join("block_energy.csv"), export::block_energy_csv(&px_report, &wpx_report))?;
    write(&a.out.join("px.csv"), export::matrix_csv(&px))?;
    write_manifest(&a.out.join("manifest.json"), cli)?;
    println!("mu={} block_ratio_PX={} block_ratio_WPX={}", summary.mu, summary.block_ratio_px, summary.block_ratio_wpx);
    Ok(())
}
