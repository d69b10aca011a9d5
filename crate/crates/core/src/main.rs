use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsqca::config::{ConfigError, RunConfig};
use fsqca::error::{Error, ExitClass, Result};
use fsqca::pipeline::{self, Inputs, Overrides, Prepared};
use fsqca::scoring::{apply_plan, CodingSheet, ScorePlan};
use fsqca::synth::{self, SynthSpec};
use fsqca::{Implicant, SolutionKind};

#[derive(Parser)]
#[command(name = "fsqca", version, about = "Fuzzy-set qualitative comparative analysis")]
struct Cli {
    /// Output directory (overrides the config's [output] dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use O / o / X instead of ● / • / ⊗ in charts.
    #[arg(long, global = true)]
    ascii: bool,
    /// Move exact 0.5 memberships to 0.5 - 1e-6 instead of failing.
    #[arg(long, global = true)]
    nudge_half: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(clap::Args)]
struct StageArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run name; defaults to every run.
    #[arg(long)]
    run: Option<String>,
    /// Use memberships from this file (as written by `calibrate`).
    #[arg(long)]
    memberships: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: writes chart, bundle and truth table export.
    Run(ConfigArgs),
    /// Score a coding sheet into [0, 10] index scores.
    Score {
        #[arg(long)]
        sheet: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Calibrate the dataset into memberships.csv.
    Calibrate(ConfigArgs),
    /// Build truth tables into truth_table.csv.
    Table(StageArgs),
    /// Minimize one run and write the chosen solution.
    Solve {
        #[command(flatten)]
        stage: StageArgs,
        #[arg(long, default_value = "intermediate")]
        kind: SolutionKind,
    },
    /// Solution measures and case support per run.
    Analyze(StageArgs),
    /// Render configuration charts only.
    Report(StageArgs),
    /// Generate a synthetic dataset with planted recipes.
    Synth {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Comma-separated patterns, e.g. `10----,--11--`.
        #[arg(long, value_delimiter = ',')]
        planted: Vec<Implicant>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = synth::DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Write the bundled demo dataset, schema and config.
    Demo,
}

fn out_dir(cli_out: &Option<PathBuf>, default: &Path) -> PathBuf {
    cli_out.clone().unwrap_or_else(|| default.to_path_buf())
}

fn load(cli: &Cli, config: &Path) -> Result<Inputs> {
    let overrides = Overrides {
        ascii: cli.ascii.then_some(true),
        nudge_half: cli.nudge_half.then_some(true),
        out: None,
    };
    Ok(Inputs::load(config)?.with_overrides(&overrides))
}

fn stage(cli: &Cli, args: &StageArgs) -> Result<(Inputs, Prepared)> {
    let mut inputs = load(cli, &args.config)?;
    if let Some(name) = &args.run {
        let run: RunConfig = inputs
            .config
            .run(name)
            .cloned()
            .ok_or_else(|| ConfigError::UnknownRun {
                context: "--run".into(),
                name: name.clone(),
            })?;
        inputs.config.runs = vec![run];
        inputs.config.hypotheses = Default::default();
    }
    let memberships = match &args.memberships {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e))?),
        None => None,
    };
    let prepared = pipeline::prepare_with(&inputs, memberships.as_deref())?;
    Ok((inputs, prepared))
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(fsqca::report::export_bundle(value)?)
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let inputs = load(cli, &args.config)?;
            let output = pipeline::run_pipeline(&inputs)?;
            let dir = out_dir(&cli.out, &inputs.out_dir());
            print!("{}", output.chart);
            report_written(&pipeline::write_outputs(&output, &dir)?);
        }
        Command::Score { sheet, plan } => {
            let sheet_file = std::fs::File::open(sheet).map_err(|e| Error::io(sheet.display().to_string(), e))?;
            let plan_text = std::fs::read_to_string(plan).map_err(|e| Error::io(plan.display().to_string(), e))?;
            let scored = apply_plan(
                &CodingSheet::read_csv(sheet_file)?,
                &ScorePlan::from_toml_str(&plan_text)?,
            )?;
            let mut buf = Vec::new();
            scored.write_csv(&mut buf)?;
            let text = String::from_utf8(buf).expect("csv is utf-8");
            match &cli.out {
                Some(dir) => report_written(&[pipeline::write_file(dir, "scores.csv", &text)?]),
                None => print!("{text}"),
            }
        }
        Command::Calibrate(args) => {
            let inputs = load(cli, &args.config)?;
            let prepared = pipeline::prepare(&inputs)?;
            let mut buf = Vec::new();
            prepared.fuzzy.write_csv(&mut buf)?;
            let dir = out_dir(&cli.out, &inputs.out_dir());
            report_written(&[
                pipeline::write_file(&dir, "memberships.csv", &String::from_utf8(buf).expect("utf-8"))?,
                pipeline::write_file(&dir, "calibration.json", &json(&prepared.specs)?)?,
            ]);
        }
        Command::Table(args) => {
            let (inputs, prepared) = stage(cli, args)?;
            let runs = inputs
                .config
                .runs
                .iter()
                .map(|r| pipeline::run_one(&inputs, &prepared, r))
                .collect::<Result<Vec<_>>>()?;
            let dir = out_dir(&cli.out, &inputs.out_dir());
            report_written(&[pipeline::write_file(
                &dir,
                pipeline::TRUTH_TABLE_FILE,
                &pipeline::truth_table_csv(&runs)?,
            )?]);
        }
        Command::Solve { stage: args, kind } => {
            let (inputs, prepared) = stage(cli, args)?;
            let mut chosen = BTreeMap::new();
            for r in &inputs.config.runs {
                let result = pipeline::run_one(&inputs, &prepared, r)?;
                let solution = result.solutions.as_ref().map(|s| s.get(*kind).clone());
                match &solution {
                    Some(s) => println!("{}: {}", r.name, s.expression()),
                    None => println!("{}: no solution", r.name),
                }
                chosen.insert(r.name.clone(), solution);
            }
            let dir = out_dir(&cli.out, &inputs.out_dir());
            let name = format!("solution_{}.json", kind_name(*kind));
            report_written(&[pipeline::write_file(&dir, &name, &json(&chosen)?)?]);
        }
        Command::Analyze(args) => {
            let (inputs, prepared) = stage(cli, args)?;
            let runs = inputs
                .config
                .runs
                .iter()
                .map(|r| pipeline::run_one(&inputs, &prepared, r).map(|x| x.analysis))
                .collect::<Result<Vec<_>>>()?;
            let dir = out_dir(&cli.out, &inputs.out_dir());
            report_written(&[pipeline::write_file(&dir, "analysis.json", &json(&runs)?)?]);
        }
        Command::Report(args) => {
            let (inputs, prepared) = stage(cli, args)?;
            let output = pipeline::run_pipeline_with(&inputs, prepared)?;
            let dir = out_dir(&cli.out, &inputs.out_dir());
            print!("{}", output.chart);
            report_written(&[pipeline::write_file(&dir, pipeline::CHART_FILE, &output.chart)?]);
        }
        Command::Synth {
            k,
            n,
            planted,
            noise,
            seed,
            margin,
        } => {
            let spec = SynthSpec {
                k: *k,
                n: *n,
                planted: planted.clone(),
                noise: *noise,
                seed: *seed,
                margin: *margin,
            };
            let (d, truth) = synth::generate_synthetic(&spec)?;
            let mut buf = Vec::new();
            fsqca::dataset::write_dataset(&d, &mut buf)?;
            let dir = out_dir(&cli.out, Path::new("."));
            report_written(&[
                pipeline::write_file(&dir, "dataset.csv", &String::from_utf8(buf).expect("utf-8"))?,
                pipeline::write_file(&dir, "schema.toml", &d.schema().to_toml_string())?,
                pipeline::write_file(&dir, "ground_truth.json", &json(&(spec, truth))?)?,
            ]);
        }
        Command::Demo => {
            let dir = out_dir(&cli.out, Path::new("demo"));
            synth::demo().write_to(&dir)?;
            eprintln!("wrote demo files to {}", dir.display());
        }
    }
    Ok(())
}

fn kind_name(kind: SolutionKind) -> &'static str {
    match kind {
        SolutionKind::Complex => "complex",
        SolutionKind::Parsimonious => "parsimonious",
        SolutionKind::Intermediate => "intermediate",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ExitClass::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_class() as u8)
        }
        Err(_) => ExitCode::from(ExitClass::Internal as u8),
    }
}
