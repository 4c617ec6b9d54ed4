use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fakenews_core::corpus::{ClassifierKind, ExperimentConfig, Method, Schema, VectorizerKind};
use fakenews_core::harness::{
    self, load_and_prepare, run_prepared, run_stacking_sweep, run_sweep, summary_csv, synth_corpus, timings_json,
    to_csv, to_json, to_table, Format, SweepEntry, SweepPlan, SweepReport, SynthConfig,
};

#[derive(Parser)]
#[command(name = "fakenews", version, about = "Imbalanced fake-news classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment configuration.
    Run(Common),
    /// Run a grid of methods x vectorizers x classifiers.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated methods (default: every method except stacking).
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',')]
        vectorizers: Vec<VectorizerKind>,
        #[arg(long, value_delimiter = ',')]
        classifiers: Vec<ClassifierKind>,
        /// Only run oversamplers with the test-split setting from the config.
        #[arg(long)]
        single_test_variant: bool,
    },
    /// Stacking with each of the six classifiers as meta model.
    Stack(Common),
    /// Generate a synthetic labeled corpus.
    Synth {
        /// Output directory (writes corpus.csv) or a .csv file path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        majority: usize,
        #[arg(long, default_value_t = 150)]
        minority: usize,
        #[arg(long)]
        topic_rate: Option<f64>,
        #[arg(long)]
        cross_rate: Option<f64>,
        /// Size of the shared background vocabulary.
        #[arg(long)]
        background_words: Option<usize>,
        /// Size of each class topic vocabulary.
        #[arg(long)]
        topic_words: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` experiment config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus file (overrides `corpus` in the config).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.csv, summary.csv, report.json and timings.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format printed to standard output.
    #[arg(long, default_value = "table")]
    format: Format,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    vectorizer: Option<VectorizerKind>,
    #[arg(long)]
    classifier: Option<ClassifierKind>,
    /// Oversample the test split as well.
    #[arg(long)]
    oversample_test: bool,
    /// Extra `key=value` config overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

struct Setup {
    cfg: ExperimentConfig,
    corpus: PathBuf,
    schema: Schema,
}

impl Common {
    fn setup(&self) -> Result<Setup> {
        let (mut cfg, extras) = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("stage `config`: reading {}", p.display()))?,
            None => (ExperimentConfig::default(), Default::default()),
        };
        let mut schema = Schema::default();
        schema.apply_extras(&extras).context("stage `config`")?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(v) = self.vectorizer {
            cfg.vectorizer = v;
        }
        if let Some(c) = self.classifier {
            cfg.classifier = c;
        }
        if self.oversample_test {
            cfg.oversample_test = true;
        }
        for o in &self.overrides {
            let Some((k, v)) = o.split_once('=') else {
                bail!("stage `config`: override `{o}` is not KEY=VALUE");
            };
            cfg.set(k, v).context("stage `config`")?;
        }
        cfg.validate().context("stage `config`")?;
        let corpus = match (&self.corpus, extras.get("corpus")) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => PathBuf::from(p),
            (None, None) => bail!("stage `config`: no corpus given (use --corpus or `corpus = ...` in the config)"),
        };
        Ok(Setup { cfg, corpus, schema })
    }
}

fn emit(report: &SweepReport, common: &Common) -> Result<()> {
    let text = match common.format {
        Format::Table => to_table(report),
        Format::Csv => to_csv(report)?,
        Format::Json => to_json(report)?,
    };
    print!("{text}");
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir).with_context(|| format!("stage `report`: creating {}", dir.display()))?;
        let write = |name: &str, body: String| {
            let p = dir.join(name);
            fs::write(&p, body).with_context(|| format!("stage `report`: writing {}", p.display()))
        };
        write("report.csv", to_csv(report)?)?;
        write("summary.csv", summary_csv(report)?)?;
        write("report.json", to_json(report)?)?;
        write("timings.json", timings_json(report)?)?;
    }
    Ok(())
}

fn synth_path(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some("csv") => out.to_path_buf(),
        _ => out.join("corpus.csv"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let s = common.setup()?;
            let corpus = load_and_prepare(&s.corpus, &s.schema, &s.cfg)?;
            let result = run_prepared(&s.cfg, &corpus)?;
            let entry = SweepEntry {
                label: harness::method_label(&s.cfg),
                config: s.cfg.clone(),
                status: harness::RunStatus::Ok,
                reason: None,
                result: Some(result),
            };
            emit(&SweepReport::from_entries(vec![entry]), &common)
        }
        Command::Sweep {
            common,
            methods,
            vectorizers,
            classifiers,
            single_test_variant,
        } => {
            let s = common.setup()?;
            let full = SweepPlan::full();
            let plan = SweepPlan {
                methods: if methods.is_empty() { full.methods } else { methods },
                vectorizers: if vectorizers.is_empty() { full.vectorizers } else { vectorizers },
                classifiers: if classifiers.is_empty() { full.classifiers } else { classifiers },
                both_test_variants: !single_test_variant,
            };
            let corpus = load_and_prepare(&s.corpus, &s.schema, &s.cfg)?;
            emit(&run_sweep(&s.cfg, &plan, &corpus)?, &common)
        }
        Command::Stack(common) => {
            let s = common.setup()?;
            let corpus = load_and_prepare(&s.corpus, &s.schema, &s.cfg)?;
            emit(&run_stacking_sweep(&s.cfg, &corpus)?, &common)
        }
        Command::Synth {
            out,
            seed,
            majority,
            minority,
            topic_rate,
            cross_rate,
            background_words,
            topic_words,
        } => {
            let defaults = SynthConfig::default();
            let cfg = SynthConfig {
                n_majority: majority,
                n_minority: minority,
                seed,
                topic_rate: topic_rate.unwrap_or(defaults.topic_rate),
                cross_rate: cross_rate.unwrap_or(defaults.cross_rate),
                background_words: background_words.unwrap_or(defaults.background_words),
                topic_words: topic_words.unwrap_or(defaults.topic_words),
                ..defaults
            };
            let data = synth_corpus(&cfg).context("stage `synth`")?;
            let path = synth_path(&out);
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("stage `synth`: creating {}", dir.display()))?;
            }
            harness::write_corpus(&data, &path).context("stage `synth`")?;
            let [a, f] = data.class_counts();
            eprintln!("wrote {} ({a} authentic, {f} fake)", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            for cause in e.chain().skip(1) {
                eprintln!("  caused by: {cause}");
            }
            ExitCode::FAILURE
        }
    }
}
