use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use markov_rewrite::cipher::{check::check_cipher_dataset, make_cipher_dataset};
use markov_rewrite::config::{CipherRunConfig, RunConfig};
use markov_rewrite::eval::{self, Baseline, CurveKey, EvalReport, PredictionRecord};
use markov_rewrite::markov::{parse_program, DEFAULT_STEP_LIMIT};
use markov_rewrite::output::OutputSet;
use markov_rewrite::taskgen::{self, check::check_dataset};

#[derive(Parser)]
#[command(name = "mrw", version, about = "Markov-algorithm rewriting: interpreter, dataset generator, scorer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a config file (rewrite, cross_class or cipher kind).
    Gen(GenArgs),
    /// Run a Markov program on one input.
    Run {
        program: PathBuf,
        input: String,
        /// Print every rewrite step.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
        step_limit: NonZeroUsize,
    },
    /// Generate the replace-then-encrypt dataset from a cipher config.
    CipherGen(GenArgs),
    /// Score predictions against a reference file, or emit a baseline prediction file.
    Eval {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, conflicts_with = "baseline", required_unless_present = "baseline")]
        predictions: Option<PathBuf>,
        /// Write predictions of a fixed baseline instead of scoring.
        #[arg(long, value_enum)]
        baseline: Option<BaselineArg>,
        /// Report JSON (or prediction JSONL with --baseline).
        #[arg(long)]
        out: PathBuf,
        /// Also write a plain-text report here.
        #[arg(long)]
        text: Option<PathBuf>,
        /// Training instruction count to record in the report.
        #[arg(long)]
        num_instructions: Option<usize>,
        /// Training power-law shape to record in the report.
        #[arg(long)]
        shape: Option<f64>,
    },
    /// Assemble report JSON files (or directories of them) into a CSV curve.
    Curve {
        #[arg(long, required = true, num_args = 1..)]
        reports: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = KeyArg::NumInstructions)]
        by: KeyArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Re-read the emitted files and check every record.
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Copy,
    Target,
}

#[derive(Clone, Copy, ValueEnum)]
enum KeyArg {
    NumInstructions,
    Shape,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen(args) => cmd_gen(&args, false),
        Command::CipherGen(args) => cmd_gen(&args, true),
        Command::Run {
            program,
            input,
            trace,
            step_limit,
        } => cmd_run(&program, &input, trace, step_limit),
        Command::Eval {
            reference,
            predictions,
            baseline,
            out,
            text,
            num_instructions,
            shape,
        } => match (predictions, baseline) {
            (_, Some(b)) => cmd_baseline(&reference, b, &out),
            (Some(p), None) => cmd_eval(&reference, &p, &out, text.as_deref(), num_instructions, shape),
            (None, None) => bail!("either --predictions or --baseline is required"),
        },
        Command::Curve { reports, by, out } => cmd_curve(&reports, by, &out),
    }
}

fn cmd_gen(args: &GenArgs, cipher_only: bool) -> Result<()> {
    let config = RunConfig::load(&args.config, args.seed)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    match config {
        RunConfig::Cipher(c) => gen_cipher(&c, args),
        _ if cipher_only => bail!("{}: cipher-gen needs kind = \"cipher\"", args.config.display()),
        RunConfig::Rewrite(c) => {
            let m = taskgen::make_dataset(&c, &args.out, args.jobs)?;
            report_rewrite(&m, args)
        }
        RunConfig::CrossClass(c) => {
            let m = c.generate(&args.out, args.jobs)?;
            report_rewrite(&m, args)
        }
    }
}

fn report_rewrite(m: &taskgen::DatasetManifest, args: &GenArgs) -> Result<()> {
    println!(
        "wrote {} train / {} test examples to {}",
        m.train_examples,
        m.test_examples,
        args.out.display()
    );
    if args.verify {
        let report = check_dataset(&args.out)?;
        if !report.is_ok() {
            remove_outputs(&args.out, &[&m.train_file, &m.test_file, taskgen::MANIFEST_FILE]);
            for v in &report.violations {
                eprintln!("{v}");
            }
            bail!("{} check violation(s)", report.violation_count);
        }
        println!("verified {} records", report.train_examples + report.test_examples);
    }
    println!("checksum {}", m.checksum);
    Ok(())
}

fn gen_cipher(c: &CipherRunConfig, args: &GenArgs) -> Result<()> {
    let (train, test) = c.load_sources()?;
    let m = make_cipher_dataset(&c.cipher_config(), &train, &test, &args.out, args.jobs)?;
    println!(
        "wrote {} train / {} test cipher examples to {}",
        m.train_examples,
        m.test_examples,
        args.out.display()
    );
    if args.verify {
        let report = check_cipher_dataset(&args.out)?;
        if !report.is_ok() {
            remove_outputs(&args.out, &[&m.train_file, &m.test_file, markov_rewrite::cipher::CIPHER_MANIFEST_FILE]);
            for v in report.violations.iter().take(50) {
                eprintln!("{v}");
            }
            bail!("{} check violation(s)", report.violations.len());
        }
        println!("verified {} records", report.train_examples + report.test_examples);
    }
    println!("checksum {}", m.checksum);
    Ok(())
}

fn remove_outputs(dir: &Path, names: &[&str]) {
    for n in names {
        let _ = fs::remove_file(dir.join(n));
    }
}

fn cmd_run(program: &Path, input: &str, trace: bool, step_limit: NonZeroUsize) -> Result<()> {
    let text = fs::read_to_string(program).with_context(|| format!("reading {}", program.display()))?;
    let program = parse_program(&text).with_context(|| format!("parsing {}", program.display()))?;
    let seq = program.encode_input(input)?;
    let outcome = program.run(&seq, step_limit);
    let alphabet = program.alphabet();
    if trace {
        for step in &outcome.trace {
            println!(
                "{} -> {} (by {})",
                alphabet.render(&step.before),
                alphabet.render(&step.after),
                program.origin(step.rule_index) + 1
            );
        }
    }
    println!("status: {} ({} steps)", outcome.status.as_str(), outcome.trace.len());
    println!("{}", alphabet.render(&outcome.final_string));
    Ok(())
}

/// Writes `contents` to `path` atomically.
fn write_output(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .with_context(|| format!("invalid output path {}", path.display()))?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut out = OutputSet::new(dir)?;
    out.write_file(name, contents)?;
    out.commit()?;
    Ok(())
}

fn cmd_baseline(reference: &Path, baseline: BaselineArg, out: &Path) -> Result<()> {
    let items = eval::load_reference(reference)?;
    let baseline = match baseline {
        BaselineArg::Copy => Baseline::Copy,
        BaselineArg::Target => Baseline::Target,
    };
    let mut buf = Vec::new();
    for p in eval::baseline_predictions(&items, baseline) {
        serde_json::to_writer(&mut buf, &p)?;
        buf.push(b'\n');
    }
    write_output(out, &buf)?;
    println!("wrote {} predictions to {}", items.len(), out.display());
    Ok(())
}

fn cmd_eval(
    reference: &Path,
    predictions: &Path,
    out: &Path,
    text: Option<&Path>,
    num_instructions: Option<usize>,
    shape: Option<f64>,
) -> Result<()> {
    let items = eval::load_reference(reference)?;
    let preds: Vec<PredictionRecord> = eval::load_predictions(predictions)?;
    let mut report = eval::score(&items, &preds)?;
    report.num_instructions = num_instructions;
    report.shape = shape;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_output(out, &json)?;
    if let Some(t) = text {
        if let Err(e) = write_output(t, report.to_text().as_bytes()) {
            let _ = fs::remove_file(out);
            return Err(e);
        }
    }
    print!("{}", report.to_text());
    Ok(())
}

fn collect_reports(paths: &[PathBuf]) -> Result<Vec<EvalReport>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    files
        .iter()
        .map(|f| {
            let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing report {}", f.display()))
        })
        .collect()
}

fn cmd_curve(paths: &[PathBuf], by: KeyArg, out: &Path) -> Result<()> {
    let reports = collect_reports(paths)?;
    let key = match by {
        KeyArg::NumInstructions => CurveKey::NumInstructions,
        KeyArg::Shape => CurveKey::Shape,
    };
    let csv = eval::curve_by(key, &reports)?;
    write_output(out, csv.as_bytes())?;
    print!("{csv}");
    Ok(())
}
