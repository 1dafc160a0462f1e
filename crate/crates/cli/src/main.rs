use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pcv_core::aeb::{car, summary_csv, table_csv, vars, AebScenario, Catalog};
use pcv_core::assurance::{confidence, import_json, percent, render_case, RenderOptions};
use pcv_core::lang::satisfies;
use pcv_core::trace::{draw, write_log, Sample};
use pcv_cli::{execute, CampaignSpec, Overrides, Run, RunError};

#[derive(Parser)]
#[command(name = "pcv", version, about = "Probabilistic contract verification campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    #[arg(long)]
    seed: Option<u64>,
    /// Scene draws for every test in the campaign.
    #[arg(long)]
    samples: Option<u64>,
    /// Confidence for every test in the campaign.
    #[arg(long)]
    confidence: Option<f64>,
    /// Trace-generation threads.
    #[arg(long, env = "PCV_WORKERS")]
    workers: Option<usize>,
}

impl RunFlags {
    fn overrides(&self, output: Option<PathBuf>) -> Overrides {
        Overrides {
            seed: self.seed,
            samples: self.samples,
            confidence: self.confidence,
            workers: self.workers,
            output,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign spec; writes evidence.json, case.txt and summary.csv.
    Verify {
        /// Spec path, or builtin:aeb-naive / builtin:aeb-optimized.
        spec: String,
        #[command(flatten)]
        flags: RunFlags,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a stored evidence tree as an assurance case.
    Case {
        evidence: PathBuf,
        #[arg(long, default_value_t = 100)]
        width: usize,
    },
    /// Sweep budgets for the naive and optimized specs and print a CSV table.
    Table {
        #[arg(long, default_value = "builtin:aeb-naive")]
        naive: String,
        #[arg(long, default_value = "builtin:aeb-optimized")]
        optimized: String,
        #[arg(long, value_delimiter = ',', default_value = "500,1000,5000")]
        budgets: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, env = "PCV_WORKERS")]
        workers: Option<usize>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in oracle checks.
    Selftest,
    /// Simulate one scene of the braking scenario and check it against the catalog.
    Trace {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "perception")]
        stream: String,
        #[arg(long, default_value_t = 0)]
        scene: u64,
        /// Write the trace as line-delimited JSON.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

fn load(path: &str, o: &Overrides) -> Result<CampaignSpec, RunError> {
    let mut spec = CampaignSpec::load(path)?;
    spec.apply(o);
    Ok(spec)
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn save(run: &Run, dir: &Path) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    write(&dir.join("evidence.json"), &run.evidence_json())?;
    write(&dir.join("case.txt"), &render_case(&run.root, &RenderOptions::default()))?;
    write(&dir.join("summary.csv"), &summary_csv(std::slice::from_ref(&run.summary)))?;
    Ok(())
}

fn verify(path: &str, flags: &RunFlags, out: Option<PathBuf>) -> ExitCode {
    let spec = match load(path, &flags.overrides(out)) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let run = match execute(&spec) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let dir = spec.output.clone().unwrap_or_else(|| PathBuf::from("pcv-out").join(&spec.name));
    if let Err(e) = save(&run, &dir) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    println!("Minimum {}", percent(run.root.bound.p));
    println!("Confidence {}", confidence(run.root.bound.c));
    println!("Wrote {}", dir.display());
    match spec.floor {
        Some(floor) if run.root.bound.p < floor => {
            eprintln!("bound {:.6} is below the floor {floor}", run.root.bound.p);
            ExitCode::from(3)
        }
        _ => ExitCode::SUCCESS,
    }
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn case(path: &Path, width: usize) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    match import_json(&text) {
        Ok(doc) => {
            print!("{}", render_case(&doc.root, &RenderOptions { width, ..RenderOptions::default() }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn table(naive: &str, optimized: &str, budgets: &[u64], seed: u64, workers: Option<usize>, out: Option<PathBuf>) -> ExitCode {
    let mut rows = Vec::new();
    for &n in budgets {
        let o = Overrides { seed: Some(seed), samples: Some(n), workers, ..Overrides::default() };
        let mut pair = Vec::new();
        for path in [naive, optimized] {
            match load(path, &o).and_then(|s| execute(&s)) {
                Ok(run) => pair.push(run.summary),
                Err(e) => return fail(&e),
            }
        }
        let optimized = pair.pop().expect("two runs");
        let naive = pair.pop().expect("two runs");
        eprintln!("budget {n}: naive {:.4}, optimized {:.4}", naive.bound.p, optimized.bound.p);
        rows.push((naive, optimized));
    }
    let csv = table_csv(&rows);
    match out {
        Some(path) => {
            if let Err(e) = write(&path, &csv) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

fn selftest() -> ExitCode {
    let mut ok = true;
    for c in pcv_cli::selftest::run_all() {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn trace(seed: u64, stream: &str, scene: u64, log: Option<PathBuf>) -> ExitCode {
    let scenario = AebScenario::new(Default::default());
    let vehicle = car(&scenario.config.sensors);
    let sample = match draw(&scenario, &vehicle, seed, stream, scene) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match &sample {
        Sample::Rejected { env, .. } => {
            println!("scene rejected: lead_dist {}", env.get(vars::LEAD_DIST).map(|d| d.to_string()).unwrap_or_default())
        }
        Sample::Trace(t) => {
            println!("{} steps", t.steps.len());
            for c in Catalog::build().all() {
                match satisfies(t, c) {
                    Ok(v) => println!("{:<28} {v:?}", c.name),
                    Err(e) => println!("{:<28} error: {e}", c.name),
                }
            }
        }
    }
    if let Some(path) = log {
        let file = match std::fs::File::create(&path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: cannot create {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        };
        if let Err(e) = write_log(std::io::BufWriter::new(file), std::slice::from_ref(&sample)) {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify { spec, flags, out } => verify(&spec, &flags, out),
        Command::Case { evidence, width } => case(&evidence, width),
        Command::Table { naive, optimized, budgets, seed, workers, out } => {
            table(&naive, &optimized, &budgets, seed, workers, out)
        }
        Command::Selftest => selftest(),
        Command::Trace { seed, stream, scene, log } => trace(seed, &stream, scene, log),
    }
}
