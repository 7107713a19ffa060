use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use lff::bench::{default_suite, gen_task, parse_suite, run_entry, Params};
use lff::engine::{learn, score};
use lff::generate::{count_space, space_ratio, SpaceParams};
use lff::taskio::{parse_program, parse_task, render_program, write_stats, write_task, LearnStatus};

#[derive(Parser)]
#[command(name = "lff", version, about = "Learn logic programs with constants from examples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a program for the task in DIR (bias.pl, bk.pl, exs.pl).
    Learn {
        #[arg(long)]
        task: PathBuf,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Float tolerance used when matching constants.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        max_instantiations: Option<usize>,
        /// Write run statistics as JSON to this file.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the balanced accuracy of a program on a task's examples.
    Eval {
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        program: PathBuf,
    },
    /// Run a benchmark suite; the shipped suite when no file is given.
    Bench {
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Bound the hypothesis space with and without unary constant predicates.
    Space {
        #[arg(long = "Db")]
        db: u64,
        #[arg(long = "Dh")]
        dh: u64,
        #[arg(long)]
        vars: u64,
        #[arg(long)]
        arity: u32,
        #[arg(long)]
        max_body: u32,
        #[arg(long)]
        max_clauses: u32,
        #[arg(long)]
        constants: u64,
    },
    /// Generate a synthetic task, e.g. `list(c=200,len=50)`, into DIR.
    Gen {
        family: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn cmd_learn(
    task: PathBuf,
    timeout: Option<f64>,
    epsilon: Option<f64>,
    max_instantiations: Option<usize>,
    stats: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let task = parse_task(&task).with_context(|| format!("loading task {}", task.display()))?;
    let mut config = task.config.clone();
    if let Some(t) = timeout {
        if !(t > 0.0 && t.is_finite()) {
            bail!("--timeout must be positive");
        }
        config.timeout = Duration::from_secs_f64(t);
    }
    if let Some(e) = epsilon {
        if !(e > 0.0 && e.is_finite()) {
            bail!("--epsilon must be positive");
        }
        config.epsilon = e;
    }
    if let Some(k) = max_instantiations {
        config.max_instantiations = k;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    let result = learn(&task.with_config(config));
    if let Some(path) = stats {
        write_stats(&result, &path)?;
    }
    match &result.program {
        Some(h) => {
            print!("{}", render_program(h)?);
            Ok(ExitCode::SUCCESS)
        }
        None => {
            match result.status {
                LearnStatus::Timeout => println!("no solution (timeout)"),
                _ => println!("no solution"),
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_eval(task: PathBuf, program: PathBuf) -> Result<ExitCode> {
    let task = parse_task(&task).with_context(|| format!("loading task {}", task.display()))?;
    let text = std::fs::read_to_string(&program).with_context(|| format!("reading {}", program.display()))?;
    let h = parse_program(&text).with_context(|| format!("parsing {}", program.display()))?;
    let acc = score(&h, &task.background(), &task.pos, &task.neg, &task.config.budget)?;
    println!("{acc:.4}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(suite: Option<PathBuf>) -> Result<ExitCode> {
    let text = match &suite {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => default_suite().to_string(),
    };
    let entries = parse_suite(&text)?;
    println!("{:<12} {:>9} {:>9} {:>5}  result", "task", "accuracy", "secs", "size");
    let mut all = true;
    for e in &entries {
        let o = run_entry(e);
        let acc = o.accuracy.map_or("-".to_string(), |a| format!("{a:.4}"));
        let verdict = if o.passed { "pass".to_string() } else { format!("FAIL{}", o.error.map(|e| format!(" ({e})")).unwrap_or_default()) };
        println!("{:<12} {:>9} {:>9.3} {:>5}  {verdict}", o.name, acc, o.secs, o.size);
        all &= o.passed;
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_space(p: SpaceParams, c: u64) -> Result<ExitCode> {
    if p.db == 0 || p.dh == 0 || p.vars == 0 || p.arity == 0 || p.max_body == 0 || p.max_clauses == 0 {
        bail!("every parameter except --constants must be positive");
    }
    println!("magic variables:    {}", count_space(&p, false, c));
    println!("unary constants:    {}", count_space(&p, true, c));
    println!("ratio:              {}", space_ratio(&p, c));
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(family: String, out: PathBuf) -> Result<ExitCode> {
    let g = gen_task(&Params::parse(&family)?)?;
    write_task(&out, &g.task)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Learn { task, timeout, epsilon, max_instantiations, stats, seed } => {
            cmd_learn(task, timeout, epsilon, max_instantiations, stats, seed)
        }
        Command::Eval { task, program } => cmd_eval(task, program),
        Command::Bench { suite } => cmd_bench(suite),
        Command::Space { db, dh, vars, arity, max_body, max_clauses, constants } => {
            cmd_space(SpaceParams { dh, db, vars, arity, max_body, max_clauses }, constants)
        }
        Command::Gen { family, out } => cmd_gen(family, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
