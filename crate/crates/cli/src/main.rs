use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use fisr::float_bits::POSITIVE_NORMAL_BITS;
use fisr::kernel::{invsqrt, invsqrt_raw, KernelConfig, CLASSIC_MAGIC};
use fisr::verifier::{
    compare_with_prediction, emit_cloud, sweep, verify_scaling, verify_theorem1_with, Coverage, Domain,
    ErrorKind, SweepSpec,
};
use fisr::{derive_all, DerivationResult, Execution};

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "fisr", version, about = "Fast inverse square root with a tunable magic constant")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the optimal magic constants for relative and absolute error.
    Derive {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Evaluate the kernel at one input.
    Eval {
        /// Decimal value or raw bits as 0xXXXXXXXX.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "0x5F3759DF")]
        r: String,
        #[arg(long, default_value_t = 1)]
        iters: u32,
    },
    /// Sweep the kernel error and optionally write the cloud as CSV.
    Sweep {
        #[arg(long, default_value = "0x5F375A86")]
        r: String,
        #[arg(long, default_value_t = 1)]
        iters: u32,
        /// Number of random inputs; omit for every float in [1, 4).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Draw random inputs from [1, 4) instead of all positive normals.
        #[arg(long)]
        unit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the seed model and the derived constants against the kernel.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_r: Option<String>,
    },
    /// Time the kernel against the library reciprocal square root.
    Bench {
        #[arg(long, default_value_t = 5)]
        reps: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    JsonLines,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Quick,
    Exhaustive,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Derive { format } => run_derive(format),
        Command::Eval { x, r, iters } => run_eval(&x, &r, iters),
        Command::Sweep {
            r,
            iters,
            samples,
            seed,
            unit,
            out,
        } => run_sweep(&r, iters, samples, seed, unit, out),
        Command::Verify { level, seed, inject_r } => run_verify(level, seed, inject_r.as_deref()),
        Command::Bench { reps } => run_bench(reps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn parse_hex(s: &str) -> anyhow::Result<u32> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u32::from_str_radix(digits, 16).with_context(|| format!("invalid hex constant {s:?}"))
}

fn parse_x(s: &str) -> anyhow::Result<f32> {
    if s.starts_with("0x") || s.starts_with("0X") {
        Ok(f32::from_bits(parse_hex(s)?))
    } else {
        s.parse::<f32>().with_context(|| format!("invalid number {s:?}"))
    }
}

fn hex_dec(r: u32) -> String {
    format!("0x{r:08X} ({r})")
}

fn derived() -> Result<Vec<DerivationResult>, Failure> {
    derive_all().context("solver failed").exit_with(EXIT_SOLVER)
}

fn run_derive(format: Format) -> Result<(), Failure> {
    let rows = derived()?;
    let mut out = String::new();
    match format {
        Format::Table => {
            let _ = writeln!(
                out,
                "{:<10} {:>2}  {:<20} {:<26} predicted max error",
                "objective", "k", "t", "R"
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<10} {:>2}  {:<20.15} {:<26} {:.5e}",
                    r.objective.as_str(),
                    r.k,
                    r.t_opt,
                    hex_dec(r.r_opt),
                    r.predicted_max_error
                );
            }
        }
        Format::Csv => {
            out.push_str("objective,k,t,r_hex,r_dec,predicted_max_error\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},0x{:08X},{},{:e}",
                    r.objective.as_str(),
                    r.k,
                    r.t_opt,
                    r.r_opt,
                    r.r_opt,
                    r.predicted_max_error
                );
            }
        }
        Format::JsonLines => {
            for r in &rows {
                let line = json!({
                    "objective": r.objective.as_str(),
                    "k": r.k,
                    "t": r.t_opt,
                    "r_hex": format!("0x{:08X}", r.r_opt),
                    "r": r.r_opt,
                    "predicted_max_error": r.predicted_max_error,
                    "balance_residual": r.balance_residual,
                });
                let _ = writeln!(out, "{line}");
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn run_eval(x: &str, r: &str, iters: u32) -> Result<(), Failure> {
    let x = parse_x(x).exit_with(EXIT_USAGE)?;
    let magic = parse_hex(r).exit_with(EXIT_USAGE)?;
    let cfg = KernelConfig::new(magic, iters).exit_with(EXIT_USAGE)?;
    let y = invsqrt(x, &cfg).exit_with(EXIT_USAGE)?;
    let reference = 1.0 / f64::from(x).sqrt();
    println!("x          {:e} (0x{:08X})", x, x.to_bits());
    println!("R          0x{magic:08X}, iterations {iters}");
    println!("result     {:e} (0x{:08X})", y, y.to_bits());
    println!("reference  {reference:e}");
    println!("rel error  {:e}", f64::from(y) / reference - 1.0);
    Ok(())
}

fn run_sweep(
    r: &str,
    iters: u32,
    samples: Option<usize>,
    seed: u64,
    unit: bool,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let magic = parse_hex(r).exit_with(EXIT_USAGE)?;
    let domain = match (samples, unit) {
        (None, _) => Domain::UnitIntervalExhaustive,
        (Some(count), true) => Domain::UnitIntervalRandom { count, seed },
        (Some(count), false) => Domain::FullRangeRandom { count, seed },
    };
    let spec = SweepSpec {
        magic,
        iterations: iters,
        domain,
        error_kind: ErrorKind::Both,
    };
    if let Some(path) = out {
        let rows = emit_cloud(&spec, &path)
            .with_context(|| format!("writing {}", path.display()))
            .exit_with(EXIT_USAGE)?;
        println!("wrote {rows} rows to {}", path.display());
    }
    if samples == Some(0) {
        return Ok(());
    }
    let rep = sweep(&spec).exit_with(EXIT_USAGE)?;
    println!("domain     {}", domain.name());
    if let Some(seed) = rep.rng_seed() {
        println!("seed       {seed}");
    }
    println!("R          0x{magic:08X}, iterations {iters}");
    println!("samples    {}", rep.samples);
    println!(
        "max |rel|  {:e} at x = {:e}",
        rep.max_abs_of_relative_error,
        f32::from_bits(rep.argmax_rel)
    );
    println!(
        "max |abs|  {:e} at x = {:e}",
        rep.max_abs_of_absolute_error,
        f32::from_bits(rep.argmax_abs)
    );
    Ok(())
}

fn run_verify(level: Level, seed: u64, inject_r: Option<&str>) -> Result<(), Failure> {
    let rows = derived()?;
    let mut magics: Vec<u32> = rows.iter().map(|r| r.r_opt).collect();
    magics.dedup();
    if let Some(r) = inject_r {
        magics = vec![parse_hex(r).exit_with(EXIT_USAGE)?];
    }
    let coverage = match level {
        Level::Quick => Coverage::Stratified(1 << 16),
        Level::Exhaustive => Coverage::Exhaustive,
    };
    let mut failed = false;

    println!("seed model ({})", if level == Level::Quick { "2^16 stratified" } else { "exhaustive" });
    for &magic in &magics {
        let rep = verify_theorem1_with(magic, coverage, Execution::Parallel)
            .with_context(|| format!("constant 0x{magic:08X}"))
            .exit_with(EXIT_VERIFY)?;
        println!(
            "  0x{magic:08X}  checked {:>8}  mismatches {}  smooth-model gap {:.3e}",
            rep.checked, rep.mismatches, rep.smooth_gap
        );
        if !rep.passed() {
            failed = true;
            let dump: Vec<String> = rep.first_mismatches.iter().map(|b| format!("0x{b:08X}")).collect();
            println!("    first mismatches: {}", dump.join(" "));
        }
    }

    let trials = match level {
        Level::Quick => 20_000,
        Level::Exhaustive => 100_000,
    };
    println!("scaling ({trials} trials per constant, seed {seed})");
    for (i, &magic) in magics.iter().enumerate() {
        let k = (i % 3) as u32;
        let rep = verify_scaling(magic, k, trials, seed)
            .with_context(|| format!("constant 0x{magic:08X}"))
            .exit_with(EXIT_VERIFY)?;
        println!("  0x{magic:08X}  k={k}  violations {}", rep.violations);
        if rep.violations > 0 {
            failed = true;
            let dump: Vec<String> = rep
                .first_violations
                .iter()
                .map(|(b, n)| format!("(0x{b:08X}, {n})"))
                .collect();
            println!("    first violations: {}", dump.join(" "));
        }
    }

    if level == Level::Exhaustive && inject_r.is_none() {
        println!("error sweeps (predicted, measured)");
        for row in &rows {
            let a = compare_with_prediction(row, Execution::Parallel).exit_with(EXIT_VERIFY)?;
            let ok = a.within();
            failed |= !ok;
            println!(
                "  {:<8} k={}  0x{:08X}  ({:.9e}, {:.9e})  {}",
                row.objective.as_str(),
                row.k,
                row.r_opt,
                a.predicted,
                a.measured,
                if ok { "ok" } else { "OUT OF BOUNDS" }
            );
        }
    }

    if failed {
        return Err(anyhow!("verification failed")).exit_with(EXIT_VERIFY);
    }
    println!("all checks passed");
    Ok(())
}

const BENCH_INPUTS: usize = 1 << 16;
const BENCH_SEED: u64 = 0x00F1_5A5E;
const BENCH_MAGIC: u32 = CLASSIC_MAGIC;

fn bench_inputs() -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(BENCH_SEED);
    (0..BENCH_INPUTS)
        .map(|_| f32::from_bits(rng.gen_range(POSITIVE_NORMAL_BITS)))
        .collect()
}

fn time_variant(xs: &[f32], reps: u32, f: impl Fn(f32) -> f32) -> (f64, Vec<f32>) {
    let mut best = f64::INFINITY;
    let mut out = vec![0f32; xs.len()];
    for _ in 0..reps {
        let start = Instant::now();
        for (o, &x) in out.iter_mut().zip(xs) {
            *o = f(std::hint::black_box(x));
        }
        std::hint::black_box(&out);
        best = best.min(start.elapsed().as_secs_f64());
    }
    (best * 1e9 / xs.len() as f64, out)
}

fn run_bench(reps: u32) -> Result<(), Failure> {
    if reps == 0 {
        return Err(anyhow!("--reps must be at least 1")).exit_with(EXIT_USAGE);
    }
    let xs = bench_inputs();
    type Variant = (&'static str, Box<dyn Fn(f32) -> f32>);
    let variants: [Variant; 4] = [
        ("invsqrt k=0", Box::new(|x| invsqrt_raw(x, BENCH_MAGIC, 0))),
        ("invsqrt k=1", Box::new(|x| invsqrt_raw(x, BENCH_MAGIC, 1))),
        ("invsqrt k=2", Box::new(|x| invsqrt_raw(x, BENCH_MAGIC, 2))),
        ("library 1/sqrt", Box::new(|x| 1.0 / x.sqrt())),
    ];
    println!(
        "workload   {BENCH_INPUTS} inputs, seed 0x{BENCH_SEED:X}, R 0x{BENCH_MAGIC:08X}, best of {reps}"
    );
    let mut checksum: u64 = 0xCBF2_9CE4_8422_2325;
    let mut timings = Vec::new();
    for (name, f) in &variants {
        let (ns, out) = time_variant(&xs, reps, f);
        for y in out {
            checksum = (checksum ^ u64::from(y.to_bits())).wrapping_mul(0x0100_0000_01B3);
        }
        println!("{name:<15} {ns:>8.3} ns/op");
        timings.push(ns);
    }
    println!("checksum   0x{checksum:016X}");
    println!(
        "ratio      {:.3} (library / invsqrt k=1; hardware-dependent, informational)",
        timings[3] / timings[1]
    );
    Ok(())
}
