//! The `dmatch` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::adversary::{
    check_det_ub_conditions, det_ub_sequence, greedy_hard_instance, rand_ub_family,
};
use crate::analysis::{
    bound_of_c_unchecked, find_cstar, verify_ft_claim, verify_ratio_all1, Branch,
};
use crate::error::{Error, Result};
use crate::harness::{dp_best_det, expected_opt_prefix, monte_carlo, prefix_worst_ratio};
use crate::instance::{sorted_opt, Instance, ValueReport};
use crate::io::{instance_to_json, read_instance};
use crate::numfmt::g17;
use crate::online::{
    draw_offsets, run_greedy, run_interval, DeterministicAlgorithm, IntervalParams, TieRule,
};
use crate::DEFAULT_C;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Certification passes when every excess stays below this.
const CERTIFY_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "dmatch",
    version,
    about = "Online matching with decomposable weights and free disposal"
)]
struct Cli {
    /// Base seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format of reports (`mc` defaults to csv).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Greedy,
    Interval,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an adversarial instance file.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Offline optimum of an instance.
    Opt {
        #[arg(long)]
        instance: PathBuf,
    },
    /// One online run against the optimum.
    Run(RunArgs),
    /// Competitive bound of the interval algorithm for base c.
    Bound {
        #[arg(long, default_value_t = DEFAULT_C)]
        c: f64,
    },
    /// Base maximizing the bound on [lo, hi].
    Cstar {
        #[arg(long, default_value_t = std::f64::consts::E)]
        lo: f64,
        #[arg(long, default_value_t = 6.0)]
        hi: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Grid certification of the analytic inequalities at base c.
    Certify {
        #[arg(long, default_value_t = DEFAULT_C)]
        c: f64,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        #[arg(long, default_value_t = 1_000)]
        t_grid: usize,
    },
    /// Monte-Carlo run of the randomized interval algorithm.
    Mc {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_C)]
        c: f64,
        #[arg(long, default_value_t = 1_000)]
        trials: usize,
        /// Worker threads; results do not depend on it.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Also write the summary JSON here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Worst prefix ratio of a deterministic algorithm on the det-ub instance.
    LbDet {
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[command(flatten)]
        alg: DetAlgArgs,
    },
    /// Best deterministic value against the doubling prefix distribution.
    LbRand {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
enum GenFamily {
    /// Instance on which greedy is about 1/(2 - eps) competitive.
    GreedyHard {
        #[arg(long)]
        eps: f64,
    },
    /// Recurrence instance defeating every deterministic algorithm.
    DetUb {
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        /// Sidecar path; defaults to `<out>.sidecar.json`.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Full doubling sequence of the prefix distribution.
    RandUb {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct DetAlgArgs {
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Greedy)]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = TieRule::PreferFastest)]
    tie: TieRule,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// Interval offsets, one per machine by speed rank, or a single value
    /// used for all.
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    alg: DetAlgArgs,
    /// Trial index for random offsets when --x is absent.
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

impl DetAlgArgs {
    fn offsets(&self, machines: usize) -> Option<Vec<f64>> {
        match self.x.as_slice() {
            [] => None,
            [x] => Some(vec![*x; machines]),
            xs => Some(xs.to_vec()),
        }
    }

    fn build(&self, instance: &Instance, default_x: f64) -> Result<DeterministicAlgorithm> {
        Ok(match self.algorithm {
            AlgorithmArg::Greedy => DeterministicAlgorithm::Greedy(self.tie),
            AlgorithmArg::Interval => {
                let m = instance.num_machines();
                let x = self.offsets(m).unwrap_or_else(|| vec![default_x; m]);
                DeterministicAlgorithm::Interval(IntervalParams::new(self.c, x)?)
            }
        })
    }
}

/// An ordered flat report rendered as one JSON object or a two-line CSV.
#[derive(Default)]
struct Report {
    fields: Vec<(&'static str, Field)>,
}

enum Field {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Null,
    Nums(Vec<f64>),
    Ints(Vec<usize>),
}

impl Report {
    fn with(mut self, key: &'static str, value: Field) -> Self {
        self.fields.push((key, value));
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let body: Vec<String> = self
                    .fields
                    .iter()
                    .map(|(k, v)| format!("\"{k}\":{}", v.json()))
                    .collect();
                format!("{{{}}}\n", body.join(","))
            }
            Format::Csv => {
                let keys: Vec<&str> = self.fields.iter().map(|(k, _)| *k).collect();
                let vals: Vec<String> = self.fields.iter().map(|(_, v)| v.csv()).collect();
                format!("{}\n{}\n", keys.join(","), vals.join(","))
            }
        }
    }
}

impl Field {
    fn json(&self) -> String {
        match self {
            Field::Num(x) => g17(*x),
            Field::Int(i) => i.to_string(),
            Field::Text(s) => serde_json::to_string(s).expect("string serializes"),
            Field::Bool(b) => b.to_string(),
            Field::Null => "null".into(),
            Field::Nums(xs) => crate::numfmt::g17_array(xs),
            Field::Ints(xs) => {
                let items: Vec<String> = xs.iter().map(|i| i.to_string()).collect();
                format!("[{}]", items.join(","))
            }
        }
    }

    fn csv(&self) -> String {
        match self {
            Field::Text(s) => s.clone(),
            Field::Null => String::new(),
            Field::Nums(xs) => xs.iter().map(|&x| g17(x)).collect::<Vec<_>>().join(";"),
            Field::Ints(xs) => xs
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            other => other.json(),
        }
    }
}

fn opt_field(x: Option<f64>) -> Field {
    x.map_or(Field::Null, Field::Num)
}

fn value_fields(report: Report, v: &ValueReport) -> Report {
    report
        .with("alg_value", Field::Num(v.alg_value))
        .with("opt_value", Field::Num(v.opt_value))
        .with("ratio", opt_field(v.ratio))
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

/// Parses `std::env::args` and runs, returning the process exit code.
pub fn run_cli() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the command line `args` (program name first) against the given
/// streams and returns the exit code.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "dmatch: usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(err, "dmatch: {e}");
            if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_VALIDATION
            }
        }
    }
}

fn emit(cli: &Cli, out: &mut dyn Write, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => write_file(path, text),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".sidecar.json");
    PathBuf::from(s)
}

fn dispatch(
    cli: &Cli,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let format = cli.format.unwrap_or(Format::Json);
    let report = |r: Report, out: &mut dyn Write| emit(cli, out, &r.render(format));
    match &cli.command {
        Command::Gen { family } => {
            if format != Format::Json {
                return Err(Failure::Usage("gen writes JSON instance files only".into()));
            }
            match family {
                GenFamily::GreedyHard { eps } => {
                    emit(cli, out, &instance_to_json(&greedy_hard_instance(*eps)?))?
                }
                GenFamily::RandUb { n } => {
                    let inst = rand_ub_family(*n)?.full_instance()?;
                    emit(cli, out, &instance_to_json(&inst))?
                }
                GenFamily::DetUb { delta, sidecar } => {
                    let seq = det_ub_sequence(*delta)?;
                    let inst = instance_to_json(&seq.instance()?);
                    let side = seq.sidecar_json();
                    match (&cli.out, sidecar) {
                        (Some(path), side_path) => {
                            write_file(path, &inst)?;
                            let side_path = side_path.clone().unwrap_or_else(|| sidecar_path(path));
                            write_file(&side_path, &side)?;
                        }
                        (None, Some(side_path)) => {
                            out.write_all(inst.as_bytes()).map_err(Error::from)?;
                            write_file(side_path, &side)?;
                        }
                        (None, None) => {
                            out.write_all(inst.as_bytes()).map_err(Error::from)?;
                            out.write_all(side.as_bytes()).map_err(Error::from)?;
                        }
                    }
                }
            }
        }
        Command::Opt { instance } => {
            let inst = read_instance(instance)?;
            let sol = sorted_opt(&inst);
            let (machines, jobs): (Vec<usize>, Vec<usize>) = sol.pairs.iter().copied().unzip();
            report(
                Report::default()
                    .with("opt_value", Field::Num(sol.value))
                    .with("machines", Field::Ints(machines))
                    .with("jobs", Field::Ints(jobs)),
                out,
            )?;
        }
        Command::Run(args) => {
            let inst = read_instance(&args.instance)?;
            let r = match args.alg.algorithm {
                AlgorithmArg::Greedy => {
                    let (_, v) = run_greedy(&inst, args.alg.tie);
                    value_fields(
                        Report::default()
                            .with("algorithm", Field::Text("greedy".into()))
                            .with("tie", Field::Text(args.alg.tie.to_string())),
                        &v,
                    )
                }
                AlgorithmArg::Interval => {
                    let m = inst.num_machines();
                    let x = args
                        .alg
                        .offsets(m)
                        .unwrap_or_else(|| draw_offsets(cli.seed, args.trial, m));
                    let (_, v) = run_interval(&inst, &IntervalParams::new(args.alg.c, x.clone())?)?;
                    value_fields(
                        Report::default()
                            .with("algorithm", Field::Text("interval".into()))
                            .with("c", Field::Num(args.alg.c))
                            .with("x", Field::Nums(x)),
                        &v,
                    )
                }
            };
            report(r, out)?;
        }
        Command::Bound { c } => {
            let b = bound_of_c_unchecked(*c)?;
            let active = match b.active {
                Branch::Ratio => "ratio",
                Branch::H => "h",
            };
            report(
                Report::default()
                    .with("c", Field::Num(b.c))
                    .with("bound", Field::Num(b.bound))
                    .with("ratio_branch", Field::Num(b.ratio_branch))
                    .with("h_branch", Field::Num(b.h_branch))
                    .with("active", Field::Text(active.into()))
                    .with("outside_guarantee", Field::Bool(b.outside_guarantee)),
                out,
            )?;
        }
        Command::Cstar { lo, hi, tol } => {
            let s = find_cstar(*lo, *hi, *tol)?;
            report(
                Report::default()
                    .with("c", Field::Num(s.c))
                    .with("bound", Field::Num(s.bound)),
                out,
            )?;
        }
        Command::Certify { c, grid, t_grid } => {
            let ratio = verify_ratio_all1(*c, *grid)?;
            let ft = verify_ft_claim(*c, *t_grid)?;
            report(
                Report::default()
                    .with("c", Field::Num(*c))
                    .with("grid", Field::Int(*grid as u64))
                    .with("max_violation", Field::Num(ratio))
                    .with("t_grid", Field::Int(*t_grid as u64))
                    .with("ft_max_excess", Field::Num(ft))
                    .with(
                        "holds",
                        Field::Bool(ratio <= CERTIFY_TOL && ft <= CERTIFY_TOL),
                    ),
                out,
            )?;
        }
        Command::Mc {
            instance,
            c,
            trials,
            threads,
            summary,
        } => {
            let inst = read_instance(instance)?;
            let stats = monte_carlo(&inst, *c, *trials, cli.seed, *threads)?;
            let main = match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => stats.csv(),
                Format::Json => stats.summary_json(),
            };
            emit(cli, out, &main)?;
            if let Some(path) = summary {
                write_file(path, &stats.summary_json())?;
            }
            let _ = writeln!(err, "{}", stats.human_summary());
        }
        Command::LbDet { delta, alg } => {
            let seq = det_ub_sequence(*delta)?;
            let inst = seq.instance()?;
            let check = check_det_ub_conditions(seq.a, seq.r, &seq.w);
            let worst = prefix_worst_ratio(&inst, &alg.build(&inst, 1.0)?)?;
            let name = match alg.algorithm {
                AlgorithmArg::Greedy => "greedy",
                AlgorithmArg::Interval => "interval",
            };
            report(
                Report::default()
                    .with("delta", Field::Num(seq.delta))
                    .with("a", Field::Num(seq.a))
                    .with("r", Field::Num(seq.r))
                    .with("n", Field::Int(seq.n as u64))
                    .with("conditions_hold", Field::Bool(check.passed()))
                    .with("algorithm", Field::Text(name.into()))
                    .with("min_ratio", Field::Num(worst.min_ratio))
                    .with("argmin_prefix", Field::Int(worst.argmin_prefix as u64)),
                out,
            )?;
        }
        Command::LbRand { n } => {
            let family = rand_ub_family(*n)?;
            let dp = dp_best_det(*n)?.value();
            let linear = family.normalizer * *n as f64 + 1.0;
            let e = expected_opt_prefix(*n)?;
            report(
                Report::default()
                    .with("n", Field::Int(*n as u64))
                    .with("c", Field::Num(family.normalizer))
                    .with("dp_value", Field::Num(dp))
                    .with("linear_bound", Field::Num(linear))
                    .with("expected_opt", Field::Num(e))
                    .with("ratio", Field::Num(dp / e))
                    .with("bound_ratio", Field::Num(linear / e)),
                out,
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("dmatch").chain(args.iter().copied());
        let code = run_cli_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn bound_report() {
        let (code, out, _) = run(&["bound", "--c", "3.55829"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let b = v["bound"].as_f64().unwrap();
        assert!((0.5663..=0.5665).contains(&b));
        assert_eq!(v["active"], "ratio");
        let (_, csv, _) = run(&["bound", "--format", "csv"]);
        assert!(csv.starts_with("c,bound,ratio_branch,h_branch,active,outside_guarantee\n3.55829,"));
    }

    #[test]
    fn gen_greedy_hard_to_stdout() {
        let (code, out, _) = run(&["gen", "greedy-hard", "--eps", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "{\"version\":1,\"speeds\":[1,0.5],\"jobs\":[2,4]}\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&["bound", "--c", "abc"]).0, EXIT_USAGE);
        assert_eq!(run(&["bound", "--bogus"]).0, EXIT_USAGE);
        let (code, _, err) = run(&["opt", "--instance", "/nonexistent/x.json"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert_eq!(err.lines().count(), 1);
        assert_eq!(run(&["gen", "greedy-hard", "--eps", "2"]).0, EXIT_NUMERIC);
        assert_eq!(run(&["cstar", "--lo", "4", "--hi", "6"]).0, EXIT_NUMERIC);
        assert_eq!(
            run(&["gen", "rand-ub", "--n", "3", "--format", "csv"]).0,
            EXIT_USAGE
        );
        assert_eq!(run(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn lb_rand_report() {
        let (code, out, _) = run(&["lb-rand", "--n", "60"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["ratio"].as_f64().unwrap() <= 0.81);
        assert!(v["dp_value"].as_f64().unwrap() <= v["linear_bound"].as_f64().unwrap());
    }

    #[test]
    fn lb_det_report() {
        let (code, out, _) = run(&["lb-det", "--algorithm", "interval"]);
        assert_eq!(code, 0, "{out}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["conditions_hold"], true);
        assert!(v["min_ratio"].as_f64().unwrap() <= 0.62);
    }
}
