use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use circcons::bundle::{generated_graph_file, reduce_mscs_to_ccs, reduce_mscs_to_dtw, reduce_rmcc_to_mscs, GenMode};
use circcons::ccs::solve_ccs_exhaustive;
use circcons::costfn::CostFamily;
use circcons::dtw::{dtw_sq, solve_mean_exact};
use circcons::io::{load_graph, Instance, InstanceFile};
use circcons::mscs::{all_optima, solve_exhaustive, MscsInstance};
use circcons::reductions::{DtwOverrides, MscsOverrides};
use circcons::rmcc::solve_clique_bruteforce;
use circcons::verify::{parse_cost_family, verify};
use circcons::{Error, Guard, Rational};

#[derive(Parser)]
#[command(name = "circcons", version, about = "Exact circular consensus solvers and reductions")]
struct Cli {
    /// Limit on enumerated states for exponential procedures.
    #[arg(long, global = true, default_value_t = 50_000_000)]
    guard_states: u128,
    /// Limit on warping-path tuples visited by the brute-force mean oracle.
    #[arg(long, global = true, default_value_t = 200_000_000)]
    guard_paths: u128,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Planted,
    Random,
    NoInstance,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduction {
    RmccToMscs,
    MscsToCcs,
    MscsToDtw,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a regular multicolored clique instance.
    GenRmcc {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value = "planted")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the plain-text graph format instead of JSON.
        #[arg(long)]
        text: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find the lexicographically first multicolored clique.
    SolveRmcc { file: PathBuf },
    /// Apply a construction and write the bundle.
    Reduce {
        #[arg(value_enum)]
        which: Reduction,
        file: PathBuf,
        #[arg(long, default_value = "sigma")]
        cost_fn: String,
        #[arg(long)]
        override_lambda: Option<usize>,
        #[arg(long)]
        override_m: Option<usize>,
        #[arg(long)]
        override_r: Option<usize>,
        /// Permit the DTW construction below k = 15.
        #[arg(long)]
        allow_small_k: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exhaustive f-MSCS search.
    SolveMscs {
        file: PathBuf,
        /// Replace the file's cost function with a built-in one.
        #[arg(long)]
        cost_fn: Option<String>,
        /// Only try shifts that are multiples of this stride.
        #[arg(long)]
        stride: Option<usize>,
        /// List every optimal shift vector.
        #[arg(long)]
        all_optima: bool,
    },
    /// Exhaustive circular consensus string search.
    SolveCcs { file: PathBuf },
    /// Squared DTW distance between every pair of series.
    DtwDist { file: PathBuf },
    /// Exact DTW mean.
    DtwMean {
        file: PathBuf,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Verify an instance file or reduction bundle.
    Verify {
        file: PathBuf,
        /// Print the canonical JSON report.
        #[arg(long)]
        json: bool,
    },
}

fn show(v: &Rational) -> String {
    format!("{v} ({})", v.to_decimal(6))
}

fn load(path: &Path) -> Result<(InstanceFile, Instance), Error> {
    let file = InstanceFile::load(path)?;
    let inst = file.validate()?;
    Ok((file, inst))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn decision(cost: &Rational, target: Option<&Rational>) -> ExitCode {
    match target {
        Some(t) if cost <= t => {
            println!("decision yes (target {t})");
            ExitCode::SUCCESS
        }
        Some(t) => {
            println!("decision no (target {t})");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}

fn wrong_kind(path: &Path, want: &str, got: &str) -> Error {
    Error::InvalidArgument(format!("{} holds a {got} instance, expected {want}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let guard = Guard {
        max_states: cli.guard_states,
        max_paths: cli.guard_paths,
    };
    match cli.cmd {
        Cmd::GenRmcc { k, n, d, mode, seed, text, output } => {
            let mode = match mode {
                Mode::Planted => GenMode::Planted,
                Mode::Random => GenMode::Random,
                Mode::NoInstance => GenMode::NoInstance,
            };
            let file = generated_graph_file(k, n, d, mode, seed, &guard)?;
            let out = if text {
                let Instance::Rmcc(g) = file.validate()? else { unreachable!() };
                g.to_text()
            } else {
                file.to_json()
            };
            emit(&out, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::SolveRmcc { file } => {
            let (g, _) = load_graph(&file)?;
            match solve_clique_bruteforce(&g, &guard)? {
                Some(c) => {
                    println!("clique {c}");
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("no multicolored clique");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Reduce {
            which,
            file,
            cost_fn,
            override_lambda,
            override_m,
            override_r,
            allow_small_k,
            output,
        } => {
            let src = match which {
                Reduction::RmccToMscs => {
                    let (g, f) = load_graph(&file)?;
                    f.unwrap_or_else(|| InstanceFile::rmcc(&g))
                }
                _ => InstanceFile::load(&file)?,
            };
            let out = match which {
                Reduction::RmccToMscs => {
                    let family = parse_cost_family(&cost_fn)?;
                    let ov = MscsOverrides { lambda: override_lambda };
                    reduce_rmcc_to_mscs(&src, &family, &ov, &guard)?
                }
                Reduction::MscsToCcs => reduce_mscs_to_ccs(&src)?,
                Reduction::MscsToDtw => {
                    let ov = DtwOverrides {
                        m: override_m,
                        r: override_r,
                        allow_small_k,
                    };
                    reduce_mscs_to_dtw(&src, &ov, &guard)?
                }
            };
            let prov = out.provenance.as_ref().expect("bundles carry provenance");
            if prov.outside_proof_regime {
                eprintln!("warning: parameters are outside the proof regime; separation is not guaranteed");
            }
            if let Some(t) = &out.target {
                eprintln!("target {}", show(t));
            }
            emit(&out.to_json(), output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::SolveMscs {
            file,
            cost_fn,
            stride,
            all_optima: list,
        } => {
            let (f, inst) = load(&file)?;
            let Instance::Mscs(mut inst) = inst else {
                return Err(wrong_kind(&file, "mscs", f.kind()));
            };
            if let Some(name) = cost_fn {
                let family: CostFamily = parse_cost_family(&name)?;
                let table = family.at_arity(inst.k())?;
                inst = MscsInstance::new(inst.strings, table, inst.target)?;
            }
            let sol = solve_exhaustive(&inst, stride, &guard)?;
            println!("optimal {}, delta {}", show(&sol.cost), sol.delta);
            if let Some(s) = sol.stride {
                println!("searched {} shift vectors with stride {s}", sol.searched);
            }
            if list {
                for d in all_optima(&inst, stride, &guard, usize::MAX)? {
                    println!("  {d}");
                }
            }
            Ok(decision(&sol.cost, inst.target.as_ref()))
        }
        Cmd::SolveCcs { file } => {
            let (f, inst) = load(&file)?;
            let Instance::Ccs { strings, target } = inst else {
                return Err(wrong_kind(&file, "ccs", f.kind()));
            };
            let sol = solve_ccs_exhaustive(&strings, &guard)?;
            println!("optimal {}, consensus {}, delta {}", sol.cost, sol.consensus, sol.delta);
            Ok(decision(&Rational::from(sol.cost as usize), target.as_ref()))
        }
        Cmd::DtwDist { file } => {
            let (f, inst) = load(&file)?;
            let Instance::Dtw(inst) = inst else {
                return Err(wrong_kind(&file, "dtw", f.kind()));
            };
            for a in 0..inst.series.len() {
                for b in a + 1..inst.series.len() {
                    let (d, path) = dtw_sq(&inst.series[a], &inst.series[b]);
                    let pairs: Vec<String> = path.pairs().iter().map(|(i, j)| format!("({i},{j})")).collect();
                    println!("dtw({},{}) = {}, path {}", a + 1, b + 1, show(&d), pairs.join(" "));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::DtwMean { file, max_len } => {
            let (f, inst) = load(&file)?;
            let Instance::Dtw(inst) = inst else {
                return Err(wrong_kind(&file, "dtw", f.kind()));
            };
            let sol = solve_mean_exact(&inst.series, max_len, &guard)?;
            println!("optimal {}, mean {}", show(&sol.cost), sol.mean);
            if sol.at_cap {
                println!("note: optimum reached the length cap {}", sol.max_len);
            }
            Ok(decision(&sol.cost, inst.target.as_ref()))
        }
        Cmd::Verify { file, json } => {
            let f = InstanceFile::load(&file)?;
            let rep = verify(&f, &guard)?;
            if json {
                print!("{}", rep.canonical_json());
            } else {
                print!("{}", rep.to_text());
            }
            eprintln!("verified in {:.3} s", rep.elapsed.as_secs_f64());
            Ok(if rep.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_guard() { 3 } else { 2 })
        }
    }
}
