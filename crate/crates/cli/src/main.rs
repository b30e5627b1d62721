mod input;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use wadgelab::annuli::{
    classify_radius, extract_walk, parse_ladder, parse_profile, AnnulusError, RadiusLadder,
};
use wadgelab::formats::{
    parse_graph, parse_map_stream, parse_maps, parse_unfolding, FormatError, GraphDump,
};
use wadgelab::graphs::{build_gn, default_truncation, validate_reduction};
use wadgelab::oracles::{
    parse_corpus, run_campaign, sentinel, Bounds, Campaign, LemmaId, OracleError,
};
use wadgelab::render::{render_annuli, RenderFormat};
use wadgelab::sequences::{
    e_tail_check, generate_inequivalent_family, write_sequence_file, DeltaSequence,
};
use wadgelab::unfoldings::{
    coverage_with, extend_unfolding, CoverageOptions, ExtendCase, UnfoldingError, WalkSpace,
};

use input::{
    read_input, usage, workers, write_output, LadderArg, PairArgs, SeqArg, SeqPair, UsageError,
};

#[derive(Parser, Debug)]
#[command(
    name = "wadgelab",
    version,
    about = "Colored interval graphs, unfoldings and annulus blocks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build G_n and print its dump.
    Graph {
        #[command(flatten)]
        seq: SeqArg,
        /// Last vertex; defaults to 2 n_last - 1.
        #[arg(long)]
        hi: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a reduction dump against a target graph, or unfolding dumps against G_m and G_n.
    Validate {
        /// Reduction dump (`graph` block plus `f`/`fe` lines).
        #[arg(long, conflicts_with = "unfolding")]
        reduction: Option<PathBuf>,
        /// Target graph dump for --reduction.
        #[arg(long)]
        target: Option<PathBuf>,
        #[command(flatten)]
        seq: SeqArg,
        /// Truncation of the target built from --seq.
        #[arg(long)]
        hi: Option<i64>,
        /// File of unfolding dumps separated by blank lines.
        #[arg(long)]
        unfolding: Option<PathBuf>,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Print every unfolding with at most --max-domain vertices.
    Enumerate {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 4)]
        max_domain: usize,
        /// Keep only walks through (0, l).
        #[arg(long)]
        seed_l: Option<i64>,
        /// Forbid this vertex on the G_m side.
        #[arg(long)]
        forbid_t: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The G_m vertices reached by unfoldings through (0, l).
    Coverage {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        l: i64,
        #[arg(long)]
        forbid_t: Option<i64>,
        /// Cross-check against naive walk enumeration.
        #[arg(long)]
        oracle: bool,
        /// Walk bound for --oracle; defaults to one more than the search depth.
        #[arg(long, requires = "oracle")]
        max_domain: Option<usize>,
    },
    /// Extend an unfolding at (k, l) and print the result.
    Extend {
        #[command(flatten)]
        pair: PairArgs,
        /// Unfolding dump to extend.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        case: u8,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        l: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label radii with their D/E block.
    Classify {
        #[command(flatten)]
        ladder: LadderArg,
        #[command(flatten)]
        seq: SeqArg,
        /// Radius as p/q; repeatable.
        #[arg(long, required = true, num_args = 1..)]
        r: Vec<String>,
    },
    /// Turn a radius profile into an unfolding.
    Profile {
        /// Profile file (`profile` then `pt <param> <alpha> [beta]` lines).
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        ladder: LadderArg,
        /// Ladder for the beta side; defaults to the alpha ladder.
        #[arg(long)]
        beta_ladder: Option<PathBuf>,
        #[arg(long, conflicts_with = "beta_ladder")]
        beta_rungs: Option<usize>,
        #[command(flatten)]
        seqs: SeqPair,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the D/E blocks of a ladder.
    Render {
        #[command(flatten)]
        ladder: LadderArg,
        #[command(flatten)]
        seq: SeqArg,
        /// Outermost rung drawn; defaults to the last rung.
        #[arg(long)]
        hi_block: Option<usize>,
        #[arg(long, default_value = "ascii")]
        format: RenderFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tail equivalence of two difference sequences on a finite window.
    Etail {
        #[command(flatten)]
        seqs: SeqPair,
        /// Differences of the first sequence, instead of --m.
        #[arg(long, conflicts_with_all = ["m", "m_file"])]
        dm: Option<String>,
        /// Differences of the second sequence, instead of --n.
        #[arg(long, conflicts_with_all = ["n", "n_file"])]
        dn: Option<String>,
        #[arg(long, default_value_t = 8)]
        max_shift: u64,
        #[arg(long, default_value_t = 2)]
        min_overlap: usize,
    },
    /// Pairwise tail-inequivalent index sequences.
    Family {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one lemma over a corpus of sequence pairs.
    Campaign {
        #[arg(long)]
        lemma: LemmaId,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[command(flatten)]
        seqs: SeqPair,
        #[arg(long, default_value_t = 6)]
        max_domain: usize,
        #[arg(long)]
        hi: Option<i64>,
        #[arg(long, default_value_t = 8)]
        max_shift: u64,
        #[arg(long, default_value_t = 2)]
        min_overlap: usize,
    },
}

/// Whether the command found what it was asked to check.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Graph { seq, hi, out } => {
            let s = seq.get()?;
            let hi = hi.unwrap_or_else(|| default_truncation(&s));
            let g = build_gn(&s, hi).map_err(|e| UsageError(format!("--hi {hi}: {e}")))?;
            write_output(out.as_deref(), &GraphDump(&g).to_string())?;
            Ok(Outcome::Pass)
        }
        Command::Validate {
            reduction,
            target,
            seq,
            hi,
            unfolding,
            pair,
        } => match (reduction, unfolding) {
            (Some(r), None) => validate_reduction_file(&r, target, &seq, hi),
            (None, Some(u)) => validate_unfoldings(&u, &pair),
            _ => usage("pass exactly one of --reduction or --unfolding"),
        },
        Command::Enumerate {
            pair,
            max_domain,
            seed_l,
            forbid_t,
            out,
        } => {
            if max_domain < 2 {
                return usage("--max-domain must be at least 2");
            }
            if let Some(t) = forbid_t {
                if t < 1 {
                    return usage(format!("--forbid-t must be at least 1, got {t}"));
                }
            }
            let pair = pair.pair()?;
            let space = WalkSpace::new(pair.clone()).forbid_f_vertex(forbid_t);
            let mut walks = match seed_l {
                Some(l) if !(0..=pair.hi_n()).contains(&l) => {
                    return usage(format!("--seed-l {l} is outside [0,{}]", pair.hi_n()))
                }
                Some(l) => space.walks_through((0, l), max_domain),
                None => space.walks(2, max_domain),
            };
            let mut text = String::new();
            let mut count = 0usize;
            while let Some(w) = walks.next_walk() {
                let u = wadgelab::unfoldings::Unfolding::from_walk(pair.clone(), w)
                    .context("enumerated walk is not an unfolding")?;
                if count > 0 {
                    text.push('\n');
                }
                write!(text, "{u}")?;
                count += 1;
            }
            write_output(out.as_deref(), &text)?;
            eprintln!("enumerated {count} unfoldings");
            Ok(Outcome::Pass)
        }
        Command::Coverage {
            pair,
            l,
            forbid_t,
            oracle,
            max_domain,
        } => {
            let pair = pair.pair()?;
            let workers = workers()?;
            let opts = CoverageOptions {
                forbid_f_vertex: forbid_t,
                max_steps: None,
                workers,
            };
            let cov = coverage_with(pair.clone(), l, opts).map_err(flag_error)?;
            println!("{cov}");
            if !oracle {
                return Ok(Outcome::Pass);
            }
            let d = max_domain.unwrap_or(cov.depth + 1).max(2);
            let s = sentinel(pair, l, d, forbid_t, workers).map_err(flag_error)?;
            println!("engine max_domain={d} -> {}", interval(&s.engine));
            println!("oracle max_domain={d} -> {}", interval(&s.oracle));
            if s.agrees() {
                println!("agree");
                Ok(Outcome::Pass)
            } else {
                println!("MISMATCH");
                Ok(Outcome::Fail)
            }
        }
        Command::Extend {
            pair,
            input,
            case,
            k,
            l,
            out,
        } => {
            let pair = pair.pair()?;
            let text = read_input(&input)?;
            let x = match parse_unfolding(&text, pair) {
                Ok(x) => x,
                Err(FormatError::Unfolding(e @ UnfoldingError::InvalidReduction { .. })) => {
                    println!("{}: {e}", input.display());
                    return Ok(Outcome::Fail);
                }
                Err(e) => return usage(format!("{}: {e}", input.display())),
            };
            let case = ExtendCase::from_number(case).expect("clap range");
            let y = extend_unfolding(&x, k, l, case).map_err(flag_error)?;
            write_output(out.as_deref(), &y.to_string())?;
            Ok(Outcome::Pass)
        }
        Command::Classify { ladder, seq, r } => {
            let ladder = ladder.get()?;
            let s = seq.get()?;
            for text in &r {
                let radius = input::rational("r", text)?;
                let label = classify_radius(&ladder, &s, &radius).map_err(flag_error)?;
                println!("r={radius} {label}");
            }
            Ok(Outcome::Pass)
        }
        Command::Profile {
            profile,
            ladder,
            beta_ladder,
            beta_rungs,
            seqs,
            out,
        } => {
            let p = parse_profile(&read_input(&profile)?)
                .map_err(|e| UsageError(format!("{}: {e}", profile.display())))?;
            let alpha = ladder.get()?;
            let beta = match (beta_ladder, beta_rungs) {
                (Some(path), _) => parse_ladder(&read_input(&path)?)
                    .map_err(|e| UsageError(format!("{}: {e}", path.display())))?,
                (None, Some(n)) if n >= 1 => RadiusLadder::integer(n),
                (None, Some(_)) => return usage("--beta-rungs must be at least 1"),
                (None, None) => alpha.clone(),
            };
            let (m, n) = seqs.get()?;
            match extract_walk(&p, &alpha, &beta, &m, &n) {
                Ok(x) => {
                    let mut text = String::new();
                    for s in x.transitions() {
                        writeln!(
                            text,
                            "# sample t={} alpha={} {} beta={} {}",
                            s.param, s.alpha_radius, s.alpha, s.beta_radius, s.beta
                        )?;
                    }
                    write!(text, "{}", x.unfolding)?;
                    write_output(out.as_deref(), &text)?;
                    Ok(Outcome::Pass)
                }
                Err(
                    e @ (AnnulusError::ConsistencyViolation { .. }
                    | AnnulusError::UnclosableEnd { .. }),
                ) => {
                    println!("{e}");
                    Ok(Outcome::Fail)
                }
                Err(e) => usage(e.to_string()),
            }
        }
        Command::Render {
            ladder,
            seq,
            hi_block,
            format,
            out,
        } => {
            let ladder = ladder.get()?;
            let s = seq.get()?;
            let hi = hi_block.unwrap_or(ladder.last_rung());
            let text = render_annuli(&ladder, &s, hi, format)
                .map_err(|e| UsageError(format!("--hi-block {hi}: {e}")))?;
            write_output(out.as_deref(), &text)?;
            Ok(Outcome::Pass)
        }
        Command::Etail {
            seqs,
            dm,
            dn,
            max_shift,
            min_overlap,
        } => {
            if min_overlap == 0 {
                return usage("--min-overlap must be positive");
            }
            let side = |flag: &str,
                        delta: Option<String>,
                        inline: Option<&String>,
                        file: Option<&PathBuf>|
             -> Result<DeltaSequence> {
                match delta {
                    Some(d) => d
                        .parse()
                        .map_err(|e| UsageError(format!("--d{flag} \"{d}\": {e}")).into()),
                    None => Ok(input::resolve(flag, inline, file)?.delta()),
                }
            };
            let a = side("m", dm, seqs.m.as_ref(), seqs.m_file.as_ref())?;
            let b = side("n", dn, seqs.n.as_ref(), seqs.n_file.as_ref())?;
            println!("{}", e_tail_check(&a, &b, max_shift, min_overlap));
            Ok(Outcome::Pass)
        }
        Command::Family { count, length, out } => {
            let fam = generate_inequivalent_family(count, length).map_err(flag_error)?;
            write_output(out.as_deref(), &write_sequence_file(&fam))?;
            Ok(Outcome::Pass)
        }
        Command::Campaign {
            lemma,
            corpus,
            seqs,
            max_domain,
            hi,
            max_shift,
            min_overlap,
        } => {
            let pairs = match (corpus, seqs.given()) {
                (Some(_), true) => return usage("--corpus and --m/--n both given"),
                (Some(path), false) => parse_corpus(&read_input(&path)?)
                    .map_err(|e| UsageError(format!("{}: {e}", path.display())))?,
                (None, true) => vec![seqs.get()?],
                (None, false) => return usage("missing --corpus (or --m and --n)"),
            };
            let bounds = Bounds {
                max_domain,
                hi,
                max_shift,
                min_overlap,
            };
            let campaign = Campaign::new(lemma, pairs, bounds)
                .map_err(flag_error)?
                .with_workers(workers()?);
            let start = Instant::now();
            let report = run_campaign(&campaign);
            eprintln!("wall time {:.3}s", start.elapsed().as_secs_f64());
            match report {
                Ok(r) => {
                    println!("{r}");
                    Ok(if r.passed() {
                        Outcome::Pass
                    } else {
                        Outcome::Fail
                    })
                }
                Err(e @ OracleError::BoundsTooTight { .. }) => {
                    println!("{e}");
                    Ok(Outcome::Fail)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn flag_error(e: impl std::fmt::Display) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

/// `[0,b]` when the set is an interval from 0, the members otherwise.
fn interval(s: &BTreeSet<i64>) -> String {
    match s.last() {
        Some(&b) if s.first() == Some(&0) && s.len() as i64 == b + 1 => format!("[0,{b}]"),
        _ => format!("{s:?}"),
    }
}

fn validate_reduction_file(
    path: &Path,
    target: Option<PathBuf>,
    seq: &SeqArg,
    hi: Option<i64>,
) -> Result<Outcome> {
    let target = match target {
        Some(t) => {
            if seq.seq.is_some() || seq.seq_file.is_some() {
                return usage("--target and --seq both given");
            }
            parse_graph(&read_input(&t)?)
                .map_err(|e| UsageError(format!("{}: {e}", t.display())))?
        }
        None => {
            let s = seq.get()?;
            let hi = hi.unwrap_or_else(|| default_truncation(&s));
            build_gn(&s, hi).map_err(flag_error)?
        }
    };
    let dump = parse_maps(&read_input(path)?)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let r = dump
        .into_reduction(target.into())
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let report = validate_reduction(&r);
    print!("{report}");
    Ok(if report.is_ok() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn validate_unfoldings(path: &Path, pair: &PairArgs) -> Result<Outcome> {
    let pair = pair.pair()?;
    let dumps = parse_map_stream(&read_input(path)?)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    if dumps.is_empty() {
        return usage(format!("{} holds no unfolding", path.display()));
    }
    let mut outcome = Outcome::Pass;
    for (i, d) in dumps.into_iter().enumerate() {
        match d.into_unfolding(pair.clone()) {
            Ok(_) => println!("unfolding {i}: OK"),
            Err(FormatError::Unfolding(UnfoldingError::InvalidReduction { side, report })) => {
                println!("unfolding {i}: {side} is not a reduction");
                print!("{report}");
                outcome = Outcome::Fail;
            }
            Err(e) => return usage(format!("{} unfolding {i}: {e}", path.display())),
        }
    }
    Ok(outcome)
}
