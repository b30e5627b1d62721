use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::Args;
use wadgelab::annuli::{parse_ladder, RadiusLadder, Rational};
use wadgelab::graphs::default_truncation;
use wadgelab::sequences::{parse_sequence_file, IndexSequence};
use wadgelab::unfoldings::GraphPair;

/// A bad flag combination or value; the process exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Reads a file, or standard input for `-`.
pub fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn resolve(
    flag: &str,
    inline: Option<&String>,
    file: Option<&PathBuf>,
) -> Result<IndexSequence> {
    match (inline, file) {
        (Some(_), Some(_)) => usage(format!(
            "--{flag} and --{flag}-file both given; pass the sequence one way"
        )),
        (Some(s), None) => s
            .parse()
            .map_err(|e| UsageError(format!("--{flag} \"{s}\": {e}")).into()),
        (None, Some(p)) => {
            let text = read_input(p)?;
            let seqs = parse_sequence_file(&text)
                .map_err(|e| UsageError(format!("--{flag}-file {}: {e}", p.display())))?;
            match seqs.into_iter().next() {
                Some(s) => Ok(s),
                None => usage(format!("--{flag}-file {} holds no sequence", p.display())),
            }
        }
        (None, None) => usage(format!("missing --{flag} (or --{flag}-file)")),
    }
}

#[derive(Args, Debug)]
pub struct SeqArg {
    /// Index sequence, e.g. "0 1 3 6".
    #[arg(long)]
    pub seq: Option<String>,
    /// File whose first sequence line is used.
    #[arg(long)]
    pub seq_file: Option<PathBuf>,
}

impl SeqArg {
    pub fn get(&self) -> Result<IndexSequence> {
        resolve("seq", self.seq.as_ref(), self.seq_file.as_ref())
    }
}

#[derive(Args, Debug)]
pub struct SeqPair {
    /// Index sequence for G_m.
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub m_file: Option<PathBuf>,
    /// Index sequence for G_n.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub n_file: Option<PathBuf>,
}

impl SeqPair {
    pub fn given(&self) -> bool {
        self.m.is_some() || self.m_file.is_some() || self.n.is_some() || self.n_file.is_some()
    }

    pub fn get(&self) -> Result<(IndexSequence, IndexSequence)> {
        Ok((
            resolve("m", self.m.as_ref(), self.m_file.as_ref())?,
            resolve("n", self.n.as_ref(), self.n_file.as_ref())?,
        ))
    }
}

#[derive(Args, Debug)]
pub struct PairArgs {
    #[command(flatten)]
    pub seqs: SeqPair,
    /// Last vertex of the G_m truncation; defaults to 2 m_last - 1.
    #[arg(long)]
    pub hi_m: Option<i64>,
    /// Last vertex of the G_n truncation; defaults to 2 n_last - 1.
    #[arg(long)]
    pub hi_n: Option<i64>,
}

impl PairArgs {
    pub fn pair(&self) -> Result<Arc<GraphPair>> {
        let (m, n) = self.seqs.get()?;
        let hm = self.hi_m.unwrap_or_else(|| default_truncation(&m));
        let hn = self.hi_n.unwrap_or_else(|| default_truncation(&n));
        let pair = GraphPair::with_truncation(m, n, hm, hn)
            .map_err(|e| UsageError(format!("--hi-m/--hi-n: {e}")))?;
        Ok(Arc::new(pair))
    }
}

#[derive(Args, Debug)]
pub struct LadderArg {
    /// Ladder file (`ladder <r_outer>` then `rung <t> <p/q>` lines).
    #[arg(long)]
    pub ladder: Option<PathBuf>,
    /// Integer ladder with rungs 0..=N instead of a file.
    #[arg(long)]
    pub rungs: Option<usize>,
}

impl LadderArg {
    pub fn get(&self) -> Result<RadiusLadder> {
        match (&self.ladder, self.rungs) {
            (Some(_), Some(_)) => usage("--ladder and --rungs both given"),
            (Some(p), None) => {
                let text = read_input(p)?;
                parse_ladder(&text).map_err(|e| UsageError(format!("{}: {e}", p.display())).into())
            }
            (None, Some(0)) => usage("--rungs must be at least 1"),
            (None, Some(n)) => Ok(RadiusLadder::integer(n)),
            (None, None) => usage("missing --ladder (or --rungs)"),
        }
    }
}

pub fn rational(flag: &str, s: &str) -> Result<Rational> {
    s.parse::<Rational>()
        .map_err(|_| UsageError(format!("--{flag} \"{s}\" is not a rational p/q")).into())
}

/// `WADGELAB_WORKERS`, default 1.
pub fn workers() -> Result<usize> {
    match std::env::var("WADGELAB_WORKERS") {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => usage(format!("WADGELAB_WORKERS={v} is not a positive integer")),
        },
    }
}
