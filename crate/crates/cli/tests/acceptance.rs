//! Release gate: runs every acceptance criterion at its stated bound and
//! prints one line per criterion. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use wadgelab::annuli::{
    classify_radius, extract_walk, parse_profile, AnnulusError, BlockKind, RadiusLadder, Rational,
};
use wadgelab::formats::parse_graph;
use wadgelab::graphs::{validate_reduction, Color, Edge};
use wadgelab::oracles::{
    admissible_seeds, parse_corpus, run_campaign, sentinel, valid_seeds, Bounds, Campaign, LemmaId,
};
use wadgelab::render::{render_annuli, RenderFormat};
use wadgelab::sequences::{
    e_tail_check, generate_inequivalent_family, parse_sequence_file, IndexSequence, TailKind,
};
use wadgelab::unfoldings::{coverage_in, sim_relation, GraphPair, ProductGraph};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn corpus_file(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn corpus_pairs(name: &str) -> Vec<(IndexSequence, IndexSequence)> {
    parse_corpus(&corpus_file(name)).expect("corpus parses")
}

fn seq(v: &[u64]) -> IndexSequence {
    IndexSequence::new(v.to_vec()).unwrap()
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn graph_colors() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_wadgelab"))
        .args(["graph", "--seq", "0 1 2 3", "--hi", "6"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("exit {}", out.status))?;
    let g = parse_graph(&String::from_utf8_lossy(&out.stdout)).map_err(|e| e.to_string())?;
    let bits = |cs: &[Color]| cs.iter().map(|c| c.bit()).collect::<Vec<u8>>();
    let (v, e) = (bits(g.vertex_colors()), bits(g.edge_colors()));
    ensure(v == [1, 0, 0, 1, 1, 0, 0], || {
        format!("vertex colors {v:?}")
    })?;
    ensure(e == [1, 0, 1, 0, 1, 0], || format!("edge colors {e:?}"))?;
    Ok(format!("vertices {v:?} edges {e:?}"))
}

fn five_rung_blocks() -> Outcome {
    let ladder = RadiusLadder::integer(5);
    let n = seq(&[0, 1, 2]);
    // (rung, kind, block, left closed, right closed)
    let expected = [
        (1, BlockKind::E, 0, true, Some(true)),
        (2, BlockKind::E, 0, true, Some(true)),
        (3, BlockKind::D, 1, false, Some(true)),
        (4, BlockKind::D, 2, true, Some(false)),
        (5, BlockKind::E, 2, true, None),
    ];
    for &(t, kind, j, lc, rc) in &expected {
        let b = classify_radius(&ladder, &n, &int(t)).map_err(|e| e.to_string())?;
        ensure(
            (b.kind, b.index, b.left_closed, b.right_closed, b.on_rung)
                == (kind, j, lc, rc, Some(t as usize)),
            || format!("rung {t}: got {b}"),
        )?;
    }
    let svg = render_annuli(&ladder, &n, 5, RenderFormat::Svg).map_err(|e| e.to_string())?;
    let mut solid = BTreeSet::new();
    let mut dashed = BTreeSet::new();
    for line in svg.lines().filter(|l| l.contains("data-rung=")) {
        let t: usize = line
            .split("data-rung=\"")
            .nth(1)
            .and_then(|r| r.split('"').next())
            .and_then(|t| t.parse().ok())
            .ok_or("bad svg circle")?;
        if line.contains("rung solid") {
            solid.insert(t);
        } else {
            dashed.insert(t);
        }
    }
    ensure(solid == BTreeSet::from([3, 4]), || {
        format!("solid rungs {solid:?}")
    })?;
    ensure(dashed == BTreeSet::from([1, 2, 5]), || {
        format!("dashed rungs {dashed:?}")
    })?;
    Ok("D rungs {3,4}, E rungs {1,2,5}, render agrees".into())
}

/// Whether `r` lies in block `kind(j)`, straight from the block definition
/// on an integer ladder: D(j) spans rungs `2j..2j+1`, E(j) spans
/// `2j+1..2j+2`, and each shared rung goes to exactly one side by the
/// parity of the block of `n` holding the relevant index.
fn in_block(n: &IndexSequence, kind: BlockKind, j: u64, r: &Rational) -> bool {
    let even = |k: u64| n.block_parity(k).map(|p| p.is_even());
    let (lo, hi) = match kind {
        BlockKind::D => (2 * j as i64, 2 * j as i64 + 1),
        BlockKind::E => (2 * j as i64 + 1, 2 * j as i64 + 2),
    };
    let (lo, hi) = (int(lo), int(hi));
    if *r > lo && *r < hi {
        return true;
    }
    let (has_lo, has_hi) = match kind {
        BlockKind::D => (even(j) == Ok(true), even(j) == Ok(false)),
        BlockKind::E => (even(j) == Ok(true), even(j + 1) == Ok(false)),
    };
    (*r == lo && has_lo) || (*r == hi && has_hi)
}

fn partition() -> Outcome {
    let seqs = parse_sequence_file(&corpus_file("sequences.txt")).map_err(|e| e.to_string())?;
    ensure(seqs.len() >= 20, || {
        format!("only {} sequences", seqs.len())
    })?;
    const POINTS: i64 = 10_000;
    let mut violations = Vec::new();
    for n in &seqs {
        let top = 2 * n.last() as usize + 1;
        let ladder = RadiusLadder::integer(top);
        for i in 0..POINTS {
            let r = Rational::new((top as i64 * i).into(), (POINTS - 1).into());
            let mut owners = Vec::new();
            for j in 0..=n.last() {
                for kind in [BlockKind::D, BlockKind::E] {
                    if in_block(n, kind, j, &r) {
                        owners.push((kind, j));
                    }
                }
            }
            match classify_radius(&ladder, n, &r) {
                Ok(b) if owners == [(b.kind, b.index)] => {}
                other => violations.push(format!(
                    "seq {} r={r}: {other:?} vs {owners:?}",
                    n.compact()
                )),
            }
        }
    }
    ensure(violations.is_empty(), || {
        format!("{} violations, first {}", violations.len(), violations[0])
    })?;
    Ok(format!(
        "{} radii x {} sequences, 0 violations",
        POINTS,
        seqs.len()
    ))
}

fn engine_oracle() -> Outcome {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for (m, n) in corpus_pairs("sentinel.txt") {
        let pair = Arc::new(GraphPair::new(m, n).map_err(|e| e.to_string())?);
        ensure(pair.hi_m() <= 20 && pair.hi_n() <= 20, || {
            "truncation above 20".into()
        })?;
        let graph = ProductGraph::new(pair.clone(), None);
        for l in valid_seeds(&graph) {
            let s = sentinel(pair.clone(), l, 10, None, 1).map_err(|e| e.to_string())?;
            checked += 1;
            if !s.agrees() {
                mismatches.push(format!(
                    "m={} n={} l={l}: engine {:?} oracle {:?}",
                    pair.m().compact(),
                    pair.n().compact(),
                    s.engine,
                    s.oracle
                ));
            }
        }
    }
    ensure(checked > 0, || "no seeds".into())?;
    ensure(mismatches.is_empty(), || mismatches.join("; "))?;
    Ok(format!("{checked} seeds, 0 mismatches"))
}

fn campaign(
    lemma: LemmaId,
    corpus: Vec<(IndexSequence, IndexSequence)>,
    max_domain: usize,
) -> Result<(usize, Vec<String>), String> {
    let bounds = Bounds {
        max_domain,
        ..Bounds::default()
    };
    let c = Campaign::new(lemma, corpus, bounds).map_err(|e| e.to_string())?;
    let report = run_campaign(&c).map_err(|e| e.to_string())?;
    ensure(report.passed(), || format!("{report}"))?;
    let notes = report
        .instances
        .iter()
        .flat_map(|i| i.notes.clone())
        .collect();
    Ok((report.checked(), notes))
}

fn extend() -> Outcome {
    let (checked, _) = campaign(LemmaId::Extend, corpus_pairs("extend.txt"), 6)?;
    Ok(format!("{checked} extensions, 0 failures"))
}

fn within_arrow() -> Outcome {
    let (checked, notes) = campaign(LemmaId::WithinArrow, corpus_pairs("arrows.txt"), 10)?;
    let all = notes.join(" ");
    for parity in ["(0,0)", "(0,1)", "(1,0)", "(1,1)"] {
        ensure(all.contains(parity), || {
            format!("parity {parity} not exercised")
        })?;
    }
    Ok(format!(
        "{checked} unfoldings, all four parities, 0 failures"
    ))
}

fn sum_and_distance() -> Outcome {
    let corpus = || vec![(seq(&[0, 1, 3, 6]), seq(&[0, 1, 3, 6]))];
    let (sum, _) = campaign(LemmaId::SumFormula, corpus(), 10)?;
    let (dist, _) = campaign(LemmaId::Distance, corpus(), 10)?;
    Ok(format!(
        "{sum} sum-formula and {dist} distance checks, 0 failures"
    ))
}

fn tail() -> Outcome {
    let seqs = parse_sequence_file(&corpus_file("tail.txt")).map_err(|e| e.to_string())?;
    let b = Bounds::default();
    let mut inequivalent = BTreeSet::new();
    let mut seeds_checked = 0;
    for m in &seqs {
        for n in &seqs {
            let pair = Arc::new(GraphPair::new(m.clone(), n.clone()).map_err(|e| e.to_string())?);
            let graph = ProductGraph::new(pair.clone(), None);
            if m == n {
                let cov = coverage_in(&graph, 0, None, 1).map_err(|e| e.to_string())?;
                ensure(cov.is_full(), || {
                    format!("m=n={} not full: {cov}", m.compact())
                })?;
                continue;
            }
            let v = e_tail_check(&m.delta(), &n.delta(), b.max_shift, b.min_overlap);
            if v.kind != TailKind::InequivalentOnWindow {
                continue;
            }
            let seeds = admissible_seeds(&pair, &graph);
            ensure(!seeds.is_empty(), || {
                format!("no seed for {} vs {}", m.compact(), n.compact())
            })?;
            for l in seeds {
                let cov = coverage_in(&graph, l, None, 1).map_err(|e| e.to_string())?;
                ensure(cov.max < pair.hi_m() && cov.vertices().contains(&0), || {
                    format!("inequivalent pair reaches full coverage: {cov}")
                })?;
                seeds_checked += 1;
            }
            let (a, b) = (m.values().to_vec(), n.values().to_vec());
            inequivalent.insert(if a < b { (a, b) } else { (b, a) });
        }
    }
    let named = (vec![0, 1, 3, 6, 10, 15, 21], vec![0, 1, 4, 9, 16, 25, 36]);
    ensure(inequivalent.contains(&named), || {
        "named pair missing".into()
    })?;
    ensure(inequivalent.len() >= 5, || {
        format!("only {} inequivalent pairs", inequivalent.len())
    })?;
    let (checked, _) = campaign(LemmaId::TailFromCoverage, corpus_pairs("tail.txt"), 2)?;
    Ok(format!(
        "{} inequivalent pairs, {seeds_checked} seeds proper, m=n full; campaign {checked} checks",
        inequivalent.len()
    ))
}

fn family() -> Outcome {
    let fam = generate_inequivalent_family(5, 6).map_err(|e| e.to_string())?;
    ensure(fam.len() == 5, || format!("{} sequences", fam.len()))?;
    let mut pairs = 0;
    for i in 0..fam.len() {
        for j in i + 1..fam.len() {
            for (a, b) in [(&fam[i], &fam[j]), (&fam[j], &fam[i])] {
                let v = e_tail_check(&a.delta(), &b.delta(), 6, 2);
                ensure(v.is_inequivalent(), || {
                    format!("{} vs {}: {v}", a.compact(), b.compact())
                })?;
            }
            pairs += 1;
        }
    }
    ensure(pairs == 10, || format!("{pairs} pairs"))?;
    Ok("5 sequences, 10 inequivalent pairs".into())
}

fn profiles() -> Outcome {
    let ok =
        |text: &str, rungs: usize, s: &[u64]| -> Result<wadgelab::annuli::WalkExtraction, String> {
            let p = parse_profile(text).map_err(|e| e.to_string())?;
            let ladder = RadiusLadder::integer(rungs);
            let x =
                extract_walk(&p, &ladder, &ladder, &seq(s), &seq(s)).map_err(|e| e.to_string())?;
            for r in [x.unfolding.f(), x.unfolding.g()] {
                let report = validate_reduction(r);
                ensure(report.is_ok(), || report.to_string())?;
            }
            Ok(x)
        };
    let id = ok("profile\npt 0 0\npt 1 11/2\n", 6, &[0, 1, 3, 6])?;
    ensure(id.walk.states().all(|(a, b)| a == b), || {
        "identity is not diagonal".into()
    })?;
    let zig = ok(
        "profile\npt 0 0\npt 1/3 5/2\npt 2/3 3/2\npt 1 9/2\n",
        7,
        &[0, 1, 2, 3],
    )?;
    let revisits = zig
        .walk
        .steps
        .iter()
        .filter(|s| s.em == Edge::new(2))
        .count();
    ensure(revisits >= 2, || {
        format!("zigzag crosses edge 2 {revisits} times")
    })?;
    ensure(
        sim_relation(&zig.unfolding).relates_edges(Edge::new(2), Edge::new(2)),
        || "zigzag lost the D(1) pair".into(),
    )?;
    let bad = parse_profile("profile\npt 0 0 0\npt 1/2 1 1/2\npt 1 3/2 1/2\n")
        .map_err(|e| e.to_string())?;
    let ladder = RadiusLadder::integer(6);
    match extract_walk(&bad, &ladder, &ladder, &seq(&[0, 1, 2]), &seq(&[0, 1, 2])) {
        Err(AnnulusError::ConsistencyViolation { parameter, .. }) => {
            ensure(parameter == Rational::new(1.into(), 2.into()), || {
                format!("violation reported at {parameter}")
            })?
        }
        other => return Err(format!("expected a consistency violation, got {other:?}")),
    }
    Ok("identity and zigzag validate; violation at parameter 1/2".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("graph colors", Duration::from_secs(1), graph_colors),
        ("five-rung blocks", Duration::from_secs(1), five_rung_blocks),
        ("label partition", Duration::from_secs(30), partition),
        (
            "engine/oracle sentinel",
            Duration::from_secs(300),
            engine_oracle,
        ),
        ("extend closure", Duration::from_secs(120), extend),
        (
            "within-arrow formula",
            Duration::from_secs(120),
            within_arrow,
        ),
        (
            "sum formula and distance",
            Duration::from_secs(120),
            sum_and_distance,
        ),
        ("tail contrapositive", Duration::from_secs(60), tail),
        ("family generation", Duration::from_secs(1), family),
        ("profile round-trip", Duration::from_secs(1), profiles),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let line = match result {
            Ok(detail) if took <= limit => format!("PASS {detail}"),
            Ok(detail) => format!("FAIL over time limit {limit:?} ({detail})"),
            Err(why) => format!("FAIL {why}"),
        };
        if line.starts_with("FAIL") {
            failed += 1;
        }
        println!(
            "criterion {:>2} {name}: {line} [{:.3}s]",
            i + 1,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
