//! Closed forms for unfoldings whose ranges sit inside arrows.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::graphs::{validate_reduction, Edge, Reduction};
use crate::sequences::IndexSequence;

use super::{Unfolding, UnfoldingError};

/// Outcome of checking one formula family on one unfolding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaReport {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl FormulaReport {
    fn new(name: &'static str) -> Self {
        FormulaReport {
            name,
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(witness());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for FormulaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} checked={} failures={}",
            self.name,
            self.checked,
            self.failures.len()
        )?;
        for w in &self.failures {
            write!(f, "\n  {w}")?;
        }
        Ok(())
    }
}

fn sign(k: usize) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn arrow(seq: &IndexSequence, t: usize, side: &str) -> Result<(i64, i64), UnfoldingError> {
    seq.arrow(t).ok_or_else(|| {
        UnfoldingError::PreconditionViolated(format!(
            "arrow {t} of {side} is not determined by {}",
            seq.compact()
        ))
    })
}

fn require_within(range: (i64, i64), window: (i64, i64), what: &str) -> Result<(), UnfoldingError> {
    if range.0 < window.0 || range.1 > window.1 {
        return Err(UnfoldingError::PreconditionViolated(format!(
            "{what} = [{},{}] escapes [{},{}]",
            range.0, range.1, window.0, window.1
        )));
    }
    Ok(())
}

/// Checks `f(i) - f(j) = (-1)^(s+t) (g(i) - g(j))` for all domain pairs and
/// validates both composites `f g^-1` and `g f^-1` between the induced
/// subgraphs on the ranges.
pub fn check_within_arrow(
    x: &Unfolding,
    s: usize,
    t: usize,
) -> Result<FormulaReport, UnfoldingError> {
    let pair = x.pair();
    require_within(x.f().range_bounds(), arrow(pair.m(), s, "m")?, "ran f")?;
    require_within(x.g().range_bounds(), arrow(pair.n(), t, "n")?, "ran g")?;
    let eps = sign(s + t);
    let fv = x.f().vertex_images();
    let gv = x.g().vertex_images();
    let lo = x.domain().lo();
    let mut report = FormulaReport::new("within_arrow");
    for i in 0..fv.len() {
        for j in 0..fv.len() {
            let lhs = fv[i] - fv[j];
            let rhs = eps * (gv[i] - gv[j]);
            report.check(lhs == rhs, || {
                format!(
                    "i={} j={}: f(i)-f(j)={lhs} but (-1)^(s+t)(g(i)-g(j))={rhs}",
                    lo + i as i64,
                    lo + j as i64
                )
            });
        }
    }
    for forward in [true, false] {
        let name = if forward { "f g^-1" } else { "g f^-1" };
        match composite_reduction(x, forward) {
            Ok(Some(r)) => {
                let v = validate_reduction(&r);
                report.check(v.is_ok(), || format!("{name}: {v}"));
            }
            Ok(None) => {}
            Err(e) => report.check(false, || format!("{name}: {e}")),
        }
    }
    Ok(report)
}

/// The composite `f g^-1` (when `forward`) from `G_n` restricted to
/// `ran g` into `G_m` restricted to `ran f`, or `g f^-1` the other way.
/// `None` when the source range is a single vertex, which is not a colored
/// graph. Errors when the composite is not a function.
pub fn composite_reduction(
    x: &Unfolding,
    forward: bool,
) -> Result<Option<Reduction>, UnfoldingError> {
    let pair = x.pair();
    let (from, to, g_src, g_dst) = if forward {
        (x.g(), x.f(), pair.gn(), pair.gm())
    } else {
        (x.f(), x.g(), pair.gm(), pair.gn())
    };
    let (slo, shi) = from.range_bounds();
    let (tlo, thi) = to.range_bounds();
    if slo == shi {
        return Ok(None);
    }
    let mut table: BTreeMap<i64, i64> = BTreeMap::new();
    for (&y, &z) in from.vertex_images().iter().zip(to.vertex_images()) {
        if let Some(&prev) = table.get(&y) {
            if prev != z {
                return Err(UnfoldingError::PreconditionViolated(format!(
                    "composite is not a function: {y} has images {prev} and {z}"
                )));
            }
        }
        table.insert(y, z);
    }
    let source = Arc::new(g_src.induced_subgraph(slo, shi)?);
    let target = if tlo == thi {
        // A one-vertex range still needs a two-vertex target graph.
        let hi = if thi < g_dst.hi() { thi + 1 } else { thi };
        Arc::new(g_dst.induced_subgraph(hi - 1, hi)?)
    } else {
        Arc::new(g_dst.induced_subgraph(tlo, thi)?)
    };
    let vmap: Vec<i64> = (slo..=shi).map(|y| table[&y]).collect();
    let mut emap = Vec::with_capacity(vmap.len() - 1);
    for w in vmap.windows(2) {
        let e = Edge::between(w[0], w[1]).ok_or_else(|| {
            UnfoldingError::PreconditionViolated(format!(
                "composite sends adjacent vertices to {} and {}",
                w[0], w[1]
            ))
        })?;
        emap.push(e);
    }
    Ok(Some(Reduction::new(source, target, vmap, emap)?))
}

/// The quantities `b_u`, `p_u` (local to the window) and partial sums
/// `Sigma_v`, all indexed from `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumFormulaTerms {
    pub t: usize,
    pub w: usize,
    /// `b[u - t]` for `t <= u <= w`.
    pub b: Vec<i64>,
    /// `p[u - t]` for `t <= u < w`.
    pub p: Vec<i64>,
    /// `sigma[v - t]` for `t <= v <= w`.
    pub sigma: Vec<i64>,
}

impl SumFormulaTerms {
    pub fn new(n: &IndexSequence, g_a: i64, t: usize, w: usize) -> Result<Self, UnfoldingError> {
        if w <= t {
            return Err(UnfoldingError::PreconditionViolated(format!(
                "need w > t, got t={t} w={w}"
            )));
        }
        if n.get(w).is_none() {
            return Err(UnfoldingError::PreconditionViolated(format!(
                "n_{w} is not determined by {}",
                n.compact()
            )));
        }
        let mut b = vec![g_a];
        for u in t + 1..=w {
            b.push(2 * n.get(u).expect("u <= w") as i64);
        }
        let p: Vec<i64> = b.windows(2).map(|x| x[1] - x[0] - 1).collect();
        let mut sigma = vec![0];
        for (k, &pu) in p.iter().enumerate() {
            let last = *sigma.last().expect("nonempty");
            sigma.push(last + sign(t + k) * pu);
        }
        Ok(SumFormulaTerms { t, w, b, p, sigma })
    }

    /// The block `v` and offset `j` with `g(i) = b_v + j < b_(v+1)`.
    pub fn locate(&self, g_i: i64) -> Option<(usize, i64)> {
        (0..self.p.len())
            .find(|&k| self.b[k] <= g_i && g_i < self.b[k + 1])
            .map(|k| (self.t + k, g_i - self.b[k]))
    }

    /// `f(a) + (-1)^s (Sigma_v + (-1)^v j)`.
    pub fn predict(&self, f_a: i64, s: usize, g_i: i64) -> Option<i64> {
        let (v, j) = self.locate(g_i)?;
        Some(f_a + sign(s) * (self.sigma[v - self.t] + sign(v) * j))
    }

    pub fn p_at(&self, v: usize) -> i64 {
        self.p[v - self.t]
    }
}

/// Checks the sum formula at every domain vertex. When both difference
/// sequences are strictly increasing it also checks the distance bounds
/// for `v = w - 1`: `|f(i) - f(i')| <= p_v`, and `< p_v` when
/// `max ran g < 2 n_w - 1`.
pub fn check_sum_formula(
    x: &Unfolding,
    a: i64,
    s: usize,
    t: usize,
    w: usize,
) -> Result<FormulaReport, UnfoldingError> {
    let pair = x.pair();
    let lo = x.domain().lo();
    let (Some(f_a), Some(g_a)) = (x.f().image(a), x.g().image(a)) else {
        return Err(UnfoldingError::PreconditionViolated(format!(
            "{a} is not a domain vertex"
        )));
    };
    require_within(x.f().range_bounds(), arrow(pair.m(), s, "m")?, "ran f")?;
    require_within((g_a, g_a), arrow(pair.n(), t, "n")?, "g(a)")?;
    let terms = SumFormulaTerms::new(pair.n(), g_a, t, w)?;
    let top = terms.b[terms.b.len() - 1] - 1;
    let (glo, ghi) = x.g().range_bounds();
    require_within((glo, ghi), (g_a, top), "ran g")?;

    let mut report = FormulaReport::new("sum_formula");
    for (i, (&fi, &gi)) in x
        .f()
        .vertex_images()
        .iter()
        .zip(x.g().vertex_images())
        .enumerate()
    {
        let predicted = terms.predict(f_a, s, gi);
        report.check(predicted == Some(fi), || {
            format!(
                "i={}: f(i)={fi} but the formula gives {predicted:?} (a={a} s={s} t={t} w={w})",
                lo + i as i64
            )
        });
    }
    if pair.m().is_delta_increasing() && pair.n().is_delta_increasing() {
        let pv = terms.p_at(w - 1);
        let (flo, fhi) = x.f().range_bounds();
        let spread = fhi - flo;
        report.check(spread <= pv, || {
            format!("distance: max |f(i)-f(i')| = {spread} exceeds p_v = {pv} (w={w})")
        });
        if ghi < top {
            report.check(spread < pv, || {
                format!(
                    "strict distance: max |f(i)-f(i')| = {spread} is not below p_v = {pv} \
                     although max ran g = {ghi} < {top} (w={w})"
                )
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{Step, SyncWalk, WalkSpace};
    use super::*;

    #[test]
    fn identity_within_first_arrow() {
        let p = pair(&[0, 1, 3, 6], &[0, 1, 3, 6]);
        let x = identity_unfolding(&p, 1);
        let r = check_within_arrow(&x, 0, 0).unwrap();
        assert!(r.passed(), "{r}");
        let c = composite_reduction(&x, true).unwrap().unwrap();
        assert_eq!(c.vertex_images(), &[0, 1]);
    }

    #[test]
    fn precondition_checked() {
        let p = pair(&[0, 1, 3, 6], &[0, 1, 3, 6]);
        let x = identity_unfolding(&p, 3);
        assert!(matches!(
            check_within_arrow(&x, 0, 0),
            Err(UnfoldingError::PreconditionViolated(_))
        ));
    }

    fn within_arrow_walks(m: &[u64], n: &[u64], max: usize) -> Vec<(Unfolding, usize, usize)> {
        let p = pair(m, n);
        let mut out = Vec::new();
        for w in WalkSpace::new(p.clone()).walks(2, max) {
            let x = Unfolding::from_walk(p.clone(), &w).unwrap();
            let (flo, fhi) = x.f().range_bounds();
            let (glo, ghi) = x.g().range_bounds();
            let s = p.m().arrow_of(flo).unwrap();
            let t = p.n().arrow_of(glo).unwrap();
            if p.m().arrow_of(fhi) == Some(s) && p.n().arrow_of(ghi) == Some(t) {
                out.push((x, s, t));
            }
        }
        out
    }

    #[test]
    fn exhaustive_within_arrow() {
        let mut parities = std::collections::BTreeSet::new();
        for (x, s, t) in within_arrow_walks(&[0, 2, 5], &[0, 2, 5], 6) {
            let r = check_within_arrow(&x, s, t).unwrap();
            assert!(r.passed(), "{r}\n{x}");
            parities.insert((s % 2, t % 2));
        }
        assert_eq!(parities.len(), 4);
    }

    #[test]
    fn opposite_parity_reverses_order() {
        let found = within_arrow_walks(&[0, 2, 5], &[0, 2, 5], 5)
            .into_iter()
            .find(|(x, s, t)| (s + t) % 2 == 1 && x.g().range().len() >= 3)
            .expect("an opposite-parity unfolding");
        let (x, _, _) = found;
        let c = composite_reduction(&x, true).unwrap().unwrap();
        let img = c.vertex_images();
        assert!(img.windows(2).all(|w| w[1] == w[0] - 1), "{img:?}");
    }

    #[test]
    fn terms_for_single_block_vanish() {
        let n = seq(&[0, 1, 3, 6]);
        let t = SumFormulaTerms::new(&n, 2, 1, 2).unwrap();
        assert_eq!(t.b, vec![2, 6]);
        assert_eq!(t.p, vec![3]);
        assert_eq!(t.sigma, vec![0, -3]);
        assert_eq!(t.predict(7, 0, 4), Some(7 - 2));
    }

    /// g rises through arrow 1 of n into arrow 2 and comes back while f
    /// stays inside arrow 2 of m.
    #[test]
    fn hand_built_two_block_zigzag() {
        let p = pair(&[0, 1, 3, 6], &[0, 1, 3, 6]);
        let space = WalkSpace::new(p.clone());
        let mut walk = SyncWalk {
            start: (9, 2),
            steps: Vec::new(),
        };
        let targets = [(8, 3), (7, 4), (6, 5), (6, 6), (7, 7), (6, 6), (6, 5)];
        for to in targets {
            let here = walk.states().last().unwrap();
            let step: Step = space
                .steps_from(here)
                .into_iter()
                .find(|s| s.to == to)
                .unwrap_or_else(|| panic!("no step from {here:?} to {to:?}"));
            walk.steps.push(step);
        }
        let x = Unfolding::from_walk(p.clone(), &walk).unwrap();
        let r = check_sum_formula(&x, 0, 2, 1, 3).unwrap();
        assert!(r.passed(), "{r}\n{x}");
        let terms = SumFormulaTerms::new(p.n(), 2, 1, 3).unwrap();
        assert_eq!(terms.sigma, vec![0, -3, 2]);
        for (fi, gi) in x.f().vertex_images().iter().zip(x.g().vertex_images()) {
            assert_eq!(terms.predict(9, 2, *gi), Some(*fi));
        }
    }

    #[test]
    fn exhaustive_sum_formula_small() {
        let p = pair(&[0, 1, 3, 6], &[0, 1, 3, 6]);
        let mut checked = 0;
        for w in WalkSpace::new(p.clone()).walks(2, 7) {
            let x = Unfolding::from_walk(p.clone(), &w).unwrap();
            let (flo, fhi) = x.f().range_bounds();
            let s = p.m().arrow_of(flo).unwrap();
            if p.m().arrow_of(fhi) != Some(s) {
                continue;
            }
            let (glo, ghi) = x.g().range_bounds();
            let t = p.n().arrow_of(glo).unwrap();
            let a = x
                .g()
                .vertex_images()
                .iter()
                .position(|&g| g == glo)
                .unwrap() as i64;
            for wi in t + 1..p.n().len() {
                if ghi > 2 * p.n().get(wi).unwrap() as i64 - 1 {
                    continue;
                }
                let r = check_sum_formula(&x, a, s, t, wi).unwrap();
                assert!(r.passed(), "{r}\n{x}");
                checked += 1;
            }
        }
        assert!(checked > 100);
    }
}
