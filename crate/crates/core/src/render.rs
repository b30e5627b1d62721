//! Concentric-circle diagrams of the D/E blocks of a ladder.

use std::fmt::Write as _;
use std::str::FromStr;

use num::ToPrimitive;

use crate::annuli::{classify_radius, AnnulusError, BlockKind, BlockLabel, RadiusLadder, Rational};
use crate::sequences::IndexSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Svg,
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(RenderFormat::Ascii),
            "svg" => Ok(RenderFormat::Svg),
            other => Err(format!("unknown format `{other}`, expected ascii or svg")),
        }
    }
}

/// A rung circle: solid when the rung lies in a D block, dashed in an E block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RungStyle {
    pub t: usize,
    pub radius: Rational,
    pub label: BlockLabel,
}

impl RungStyle {
    pub fn solid(&self) -> bool {
        self.label.kind == BlockKind::D
    }
}

/// The open band between rungs `t` and `t + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub t: usize,
    pub label: BlockLabel,
}

impl Band {
    pub fn shaded(&self) -> bool {
        self.label.kind == BlockKind::D
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub rungs: Vec<RungStyle>,
    pub bands: Vec<Band>,
}

/// Rungs `1..=hi_block` and the bands below them, classified exactly.
pub fn diagram(
    ladder: &RadiusLadder,
    seq: &IndexSequence,
    hi_block: usize,
) -> Result<Diagram, AnnulusError> {
    if hi_block == 0 || hi_block > ladder.last_rung() {
        return Err(AnnulusError::OutOfLadder {
            r: Rational::from_integer(hi_block.into()),
            detail: format!("rung index must be in 1..={}", ladder.last_rung()),
        });
    }
    let two = Rational::from_integer(2.into());
    let mut rungs = Vec::with_capacity(hi_block);
    let mut bands = Vec::with_capacity(hi_block);
    for t in 0..hi_block {
        let lo = ladder.rung(t).expect("t < hi_block");
        let hi = ladder.rung(t + 1).expect("t < hi_block");
        let mid = (lo + hi) / &two;
        bands.push(Band {
            t,
            label: classify_radius(ladder, seq, &mid)?,
        });
        rungs.push(RungStyle {
            t: t + 1,
            radius: hi.clone(),
            label: classify_radius(ladder, seq, hi)?,
        });
    }
    Ok(Diagram { rungs, bands })
}

pub fn render_annuli(
    ladder: &RadiusLadder,
    seq: &IndexSequence,
    hi_block: usize,
    format: RenderFormat,
) -> Result<String, AnnulusError> {
    let d = diagram(ladder, seq, hi_block)?;
    Ok(match format {
        RenderFormat::Ascii => ascii(&d, seq),
        RenderFormat::Svg => svg(&d, seq),
    })
}

const CELL: usize = 4;

fn ascii(d: &Diagram, seq: &IndexSequence) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "annuli seq={seq} rungs={}", d.rungs.len());
    let mut strip = String::from("o");
    for (band, rung) in d.bands.iter().zip(&d.rungs) {
        let fill = if band.shaded() { '#' } else { '.' };
        strip.extend(std::iter::repeat_n(fill, CELL));
        strip.push(if rung.solid() { '|' } else { ':' });
    }
    let _ = writeln!(out, "{strip}");
    for r in &d.rungs {
        let style = if r.solid() { "solid" } else { "dashed" };
        let _ = writeln!(out, "rung {} r={} {style} {}", r.t, r.radius, r.label);
    }
    for b in &d.bands {
        let shade = if b.shaded() { "shaded" } else { "plain" };
        let _ = writeln!(out, "band {} {} {shade} {}", b.t, b.t + 1, b.label);
    }
    out
}

const SIZE: f64 = 400.0;

fn svg(d: &Diagram, seq: &IndexSequence) -> String {
    let c = SIZE / 2.0;
    let outer = d
        .rungs
        .last()
        .map_or(1.0, |r| r.radius.to_f64().unwrap_or(1.0));
    let scale = (c - 10.0) / outer;
    let px = |r: &Rational| r.to_f64().unwrap_or(0.0) * scale;
    let ring = |r: f64| {
        if r == 0.0 {
            String::new()
        } else {
            format!(
                "M {x0:.3} {c:.3} A {r:.3} {r:.3} 0 1 0 {x1:.3} {c:.3} A {r:.3} {r:.3} 0 1 0 {x0:.3} {c:.3} Z ",
                x0 = c - r,
                x1 = c + r
            )
        }
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, "<title>D/E blocks for {seq}</title>");
    let mut inner = Rational::from_integer(0.into());
    for (b, r) in d.bands.iter().zip(&d.rungs) {
        if b.shaded() {
            let _ = writeln!(
                out,
                r##"<path class="band D" data-block="{}" fill="#bbbbbb" fill-rule="evenodd" d="{}{}"/>"##,
                b.label,
                ring(px(&r.radius)),
                ring(px(&inner)).trim_end()
            );
        }
        inner = r.radius.clone();
    }
    for r in &d.rungs {
        let (class, dash) = if r.solid() {
            ("solid", "")
        } else {
            ("dashed", r#" stroke-dasharray="6 4""#)
        };
        let _ = writeln!(
            out,
            r#"<circle class="rung {class}" data-rung="{}" cx="{c:.3}" cy="{c:.3}" r="{:.3}" fill="none" stroke="black"{dash}/>"#,
            r.t,
            px(&r.radius)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u64]) -> IndexSequence {
        IndexSequence::new(v.to_vec()).unwrap()
    }

    fn solid_rungs(text: &str) -> Vec<(usize, bool)> {
        text.lines()
            .filter_map(|l| {
                let rest = l.split("data-rung=\"").nth(1)?;
                let t = rest.split('"').next()?.parse().ok()?;
                Some((t, l.contains("rung solid")))
            })
            .collect()
    }

    #[test]
    fn five_rungs() {
        let ladder = RadiusLadder::integer(5);
        let n = seq(&[0, 1, 2]);
        let d = diagram(&ladder, &n, 5).unwrap();
        let solid: Vec<usize> = d.rungs.iter().filter(|r| r.solid()).map(|r| r.t).collect();
        assert_eq!(solid, vec![3, 4]);
        let shaded: Vec<usize> = d.bands.iter().filter(|b| b.shaded()).map(|b| b.t).collect();
        assert_eq!(shaded, vec![0, 2, 4]);
        let svg = render_annuli(&ladder, &n, 5, RenderFormat::Svg).unwrap();
        assert_eq!(svg.matches("<circle").count(), 5);
        assert_eq!(
            solid_rungs(&svg),
            vec![(1, false), (2, false), (3, true), (4, true), (5, false)]
        );
        assert_eq!(svg.matches("class=\"band D\"").count(), 3);
    }

    #[test]
    fn single_circle() {
        let ladder = RadiusLadder::integer(1);
        let text = render_annuli(&ladder, &seq(&[0, 1]), 1, RenderFormat::Ascii).unwrap();
        assert!(text.contains("rung 1 r=1 dashed E(0)"), "{text}");
        assert!(text.contains("o####:"), "{text}");
    }

    #[test]
    fn formats_agree() {
        let ladder = RadiusLadder::integer(9);
        for s in [&[0, 1, 3, 6][..], &[0, 2, 5], &[0, 1, 2, 3, 4, 5]] {
            let n = seq(s);
            let a = render_annuli(&ladder, &n, 9, RenderFormat::Ascii).unwrap();
            let v = render_annuli(&ladder, &n, 9, RenderFormat::Svg).unwrap();
            let from_ascii: Vec<(usize, bool)> = a
                .lines()
                .filter(|l| l.starts_with("rung "))
                .map(|l| {
                    let t: Vec<&str> = l.split_whitespace().collect();
                    (t[1].parse().unwrap(), t[3] == "solid")
                })
                .collect();
            assert_eq!(from_ascii, solid_rungs(&v));
        }
    }

    #[test]
    fn hi_block_bounds() {
        let ladder = RadiusLadder::integer(3);
        assert!(render_annuli(&ladder, &seq(&[0, 1, 2]), 4, RenderFormat::Svg).is_err());
        assert!(render_annuli(&ladder, &seq(&[0, 1, 2]), 0, RenderFormat::Svg).is_err());
    }
}
