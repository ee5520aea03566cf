//! Necessary conditions for algebraic realizability.
//!
//! A chain segment sits between two adjacent stones. A diagram of `6n`
//! stones passes the screen when at most `2n` segments are essential and
//! essential segments plus arrow stones number at most `6n`.

pub mod dessin;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::necklace::{Half, NecklaceDiagram, Stone};

pub use dessin::{validate_dessin, Color, DessinMap, DessinReport, Kind};

/// Essential/non-essential verdict for each ordered pair of adjacent stones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SegmentClassifier {
    table: [[bool; 4]; 4],
}

impl Default for SegmentClassifier {
    /// Segments between two arrows pointing at each other or away from each
    /// other: `RL` and `LR`.
    fn default() -> Self {
        let mut c = SegmentClassifier::none();
        c.set(Stone::ArrowR, Stone::ArrowL, true);
        c.set(Stone::ArrowL, Stone::ArrowR, true);
        c
    }
}

impl SegmentClassifier {
    pub fn none() -> SegmentClassifier {
        SegmentClassifier {
            table: [[false; 4]; 4],
        }
    }

    pub fn all() -> SegmentClassifier {
        SegmentClassifier {
            table: [[true; 4]; 4],
        }
    }

    /// Essential when both stone halves bordering the segment are `○`.
    pub fn bordering_dots() -> SegmentClassifier {
        let mut c = SegmentClassifier::none();
        for a in Stone::ALL {
            for b in Stone::ALL {
                c.set(a, b, a.halves().1 == Half::Dot && b.halves().0 == Half::Dot);
            }
        }
        c
    }

    pub fn set(&mut self, left: Stone, right: Stone, essential: bool) {
        self.table[left.index()][right.index()] = essential;
    }

    pub fn is_essential(&self, left: Stone, right: Stone) -> bool {
        self.table[left.index()][right.index()]
    }

    /// Unchanged by swapping `S↔C` and `R↔L`.
    pub fn is_dual_invariant(&self) -> bool {
        self.pairs()
            .all(|(a, b, e)| self.is_essential(a.dual(), b.dual()) == e)
    }

    /// Unchanged by reading the chain backwards.
    pub fn is_mirror_invariant(&self) -> bool {
        self.pairs()
            .all(|(a, b, e)| self.is_essential(b.mirror(), a.mirror()) == e)
    }

    fn pairs(&self) -> impl Iterator<Item = (Stone, Stone, bool)> + '_ {
        Stone::ALL
            .into_iter()
            .flat_map(move |a| Stone::ALL.into_iter().map(move |b| (a, b, self.is_essential(a, b))))
    }

    /// Sixteen lines `LR -> E` or `LR -> N`; every pair must appear once.
    pub fn parse(text: &str) -> Result<SegmentClassifier> {
        let mut c = SegmentClassifier::none();
        let mut seen = [[false; 4]; 4];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse {
                position: lineno + 1,
                message: format!("{m}: {raw:?}"),
            };
            let line = line.replace("->", " ").replace('→', " ");
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [pair, value] = toks.as_slice() else {
                return Err(err("expected `XY -> E|N`"));
            };
            let stones: Vec<Stone> = pair.chars().filter_map(Stone::from_letter).collect();
            if stones.len() != 2 || pair.chars().count() != 2 {
                return Err(err("expected a pair of stones"));
            }
            let essential = match value.to_ascii_uppercase().as_str() {
                "E" => true,
                "N" => false,
                _ => return Err(err("expected E or N")),
            };
            let (a, b) = (stones[0].index(), stones[1].index());
            if seen[a][b] {
                return Err(err("duplicate pair"));
            }
            seen[a][b] = true;
            c.table[a][b] = essential;
        }
        if seen.iter().flatten().any(|s| !s) {
            return Err(Error::Config("classifier table must list all 16 stone pairs".into()));
        }
        Ok(c)
    }

    pub fn format(&self) -> String {
        self.pairs()
            .map(|(a, b, e)| format!("{a}{b} -> {}\n", if e { 'E' } else { 'N' }))
            .collect()
    }
}

impl FromStr for SegmentClassifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<SegmentClassifier> {
        SegmentClassifier::parse(s)
    }
}

/// Essential segments, one segment per cyclically adjacent stone pair.
pub fn essential_count(d: &NecklaceDiagram, cls: &SegmentClassifier) -> usize {
    (0..d.len())
        .filter(|&i| cls.is_essential(d.stone(i), d.stone(i + 1)))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    FailEssential,
    FailSum,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::FailEssential => "FAIL_ESSENTIAL",
            Verdict::FailSum => "FAIL_SUM",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScreenReport {
    pub n: usize,
    pub essential: usize,
    pub arrows: usize,
    /// `essential ≤ 2n`.
    pub essential_ok: bool,
    /// `essential + arrows ≤ 6n`.
    pub sum_ok: bool,
    pub verdict: Verdict,
}

pub fn screen(d: &NecklaceDiagram, n: usize, cls: &SegmentClassifier) -> Result<ScreenReport> {
    if n == 0 || d.len() != 6 * n {
        return Err(Error::LengthMismatch {
            expected: 6 * n,
            actual: d.len(),
        });
    }
    let essential = essential_count(d, cls);
    let arrows = d.counts().arrows();
    let essential_ok = essential <= 2 * n;
    let sum_ok = essential + arrows <= 6 * n;
    // the sum condition is reported first when both fail
    let verdict = if !sum_ok {
        Verdict::FailSum
    } else if !essential_ok {
        Verdict::FailEssential
    } else {
        Verdict::Pass
    };
    Ok(ScreenReport {
        n,
        essential,
        arrows,
        essential_ok,
        sum_ok,
        verdict,
    })
}

pub fn algebraicity_obstructed(d: &NecklaceDiagram, n: usize, cls: &SegmentClassifier) -> Result<Verdict> {
    Ok(screen(d, n, cls)?.verdict)
}
