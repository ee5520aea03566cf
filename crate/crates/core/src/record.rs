//! Per-diagram summaries and the table of reproduced counts.

use serde::Serialize;

use crate::enumerate::{word, Enumerator, Filter};
use crate::error::Result;
use crate::necklace::{Mode, NecklaceDiagram};
use crate::psl2::StoneAlgebra;
use crate::refine::{count_refined_classes, RefinementConvention, REFERENCE_REFINED_COUNTS};
use crate::screen::{screen, SegmentClassifier};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramRecord {
    pub word: String,
    pub length: usize,
    pub profile: (usize, usize),
    pub arrows: usize,
    pub betti: (usize, usize, usize),
    pub euler: i64,
    pub valid: bool,
    pub maximal: bool,
    pub dual_word: String,
    /// Screen verdict, absent when the length is not a multiple of six.
    pub screen: Option<String>,
}

impl DiagramRecord {
    pub fn new(d: &NecklaceDiagram, mode: Mode, cls: &SegmentClassifier) -> DiagramRecord {
        let counts = d.counts();
        let inv = d.invariants();
        let screen = if d.len() % 6 == 0 {
            screen(d, d.len() / 6, cls).ok().map(|r| r.verdict.to_string())
        } else {
            None
        };
        DiagramRecord {
            word: d.canonical(mode),
            length: d.len(),
            profile: counts.profile(),
            arrows: counts.arrows(),
            betti: (inv.b0, inv.b1, inv.b2),
            euler: inv.euler,
            valid: d.is_valid(),
            maximal: d.is_maximal_auto(),
            dual_word: d.dual().canonical(mode),
            screen,
        }
    }

    pub const CSV_HEADER: [&'static str; 13] = [
        "word", "length", "circles", "squares", "arrows", "b0", "b1", "b2", "euler", "valid", "maximal",
        "dual_word", "screen",
    ];

    pub fn csv_row(&self) -> [String; 13] {
        [
            self.word.clone(),
            self.length.to_string(),
            self.profile.0.to_string(),
            self.profile.1.to_string(),
            self.arrows.to_string(),
            self.betti.0.to_string(),
            self.betti.1.to_string(),
            self.betti.2.to_string(),
            self.euler.to_string(),
            self.valid.to_string(),
            self.maximal.to_string(),
            self.dual_word.clone(),
            self.screen.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub name: String,
    pub computed: String,
    pub expected: String,
    pub matched: bool,
    /// Pinned claims decide the exit status; others are informational.
    pub pinned: bool,
}

impl Claim {
    fn pinned(name: &str, computed: impl ToString, expected: impl ToString) -> Claim {
        let (computed, expected) = (computed.to_string(), expected.to_string());
        Claim {
            name: name.into(),
            matched: computed == expected,
            computed,
            expected,
            pinned: true,
        }
    }

    pub fn failed(&self) -> bool {
        self.pinned && !self.matched
    }
}

/// Recomputes every count under the given stone matrices.
pub fn reproduce(alg: &StoneAlgebra) -> Result<Vec<Claim>> {
    let e = Enumerator::with_algebra(alg.clone());
    let classes6 = e.canonical_words(6, Mode::Symmetry, Filter::None)?;
    let classes12 = e.canonical_words(12, Mode::Symmetry, Filter::None)?;
    let max6 = e.canonical_words(6, Mode::Symmetry, Filter::Maximal)?.len();
    let max12 = e.canonical_words(12, Mode::Symmetry, Filter::Maximal)?.len();
    let min_arrows = |ws: &[u64], len: usize| {
        ws.iter()
            .map(|&w| {
                let c = word::counts(w, len);
                c[1] + c[2]
            })
            .min()
    };
    let fewest = min_arrows(&classes6, 6).into_iter().chain(min_arrows(&classes12, 12)).min();
    let mut claims = vec![
        Claim::pinned("classes of 6 stones", classes6.len(), 25),
        Claim::pinned("maximal classes of 6 stones", max6, 4),
        Claim::pinned("maximal classes of 12 stones", max12, 10),
        Claim::pinned("classes of 12 stones", classes12.len(), 8421),
        Claim::pinned(
            "every diagram of 6 or 12 stones has two arrows",
            fewest.map_or(false, |a| a >= 2),
            true,
        ),
    ];
    let conv = RefinementConvention::default();
    for &((c, s), expected) in &REFERENCE_REFINED_COUNTS {
        let computed = count_refined_classes((c, s), 6, &conv)?;
        claims.push(Claim {
            name: format!("refined classes ({c},{s}) [{conv}]"),
            computed: computed.to_string(),
            expected: expected.to_string(),
            matched: computed == expected,
            pinned: false,
        });
    }
    Ok(claims)
}
