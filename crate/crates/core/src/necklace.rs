//! Necklace diagrams: cyclic words over the four stones.
//!
//! Words are written with the letters `S` (square), `C` (circle), `R` and `L`
//! (right and left arrows). Canonical forms use the collation `C < L < R < S`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psl2::{Decoration, StoneAlgebra};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stone {
    Circle,
    ArrowL,
    ArrowR,
    Square,
}

/// Kind of critical value bordering a stone half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Half {
    Cross,
    Dot,
}

impl Stone {
    /// All stones in collation order.
    pub const ALL: [Stone; 4] = [Stone::Circle, Stone::ArrowL, Stone::ArrowR, Stone::Square];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub const fn from_index(i: usize) -> Stone {
        Stone::ALL[i & 3]
    }

    pub const fn letter(self) -> char {
        match self {
            Stone::Circle => 'C',
            Stone::ArrowL => 'L',
            Stone::ArrowR => 'R',
            Stone::Square => 'S',
        }
    }

    pub fn from_letter(ch: char) -> Option<Stone> {
        match ch.to_ascii_uppercase() {
            'C' => Some(Stone::Circle),
            'L' => Some(Stone::ArrowL),
            'R' => Some(Stone::ArrowR),
            'S' => Some(Stone::Square),
            _ => None,
        }
    }

    pub const fn is_arrow(self) -> bool {
        matches!(self, Stone::ArrowL | Stone::ArrowR)
    }

    /// Square ↔ circle, right ↔ left.
    pub const fn dual(self) -> Stone {
        match self {
            Stone::Circle => Stone::Square,
            Stone::Square => Stone::Circle,
            Stone::ArrowL => Stone::ArrowR,
            Stone::ArrowR => Stone::ArrowL,
        }
    }

    /// Right ↔ left; squares and circles are fixed.
    pub const fn mirror(self) -> Stone {
        match self {
            Stone::ArrowL => Stone::ArrowR,
            Stone::ArrowR => Stone::ArrowL,
            s => s,
        }
    }

    /// The critical-value kinds at the two ends of the stone.
    pub const fn halves(self) -> (Half, Half) {
        match self {
            Stone::Square => (Half::Cross, Half::Cross),
            Stone::Circle => (Half::Dot, Half::Dot),
            Stone::ArrowR => (Half::Cross, Half::Dot),
            Stone::ArrowL => (Half::Dot, Half::Cross),
        }
    }

    pub const fn from_halves(left: Half, right: Half) -> Stone {
        match (left, right) {
            (Half::Cross, Half::Cross) => Stone::Square,
            (Half::Dot, Half::Dot) => Stone::Circle,
            (Half::Cross, Half::Dot) => Stone::ArrowR,
            (Half::Dot, Half::Cross) => Stone::ArrowL,
        }
    }

    /// Decorations of the two critical values, in order.
    pub const fn decorations(self) -> (Decoration, Decoration) {
        let (l, r) = self.halves();
        let left = match l {
            Half::Cross => Decoration::XLeft,
            Half::Dot => Decoration::OLeft,
        };
        let right = match r {
            Half::Cross => Decoration::XRight,
            Half::Dot => Decoration::ORight,
        };
        (left, right)
    }
}

impl fmt::Display for Stone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Equivalence used when comparing diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Rotations only.
    Oriented,
    /// Rotations and mirror symmetry.
    Symmetry,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Oriented => "oriented",
            Mode::Symmetry => "symmetry",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "oriented" => Ok(Mode::Oriented),
            "symmetry" => Ok(Mode::Symmetry),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct StoneCounts {
    pub circles: usize,
    pub squares: usize,
    pub arrows_r: usize,
    pub arrows_l: usize,
}

impl StoneCounts {
    pub fn of(stones: &[Stone]) -> StoneCounts {
        let mut c = StoneCounts::default();
        for s in stones {
            match s {
                Stone::Circle => c.circles += 1,
                Stone::Square => c.squares += 1,
                Stone::ArrowR => c.arrows_r += 1,
                Stone::ArrowL => c.arrows_l += 1,
            }
        }
        c
    }

    pub fn arrows(&self) -> usize {
        self.arrows_r + self.arrows_l
    }

    pub fn total(&self) -> usize {
        self.circles + self.squares + self.arrows()
    }

    /// `(|○|, |□|)`
    pub fn profile(&self) -> (usize, usize) {
        (self.circles, self.squares)
    }
}

/// Betti numbers, Euler characteristic and total Betti number of the real part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopInvariants {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
    pub euler: i64,
    pub total_betti: usize,
}

impl TopInvariants {
    pub fn from_counts(c: &StoneCounts) -> TopInvariants {
        let b0 = c.circles + 1;
        let b1 = 2 * (c.squares + 1);
        TopInvariants {
            b0,
            b1,
            b2: b0,
            euler: 2 * (c.circles as i64 - c.squares as i64),
            total_betti: 2 * (c.circles + c.squares) + 4,
        }
    }
}

/// A non-empty cyclic word of stones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NecklaceDiagram {
    stones: Vec<Stone>,
}

impl NecklaceDiagram {
    pub fn new(stones: Vec<Stone>) -> Result<NecklaceDiagram> {
        if stones.is_empty() {
            return Err(Error::Parse {
                position: 0,
                message: "a diagram needs at least one stone".into(),
            });
        }
        Ok(NecklaceDiagram { stones })
    }

    pub fn stones(&self) -> &[Stone] {
        &self.stones
    }

    pub fn len(&self) -> usize {
        self.stones.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stone(&self, i: usize) -> Stone {
        self.stones[i % self.stones.len()]
    }

    /// The diagram read starting at stone `k`.
    pub fn rotate(&self, k: usize) -> NecklaceDiagram {
        let k = k % self.len();
        let mut stones = Vec::with_capacity(self.len());
        stones.extend_from_slice(&self.stones[k..]);
        stones.extend_from_slice(&self.stones[..k]);
        NecklaceDiagram { stones }
    }

    pub fn mirror(&self) -> NecklaceDiagram {
        NecklaceDiagram {
            stones: self.stones.iter().rev().map(|s| s.mirror()).collect(),
        }
    }

    pub fn dual(&self) -> NecklaceDiagram {
        NecklaceDiagram {
            stones: self.stones.iter().map(|s| s.dual()).collect(),
        }
    }

    pub fn counts(&self) -> StoneCounts {
        StoneCounts::of(&self.stones)
    }

    pub fn invariants(&self) -> TopInvariants {
        TopInvariants::from_counts(&self.counts())
    }

    pub fn is_valid(&self) -> bool {
        self.is_valid_in(&StoneAlgebra::standard())
    }

    pub fn is_valid_in(&self, alg: &StoneAlgebra) -> bool {
        alg.word_monodromy(&self.stones)
            .map(|m| m.is_identity())
            .unwrap_or(false)
    }

    /// `|○| + |□| = 6n − 2` for a diagram of `6n` stones.
    pub fn is_maximal(&self, n: usize) -> Result<bool> {
        if n == 0 || self.len() != 6 * n {
            return Err(Error::LengthMismatch {
                expected: 6 * n,
                actual: self.len(),
            });
        }
        let c = self.counts();
        Ok(c.circles + c.squares == 6 * n - 2)
    }

    /// Maximality for diagrams whose length is a multiple of six.
    pub fn is_maximal_auto(&self) -> bool {
        self.len() % 6 == 0 && self.is_maximal(self.len() / 6).unwrap_or(false)
    }

    fn least_rotation(stones: &[Stone]) -> Vec<Stone> {
        let n = stones.len();
        let mut best = 0;
        for k in 1..n {
            let cand = (0..n).map(|i| stones[(k + i) % n]);
            let cur = (0..n).map(|i| stones[(best + i) % n]);
            if cand.lt(cur) {
                best = k;
            }
        }
        (0..n).map(|i| stones[(best + i) % n]).collect()
    }

    pub fn canonical_diagram(&self, mode: Mode) -> NecklaceDiagram {
        let rot = Self::least_rotation(&self.stones);
        let stones = match mode {
            Mode::Oriented => rot,
            Mode::Symmetry => rot.min(Self::least_rotation(&self.mirror().stones)),
        };
        NecklaceDiagram { stones }
    }

    pub fn canonical(&self, mode: Mode) -> String {
        self.canonical_diagram(mode).encode()
    }

    pub fn encode(&self) -> String {
        self.stones.iter().map(|s| s.letter()).collect()
    }

    pub fn decode(s: &str) -> Result<NecklaceDiagram> {
        let stones = s
            .chars()
            .enumerate()
            .map(|(i, ch)| {
                Stone::from_letter(ch).ok_or_else(|| Error::Parse {
                    position: i,
                    message: format!("unexpected character {ch:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        NecklaceDiagram::new(stones)
    }
}

pub fn encode(d: &NecklaceDiagram) -> String {
    d.encode()
}

pub fn decode(s: &str) -> Result<NecklaceDiagram> {
    NecklaceDiagram::decode(s)
}

impl fmt::Display for NecklaceDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stones {
            write!(f, "{}", s.letter())?;
        }
        Ok(())
    }
}

impl FromStr for NecklaceDiagram {
    type Err = Error;

    fn from_str(s: &str) -> Result<NecklaceDiagram> {
        NecklaceDiagram::decode(s)
    }
}
