//! Exact 2×2 integer matrix arithmetic for the modular group.
//!
//! [`Sl2`] keeps the sign of a determinant-one matrix, [`ProjMat`] identifies a
//! matrix with its negation (an element of PSL(2,Z)) by storing a canonical
//! representative whose first non-zero entry of the top row is positive.
//! [`DyadicMat`] carries the half-stone matrices, whose entries live in ½ℤ and
//! whose determinants are powers of two.
//!
//! All arithmetic is checked; overflow surfaces as [`Error::Overflow`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::necklace::Stone;

fn mul_add(p: i64, q: i64, r: i64, s: i64) -> Result<i64> {
    p.checked_mul(q)
        .and_then(|pq| r.checked_mul(s).and_then(|rs| pq.checked_add(rs)))
        .ok_or(Error::Overflow)
}

fn det_i128(a: i64, b: i64, c: i64, d: i64) -> i128 {
    a as i128 * d as i128 - b as i128 * c as i128
}

/// A determinant-one integer matrix with its sign tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sl2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Sl2 {
    pub const IDENTITY: Sl2 = Sl2 { a: 1, b: 0, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Sl2> {
        let det = det_i128(a, b, c, d);
        if det != 1 {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        Ok(Sl2 { a, b, c, d })
    }

    pub(crate) const fn raw(a: i64, b: i64, c: i64, d: i64) -> Sl2 {
        Sl2 { a, b, c, d }
    }

    pub fn checked_mul(&self, rhs: &Sl2) -> Result<Sl2> {
        Ok(Sl2 {
            a: mul_add(self.a, rhs.a, self.b, rhs.c)?,
            b: mul_add(self.a, rhs.b, self.b, rhs.d)?,
            c: mul_add(self.c, rhs.a, self.d, rhs.c)?,
            d: mul_add(self.c, rhs.b, self.d, rhs.d)?,
        })
    }

    pub fn inverse(&self) -> Sl2 {
        Sl2 {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn neg(&self) -> Sl2 {
        Sl2 {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    pub fn pow(&self, n: u32) -> Result<Sl2> {
        let mut acc = Sl2::IDENTITY;
        for _ in 0..n {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    pub fn proj(&self) -> ProjMat {
        ProjMat::from_sl2(*self)
    }
}

impl fmt::Display for Sl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// An element of PSL(2,Z), stored as its canonical representative.
///
/// The representative satisfies `a > 0`, or `a == 0 && b > 0`. Equality,
/// hashing and ordering all act on that representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjMat {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl ProjMat {
    pub const IDENTITY: ProjMat = ProjMat { a: 1, b: 0, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<ProjMat> {
        Ok(Sl2::new(a, b, c, d)?.proj())
    }

    fn from_sl2(m: Sl2) -> ProjMat {
        // det = 1 rules out a == b == 0, so one of the two branches applies.
        if m.a < 0 || (m.a == 0 && m.b < 0) {
            let n = m.neg();
            ProjMat { a: n.a, b: n.b, c: n.c, d: n.d }
        } else {
            ProjMat { a: m.a, b: m.b, c: m.c, d: m.d }
        }
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn as_sl2(&self) -> Sl2 {
        Sl2::raw(self.a, self.b, self.c, self.d)
    }

    pub fn is_identity(&self) -> bool {
        *self == ProjMat::IDENTITY
    }

    pub fn mul(&self, rhs: &ProjMat) -> Result<ProjMat> {
        Ok(self.as_sl2().checked_mul(&rhs.as_sl2())?.proj())
    }

    pub fn inverse(&self) -> ProjMat {
        self.as_sl2().inverse().proj()
    }

    pub fn trace_abs(&self) -> i64 {
        (self.a + self.d).abs()
    }
}

impl fmt::Display for ProjMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "±({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// Multiply two elements of PSL(2,Z).
pub fn mul(m1: &ProjMat, m2: &ProjMat) -> Result<ProjMat> {
    m1.mul(m2)
}

/// `x = (0 1; -1 0)`, of order two in PSL(2,Z).
pub const X: Sl2 = Sl2::raw(0, 1, -1, 0);
/// `y = (0 1; -1 1)`, of order three in PSL(2,Z).
pub const Y: Sl2 = Sl2::raw(0, 1, -1, 1);
/// Dehn twist `[t_a] = (1 1; 0 1)`.
pub const T_A: Sl2 = Sl2::raw(1, 1, 0, 1);
/// Dehn twist `[t_b] = (1 0; -1 1)`.
pub const T_B: Sl2 = Sl2::raw(1, 0, -1, 1);

/// Product of a word in `x` and `y`, written as a string such as `"yxy"`.
pub fn xy_word(word: &str) -> Result<Sl2> {
    let mut acc = Sl2::IDENTITY;
    for (i, ch) in word.chars().enumerate() {
        let g = match ch {
            'x' => X,
            'y' => Y,
            _ => {
                return Err(Error::Parse {
                    position: i,
                    message: format!("unexpected generator {ch:?}"),
                })
            }
        };
        acc = acc.checked_mul(&g)?;
    }
    Ok(acc)
}

/// The monodromy assigned to each stone.
///
/// `SQUARE = yxy`, `CIRCLE = xyxyx`, `ARROW_R = y²x = [t_a]`,
/// `ARROW_L = xy² = [t_b]`, all up to sign.
pub fn stone_monodromy(s: Stone) -> ProjMat {
    StoneAlgebra::standard().monodromy(s)
}

/// Left-to-right product of stone monodromies; the empty word gives the identity.
pub fn word_monodromy(w: &[Stone]) -> Result<ProjMat> {
    StoneAlgebra::standard().word_monodromy(w)
}

/// The four stone matrices used by monodromy computations.
///
/// [`StoneAlgebra::standard`] is the only algebra with geometric meaning. The
/// override hook exists so callers can run negative controls against a
/// deliberately corrupted table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoneAlgebra {
    mats: [ProjMat; 4],
}

impl StoneAlgebra {
    pub const fn standard() -> StoneAlgebra {
        StoneAlgebra {
            mats: [
                // C, L, R, S in collation order
                ProjMat { a: 2, b: 1, c: -1, d: 0 },
                ProjMat { a: 1, b: 0, c: -1, d: 1 },
                ProjMat { a: 1, b: 1, c: 0, d: 1 },
                ProjMat { a: 0, b: 1, c: -1, d: 2 },
            ],
        }
    }

    pub fn with_override(mut self, stone: Stone, m: ProjMat) -> StoneAlgebra {
        self.mats[stone.index()] = m;
        self
    }

    #[inline]
    pub fn monodromy(&self, s: Stone) -> ProjMat {
        self.mats[s.index()]
    }

    pub fn word_monodromy(&self, w: &[Stone]) -> Result<ProjMat> {
        let mut acc = Sl2::IDENTITY;
        for &s in w {
            acc = acc.checked_mul(&self.mats[s.index()].as_sl2())?;
        }
        Ok(acc.proj())
    }

    /// Raw signed product of the canonical stone representatives.
    pub fn raw_word_product(&self, w: &[Stone]) -> Result<Sl2> {
        let mut acc = Sl2::IDENTITY;
        for &s in w {
            acc = acc.checked_mul(&self.mats[s.index()].as_sl2())?;
        }
        Ok(acc)
    }

    pub fn is_standard(&self) -> bool {
        *self == StoneAlgebra::standard()
    }
}

impl Default for StoneAlgebra {
    fn default() -> Self {
        StoneAlgebra::standard()
    }
}

/// A matrix `2^(-e) · (a b; c d)` with integer entries, up to global sign.
///
/// The determinant of the scaled matrix is `±2^k` for some integer `k`: the
/// half-stone matrices have determinant 2 or ½, their stone-level products
/// have determinant 1, and the reflection `M` has determinant −1. The stored
/// form is reduced (not all entries even when `e > 0`) and sign-canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicMat {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    e: u32,
}

impl DyadicMat {
    pub const IDENTITY: DyadicMat = DyadicMat { a: 1, b: 0, c: 0, d: 1, e: 0 };

    /// Build `2^(-e) · (a b; c d)`, reducing and canonicalizing it.
    pub fn new(a: i64, b: i64, c: i64, d: i64, e: u32) -> Result<DyadicMat> {
        let det = det_i128(a, b, c, d);
        let mag = det.unsigned_abs();
        if mag == 0 || !mag.is_power_of_two() {
            return Err(Error::NotDyadic(det.clamp(i64::MIN as i128, i64::MAX as i128) as i64));
        }
        Ok(DyadicMat { a, b, c, d, e }.normalized())
    }

    pub fn integer(a: i64, b: i64, c: i64, d: i64) -> Result<DyadicMat> {
        DyadicMat::new(a, b, c, d, 0)
    }

    fn normalized(mut self) -> DyadicMat {
        while self.e > 0 && [self.a, self.b, self.c, self.d].iter().all(|v| v % 2 == 0) {
            self.a /= 2;
            self.b /= 2;
            self.c /= 2;
            self.d /= 2;
            self.e -= 1;
        }
        if self.a < 0 || (self.a == 0 && self.b < 0) {
            self.a = -self.a;
            self.b = -self.b;
            self.c = -self.c;
            self.d = -self.d;
        }
        self
    }

    /// `(a, b, c, d, e)` of the reduced canonical form.
    pub fn parts(&self) -> (i64, i64, i64, i64, u32) {
        (self.a, self.b, self.c, self.d, self.e)
    }

    /// Base-two logarithm of `|det|` of the scaled matrix.
    pub fn det_log2(&self) -> i64 {
        let det = det_i128(self.a, self.b, self.c, self.d).unsigned_abs();
        det.trailing_zeros() as i64 - 2 * self.e as i64
    }

    pub fn det_sign(&self) -> i64 {
        det_i128(self.a, self.b, self.c, self.d).signum() as i64
    }

    pub fn mul(&self, rhs: &DyadicMat) -> Result<DyadicMat> {
        let e = self.e.checked_add(rhs.e).ok_or(Error::Overflow)?;
        Ok(DyadicMat {
            a: mul_add(self.a, rhs.a, self.b, rhs.c)?,
            b: mul_add(self.a, rhs.b, self.b, rhs.d)?,
            c: mul_add(self.c, rhs.a, self.d, rhs.c)?,
            d: mul_add(self.c, rhs.b, self.d, rhs.d)?,
            e,
        }
        .normalized())
    }

    pub fn inverse(&self) -> Result<DyadicMat> {
        // (2^-e A)^-1 = 2^e adj(A) / det(A), and det(A) = ±2^k.
        let det = det_i128(self.a, self.b, self.c, self.d);
        let k = det.unsigned_abs().trailing_zeros();
        let sign = det.signum() as i64;
        let (a, b, c, d) = (sign * self.d, -sign * self.b, -sign * self.c, sign * self.a);
        let m = if self.e >= k {
            let f = 1i64.checked_shl(self.e - k).ok_or(Error::Overflow)?;
            DyadicMat {
                a: a.checked_mul(f).ok_or(Error::Overflow)?,
                b: b.checked_mul(f).ok_or(Error::Overflow)?,
                c: c.checked_mul(f).ok_or(Error::Overflow)?,
                d: d.checked_mul(f).ok_or(Error::Overflow)?,
                e: 0,
            }
        } else {
            DyadicMat { a, b, c, d, e: k - self.e }
        };
        Ok(m.normalized())
    }

    pub fn from_sl2(m: &Sl2) -> DyadicMat {
        DyadicMat { a: m.a, b: m.b, c: m.c, d: m.d, e: 0 }.normalized()
    }

    /// The element of PSL(2,Z) this matrix equals, if it is integral and unimodular.
    pub fn to_proj(&self) -> Result<ProjMat> {
        if self.e != 0 {
            return Err(Error::NonIntegral);
        }
        ProjMat::new(self.a, self.b, self.c, self.d)
    }
}

impl fmt::Display for DyadicMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.e {
            0 => write!(f, "±({} {}; {} {})", self.a, self.b, self.c, self.d),
            e => write!(f, "±2^-{}·({} {}; {} {})", e, self.a, self.b, self.c, self.d),
        }
    }
}

/// The four decorations around a real critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Decoration {
    /// `−×<`
    XLeft,
    /// `>×−`
    XRight,
    /// `−○<`
    OLeft,
    /// `>○−`
    ORight,
}

impl Decoration {
    pub const ALL: [Decoration; 4] = [
        Decoration::XLeft,
        Decoration::XRight,
        Decoration::OLeft,
        Decoration::ORight,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Decoration::XLeft => "-x<",
            Decoration::XRight => ">x-",
            Decoration::OLeft => "-o<",
            Decoration::ORight => ">o-",
        }
    }
}

/// Half-stone transition matrix of a decoration.
pub fn decoration_matrix(d: Decoration) -> DyadicMat {
    let (a, b, c, dd, e) = match d {
        Decoration::XLeft => (1, 0, -1, 2, 1),
        Decoration::XRight => (2, 0, -1, 1, 0),
        Decoration::OLeft => (2, 1, 0, 1, 1),
        Decoration::ORight => (1, 1, 0, 2, 0),
    };
    DyadicMat::new(a, b, c, dd, e).expect("decoration matrices are dyadic")
}

/// Conjugator `R = ½·(1 −1; 1 1)` between the half-stone frame and PSL(2,Z).
pub fn conjugator() -> DyadicMat {
    DyadicMat::new(1, -1, 1, 1, 1).expect("R is dyadic")
}

/// Reflection `M = (1 0; 0 −1)`.
pub fn reflection() -> DyadicMat {
    DyadicMat::new(1, 0, 0, -1, 0).expect("M is dyadic")
}

/// `R⁻¹ · p · R` as an element of PSL(2,Z).
///
/// Fails with [`Error::NonIntegral`] when the conjugate has half-integer
/// entries, which is what happens for an odd number of half-stones.
pub fn conjugate_to_psl(p: &DyadicMat) -> Result<ProjMat> {
    let r = conjugator();
    let conj = r.inverse()?.mul(p)?.mul(&r)?;
    conj.to_proj()
}

/// Product of the two half-stone matrices making up a stone.
pub fn half_stone_product(s: Stone) -> DyadicMat {
    let (l, r) = s.decorations();
    decoration_matrix(l)
        .mul(&decoration_matrix(r))
        .expect("small entries")
}
