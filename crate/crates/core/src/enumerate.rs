//! Enumeration of identity-monodromy words.
//!
//! Words are packed two bits per stone into a `u64`, first stone in the most
//! significant position, so numeric order on words of equal length is the
//! lexicographic order under `C < L < R < S`.
//!
//! Every stone maps to the generator of the abelianization `Z/6` of
//! PSL(2,Z), so identity words only exist in lengths divisible by six.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::necklace::{Mode, NecklaceDiagram, Stone, StoneCounts};
use crate::psl2::{ProjMat, Sl2, StoneAlgebra};

pub const DEFAULT_MAX_LENGTH: usize = 24;
/// Upper bound on the number of words held in one half-product table.
pub const DEFAULT_TABLE_LIMIT: usize = 1 << 26;

pub mod word {
    //! Packed stone words.
    use crate::necklace::Stone;

    const MIRROR: [u64; 4] = [0, 2, 1, 3];

    pub fn pack(stones: &[Stone]) -> u64 {
        stones.iter().fold(0u64, |acc, s| (acc << 2) | s.index() as u64)
    }

    #[inline]
    pub fn stone_at(w: u64, len: usize, i: usize) -> Stone {
        Stone::from_index(((w >> (2 * (len - 1 - i))) & 3) as usize)
    }

    pub fn unpack(w: u64, len: usize) -> Vec<Stone> {
        (0..len).map(|i| stone_at(w, len, i)).collect()
    }

    pub fn to_string(w: u64, len: usize) -> String {
        (0..len).map(|i| stone_at(w, len, i).letter()).collect()
    }

    #[inline]
    fn mask(len: usize) -> u64 {
        if len >= 32 {
            u64::MAX
        } else {
            (1u64 << (2 * len)) - 1
        }
    }

    /// Word read starting at stone `k`.
    #[inline]
    pub fn rotate(w: u64, len: usize, k: usize) -> u64 {
        let k = k % len;
        if k == 0 {
            return w;
        }
        ((w << (2 * k)) | (w >> (2 * (len - k)))) & mask(len)
    }

    pub fn mirror(w: u64, len: usize) -> u64 {
        let mut out = 0u64;
        let mut src = w;
        for _ in 0..len {
            out = (out << 2) | MIRROR[(src & 3) as usize];
            src >>= 2;
        }
        out
    }

    pub fn least_rotation(w: u64, len: usize) -> u64 {
        (1..len).map(|k| rotate(w, len, k)).fold(w, u64::min)
    }

    /// Whether no rotation of `w` is smaller than `w`.
    #[inline]
    pub fn is_least_rotation(w: u64, len: usize) -> bool {
        (1..len).all(|k| rotate(w, len, k) >= w)
    }

    /// Whether `w` is the canonical representative of its rotation class
    /// together with the class of its mirror image.
    pub fn is_symmetry_canonical(w: u64, len: usize) -> bool {
        if !is_least_rotation(w, len) {
            return false;
        }
        let m = mirror(w, len);
        (0..len).all(|k| rotate(m, len, k) >= w)
    }

    pub fn counts(w: u64, len: usize) -> [usize; 4] {
        let mut c = [0usize; 4];
        let mut src = w;
        for _ in 0..len {
            c[(src & 3) as usize] += 1;
            src >>= 2;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Filter {
    None,
    /// `|○| + |□| = length − 2`.
    Maximal,
    /// Exact `(|○|, |□|)`.
    Counts { circles: usize, squares: usize },
}

impl Filter {
    fn accepts(&self, counts: [usize; 4], len: usize) -> bool {
        let circles = counts[Stone::Circle.index()];
        let squares = counts[Stone::Square.index()];
        match *self {
            Filter::None => true,
            Filter::Maximal => len % 6 == 0 && circles + squares + 2 == len,
            Filter::Counts { circles: c, squares: s } => circles == c && squares == s,
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filter::None => f.write_str("none"),
            Filter::Maximal => f.write_str("maximal"),
            Filter::Counts { circles, squares } => write!(f, "counts({circles},{squares})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Output {
    Count,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumQuery {
    pub length: usize,
    pub mode: Mode,
    pub filter: Filter,
    pub output: Output,
}

impl EnumQuery {
    pub fn new(length: usize, mode: Mode) -> EnumQuery {
        EnumQuery {
            length,
            mode,
            filter: Filter::None,
            output: Output::List,
        }
    }

    pub fn filter(mut self, filter: Filter) -> EnumQuery {
        self.filter = filter;
        self
    }

    pub fn output(mut self, output: Output) -> EnumQuery {
        self.output = output;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumResult {
    /// Canonical words in lexicographic order; empty for [`Output::Count`].
    pub words: Vec<String>,
    pub count: usize,
}

/// Words of a fixed length grouped by their monodromy.
#[derive(Debug, Clone)]
pub struct HalfProductTable {
    len: usize,
    map: HashMap<ProjMat, Vec<u64>>,
    size: usize,
}

impl HalfProductTable {
    pub fn build(alg: &StoneAlgebra, len: usize, limit: usize) -> Result<HalfProductTable> {
        let size = 4usize
            .checked_pow(len as u32)
            .filter(|&n| n <= limit)
            .ok_or_else(|| {
                Error::ResourceLimit(format!("half table for length {len} exceeds {limit} words"))
            })?;
        let mut map: HashMap<ProjMat, Vec<u64>> = HashMap::new();
        let mut stack: Vec<(usize, u64, Sl2)> = vec![(0, 0, Sl2::IDENTITY)];
        let mats: Vec<Sl2> = Stone::ALL.iter().map(|&s| alg.monodromy(s).as_sl2()).collect();
        while let Some((depth, w, m)) = stack.pop() {
            if depth == len {
                map.entry(m.proj()).or_default().push(w);
                continue;
            }
            for (i, g) in mats.iter().enumerate().rev() {
                stack.push((depth + 1, (w << 2) | i as u64, m.checked_mul(g)?));
            }
        }
        for v in map.values_mut() {
            v.sort_unstable();
        }
        Ok(HalfProductTable { len, map, size })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn words(&self, m: &ProjMat) -> &[u64] {
        self.map.get(m).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count(&self, m: &ProjMat) -> u64 {
        self.words(m).len() as u64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProjMat, &Vec<u64>)> {
        self.map.iter()
    }

    pub fn entries(&self) -> usize {
        self.size
    }
}

#[derive(Debug, Clone)]
pub struct Enumerator {
    pub algebra: StoneAlgebra,
    pub max_length: usize,
    pub table_limit: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator {
            algebra: StoneAlgebra::standard(),
            max_length: DEFAULT_MAX_LENGTH,
            table_limit: DEFAULT_TABLE_LIMIT,
        }
    }
}

impl Enumerator {
    pub fn with_algebra(algebra: StoneAlgebra) -> Enumerator {
        Enumerator {
            algebra,
            ..Enumerator::default()
        }
    }

    fn check_length(&self, length: usize) -> Result<()> {
        if length > self.max_length || length > 31 {
            return Err(Error::ResourceLimit(format!(
                "length {length} exceeds the configured maximum {}",
                self.max_length.min(31)
            )));
        }
        Ok(())
    }

    fn stone_mats(&self) -> [Sl2; 4] {
        Stone::ALL.map(|s| self.algebra.monodromy(s).as_sl2())
    }

    /// Raw identity words by exhaustive depth-first search without pruning.
    pub fn bruteforce_count(&self, length: usize) -> Result<u64> {
        self.check_length(length)?;
        if length == 0 {
            return Ok(1);
        }
        let mats = self.stone_mats();
        let shard_depth = length.min(3);
        let shards: Vec<u64> = (0..4u64.pow(shard_depth as u32)).collect();
        shards
            .par_iter()
            .map(|&prefix| {
                let mut m = Sl2::IDENTITY;
                for i in 0..shard_depth {
                    let s = (prefix >> (2 * (shard_depth - 1 - i))) & 3;
                    m = m.checked_mul(&mats[s as usize])?;
                }
                dfs_count(&mats, m, length - shard_depth)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    }

    /// Raw identity words by depth-first search, pruned by the length
    /// residue and finished with a suffix-product table.
    pub fn pruned_count(&self, length: usize) -> Result<u64> {
        self.check_length(length)?;
        if length % 6 != 0 {
            return Ok(0);
        }
        if length == 0 {
            return Ok(1);
        }
        let suffix_len = length / 2;
        let suffix = HalfProductTable::build(&self.algebra, suffix_len, self.table_limit)?;
        let mats = self.stone_mats();
        let prefix_len = length - suffix_len;
        let mut total = 0u64;
        let mut stack = vec![(0usize, Sl2::IDENTITY)];
        while let Some((depth, m)) = stack.pop() {
            if depth == prefix_len {
                total += suffix.count(&m.proj().inverse());
                continue;
            }
            for g in &mats {
                stack.push((depth + 1, m.checked_mul(g)?));
            }
        }
        Ok(total)
    }

    /// Raw identity words by joining two half-product tables on `m` and `m⁻¹`.
    pub fn mitm_count(&self, length: usize) -> Result<u64> {
        self.check_length(length)?;
        if length == 0 {
            return Ok(1);
        }
        let left_len = length / 2;
        let left = HalfProductTable::build(&self.algebra, left_len, self.table_limit)?;
        let right = if length - left_len == left_len {
            None
        } else {
            Some(HalfProductTable::build(&self.algebra, length - left_len, self.table_limit)?)
        };
        let right = right.as_ref().unwrap_or(&left);
        Ok(left
            .iter()
            .map(|(m, ws)| ws.len() as u64 * right.count(&m.inverse()))
            .sum())
    }

    /// Canonical representatives of identity words, by meet in the middle.
    ///
    /// A joined word is emitted only when it is its own canonical form, so
    /// no deduplication set is needed.
    pub fn canonical_words(&self, length: usize, mode: Mode, filter: Filter) -> Result<Vec<u64>> {
        self.check_length(length)?;
        if length == 0 || length % 6 != 0 {
            return Ok(Vec::new());
        }
        let left_len = length / 2;
        let right_len = length - left_len;
        let left = HalfProductTable::build(&self.algebra, left_len, self.table_limit)?;
        let right = HalfProductTable::build(&self.algebra, right_len, self.table_limit)?;
        let mut lefts: Vec<(u64, ProjMat)> = left
            .iter()
            .flat_map(|(m, ws)| ws.iter().map(move |&w| (w, m.inverse())))
            .collect();
        lefts.sort_unstable();
        let mut out: Vec<u64> = lefts
            .par_iter()
            .flat_map_iter(|&(u, inv)| {
                right.words(&inv).iter().filter_map(move |&v| {
                    let w = (u << (2 * right_len)) | v;
                    let canonical = match mode {
                        Mode::Oriented => word::is_least_rotation(w, length),
                        Mode::Symmetry => word::is_symmetry_canonical(w, length),
                    };
                    (canonical && filter.accepts(word::counts(w, length), length)).then_some(w)
                })
            })
            .collect();
        out.par_sort_unstable();
        Ok(out)
    }

    /// Canonical representatives by exhaustive search, for cross-checking.
    pub fn canonical_words_bruteforce(&self, length: usize, mode: Mode) -> Result<Vec<u64>> {
        self.check_length(length)?;
        if length == 0 {
            return Ok(Vec::new());
        }
        let mats = self.stone_mats();
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0u64, Sl2::IDENTITY)];
        while let Some((depth, w, m)) = stack.pop() {
            if depth == length {
                let keep = m.proj().is_identity()
                    && match mode {
                        Mode::Oriented => word::is_least_rotation(w, length),
                        Mode::Symmetry => word::is_symmetry_canonical(w, length),
                    };
                if keep {
                    out.push(w);
                }
                continue;
            }
            for (i, g) in mats.iter().enumerate() {
                stack.push((depth + 1, (w << 2) | i as u64, m.checked_mul(g)?));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn enumerate_valid(&self, q: &EnumQuery) -> Result<EnumResult> {
        let words = self.canonical_words(q.length, q.mode, q.filter)?;
        let count = words.len();
        let words = match q.output {
            Output::Count => Vec::new(),
            Output::List => words.iter().map(|&w| word::to_string(w, q.length)).collect(),
        };
        Ok(EnumResult { words, count })
    }

    pub fn diagrams(&self, length: usize, mode: Mode, filter: Filter) -> Result<Vec<NecklaceDiagram>> {
        Ok(self
            .canonical_words(length, mode, filter)?
            .into_iter()
            .map(|w| NecklaceDiagram::new(word::unpack(w, length)).expect("non-empty"))
            .collect())
    }

    /// Class counts keyed by `(|○|, |□|)`.
    pub fn count_by_profile(&self, length: usize, mode: Mode) -> Result<BTreeMap<(usize, usize), usize>> {
        let mut table = BTreeMap::new();
        for w in self.canonical_words(length, mode, Filter::None)? {
            let c = word::counts(w, length);
            *table
                .entry((c[Stone::Circle.index()], c[Stone::Square.index()]))
                .or_insert(0) += 1;
        }
        Ok(table)
    }
}

fn dfs_count(mats: &[Sl2; 4], m: Sl2, remaining: usize) -> Result<u64> {
    if remaining == 0 {
        return Ok(m.proj().is_identity() as u64);
    }
    let mut total = 0;
    for g in mats {
        total += dfs_count(mats, m.checked_mul(g)?, remaining - 1)?;
    }
    Ok(total)
}

/// Classes of valid diagrams of a given length.
pub fn enumerate_valid(q: &EnumQuery) -> Result<EnumResult> {
    Enumerator::default().enumerate_valid(q)
}

pub fn count_by_profile(length: usize, mode: Mode) -> Result<BTreeMap<(usize, usize), usize>> {
    Enumerator::default().count_by_profile(length, mode)
}

pub fn mitm_count(length: usize) -> Result<u64> {
    Enumerator::default().mitm_count(length)
}

/// Stone counts of a packed word.
pub fn packed_counts(w: u64, len: usize) -> StoneCounts {
    let c = word::counts(w, len);
    StoneCounts {
        circles: c[Stone::Circle.index()],
        squares: c[Stone::Square.index()],
        arrows_r: c[Stone::ArrowR.index()],
        arrows_l: c[Stone::ArrowL.index()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_raw(len: usize) -> u64 {
        // independent oracle: iterate all 4^len words with plain i128 products
        let mats: [[i128; 4]; 4] = [[2, 1, -1, 0], [1, 0, -1, 1], [1, 1, 0, 1], [0, 1, -1, 2]];
        let mut count = 0;
        for code in 0..4u64.pow(len as u32) {
            let mut m = [1i128, 0, 0, 1];
            for i in 0..len {
                let g = mats[((code >> (2 * i)) & 3) as usize];
                m = [
                    m[0] * g[0] + m[1] * g[2],
                    m[0] * g[1] + m[1] * g[3],
                    m[2] * g[0] + m[3] * g[2],
                    m[2] * g[1] + m[3] * g[3],
                ];
            }
            if m[1] == 0 && m[2] == 0 && m[0] == m[3] && m[0].abs() == 1 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn oracle_small_lengths() {
        let e = Enumerator::default();
        for len in 0..=6 {
            let expected = brute_raw(len);
            assert_eq!(e.mitm_count(len).unwrap(), expected, "mitm {len}");
            assert_eq!(e.bruteforce_count(len).unwrap(), expected, "dfs {len}");
            assert_eq!(e.pruned_count(len).unwrap(), expected, "pruned {len}");
        }
        assert_eq!(brute_raw(2), 0);
        assert_eq!(brute_raw(6), 196);
    }

    #[test]
    fn packed_word_ops() {
        let d: NecklaceDiagram = "CLLSRR".parse().unwrap();
        let w = word::pack(d.stones());
        assert_eq!(word::to_string(w, 6), "CLLSRR");
        assert_eq!(word::to_string(word::rotate(w, 6, 2), 6), "LSRRCL");
        assert_eq!(word::to_string(word::mirror(w, 6), 6), "LLSRRC");
        assert_eq!(word::to_string(word::least_rotation(w, 6), 6), d.canonical(Mode::Oriented));
    }

    #[test]
    fn length_limit() {
        let e = Enumerator {
            max_length: 12,
            ..Enumerator::default()
        };
        assert!(matches!(
            e.enumerate_valid(&EnumQuery::new(18, Mode::Symmetry)),
            Err(Error::ResourceLimit(_))
        ));
        let e = Enumerator {
            table_limit: 100,
            ..Enumerator::default()
        };
        assert!(matches!(e.mitm_count(12), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn six_stone_classes() {
        let r = enumerate_valid(&EnumQuery::new(6, Mode::Symmetry)).unwrap();
        assert_eq!(r.count, 25);
        let mut sorted = r.words.clone();
        sorted.sort();
        assert_eq!(sorted, r.words);
        let r = enumerate_valid(&EnumQuery::new(6, Mode::Oriented).output(Output::Count)).unwrap();
        assert_eq!(r.count, 42);
        assert!(r.words.is_empty());
        let max = enumerate_valid(&EnumQuery::new(6, Mode::Symmetry).filter(Filter::Maximal)).unwrap();
        assert_eq!(max.words, vec!["CCCLCR", "CCLCCL", "LSSLSS", "LSSSRS"]);
    }

    #[test]
    fn profiles_at_six() {
        let t = count_by_profile(6, Mode::Symmetry).unwrap();
        assert_eq!(t.values().sum::<usize>(), 25);
        let all_arrow = enumerate_valid(
            &EnumQuery::new(6, Mode::Symmetry).filter(Filter::Counts { circles: 0, squares: 0 }),
        )
        .unwrap();
        let target: NecklaceDiagram = "RLRLRL".parse().unwrap();
        assert!(all_arrow.words.contains(&target.canonical(Mode::Symmetry)));
        assert_eq!(t[&(0, 0)], all_arrow.count);
    }

    #[test]
    fn engines_agree_on_classes() {
        let e = Enumerator::default();
        for mode in [Mode::Oriented, Mode::Symmetry] {
            assert_eq!(
                e.canonical_words(6, mode, Filter::None).unwrap(),
                e.canonical_words_bruteforce(6, mode).unwrap()
            );
        }
    }

    #[test]
    fn lengths_not_divisible_by_six_are_empty() {
        let e = Enumerator::default();
        for len in [1, 2, 3, 4, 5, 7, 8] {
            assert_eq!(e.mitm_count(len).unwrap(), 0);
        }
        assert_eq!(e.enumerate_valid(&EnumQuery::new(4, Mode::Oriented)).unwrap().count, 0);
    }
}
