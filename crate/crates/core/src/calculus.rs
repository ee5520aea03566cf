//! Sums, flip-flops and metamorphoses on necklace diagrams.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::necklace::{Mode, NecklaceDiagram, Stone, StoneCounts};
use crate::psl2::{ProjMat, StoneAlgebra};

pub const MAX_SEGMENT_LEN: usize = 3;
/// Catalog length used when none is given.
pub const DEFAULT_SEGMENT_LEN: usize = 2;
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;
pub const DEFAULT_DEPTH_BUDGET: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleTag {
    FlipFlop,
    M1,
    M2,
    M1Inv,
    M2Inv,
    Custom,
}

impl RuleTag {
    pub fn from_delta(dc: i64, ds: i64) -> RuleTag {
        match (dc, ds) {
            (0, 0) => RuleTag::FlipFlop,
            (-1, 0) => RuleTag::M1,
            (0, -1) => RuleTag::M2,
            (1, 0) => RuleTag::M1Inv,
            (0, 1) => RuleTag::M2Inv,
            _ => RuleTag::Custom,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleTag::FlipFlop => "flipflop",
            RuleTag::M1 => "m1",
            RuleTag::M2 => "m2",
            RuleTag::M1Inv => "m1_inv",
            RuleTag::M2Inv => "m2_inv",
            RuleTag::Custom => "custom",
        }
    }

    /// Flip-flops and the two metamorphoses.
    pub fn is_forward(self) -> bool {
        matches!(self, RuleTag::FlipFlop | RuleTag::M1 | RuleTag::M2)
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<RuleTag> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "flipflop" | "flip_flop" | "ff" => Ok(RuleTag::FlipFlop),
            "m1" => Ok(RuleTag::M1),
            "m2" => Ok(RuleTag::M2),
            "m1_inv" | "m1inv" => Ok(RuleTag::M1Inv),
            "m2_inv" | "m2inv" => Ok(RuleTag::M2Inv),
            "custom" => Ok(RuleTag::Custom),
            _ => Err(Error::Config(format!("unknown rule tag {s:?}"))),
        }
    }
}

/// A monodromy-preserving segment replacement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RewriteRule {
    lhs: Vec<Stone>,
    rhs: Vec<Stone>,
    delta_circles: i64,
    delta_squares: i64,
    tag: RuleTag,
}

fn letters(s: &[Stone]) -> String {
    s.iter().map(|s| s.letter()).collect()
}

fn parse_segment(s: &str) -> Result<Vec<Stone>> {
    s.chars()
        .enumerate()
        .map(|(i, ch)| {
            Stone::from_letter(ch).ok_or_else(|| Error::Parse {
                position: i,
                message: format!("unexpected character {ch:?}"),
            })
        })
        .collect()
}

impl RewriteRule {
    /// Checked construction; the tag is derived from the count deltas
    /// unless `tag` is given, in which case it must agree with them.
    pub fn new(lhs: Vec<Stone>, rhs: Vec<Stone>, tag: Option<RuleTag>) -> Result<RewriteRule> {
        Self::new_in(&StoneAlgebra::standard(), lhs, rhs, tag)
    }

    pub fn new_in(
        alg: &StoneAlgebra,
        lhs: Vec<Stone>,
        rhs: Vec<Stone>,
        tag: Option<RuleTag>,
    ) -> Result<RewriteRule> {
        let bad = |message: &str| Error::BadRule {
            lhs: letters(&lhs),
            rhs: letters(&rhs),
            message: message.into(),
        };
        if !(1..=MAX_SEGMENT_LEN).contains(&lhs.len()) || !(1..=MAX_SEGMENT_LEN).contains(&rhs.len()) {
            return Err(bad("segments must have 1 to 3 stones"));
        }
        if lhs == rhs {
            return Err(bad("segments are identical"));
        }
        if alg.word_monodromy(&lhs)? != alg.word_monodromy(&rhs)? {
            return Err(Error::RuleMonodromy {
                lhs: letters(&lhs),
                rhs: letters(&rhs),
            });
        }
        let (cl, cr) = (StoneCounts::of(&lhs), StoneCounts::of(&rhs));
        let delta_circles = cr.circles as i64 - cl.circles as i64;
        let delta_squares = cr.squares as i64 - cl.squares as i64;
        let derived = RuleTag::from_delta(delta_circles, delta_squares);
        let tag = match tag {
            Some(t) if t != derived && t != RuleTag::Custom => {
                return Err(bad(&format!("tag {t} does not match the count change ({delta_circles}, {delta_squares})")));
            }
            Some(t) => t,
            None => derived,
        };
        Ok(RewriteRule {
            lhs,
            rhs,
            delta_circles,
            delta_squares,
            tag,
        })
    }

    pub fn lhs(&self) -> &[Stone] {
        &self.lhs
    }

    pub fn rhs(&self) -> &[Stone] {
        &self.rhs
    }

    pub fn delta_circles(&self) -> i64 {
        self.delta_circles
    }

    pub fn delta_squares(&self) -> i64 {
        self.delta_squares
    }

    pub fn tag(&self) -> RuleTag {
        self.tag
    }

    pub fn inverse(&self) -> RewriteRule {
        RewriteRule {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            delta_circles: -self.delta_circles,
            delta_squares: -self.delta_squares,
            tag: RuleTag::from_delta(-self.delta_circles, -self.delta_squares),
        }
    }

    /// Stone-wise dual of both segments.
    pub fn dual(&self) -> RewriteRule {
        RewriteRule {
            lhs: self.lhs.iter().map(|s| s.dual()).collect(),
            rhs: self.rhs.iter().map(|s| s.dual()).collect(),
            delta_circles: self.delta_squares,
            delta_squares: self.delta_circles,
            tag: RuleTag::from_delta(self.delta_squares, self.delta_circles),
        }
    }

    pub fn matches_at(&self, d: &NecklaceDiagram, position: usize) -> bool {
        self.lhs.len() <= d.len()
            && self
                .lhs
                .iter()
                .enumerate()
                .all(|(i, &s)| d.stone(position + i) == s)
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {}", letters(&self.lhs), letters(&self.rhs), self.tag)
    }
}

/// All ordered pairs of distinct segments of equal length, up to
/// `max_segment_len` stones, with equal monodromy.
pub fn derive_rewrite_catalog(max_segment_len: usize) -> Result<Vec<RewriteRule>> {
    derive_rewrite_catalog_in(&StoneAlgebra::standard(), max_segment_len)
}

pub fn derive_rewrite_catalog_in(alg: &StoneAlgebra, max_segment_len: usize) -> Result<Vec<RewriteRule>> {
    if !(1..=MAX_SEGMENT_LEN).contains(&max_segment_len) {
        return Err(Error::Config(format!(
            "segment length must be between 1 and {MAX_SEGMENT_LEN}"
        )));
    }
    let mut rules = Vec::new();
    for len in 1..=max_segment_len {
        let mut groups: BTreeMap<ProjMat, Vec<Vec<Stone>>> = BTreeMap::new();
        for code in 0..4usize.pow(len as u32) {
            let seg: Vec<Stone> = (0..len)
                .map(|i| Stone::from_index(code >> (2 * (len - 1 - i))))
                .collect();
            groups.entry(alg.word_monodromy(&seg)?).or_default().push(seg);
        }
        for segs in groups.values() {
            for a in segs {
                for b in segs {
                    if a != b {
                        rules.push(RewriteRule::new_in(alg, a.clone(), b.clone(), None)?);
                    }
                }
            }
        }
    }
    rules.sort();
    Ok(rules)
}

/// Parses one rule per line: `CL -> LR m1` or `CL <-> RC flipflop`.
/// `→` and `↔` are accepted; `#` starts a comment; the tag is optional.
pub fn parse_catalog(text: &str) -> Result<Vec<RewriteRule>> {
    let mut rules = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let line = line.replace("<->", " ↔ ").replace("->", " → ");
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |m: &str| Error::Parse {
            position: lineno + 1,
            message: format!("{m}: {raw:?}"),
        };
        if toks.len() < 3 || toks.len() > 4 {
            return Err(err("expected `lhs -> rhs [tag]`"));
        }
        let both = match toks[1] {
            "→" => false,
            "↔" => true,
            _ => return Err(err("expected an arrow")),
        };
        let lhs = parse_segment(toks[0]).map_err(|_| err("bad segment"))?;
        let rhs = parse_segment(toks[2]).map_err(|_| err("bad segment"))?;
        let tag = toks.get(3).map(|t| t.parse::<RuleTag>()).transpose()?;
        let rule = RewriteRule::new(lhs, rhs, tag)?;
        if both {
            rules.push(rule.inverse());
        }
        rules.push(rule);
    }
    Ok(rules)
}

pub fn format_catalog(rules: &[RewriteRule]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}

/// Replaces the segment starting at cyclic `position`.
pub fn apply_rewrite(d: &NecklaceDiagram, rule: &RewriteRule, position: usize) -> Result<NecklaceDiagram> {
    if position >= d.len() {
        return Err(Error::PositionOutOfRange {
            position,
            len: d.len(),
        });
    }
    if !rule.matches_at(d, position) {
        return Err(Error::NoMatch(position));
    }
    let rotated = d.rotate(position);
    let mut stones = rule.rhs.clone();
    stones.extend_from_slice(&rotated.stones()[rule.lhs.len()..]);
    let out = NecklaceDiagram::new(stones)?;
    // rotate back so that untouched stones keep their indices when possible
    let back = (d.len() - position) % d.len();
    Ok(if rule.lhs.len() == rule.rhs.len() {
        out.rotate(back)
    } else {
        out
    })
}

/// The first rule with the given tag that matches at `position`.
pub fn find_rule<'a>(
    catalog: &'a [RewriteRule],
    tag: RuleTag,
    d: &NecklaceDiagram,
    position: usize,
) -> Option<&'a RewriteRule> {
    catalog
        .iter()
        .find(|r| r.tag == tag && r.matches_at(d, position))
}

fn require_valid(d: &NecklaceDiagram) -> Result<()> {
    if d.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidDiagram(d.encode()))
    }
}

fn check_position(position: usize, d: &NecklaceDiagram) -> Result<()> {
    if position < d.len() {
        Ok(())
    } else {
        Err(Error::PositionOutOfRange {
            position,
            len: d.len(),
        })
    }
}

/// Cuts each diagram before stone `cut` and glues the two linear words.
pub fn mild_sum(d1: &NecklaceDiagram, cut1: usize, d2: &NecklaceDiagram, cut2: usize) -> Result<NecklaceDiagram> {
    require_valid(d1)?;
    require_valid(d2)?;
    check_position(cut1, d1)?;
    check_position(cut2, d2)?;
    let mut stones = d1.rotate(cut1).stones().to_vec();
    stones.extend_from_slice(d2.rotate(cut2).stones());
    NecklaceDiagram::new(stones)
}

/// Junction stones produced by cutting through a pair of stones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarshTable {
    map: BTreeMap<(Stone, Stone), (Stone, Stone)>,
}

impl Default for HarshTable {
    /// Cross-splice of half-decorations: `(l1,r1)`, `(l2,r2)` give
    /// `(l1,r2)` and `(l2,r1)`.
    fn default() -> Self {
        let mut map = BTreeMap::new();
        for a in Stone::ALL {
            for b in Stone::ALL {
                let (l1, r1) = a.halves();
                let (l2, r2) = b.halves();
                map.insert((a, b), (Stone::from_halves(l1, r2), Stone::from_halves(l2, r1)));
            }
        }
        HarshTable { map }
    }
}

impl HarshTable {
    pub fn empty() -> HarshTable {
        HarshTable { map: BTreeMap::new() }
    }

    pub fn insert(&mut self, a: Stone, b: Stone, junctions: (Stone, Stone)) {
        self.map.insert((a, b), junctions);
    }

    pub fn get(&self, a: Stone, b: Stone) -> Result<(Stone, Stone)> {
        self.map
            .get(&(a, b))
            .copied()
            .ok_or(Error::TableMiss(a.letter(), b.letter()))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((Stone, Stone), (Stone, Stone))> + '_ {
        self.map.iter().map(|(k, v)| (*k, *v))
    }

    /// One entry per line: `S C -> R L`.
    pub fn parse(text: &str) -> Result<HarshTable> {
        let mut table = HarshTable::empty();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let line = line.replace("->", " ").replace('→', " ");
            let stones: Option<Vec<Stone>> = line
                .split_whitespace()
                .map(|t| {
                    let mut cs = t.chars();
                    match (cs.next(), cs.next()) {
                        (Some(c), None) => Stone::from_letter(c),
                        _ => None,
                    }
                })
                .collect();
            match stones.as_deref() {
                Some(&[a, b, j1, j2]) => table.insert(a, b, (j1, j2)),
                _ => {
                    return Err(Error::Parse {
                        position: lineno + 1,
                        message: format!("expected `A B -> J1 J2`: {raw:?}"),
                    })
                }
            }
        }
        Ok(table)
    }

    pub fn format(&self) -> String {
        self.map
            .iter()
            .map(|((a, b), (j1, j2))| format!("{a} {b} -> {j1} {j2}\n"))
            .collect()
    }
}

/// Cuts both diagrams through the addressed stones and reglues crosswise.
///
/// With `d1 = A s1` and `d2 = B s2` read so the addressed stones come last,
/// the result is `A j1 B j2` where `(j1, j2) = table(s1, s2)`.
pub fn harsh_sum(
    d1: &NecklaceDiagram,
    index1: usize,
    d2: &NecklaceDiagram,
    index2: usize,
    table: &HarshTable,
) -> Result<NecklaceDiagram> {
    require_valid(d1)?;
    require_valid(d2)?;
    check_position(index1, d1)?;
    check_position(index2, d2)?;
    let (j1, j2) = table.get(d1.stone(index1), d2.stone(index2))?;
    let a = d1.rotate(index1 + 1);
    let b = d2.rotate(index2 + 1);
    let mut stones = a.stones()[..d1.len() - 1].to_vec();
    stones.push(j1);
    stones.extend_from_slice(&b.stones()[..d2.len() - 1]);
    stones.push(j2);
    let out = NecklaceDiagram::new(stones)?;
    require_valid(&out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SumKind {
    Mild,
    Harsh,
}

impl fmt::Display for SumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SumKind::Mild => "mild",
            SumKind::Harsh => "harsh",
        })
    }
}

impl FromStr for SumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<SumKind> {
        match s.to_ascii_lowercase().as_str() {
            "mild" => Ok(SumKind::Mild),
            "harsh" => Ok(SumKind::Harsh),
            _ => Err(Error::Config(format!("unknown sum kind {s:?}"))),
        }
    }
}

/// One way of writing a diagram as a sum of two shorter valid diagrams.
/// `left` and `right` are the summands as read for the sum, positions are
/// the cuts (mild) or stone indices (harsh) in those readings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Decomposition {
    pub left_class: String,
    pub right_class: String,
    pub kind: SumKind,
    pub left: String,
    pub right: String,
    pub positions: (usize, usize),
}

/// All decompositions of a valid 12-stone diagram into two valid 6-stone
/// diagrams, sorted by canonical word pair.
pub fn decompose(d: &NecklaceDiagram, table: &HarshTable) -> Result<Vec<Decomposition>> {
    if d.len() != 12 {
        return Err(Error::LengthMismatch {
            expected: 12,
            actual: d.len(),
        });
    }
    require_valid(d)?;
    let mut found = BTreeSet::new();
    let half = |x: &[Stone]| NecklaceDiagram::new(x.to_vec()).expect("non-empty");
    for r in 0..12 {
        let x = d.rotate(r);
        let xs = x.stones();
        let a = half(&xs[..6]);
        if a.is_valid() {
            let b = half(&xs[6..]);
            found.insert(Decomposition {
                left_class: a.canonical(Mode::Symmetry),
                right_class: b.canonical(Mode::Symmetry),
                kind: SumKind::Mild,
                left: a.encode(),
                right: b.encode(),
                positions: (0, 0),
            });
        }
        let (j1, j2) = (xs[5], xs[11]);
        for ((s1, s2), junctions) in table.entries() {
            if junctions != (j1, j2) {
                continue;
            }
            let mut a = xs[..5].to_vec();
            a.push(s1);
            let mut b = xs[6..11].to_vec();
            b.push(s2);
            let (a, b) = (half(&a), half(&b));
            if a.is_valid() && b.is_valid() {
                found.insert(Decomposition {
                    left_class: a.canonical(Mode::Symmetry),
                    right_class: b.canonical(Mode::Symmetry),
                    kind: SumKind::Harsh,
                    left: a.encode(),
                    right: b.encode(),
                    positions: (5, 5),
                });
            }
        }
    }
    Ok(found.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Every catalog rule.
    Both,
    /// Only flip-flops and the two metamorphoses.
    Forward,
}

#[derive(Debug, Clone)]
pub struct ReachOptions {
    pub direction: Direction,
    /// Also close under mild and harsh sums of reached diagrams.
    pub sums: bool,
    /// Longest diagram generated by sums.
    pub max_length: usize,
    pub node_budget: usize,
    pub depth_budget: usize,
    pub harsh_table: HarshTable,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            direction: Direction::Both,
            sums: false,
            max_length: 12,
            node_budget: DEFAULT_NODE_BUDGET,
            depth_budget: DEFAULT_DEPTH_BUDGET,
            harsh_table: HarshTable::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reach {
    /// Symmetry-canonical words reached.
    pub classes: BTreeSet<String>,
    /// True when a budget stopped the search early.
    pub budget_exceeded: bool,
}

/// Closure of the start diagrams under the catalog, and optionally sums,
/// as symmetry classes.
pub fn reachable(starts: &[NecklaceDiagram], catalog: &[RewriteRule], opts: &ReachOptions) -> Result<Reach> {
    for d in starts {
        require_valid(d)?;
    }
    let rules: Vec<&RewriteRule> = catalog
        .iter()
        .filter(|r| opts.direction == Direction::Both || r.tag.is_forward())
        .collect();
    let mut by_len: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    let mut budget_exceeded = false;
    let mut visited = 0usize;

    let mut lengths: BTreeSet<usize> = starts.iter().map(|d| d.len()).collect();
    if opts.sums {
        lengths.extend((6..=opts.max_length).step_by(6));
    }
    for len in lengths {
        let mut seeds: BTreeSet<String> = starts
            .iter()
            .filter(|d| d.len() == len)
            .map(|d| d.canonical(Mode::Symmetry))
            .collect();
        if opts.sums {
            for (&l1, set1) in &by_len {
                let Some(set2) = by_len.get(&(len - l1)) else { continue };
                if l1 > len - l1 {
                    continue;
                }
                for w1 in set1 {
                    for w2 in set2 {
                        seeds.extend(all_sums(w1, w2, &opts.harsh_table)?);
                    }
                }
            }
        }
        let mut seen: HashSet<String> = HashSet::new();
        let mut queue: VecDeque<(String, usize)> = VecDeque::new();
        for s in seeds {
            if seen.insert(s.clone()) {
                queue.push_back((s, 0));
            }
        }
        while let Some((w, depth)) = queue.pop_front() {
            visited += 1;
            if visited > opts.node_budget {
                budget_exceeded = true;
                break;
            }
            if depth >= opts.depth_budget {
                budget_exceeded = true;
                continue;
            }
            let d: NecklaceDiagram = w.parse()?;
            for base in [d.clone(), d.mirror()] {
                for pos in 0..base.len() {
                    for rule in &rules {
                        if !rule.matches_at(&base, pos) {
                            continue;
                        }
                        let next = apply_rewrite(&base, rule, pos)?.canonical(Mode::Symmetry);
                        if seen.insert(next.clone()) {
                            queue.push_back((next, depth + 1));
                        }
                    }
                }
            }
        }
        by_len.entry(len).or_default().extend(seen);
        if budget_exceeded {
            break;
        }
    }
    Ok(Reach {
        classes: by_len.into_values().flatten().collect(),
        budget_exceeded,
    })
}

/// Canonical classes of every mild and harsh sum of the two classes,
/// over both orientations of each summand.
fn all_sums(w1: &str, w2: &str, table: &HarshTable) -> Result<BTreeSet<String>> {
    let d1: NecklaceDiagram = w1.parse()?;
    let d2: NecklaceDiagram = w2.parse()?;
    let mut out = BTreeSet::new();
    for a in [d1.clone(), d1.mirror()] {
        for b in [d2.clone(), d2.mirror()] {
            for i in 0..a.len() {
                for j in 0..b.len() {
                    out.insert(mild_sum(&a, i, &b, j)?.canonical(Mode::Symmetry));
                    match harsh_sum(&a, i, &b, j, table) {
                        Ok(s) => {
                            out.insert(s.canonical(Mode::Symmetry));
                        }
                        Err(Error::TableMiss(..)) | Err(Error::InvalidDiagram(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{Enumerator, Filter};
    use proptest::prelude::*;

    fn d(s: &str) -> NecklaceDiagram {
        s.parse().unwrap()
    }

    fn seg(s: &str) -> Vec<Stone> {
        parse_segment(s).unwrap()
    }

    fn has_rule(cat: &[RewriteRule], lhs: &str, rhs: &str, tag: RuleTag) -> bool {
        cat.iter()
            .any(|r| r.lhs() == seg(lhs) && r.rhs() == seg(rhs) && r.tag() == tag)
    }

    #[test]
    fn catalog_examples() {
        let cat = derive_rewrite_catalog(2).unwrap();
        assert!(has_rule(&cat, "CL", "RC", RuleTag::FlipFlop));
        assert!(has_rule(&cat, "RC", "CL", RuleTag::FlipFlop));
        assert!(has_rule(&cat, "RC", "LR", RuleTag::M1));
        assert!(has_rule(&cat, "SR", "RL", RuleTag::M2));
        assert!(has_rule(&cat, "LR", "RC", RuleTag::M1Inv));
        for r in &cat {
            assert_eq!(r.lhs().len(), r.rhs().len());
            assert!(cat.contains(&r.inverse()));
        }
    }

    #[test]
    fn length_one_catalog_is_empty() {
        assert!(derive_rewrite_catalog(1).unwrap().is_empty());
        assert!(derive_rewrite_catalog(0).is_err());
        assert!(derive_rewrite_catalog(4).is_err());
    }

    #[test]
    fn rule_construction_is_checked() {
        assert!(matches!(
            RewriteRule::new(seg("CL"), seg("LC"), None),
            Err(Error::RuleMonodromy { .. })
        ));
        assert!(matches!(
            RewriteRule::new(seg("RC"), seg("LR"), Some(RuleTag::M2)),
            Err(Error::BadRule { .. })
        ));
        let r = RewriteRule::new(seg("RC"), seg("LR"), None).unwrap();
        assert_eq!((r.delta_circles(), r.delta_squares(), r.tag()), (-1, 0, RuleTag::M1));
    }

    #[test]
    fn catalog_text_round_trip() {
        let cat = derive_rewrite_catalog(2).unwrap();
        assert_eq!(parse_catalog(&format_catalog(&cat)).unwrap(), cat);
        let both = parse_catalog("CL ↔ RC flipflop\n# note\nRC → LR\n").unwrap();
        assert_eq!(both.len(), 3);
        assert!(parse_catalog("CL -> LC").is_err());
        assert!(parse_catalog("CL => RC").is_err());
    }

    #[test]
    fn apply_m1() {
        let cat = derive_rewrite_catalog(2).unwrap();
        let base = d("RCRCRC");
        let rule = find_rule(&cat, RuleTag::M1, &base, 0).unwrap();
        let out = apply_rewrite(&base, rule, 0).unwrap();
        assert_eq!(out.encode(), "LRRCRC");
        assert!(out.is_valid());
        assert_eq!(out.counts().profile(), (2, 0));
        assert_eq!(apply_rewrite(&out, &rule.inverse(), 0).unwrap(), base);
        assert_eq!(apply_rewrite(&base, rule, 1), Err(Error::NoMatch(1)));
    }

    #[test]
    fn apply_wraps_around() {
        let cat = derive_rewrite_catalog(2).unwrap();
        let base = d("CRCRCR");
        let rule = cat.iter().find(|r| r.matches_at(&base, 5)).unwrap();
        let out = apply_rewrite(&base, rule, 5).unwrap();
        assert!(out.is_valid());
        assert_eq!(out.stone(5), rule.rhs()[0]);
        assert_eq!(out.stone(0), rule.rhs()[1]);
        assert_eq!(&out.stones()[1..5], &base.stones()[1..5]);
    }

    #[test]
    fn mild_sum_example() {
        let s = mild_sum(&d("RLRLRL"), 0, &d("RCRCRC"), 0).unwrap();
        assert_eq!(s.len(), 12);
        assert!(s.is_valid());
        assert_eq!(s.counts().profile(), (3, 0));
        assert_eq!(s.counts().arrows(), 9);
        let a = mild_sum(&d("RCRCRC"), 1, &d("RCRCRC"), 0).unwrap();
        let b = mild_sum(&d("RCRCRC"), 3, &d("RCRCRC"), 2).unwrap();
        assert_eq!(a.canonical(Mode::Oriented), b.canonical(Mode::Oriented));
        assert!(matches!(mild_sum(&d("RRRRRR"), 0, &d("RCRCRC"), 0), Err(Error::InvalidDiagram(_))));
    }

    #[test]
    fn harsh_table_default() {
        let t = HarshTable::default();
        use Stone::*;
        assert_eq!(t.get(Square, Circle).unwrap(), (ArrowR, ArrowL));
        assert_eq!(t.get(ArrowR, ArrowL).unwrap(), (Square, Circle));
        assert_eq!(HarshTable::parse(&t.format()).unwrap(), t);
        assert_eq!(HarshTable::empty().get(Square, Circle), Err(Error::TableMiss('S', 'C')));
    }

    #[test]
    fn harsh_sums_are_valid() {
        let t = HarshTable::default();
        let six = Enumerator::default().diagrams(6, Mode::Symmetry, Filter::None).unwrap();
        for a in six.iter().take(8) {
            for b in six.iter().rev().take(8) {
                for i in 0..6 {
                    for j in 0..6 {
                        let s = harsh_sum(a, i, b, j, &t).unwrap();
                        assert!(s.is_valid());
                        assert_eq!(
                            s.invariants().euler,
                            a.invariants().euler + b.invariants().euler
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn decompose_round_trip() {
        let t = HarshTable::default();
        let a = d("CLLSRR");
        let b = d("LSSLSS");
        let s = mild_sum(&a, 2, &b, 4).unwrap();
        let parts = decompose(&s, &t).unwrap();
        assert!(parts.iter().any(|p| p.kind == SumKind::Mild
            && p.left_class == a.canonical(Mode::Symmetry)
            && p.right_class == b.canonical(Mode::Symmetry)));
        let h = harsh_sum(&a, 1, &b, 3, &t).unwrap();
        let parts = decompose(&h, &t).unwrap();
        assert!(parts.iter().any(|p| p.kind == SumKind::Harsh
            && p.left_class == a.canonical(Mode::Symmetry)
            && p.right_class == b.canonical(Mode::Symmetry)));
        let mut sorted = parts.clone();
        sorted.sort();
        assert_eq!(sorted, parts);
    }

    #[test]
    fn indecomposable_witness() {
        let w = d("CCCCLCCCLCCR");
        assert!(w.is_valid());
        assert!(decompose(&w, &HarshTable::default()).unwrap().is_empty());
    }

    #[test]
    fn all_arrow_closure_under_flip_flops() {
        let flips: Vec<RewriteRule> = derive_rewrite_catalog(2)
            .unwrap()
            .into_iter()
            .filter(|r| r.tag() == RuleTag::FlipFlop)
            .collect();
        let r = reachable(&[d("RLRLRL")], &flips, &ReachOptions::default()).unwrap();
        assert_eq!(r.classes.into_iter().collect::<Vec<_>>(), vec![d("RLRLRL").canonical(Mode::Symmetry)]);
        // longer flip-flops link the all-arrow class to another class
        let flips3: Vec<RewriteRule> = derive_rewrite_catalog(3)
            .unwrap()
            .into_iter()
            .filter(|r| r.tag() == RuleTag::FlipFlop)
            .collect();
        let r = reachable(&[d("RLRLRL")], &flips3, &ReachOptions::default()).unwrap();
        assert!(r.classes.contains("LLRLLR"));
    }

    #[test]
    fn six_stone_reachability() {
        let e = Enumerator::default();
        let all: BTreeSet<String> = e
            .canonical_words(6, Mode::Symmetry, Filter::None)
            .unwrap()
            .into_iter()
            .map(|w| crate::enumerate::word::to_string(w, 6))
            .collect();
        let maximal = e.diagrams(6, Mode::Symmetry, Filter::Maximal).unwrap();
        let cat = derive_rewrite_catalog(2).unwrap();
        let r = reachable(&maximal, &cat, &ReachOptions::default()).unwrap();
        assert!(!r.budget_exceeded);
        assert_eq!(r.classes, all);
        let fwd = ReachOptions {
            direction: Direction::Forward,
            ..ReachOptions::default()
        };
        let r = reachable(&maximal, &cat, &fwd).unwrap();
        let missing: Vec<&String> = all.difference(&r.classes).collect();
        assert_eq!(missing, vec!["CLLLLS", "CLLLSR", "CLLSRR"]);
    }

    #[test]
    fn budget_is_reported() {
        let cat = derive_rewrite_catalog(2).unwrap();
        let opts = ReachOptions {
            node_budget: 3,
            ..ReachOptions::default()
        };
        let r = reachable(&[d("CCCLCR")], &cat, &opts).unwrap();
        assert!(r.budget_exceeded);
        assert!(r.classes.len() >= 3);
    }

    fn valid_six() -> Vec<NecklaceDiagram> {
        Enumerator::default().diagrams(6, Mode::Oriented, Filter::None).unwrap()
    }

    proptest! {
        #[test]
        fn rewrites_preserve_validity(i in 0usize..42, r in 0usize..1000, rot in 0usize..6) {
            let six = valid_six();
            let base = six[i].rotate(rot);
            let cat = derive_rewrite_catalog(3).unwrap();
            let b = &base;
            let applicable: Vec<(usize, &RewriteRule)> = (0..6)
                .flat_map(|p| cat.iter().filter(move |ru| ru.matches_at(b, p)).map(move |ru| (p, ru)))
                .collect();
            prop_assume!(!applicable.is_empty());
            let (p, rule) = applicable[r % applicable.len()];
            let out = apply_rewrite(&base, rule, p).unwrap();
            prop_assert!(out.is_valid());
            let (c0, c1) = (base.counts(), out.counts());
            prop_assert_eq!(c1.circles as i64 - c0.circles as i64, rule.delta_circles());
            prop_assert_eq!(c1.squares as i64 - c0.squares as i64, rule.delta_squares());
            let dual = apply_rewrite(&base.dual(), &rule.dual(), p).unwrap();
            prop_assert_eq!(dual, out.dual());
        }

        #[test]
        fn mild_sum_counts_add(i in 0usize..42, j in 0usize..42, c1 in 0usize..6, c2 in 0usize..6) {
            let six = valid_six();
            let s = mild_sum(&six[i], c1, &six[j], c2).unwrap();
            prop_assert!(s.is_valid());
            let (a, b, c) = (six[i].counts(), six[j].counts(), s.counts());
            prop_assert_eq!(c.circles, a.circles + b.circles);
            prop_assert_eq!(c.squares, a.squares + b.squares);
            prop_assert_eq!(c.arrows_r, a.arrows_r + b.arrows_r);
            prop_assert_eq!(c.arrows_l, a.arrows_l + b.arrows_l);
            prop_assert_eq!(s.invariants().euler, six[i].invariants().euler + six[j].invariants().euler);
        }
    }
}
