//! Alternating subset-sum: `Q_1 A'_1 ⊆ A_1, |A'_1| = k_1, …, Q_ℓ A'_ℓ ⊆ A_ℓ,
//! |A'_ℓ| = k_ℓ : Σ A'_1 + … + Σ A'_ℓ (= | ≠) t`, with alternating quantifiers
//! starting from a chosen one.
//!
//! The solver searches the game tree exactly. Sets are held sorted ascending
//! and every level enumerates its subsets in lexicographic index order, so
//! the reported line of play is canonical.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use thiserror::Error;

use crate::scalar::{checked_sum, Natural};
use crate::Quantifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Equal,
    NotEqual,
}

impl Comparison {
    pub fn holds<T: PartialEq>(self, sum: &T, target: &T) -> bool {
        match self {
            Comparison::Equal => sum == target,
            Comparison::NotEqual => sum != target,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Comparison::Equal => Comparison::NotEqual,
            Comparison::NotEqual => Comparison::Equal,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Equal => "equal",
            Comparison::NotEqual => "notequal",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AltssError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("an instance needs at least one set")]
    NoSets,
    #[error("{sets} sets but {sizes} choose-sizes")]
    ShapeMismatch { sets: usize, sizes: usize },
    #[error("set {set} contains {value} more than once")]
    Duplicate { set: usize, value: String },
    #[error("element sum overflows the scalar type")]
    Overflow,
    #[error("selection: {0}")]
    Selection(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AltssInstance<T> {
    sets: Vec<Vec<T>>,
    choose: Vec<usize>,
    target: T,
    first: Quantifier,
    comparison: Comparison,
}

/// One chosen subset per set, in set order.
pub type Selection<T> = Vec<Vec<T>>;

impl<T: Natural> AltssInstance<T> {
    pub fn new(
        sets: Vec<Vec<T>>,
        choose: Vec<usize>,
        target: T,
        first: Quantifier,
        comparison: Comparison,
    ) -> Result<Self, AltssError> {
        if sets.is_empty() {
            return Err(AltssError::NoSets);
        }
        if sets.len() != choose.len() {
            return Err(AltssError::ShapeMismatch {
                sets: sets.len(),
                sizes: choose.len(),
            });
        }
        let mut sorted = Vec::with_capacity(sets.len());
        for (i, mut set) in sets.into_iter().enumerate() {
            set.sort();
            if let Some(w) = set.windows(2).find(|w| w[0] == w[1]) {
                return Err(AltssError::Duplicate {
                    set: i + 1,
                    value: w[0].to_string(),
                });
            }
            sorted.push(set);
        }
        checked_sum(sorted.iter().flatten()).ok_or(AltssError::Overflow)?;
        Ok(AltssInstance {
            sets: sorted,
            choose,
            target,
            first,
            comparison,
        })
    }

    pub fn levels(&self) -> usize {
        self.sets.len()
    }

    /// Sets, each sorted ascending.
    pub fn sets(&self) -> &[Vec<T>] {
        &self.sets
    }

    pub fn choose(&self) -> &[usize] {
        &self.choose
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    pub fn first_quantifier(&self) -> Quantifier {
        self.first
    }

    pub fn comparison(&self) -> Comparison {
        self.comparison
    }

    pub fn quantifier(&self, level: usize) -> Quantifier {
        if level.is_multiple_of(2) {
            self.first
        } else {
            self.first.flip()
        }
    }

    /// Same sets, sizes and target under another quantifier/comparison flavour.
    pub fn with_flavour(&self, first: Quantifier, comparison: Comparison) -> Self {
        AltssInstance {
            first,
            comparison,
            ..self.clone()
        }
    }

    pub fn with_target(&self, target: T) -> Self {
        AltssInstance {
            target,
            ..self.clone()
        }
    }

    /// Σ k_i.
    pub fn parameter(&self) -> usize {
        self.choose.iter().sum()
    }

    /// Validate the certificate form of the condition: every chosen subset is
    /// a subset of its set with the right size, and the total compares to the
    /// target as required.
    pub fn check_selection(&self, selection: &[Vec<T>]) -> Result<(), AltssError> {
        if selection.len() != self.levels() {
            return Err(AltssError::Selection(format!(
                "{} subsets for {} sets",
                selection.len(),
                self.levels()
            )));
        }
        for (i, chosen) in selection.iter().enumerate() {
            if chosen.len() != self.choose[i] {
                return Err(AltssError::Selection(format!(
                    "set {} needs {} elements, got {}",
                    i + 1,
                    self.choose[i],
                    chosen.len()
                )));
            }
            let mut seen: Vec<&T> = chosen.iter().collect();
            seen.sort();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(AltssError::Selection(format!("set {} repeats an element", i + 1)));
            }
            if let Some(x) = chosen.iter().find(|x| self.sets[i].binary_search(x).is_err()) {
                return Err(AltssError::Selection(format!("{x} is not in set {}", i + 1)));
            }
        }
        let sum = checked_sum(selection.iter().flatten()).ok_or(AltssError::Overflow)?;
        if self.comparison.holds(&sum, &self.target) {
            Ok(())
        } else {
            Err(AltssError::Selection(format!(
                "sum {sum} is not {} to target {}",
                self.comparison, self.target
            )))
        }
    }

    pub fn accepts(&self, selection: &[Vec<T>]) -> bool {
        self.check_selection(selection).is_ok()
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution<T> {
    pub verdict: bool,
    /// Chosen subset per level along the principal line of play.
    pub line: Vec<Vec<T>>,
    /// Level at which the line stopped because its owner had no legal move.
    pub blocked: Option<usize>,
}

pub fn solve<T: Natural>(instance: &AltssInstance<T>) -> Solution<T> {
    solve_from(instance, &[]).expect("empty prefix is always legal")
}

/// Solve the residual game after the first `prefix.len()` levels were played
/// with the given subsets.
pub fn solve_from<T: Natural>(
    instance: &AltssInstance<T>,
    prefix: &[Vec<T>],
) -> Result<Solution<T>, AltssError> {
    if prefix.len() > instance.levels() {
        return Err(AltssError::Selection("prefix longer than the game".into()));
    }
    let mut partial = T::zero();
    for (i, chosen) in prefix.iter().enumerate() {
        let mut idx: Vec<usize> = chosen
            .iter()
            .map(|x| {
                instance.sets[i]
                    .binary_search(x)
                    .map_err(|_| AltssError::Selection(format!("{x} is not in set {}", i + 1)))
            })
            .collect::<Result<_, _>>()?;
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != instance.choose[i] || chosen.len() != instance.choose[i] {
            return Err(AltssError::Selection(format!(
                "set {} needs {} distinct elements",
                i + 1,
                instance.choose[i]
            )));
        }
        for x in chosen {
            partial = partial + x.clone();
        }
    }
    let mut game = Game::new(instance);
    let start = prefix.len();
    let verdict = game.value(start, &partial);
    let mut line: Vec<Vec<T>> = prefix.to_vec();
    let blocked = game.line(start, partial, &mut line);
    Ok(Solution {
        verdict,
        line,
        blocked,
    })
}

struct Game<'a, T: Natural> {
    inst: &'a AltssInstance<T>,
    /// Σ over levels ≥ i of the k smallest / largest elements, or `None`
    /// when some level ≥ i has no legal move.
    suffix_min: Vec<Option<T>>,
    suffix_max: Vec<Option<T>>,
    leaf: SubsetSearch<'a, T>,
}

impl<'a, T: Natural> Game<'a, T> {
    fn new(inst: &'a AltssInstance<T>) -> Self {
        let levels = inst.levels();
        let mut suffix_min = vec![Some(T::zero()); levels + 1];
        let mut suffix_max = vec![Some(T::zero()); levels + 1];
        for i in (0..levels).rev() {
            let set = &inst.sets[i];
            let k = inst.choose[i];
            let (lo, hi) = if k <= set.len() {
                (
                    Some(sum_of(&set[..k])),
                    Some(sum_of(&set[set.len() - k..])),
                )
            } else {
                (None, None)
            };
            suffix_min[i] = lo.zip(suffix_min[i + 1].clone()).map(|(a, b)| a + b);
            suffix_max[i] = hi.zip(suffix_max[i + 1].clone()).map(|(a, b)| a + b);
        }
        Game {
            inst,
            suffix_min,
            suffix_max,
            leaf: SubsetSearch::new(&inst.sets[levels - 1]),
        }
    }

    fn last(&self) -> usize {
        self.inst.levels() - 1
    }

    fn legal(&self, level: usize) -> bool {
        self.inst.choose[level] <= self.inst.sets[level].len()
    }

    /// Value of the subgame at `level` when it does not depend on the moves.
    fn determined(&self, level: usize, partial: &T) -> Option<bool> {
        if let Some(b) = (level..self.inst.levels()).find(|&b| !self.legal(b)) {
            return Some(self.inst.quantifier(b) == Quantifier::Forall);
        }
        let lo = partial.clone() + self.suffix_min[level].clone()?;
        let hi = partial.clone() + self.suffix_max[level].clone()?;
        let t = &self.inst.target;
        if lo == hi {
            return Some(self.inst.comparison.holds(&lo, t));
        }
        if *t < lo || *t > hi {
            return Some(self.inst.comparison == Comparison::NotEqual);
        }
        None
    }

    fn value(&mut self, level: usize, partial: &T) -> bool {
        if let Some(v) = self.determined(level, partial) {
            return v;
        }
        if level == self.last() {
            return self.leaf_move(partial, true).0;
        }
        let want = self.inst.quantifier(level) == Quantifier::Exists;
        let n = self.inst.sets[level].len();
        let k = self.inst.choose[level];
        for combo in (0..n).combinations(k) {
            let s = self.child_sum(level, partial, &combo);
            if self.value(level + 1, &s) == want {
                return want;
            }
        }
        !want
    }

    fn child_sum(&self, level: usize, partial: &T, combo: &[usize]) -> T {
        combo
            .iter()
            .fold(partial.clone(), |acc, &i| acc + self.inst.sets[level][i].clone())
    }

    /// Value of the last level and the owner's canonical move: the
    /// lexicographically least winning subset, if the owner wins.
    fn leaf_move(&mut self, partial: &T, value_only: bool) -> (bool, Option<Vec<usize>>) {
        let level = self.last();
        let r = self.inst.choose[level];
        let residual = if *partial <= self.inst.target {
            Some(self.inst.target.clone() - partial.clone())
        } else {
            None
        };
        // The owner wins iff some subset makes the condition hold (∃) or fail (∀).
        let owner = self.inst.quantifier(level);
        let seek_equal = match (owner, self.inst.comparison) {
            (Quantifier::Exists, Comparison::Equal) | (Quantifier::Forall, Comparison::NotEqual) => true,
            (Quantifier::Exists, Comparison::NotEqual) | (Quantifier::Forall, Comparison::Equal) => false,
        };
        let found = if seek_equal {
            match residual {
                Some(res) if value_only => self.leaf.feasible(0, self.leaf.len(), r, &res).then(Vec::new),
                Some(res) => self.leaf.lex_least(r, &res),
                None => None,
            }
        } else {
            self.leaf.lex_least_not(r, residual.as_ref())
        };
        let owner_wins = found.is_some();
        let verdict = if owner == Quantifier::Exists {
            owner_wins
        } else {
            !owner_wins
        };
        (verdict, found)
    }

    fn line(&mut self, level: usize, partial: T, out: &mut Vec<Vec<T>>) -> Option<usize> {
        if level == self.inst.levels() {
            return None;
        }
        if !self.legal(level) {
            return Some(level);
        }
        let k = self.inst.choose[level];
        let n = self.inst.sets[level].len();
        let first: Vec<usize> = (0..k).collect();
        let combo = if level == self.last() && self.determined(level, &partial).is_none() {
            self.leaf_move(&partial, false).1.unwrap_or(first)
        } else if level == self.last() {
            first
        } else {
            let want = self.inst.quantifier(level) == Quantifier::Exists;
            let mut pick = first;
            if self.value(level, &partial) == want {
                for combo in (0..n).combinations(k) {
                    let s = self.child_sum(level, &partial, &combo);
                    if self.value(level + 1, &s) == want {
                        pick = combo;
                        break;
                    }
                }
            }
            pick
        };
        let s = self.child_sum(level, &partial, &combo);
        out.push(combo.iter().map(|&i| self.inst.sets[level][i].clone()).collect());
        self.line(level + 1, s, out)
    }
}

fn sum_of<T: Natural>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

/// Fixed-size subset-sum queries over one ascending set.
struct SubsetSearch<'a, T: Natural> {
    elems: &'a [T],
    prefix: Vec<T>,
    memo: HashMap<(usize, usize, usize, T), bool>,
}

impl<'a, T: Natural> SubsetSearch<'a, T> {
    fn new(elems: &'a [T]) -> Self {
        let mut prefix = Vec::with_capacity(elems.len() + 1);
        prefix.push(T::zero());
        for e in elems {
            let last = prefix.last().unwrap().clone();
            prefix.push(last + e.clone());
        }
        SubsetSearch {
            elems,
            prefix,
            memo: HashMap::new(),
        }
    }

    fn len(&self) -> usize {
        self.elems.len()
    }

    fn range_sum(&self, from: usize, to: usize) -> T {
        self.prefix[to].clone() - self.prefix[from].clone()
    }

    /// Is there an `r`-subset of `elems[lo..hi]` summing to `target`?
    ///
    /// Branches on the largest chosen element first and prunes with the
    /// interval of sums reachable by the remaining picks.
    fn feasible(&mut self, lo: usize, hi: usize, r: usize, target: &T) -> bool {
        if r == 0 {
            return target.is_zero();
        }
        if hi < lo + r {
            return false;
        }
        let min = self.range_sum(lo, lo + r);
        let max = self.range_sum(hi - r, hi);
        if *target < min || *target > max {
            return false;
        }
        if *target == min || *target == max {
            return true;
        }
        let key = (lo, hi, r, target.clone());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let min_rest = self.range_sum(lo, lo + r - 1);
        // Largest candidate not exceeding the target.
        let top = lo + self.elems[lo..hi].partition_point(|e| e <= target);
        let mut found = false;
        for j in (lo + r - 1..top).rev() {
            let rest = target.clone() - self.elems[j].clone();
            if rest > self.range_sum(j + 1 - r, j) {
                break;
            }
            if rest < min_rest {
                continue;
            }
            if self.feasible(lo, j, r - 1, &rest) {
                found = true;
                break;
            }
        }
        self.memo.insert(key, found);
        found
    }

    /// Lexicographically least `r`-subset (as indices) summing to `target`.
    fn lex_least(&mut self, r: usize, target: &T) -> Option<Vec<usize>> {
        let n = self.len();
        if !self.feasible(0, n, r, target) {
            return None;
        }
        let mut picks = Vec::with_capacity(r);
        let mut rest = target.clone();
        let mut lo = 0;
        for p in 0..r {
            let left = r - p - 1;
            let i = (lo..n - left)
                .find(|&i| {
                    self.elems[i] <= rest && {
                        let after = rest.clone() - self.elems[i].clone();
                        self.feasible(i + 1, n, left, &after)
                    }
                })
                .expect("feasible prefix extends");
            rest = rest - self.elems[i].clone();
            picks.push(i);
            lo = i + 1;
        }
        Some(picks)
    }

    /// Lexicographically least `r`-subset whose sum differs from `target`
    /// (`None` target: every sum differs).
    fn lex_least_not(&self, r: usize, target: Option<&T>) -> Option<Vec<usize>> {
        (0..self.len()).combinations(r).find(|combo| {
            let s = combo
                .iter()
                .fold(T::zero(), |acc, &i| acc + self.elems[i].clone());
            target != Some(&s)
        })
    }
}

impl<T: Natural> fmt::Display for AltssInstance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "altss {}", self.levels())?;
        writeln!(f, "quantifier {}", self.first)?;
        writeln!(f, "compare {}", self.comparison)?;
        writeln!(f, "target {}", self.target)?;
        for (i, (set, k)) in self.sets.iter().zip(&self.choose).enumerate() {
            write!(f, "set {} choose {}:", i + 1, k)?;
            for x in set {
                write!(f, " {x}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn serialize_instance<T: Natural>(instance: &AltssInstance<T>) -> String {
    instance.to_string()
}

pub fn parse_instance<T: Natural>(text: &str) -> Result<AltssInstance<T>, AltssError> {
    let err = |line: usize, message: String| AltssError::Parse { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut header = |key: &str| -> Result<(usize, String), AltssError> {
        let (no, line) = lines
            .next()
            .ok_or_else(|| err(0, format!("missing `{key}` line")))?;
        match line.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((no, v.trim().to_string())),
            _ => Err(err(no, format!("expected `{key} …`, found `{line}`"))),
        }
    };
    let (no, levels) = header("altss")?;
    let levels: usize = levels
        .parse()
        .map_err(|_| err(no, format!("bad level count `{levels}`")))?;
    if levels == 0 {
        return Err(err(no, "level count must be at least 1".into()));
    }
    let (no, q) = header("quantifier")?;
    let first = Quantifier::from_str(&q).map_err(|m| err(no, m))?;
    let (no, c) = header("compare")?;
    let comparison = match c.as_str() {
        "equal" => Comparison::Equal,
        "notequal" => Comparison::NotEqual,
        other => return Err(err(no, format!("unknown comparison `{other}`"))),
    };
    let (no, t) = header("target")?;
    let target: T = t.parse().map_err(|_| err(no, format!("bad target `{t}`")))?;

    let mut sets = Vec::with_capacity(levels);
    let mut choose = Vec::with_capacity(levels);
    for expected in 1..=levels {
        let (no, rest) = header("set")?;
        let (head, body) = rest
            .split_once(':')
            .ok_or_else(|| err(no, "expected `set i choose k: …`".into()))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        let (idx, k) = match head.as_slice() {
            [i, "choose", k] => (i.parse::<usize>().ok(), k.parse::<usize>().ok()),
            _ => (None, None),
        };
        let (idx, k) = idx
            .zip(k)
            .ok_or_else(|| err(no, "expected `set i choose k: …`".into()))?;
        if idx != expected {
            return Err(err(no, format!("expected set {expected}, found set {idx}")));
        }
        let mut elems: Vec<T> = Vec::new();
        for tok in body.split_whitespace() {
            let v: T = tok.parse().map_err(|_| err(no, format!("bad number `{tok}`")))?;
            if elems.contains(&v) {
                return Err(AltssError::Duplicate {
                    set: idx,
                    value: v.to_string(),
                });
            }
            if elems.last().is_some_and(|last| *last > v) {
                return Err(err(no, "elements must be strictly increasing".into()));
            }
            elems.push(v);
        }
        sets.push(elems);
        choose.push(k);
    }
    if let Some((no, line)) = lines.next() {
        return Err(err(no, format!("unexpected trailing line `{line}`")));
    }
    AltssInstance::new(sets, choose, target, first, comparison)
}
