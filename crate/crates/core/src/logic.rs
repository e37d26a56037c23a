//! Finite binary relational structures, alternating prefix formulas and the
//! brute-force model checker used as the reference oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::Quantifier;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("relation `{0}` is not part of the structure")]
    MissingRelation(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> LogicError {
    LogicError::Parse {
        line,
        message: message.into(),
    }
}

/// A finite domain with named binary relations. Elements are referred to by
/// their 0-based position; the index bijection is `I(e) = position + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalStructure {
    elements: Vec<String>,
    relations: BTreeMap<String, BTreeSet<(usize, usize)>>,
}

impl RelationalStructure {
    pub fn new(elements: Vec<String>) -> Result<Self, LogicError> {
        if elements.is_empty() {
            return Err(parse_err(0, "universe must be non-empty"));
        }
        let mut seen = BTreeSet::new();
        for e in &elements {
            if !seen.insert(e.as_str()) {
                return Err(parse_err(0, format!("element `{e}` declared twice")));
            }
        }
        Ok(RelationalStructure {
            elements,
            relations: BTreeMap::new(),
        })
    }

    /// Add (or extend) a relation from index pairs.
    pub fn add_relation(
        &mut self,
        name: &str,
        tuples: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(), LogicError> {
        let n = self.elements.len();
        let entry = self.relations.entry(name.to_string()).or_default();
        for (a, b) in tuples {
            if a >= n || b >= n {
                return Err(parse_err(0, format!("tuple ({a},{b}) outside the universe")));
            }
            entry.insert((a, b));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    /// `I(e)`, 1-based.
    pub fn index_of(&self, element: usize) -> u64 {
        element as u64 + 1
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<(usize, usize)>> {
        self.relations.get(name)
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(|k| k.as_str())
    }

    pub fn holds(&self, name: &str, a: usize, b: usize) -> Result<bool, LogicError> {
        self.relations
            .get(name)
            .map(|r| r.contains(&(a, b)))
            .ok_or_else(|| LogicError::MissingRelation(name.to_string()))
    }
}

impl fmt::Display for RelationalStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "universe {}", self.elements.join(" "))?;
        for (name, tuples) in &self.relations {
            write!(f, "relation {name} 2:")?;
            for &(a, b) in tuples {
                write!(f, " ({},{})", self.elements[a], self.elements[b])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub fn parse_structure(text: &str) -> Result<RelationalStructure, LogicError> {
    let mut structure: Option<RelationalStructure> = None;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match head {
            "universe" => {
                if structure.is_some() {
                    return Err(parse_err(line_no, "universe declared twice"));
                }
                let elements: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                structure = Some(RelationalStructure::new(elements).map_err(|e| match e {
                    LogicError::Parse { message, .. } => parse_err(line_no, message),
                    other => other,
                })?);
            }
            "relation" => {
                let s = structure
                    .as_mut()
                    .ok_or_else(|| parse_err(line_no, "relation before universe"))?;
                let (decl, tuples) = rest
                    .split_once(':')
                    .ok_or_else(|| parse_err(line_no, "expected `relation NAME 2: …`"))?;
                let mut decl = decl.split_whitespace();
                let name = decl
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing relation name"))?;
                let arity = decl
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing relation arity"))?;
                if decl.next().is_some() {
                    return Err(parse_err(line_no, "unexpected token in relation header"));
                }
                if arity != "2" {
                    return Err(parse_err(
                        line_no,
                        format!("relation `{name}` has arity {arity}; only binary relations are supported"),
                    ));
                }
                let pairs = parse_tuples(s, tuples, line_no)?;
                s.add_relation(name, pairs)
                    .map_err(|e| parse_err(line_no, e.to_string()))?;
            }
            other => return Err(parse_err(line_no, format!("unknown directive `{other}`"))),
        }
    }
    structure.ok_or_else(|| parse_err(0, "missing `universe` line"))
}

fn parse_tuples(
    s: &RelationalStructure,
    text: &str,
    line_no: usize,
) -> Result<Vec<(usize, usize)>, LogicError> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| parse_err(line_no, format!("expected `(` at `{rest}`")))?;
        let (inner, tail) = body
            .split_once(')')
            .ok_or_else(|| parse_err(line_no, "unterminated tuple"))?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(parse_err(
                line_no,
                format!("tuple ({inner}) has {} components, expected 2", parts.len()),
            ));
        }
        let lookup = |name: &str| {
            s.element_index(name)
                .ok_or_else(|| parse_err(line_no, format!("unknown element `{name}`")))
        };
        out.push((lookup(parts[0])?, lookup(parts[1])?));
        rest = tail.trim_start();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "and",
            Connective::Or => "or",
        })
    }
}

/// `R(x_left, x_right)` or its negation; variables are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: String,
    pub left: usize,
    pub right: usize,
    pub positive: bool,
}

impl Atom {
    pub fn new(relation: &str, left: usize, right: usize, positive: bool) -> Self {
        Atom {
            relation: relation.to_string(),
            left,
            right,
            positive,
        }
    }

    /// Truth of the literal for `x_left = a`, `x_right = b`.
    pub fn eval(&self, structure: &RelationalStructure, a: usize, b: usize) -> Result<bool, LogicError> {
        Ok(structure.holds(&self.relation, a, b)? == self.positive)
    }

    pub fn negated(&self) -> Self {
        Atom {
            positive: !self.positive,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixFormula {
    pub blocks: Vec<(Quantifier, usize)>,
    pub connective: Connective,
    pub atoms: Vec<Atom>,
}

impl PrefixFormula {
    pub fn var_count(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.1).collect()
    }

    /// Quantifier of each variable, in order.
    pub fn var_quantifiers(&self) -> Vec<Quantifier> {
        self.blocks
            .iter()
            .flat_map(|&(q, k)| std::iter::repeat_n(q, k))
            .collect()
    }

    /// Symbol count of the expanded prenex rendering: two per quantified
    /// variable, three per atom plus one per negation, and `n - 1` connectives.
    pub fn length(&self) -> usize {
        let negations = self.atoms.iter().filter(|a| !a.positive).count();
        2 * self.var_count() + 3 * self.atoms.len() + negations + self.atoms.len().saturating_sub(1)
    }

    /// The dual formula: quantifiers flipped, connective swapped, literals negated.
    pub fn negation(&self) -> PrefixFormula {
        PrefixFormula {
            blocks: self.blocks.iter().map(|&(q, k)| (q.flip(), k)).collect(),
            connective: match self.connective {
                Connective::And => Connective::Or,
                Connective::Or => Connective::And,
            },
            atoms: self.atoms.iter().map(Atom::negated).collect(),
        }
    }

    /// Expanded rendering, e.g. `exists x1 forall x2 . E(x1,x2) and not E(x2,x1)`.
    pub fn expanded(&self) -> String {
        let mut out = Vec::new();
        for (i, q) in self.var_quantifiers().into_iter().enumerate() {
            out.push(format!("{q} x{}", i + 1));
        }
        let matrix: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                format!(
                    "{}{}(x{},x{})",
                    if a.positive { "" } else { "not " },
                    a.relation,
                    a.left,
                    a.right
                )
            })
            .collect();
        let matrix = if matrix.is_empty() {
            match self.connective {
                Connective::And => "true".to_string(),
                Connective::Or => "false".to_string(),
            }
        } else {
            matrix.join(&format!(" {} ", self.connective))
        };
        format!("{} . {}", out.join(" "), matrix)
    }
}

impl fmt::Display for PrefixFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prefix")?;
        for (q, k) in &self.blocks {
            write!(f, " {q} {k}")?;
        }
        writeln!(f)?;
        writeln!(f, "matrix {}", self.connective)?;
        for a in &self.atoms {
            writeln!(
                f,
                "{} {} x{} x{}",
                if a.positive { "atom" } else { "natom" },
                a.relation,
                a.left,
                a.right
            )?;
        }
        Ok(())
    }
}

pub fn parse_formula(text: &str) -> Result<PrefixFormula, LogicError> {
    let mut blocks: Option<Vec<(Quantifier, usize)>> = None;
    let mut connective: Option<Connective> = None;
    let mut atoms = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "prefix" => {
                if blocks.is_some() {
                    return Err(parse_err(line_no, "prefix declared twice"));
                }
                let rest = &tokens[1..];
                if rest.is_empty() || !rest.len().is_multiple_of(2) {
                    return Err(parse_err(line_no, "expected `prefix (exists|forall) N …`"));
                }
                let mut parsed = Vec::new();
                for pair in rest.chunks(2) {
                    let q: Quantifier = pair[0].parse().map_err(|e: String| parse_err(line_no, e))?;
                    let k: usize = pair[1]
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad block size `{}`", pair[1])))?;
                    parsed.push((q, k));
                }
                blocks = Some(parsed);
            }
            "matrix" => {
                if blocks.is_none() {
                    return Err(parse_err(line_no, "matrix before prefix"));
                }
                if connective.is_some() {
                    return Err(parse_err(line_no, "matrix declared twice"));
                }
                connective = Some(match tokens.get(1..) {
                    Some(["and"]) => Connective::And,
                    Some(["or"]) => Connective::Or,
                    _ => return Err(parse_err(line_no, "expected `matrix and|or`")),
                });
            }
            kind @ ("atom" | "natom") => {
                if connective.is_none() {
                    return Err(parse_err(line_no, "atom before matrix"));
                }
                if tokens.len() != 4 {
                    return Err(parse_err(line_no, format!("expected `{kind} NAME xi xj`")));
                }
                let q: usize = blocks.as_ref().map(|b| b.iter().map(|x| x.1).sum()).unwrap_or(0);
                let var = |tok: &str| -> Result<usize, LogicError> {
                    let idx: usize = tok
                        .strip_prefix('x')
                        .and_then(|d| d.parse().ok())
                        .ok_or_else(|| parse_err(line_no, format!("bad variable `{tok}`")))?;
                    if idx == 0 || idx > q {
                        return Err(parse_err(
                            line_no,
                            format!("undeclared variable `{tok}` (prefix binds x1..x{q})"),
                        ));
                    }
                    Ok(idx)
                };
                atoms.push(Atom::new(tokens[1], var(tokens[2])?, var(tokens[3])?, kind == "atom"));
            }
            other => return Err(parse_err(line_no, format!("unknown directive `{other}`"))),
        }
    }
    Ok(PrefixFormula {
        blocks: blocks.ok_or_else(|| parse_err(0, "missing `prefix` line"))?,
        connective: connective.ok_or_else(|| parse_err(0, "missing `matrix` line"))?,
        atoms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarityMode {
    Positive,
    Negated,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BlockCount { expected: usize, found: usize },
    NotExistentialFirst,
    NotAlternating { block: usize },
    Connective { expected: Connective, found: Connective },
    Polarity { atom: usize },
    VariableOutOfRange { atom: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BlockCount { expected, found } => {
                write!(f, "block count: expected {expected}, found {found}")
            }
            Violation::NotExistentialFirst => write!(f, "first block is not existential"),
            Violation::NotAlternating { block } => {
                write!(f, "block {block} repeats the quantifier of the previous block")
            }
            Violation::Connective { expected, found } => write!(
                f,
                "matrix uses `{found}` but the block-count parity requires `{expected}`"
            ),
            Violation::Polarity { atom } => write!(f, "atom {atom} has the wrong polarity"),
            Violation::VariableOutOfRange { atom } => write!(f, "atom {atom} uses an unbound variable"),
        }
    }
}

/// Check that `formula` is a simple formula with `level` alternating blocks,
/// existential first, `and` for odd and `or` for even levels.
pub fn validate_simple(formula: &PrefixFormula, level: usize, mode: PolarityMode) -> Vec<Violation> {
    let mut out = Vec::new();
    if formula.blocks.len() != level {
        out.push(Violation::BlockCount {
            expected: level,
            found: formula.blocks.len(),
        });
    }
    if formula.blocks.first().map(|b| b.0) != Some(Quantifier::Exists) {
        out.push(Violation::NotExistentialFirst);
    }
    for (i, w) in formula.blocks.windows(2).enumerate() {
        if w[0].0 == w[1].0 {
            out.push(Violation::NotAlternating { block: i + 2 });
        }
    }
    let expected = if level % 2 == 1 {
        Connective::And
    } else {
        Connective::Or
    };
    if formula.connective != expected {
        out.push(Violation::Connective {
            expected,
            found: formula.connective,
        });
    }
    let q = formula.var_count();
    for (i, a) in formula.atoms.iter().enumerate() {
        let bad = match mode {
            PolarityMode::Positive => !a.positive,
            PolarityMode::Negated => a.positive,
            PolarityMode::Any => false,
        };
        if bad {
            out.push(Violation::Polarity { atom: i + 1 });
        }
        if a.left == 0 || a.right == 0 || a.left > q || a.right > q {
            out.push(Violation::VariableOutOfRange { atom: i + 1 });
        }
    }
    out
}

/// Total assignment: `values[j - 1]` is the element bound to `x_j`.
pub type Assignment = Vec<usize>;

pub fn matrix_holds(
    structure: &RelationalStructure,
    assignment: &[usize],
    formula: &PrefixFormula,
) -> Result<bool, LogicError> {
    let mut lits = formula
        .atoms
        .iter()
        .map(|a| a.eval(structure, assignment[a.left - 1], assignment[a.right - 1]));
    match formula.connective {
        Connective::And => {
            for l in lits.by_ref() {
                if !l? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Connective::Or => {
            for l in lits {
                if l? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McVerdict {
    pub holds: bool,
    /// Element chosen for each variable along the principal line of play.
    pub variation: Assignment,
}

/// Decide `structure ⊨ formula` by exhausting the quantifier game.
///
/// The variation follows, at every variable, the first move that wins for the
/// quantifier owning it, or the first move when every move loses.
pub fn model_check(structure: &RelationalStructure, formula: &PrefixFormula) -> Result<McVerdict, LogicError> {
    for a in &formula.atoms {
        if structure.relation(&a.relation).is_none() {
            return Err(LogicError::MissingRelation(a.relation.clone()));
        }
    }
    let owners = formula.var_quantifiers();
    let mut checker = Checker {
        structure,
        formula,
        owners: &owners,
        memo: HashMap::new(),
    };
    let mut assignment = Vec::with_capacity(owners.len());
    let holds = checker.value(&mut assignment)?;
    // Rebuild the line of play from the memoised values.
    let mut line = Vec::with_capacity(owners.len());
    for &owner in &owners {
        let want = owner == Quantifier::Exists;
        let mut chosen = 0;
        for e in 0..structure.size() {
            line.push(e);
            let v = checker.value(&mut line)?;
            line.pop();
            if v == want {
                chosen = e;
                break;
            }
        }
        line.push(chosen);
    }
    Ok(McVerdict {
        holds,
        variation: line,
    })
}

struct Checker<'a> {
    structure: &'a RelationalStructure,
    formula: &'a PrefixFormula,
    owners: &'a [Quantifier],
    memo: HashMap<Assignment, bool>,
}

impl Checker<'_> {
    fn value(&mut self, prefix: &mut Assignment) -> Result<bool, LogicError> {
        if prefix.len() == self.owners.len() {
            return matrix_holds(self.structure, prefix, self.formula);
        }
        if let Some(&v) = self.memo.get(prefix) {
            return Ok(v);
        }
        let exists = self.owners[prefix.len()] == Quantifier::Exists;
        let mut result = !exists;
        for e in 0..self.structure.size() {
            prefix.push(e);
            let v = self.value(prefix)?;
            prefix.pop();
            if v == exists {
                result = exists;
                break;
            }
        }
        self.memo.insert(prefix.clone(), result);
        Ok(result)
    }
}
