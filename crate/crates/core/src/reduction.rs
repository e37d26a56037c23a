//! Compiler from model checking of simple prefix formulas to alternating
//! subset-sum.
//!
//! Every gadget is a base-`D` numeral laid out as `WAIT ‖ L_1…L_n ‖ B_1 … B_q`
//! (see [`crate::numerals`]). A play of the subset-sum game picks one VAR
//! number per variable; the last player completes the sum with ATOM, NORM,
//! FIX and WAIT numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::altss::{AltssError, AltssInstance, Comparison};
use crate::logic::{validate_simple, LogicError, PolarityMode, PrefixFormula, RelationalStructure};
use crate::numerals::{make_layout_for, to_natural, BaseDNumeral, DigitLayout, NumeralError};
use crate::{Instance, Quantifier};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("formula is not simple: {0}")]
    NotSimple(String),
    #[error("atom {atom} uses x{var} twice; atoms must relate two distinct variables")]
    RepeatedVariable { atom: usize, var: usize },
    #[error("variable x{0} is out of range")]
    VariableOutOfRange(usize),
    #[error("element {0} is not in the universe")]
    ElementOutOfRange(usize),
    #[error("ATOM needs two distinct variables, got x{0} twice")]
    SameVariable(usize),
    #[error("FIX(x{0}) exists only for universally quantified variables")]
    NotUniversal(usize),
    #[error("FIX(x{var}, {d}): d must be at most {max}")]
    DigitOutOfRange { var: usize, d: u64, max: u64 },
    #[error("layout has no WAIT block")]
    NoWaitBlock,
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Numeral(#[from] NumeralError),
    #[error(transparent)]
    Instance(#[from] AltssError),
}

type Result<T> = std::result::Result<T, ReductionError>;

/// Structure, formula and layout for gadget construction.
///
/// `formula` is the formula the gadgets encode. For even alternation depth
/// this is the negated formula, not the user's input.
#[derive(Debug, Clone)]
pub struct GadgetContext {
    pub structure: RelationalStructure,
    pub formula: PrefixFormula,
    pub layout: Arc<DigitLayout>,
    /// 0-based indices of universally quantified blocks.
    pub universal_blocks: BTreeSet<usize>,
    /// Atom indices (0-based) per variable pair `(j, j')`, `j < j'`.
    pub atoms_by_pair: BTreeMap<(usize, usize), Vec<usize>>,
}

impl GadgetContext {
    pub fn new(structure: &RelationalStructure, formula: &PrefixFormula) -> Result<Self> {
        Self::build(structure, formula, true)
    }

    pub fn build(structure: &RelationalStructure, formula: &PrefixFormula, with_wait: bool) -> Result<Self> {
        let q = formula.var_count();
        let mut atoms_by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, atom) in formula.atoms.iter().enumerate() {
            for v in [atom.left, atom.right] {
                if v == 0 || v > q {
                    return Err(ReductionError::VariableOutOfRange(v));
                }
            }
            if atom.left == atom.right {
                return Err(ReductionError::RepeatedVariable {
                    atom: i + 1,
                    var: atom.left,
                });
            }
            if structure.relation(&atom.relation).is_none() {
                return Err(LogicError::MissingRelation(atom.relation.clone()).into());
            }
            let key = (atom.left.min(atom.right), atom.left.max(atom.right));
            atoms_by_pair.entry(key).or_default().push(i);
        }
        let first = formula.blocks.first().map(|b| b.0).unwrap_or(Quantifier::Exists);
        let layout = make_layout_for(
            first,
            &formula.block_sizes(),
            formula.atoms.len(),
            structure.size() as u64,
            with_wait,
        )?;
        let universal_blocks = (0..layout.block_sizes.len())
            .filter(|&b| layout.block_quantifier(b) == Quantifier::Forall)
            .collect();
        Ok(GadgetContext {
            structure: structure.clone(),
            formula: formula.clone(),
            layout: Arc::new(layout),
            universal_blocks,
            atoms_by_pair,
        })
    }

    pub fn q(&self) -> usize {
        self.layout.vars
    }

    fn check_var(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.q() {
            Err(ReductionError::VariableOutOfRange(j))
        } else {
            Ok(())
        }
    }

    fn check_elem(&self, a: usize) -> Result<()> {
        if a >= self.structure.size() {
            Err(ReductionError::ElementOutOfRange(a))
        } else {
            Ok(())
        }
    }

    fn index(&self, a: usize) -> u64 {
        self.structure.index_of(a)
    }

    fn blank(&self) -> BaseDNumeral {
        BaseDNumeral::zero(&self.layout)
    }

    /// Block `B_j` set to `C` on positions `1..q` and 1 at the end.
    fn full_block(&self, n: &mut BaseDNumeral, j: usize) {
        let l = &self.layout;
        for pos in 1..=l.vars {
            n.set(l.block_index(j, pos), l.unit);
        }
        n.set(l.block_index(j, l.vars + 1), 1);
    }

    /// VAR(a, x_j).
    pub fn var_number(&self, a: usize, j: usize) -> Result<BaseDNumeral> {
        self.check_var(j)?;
        self.check_elem(a)?;
        let mut n = self.blank();
        n.set(self.layout.block_index(j, j), self.index(a));
        Ok(n)
    }

    /// Does the literal of atom `i` hold with `x_j = a`, `x_j' = b`?
    fn atom_holds(&self, i: usize, a: usize, b: usize, j: usize) -> Result<bool> {
        let atom = &self.formula.atoms[i];
        let (x, y) = if atom.left == j { (a, b) } else { (b, a) };
        Ok(atom.eval(&self.structure, x, y)?)
    }

    /// ATOM(a, b, x_j, x_j'). Arguments are swapped into `j < j'` order.
    pub fn atom_number(&self, a: usize, b: usize, j: usize, jp: usize) -> Result<BaseDNumeral> {
        self.check_var(j)?;
        self.check_var(jp)?;
        self.check_elem(a)?;
        self.check_elem(b)?;
        if j == jp {
            return Err(ReductionError::SameVariable(j));
        }
        let (a, b, j, jp) = if j < jp { (a, b, j, jp) } else { (b, a, jp, j) };
        let mut n = self.blank();
        if let Some(atoms) = self.atoms_by_pair.get(&(j, jp)) {
            for &i in atoms {
                if self.atom_holds(i, a, b, j)? {
                    n.set(self.layout.atom_index(i + 1), 1);
                }
            }
        }
        n.set(self.layout.block_index(j, jp), self.index(a));
        n.set(self.layout.block_index(jp, j), self.index(b));
        Ok(n)
    }

    /// NORM(a, x_j).
    pub fn norm_number(&self, a: usize, j: usize) -> Result<BaseDNumeral> {
        self.check_var(j)?;
        self.check_elem(a)?;
        let l = &self.layout;
        let mut n = self.blank();
        for pos in 1..=l.vars {
            n.set(l.block_index(j, pos), l.unit - self.index(a));
        }
        n.set(l.block_index(j, l.vars + 1), 1);
        Ok(n)
    }

    /// FIX(x_j), for universal `j` only.
    pub fn fix_block_number(&self, j: usize) -> Result<BaseDNumeral> {
        self.check_var(j)?;
        if !self.layout.is_universal(j) {
            return Err(ReductionError::NotUniversal(j));
        }
        let mut n = self.blank();
        for i in 1..=self.layout.atoms {
            n.set(self.layout.atom_index(i), 1);
        }
        self.full_block(&mut n, j);
        Ok(n)
    }

    /// Largest `d` accepted by [`Self::fix_digit_number`].
    pub fn max_fix_digit(&self) -> u64 {
        self.layout.universal_total as u64 * self.layout.universe
    }

    /// FIX(x_j, d).
    pub fn fix_digit_number(&self, j: usize, d: u64) -> Result<BaseDNumeral> {
        self.check_var(j)?;
        let max = self.max_fix_digit();
        if d > max {
            return Err(ReductionError::DigitOutOfRange { var: j, d, max });
        }
        let mut n = self.blank();
        self.full_block(&mut n, j);
        n.set(self.layout.block_index(j, j), self.layout.unit - d);
        Ok(n)
    }

    /// WAIT(0), …, WAIT(s), then NOWAIT.
    pub fn wait_numbers(&self) -> Result<Vec<BaseDNumeral>> {
        let l = &self.layout;
        if !l.has_wait_block() {
            return Err(ReductionError::NoWaitBlock);
        }
        let mut out = Vec::with_capacity(l.high_width + 1);
        for i in 0..l.high_width {
            let mut n = self.blank();
            n.set(l.high_index(i), 1);
            out.push(n);
        }
        let mut all = self.blank();
        for i in 0..l.high_width {
            all.set(i, 1);
        }
        out.push(all);
        Ok(out)
    }

    /// `(t, t')`: all L-digits 1, every block `C…C1`; `t'` adds an all-ones
    /// WAIT block (equal to `t` without the extension).
    pub fn targets(&self) -> (BigUint, BigUint) {
        let l = &self.layout;
        let mut t = self.blank();
        for i in 1..=l.atoms {
            t.set(l.atom_index(i), 1);
        }
        for j in 1..=l.vars {
            self.full_block(&mut t, j);
        }
        let plain = to_natural(&t);
        for i in 0..l.high_width {
            t.set(i, 1);
        }
        (plain, to_natural(&t))
    }

    /// VAR, ATOM and NORM numbers of the honest play for a total assignment
    /// (`assignment[j - 1]` is the element for `x_j`).
    pub fn honest_numbers(&self, assignment: &[usize]) -> Result<HonestPlay> {
        let q = self.q();
        if assignment.len() != q {
            return Err(ReductionError::VariableOutOfRange(assignment.len()));
        }
        let vars = (1..=q)
            .map(|j| self.var_number(assignment[j - 1], j))
            .collect::<Result<_>>()?;
        let mut atoms = Vec::new();
        for j in 1..=q {
            for jp in j + 1..=q {
                atoms.push(self.atom_number(assignment[j - 1], assignment[jp - 1], j, jp)?);
            }
        }
        let norms = (1..=q)
            .map(|j| self.norm_number(assignment[j - 1], j))
            .collect::<Result<_>>()?;
        Ok(HonestPlay { vars, atoms, norms })
    }

    /// Completion of the last set after a play whose VAR picks leave some
    /// universal variable without a value: FIX on the first such variable,
    /// FIX(x_j, d_j) on every other variable with `d_j` the column already
    /// filled by the picks, and all WAIT(i).
    ///
    /// `picks` lists `(element, variable)` for each chosen VAR number.
    /// Returns `None` when every universal variable was picked or a column
    /// exceeds the FIX range.
    pub fn repair(&self, picks: &[(usize, usize)]) -> Result<Option<Vec<(String, BaseDNumeral)>>> {
        let q = self.q();
        let mut column = vec![0u64; q + 1];
        let mut seen = vec![false; q + 1];
        for &(a, j) in picks {
            self.check_var(j)?;
            self.check_elem(a)?;
            column[j] += self.index(a);
            seen[j] = true;
        }
        let Some(missing) = (1..=q).find(|&j| self.layout.is_universal(j) && !seen[j]) else {
            return Ok(None);
        };
        let mut out = vec![(format!("FIX(x{missing})"), self.fix_block_number(missing)?)];
        for j in (1..=q).filter(|&j| j != missing) {
            if column[j] > self.max_fix_digit() {
                return Ok(None);
            }
            out.push((format!("FIX(x{j},{})", column[j]), self.fix_digit_number(j, column[j])?));
        }
        let waits = self.wait_numbers()?;
        let s = waits.len() - 2;
        for (i, n) in waits.into_iter().take(s + 1).enumerate() {
            out.push((format!("WAIT({i})"), n));
        }
        Ok(Some(out))
    }

    fn elem_name(&self, a: usize) -> &str {
        &self.structure.elements()[a]
    }
}

/// Gadget numbers chosen along an honest play.
#[derive(Debug, Clone)]
pub struct HonestPlay {
    pub vars: Vec<BaseDNumeral>,
    pub atoms: Vec<BaseDNumeral>,
    pub norms: Vec<BaseDNumeral>,
}

/// How many numbers of each family were generated (before merging equal values).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Census {
    /// VAR numbers per block.
    pub var: Vec<usize>,
    pub atom: usize,
    pub norm: usize,
    pub fix: usize,
    pub fix_digit: usize,
    /// WAIT(0..s) together with NOWAIT.
    pub wait: usize,
}

impl Census {
    pub fn last_set_total(&self) -> usize {
        self.var.last().copied().unwrap_or(0) + self.atom + self.norm + self.fix + self.fix_digit + self.wait
    }
}

#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub layout: Arc<DigitLayout>,
    /// The instance encodes the negated formula; the input holds iff the
    /// instance is a NO instance.
    pub complement: bool,
    pub census: Census,
    /// Gadget names per value, one map per set.
    pub names: Vec<BTreeMap<BigUint, Vec<String>>>,
    pub parameter: usize,
    pub formula_length: usize,
    pub bound: usize,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub instance: Instance,
    pub report: ReductionReport,
    pub context: GadgetContext,
}

impl Reduction {
    /// Translate a subset-sum verdict back to the model-checking question.
    pub fn verdict(&self, solved: bool) -> bool {
        solved != self.report.complement
    }
}

/// `(p + 1)^2`.
pub fn parameter_bound(p: usize) -> usize {
    p * p + 2 * p + 1
}

pub fn reduce(structure: &RelationalStructure, formula: &PrefixFormula) -> Result<Reduction> {
    let level = formula.blocks.len();
    let violations = validate_simple(formula, level, PolarityMode::Positive);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(ReductionError::NotSimple(text.join("; ")));
    }
    let complement = level.is_multiple_of(2);
    let encoded = if complement { formula.negation() } else { formula.clone() };
    let ctx = GadgetContext::new(structure, &encoded)?;
    let layout = ctx.layout.clone();
    let q = layout.vars;
    let universe = structure.size();

    let mut census = Census::default();
    let mut names: Vec<BTreeMap<BigUint, Vec<String>>> = vec![BTreeMap::new(); level];
    let mut add = |set: usize, name: String, n: BaseDNumeral| {
        names[set].entry(to_natural(&n)).or_default().push(name);
    };

    let mut start = 1;
    for (b, &(_, size)) in encoded.blocks.iter().enumerate() {
        for j in start..start + size {
            for a in 0..universe {
                add(b, format!("VAR({},x{j})", ctx.elem_name(a)), ctx.var_number(a, j)?);
            }
        }
        census.var.push(size * universe);
        start += size;
    }
    let last = level - 1;
    for j in 1..=q {
        for jp in j + 1..=q {
            for a in 0..universe {
                for b in 0..universe {
                    let name = format!("ATOM({},{},x{j},x{jp})", ctx.elem_name(a), ctx.elem_name(b));
                    add(last, name, ctx.atom_number(a, b, j, jp)?);
                    census.atom += 1;
                }
            }
        }
    }
    for j in 1..=q {
        for a in 0..universe {
            add(last, format!("NORM({},x{j})", ctx.elem_name(a)), ctx.norm_number(a, j)?);
            census.norm += 1;
        }
    }
    for j in (1..=q).filter(|&j| layout.is_universal(j)) {
        add(last, format!("FIX(x{j})"), ctx.fix_block_number(j)?);
        census.fix += 1;
    }
    for j in 1..=q {
        for d in 0..=ctx.max_fix_digit() {
            add(last, format!("FIX(x{j},{d})"), ctx.fix_digit_number(j, d)?);
            census.fix_digit += 1;
        }
    }
    let waits = ctx.wait_numbers()?;
    let nowait = waits.len() - 1;
    for (i, n) in waits.into_iter().enumerate() {
        let name = if i == nowait { "NOWAIT".to_string() } else { format!("WAIT({i})") };
        add(last, name, n);
        census.wait += 1;
    }

    let sets: Vec<Vec<BigUint>> = names.iter().map(|m| m.keys().cloned().collect()).collect();
    let mut choose = layout.block_sizes.clone();
    choose[last] += q * q.saturating_sub(1) / 2 + q + 1;
    let (_, target) = ctx.targets();
    let first = if complement { Quantifier::Forall } else { Quantifier::Exists };
    let instance = AltssInstance::new(sets, choose, target, first, Comparison::Equal)?;
    let formula_length = formula.length();
    let report = ReductionReport {
        layout,
        complement,
        census,
        names,
        parameter: instance.parameter(),
        formula_length,
        bound: parameter_bound(formula_length),
    };
    Ok(Reduction {
        instance,
        report,
        context: ctx,
    })
}

impl fmt::Display for ReductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = &self.layout;
        writeln!(
            f,
            "layout n={} q={} C={} D={} s={} digits={}",
            l.atoms,
            l.vars,
            l.unit,
            l.base,
            l.wait_span,
            l.total_digits()
        )?;
        writeln!(f, "complement {}", self.complement)?;
        writeln!(
            f,
            "parameter {} length {} bound {}",
            self.parameter, self.formula_length, self.bound
        )?;
        let c = &self.census;
        let vars: Vec<String> = c.var.iter().map(ToString::to_string).collect();
        writeln!(
            f,
            "census var [{}] atom {} norm {} fix {} fixd {} wait {}",
            vars.join(","),
            c.atom,
            c.norm,
            c.fix,
            c.fix_digit,
            c.wait
        )?;
        let layout = self.layout.clone();
        for (i, set) in self.names.iter().enumerate() {
            for (value, names) in set {
                let digits = crate::numerals::from_natural(&layout, value).map_err(|_| fmt::Error)?;
                writeln!(f, "set {} {} {}", i + 1, digits, names.join(","))?;
            }
        }
        Ok(())
    }
}
