//! Fixed ARAM program deciding three-set alternating subset-sum.
//!
//! Input image (`R1…`): `k, l, m, t, |A1|, A1…, |A2|, A2…, |A3|, A3…` with
//! every set ascending. The program first relocates the image above itself
//! (so that `R1..R8` become scratch), then for each set guesses `k_i`
//! strictly increasing addresses into the set, adding the elements to a sum
//! register. All guessing happens in one final loop per set.

use std::collections::HashMap;

use num_bigint::BigUint;

use super::{AramError, AramProgram, Instr, RunBounds};
use crate::altss::{AltssInstance, Comparison};
use crate::{Natural, Quantifier};

/// Tail window per guessed element used by [`membership_bounds`].
pub const TAIL_PER_GUESS: usize = 96;
/// Step budget per register of the input image.
pub const STEPS_PER_REGISTER: usize = 32;

// Scratch registers after relocation. R1 keeps the offset O.
const OFF: usize = 1;
const PTR: usize = 2;
const CNT: usize = 3;
const LIM: usize = 4;
const NEXT: usize = 5;
const PICK: usize = 6;
const SUM: usize = 7;
const HDR: usize = 8;

enum Op {
    Plain(Instr),
    Jump(String),
    JZero(String),
    JEq(usize, String),
}

#[derive(Default)]
struct Asm {
    ops: Vec<Op>,
    labels: HashMap<String, usize>,
}

impl Asm {
    fn emit(&mut self, ins: Instr) -> &mut Self {
        self.ops.push(Op::Plain(ins));
        self
    }

    fn label(&mut self, name: &str) -> &mut Self {
        self.labels.insert(name.to_string(), self.ops.len() + 1);
        self
    }

    fn jump(&mut self, to: &str) -> &mut Self {
        self.ops.push(Op::Jump(to.to_string()));
        self
    }

    fn jzero(&mut self, to: &str) -> &mut Self {
        self.ops.push(Op::JZero(to.to_string()));
        self
    }

    fn jeq(&mut self, r: usize, to: &str) -> &mut Self {
        self.ops.push(Op::JEq(r, to.to_string()));
        self
    }

    fn finish(self) -> AramProgram {
        let at = |l: &String| self.labels[l];
        let code = self
            .ops
            .iter()
            .map(|op| match op {
                Op::Plain(i) => *i,
                Op::Jump(l) => Instr::Jump(at(l)),
                Op::JZero(l) => Instr::JZero(at(l)),
                Op::JEq(r, l) => Instr::JEq(*r, at(l)),
            })
            .collect();
        AramProgram::new(code).expect("labels resolve inside the program")
    }
}

pub fn alt3_membership_program() -> AramProgram {
    use Instr::*;
    let mut a = Asm::default();

    // Park k, l, m at R[S], R[S+1], R[S+2]; R0 = S on entry.
    a.emit(Swap(1)).emit(StoreInd(1));
    a.emit(LoadI(1)).emit(Add(1)).emit(Swap(2)).emit(StoreInd(2));
    a.emit(LoadI(2)).emit(Add(1)).emit(Swap(3)).emit(StoreInd(3));
    // O = S + 2; datum i will live at R[O + i].
    a.emit(Load(3)).emit(Store(OFF));
    a.emit(LoadI(4)).emit(Store(PTR));
    a.label("copy");
    a.emit(LoadI(2)).emit(Store(3)).emit(Load(OFF)).emit(Sub(3)).emit(Store(3));
    a.emit(Load(PTR)).jeq(3, "copied");
    a.emit(Add(OFF)).emit(Store(3));
    a.emit(LoadInd(PTR)).emit(StoreInd(3));
    a.emit(LoadI(1)).emit(Add(PTR)).emit(Store(PTR));
    a.jump("copy");
    a.label("copied");
    // R3 = S (still set from the last test); move the parked counters.
    a.emit(LoadI(1)).emit(Add(OFF)).emit(Store(PTR));
    for i in 0..3 {
        if i > 0 {
            a.emit(LoadI(1)).emit(Add(3)).emit(Store(3));
            a.emit(LoadI(1)).emit(Add(PTR)).emit(Store(PTR));
        }
        a.emit(LoadInd(3)).emit(StoreInd(PTR));
    }

    a.emit(LoadI(0)).emit(Store(SUM));
    a.emit(LoadI(5)).emit(Add(OFF)).emit(Store(HDR));
    for (slot, quant) in [(1u64, Exists), (2, Forall), (3, Exists)] {
        let legal = format!("legal{slot}");
        let lp = format!("loop{slot}");
        let done = format!("done{slot}");
        a.emit(LoadI(slot)).emit(Add(OFF)).emit(Store(PTR));
        a.emit(LoadInd(PTR)).emit(Store(CNT));
        a.emit(LoadI(1)).emit(Add(HDR)).emit(Store(NEXT));
        a.emit(LoadInd(HDR)).emit(Add(NEXT)).emit(Store(LIM));
        // More picks than elements: the owner cannot move and loses.
        a.emit(Load(LIM)).emit(Sub(NEXT)).emit(Store(PICK));
        a.emit(Load(CNT)).emit(Sub(PICK)).jzero(&legal);
        a.emit(LoadI(u64::from(quant == Forall))).emit(Halt);
        a.label(&legal);
        a.emit(Load(LIM)).emit(Sub(CNT)).emit(Store(LIM));
        a.label(&lp);
        a.emit(Load(CNT)).jzero(&done);
        // Pick an address in [NEXT, LIM]; leave room for the rest.
        a.emit(Load(LIM)).emit(Sub(NEXT)).emit(quant);
        a.emit(Add(NEXT)).emit(Store(PICK));
        a.emit(LoadI(1)).emit(Add(PICK)).emit(Store(NEXT));
        a.emit(LoadInd(PICK)).emit(Add(SUM)).emit(Store(SUM));
        a.emit(LoadI(1)).emit(Add(LIM)).emit(Store(LIM));
        a.emit(LoadI(1)).emit(Store(PTR)).emit(Load(CNT)).emit(Sub(PTR)).emit(Store(CNT));
        a.jump(&lp);
        a.label(&done);
        a.emit(Load(LIM)).emit(Store(HDR));
    }

    a.emit(LoadI(4)).emit(Add(OFF)).emit(Store(PTR)).emit(LoadInd(PTR));
    a.jeq(SUM, "accept");
    a.emit(LoadI(0)).emit(Halt);
    a.label("accept");
    a.emit(LoadI(1)).emit(Halt);
    a.finish()
}

/// Register image for a three-set instance of the existential, equality flavour.
pub fn encode_altss_input<T: Natural>(instance: &AltssInstance<T>) -> Result<Vec<T>, AramError> {
    if instance.levels() != 3 {
        return Err(AramError::Encode(format!("{} sets, need 3", instance.levels())));
    }
    if instance.first_quantifier() != Quantifier::Exists || instance.comparison() != Comparison::Equal {
        return Err(AramError::Encode("only the exists/equal flavour is encoded".into()));
    }
    let num = |v: usize| T::from_usize(v).ok_or_else(|| AramError::Encode(format!("{v} does not fit")));
    let mut out = Vec::new();
    for &k in instance.choose() {
        out.push(num(k)?);
    }
    out.push(instance.target().clone());
    for set in instance.sets() {
        out.push(num(set.len())?);
        out.extend(set.iter().cloned());
    }
    Ok(out)
}

/// Bounds the membership program is expected to meet on `instance`.
pub fn membership_bounds<T: Natural>(instance: &AltssInstance<T>) -> RunBounds {
    let k = instance.parameter();
    let registers = 7 + instance.sets().iter().map(Vec::len).sum::<usize>();
    let total: BigUint = instance.sets().iter().flatten().map(Natural::to_biguint).sum();
    let max_value = total.max(instance.target().to_biguint()) + BigUint::from(2 * registers + 16);
    RunBounds {
        max_steps: STEPS_PER_REGISTER * (registers + k),
        max_guess_steps: k,
        max_register: 2 * registers + 12,
        max_value,
        tail_window: TAIL_PER_GUESS * k,
        max_alternations: 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altss::solve;
    use crate::aram::{evaluate, parse_program};

    fn example1(target: u64) -> AltssInstance<u64> {
        AltssInstance::new(
            vec![vec![0, 3], vec![1, 2], vec![2, 3]],
            vec![1, 1, 1],
            target,
            Quantifier::Exists,
            Comparison::Equal,
        )
        .unwrap()
    }

    fn run(x: &AltssInstance<u64>) -> crate::aram::RunReport<u64> {
        let image = encode_altss_input(x).unwrap();
        evaluate(&alt3_membership_program(), &image, &membership_bounds(x)).unwrap()
    }

    #[test]
    fn encodes_example_one() {
        assert_eq!(
            encode_altss_input(&example1(7)).unwrap(),
            vec![1, 1, 1, 7, 2, 0, 3, 2, 1, 2, 2, 2, 3]
        );
        let five = AltssInstance::new(vec![vec![1u64]; 5], vec![1; 5], 5, Quantifier::Exists, Comparison::Equal).unwrap();
        assert!(encode_altss_input(&five).is_err());
        assert!(encode_altss_input(&example1(7).with_flavour(Quantifier::Forall, Comparison::Equal)).is_err());
    }

    #[test]
    fn decides_example_one() {
        let r = run(&example1(7));
        assert!(r.verdict);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(r.paths.iter().all(|p| p.guess_steps == 3 && p.alternations() <= 3));
        assert!(!run(&example1(100)).verdict);
    }

    #[test]
    fn empty_instance_accepts() {
        let x = AltssInstance::new(vec![vec![]; 3], vec![0; 3], 0u64, Quantifier::Exists, Comparison::Equal).unwrap();
        let r = run(&x);
        assert!(r.verdict);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn agrees_with_solver_on_small_cases() {
        for t in 0..12 {
            for ks in [[1, 1, 1], [2, 1, 0], [0, 2, 1], [1, 3, 1], [3, 1, 2]] {
                let x = AltssInstance::new(
                    vec![vec![0, 2, 5], vec![1, 2], vec![1, 3, 4]],
                    ks.to_vec(),
                    t,
                    Quantifier::Exists,
                    Comparison::Equal,
                )
                .unwrap();
                let r = run(&x);
                assert_eq!(r.verdict, solve(&x).verdict, "t={t} k={ks:?}");
            }
        }
    }

    #[test]
    fn program_round_trips() {
        let p = alt3_membership_program();
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }
}
