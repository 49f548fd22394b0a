//! Multi-operand addition chains and multiply-as-repeated-addition.
//!
//! A chain folds its operands left to right: the first two are added to
//! produce result 1, which is added to the third operand to produce
//! result 2, and so on. Multiplication-as-addition rewrites `a*b` as the
//! smaller factor counting repetitions of the larger, then runs a chain.

use super::{add_trace_digits, digits_of, value_of_digits, AddTrace, Value};

/// A chain operand: a digit list, plus its numeric value when the operand
/// appeared as a literal number (named intermediate lists carry `None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operand {
    pub value: Option<Value>,
    pub digits: Vec<u8>,
}

impl Operand {
    /// Operand written as a literal non-negative number.
    pub fn from_value(v: Value) -> Self {
        assert!(v >= 0, "chain operands are non-negative");
        Operand { value: Some(v), digits: digits_of(v) }
    }

    /// Operand that is a digit list (possibly with leading zeros).
    pub fn from_digits(digits: Vec<u8>) -> Self {
        assert!(!digits.is_empty() && digits.iter().all(|&d| d <= 9));
        Operand { value: None, digits }
    }
}

/// One pairwise subproblem in a chain: result `index` = left + right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    /// 1-based result number this step produces.
    pub index: usize,
    /// Left input digits (operand 0 for the first step, else the previous
    /// step's result).
    pub fn_digits: Vec<u8>,
    /// Right input digits (operand `index`).
    pub sn_digits: Vec<u8>,
    /// Column-by-column trace of the pairwise addition.
    pub trace: AddTrace,
    /// Digits of the result (overflow carry included).
    pub result_digits: Vec<u8>,
}

/// Left-fold addition chain over two or more operands (a single operand
/// yields no steps and is its own result).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainTrace {
    pub operands: Vec<Operand>,
    pub steps: Vec<ChainStep>,
    pub final_digits: Vec<u8>,
    pub value: Value,
}

/// Chain over literal numeric operands.
pub fn multi_add_trace(values: &[Value]) -> ChainTrace {
    let operands: Vec<Operand> = values.iter().map(|&v| Operand::from_value(v)).collect();
    let trace = chain(operands);
    debug_assert_eq!(trace.value, values.iter().sum::<Value>());
    trace
}

/// Chain over raw digit lists (used by multiplication internals, where the
/// operands are named lists that may carry leading zeros).
pub fn multi_add_digit_chain(lists: &[Vec<u8>]) -> ChainTrace {
    chain(lists.iter().cloned().map(Operand::from_digits).collect())
}

fn chain(operands: Vec<Operand>) -> ChainTrace {
    assert!(!operands.is_empty(), "chain needs at least one operand");
    let mut steps = Vec::with_capacity(operands.len() - 1);
    let mut current = operands[0].digits.clone();
    for (i, op) in operands.iter().enumerate().skip(1) {
        let trace = add_trace_digits(current.clone(), op.digits.clone());
        let result = trace.final_digits.clone();
        steps.push(ChainStep {
            index: i,
            fn_digits: current,
            sn_digits: op.digits.clone(),
            trace,
            result_digits: result.clone(),
        });
        current = result;
    }
    let value = value_of_digits(&current);
    ChainTrace { operands, steps, final_digits: current, value }
}

/// Multiplication rewritten as repeated addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulAsAdd {
    pub a: Value,
    pub b: Value,
    /// The smaller factor — the repetition count (ties pick the first).
    pub small: Value,
    /// The larger factor — the repeated term.
    pub big: Value,
    /// True when the first factor is the count.
    pub first_is_small: bool,
    /// `small` as a count.
    pub count: usize,
    /// True when `small` is 0 or 1, so the product is stated directly
    /// with no addition chain.
    pub direct: bool,
    /// The chain over `big` repeated `count` times (absent when direct).
    pub chain: Option<ChainTrace>,
    pub value: Value,
}

/// Trace `a*b` as repeated addition of the larger factor.
pub fn mul_as_add_trace(a: Value, b: Value) -> MulAsAdd {
    assert!(a >= 0 && b >= 0, "factors must be non-negative");
    let first_is_small = a <= b;
    let (small, big) = if first_is_small { (a, b) } else { (b, a) };
    let count = usize::try_from(small).expect("repeat count fits usize");
    let direct = count <= 1;
    let chain = if direct { None } else { Some(multi_add_trace(&vec![big; count])) };
    let value = match &chain {
        Some(c) => c.value,
        None => small * big,
    };
    debug_assert_eq!(value, a * b);
    MulAsAdd { a, b, small, big, first_is_small, count, direct, chain, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_802_7145_6() {
        let t = multi_add_trace(&[802, 7145, 6]);
        assert_eq!(t.steps.len(), 2);
        assert_eq!(t.steps[0].result_digits, vec![7, 9, 4, 7]);
        assert_eq!(t.steps[1].fn_digits, vec![7, 9, 4, 7]);
        assert_eq!(t.steps[1].sn_digits, vec![6]);
        assert_eq!(t.final_digits, vec![7, 9, 5, 3]);
        assert_eq!(t.value, 7953);
    }

    #[test]
    fn chain_keeps_overflow_digit() {
        let t = multi_add_trace(&[9980, 29, 1]);
        assert_eq!(t.steps[0].result_digits, vec![1, 0, 0, 0, 9]);
        assert_eq!(t.value, 10010);
    }

    #[test]
    fn single_operand_chain() {
        let t = multi_add_trace(&[42]);
        assert!(t.steps.is_empty());
        assert_eq!(t.final_digits, vec![4, 2]);
        assert_eq!(t.value, 42);
    }

    #[test]
    fn digit_chain_keeps_leading_zeros() {
        let t = multi_add_digit_chain(&[vec![4, 3, 5], vec![2, 6, 1, 0], vec![0, 0, 0]]);
        assert_eq!(t.steps[0].result_digits, vec![3, 0, 4, 5]);
        assert_eq!(t.final_digits, vec![3, 0, 4, 5]);
        assert_eq!(t.value, 3045);
    }

    #[test]
    fn mul_as_add_three_times_seven() {
        let t = mul_as_add_trace(3, 7);
        assert!(t.first_is_small && !t.direct);
        assert_eq!((t.small, t.big, t.count), (3, 7, 3));
        let chain = t.chain.as_ref().unwrap();
        assert_eq!(chain.steps[0].result_digits, vec![1, 4]);
        assert_eq!(chain.final_digits, vec![2, 1]);
        assert_eq!(t.value, 21);
    }

    #[test]
    fn mul_as_add_three_times_107() {
        let t = mul_as_add_trace(3, 107);
        let chain = t.chain.as_ref().unwrap();
        let results: Vec<Value> =
            chain.steps.iter().map(|s| value_of_digits(&s.result_digits)).collect();
        assert_eq!(results, vec![214, 321]);
    }

    #[test]
    fn mul_as_add_tie_picks_first() {
        let t = mul_as_add_trace(7, 7);
        assert!(t.first_is_small);
        assert_eq!(t.count, 7);
        assert_eq!(t.value, 49);
    }

    #[test]
    fn mul_as_add_direct_cases() {
        let t = mul_as_add_trace(1, 999);
        assert!(t.direct && t.chain.is_none());
        assert_eq!(t.value, 999);
        let t = mul_as_add_trace(416, 0);
        assert!(t.direct);
        assert_eq!((t.small, t.big, t.value), (0, 416, 0));
        assert!(!t.first_is_small);
    }

    #[test]
    fn mul_as_add_reconstruction_grid() {
        for a in 0..=12 {
            for b in 0..=12 {
                assert_eq!(mul_as_add_trace(a, b).value, a * b);
            }
        }
    }
}
