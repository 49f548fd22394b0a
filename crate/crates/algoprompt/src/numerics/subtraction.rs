//! Signed addition/subtraction traces.
//!
//! The written algorithm runs in two phases. The raw phase adds signed
//! per-column digits with a truncating remainder, which can leave negative
//! digits in the running answer. When the displayed answer contains a minus
//! sign, a normalization phase walks the digits right to left, borrowing with
//! `B` in `{0, 10}` until every digit is a plain decimal digit.

use super::{digits_of, value_of_digits, Value};

/// A signed two-operand question `a ± b`, stored as signed values
/// (`29 - 570` becomes `fn_value = 29`, `sn_value = -570`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedPair {
    pub fn_value: Value,
    pub sn_value: Value,
}

/// One raw-phase column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubRawStep {
    /// Carry column index (counts down from the max operand length).
    pub column: usize,
    /// Unprocessed digit magnitudes of the first operand before this step.
    pub fn_remaining: Vec<u8>,
    /// Unprocessed digit magnitudes of the second operand before this step.
    pub sn_remaining: Vec<u8>,
    /// Digit magnitude taken from the first operand (`None` once exhausted).
    pub fn_digit: Option<u8>,
    /// Digit magnitude taken from the second operand (`None` once exhausted).
    pub sn_digit: Option<u8>,
    /// Carry coming into this column (-1, 0, or 1).
    pub carry_in: i8,
    /// Signed column sum: `±fn ± sn + carry_in`.
    pub value: i8,
    /// Truncating remainder of `value` by 10 — the signed digit kept.
    pub digit: i8,
    /// `(value - digit) / 10`.
    pub carry_out: i8,
    /// Accumulated signed answer digits after this step (MSB first).
    pub answer_after: Vec<i8>,
}

/// One normalization-phase step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubNormStep {
    /// Position processed, 1-based from the left; equals the number of
    /// digits still unprocessed at entry.
    pub index: usize,
    /// Unprocessed (sign-adjusted) digits before this step.
    pub a_remaining: Vec<i8>,
    /// The digit being normalized.
    pub digit: i8,
    /// Borrow base chosen first: 10 when the digit is negative, else 0.
    pub b: u8,
    /// Carry implied by the first borrow decision (-1 when `b` is 10).
    pub b_carry: i8,
    /// Carry coming into this position from the previous normalization step.
    pub carry_in: i8,
    /// `digit + b + carry_in` before any retry.
    pub first_try: i8,
    /// True when `first_try` was negative and the step repeated with `B=10`.
    pub retried: bool,
    /// Final output digit (always in `0..=9`).
    pub out_digit: u8,
    /// Borrow carried to the next position (-1 or 0).
    pub carry_out: i8,
    /// Accumulated normalized digits after this step.
    pub anew_after: Vec<u8>,
}

/// Full signed addition/subtraction trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubTrace {
    pub fn_value: Value,
    pub sn_value: Value,
    pub fn_neg: bool,
    pub sn_neg: bool,
    /// Digit magnitudes of the operands.
    pub fn_digits: Vec<u8>,
    pub sn_digits: Vec<u8>,
    pub max_len: usize,
    pub raw_steps: Vec<SubRawStep>,
    /// Carry left after the last column (`C[0]`).
    pub final_carry: i8,
    /// True when a non-zero final carry was prepended to the answer.
    pub carry_prepended: bool,
    /// Signed answer digits after the raw phase (including any prepend).
    pub raw_answer: Vec<i8>,
    /// True when the displayed raw answer contains a minus sign, which is
    /// what triggers the normalization phase.
    pub has_negative: bool,
    /// True when normalization flips every digit's sign (result negative);
    /// decided by the sign of the leftmost raw digit.
    pub negate: bool,
    /// Digits after the optional flip (what normalization consumes); empty
    /// when normalization is skipped.
    pub flipped: Vec<i8>,
    pub norm_steps: Vec<SubNormStep>,
    /// Final digit list. Leading zeros are kept exactly as produced.
    pub final_digits: Vec<u8>,
    /// Sign of the final answer.
    pub negative: bool,
    /// Numeric value of the result.
    pub value: Value,
}

/// Trace `fn_value + sn_value` over signed operands.
pub fn sub_trace(pair: SignedPair) -> SubTrace {
    let SignedPair { fn_value, sn_value } = pair;
    let fn_neg = fn_value < 0;
    let sn_neg = sn_value < 0;
    let fn_digits = digits_of(fn_value);
    let sn_digits = digits_of(sn_value);
    let max_len = fn_digits.len().max(sn_digits.len());

    let mut raw_steps = Vec::with_capacity(max_len);
    let mut answer: Vec<i8> = Vec::new();
    let mut carry = 0i8;
    for processed in 0..max_len {
        let column = max_len - processed;
        let fn_rem = remaining(&fn_digits, processed);
        let sn_rem = remaining(&sn_digits, processed);
        let fn_digit = fn_rem.last().copied();
        let sn_digit = sn_rem.last().copied();
        let fn_term = signed(fn_digit, fn_neg);
        let sn_term = signed(sn_digit, sn_neg);
        let value = fn_term + sn_term + carry;
        let digit = value % 10; // truncating remainder keeps the sign
        let carry_out = (value - digit) / 10;
        answer.insert(0, digit);
        raw_steps.push(SubRawStep {
            column,
            fn_remaining: fn_rem.to_vec(),
            sn_remaining: sn_rem.to_vec(),
            fn_digit,
            sn_digit,
            carry_in: carry,
            value,
            digit,
            carry_out,
            answer_after: answer.clone(),
        });
        carry = carry_out;
    }

    let final_carry = carry;
    let carry_prepended = final_carry != 0;
    if carry_prepended {
        answer.insert(0, final_carry);
    }
    let raw_answer = answer;
    let has_negative = raw_answer.iter().any(|&d| d < 0);

    let (negate, flipped, norm_steps, final_digits, negative);
    if has_negative {
        // The sign of the whole answer is the sign of the leading nonzero
        // raw digit; leading zeros (canceled columns) carry no sign.
        negate = raw_answer.iter().copied().find(|&d| d != 0).unwrap_or(0) < 0;
        let flip: Vec<i8> =
            raw_answer.iter().map(|&d| if negate { -d } else { d }).collect();
        let mut steps = Vec::with_capacity(flip.len());
        let mut anew: Vec<u8> = Vec::new();
        let mut c_in = 0i8;
        for pos in (1..=flip.len()).rev() {
            let a_rem = flip[..pos].to_vec();
            let d = flip[pos - 1];
            let (b, b_carry) = if d < 0 { (10u8, -1i8) } else { (0u8, 0i8) };
            let first_try = d + i8::try_from(b).unwrap() + c_in;
            let (retried, out, c_out) = if first_try < 0 {
                (true, first_try + 10, -1)
            } else {
                (false, first_try, b_carry)
            };
            let out_digit = u8::try_from(out).expect("normalized digit in 0..=9");
            assert!(out_digit <= 9);
            anew.insert(0, out_digit);
            steps.push(SubNormStep {
                index: pos,
                a_remaining: a_rem,
                digit: d,
                b,
                b_carry,
                carry_in: c_in,
                first_try,
                retried,
                out_digit,
                carry_out: c_out,
                anew_after: anew.clone(),
            });
            c_in = c_out;
        }
        assert_eq!(c_in, 0, "normalization must consume the borrow");
        negative = negate;
        final_digits = anew;
        flipped = flip;
        norm_steps = steps;
    } else {
        negate = false;
        flipped = Vec::new();
        norm_steps = Vec::new();
        final_digits = raw_answer.iter().map(|&d| u8::try_from(d).unwrap()).collect();
        negative = false;
    }

    let magnitude = value_of_digits(&final_digits);
    let value = if negative { -magnitude } else { magnitude };
    debug_assert_eq!(value, fn_value + sn_value, "trace must reconstruct the sum");

    SubTrace {
        fn_value,
        sn_value,
        fn_neg,
        sn_neg,
        fn_digits,
        sn_digits,
        max_len,
        raw_steps,
        final_carry,
        carry_prepended,
        raw_answer,
        has_negative,
        negate,
        flipped,
        norm_steps,
        final_digits,
        negative,
        value,
    }
}

fn signed(digit: Option<u8>, neg: bool) -> i8 {
    let d = i8::try_from(digit.unwrap_or(0)).unwrap();
    if neg {
        -d
    } else {
        d
    }
}

fn remaining(digits: &[u8], processed: usize) -> &[u8] {
    if processed >= digits.len() {
        &[]
    } else {
        &digits[..digits.len() - processed]
    }
}
