//! Column-by-column addition traces for non-negative operands.

use super::{digits_of, value_of_digits, Value};

/// One column of the written addition algorithm.
///
/// Columns are numbered from the left of the longer operand (1-based), so the
/// first step processes the highest column index and the last step processes
/// column 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddStep {
    /// Column index at this step (equals the number of unprocessed columns).
    pub column: usize,
    /// Unprocessed digits of the first operand before this step (MSB first).
    pub fn_remaining: Vec<u8>,
    /// Unprocessed digits of the second operand before this step.
    pub sn_remaining: Vec<u8>,
    /// Digit taken from the first operand, `None` once it is exhausted.
    pub fn_digit: Option<u8>,
    /// Digit taken from the second operand, `None` once it is exhausted.
    pub sn_digit: Option<u8>,
    /// Carry coming into this column (0 or 1).
    pub carry_in: u8,
    /// `fn + sn + carry_in` (missing digits count as 0); in `0..=19`.
    pub sum: u8,
    /// `sum % 10`, the digit inserted at the front of the answer.
    pub answer_digit: u8,
    /// `sum / 10`, the carry out of this column.
    pub carry_out: u8,
    /// Accumulated answer digits after inserting this column's digit.
    pub answer_after: Vec<u8>,
}

/// Full addition trace over digit lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddTrace {
    /// First operand digits as given (may carry leading zeros).
    pub fn_digits: Vec<u8>,
    /// Second operand digits as given.
    pub sn_digits: Vec<u8>,
    /// Number of columns processed: `max(len(fn), len(sn))`.
    pub max_len: usize,
    /// Per-column steps, highest column first.
    pub steps: Vec<AddStep>,
    /// True when a final carry of 1 was prepended after the last column.
    pub overflow: bool,
    /// Final answer digits (with the prepended 1 when `overflow`).
    pub final_digits: Vec<u8>,
    /// Numeric value of the result.
    pub value: Value,
}

/// Trace the addition of two non-negative values.
pub fn add_trace(a: Value, b: Value) -> AddTrace {
    assert!(a >= 0 && b >= 0, "add_trace takes non-negative operands");
    add_trace_digits(digits_of(a), digits_of(b))
}

/// Trace the addition of two digit lists (leading zeros permitted; useful for
/// intermediate results that are written with their zeros kept).
pub fn add_trace_digits(fn_digits: Vec<u8>, sn_digits: Vec<u8>) -> AddTrace {
    let max_len = fn_digits.len().max(sn_digits.len());
    let mut steps = Vec::with_capacity(max_len);
    let mut answer: Vec<u8> = Vec::new();
    let mut carry = 0u8;

    for processed in 0..max_len {
        let column = max_len - processed;
        let fn_rem = remaining(&fn_digits, processed);
        let sn_rem = remaining(&sn_digits, processed);
        let fn_digit = fn_rem.last().copied();
        let sn_digit = sn_rem.last().copied();
        let sum = fn_digit.unwrap_or(0) + sn_digit.unwrap_or(0) + carry;
        let answer_digit = sum % 10;
        let carry_out = sum / 10;
        answer.insert(0, answer_digit);
        steps.push(AddStep {
            column,
            fn_remaining: fn_rem.to_vec(),
            sn_remaining: sn_rem.to_vec(),
            fn_digit,
            sn_digit,
            carry_in: carry,
            sum,
            answer_digit,
            carry_out,
            answer_after: answer.clone(),
        });
        carry = carry_out;
    }

    let overflow = carry > 0;
    let mut final_digits = answer;
    if overflow {
        final_digits.insert(0, carry);
    }
    let value = value_of_digits(&final_digits);
    debug_assert_eq!(value, value_of_digits(&fn_digits) + value_of_digits(&sn_digits));

    AddTrace { fn_digits, sn_digits, max_len, steps, overflow, final_digits, value }
}

/// The first `len - processed` digits of `digits`, i.e. what is left after
/// consuming `processed` digits from the end. Empty once exhausted.
fn remaining(digits: &[u8], processed: usize) -> &[u8] {
    if processed >= digits.len() {
        &[]
    } else {
        &digits[..digits.len() - processed]
    }
}
