//! Exact digit-level execution traces for the arithmetic tasks.
//!
//! Each task has a trace builder that records every intermediate quantity a
//! written-out execution would mention: remaining digit lists, per-column
//! digits, carries, running answers. Trace fields are the single source of
//! truth for both prompt rendering and grading.

mod addition;
mod composite;
mod multiplication;
mod parity;
mod subtraction;

pub use addition::{add_trace, add_trace_digits, AddStep, AddTrace};
pub use composite::{
    multi_add_digit_chain, multi_add_trace, mul_as_add_trace, ChainStep, ChainTrace, MulAsAdd,
    Operand,
};
pub use multiplication::{mul_trace, GroupProduct, MulDigitStep, MulTrace};
pub use parity::{parity_trace, ParityStep, ParityTrace};
pub use subtraction::{sub_trace, SignedPair, SubNormStep, SubRawStep, SubTrace};

/// Integer value type used throughout: wide enough for every answer length
/// the tasks produce (up to 38 digits).
pub type Value = i128;

/// Decimal digits of `|n|`, most significant first. Zero yields `[0]`.
pub fn digits_of(n: Value) -> Vec<u8> {
    let mut n = n.unsigned_abs();
    if n == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % 10) as u8);
        n /= 10;
    }
    out.reverse();
    out
}

/// Value of a digit list (most significant first). Leading zeros are allowed
/// and ignored; an empty list is zero.
pub fn value_of_digits(digits: &[u8]) -> Value {
    digits.iter().fold(0, |acc, &d| acc * 10 + Value::from(d))
}

/// Number of digits in the decimal rendering of `|n|` (answer length).
pub fn answer_length(n: Value) -> usize {
    digits_of(n).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        for n in [0, 1, 9, 10, 128, 367, 9980, 7947, 10009, 177045] {
            assert_eq!(value_of_digits(&digits_of(n)), n);
        }
        assert_eq!(digits_of(0), vec![0]);
        assert_eq!(digits_of(128), vec![1, 2, 8]);
        assert_eq!(digits_of(-128), vec![1, 2, 8]);
    }

    #[test]
    fn leading_zeros_ignored() {
        assert_eq!(value_of_digits(&[0, 9, 4]), 94);
        assert_eq!(value_of_digits(&[]), 0);
        assert_eq!(value_of_digits(&[0, 0, 0]), 0);
    }

    #[test]
    fn answer_lengths() {
        assert_eq!(answer_length(0), 1);
        assert_eq!(answer_length(495), 3);
        assert_eq!(answer_length(-541), 3);
        assert_eq!(answer_length(10009), 5);
    }
}
