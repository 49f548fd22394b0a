//! Grouped long-multiplication traces.
//!
//! The written algorithm splits the longer factor (ties pick the first)
//! into a leftover group of `len % 3` leading digits plus groups of three.
//! Each group is multiplied digit by digit against the other factor
//! (`MULVAL`), every digit product getting `P0` appended zeros; the partial
//! products are folded with an addition chain. Finally each group result is
//! shifted by `3*(groups - k)` zeros and the shifted results are summed.

use super::{digits_of, multi_add_digit_chain, value_of_digits, ChainTrace, Value};

/// One per-digit product inside a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulDigitStep {
    /// Group digits still unprocessed before this step (the last one is
    /// consumed).
    pub remaining: Vec<u8>,
    /// The digit consumed.
    pub digit: u8,
    /// `digit * mulval`.
    pub product: Value,
    /// Zeros appended to the product (0 for the group's last digit, then 1,
    /// 2, ...).
    pub p0: usize,
    /// Product digits with the zeros appended — the list this step adds to
    /// the group's chain.
    pub shifted: Vec<u8>,
    /// 1-based number of this partial-product list within the group.
    pub adv_index: usize,
}

/// One group of the split factor, fully multiplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupProduct {
    /// 1-based group number, most significant group first.
    pub index: usize,
    /// The group's digits (leading zeros kept, e.g. `[0,3,5]`).
    pub group_digits: Vec<u8>,
    pub digit_steps: Vec<MulDigitStep>,
    /// Chain summing the partial products (absent when the group produced a
    /// single list).
    pub add_chain: Option<ChainTrace>,
    /// The group result digits.
    pub result_digits: Vec<u8>,
}

/// Full grouped multiplication trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulTrace {
    pub a: Value,
    pub b: Value,
    /// True when the first factor was split (it is at least as long).
    pub split_first: bool,
    /// Digits of the split factor.
    pub split_digits: Vec<u8>,
    /// The other factor, used as the per-digit multiplier.
    pub mulval: Value,
    /// `split_digits.len() % 3` — size of the leading leftover group.
    pub leftover_len: usize,
    pub n_groups: usize,
    pub groups: Vec<GroupProduct>,
    /// Group results after appending `3*(n_groups - k)` zeros to group `k`.
    pub shifted: Vec<Vec<u8>>,
    /// Chain summing the shifted group results (absent for one group).
    pub combine: Option<ChainTrace>,
    pub final_digits: Vec<u8>,
    pub value: Value,
}

/// Trace `a*b` by the grouped digit algorithm.
pub fn mul_trace(a: Value, b: Value) -> MulTrace {
    assert!(a >= 0 && b >= 0, "factors must be non-negative");
    let a_digits = digits_of(a);
    let b_digits = digits_of(b);
    let split_first = a_digits.len() >= b_digits.len();
    let (split_digits, mulval) = if split_first { (a_digits, b) } else { (b_digits, a) };

    let leftover_len = split_digits.len() % 3;
    let mut group_lists: Vec<Vec<u8>> = Vec::new();
    if leftover_len > 0 {
        group_lists.push(split_digits[..leftover_len].to_vec());
    }
    for chunk in split_digits[leftover_len..].chunks(3) {
        group_lists.push(chunk.to_vec());
    }
    let n_groups = group_lists.len();

    let mut groups = Vec::with_capacity(n_groups);
    for (gi, digits) in group_lists.iter().enumerate() {
        let mut digit_steps = Vec::with_capacity(digits.len());
        let mut lists: Vec<Vec<u8>> = Vec::with_capacity(digits.len());
        for p0 in 0..digits.len() {
            let remaining = digits[..digits.len() - p0].to_vec();
            let digit = *remaining.last().unwrap();
            let product = Value::from(digit) * mulval;
            let mut shifted = digits_of(product);
            shifted.extend(std::iter::repeat(0).take(p0));
            lists.push(shifted.clone());
            digit_steps.push(MulDigitStep {
                remaining,
                digit,
                product,
                p0,
                shifted,
                adv_index: p0 + 1,
            });
        }
        let add_chain = (lists.len() > 1).then(|| multi_add_digit_chain(&lists));
        let result_digits = match &add_chain {
            Some(c) => c.final_digits.clone(),
            None => lists[0].clone(),
        };
        groups.push(GroupProduct {
            index: gi + 1,
            group_digits: digits.clone(),
            digit_steps,
            add_chain,
            result_digits,
        });
    }

    let shifted: Vec<Vec<u8>> = groups
        .iter()
        .map(|g| {
            let mut s = g.result_digits.clone();
            s.extend(std::iter::repeat(0).take(3 * (n_groups - g.index)));
            s
        })
        .collect();
    let combine = (n_groups > 1).then(|| multi_add_digit_chain(&shifted));
    let final_digits = match &combine {
        Some(c) => c.final_digits.clone(),
        None => shifted[0].clone(),
    };
    let value = value_of_digits(&final_digits);
    debug_assert_eq!(value, a * b, "trace must reconstruct the product");

    MulTrace {
        a,
        b,
        split_first,
        split_digits,
        mulval,
        leftover_len,
        n_groups,
        groups,
        shifted,
        combine,
        final_digits,
        value,
    }
}
