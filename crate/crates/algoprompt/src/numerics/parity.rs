//! Parity-of-a-bit-list traces.
//!
//! The written algorithm folds the list left to right, keeping a running
//! sum modulo 2; each step pops the first element and updates the sum.

/// One parity step: consume the first remaining bit and update `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityStep {
    /// Bits still unprocessed before this step (the first is consumed).
    pub remaining: Vec<u8>,
    /// The bit consumed (`b`).
    pub bit: u8,
    /// Running parity before the step.
    pub s_in: u8,
    /// Running parity after the step: `(s_in + bit) % 2`.
    pub s_out: u8,
}

/// Full parity trace over a bit list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityTrace {
    pub bits: Vec<u8>,
    pub steps: Vec<ParityStep>,
    /// Final parity of the list.
    pub parity: u8,
}

/// Trace the parity computation over `bits` (each must be 0 or 1).
pub fn parity_trace(bits: &[u8]) -> ParityTrace {
    assert!(bits.iter().all(|&b| b <= 1), "parity input must be bits");
    let mut steps = Vec::with_capacity(bits.len());
    let mut s = 0u8;
    for i in 0..bits.len() {
        let bit = bits[i];
        let s_out = (s + bit) % 2;
        steps.push(ParityStep { remaining: bits[i..].to_vec(), bit, s_in: s, s_out });
        s = s_out;
    }
    debug_assert_eq!(s, bits.iter().sum::<u8>() % 2);
    ParityTrace { bits: bits.to_vec(), steps, parity: s }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_bit_list() {
        let t = parity_trace(&[1, 1, 0, 1, 0]);
        assert_eq!(t.parity, 1);
        let s: Vec<u8> = t.steps.iter().map(|s| s.s_out).collect();
        assert_eq!(s, vec![1, 0, 0, 1, 1]);
        assert_eq!(t.steps[1].remaining, vec![1, 0, 1, 0]);
        assert_eq!((t.steps[1].s_in, t.steps[1].bit, t.steps[1].s_out), (1, 1, 0));
    }

    #[test]
    fn eight_bit_list() {
        let t = parity_trace(&[0, 1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(t.parity, 0);
        let s: Vec<u8> = t.steps.iter().map(|s| s.s_out).collect();
        assert_eq!(s, vec![0, 1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn empty_list_has_even_parity() {
        let t = parity_trace(&[]);
        assert!(t.steps.is_empty());
        assert_eq!(t.parity, 0);
    }

    #[test]
    fn exhaustive_up_to_twelve_bits() {
        for len in 0..=12usize {
            for mask in 0u32..(1 << len) {
                let bits: Vec<u8> =
                    (0..len).map(|i| ((mask >> i) & 1) as u8).collect();
                let t = parity_trace(&bits);
                assert_eq!(u32::from(t.parity), mask.count_ones() % 2);
            }
        }
    }
}
