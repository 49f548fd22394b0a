//! Parity block renderers: the element-by-element running-sum dialect, the
//! compact scratchpad form, and few-shot answers.

use crate::numerics::parity_trace;

use super::fmt::comma_space_list;

/// `What is the parity on the list a=[1, 1, 0, 1, 0]?`
pub fn parity_question(bits: &[u8]) -> String {
    format!("What is the parity on the list a={}?", comma_space_list(bits))
}

/// One worked parity problem walking the list element by element.
pub fn parity_algorithmic_block(bits: &[u8]) -> String {
    let tr = parity_trace(bits);
    let mut lines = vec![format!("Q: {}\nA: We initialize s=", parity_question(bits))];
    for s in &tr.steps {
        lines.push(format!(
            "a={}. The first element of a is {b} so b={b}. s = s + b = {} + {b} = {out}. s={out}.",
            comma_space_list(&s.remaining),
            s.s_in,
            b = s.bit,
            out = s.s_out,
        ));
    }
    lines.push(format!(
        "a=[] is empty. Since the list a is empty and we have s={p}, the parity is {p}.",
        p = tr.parity
    ));
    lines.join("\n")
}

/// One parity example showing only the running-sum sequence.
pub fn parity_scratchpad_block(bits: &[u8]) -> String {
    let tr = parity_trace(bits);
    let seq: Vec<u8> = tr.steps.iter().map(|s| s.s_out).collect();
    format!(
        "Q: {}\nA: {}, the parity is {}.",
        parity_question(bits),
        comma_space_list(&seq),
        tr.parity
    )
}

/// One bare-answer parity example.
pub fn parity_few_shot_block(bits: &[u8]) -> String {
    let tr = parity_trace(bits);
    format!("Q: {}\nA: {}.", parity_question(bits), tr.parity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithmic_block_matches_worked_example() {
        assert_eq!(
            parity_algorithmic_block(&[1, 1, 0, 1, 0]),
            include_str!("../../fixtures/prompts/parity_algorithmic_block1.txt")
        );
    }

    #[test]
    fn scratchpad_blocks_match_worked_examples() {
        let joined = format!(
            "{}\n{}",
            parity_scratchpad_block(&[1, 1, 0, 1, 0]),
            parity_scratchpad_block(&[0, 1, 1, 0, 0, 0, 0, 0])
        );
        assert_eq!(
            joined,
            include_str!("../../fixtures/prompts/parity_scratchpad.txt")
        );
    }

    #[test]
    fn few_shot_block_shape() {
        assert_eq!(
            parity_few_shot_block(&[1, 0, 1]),
            "Q: What is the parity on the list a=[1, 0, 1]?\nA: 0."
        );
    }
}
