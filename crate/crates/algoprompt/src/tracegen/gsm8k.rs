//! Word-problem prompt assets and the addition-chain dialect used inside
//! their worked solutions.
//!
//! Word problems are answered with a fixed instruction prompt that mixes
//! flagged direct answers with flagged algorithmic answers; the algorithmic
//! answers embed addition chains rendered by [`word_chain_block`].

use super::addition::{ending, prose_header, step_text, ChainStyle, Ending, StepOpts};
use super::fmt::operator_clause;
use super::multiplication::cap_first;
use crate::numerics::{multi_add_trace, ChainTrace, Value};

/// Step layout for word-problem chains: per-operand length prefixes, global
/// column indices, and explicit zeros for exhausted operands.
const WORD_STEP: StepOpts = StepOpts {
    prefix: true,
    by_operand: true,
    explicit_carry: true,
    missing_zero: true,
    shift_delta: 0,
};

fn lhs_name(names: &[String], k: usize) -> String {
    if k == 1 {
        names[0].clone()
    } else {
        format!("ANS{}", k - 1)
    }
}

fn chain_lines(chain: &ChainTrace, names: &[String]) -> Vec<String> {
    let n_ops = chain.steps.len();
    let mut lines = Vec::new();
    let plan: Vec<String> = chain
        .steps
        .iter()
        .map(|st| format!("{}+{}=ANS{}", lhs_name(names, st.index), names[st.index], st.index))
        .collect();
    lines.push(format!(
        "The subproblems are {}. {}.",
        plan.join(", "),
        cap_first(&operator_clause(n_ops, "connecting"))
    ));
    for st in &chain.steps {
        let k = st.index;
        let lhs = lhs_name(names, k);
        lines.push(format!("Subproblem: {lhs}+{}=ANS{k}", names[k]));
        lines.push(prose_header(&lhs, &names[k], &st.trace, false, true));
        for s in &st.trace.steps {
            lines.push(step_text(s, &WORD_STEP));
        }
        lines.push(ending(
            &st.trace,
            Ending::Sub { n_ops, idx: k, style: ChainStyle::WordProblem },
        ));
    }
    lines
}

/// A full addition-chain block in the word-problem dialect: every operand of
/// the sum is folded in left to right, results feed the next step as its
/// first number, and the close repeats the answer without list commas.
pub fn word_chain_block(values: &[Value]) -> String {
    let chain = multi_add_trace(values);
    let names: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let mut lines = vec![format!("Problem: {}=", names.join("+")), "Explanation:".to_string()];
    lines.extend(chain_lines(&chain, &names));
    lines.join("\n")
}

/// The fixed instruction prompt for word problems: question/answer pairs in
/// which each answer opens with a routing marker and algorithmic answers
/// embed [`word_chain_block`] traces.
pub fn word_problem_prompt_text() -> &'static str {
    include_str!("../../fixtures/prompts/gsm8k_full.txt")
}
