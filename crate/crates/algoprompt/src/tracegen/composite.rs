//! Prompt blocks for operator chains: multi-operand addition, products
//! rewritten as repeated addition, their chain-of-thought and few-shot
//! baselines, and calculator-call dialogues.
//!
//! A chain block plans its pairwise subproblems up front ("The subproblems
//! are 802+7145=ANS1 and ANS1+6=ANS2.") and then works each one with the
//! full column-by-column addition prose, carrying every intermediate result
//! into the next subproblem as `ANS{k}`.

use crate::numerics::{
    add_trace, digits_of, mul_as_add_trace, multi_add_trace, value_of_digits, ChainTrace,
    MulAsAdd, Value,
};

use super::addition::{
    ending, place_parts, prose_header, step_text, ChainStyle, Ending, StepOpts,
};
use super::fmt::{digit_list, operator_clause};
use super::multiplication::{cap_first, join_and};

/// Column-step layout shared by every chain subproblem and the plain
/// two-operand blocks that accompany them.
const CHAIN_STEP: StepOpts = StepOpts {
    prefix: true,
    by_operand: false,
    explicit_carry: true,
    missing_zero: false,
    shift_delta: 0,
};

fn lhs_name(names: &[String], step_index: usize) -> String {
    if step_index == 1 { names[0].clone() } else { format!("ANS{}", step_index - 1) }
}

/// The subproblem plan plus one worked section per pairwise addition.
/// `close_extra` is appended inside the last subproblem's closing sentence
/// (used by rewritten products to also close their `MS` wrapper).
fn chain_section_lines(
    chain: &ChainTrace,
    names: &[String],
    close_extra: Option<&str>,
) -> Vec<String> {
    let n_ops = chain.steps.len();
    let mut lines = Vec::new();
    let plan: Vec<String> = chain
        .steps
        .iter()
        .map(|st| format!("{}+{}=ANS{}", lhs_name(names, st.index), names[st.index], st.index))
        .collect();
    lines.push(format!(
        "The subproblems are {}. {}.",
        join_and(&plan),
        cap_first(&operator_clause(n_ops, ""))
    ));
    for st in &chain.steps {
        let k = st.index;
        let lhs = lhs_name(names, k);
        lines.push(format!("Subproblem: {lhs}+{}=ANS{k}", names[k]));
        lines.push(prose_header(&lhs, &names[k], &st.trace, true, false));
        for s in &st.trace.steps {
            lines.push(step_text(s, &CHAIN_STEP));
        }
        let extra = if k == n_ops { close_extra } else { None };
        lines.push(ending(
            &st.trace,
            Ending::Sub { n_ops, idx: k, style: ChainStyle::Composite { close_extra: extra } },
        ));
    }
    lines
}

/// Free-standing two-operand addition block in the chain dialect: same
/// prose as the standard block, but the close names no operators.
pub fn plain_addition_block(a: Value, b: Value) -> String {
    let tr = add_trace(a, b);
    let mut lines = vec![format!("Problem: {a}+{b}="), "Explanation:".to_string()];
    lines.push(prose_header(&a.to_string(), &b.to_string(), &tr, false, false));
    for s in &tr.steps {
        lines.push(step_text(s, &CHAIN_STEP));
    }
    lines.push(ending(&tr, Ending::Standalone { operators_sentence: false }));
    lines.join("\n")
}

/// Multi-operand addition worked as a chain of pairwise subproblems.
/// Two operands yield a single-subproblem chain.
pub fn multiadd_chain_block(values: &[Value]) -> String {
    let chain = multi_add_trace(values);
    let names: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let mut lines = vec![format!("Problem: {}=", names.join("+")), "Explanation:".to_string()];
    lines.extend(chain_section_lines(&chain, &names, None));
    lines.join("\n")
}

/// The sentence rewriting `a*b` as repeated addition of the larger factor.
fn rewrite_sentence(t: &MulAsAdd) -> String {
    let reps = vec![t.big.to_string(); t.count].join("+");
    format!(
        "Since the problem is multiplication, we find the smaller of the two numbers and add the \
         larger number as many times as the smaller number. The first number is {a}, \
         FN={fl}={a}. The second number is {b}, SN={sl}={b}. Since {small} is smaller than \
         {big}, we rewrite the problem as {big} summed together {small} times: {reps}. We end at \
         ANS({count}-1)={last}=ANS{last}.",
        a = t.a,
        b = t.b,
        fl = digit_list(&digits_of(t.a)),
        sl = digit_list(&digits_of(t.b)),
        small = t.small,
        big = t.big,
        count = t.count,
        last = t.count - 1,
    )
}

/// Direct close for a product whose repeat count is 0 or 1, where no
/// addition chain exists to carry the result.
fn direct_product_close(t: &MulAsAdd) -> String {
    format!(
        "Since {} is {}, the product is direct: {}*{}={v}. Since there is 1 * operator and we \
         processed up to MS1, the overall problem is complete. The final Answer is {}.",
        t.small,
        t.count,
        t.a,
        t.b,
        digit_list(&digits_of(t.value)),
        v = t.value,
    )
}

/// Multiplication rewritten as a repeated-addition chain inside an `MS`
/// wrapper, closing both the chain and the wrapper.
pub fn mulasadd_block(a: Value, b: Value) -> String {
    let t = mul_as_add_trace(a, b);
    let mut lines = vec![
        format!("Problem: {a}*{b}="),
        "Explanation:".to_string(),
        format!("The subproblems are {a}*{b}=MS1. {}.", cap_first(&operator_clause(1, "*"))),
        format!("Subproblem: {a}*{b}=MS1"),
    ];
    match &t.chain {
        Some(chain) => {
            lines.push(rewrite_sentence(&t));
            let names: Vec<String> = vec![t.big.to_string(); t.count];
            let extra = " Since there is 1 * operator and we processed up to MS1, the overall \
                         problem is complete.";
            lines.extend(chain_section_lines(chain, &names, Some(extra)));
        }
        None => lines.push(direct_product_close(&t)),
    }
    lines.join("\n")
}

/// Chain-of-thought block folding a multi-operand sum pairwise.
pub fn multiadd_cot_block(values: &[Value]) -> String {
    let names: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let q = names.join("+");
    let total: Value = values.iter().sum();
    let mut lines = vec![format!("Q: {q}="), "A: Let's think step by step.".to_string()];
    let mut acc = values[0];
    for v in &values[1..] {
        lines.push(format!("{acc}+{v}={}", acc + v));
        acc += v;
    }
    lines.push(format!("So, {q}={total}. The answer is {total}."));
    lines.join("\n")
}

/// Chain-of-thought block for a product: the second factor is split by
/// decimal place, each part multiplied, and the parts folded pairwise.
pub fn mulasadd_cot_block(a: Value, b: Value) -> String {
    let q = format!("{a}*{b}");
    let total = a * b;
    let parts = place_parts(b, 10);
    let mut lines = vec![format!("Q: {q}="), "A: Let's think step by step.".to_string()];
    if parts.len() == 1 {
        lines.push(format!("{q}={total}"));
    } else {
        for p in &parts {
            lines.push(format!("{a}*{p}={}", a * p));
        }
        let mut acc = a * parts[0];
        for p in &parts[1..] {
            lines.push(format!("{acc}+{}={}", a * p, acc + a * p));
            acc += a * p;
        }
    }
    lines.push(format!("So, {q}={total}. The answer is {total}."));
    lines.join("\n")
}

/// Plain few-shot block for a multi-operand sum.
pub fn multiadd_few_shot_block(values: &[Value]) -> String {
    let names: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let total: Value = values.iter().sum();
    format!("Q: {}=\nA: {total}.", names.join("+"))
}

/// The plan line of a calculator-call dialogue, which counts operators by
/// naming the last planned result.
fn toolcall_plan_line(chain: &ChainTrace, names: &[String]) -> String {
    let n_ops = chain.steps.len();
    let plan: Vec<String> = chain
        .steps
        .iter()
        .map(|st| format!("{}+{}=ANS{}", lhs_name(names, st.index), names[st.index], st.index))
        .collect();
    format!(
        "The subproblems are {}. Since we ended on ANS_{n_ops}, {}.",
        join_and(&plan),
        operator_clause(n_ops, "")
    )
}

/// One line per subproblem with both inputs resolved to values and the
/// result supplied after a `⟨GET⟩` calculator call.
fn toolcall_chain_lines(chain: &ChainTrace) -> Vec<String> {
    let n_ops = chain.steps.len();
    chain
        .steps
        .iter()
        .map(|st| {
            let lhs = value_of_digits(&st.fn_digits);
            let rhs = value_of_digits(&st.sn_digits);
            let res = value_of_digits(&st.result_digits);
            let k = st.index;
            let tail = if k == n_ops {
                format!("the problem is complete. The final Answer is {res}.")
            } else {
                "there are more operators to process.".to_string()
            };
            format!(
                "Subproblem: {lhs}+{rhs}\u{27E8}GET\u{27E9}={res}. Since {} and we processed up \
                 to ANS{k}, {tail}",
                operator_clause(n_ops, "")
            )
        })
        .collect()
}

/// Calculator-call dialogue for a multi-operand sum.
pub fn toolcall_multiadd_block(values: &[Value]) -> String {
    let chain = multi_add_trace(values);
    let names: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let mut lines = vec![format!("Problem: {}=", names.join("+")), "Explanation:".to_string()];
    lines.push(toolcall_plan_line(&chain, &names));
    lines.extend(toolcall_chain_lines(&chain));
    lines.join("\n")
}

/// Calculator-call dialogue for a product rewritten as repeated addition.
pub fn toolcall_mulasadd_block(a: Value, b: Value) -> String {
    let t = mul_as_add_trace(a, b);
    let mut lines = vec![format!("Problem: {a}*{b}="), "Explanation:".to_string()];
    match &t.chain {
        Some(chain) => {
            lines.push(rewrite_sentence(&t));
            let names: Vec<String> = vec![t.big.to_string(); t.count];
            lines.push(toolcall_plan_line(chain, &names));
            lines.extend(toolcall_chain_lines(chain));
        }
        None => {
            lines.push(format!(
                "Since {} is {}, the product is direct: {a}*{b}={v}. The final Answer is {v}.",
                t.small,
                t.count,
                v = t.value,
            ));
        }
    }
    lines.join("\n")
}
