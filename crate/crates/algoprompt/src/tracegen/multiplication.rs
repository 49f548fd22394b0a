//! Grouped long-multiplication prompt blocks, plus the multiplication
//! chain-of-thought and few-shot baselines.
//!
//! The written dialogue mirrors [`crate::numerics::mul_trace`]: the longer
//! factor is split into a leftover group plus groups of three digits, each
//! group is multiplied digit by digit against the other factor (`MULVAL`)
//! producing `ADV` lists that are summed in a nested addition dialogue, and
//! the shifted group results are combined in a final `MA` addition dialogue.

use std::fmt::Write as _;

use crate::numerics::{digits_of, mul_trace, ChainTrace, MulDigitStep, MulTrace, Value};

use super::addition::{place_parts, symbols_step};
use super::fmt::digit_list;

/// Digits concatenated with no punctuation, leading zeros kept: `[0,3,5]`
/// renders as `035`.
pub(super) fn digit_string(digits: &[u8]) -> String {
    digits.iter().map(|d| char::from(b'0' + d)).collect()
}

/// `n` zero digits as a bracketed list: `[]`, `[0]`, `[0,0]`, ...
fn zeros_list(n: usize) -> String {
    digit_list(&vec![0; n])
}

/// Comma list with " and " before the last item.
pub(super) fn join_and(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}

pub(super) fn cap_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Operator-count clause: "there is 1 add operator" / "there are 2 add
/// operators", with the count and noun transposed ("there are add 2
/// operators") in the closing line of an ADV summation.
pub(super) fn ops_clause(n: usize, noun: &str, transposed: bool) -> String {
    match (n, transposed) {
        (1, false) => format!("there is 1 {noun} operator"),
        (1, true) => format!("there is {noun} 1 operator"),
        (_, false) => format!("there are {n} {noun} operators"),
        (_, true) => format!("there are {noun} {n} operators"),
    }
}

/// Render a left-fold addition chain in the compact lookup dialect used
/// inside multiplication: a problem line over the named operands, a
/// subproblem plan, and one `Subproblem:` section per pairwise addition.
///
/// `noun` names the operators ("add" for ADV summations, "MA" for the final
/// combine); the last close transposes the clause and announces the result
/// with `final_label` ("The final ADDAnswer is" / "The END Answer is").
fn compact_chain_lines(
    chain: &ChainTrace,
    names: &[String],
    problem_label: &str,
    noun: &str,
    final_transposed: bool,
    final_label: &str,
) -> Vec<String> {
    let n_ops = chain.steps.len();
    let mut lines = Vec::new();
    lines.push(format!("{problem_label}: {}=", names.join("+")));
    lines.push("Explanation:".to_string());
    let plan: Vec<String> = chain
        .steps
        .iter()
        .map(|st| format!("{}+{}=ANS{}", lhs_name(names, st.index), names[st.index], st.index))
        .collect();
    lines.push(format!(
        "The subproblems are {}. {}.",
        plan.join(", "),
        cap_first(&ops_clause(n_ops, noun, false))
    ));
    for st in &chain.steps {
        let k = st.index;
        let (lhs, rhs) = (lhs_name(names, k), names[k].as_str());
        lines.push(format!("Subproblem: {lhs}+{rhs}=ANS{k}"));
        lines.push(format!(
            "FN={lhs}, FN={}. SN={rhs}, SN={}. Len(FN)={}, Len(SN)={}, max len is {}.",
            digit_list(&st.fn_digits),
            digit_list(&st.sn_digits),
            st.fn_digits.len(),
            st.sn_digits.len(),
            st.fn_digits.len().max(st.sn_digits.len()),
        ));
        for step in &st.trace.steps {
            lines.push(symbols_step(step, "Len", false));
        }
        let mut close = "Len(FN)=0. FN=[]. Len(SN)=0. SN=[]. Both are empty. ".to_string();
        if st.trace.overflow {
            write!(
                close,
                "C[0]=1. Not done. Len(A)={}. ANS{k}={}. ",
                st.result_digits.len(),
                digit_list(&st.result_digits)
            )
            .unwrap();
        } else {
            write!(close, "C[0]=0. Done. ANS{k}={}. ", digit_list(&st.result_digits)).unwrap();
        }
        if k < n_ops {
            write!(
                close,
                "Since {} and we processed up to ANS{k}, continue. The new FN is {}.",
                ops_clause(n_ops, noun, false),
                digit_list(&st.result_digits)
            )
            .unwrap();
        } else {
            write!(
                close,
                "Since {} and we processed up to ANS{k}, complete. {final_label} {}.",
                ops_clause(n_ops, noun, final_transposed),
                digit_list(&st.result_digits)
            )
            .unwrap();
        }
        lines.push(close);
    }
    lines
}

fn lhs_name(names: &[String], step_index: usize) -> String {
    if step_index == 1 { names[0].clone() } else { format!("ANS{}", step_index - 1) }
}

/// The long opening paragraph: operand digit lists, picking the factor to
/// split, breaking it into leftover and main groups, and naming `MULVAL`.
fn mult_header(t: &MulTrace, a: Value, b: Value) -> String {
    let a_digits = digits_of(a);
    let b_digits = digits_of(b);
    let (n, m) = (a_digits.len(), b_digits.len());
    let mut s = format!(
        "FN={a}, FN={}. SN={b}, SN={}. Len(FN)={n}, Len(SN)={m}. Max len is {}.",
        digit_list(&a_digits),
        digit_list(&b_digits),
        n.max(m)
    );

    let l = t.split_digits.len();
    let (g, r) = (l / 3, l % 3);
    let split_list = digit_list(&t.split_digits);
    let pick = if n == m {
        format!("Since {n}={m}, the lengths of two numbers are equal, we pick FN")
    } else if n > m {
        format!("Since {n}>{m}, the length of FN is larger, we pick FN")
    } else {
        format!("Since {n}<{m}, the length of SN is larger, we pick SN")
    };
    write!(
        s,
        " {pick} and break {split_list} into {l}//3={g} group{} of three and one group of \
         {l}%3={r} leftover digits.",
        if g == 1 { "" } else { "s" }
    )
    .unwrap();

    let left = &t.split_digits[..r];
    let main = &t.split_digits[r..];
    let left_str = if left.is_empty() { "[]=empty".to_string() } else { digit_list(left) };
    let main_str = if main.is_empty() { "[]=empty".to_string() } else { digit_list(main) };
    if r == 1 {
        write!(
            s,
            " Since there is 1 leftover digit, from {split_list} we break the first 1 digit as \
             {}{}, thus the leftover group is {left_str} and the main group is {main_str}.",
            digit_list(left),
            digit_list(main)
        )
        .unwrap();
    } else {
        write!(
            s,
            " Since there are {r} leftover digits, from {split_list} we break the first {r} \
             digits as {}{}, thus the leftover group is {left_str} and the main group is \
             {main_str}.",
            digit_list(left),
            digit_list(main)
        )
        .unwrap();
    }

    if g >= 1 {
        let chunk_lists: Vec<String> = main.chunks(3).map(digit_list).collect();
        if g == 1 {
            write!(
                s,
                " Since there is {l}//3=1 group of three, we break the main group into 1 group \
                 of 3 each: {}.",
                chunk_lists.join(",")
            )
            .unwrap();
        } else {
            write!(
                s,
                " Since there are {l}//3={g} groups of three, we break the main group into {g} \
                 groups of 3 each: {}.",
                chunk_lists.join(",")
            )
            .unwrap();
        }
        let reformatted: Vec<String> = main.chunks(3).map(digit_string).collect();
        write!(s, " Reformatting for each main group, we have {}.", reformatted.join(", "))
            .unwrap();
    }

    let group_names: Vec<String> =
        t.groups.iter().map(|grp| digit_string(&grp.group_digits)).collect();
    let ignoring = if r == 0 || g == 0 { "ignoring the empty group, " } else { "" };
    write!(s, " Thus, {ignoring}the groups are {}.", group_names.join(", ")).unwrap();
    write!(s, " The other number is the MULVAL, thus MULVAL={}.", t.mulval).unwrap();
    s
}

/// One digit-product line inside a group: lookup, product, and the zero
/// padding that turns the product into this step's `ADV` list.
fn digit_step_line(s: &MulDigitStep, mulval: Value) -> String {
    let l = s.remaining.len();
    let product_digits = &s.shifted[..s.shifted.len() - s.p0];
    let to_part = if s.p0 == 0 {
        format!("{}[]", digit_list(product_digits))
    } else {
        format!(
            "[{}|{}]",
            digit_string_commas(product_digits),
            digit_string_commas(&vec![0; s.p0])
        )
    };
    format!(
        "Len(FN)={l}. FN={}. FN[{l}]={}. {}*{mulval}={}. P0={}, append {} zero {} to {to_part}: \
         {}=ADV{}.",
        digit_list(&s.remaining),
        s.digit,
        s.digit,
        s.product,
        s.p0,
        s.p0,
        zeros_list(s.p0),
        digit_list(&s.shifted),
        s.adv_index
    )
}

fn digit_string_commas(digits: &[u8]) -> String {
    digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

/// The full grouped-multiplication dialogue for `a*b`, starting at the
/// `Q:` line.
pub fn multiplication_algorithmic_block(a: Value, b: Value) -> String {
    let t = mul_trace(a, b);
    let g = t.n_groups;
    let mut lines: Vec<String> = Vec::new();
    lines.push(format!("Q: {a}*{b}="));
    lines.push("Explanation:".to_string());
    lines.push(mult_header(&t, a, b));

    let submuls: Vec<String> = t
        .groups
        .iter()
        .map(|grp| format!("{}*{}=MUL{}", digit_string(&grp.group_digits), t.mulval, grp.index))
        .collect();
    lines.push(format!(
        "The submulproblems are {}. {}.",
        join_and(&submuls),
        cap_first(&ops_clause(g, "mul", false))
    ));

    for grp in &t.groups {
        let gstr = digit_string(&grp.group_digits);
        lines.push("**START**".to_string());
        lines.push(format!("Submulproblem: {gstr}*{}=MUL{}", t.mulval, grp.index));
        lines.push(format!(
            "FN={gstr}, FN={}. Mulval={}. Len(FN)={}. P0=0.",
            digit_list(&grp.group_digits),
            t.mulval,
            grp.group_digits.len()
        ));
        for ds in &grp.digit_steps {
            lines.push(digit_step_line(ds, t.mulval));
        }
        lines.push("Len(FN)=0. Done.".to_string());
        if let Some(chain) = &grp.add_chain {
            lines.push("++START++".to_string());
            let names: Vec<String> =
                (1..=chain.operands.len()).map(|i| format!("ADV{i}")).collect();
            lines.extend(compact_chain_lines(
                chain,
                &names,
                "Addition Problem",
                "add",
                true,
                "The final ADDAnswer is",
            ));
            lines.push("++END++".to_string());
        }
        lines.push("**END**".to_string());
        lines.push(format!(
            "MUL{k}={}. Since {} and we processed up to MUL{k}, {}",
            digit_list(&grp.result_digits),
            ops_clause(g, "mul", false),
            if grp.index == g { "complete." } else { "continue." },
            k = grp.index,
        ));
    }

    lines.push("We now combine the MUL results.".to_string());
    for grp in &t.groups {
        let k = grp.index;
        let z = 3 * (g - k);
        lines.push(format!(
            "Since {g} mul operator{}, we append 3*({g}-{k})=3*{}={z} zeros to MUL{k}, \
             MUL{k}={}{}={}.",
            if g == 1 { "" } else { "s" },
            g - k,
            digit_list(&grp.result_digits),
            zeros_list(z),
            digit_list(&t.shifted[k - 1]),
        ));
    }

    if g == 1 {
        let list = digit_list(&t.final_digits);
        lines.push("Addition Mul Problem: MUL1+EMPTY=".to_string());
        lines.push("Explanation:".to_string());
        lines.push("The subproblems are MUL1+EMPTY=ANS1. There is 1 MA operator.".to_string());
        lines.push(format!(
            "Since EMPTY is in the equation, ANS1=MUL1={list}. Since there is 1 MA operator and \
             we processed up to ANS1, complete. The END Answer is {list}."
        ));
    } else {
        let names: Vec<String> = (1..=g).map(|i| format!("MUL{i}")).collect();
        lines.extend(compact_chain_lines(
            t.combine.as_ref().expect("multi-group trace has a combine chain"),
            &names,
            "Addition Mul Problem",
            "MA",
            false,
            "The END Answer is",
        ));
    }

    lines.join("\n")
}

/// Chain-of-thought block for `a*b`: the longer factor (ties pick the
/// second) is split by decimal place and the partial products are summed.
pub fn mult_cot_block(a: Value, b: Value) -> String {
    let q = format!("{a}*{b}");
    let total = a * b;
    let split_first = a.to_string().len() > b.to_string().len();
    let split_val = if split_first { a } else { b };
    let parts = place_parts(split_val, 10);

    let mut lines = vec![format!("Q: {q}=?"), "A: Let's think step by step.".to_string()];
    if parts.len() == 1 {
        lines.push(format!("{q}={total}"));
    } else if split_first {
        let prods: Vec<String> = parts.iter().map(|p| format!("{p}*{b}")).collect();
        lines.push(format!("{q}={}", prods.join("+")));
        let vals: Vec<String> = parts.iter().map(|p| (p * b).to_string()).collect();
        lines.push(format!("{q}={}", vals.join("+")));
        lines.push(format!("{q}={total}"));
    } else {
        let part_strs: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
        lines.push(format!("{q}={a}*({})", part_strs.join("+")));
        let prods: Vec<String> = parts.iter().map(|p| format!("{a}*{p}")).collect();
        lines.push(format!("{q}={}", prods.join("+")));
        let vals: Vec<String> = parts.iter().map(|p| (a * p).to_string()).collect();
        lines.push(format!("{q}={}", vals.join("+")));
        lines.push(format!("{q}={total}"));
    }
    lines.push(format!("So, {q}={total}. The answer is {total}."));
    lines.join("\n")
}

/// Plain few-shot block for `a*b`.
pub fn mult_few_shot_block(a: Value, b: Value) -> String {
    format!("Q: {a}*{b}=\nA: {}.", a * b)
}
