//! Combined addition–subtraction block renderer: signed column steps
//! followed by the borrow-normalization pass over the raw digit answer.

use crate::numerics::{sub_trace, SignedPair, SubNormStep, SubRawStep, SubTrace, Value};

use super::addition::term_chain;
use super::fmt::{compare10, digit_list, digits_word, marked_list, mod10, signed_list};

/// `[4,8,3]` or `-[3,8,9]` — an operand digit list with its sign prefix
/// (kept even when the list is empty: `-[]`).
fn signed_digits(digits: &[u8], neg: bool) -> String {
    format!("{}{}", if neg { "-" } else { "" }, digit_list(digits))
}

/// One worked signed-pair problem in the combined dialect.
pub fn addsub_algorithmic_block(a: Value, b: Value) -> String {
    let tr = sub_trace(SignedPair { fn_value: a, sn_value: b });
    let mut lines = vec![
        format!("Problem: {}=", term_chain(&[a, b])),
        "Explanation:".to_string(),
        header(&tr),
    ];
    for s in &tr.raw_steps {
        lines.push(raw_step(s, &tr));
    }
    lines.push(transition(&tr));
    if tr.has_negative {
        for s in &tr.norm_steps {
            lines.push(norm_step(s, &tr));
        }
        lines.push(norm_ending(&tr));
    }
    lines.join("\n")
}

fn header(tr: &SubTrace) -> String {
    let fl = signed_digits(&tr.fn_digits, tr.fn_neg);
    let sl = signed_digits(&tr.sn_digits, tr.sn_neg);
    format!(
        "The first number is {}, adding commas between each number, FN={fl}. \
         The second number is {}, adding commas between each number, SN={sl}. \
         FN {fl} has {}, SN {sl} has {}, max is {}.",
        tr.fn_value,
        tr.sn_value,
        digits_word(tr.fn_digits.len()),
        digits_word(tr.sn_digits.len()),
        tr.max_len
    )
}

fn raw_step(s: &SubRawStep, tr: &SubTrace) -> String {
    let fl = s.fn_remaining.len();
    let sl = s.sn_remaining.len();
    let fn_sign = if tr.fn_neg { "-" } else { "" };
    let sn_sign = if tr.sn_neg { "-" } else { "" };
    let fn_lookup = match s.fn_digit {
        Some(d) => format!("FN[{fl}]={fn_sign}{d}."),
        None => "FN[0]=empty.".to_string(),
    };
    let sn_lookup = match s.sn_digit {
        Some(d) => format!("SN[{sl}]={sn_sign}{d}."),
        None => "SN[0]=empty.".to_string(),
    };
    let fn_term = match s.fn_digit {
        Some(d) => format!("{fn_sign}{d}"),
        None => format!("{fn_sign}0"),
    };
    let sn_term = match s.sn_digit {
        Some(d) => format!("{}{d}", if tr.sn_neg { "-" } else { "+" }),
        None => format!("{}0", if tr.sn_neg { "-" } else { "+" }),
    };
    let v = s.value as i64;
    let d = s.digit as i64;
    format!(
        "Len(FN)={fl}. FN={flist}. {fn_lookup} Len(SN)={sl}. SN={slist}. {sn_lookup} \
         C[{col}]={ci}. Since {fn_term}{sn_term}{ci:+}={v}, {cmp}, {md}. Len(A)={al}. A={alist}. \
         Since ({v}-{d})/10={co}, C[{prev}]={co}.",
        flist = signed_digits(&s.fn_remaining, tr.fn_neg),
        slist = signed_digits(&s.sn_remaining, tr.sn_neg),
        col = s.column,
        ci = s.carry_in,
        cmp = compare10(v),
        md = mod10(v, d),
        al = s.answer_after.len(),
        alist = signed_list(&s.answer_after),
        co = s.carry_out,
        prev = s.column - 1,
    )
}

fn transition(tr: &SubTrace) -> String {
    let mut t = format!(
        "Len(FN)=0. FN={}. FN[0]=empty. Len(SN)=0. SN={}. SN[0]=empty. \
         Since both FN and SN are empty, next. ",
        signed_digits(&[], tr.fn_neg),
        signed_digits(&[], tr.sn_neg)
    );
    if tr.carry_prepended {
        let c = tr.final_carry;
        t.push_str(&format!(
            "Since C[0]={c}, we add C[0]={c} to the front of A. A={}. ",
            signed_list(&tr.raw_answer)
        ));
    } else {
        t.push_str("Since C[0]=0, the steps are done. ");
    }
    if !tr.has_negative {
        t.push_str(&format!(
            "Since there are no - in A, the problem is complete. The final Answer is {}.",
            digit_list(&tr.final_digits)
        ));
    } else {
        let d = tr.raw_answer[0];
        let mut check =
            format!("Since there are - in A, we check the sign of the last step A[1]={d}. ");
        // Leading zeros are sign-neutral: keep checking until a signed
        // digit decides.
        let mut idx = 0;
        while tr.raw_answer[idx] == 0 && idx + 1 < tr.raw_answer.len() {
            check.push_str(&format!(
                "Since 0 is zero, we check the sign of A[{}]={}. ",
                idx + 2,
                tr.raw_answer[idx + 1]
            ));
            idx += 1;
        }
        let decisive = tr.raw_answer[idx];
        let verdict = if tr.negate {
            format!("Since {decisive} is neg, we change the sign and process A from right to left.")
        } else {
            format!("Since {decisive} is non-neg, we process A from right to left.")
        };
        t.push_str(&format!(
            "{check}{verdict} A={}={}{}. C[{}]=0.",
            signed_list(&tr.raw_answer),
            if tr.negate { "-" } else { "" },
            marked_list(&tr.flipped),
            tr.raw_answer.len()
        ));
    }
    t
}

fn norm_step(s: &SubNormStep, tr: &SubTrace) -> String {
    let k = s.index;
    let neg = if tr.negate { "-" } else { "" };
    let d = s.digit;
    let decision = if d < 0 {
        format!("Since {d}<0, B=10, C[{}]=-1.", k - 1)
    } else if d == 0 {
        format!("Since +0 is 0, B=0, C[{}]=0.", k - 1)
    } else {
        format!("Since +{d}>0, B=0, C[{}]=0.", k - 1)
    };
    let mut eq = format!(
        "Since C[{k}]={ci}, thus {d}+{b}{ci:+}={ft}",
        ci = s.carry_in,
        b = s.b,
        ft = s.first_try
    );
    if s.retried {
        eq.push_str(&format!(
            ", which is neg, thus repeat with B=10, C[{}]=-1. {}+10+0={}.",
            k - 1,
            s.first_try,
            s.out_digit
        ));
    } else {
        eq.push('.');
    }
    format!(
        "Len(A)={k}. A={neg}{marked}. A[{k}]={d:+}. {decision} {eq} \
         Len(ANEW)={n}. ANEW={neg}{anew}. C[{prev}]={co}.",
        marked = marked_list(&s.a_remaining),
        n = s.anew_after.len(),
        anew = digit_list(&s.anew_after),
        prev = k - 1,
        co = s.carry_out,
    )
}

fn norm_ending(tr: &SubTrace) -> String {
    let neg = if tr.negate { "-" } else { "" };
    format!(
        "Len(A)=0. A={neg}[]. Since A is empty, the problem is complete. \
         The final Answer is {neg}{}.",
        digit_list(&tr.final_digits)
    )
}
