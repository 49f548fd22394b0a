//! Addition-family block renderers: the step-by-step prose dialect with its
//! ablation variants, the compact symbolic form, scratchpad formats,
//! chain-of-thought decomposition, few-shot answers, and the fixed
//! instruction preamble.

use std::collections::BTreeSet;

use crate::numerics::{add_trace, AddStep, AddTrace, Value};

use super::fmt::{compare10, digit_list, digits_word, mod10, spaced};

/// Perturbation of the second summand's digit as *displayed* in step
/// equations. Derived values (sums, carries, the running answer) always keep
/// the true arithmetic; only the printed second term shifts by `delta`
/// (mod 10), and only where a real digit exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SnShift {
    /// No perturbation.
    None,
    /// Every step's second term is shifted.
    All(i8),
    /// Only the listed 1-based step numbers are shifted.
    Steps(BTreeSet<usize>, i8),
}

impl SnShift {
    /// Shift applied at 1-based step `step_no` (0 when untouched).
    pub fn delta_for(&self, step_no: usize) -> i8 {
        match self {
            SnShift::None => 0,
            SnShift::All(d) => *d,
            SnShift::Steps(set, d) => {
                if set.contains(&step_no) {
                    *d
                } else {
                    0
                }
            }
        }
    }

    /// Largest 1-based step this shift names explicitly (None for blanket
    /// variants), used to validate positions against a trace length.
    pub fn max_step(&self) -> Option<usize> {
        match self {
            SnShift::Steps(set, _) => set.iter().copied().max(),
            _ => None,
        }
    }
}

fn shift_digit(d: u8, delta: i8) -> u8 {
    (d as i16 + delta as i16).rem_euclid(10) as u8
}

/// Layout knobs for a single prose step sentence.
pub(super) struct StepOpts {
    /// Include the leading `Length of FN is …. FN=[…].` sentences.
    pub prefix: bool,
    /// Group each operand's length/list/lookup together (instead of both
    /// prefixes first, then both lookups).
    pub by_operand: bool,
    /// Spell out the comparison/modulus and the carry division.
    pub explicit_carry: bool,
    /// Render an exhausted operand as `FN[k]=0.` instead of `FN is empty.`
    pub missing_zero: bool,
    /// Displayed shift of the second term in this step's equation.
    pub shift_delta: i8,
}

pub(super) fn step_text(s: &AddStep, o: &StepOpts) -> String {
    let col = s.column;
    let fl = s.fn_remaining.len();
    let sl = s.sn_remaining.len();
    let flist = digit_list(&s.fn_remaining);
    let slist = digit_list(&s.sn_remaining);
    let fn_lookup = match s.fn_digit {
        Some(d) => format!("FN[{col}]={d}."),
        None if o.missing_zero => format!("FN[{col}]=0."),
        None => "FN is empty.".to_string(),
    };
    let sn_lookup = match s.sn_digit {
        Some(d) => format!("SN[{col}]={d}."),
        None if o.missing_zero => format!("SN[{col}]=0."),
        None => "SN is empty.".to_string(),
    };

    let mut t = String::new();
    if o.by_operand {
        t.push_str(&format!(
            "Length of FN is {fl}. FN={flist}. {fn_lookup} Length of SN is {sl}. SN={slist}. {sn_lookup} "
        ));
    } else {
        if o.prefix {
            t.push_str(&format!(
                "Length of FN is {fl}. FN={flist}. Length of SN is {sl}. SN={slist}. "
            ));
        }
        t.push_str(&format!("{fn_lookup} {sn_lookup} "));
    }
    t.push_str(&format!("C[{col}]={}. ", s.carry_in));

    let f_term = s.fn_digit.unwrap_or(0);
    let s_term = match s.sn_digit {
        Some(d) => shift_digit(d, o.shift_delta),
        None => 0,
    };
    let sum = s.sum as i64;
    let digit = s.answer_digit as i64;
    let eq = format!("{f_term}+{s_term}+{}={sum}", s.carry_in);
    if o.explicit_carry {
        t.push_str(&format!("Since {eq}, {}, {}. ", compare10(sum), mod10(sum, digit)));
    } else {
        t.push_str(&format!("Since {eq}. "));
    }
    t.push_str(&format!(
        "Length of A is {}. Thus A={}. ",
        s.answer_after.len(),
        digit_list(&s.answer_after)
    ));
    if o.explicit_carry {
        t.push_str(&format!(
            "Since ({sum}-{digit})/10={co}, C[{}]={co}.",
            col - 1,
            co = s.carry_out
        ));
    } else {
        t.push_str(&format!("C[{}]={}.", col - 1, s.carry_out));
    }
    t
}

/// The opening sentence naming both operands. `fn_name`/`sn_name` are the
/// displayed values (a literal number, or a chain result name like `ANS1`).
pub(super) fn prose_header(
    fn_name: &str,
    sn_name: &str,
    tr: &AddTrace,
    header_eq: bool,
    header_a0: bool,
) -> String {
    let flist = digit_list(&tr.fn_digits);
    let slist = digit_list(&tr.sn_digits);
    let sep = if header_eq { "=" } else { " " };
    let mut h = format!(
        "The first number is {fn_name}, FN={flist}. The second number is {sn_name}, SN={slist}. \
         Since FN{sep}{flist} has {}, SN{sep}{slist} has {}, thus the maximum number of digits is {}. \
         In each subsequent step, we remove one number from the end of FN and one from the end of SN.",
        digits_word(tr.fn_digits.len()),
        digits_word(tr.sn_digits.len()),
        tr.max_len
    );
    if header_a0 {
        h.push_str(" Length of A is 0.");
    }
    h
}

/// How a block closes after its last column step.
pub(super) enum Ending<'a> {
    /// A free-standing problem; `operators_sentence` controls the
    /// "Since there are no more operators" clause.
    Standalone { operators_sentence: bool },
    /// One subproblem inside a chain of `n_ops` operations, this being the
    /// `idx`-th (1-based) result.
    Sub {
        n_ops: usize,
        idx: usize,
        style: ChainStyle<'a>,
    },
}

/// Chain dialect for subproblem endings.
pub(super) enum ChainStyle<'a> {
    /// Results are named `ANS{k}`; an optional extra closing sentence is
    /// appended before the final answer (used by the rewritten-product
    /// chains).
    Composite { close_extra: Option<&'a str> },
    /// Results feed the next block as its first number; the final answer
    /// repeats the joined value after a comma-removal note.
    WordProblem,
}

pub(super) fn ending(tr: &AddTrace, e: Ending<'_>) -> String {
    let ans = digit_list(&tr.final_digits);
    let alen = tr.final_digits.len();
    match e {
        Ending::Standalone { operators_sentence } => {
            let tail = if operators_sentence {
                "Since there are no more operators, the problem is complete. "
            } else {
                ""
            };
            if !tr.overflow {
                format!(
                    "There are no more digits and C[0]=0. Thus the process is complete. \
                     {tail}The final Answer is {ans}."
                )
            } else if operators_sentence {
                format!(
                    "There are no more digits, but C[0]=1. Length of A is {alen}. Thus A={ans}.\n\
                     There are no more digits and the process is complete. \
                     {tail}The final Answer is {ans}."
                )
            } else {
                format!(
                    "There are no more digits, but C[0]=1. Length of A is {alen}. Thus A={ans}. \
                     The final Answer is {ans}."
                )
            }
        }
        Ending::Sub { n_ops, idx, style } => {
            let is_last = idx == n_ops;
            let ops = super::fmt::operator_clause(n_ops, "");
            match style {
                ChainStyle::Composite { close_extra } => {
                    let tail = if is_last {
                        let extra = close_extra.unwrap_or("");
                        format!("the problem is complete.{extra} The final Answer is {ans}.")
                    } else {
                        format!("there are more operators to process. Thus, ANS{idx} is {ans}.")
                    };
                    if !tr.overflow {
                        format!(
                            "There are no more digits and C[0]=0. Thus the process is complete. \
                             Since {ops} and we processed up to ANS{idx}, {tail}"
                        )
                    } else {
                        format!(
                            "There are no more digits and C[0]=1. Length of A is {alen}. Thus A={ans}.\n\
                             There are no more digits and the process is complete. \
                             Since {ops} and we processed up to ANS{idx}, {tail}"
                        )
                    }
                }
                ChainStyle::WordProblem => {
                    let tail = if is_last {
                        let commas = alen.saturating_sub(1);
                        let word = if commas == 1 { "comma" } else { "commas" };
                        format!(
                            "the problem is complete. The final Answer is {ans}. \
                             Removing all {commas} {word}, we have {}.",
                            tr.value
                        )
                    } else {
                        format!("there are more operators to process. The new FN is {ans}.")
                    };
                    if !tr.overflow {
                        format!(
                            "There are no more digits and C[0]=0. Thus the process is complete. \
                             Since {ops} and we processed up to ANS{idx}, {tail}"
                        )
                    } else {
                        format!(
                            "There are no more digits, but C[0]=1. Length of A is {alen}. A={ans}. \
                             Thus the process is complete. Since {ops} and we processed up to ANS{idx}, {tail}"
                        )
                    }
                }
            }
        }
    }
}

/// Options for the standard prose block and its ablations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardOpts {
    /// Header writes `FN=[…] has` instead of `FN […] has`.
    pub header_eq: bool,
    /// Keep the per-step `Length of FN …` prefix sentences.
    pub prefix: bool,
    /// Spell out comparison, modulus, and carry division in every step.
    pub explicit_carry: bool,
    /// Displayed perturbation of the second term.
    pub shift: SnShift,
}

impl Default for StandardOpts {
    fn default() -> Self {
        StandardOpts {
            header_eq: false,
            prefix: true,
            explicit_carry: true,
            shift: SnShift::None,
        }
    }
}

/// One worked addition problem in the step-by-step prose dialect.
pub fn addition_standard_block(a: Value, b: Value, o: &StandardOpts) -> String {
    let tr = add_trace(a, b);
    let mut lines = vec![
        format!("Problem: {a}+{b}="),
        "Explanation:".to_string(),
        prose_header(&a.to_string(), &b.to_string(), &tr, o.header_eq, false),
    ];
    for (i, s) in tr.steps.iter().enumerate() {
        lines.push(step_text(
            s,
            &StepOpts {
                prefix: o.prefix,
                by_operand: false,
                explicit_carry: o.explicit_carry,
                missing_zero: false,
                shift_delta: o.shift.delta_for(i + 1),
            },
        ));
    }
    lines.push(ending(&tr, Ending::Standalone { operators_sentence: true }));
    lines.join("\n")
}

/// Keyword family for the compact symbolic dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolSet {
    /// `Len` / `MaxLen`.
    Plain,
    /// `VBZ` / `UXOVBZ`.
    Uninformative,
    /// `Str` / `MinStr`.
    Misleading,
}

impl SymbolSet {
    pub(super) fn len_kw(self) -> &'static str {
        match self {
            SymbolSet::Plain => "Len",
            SymbolSet::Uninformative => "VBZ",
            SymbolSet::Misleading => "Str",
        }
    }

    pub(super) fn max_kw(self) -> &'static str {
        match self {
            SymbolSet::Plain => "MaxLen",
            SymbolSet::Uninformative => "UXOVBZ",
            SymbolSet::Misleading => "MinStr",
        }
    }
}

/// One worked addition problem in the compact symbolic dialect.
/// `since_steps` lists 1-based steps whose equation keeps a "Since " lead-in.
pub fn addition_symbols_block(
    a: Value,
    b: Value,
    set: SymbolSet,
    since_steps: &BTreeSet<usize>,
) -> String {
    let tr = add_trace(a, b);
    let lk = set.len_kw();
    let mk = set.max_kw();
    let mut lines = vec![
        format!("Problem: {a}+{b}="),
        "Explanation:".to_string(),
        format!(
            "FN={a}, FN={flist}. SN={b}, SN={slist}. {lk}(FN)={}, {lk}(SN)={}, {mk}={}.",
            tr.fn_digits.len(),
            tr.sn_digits.len(),
            tr.max_len,
            flist = digit_list(&tr.fn_digits),
            slist = digit_list(&tr.sn_digits),
        ),
    ];
    for (i, s) in tr.steps.iter().enumerate() {
        lines.push(symbols_step(s, lk, since_steps.contains(&(i + 1))));
    }
    let ans = digit_list(&tr.final_digits);
    if !tr.overflow {
        lines.push(format!(
            "{lk}(FN)=0 and {lk}(SN)=0 and C[0]=0. Done. The final Answer is {ans}."
        ));
    } else {
        lines.push(format!(
            "{lk}(FN)=0 and {lk}(SN)=0, but C[0]=1. {lk}(A)={}. A={ans}. Done. \
             The final Answer is {ans}.",
            tr.final_digits.len()
        ));
    }
    lines.join("\n")
}

pub(super) fn symbols_step(s: &AddStep, lk: &str, since: bool) -> String {
    let col = s.column;
    let fn_lookup = match s.fn_digit {
        Some(d) => format!("FN[{col}]={d}."),
        None => "FN is empty.".to_string(),
    };
    let sn_lookup = match s.sn_digit {
        Some(d) => format!("SN[{col}]={d}."),
        None => "SN is empty.".to_string(),
    };
    let sum = s.sum as i64;
    let digit = s.answer_digit as i64;
    let since = if since { "Since " } else { "" };
    format!(
        "{lk}(FN)={fl}. FN={flist}. {lk}(SN)={sl}. SN={slist}. {fn_lookup} {sn_lookup} \
         C[{col}]={ci}. {since}{f}+{s_term}+{ci}={sum}, {cmp}, {md}. {lk}(A)={al}. A={alist}. \
         ({sum}-{digit})/10={co}, C[{prev}]={co}.",
        fl = s.fn_remaining.len(),
        flist = digit_list(&s.fn_remaining),
        sl = s.sn_remaining.len(),
        slist = digit_list(&s.sn_remaining),
        ci = s.carry_in,
        f = s.fn_digit.unwrap_or(0),
        s_term = s.sn_digit.unwrap_or(0),
        cmp = compare10(sum),
        md = mod10(sum, digit),
        al = s.answer_after.len(),
        alist = digit_list(&s.answer_after),
        co = s.carry_out,
        prev = col - 1,
    )
}

/// One worked addition problem in the token-grid scratchpad format.
pub fn scratchpad_block(a: Value, b: Value) -> String {
    let tr = add_trace(a, b);
    let mut rows: Vec<String> = Vec::new();
    rows.push(scratch_row(&tr.fn_digits, &tr.sn_digits, &[], 0));
    for s in &tr.steps {
        let fn_after = &s.fn_remaining[..s.fn_remaining.len() - usize::from(s.fn_digit.is_some())];
        let sn_after = &s.sn_remaining[..s.sn_remaining.len() - usize::from(s.sn_digit.is_some())];
        rows.push(scratch_row(fn_after, sn_after, &s.answer_after, s.carry_out));
    }
    let fin = spaced(&tr.final_digits);
    format!(
        "Input:\n{a}+{b}\nTarget:\n<scratch>\n{}\n{fin}\n</scratch>{fin}.",
        rows.join("\n")
    )
}

fn scratch_row(fn_rem: &[u8], sn_rem: &[u8], acc: &[u8], carry: u8) -> String {
    let mut tokens: Vec<String> = fn_rem.iter().map(|d| d.to_string()).collect();
    if !sn_rem.is_empty() {
        tokens.push("+".to_string());
        tokens.extend(sn_rem.iter().map(|d| d.to_string()));
    }
    tokens.push(",".to_string());
    tokens.extend(acc.iter().map(|d| d.to_string()));
    tokens.push("C:".to_string());
    tokens.push(carry.to_string());
    tokens.join(" ")
}

/// One worked addition problem in the annotated scratchpad format.
pub fn detailed_scratchpad_block(a: Value, b: Value) -> String {
    let tr = add_trace(a, b);
    let mut lines = vec![
        format!("Input:\n{a}+{b}\nTarget:\n<scratch>"),
        format!("{} has {}.", spaced(&tr.fn_digits), digits_word(tr.fn_digits.len())),
        format!("{} has {}.", spaced(&tr.sn_digits), digits_word(tr.sn_digits.len())),
    ];
    let mut acc_before: Vec<u8> = Vec::new();
    for s in &tr.steps {
        let left = detail_left(&s.fn_remaining, &s.sn_remaining);
        let state = if acc_before.is_empty() {
            format!("C={}", s.carry_in)
        } else {
            format!("A={} , C={}", spaced(&acc_before), s.carry_in)
        };
        let eq = format!(
            "{} + {} + {} = {}",
            s.fn_digit.unwrap_or(0),
            s.sn_digit.unwrap_or(0),
            s.carry_in,
            spaced_value(s.sum)
        );
        lines.push(format!(
            "{left} , {state} , {eq} , A->{} , C->{}",
            s.answer_digit, s.carry_out
        ));
        acc_before = s.answer_after.clone();
    }
    if tr.overflow {
        let last = tr.steps.last().expect("overflow requires steps");
        lines.push(format!(
            "{} , A={} , C=1 , 0 + 0 + 1 = 1 , A->1 , C->0",
            detail_left(&[], &[]),
            spaced(&last.answer_after)
        ));
    }
    lines.push(format!(
        "{} , A={} , C=0 , END",
        detail_left(&[], &[]),
        spaced(&tr.final_digits)
    ));
    format!("{}\n</scratch>\n{}", lines.join("\n"), spaced(&tr.final_digits))
}

fn detail_left(fn_rem: &[u8], sn_rem: &[u8]) -> String {
    // "1 2 8 + 3 6 7", "9 9 +", " +" — a leading space survives when the
    // first operand is exhausted, a trailing one never does.
    format!("{} + {}", spaced(fn_rem), spaced(sn_rem))
        .trim_end()
        .to_string()
}

fn spaced_value(v: u8) -> String {
    let s = v.to_string();
    let chars: Vec<String> = s.chars().map(|c| c.to_string()).collect();
    chars.join(" ")
}

/// Place-value parts of a non-negative magnitude: always peel the top place
/// of a multi-digit number, keep peeling while the remainder is at least
/// `floor`, and drop zero remainders (`367 → [300, 67]`, `570 → [500, 70]`,
/// `389 → [300, 80, 9]` at floor 10).
pub(super) fn place_parts(mag: Value, floor: Value) -> Vec<Value> {
    assert!(mag >= 0, "place_parts takes a magnitude");
    let mut parts = Vec::new();
    let mut m = mag;
    let mut first = true;
    while m >= 10 && (first || m >= floor) {
        let mut place = 1;
        while m / place >= 10 {
            place *= 10;
        }
        let part = (m / place) * place;
        parts.push(part);
        m -= part;
        first = false;
    }
    if m > 0 || parts.is_empty() {
        parts.push(m);
    }
    parts
}

/// `128+367` / `29-500-70` — a term chain with sign-aware joins.
pub(super) fn term_chain(terms: &[Value]) -> String {
    let mut s = terms[0].to_string();
    for t in &terms[1..] {
        if *t < 0 {
            s.push_str(&t.to_string());
        } else {
            s.push('+');
            s.push_str(&t.to_string());
        }
    }
    s
}

/// The staged rewriting chain for a two-term sum: question, place-value
/// expansion of the second term, then left folds down to the answer.
pub(super) fn cot_stages(a: Value, b: Value) -> Vec<String> {
    let floor = if b < 0 { 10 } else { 100 };
    let sign: Value = if b < 0 { -1 } else { 1 };
    let mut terms: Vec<Value> = vec![a];
    terms.extend(place_parts(b.abs(), floor).iter().map(|p| p * sign));
    let mut stages = vec![term_chain(&[a, b])];
    let expanded = term_chain(&terms);
    if expanded != stages[0] {
        stages.push(expanded);
    }
    while terms.len() > 1 {
        let s = terms[0] + terms[1];
        terms.splice(0..2, [s]);
        stages.push(term_chain(&terms));
    }
    stages
}

/// One chain-of-thought worked example for a two-term sum (the second term
/// may be negative).
pub fn pair_cot_block(a: Value, b: Value) -> String {
    let stages = cot_stages(a, b);
    format!(
        "Problem: {}=?\nExplanation: Let's think step by step.\n{}. The final Answer is {}.",
        term_chain(&[a, b]),
        stages.join("="),
        a + b
    )
}

/// One few-shot example for a two-term sum.
pub fn pair_few_shot_block(a: Value, b: Value) -> String {
    format!("Q: {}=\nA: {}.", term_chain(&[a, b]), a + b)
}

/// The fixed instruction preamble describing the column-addition procedure.
pub fn instruction_text() -> &'static str {
    "The following are instructions for solving addition problems in the form of x + y = z, \
     where x, y, and z are positive integers.\n\
     We will use the standard algorithm for addition. We align the numbers x and y on the least \
     significant digit, which is the ones digit. Starting from right to left, we go from the \
     least significant digit to the most significant digit and add the corresponding digits \
     from each number. When the sum of the two digits is greater than 9, a carry of 1 is \
     included in the sum of the next digits. When there is only one digit available from the \
     two numbers, only that digit along with any carry is included in the sum. When all the \
     digits are processed, only the remaining carry if any shall be included in the sum.\n\
     For x + y = z where x = int(str(abc)), y = int(str(defg)), we can solve z with the \
     following steps:\n\
     1) c+g=w', w=w'%10\n\
     2) b+f+((w'-w)/10)=v', v=v'%10\n\
     3) a+e+((v'-v)/10)=u', u=u'%10\n\
     4) d+((u'-u)/10)=t', t=t'%10\n\
     5) s=(t'-t)/10\n\
     Thus, z = int(str(stuvw)).\n\
     The answer should be in the form below:\n\
     Q: What is abc+defg=?\n\
     A: abc\n   +defg\n   -------\n   stuvw\nThe answer is stuvw."
}

/// The worked-format completion the instruction preamble asks for.
pub fn instruction_completion(a: Value, b: Value) -> String {
    let z = a + b;
    let (a_s, b_s, z_s) = (a.to_string(), b.to_string(), z.to_string());
    let dashes = "-".repeat(a_s.len().max(b_s.len() + 1).max(z_s.len()) + 2);
    format!(" {a_s}\n   +{b_s}\n   {dashes}\n   {z_s}\nThe answer is {z}.")
}
