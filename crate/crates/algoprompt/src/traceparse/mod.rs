//! Parsing, verification, and grading of worked arithmetic traces.
//!
//! The renderers in [`crate::tracegen`] emit deterministic step-by-step
//! traces; this module runs the other direction. [`parse_trace`] lifts a
//! model reply (the answer block alone, prompt stripped) into a
//! [`ParsedTrace`] of typed steps with byte spans, [`truth_trace`] derives
//! the reference trace for a question from that same renderer, and
//! [`grade`] compares the two step by step, classifying the first mistake
//! into one of fourteen [`ErrorCategory`] values and reporting how far the
//! reply got before failing.
//!
//! Grading is anchored to the ground truth rather than to a reply's
//! internal consistency: a reply that carries a wrong intermediate forward
//! flawlessly still fails at the step that introduced it.

mod scan;

use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::numerics::Value;
use crate::tracegen::{golden_completion, Question, Strategy, Task, TOOL_CALL_TOKEN};
use crate::{Error, Result};

/// The fourteen kinds of single-step mistakes a graded trace distinguishes.
///
/// Each graded field of every step maps to exactly one category, so the
/// first mismatching field classifies the trace's first error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCategory {
    /// Miscounted the digits of the first operand.
    CountFirstDigits,
    /// Miscounted the digits of the second operand.
    CountSecondDigits,
    /// Picked the wrong maximum digit count.
    IdentifyMaxDigits,
    /// Misconverted the first operand into its digit list.
    ConvertFirstToList,
    /// Misconverted the second operand into its digit list.
    ConvertSecondToList,
    /// Copied the unprocessed remainder of the first operand wrongly.
    CopyUnprocessedFirst,
    /// Copied the unprocessed remainder of the second operand wrongly.
    CopyUnprocessedSecond,
    /// Extracted the wrong trailing digit from the first operand.
    ExtractLastFirst,
    /// Extracted the wrong trailing digit from the second operand.
    ExtractLastSecond,
    /// Carried the wrong value in from the previous step.
    CopyPreviousCarry,
    /// Got the two-digit sum (or digit product) wrong.
    TwoDigitSum,
    /// Derived the wrong outgoing carry.
    NewCarry,
    /// Corrupted the accumulated answer while copying it forward.
    CopyAccumulatedAnswer,
    /// Inserted the wrong new digit into the answer.
    InsertNewAnswerDigit,
}

impl ErrorCategory {
    /// Every category, in a stable reporting order.
    pub const ALL: [ErrorCategory; 14] = [
        ErrorCategory::CountFirstDigits,
        ErrorCategory::CountSecondDigits,
        ErrorCategory::IdentifyMaxDigits,
        ErrorCategory::ConvertFirstToList,
        ErrorCategory::ConvertSecondToList,
        ErrorCategory::CopyUnprocessedFirst,
        ErrorCategory::CopyUnprocessedSecond,
        ErrorCategory::ExtractLastFirst,
        ErrorCategory::ExtractLastSecond,
        ErrorCategory::CopyPreviousCarry,
        ErrorCategory::TwoDigitSum,
        ErrorCategory::NewCarry,
        ErrorCategory::CopyAccumulatedAnswer,
        ErrorCategory::InsertNewAnswerDigit,
    ];

    /// Stable identifier used in reports and configuration.
    pub fn name(&self) -> &'static str {
        match self {
            ErrorCategory::CountFirstDigits => "count-first-digits",
            ErrorCategory::CountSecondDigits => "count-second-digits",
            ErrorCategory::IdentifyMaxDigits => "identify-max-digits",
            ErrorCategory::ConvertFirstToList => "convert-first-to-list",
            ErrorCategory::ConvertSecondToList => "convert-second-to-list",
            ErrorCategory::CopyUnprocessedFirst => "copy-unprocessed-first",
            ErrorCategory::CopyUnprocessedSecond => "copy-unprocessed-second",
            ErrorCategory::ExtractLastFirst => "extract-last-first",
            ErrorCategory::ExtractLastSecond => "extract-last-second",
            ErrorCategory::CopyPreviousCarry => "copy-previous-carry",
            ErrorCategory::TwoDigitSum => "two-digit-sum",
            ErrorCategory::NewCarry => "new-carry",
            ErrorCategory::CopyAccumulatedAnswer => "copy-accumulated-answer",
            ErrorCategory::InsertNewAnswerDigit => "insert-new-answer-digit",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorCategory::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown error category {s:?}")))
    }
}

/// The structural role a parsed line plays in its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Operand set-up prose (digit lists, lengths, maximum).
    Header,
    /// A subproblem inventory line.
    Plan,
    /// A structural delimiter (subproblem labels, section markers).
    Marker,
    /// A calculation step; these set the denominator for progress ratios.
    Calc,
    /// Connective prose that carries values but does no new arithmetic.
    Note,
    /// A closing line that finishes a subproblem or the whole trace.
    Close,
}

/// One graded value captured from a step line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedField {
    /// Which slot of the step this value fills (e.g. `fn_digit`, `sum`).
    pub slot: String,
    /// The error category a mismatch in this slot is classified as.
    pub category: ErrorCategory,
    /// Canonicalized value text (whitespace stripped, lowercased).
    pub value: String,
    /// Byte range of the raw value in the source text.
    pub span: (usize, usize),
}

/// One recognized step line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedStep {
    /// Position of this step in the trace, starting at 0.
    pub index: usize,
    /// Structural role of the line.
    pub kind: StepKind,
    /// Whether this line closes the entire trace.
    pub terminal: bool,
    /// Byte range of the trimmed line in the source text.
    pub span: (usize, usize),
    /// Graded values in the order they appear on the line.
    pub fields: Vec<ParsedField>,
}

/// How far a reply got before the text stopped being a well-formed trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Completion {
    /// Every line parsed and the last one closes the trace.
    Complete,
    /// The text ends mid-trace: all trailing unparsed content (if any)
    /// follows the last recognizable line.
    Truncated,
    /// An unrecognizable span is followed by recognizable trace lines.
    Malformed {
        /// Byte range of the offending line.
        span: (usize, usize),
        /// Human-readable description of what failed to parse.
        reason: String,
    },
}

impl Completion {
    /// Whether the trace ran to a proper close.
    pub fn is_complete(&self) -> bool {
        matches!(self, Completion::Complete)
    }
}

/// A reply (or reference) lifted into typed steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedTrace {
    /// Which task's dialects were used to read the text.
    pub task: Task,
    /// Recognized steps in text order.
    pub steps: Vec<ParsedStep>,
    /// The last stated final answer anywhere in the text, if any.
    pub final_answer: Option<Value>,
    /// Whether the text forms a complete trace.
    pub completion: Completion,
}

impl ParsedTrace {
    /// Number of calculation steps (the denominator of progress ratios).
    pub fn calc_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.kind == StepKind::Calc).count()
    }
}

/// Pass/fail for a single graded field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldCheck {
    /// The slot that was compared.
    pub slot: String,
    /// Category a failure here classifies as.
    pub category: ErrorCategory,
    /// Whether the reply's value matched the reference.
    pub pass: bool,
}

/// Per-step grading outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepVerdict {
    /// Index of the step in the reference trace.
    pub step: usize,
    /// Every graded field of the step, in reference order.
    pub checks: Vec<FieldCheck>,
    /// Whether this step carries the trace's first error.
    pub first_error: bool,
}

impl StepVerdict {
    /// Whether every field of the step matched.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Location and classification of a trace's first mistake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstError {
    /// Index of the offending step in the reference trace.
    pub step: usize,
    /// Category of the first mismatching field.
    pub category: ErrorCategory,
}

/// The verdicts from comparing a reply against its reference trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeSummary {
    /// One verdict per compared step.
    pub verdicts: Vec<StepVerdict>,
    /// The first mismatch, if any step disagreed with the reference.
    pub first_error: Option<FirstError>,
    /// Fraction of calculation steps completed before the first error
    /// (`k/m` where step `k` of `m` failed; header errors give 0).
    /// `None` when no step disagreed.
    pub progress_ratio: Option<f64>,
    /// Whether the reply stated the reference's final answer.
    pub final_answer_correct: bool,
    /// Whether the reply parsed as a complete trace.
    pub complete: bool,
}

impl GradeSummary {
    /// Whether every compared field passed (truncation is not a failure).
    pub fn all_steps_pass(&self) -> bool {
        self.first_error.is_none()
    }
}

/// Parse one answer block (prompt stripped) into a typed trace.
///
/// Unrecognizable content at the end of the text marks the trace
/// [`Completion::Truncated`]; unrecognizable content followed by more
/// recognizable lines marks it [`Completion::Malformed`].
pub fn parse_trace(text: &str, task: Task) -> ParsedTrace {
    let lines = scan::lines(text);
    let mut steps = Vec::new();
    let mut completion = None;
    for (i, line) in lines.iter().enumerate() {
        match scan::classify(task, line) {
            Some(hit) => steps.push(ParsedStep {
                index: steps.len(),
                kind: hit.kind,
                terminal: hit.terminal,
                span: (line.start, line.end),
                fields: hit.fields,
            }),
            None => {
                let recovers = lines[i + 1..].iter().any(|l| scan::classify(task, l).is_some());
                completion = Some(if recovers {
                    Completion::Malformed {
                        span: (line.start, line.end),
                        reason: format!("unrecognized line: {}", snippet(line.text)),
                    }
                } else {
                    Completion::Truncated
                });
                break;
            }
        }
    }
    let final_answer = extract_final_answer(text);
    let completion = completion.unwrap_or_else(|| match steps.last() {
        Some(last) if last.terminal && final_answer.is_some() => Completion::Complete,
        _ => Completion::Truncated,
    });
    ParsedTrace { task, steps, final_answer, completion }
}

/// The reference trace for a question: the deterministic renderer's own
/// output parsed back. Grading against it anchors verdicts to ground truth.
pub fn truth_trace(task: Task, question: &Question) -> Result<ParsedTrace> {
    let text = golden_completion(task, &Strategy::Algorithmic, question)?;
    let parsed = parse_trace(&text, task);
    if !parsed.completion.is_complete() {
        return Err(Error::Parse(format!(
            "reference trace for {task} did not parse cleanly: {:?}",
            parsed.completion
        )));
    }
    Ok(parsed)
}

/// Compare a parsed reply against its reference trace step by step.
///
/// Fields are matched by slot name within each step; a missing or
/// mismatching value fails with that slot's category. A truncated reply is
/// graded only on the steps it contains — stopping early is not an error —
/// while extra steps past the reference's close are.
pub fn grade(parsed: &ParsedTrace, truth: &ParsedTrace) -> GradeSummary {
    let mut verdicts = Vec::new();
    let mut first_error: Option<FirstError> = None;
    for (i, t) in truth.steps.iter().enumerate() {
        let Some(p) = parsed.steps.get(i) else { break };
        let mut checks = Vec::new();
        if p.kind != t.kind {
            let category =
                t.fields.first().map_or(ErrorCategory::CopyAccumulatedAnswer, |f| f.category);
            checks.push(FieldCheck { slot: "step_kind".to_string(), category, pass: false });
        } else {
            for tf in &t.fields {
                let pass = p
                    .fields
                    .iter()
                    .find(|pf| pf.slot == tf.slot)
                    .is_some_and(|pf| pf.value == tf.value);
                checks.push(FieldCheck { slot: tf.slot.clone(), category: tf.category, pass });
            }
        }
        let fail = checks.iter().find(|c| !c.pass).map(|c| c.category);
        let is_first = first_error.is_none() && fail.is_some();
        if is_first {
            first_error = Some(FirstError { step: i, category: fail.expect("fail is some") });
        }
        verdicts.push(StepVerdict { step: i, checks, first_error: is_first });
    }
    if first_error.is_none() && parsed.steps.len() > truth.steps.len() {
        let i = truth.steps.len();
        let category = parsed.steps[i]
            .fields
            .first()
            .map_or(ErrorCategory::CopyAccumulatedAnswer, |f| f.category);
        first_error = Some(FirstError { step: i, category });
        verdicts.push(StepVerdict {
            step: i,
            checks: vec![FieldCheck { slot: "extra_step".to_string(), category, pass: false }],
            first_error: true,
        });
    }
    let progress_ratio = progress(truth, first_error);
    let final_answer_correct =
        parsed.final_answer.is_some() && parsed.final_answer == truth.final_answer;
    GradeSummary {
        verdicts,
        first_error,
        progress_ratio,
        final_answer_correct,
        complete: parsed.completion.is_complete(),
    }
}

/// `k/m` progress for a first error: `m` is the reference's calculation
/// step count and `k` the 1-based index of the failing calculation step
/// (errors before the first calculation give 0, errors after the last give
/// `m`).
fn progress(truth: &ParsedTrace, first_error: Option<FirstError>) -> Option<f64> {
    let fe = first_error?;
    let m = truth.calc_steps();
    if m == 0 {
        return None;
    }
    let mut k = truth.steps[..fe.step.min(truth.steps.len())]
        .iter()
        .filter(|s| s.kind == StepKind::Calc)
        .count();
    if truth.steps.get(fe.step).is_some_and(|s| s.kind == StepKind::Calc) {
        k += 1;
    }
    Some(k as f64 / m as f64)
}

static FINAL_LIST: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)the (?:final|end) answer is (-?)\[([\d,\s]*)\]").expect("regex"));
static FINAL_INT: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)the final answer is (-?\d+)").expect("regex"));
static PARITY_IS: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)the parity is (\d)").expect("regex"));
static ANSWER_IS: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)the answer is (-?\d+)").expect("regex"));
static SCRATCH_ANSWER: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)</scratch>\s*(\d(?: \d)*)").expect("regex"));

/// Pull the last stated final answer out of a reply, whatever its dialect.
///
/// Recognizes the bracketed `The final Answer is [..]` and `The END Answer
/// is [..]` forms (with an optional leading minus), the plain-integer
/// `The final Answer is n` and `The answer is n` forms, `the parity is b`,
/// the scratchpad's spaced digits after `</scratch>`, and a bare numeric
/// reply. The **last** occurrence in the text wins; leading zeros in digit
/// lists are dropped by numeric conversion.
pub fn extract_final_answer(text: &str) -> Option<Value> {
    let mut best: Option<(usize, Value)> = None;
    let mut consider = |start: usize, value: Option<Value>| {
        if let Some(v) = value {
            if best.is_none_or(|(s, _)| start >= s) {
                best = Some((start, v));
            }
        }
    };
    for m in FINAL_LIST.captures_iter(text) {
        let whole = m.get(0).expect("match");
        let v = digits_value(&m[2]).map(|v| if m[1].is_empty() { v } else { -v });
        consider(whole.start(), v);
    }
    for re in [&FINAL_INT, &PARITY_IS, &ANSWER_IS] {
        for m in re.captures_iter(text) {
            let whole = m.get(0).expect("match");
            consider(whole.start(), m[1].parse::<Value>().ok());
        }
    }
    for m in SCRATCH_ANSWER.captures_iter(text) {
        let whole = m.get(0).expect("match");
        consider(whole.start(), digits_value(&m[1]));
    }
    if best.is_none() {
        let bare = text.trim().trim_end_matches('.');
        if let Ok(v) = bare.parse::<Value>() {
            return Some(v);
        }
    }
    best.map(|(_, v)| v)
}

/// Fold the digit characters of a rendered list (`1,0,6,2` or `1 0 6 2`)
/// into their numeric value. Returns `None` when no digit is present.
fn digits_value(raw: &str) -> Option<Value> {
    let mut any = false;
    let mut v: Value = 0;
    for c in raw.chars().filter(char::is_ascii_digit) {
        any = true;
        v = v * 10 + Value::from(c as u8 - b'0');
    }
    any.then_some(v)
}

/// Find the last fully parsed step line in a (possibly truncated) reply.
///
/// Returns the line's text and the byte offset just past its end, so
/// `&text[..offset]` is the longest prefix that ends on a completed step.
/// Lines are recognized against every task's dialects, making this usable
/// when only raw text is at hand.
pub fn find_last_complete_step(text: &str) -> Option<(String, usize)> {
    let mut best = None;
    for line in scan::lines(text) {
        if line.text.ends_with('.') && scan::classify_any(&line).is_some() {
            best = Some((line.text.to_string(), line.end));
        }
    }
    best
}

/// A pairwise calculator subproblem extracted from a tool-call reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubProblem {
    /// Left operand.
    pub lhs: Value,
    /// Operator, one of `+`, `-`, `*`.
    pub op: char,
    /// Right operand.
    pub rhs: Value,
}

impl SubProblem {
    /// The subproblem as a question for a solver.
    pub fn question(&self) -> Question {
        match self.op {
            '*' => Question::Mul { a: self.lhs, b: self.rhs },
            '-' => Question::Add { a: self.lhs, b: -self.rhs },
            _ => Question::Add { a: self.lhs, b: self.rhs },
        }
    }

    /// The arithmetic answer to the subproblem.
    pub fn answer(&self) -> Value {
        match self.op {
            '*' => self.lhs * self.rhs,
            '-' => self.lhs - self.rhs,
            _ => self.lhs + self.rhs,
        }
    }
}

impl fmt::Display for SubProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.lhs, self.op, self.rhs)
    }
}

static SUB_EXPR: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^(\d+)\s*([+*-])\s*(\d+)$").expect("regex"));

/// Extract the calculator subproblem a tool-call reply is asking for.
///
/// Scans back to the last `Subproblem: ` marker and reads up to the tool
/// token (`⟨GET⟩` or its ASCII alias `<GET>`), an `=`, or the end of text —
/// whichever comes first. Returns `Ok(None)` when no marker is present and
/// an error when a marker is present but what follows is not
/// `<integer><op><integer>`.
pub fn extract_subproblem(text: &str) -> Result<Option<SubProblem>> {
    const MARKER: &str = "Subproblem: ";
    let Some(pos) = text.rfind(MARKER) else {
        return Ok(None);
    };
    let rest = &text[pos + MARKER.len()..];
    let mut end = rest.len();
    for stop in [TOOL_CALL_TOKEN, "<GET>", "\n", "="] {
        if let Some(i) = rest.find(stop) {
            end = end.min(i);
        }
    }
    let expr = rest[..end].trim();
    let caps = SUB_EXPR.captures(expr).ok_or_else(|| {
        Error::Parse(format!("malformed calculator subproblem: {}", snippet(expr)))
    })?;
    let lhs = caps[1]
        .parse::<Value>()
        .map_err(|_| Error::Parse(format!("subproblem operand out of range: {}", &caps[1])))?;
    let rhs = caps[3]
        .parse::<Value>()
        .map_err(|_| Error::Parse(format!("subproblem operand out of range: {}", &caps[3])))?;
    Ok(Some(SubProblem { lhs, op: caps[2].chars().next().expect("operator"), rhs }))
}

/// Splice a single wrong value into a rendered trace.
///
/// `step` selects the header (0) or the `step`-th calculation step
/// (1-based); `category` selects which field of that step to corrupt. The
/// characteristic field of the category is preferred (e.g. the looked-up
/// digit for extraction errors, the answer head for insertion errors) and
/// digit values shift by `delta` modulo 10 while lists shift their last
/// element. The result still parses — only its arithmetic is wrong.
pub fn inject_fault(
    text: &str,
    task: Task,
    step: usize,
    category: ErrorCategory,
    delta: i32,
) -> Result<String> {
    if delta == 0 {
        return Err(Error::Config("fault delta must be nonzero".to_string()));
    }
    let parsed = parse_trace(text, task);
    let target = if step == 0 {
        parsed.steps.iter().find(|s| s.kind == StepKind::Header)
    } else {
        parsed.steps.iter().filter(|s| s.kind == StepKind::Calc).nth(step - 1)
    }
    .ok_or_else(|| Error::Parse(format!("trace has no step {step} to corrupt")))?;
    let preferred = preferred_slot(category);
    let field = target
        .fields
        .iter()
        .find(|f| f.category == category && f.slot == preferred)
        .or_else(|| target.fields.iter().find(|f| f.category == category))
        .ok_or_else(|| {
            Error::Parse(format!("step {step} has no field in category {category}"))
        })?;
    let new_value = mutate_value(&field.value, delta)?;
    let mut out = String::with_capacity(text.len() + 4);
    out.push_str(&text[..field.span.0]);
    out.push_str(&new_value);
    out.push_str(&text[field.span.1..]);
    Ok(out)
}

/// The field a category's fault lands in by preference: the one that most
/// directly embodies the mistake rather than an echo of it.
fn preferred_slot(category: ErrorCategory) -> &'static str {
    match category {
        ErrorCategory::CountFirstDigits => "fn_len",
        ErrorCategory::CountSecondDigits => "sn_len",
        ErrorCategory::IdentifyMaxDigits => "max",
        ErrorCategory::ConvertFirstToList => "fn_list",
        ErrorCategory::ConvertSecondToList => "sn_list",
        ErrorCategory::CopyUnprocessedFirst => "fn_list",
        ErrorCategory::CopyUnprocessedSecond => "sn_list",
        ErrorCategory::ExtractLastFirst => "fn_digit",
        ErrorCategory::ExtractLastSecond => "sn_digit",
        ErrorCategory::CopyPreviousCarry => "carry_in",
        ErrorCategory::TwoDigitSum => "sum",
        ErrorCategory::NewCarry => "carry_out",
        ErrorCategory::CopyAccumulatedAnswer => "a_rest",
        ErrorCategory::InsertNewAnswerDigit => "a_head",
    }
}

/// Shift a captured value by `delta`: single digits wrap modulo 10, larger
/// integers shift plainly, and digit lists shift their last element.
fn mutate_value(value: &str, delta: i32) -> Result<String> {
    if let Some((head, last)) = value.rsplit_once(',') {
        let d: i64 = last
            .parse()
            .map_err(|_| Error::Parse(format!("unexpected list element {last:?}")))?;
        return Ok(format!("{head},{}", shift(d, delta)));
    }
    let v: i64 =
        value.parse().map_err(|_| Error::Parse(format!("field value {value:?} not numeric")))?;
    Ok(shift(v, delta).to_string())
}

fn shift(v: i64, delta: i32) -> i64 {
    if (0..=9).contains(&v) {
        (v + i64::from(delta)).rem_euclid(10)
    } else {
        v + i64::from(delta)
    }
}

/// Shorten a line for inclusion in an error message.
fn snippet(line: &str) -> String {
    const MAX: usize = 60;
    if line.len() <= MAX {
        format!("{line:?}")
    } else {
        let cut = line.char_indices().take_while(|(i, _)| *i < MAX).count();
        format!("{:?}…", &line[..line.char_indices().nth(cut).map_or(MAX, |(i, _)| i)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn golden(task: Task, q: &Question) -> String {
        golden_completion(task, &Strategy::Algorithmic, q).expect("golden render")
    }

    fn assert_round_trip(task: Task, q: &Question) {
        let text = golden(task, q);
        let parsed = parse_trace(&text, task);
        assert_eq!(
            parsed.completion,
            Completion::Complete,
            "{task} {} did not parse cleanly:\n{text}",
            q.display()
        );
        assert!(q.answer().is_some(), "sample question must have an answer");
        assert_eq!(parsed.final_answer, q.answer(), "final answer of {task} {}", q.display());
        assert!(parsed.calc_steps() > 0 || matches!(q, Question::Mul { .. }));
        let summary = grade(&parsed, &parsed);
        assert!(summary.first_error.is_none(), "self-grade failed: {:?}", summary.first_error);
        assert!(summary.final_answer_correct && summary.complete);
        assert_eq!(summary.progress_ratio, None);
    }

    #[test]
    fn addition_traces_round_trip() {
        let pairs = [
            (0, 0),
            (5, 7),
            (128, 367),
            (9980, 29),
            (802, 7145),
            (99999, 1),
            (12345, 98765),
            (9, 99999),
            (1000, 1),
            (999999999, 1),
        ];
        for (a, b) in pairs {
            assert_round_trip(Task::Addition, &Question::Add { a, b });
        }
    }

    #[test]
    fn signed_addition_traces_round_trip() {
        let pairs = [
            (29, -570),
            (-99, -21),
            (483, -389),
            (-30, 8002),
            (128, 367),
            (0, 0),
            (-1, 1),
            (100, -100),
            (-12, -88),
            (570, -29),
            (5, -5),
            (-5006, 17),
            (-820, -3),
            (-61417, 60000),
            (-55302, 55000),
        ];
        for (a, b) in pairs {
            assert_round_trip(Task::AdditionSubtraction, &Question::Add { a, b });
        }
    }

    #[test]
    fn multiplication_traces_round_trip() {
        let pairs = [(2035, 87), (128, 367), (3, 7), (999, 999), (1, 1), (40001, 9), (12, 3456)];
        for (a, b) in pairs {
            assert_round_trip(Task::Multiplication, &Question::Mul { a, b });
        }
    }

    #[test]
    fn multi_addition_traces_round_trip() {
        let sums: [&[Value]; 6] = [
            &[802, 7145, 6],
            &[9980, 29],
            &[7, 7, 7],
            &[1, 2, 3, 4, 5],
            &[0, 0],
            &[99999, 1, 99999],
        ];
        for values in sums {
            assert_round_trip(Task::MultiAddition, &Question::Sum(values.to_vec()));
        }
    }

    #[test]
    fn repeated_addition_traces_round_trip() {
        let pairs = [(3, 7), (3, 107), (5, 6), (1, 9), (9, 1), (2, 1), (0, 5), (7, 7), (12, 4)];
        for (a, b) in pairs {
            assert_round_trip(Task::MultiplyAsAddition, &Question::Mul { a, b });
        }
    }

    #[test]
    fn parity_traces_round_trip() {
        let lists: [&[u8]; 5] =
            [&[1, 1, 0, 1, 0], &[0, 1, 1, 0, 0, 0, 0, 0], &[1], &[0], &[1, 0]];
        for bits in lists {
            assert_round_trip(Task::Parity, &Question::List(bits.to_vec()));
        }
    }

    #[test]
    fn word_problem_chains_round_trip() {
        let sums: [&[Value]; 4] = [&[467, 128], &[467, 595], &[467, 595, 1062], &[999, 1, 1]];
        for values in sums {
            assert_round_trip(Task::Gsm8k, &Question::Sum(values.to_vec()));
        }
    }

    #[test]
    fn ablation_dialects_parse_to_completion() {
        let q = Question::Add { a: 128, b: 367 };
        let strategies = [
            Strategy::UncommonOperation,
            Strategy::NonexplicitCarry,
            Strategy::SystematicErrors { delta: -1 },
            Strategy::IrregularErrors { steps: BTreeSet::from([1, 3]), delta: -1 },
            Strategy::SymbolsOnly,
            Strategy::SymbolsUninformative,
            Strategy::SymbolsMisleading,
        ];
        for strategy in strategies {
            let text = golden_completion(Task::Addition, &strategy, &q).expect("golden render");
            let parsed = parse_trace(&text, Task::Addition);
            assert_eq!(
                parsed.completion,
                Completion::Complete,
                "{} did not parse cleanly:\n{text}",
                strategy.name()
            );
        }
    }

    #[test]
    fn perturbed_digits_grade_as_extraction_errors() {
        let q = Question::Add { a: 128, b: 367 };
        let truth = truth_trace(Task::Addition, &q).expect("truth");
        let text = golden_completion(Task::Addition, &Strategy::SystematicErrors { delta: -1 }, &q)
            .expect("golden render");
        let parsed = parse_trace(&text, Task::Addition);
        let summary = grade(&parsed, &truth);
        let fe = summary.first_error.expect("perturbed trace must fail");
        assert_eq!(fe.category, ErrorCategory::ExtractLastSecond);
        assert_eq!(fe.step, 1);
    }

    /// One deterministic corruption per category on `128+367`, checked for
    /// exact classification and progress ratio. The reference trace has a
    /// header, three calculation steps, and a close.
    #[test]
    fn each_category_classifies_exactly() {
        let q = Question::Add { a: 128, b: 367 };
        let text = golden(Task::Addition, &q);
        let truth = truth_trace(Task::Addition, &q).expect("truth");
        let cases: [(usize, ErrorCategory, i32, f64); 14] = [
            (0, ErrorCategory::ConvertFirstToList, 1, 0.0),
            (0, ErrorCategory::ConvertSecondToList, 2, 0.0),
            (0, ErrorCategory::CountFirstDigits, 1, 0.0),
            (0, ErrorCategory::CountSecondDigits, 1, 0.0),
            (0, ErrorCategory::IdentifyMaxDigits, -1, 0.0),
            (1, ErrorCategory::TwoDigitSum, 1, 1.0 / 3.0),
            (1, ErrorCategory::NewCarry, 1, 1.0 / 3.0),
            (2, ErrorCategory::ExtractLastFirst, 3, 2.0 / 3.0),
            (2, ErrorCategory::ExtractLastSecond, -2, 2.0 / 3.0),
            (2, ErrorCategory::CopyPreviousCarry, 1, 2.0 / 3.0),
            (2, ErrorCategory::CopyUnprocessedFirst, 1, 2.0 / 3.0),
            (2, ErrorCategory::CopyUnprocessedSecond, 4, 2.0 / 3.0),
            (2, ErrorCategory::CopyAccumulatedAnswer, 1, 2.0 / 3.0),
            (3, ErrorCategory::InsertNewAnswerDigit, 1, 1.0),
        ];
        for (step, category, delta, ratio) in cases {
            let mutated = inject_fault(&text, Task::Addition, step, category, delta)
                .unwrap_or_else(|e| panic!("inject {category} at step {step}: {e}"));
            assert_ne!(mutated, text, "{category} fault must change the text");
            let parsed = parse_trace(&mutated, Task::Addition);
            assert_eq!(parsed.completion, Completion::Complete, "{category} fault unparseable");
            let summary = grade(&parsed, &truth);
            let fe = summary.first_error.unwrap_or_else(|| panic!("{category} fault undetected"));
            assert_eq!(fe.category, category, "misclassified {category} fault");
            assert_eq!(fe.step, step, "wrong step for {category} fault");
            let got = summary.progress_ratio.expect("ratio present on failure");
            assert!((got - ratio).abs() < 1e-12, "{category}: ratio {got} != {ratio}");
        }
    }

    #[test]
    fn wrong_final_answer_is_flagged() {
        let q = Question::Add { a: 128, b: 367 };
        let text = golden(Task::Addition, &q);
        let truth = truth_trace(Task::Addition, &q).expect("truth");
        let mutated = text.replace("The final Answer is [4,9,5].", "The final Answer is [4,9,4].");
        assert_ne!(mutated, text);
        let summary = grade(&parse_trace(&mutated, Task::Addition), &truth);
        assert!(!summary.final_answer_correct);
        assert!(summary.first_error.is_some());
    }

    #[test]
    fn line_prefixes_grade_clean_and_char_cuts_never_malform() {
        let q = Question::Sum(vec![802, 7145, 6]);
        let text = golden(Task::MultiAddition, &q);
        let truth = truth_trace(Task::MultiAddition, &q).expect("truth");
        let mut boundaries: Vec<usize> =
            text.char_indices().filter(|&(_, c)| c == '\n').map(|(i, _)| i).collect();
        boundaries.push(text.len());
        for &end in &boundaries {
            let prefix = &text[..end];
            let parsed = parse_trace(prefix, Task::MultiAddition);
            assert!(
                !matches!(parsed.completion, Completion::Malformed { .. }),
                "prefix of {end} bytes misread as malformed"
            );
            let summary = grade(&parsed, &truth);
            assert!(
                summary.first_error.is_none(),
                "prefix of {end} bytes graded {:?}",
                summary.first_error
            );
        }
        for end in (0..text.len()).step_by(7) {
            if !text.is_char_boundary(end) {
                continue;
            }
            let parsed = parse_trace(&text[..end], Task::MultiAddition);
            assert!(
                !matches!(parsed.completion, Completion::Malformed { .. }),
                "char cut at {end} misread as malformed"
            );
        }
    }

    #[test]
    fn garbage_between_steps_is_malformed() {
        let q = Question::Add { a: 128, b: 367 };
        let text = golden(Task::Addition, &q);
        let lines: Vec<&str> = text.trim_start_matches('\n').lines().collect();
        let broken = format!(
            "{}\nthe remainder of this line is not a trace\n{}",
            lines[0],
            lines[1..].join("\n")
        );
        let parsed = parse_trace(&broken, Task::Addition);
        match &parsed.completion {
            Completion::Malformed { span, reason } => {
                assert_eq!(
                    &broken[span.0..span.1],
                    "the remainder of this line is not a trace"
                );
                assert!(reason.contains("unrecognized line"));
            }
            other => panic!("expected malformed, got {other:?}"),
        }
        assert_eq!(parsed.steps.len(), 1);
    }

    #[test]
    fn garbage_at_end_is_truncation() {
        let q = Question::Add { a: 128, b: 367 };
        let text = golden(Task::Addition, &q);
        let cut = text.rfind('\n').expect("multi-line");
        let broken = format!("{}\nLength of FN is", &text[..cut]);
        let parsed = parse_trace(&broken, Task::Addition);
        assert_eq!(parsed.completion, Completion::Truncated);
    }

    #[test]
    fn final_answers_extract_from_every_terminal_form() {
        assert_eq!(extract_final_answer("The final Answer is [4,9,5]."), Some(495));
        assert_eq!(extract_final_answer("The final Answer is -[5,4,1]."), Some(-541));
        assert_eq!(extract_final_answer("The final Answer is [0,9,4]."), Some(94));
        assert_eq!(extract_final_answer("The END Answer is [1,7,7,0,4,5]."), Some(177045));
        assert_eq!(extract_final_answer("The final Answer is 7953."), Some(7953));
        assert_eq!(extract_final_answer("we have s=1, the parity is 1."), Some(1));
        assert_eq!(extract_final_answer("The answer is 10009."), Some(10009));
        assert_eq!(extract_final_answer(" 495."), Some(495));
        assert_eq!(extract_final_answer(" -541"), Some(-541));
        assert_eq!(extract_final_answer("</scratch>4 9 5."), Some(495));
        assert_eq!(extract_final_answer("</scratch>\n1 0 0 0 9"), Some(10009));
        assert_eq!(
            extract_final_answer("The final Answer is [1,4].\nThe final Answer is [2,1]."),
            Some(21)
        );
        assert_eq!(extract_final_answer("nothing to see here"), None);
    }

    #[test]
    fn last_answer_wins_across_chain_results() {
        let q = Question::Sum(vec![802, 7145, 6]);
        let text = golden(Task::MultiAddition, &q);
        assert_eq!(extract_final_answer(&text), Some(7953));
    }

    #[test]
    fn last_complete_step_is_a_resumption_point() {
        let q = Question::Sum(vec![802, 7145, 6]);
        let text = golden(Task::MultiAddition, &q);
        let lines: Vec<(usize, &str)> = text
            .match_indices('\n')
            .map(|(i, _)| i)
            .zip(text.lines().skip(1))
            .collect();
        // Cut halfway into the fourth line.
        let (start, line) = lines[3];
        let cut = start + 1 + line.len() / 2;
        let prefix = &text[..cut];
        let (step_text, offset) = find_last_complete_step(prefix).expect("steps before cut");
        assert!(prefix[..offset].ends_with(&step_text));
        let reparsed = parse_trace(&prefix[..offset], Task::MultiAddition);
        assert_eq!(reparsed.completion, Completion::Truncated);
        assert!(!reparsed.steps.is_empty());
        assert_eq!(reparsed.steps.last().expect("steps").span.1, offset);
    }

    #[test]
    fn tool_subproblems_extract_and_validate() {
        let text = "The subproblems are 802+7145=ANS1 and ANS1+6=ANS2. Since we ended on \
                    ANS_2, there are 2 operators.\nSubproblem: 802+7145";
        let sub = extract_subproblem(text).expect("well-formed").expect("marker present");
        assert_eq!((sub.lhs, sub.op, sub.rhs), (802, '+', 7145));
        assert_eq!(sub.answer(), 7947);
        assert_eq!(sub.to_string(), "802+7145");

        let continued = format!("{text}\u{27E8}GET\u{27E9}=7947. Since there are 2 operators and \
                                 we processed up to ANS1, there are more operators to process.\n\
                                 Subproblem: 7947+6");
        let sub = extract_subproblem(&continued).expect("well-formed").expect("marker present");
        assert_eq!((sub.lhs, sub.op, sub.rhs), (7947, '+', 6));

        let alias = "Subproblem: 14+7<GET>";
        let sub = extract_subproblem(alias).expect("well-formed").expect("marker present");
        assert_eq!((sub.lhs, sub.op, sub.rhs), (14, '+', 7));

        let product = "Subproblem: 3*7";
        let sub = extract_subproblem(product).expect("well-formed").expect("marker present");
        assert_eq!(sub.answer(), 21);

        assert!(extract_subproblem("no markers at all").expect("ok").is_none());
        assert!(extract_subproblem("Subproblem: what is this").is_err());
    }

    #[test]
    fn tool_call_traces_round_trip() {
        let text = golden_completion(
            Task::MultiAddition,
            &Strategy::ToolCall,
            &Question::Sum(vec![802, 7145, 6]),
        )
        .expect("golden render");
        let parsed = parse_trace(&text, Task::MultiAddition);
        assert_eq!(parsed.completion, Completion::Complete, "tool trace:\n{text}");
        assert_eq!(parsed.final_answer, Some(7953));
        assert_eq!(parsed.calc_steps(), 2);
    }

    #[test]
    fn category_names_round_trip() {
        assert_eq!(ErrorCategory::ALL.len(), 14);
        for category in ErrorCategory::ALL {
            assert_eq!(category.name().parse::<ErrorCategory>().expect("name"), category);
        }
        assert!("not-a-category".parse::<ErrorCategory>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::{
            any, prop_assert, prop_assert_eq, prop_oneof, proptest, Strategy as _,
        };

        /// A random task with a random valid question for it.
        fn any_case() -> impl proptest::strategy::Strategy<Value = (Task, Question)> {
            prop_oneof![
                (0i128..=9_999_999, 0i128..=9_999_999)
                    .prop_map(|(a, b)| (Task::Addition, Question::Add { a, b })),
                (-99_999i128..=99_999, -99_999i128..=99_999)
                    .prop_map(|(a, b)| (Task::AdditionSubtraction, Question::Add { a, b })),
                (1i128..=99_999, 1i128..=999, any::<bool>()).prop_map(|(a, b, swap)| {
                    let (a, b) = if swap { (b, a) } else { (a, b) };
                    (Task::Multiplication, Question::Mul { a, b })
                }),
                proptest::collection::vec(0u8..=1, 1..=30)
                    .prop_map(|bits| (Task::Parity, Question::List(bits))),
                proptest::collection::vec(0i128..=99_999, 2..=6)
                    .prop_map(|vs| (Task::MultiAddition, Question::Sum(vs))),
                (0i128..=12, 0i128..=999)
                    .prop_map(|(a, b)| (Task::MultiplyAsAddition, Question::Mul { a, b })),
                proptest::collection::vec(1i128..=9_999, 2..=4)
                    .prop_map(|vs| (Task::Gsm8k, Question::Sum(vs))),
            ]
        }

        proptest! {
            #[test]
            fn golden_renders_round_trip((task, q) in any_case()) {
                let text =
                    golden_completion(task, &Strategy::Algorithmic, &q).expect("render");
                let parsed = parse_trace(&text, task);
                prop_assert_eq!(&parsed.completion, &Completion::Complete);
                prop_assert_eq!(parsed.final_answer, q.answer());
                let summary = grade(&parsed, &parsed);
                prop_assert!(summary.first_error.is_none());
                prop_assert!(summary.final_answer_correct);
            }

            #[test]
            fn line_prefixes_stay_clean((task, q) in any_case(), cut_seed: u64) {
                let text =
                    golden_completion(task, &Strategy::Algorithmic, &q).expect("render");
                let truth = parse_trace(&text, task);
                let mut cuts: Vec<usize> = text
                    .char_indices()
                    .filter(|&(_, c)| c == '\n')
                    .map(|(i, _)| i)
                    .collect();
                cuts.push(text.len());
                let end = cuts[cut_seed as usize % cuts.len()];
                let parsed = parse_trace(&text[..end], task);
                let malformed = matches!(parsed.completion, Completion::Malformed { .. });
                prop_assert!(!malformed, "prefix of {} bytes misread as malformed", end);
                let summary = grade(&parsed, &truth);
                prop_assert!(summary.first_error.is_none());
            }

            /// Injecting a fault of a category must grade back as exactly
            /// that category, at the chosen step, with `k/m` progress.
            #[test]
            fn injected_faults_classify_as_injected(
                a in 10i128..=999_999,
                b in 10i128..=999_999,
                cat_idx in 0usize..14,
                delta in 1i32..=9,
                step_seed: u64,
            ) {
                let q = Question::Add { a, b };
                let category = ErrorCategory::ALL[cat_idx];
                let text = golden_completion(Task::Addition, &Strategy::Algorithmic, &q)
                    .expect("render");
                let truth = parse_trace(&text, Task::Addition);
                let m = truth.calc_steps();
                prop_assert!(m >= 2);
                let header_category = matches!(
                    category,
                    ErrorCategory::CountFirstDigits
                        | ErrorCategory::CountSecondDigits
                        | ErrorCategory::IdentifyMaxDigits
                        | ErrorCategory::ConvertFirstToList
                        | ErrorCategory::ConvertSecondToList
                );
                let step = if header_category { 0 } else { 1 + step_seed as usize % m };
                let Ok(mutated) = inject_fault(&text, Task::Addition, step, category, delta)
                else {
                    // The chosen step has no such field (e.g. an empty
                    // remainder list); nothing to verify.
                    return Ok(());
                };
                let parsed = parse_trace(&mutated, Task::Addition);
                prop_assert_eq!(&parsed.completion, &Completion::Complete);
                let summary = grade(&parsed, &truth);
                let fe = summary.first_error.expect("fault must be detected");
                prop_assert_eq!(fe.category, category);
                let expected_index = if step == 0 {
                    truth.steps.iter().position(|s| s.kind == StepKind::Header).expect("header")
                } else {
                    truth
                        .steps
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.kind == StepKind::Calc)
                        .map(|(i, _)| i)
                        .nth(step - 1)
                        .expect("calc step")
                };
                prop_assert_eq!(fe.step, expected_index);
                let expected_ratio =
                    if step == 0 { 0.0 } else { step as f64 / m as f64 };
                let got = summary.progress_ratio.expect("ratio on failure");
                prop_assert!((got - expected_ratio).abs() < 1e-12);
            }

            #[test]
            fn final_answer_extraction_inverts_rendering(
                v in 0i128..=999_999_999_999,
                negative: bool,
            ) {
                let digits: Vec<String> =
                    v.to_string().chars().map(String::from).collect();
                let line = format!(
                    "The final Answer is {}[{}].",
                    if negative { "-" } else { "" },
                    digits.join(",")
                );
                let expected = if negative { -v } else { v };
                prop_assert_eq!(extract_final_answer(&line), Some(expected));
            }
        }
    }

    #[test]
    fn truncated_reply_counts_completed_steps_only() {
        let q = Question::Add { a: 9980, b: 29 };
        let text = golden(Task::Addition, &q);
        let truth = truth_trace(Task::Addition, &q).expect("truth");
        let lines: Vec<&str> = text.trim_start_matches('\n').lines().collect();
        let prefix = format!("\n{}", lines[..3].join("\n"));
        let parsed = parse_trace(&prefix, Task::Addition);
        assert_eq!(parsed.completion, Completion::Truncated);
        assert_eq!(parsed.steps.len(), 3);
        let summary = grade(&parsed, &truth);
        assert!(summary.first_error.is_none());
        assert!(!summary.complete && !summary.final_answer_correct);
    }
}
