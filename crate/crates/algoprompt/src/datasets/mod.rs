//! Evaluation-set generation and ingestion.
//!
//! [`sample_by_answer_length`] draws arithmetic and parity items by
//! rejection sampling so that every item's answer has an exact digit count,
//! deterministically per seed. [`load_word_problems`] ingests line-delimited
//! word-problem records carrying machine-readable solution expressions,
//! [`filter_addition_only`] keeps the purely additive subset, and
//! [`inflate_numbers`] rewrites a word problem with much larger quantities
//! while recomputing its whole solution chain.
//!
//! Item files are JSON-lines (`.jsonl`) with a manifest sidecar; both are
//! byte-deterministic for a fixed seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::numerics::{answer_length, Value};
use crate::tracegen::{Question, Task};
use crate::{Error, Result};

/// Version stamp written into manifests; bumps when sampling rules change.
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One evaluation question with its reference answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalItem {
    /// Stable identifier, unique within a dataset file.
    pub id: String,
    /// Task the item belongs to.
    pub task: Task,
    /// The question itself: operands for arithmetic, text for word problems.
    pub question: Question,
    /// Reference answer.
    pub answer: Value,
    /// Length bucket: digit count of the answer magnitude, except parity
    /// items which bucket by input list length.
    pub answer_length: usize,
    /// Ordered solution expressions (`"3+3=6"`), present for word problems.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expressions: Vec<String>,
    /// Provenance.
    #[serde(default)]
    pub metadata: ItemMeta,
}

/// Where an item came from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ItemMeta {
    /// Seed of the stream that produced the item (0 for ingested items).
    pub seed: u64,
    /// Producer: `"sampler"`, a source file name, or an inflation note.
    pub source: String,
}

impl EvalItem {
    /// The question as prompt text.
    pub fn question_text(&self) -> String {
        self.question.display()
    }

    /// The length bucket the item must carry to be internally consistent.
    fn expected_answer_length(&self) -> usize {
        match self.question {
            Question::Word(_) => answer_length(self.answer),
            _ => self.question.answer_len(),
        }
    }

    /// Check every cross-field invariant of the item.
    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.question.answer() {
            if v != self.answer {
                return Err(Error::Dataset(format!(
                    "item {}: stated answer {} but question computes {v}",
                    self.id, self.answer
                )));
            }
        }
        let expected = self.expected_answer_length();
        if self.answer_length != expected {
            return Err(Error::Dataset(format!(
                "item {}: answer_length {} but expected {expected}",
                self.id, self.answer_length
            )));
        }
        if !self.expressions.is_empty() {
            verify_expression_chain(&self.expressions, self.answer)
                .map_err(|e| Error::Dataset(format!("item {}: {e}", self.id)))?;
        }
        Ok(())
    }
}

/// Sidecar description of a generated item file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// Task all items belong to.
    pub task: Task,
    /// Distinct answer lengths present, ascending.
    pub lengths: Vec<usize>,
    /// Exact item count per length.
    pub counts: BTreeMap<usize, usize>,
    /// Seed the sampler ran with (0 for ingested corpora).
    pub seed: u64,
    /// Sampler version that produced the file.
    pub generator_version: String,
}

impl DatasetManifest {
    /// Describe a slice of items.
    pub fn for_items(task: Task, seed: u64, items: &[EvalItem]) -> DatasetManifest {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for item in items {
            *counts.entry(item.answer_length).or_default() += 1;
        }
        DatasetManifest {
            task,
            lengths: counts.keys().copied().collect(),
            counts,
            seed,
            generator_version: GENERATOR_VERSION.to_string(),
        }
    }

    /// Total item count the manifest declares.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Verify the manifest describes exactly these items.
    pub fn matches(&self, items: &[EvalItem]) -> Result<()> {
        let fresh = DatasetManifest::for_items(self.task, self.seed, items);
        if fresh.counts != self.counts {
            return Err(Error::Dataset(format!(
                "manifest declares counts {:?} but the item file holds {:?}",
                self.counts, fresh.counts
            )));
        }
        if let Some(stray) = items.iter().find(|i| i.task != self.task) {
            return Err(Error::Dataset(format!(
                "manifest is for {} but item {} is a {} item",
                self.task, stray.id, stray.task
            )));
        }
        Ok(())
    }
}

/// The answer-length range each task's evaluation protocol covers.
///
/// These mirror the evaluation settings table: addition 2–19, combined
/// addition/subtraction 2–14, multiplication 2–7, parity 2–30, and the two
/// composite tasks 2–10. Word problems are ingested, not sampled.
pub fn supported_lengths(task: Task) -> Option<std::ops::RangeInclusive<usize>> {
    match task {
        Task::Addition => Some(2..=19),
        Task::AdditionSubtraction => Some(2..=14),
        Task::Multiplication => Some(2..=7),
        Task::Parity => Some(2..=30),
        Task::MultiAddition | Task::MultiplyAsAddition => Some(2..=10),
        Task::Gsm8k => None,
    }
}

/// Cap on rejection-sampling proposals per item before declaring a length
/// infeasible. Every supported (task, length) pair accepts within a few
/// hundred proposals; a run to this cap means the request is impossible.
const MAX_PROPOSALS: usize = 200_000;

/// Draw `per_length` items for each requested answer length.
///
/// Operand scheme (documented for reproducibility): each operand draws a
/// digit length uniformly from `[1, L]`, then uniform digits (no leading
/// zero above one digit), and the whole proposal is rejected until the
/// answer has exactly `L` digits. Multiplication keeps one factor under
/// 1000 (its digit length draws from `[1, 3]`, order randomized);
/// multi-addition uses three terms; repeated-addition draws its multiplier
/// from 2–9; parity draws `L` uniform bits with no rejection. Each
/// (task, length) pair runs its own seeded stream, so a dataset is
/// byte-identical for a fixed seed regardless of which other lengths are
/// requested alongside it.
pub fn sample_by_answer_length(
    task: Task,
    lengths: &[usize],
    per_length: usize,
    seed: u64,
) -> Result<Vec<EvalItem>> {
    let supported = supported_lengths(task).ok_or_else(|| {
        Error::Dataset(format!("{task} items are ingested from a corpus, not sampled"))
    })?;
    let mut items = Vec::with_capacity(lengths.len() * per_length);
    for &length in lengths {
        if !supported.contains(&length) {
            return Err(Error::Dataset(format!(
                "answer length {length} outside the supported range {}-{} for {task}",
                supported.start(),
                supported.end()
            )));
        }
        let mut rng = stream_rng("sample", seed, &format!("{}/{length}", task.name()));
        for index in 0..per_length {
            let question = draw_question(task, length, &mut rng)?;
            let answer = question.answer().expect("sampled questions are arithmetic");
            let item = EvalItem {
                id: format!("{}-len{:02}-{:03}", task.name(), length, index),
                task,
                question,
                answer,
                answer_length: length,
                expressions: Vec::new(),
                metadata: ItemMeta { seed, source: "sampler".to_string() },
            };
            item.validate()?;
            items.push(item);
        }
    }
    Ok(items)
}

/// A deterministic stream keyed by purpose, seed, and stream name.
fn stream_rng(tag: &str, seed: u64, name: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    h.update([0]);
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// One accepted question whose answer length is exactly `length`.
fn draw_question(task: Task, length: usize, rng: &mut ChaCha8Rng) -> Result<Question> {
    if task == Task::Parity {
        return Ok(Question::List((0..length).map(|_| rng.random_range(0..=1)).collect()));
    }
    for _ in 0..MAX_PROPOSALS {
        let question = propose(task, length, rng);
        if question.answer_len() == length {
            return Ok(question);
        }
    }
    Err(Error::Dataset(format!(
        "no {task} question with answer length {length} accepted in {MAX_PROPOSALS} proposals"
    )))
}

/// One unconditioned proposal from the declared operand scheme.
fn propose(task: Task, length: usize, rng: &mut ChaCha8Rng) -> Question {
    match task {
        Task::Addition => {
            Question::Add { a: draw_magnitude(rng, length), b: draw_magnitude(rng, length) }
        }
        Task::AdditionSubtraction => {
            let a = draw_magnitude(rng, length);
            let b = draw_magnitude(rng, length);
            Question::Add {
                a: if rng.random() { a } else { -a },
                b: if rng.random() { b } else { -b },
            }
        }
        Task::Multiplication => {
            let big = draw_magnitude(rng, length);
            let small = draw_magnitude(rng, 3);
            if rng.random() {
                Question::Mul { a: big, b: small }
            } else {
                Question::Mul { a: small, b: big }
            }
        }
        Task::MultiAddition => {
            Question::Sum((0..3).map(|_| draw_magnitude(rng, length)).collect())
        }
        Task::MultiplyAsAddition => {
            Question::Mul { a: rng.random_range(2..=9), b: draw_magnitude(rng, length) }
        }
        Task::Parity | Task::Gsm8k => unreachable!("handled before proposing"),
    }
}

/// A magnitude whose digit length is uniform on `[1, max_len]`, digits
/// uniform, no leading zero above one digit.
fn draw_magnitude(rng: &mut ChaCha8Rng, max_len: usize) -> Value {
    let len = rng.random_range(1..=max_len);
    let mut v: Value = if len == 1 { rng.random_range(0..=9) } else { rng.random_range(1..=9) };
    for _ in 1..len {
        v = v * 10 + rng.random_range(0..=9);
    }
    v
}

/// Write items as JSON lines.
pub fn write_items(path: &Path, items: &[EvalItem]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read items from a JSON-lines file, validating every record.
pub fn read_items(path: &Path) -> Result<Vec<EvalItem>> {
    let text = fs::read_to_string(path)?;
    let mut items = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: EvalItem = serde_json::from_str(line).map_err(|e| {
            Error::Dataset(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        item.validate()
            .map_err(|e| Error::Dataset(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        items.push(item);
    }
    Ok(items)
}

/// The manifest sidecar path for an item file.
pub fn manifest_path(items_path: &Path) -> PathBuf {
    items_path.with_extension("manifest.json")
}

/// Write an item file plus its manifest sidecar; returns the manifest.
pub fn write_dataset(
    items_path: &Path,
    task: Task,
    seed: u64,
    items: &[EvalItem],
) -> Result<DatasetManifest> {
    let manifest = DatasetManifest::for_items(task, seed, items);
    write_items(items_path, items)?;
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(manifest_path(items_path), json)?;
    Ok(manifest)
}

/// Read an item file and its manifest, verifying they agree.
pub fn read_dataset(items_path: &Path) -> Result<(Vec<EvalItem>, DatasetManifest)> {
    let items = read_items(items_path)?;
    let manifest: DatasetManifest =
        serde_json::from_str(&fs::read_to_string(manifest_path(items_path))?)?;
    manifest.matches(&items)?;
    Ok((items, manifest))
}

static CALC_ANNOTATION: Lazy<Regex> = Lazy::new(|| Regex::new(r"<<([^<>]*)>>").expect("regex"));

/// Ingest line-delimited word-problem records.
///
/// Each line is a JSON object with `question` and `answer`. The answer is
/// either a full solution string in the calculator-annotated convention
/// (`... <<3+3=6>>6 ... #### 17`) or a bare number accompanied by an
/// explicit `expressions` array. Every record must carry solution
/// expressions that evaluate consistently to its final answer; malformed
/// lines are rejected with their line number.
pub fn load_word_problems(path: &Path) -> Result<Vec<EvalItem>> {
    let text = fs::read_to_string(path)?;
    let stem = path.file_stem().map_or_else(|| "wp".to_string(), |s| s.to_string_lossy().into());
    let source = path.file_name().map_or_else(String::new, |s| s.to_string_lossy().into());
    let mut items = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = word_problem_item(line, &stem, &source, lineno + 1).map_err(|e| {
            Error::Dataset(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        items.push(item);
    }
    Ok(items)
}

#[derive(Deserialize)]
struct RawWordRecord {
    #[serde(default)]
    id: Option<String>,
    question: String,
    answer: serde_json::Value,
    #[serde(default)]
    expressions: Vec<String>,
}

fn word_problem_item(line: &str, stem: &str, source: &str, lineno: usize) -> Result<EvalItem> {
    let raw: RawWordRecord =
        serde_json::from_str(line).map_err(|e| Error::Dataset(format!("bad record: {e}")))?;
    let id = raw.id.unwrap_or_else(|| format!("{stem}-{lineno:04}"));
    let (answer, expressions) = match &raw.answer {
        serde_json::Value::Number(n) => {
            let answer = n
                .as_i64()
                .map(Value::from)
                .ok_or_else(|| Error::Dataset(format!("record {id}: non-integer answer")))?;
            if raw.expressions.is_empty() {
                return Err(Error::Dataset(format!(
                    "record {id}: numeric answer requires an expressions array"
                )));
            }
            (answer, raw.expressions.clone())
        }
        serde_json::Value::String(solution) => {
            let tail = solution.split("####").nth(1).ok_or_else(|| {
                Error::Dataset(format!("record {id}: solution lacks a #### final answer"))
            })?;
            let answer = clean_number(tail)
                .ok_or_else(|| Error::Dataset(format!("record {id}: unreadable final answer")))?;
            let expressions = if raw.expressions.is_empty() {
                CALC_ANNOTATION
                    .captures_iter(solution)
                    .map(|c| normalize_expression(&c[1]))
                    .collect()
            } else {
                raw.expressions.clone()
            };
            if expressions.is_empty() {
                return Err(Error::Dataset(format!(
                    "record {id}: no solution expressions (annotations or explicit array)"
                )));
            }
            (answer, expressions)
        }
        _ => {
            return Err(Error::Dataset(format!(
                "record {id}: answer must be a number or a solution string"
            )))
        }
    };
    verify_expression_chain(&expressions, answer)
        .map_err(|e| Error::Dataset(format!("record {id}: {e}")))?;
    let item = EvalItem {
        id,
        task: Task::Gsm8k,
        question: Question::Word(raw.question),
        answer,
        answer_length: answer_length(answer),
        expressions,
        metadata: ItemMeta { seed: 0, source: source.to_string() },
    };
    item.validate()?;
    Ok(item)
}

/// Parse an integer out of text, tolerating spaces, `$`, and `,` separators.
fn clean_number(raw: &str) -> Option<Value> {
    let cleaned: String =
        raw.trim().chars().filter(|c| !matches!(c, ' ' | '$' | ',')).collect();
    cleaned.trim_end_matches('.').parse().ok()
}

/// Drop formatting noise from a calculator annotation.
fn normalize_expression(raw: &str) -> String {
    raw.chars().filter(|c| !matches!(c, ' ' | '$' | ',')).collect()
}

/// A solution expression `lhs = stated` with the left side tokenized.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ParsedExpr {
    operands: Vec<Value>,
    ops: Vec<char>,
    stated: Value,
}

impl ParsedExpr {
    fn evaluate(&self) -> Result<Value> {
        let mut acc = self.operands[0];
        for (op, &v) in self.ops.iter().zip(&self.operands[1..]) {
            acc = match op {
                '+' => acc + v,
                '-' => acc - v,
                '*' => acc * v,
                '/' => {
                    if v == 0 || acc % v != 0 {
                        return Err(Error::Dataset(format!(
                            "non-integer division {acc}/{v} in expression"
                        )));
                    }
                    acc / v
                }
                other => return Err(Error::Dataset(format!("unsupported operator {other}"))),
            };
        }
        Ok(acc)
    }
}

/// Tokenize `a+b-c=d`, normalizing `·` and `×` to `*`. The stated result
/// must match the evaluated left side.
fn parse_expression(text: &str) -> Result<ParsedExpr> {
    let (lhs, rhs) = text
        .split_once('=')
        .ok_or_else(|| Error::Dataset(format!("expression {text:?} lacks '='")))?;
    let stated = clean_number(rhs)
        .ok_or_else(|| Error::Dataset(format!("expression {text:?} has a non-numeric result")))?;
    let mut operands = Vec::new();
    let mut ops = Vec::new();
    let mut current = String::new();
    for c in lhs.chars() {
        match c {
            '0'..='9' => current.push(c),
            '+' | '-' | '*' | '/' | '·' | '×' => {
                if current.is_empty() {
                    return Err(Error::Dataset(format!(
                        "expression {text:?} has a dangling operator"
                    )));
                }
                operands.push(current.parse().expect("digits"));
                current.clear();
                ops.push(match c {
                    '·' | '×' => '*',
                    op => op,
                });
            }
            ' ' | '$' | ',' => {}
            other => {
                return Err(Error::Dataset(format!(
                    "expression {text:?} has unsupported character {other:?}"
                )))
            }
        }
    }
    if current.is_empty() {
        return Err(Error::Dataset(format!("expression {text:?} ends without an operand")));
    }
    operands.push(current.parse().expect("digits"));
    let parsed = ParsedExpr { operands, ops, stated };
    let evaluated = parsed.evaluate()?;
    if evaluated != stated {
        return Err(Error::Dataset(format!(
            "expression {text:?} evaluates to {evaluated}, not {stated}"
        )));
    }
    Ok(parsed)
}

/// Check every expression is internally consistent and the last one states
/// the final answer.
fn verify_expression_chain(expressions: &[String], answer: Value) -> Result<()> {
    let mut last = None;
    for text in expressions {
        last = Some(parse_expression(text)?.stated);
    }
    match last {
        Some(v) if v == answer => Ok(()),
        Some(v) => Err(Error::Dataset(format!(
            "expressions conclude {v} but the answer is {answer}"
        ))),
        None => Err(Error::Dataset("no expressions to verify".to_string())),
    }
}

/// Keep the items whose solution uses only addition.
///
/// Items without expressions (or with unparseable ones) are dropped: purity
/// cannot be verified for them.
pub fn filter_addition_only(items: &[EvalItem]) -> Vec<EvalItem> {
    items
        .iter()
        .filter(|item| {
            !item.expressions.is_empty()
                && item.expressions.iter().all(|e| {
                    parse_expression(e).is_ok_and(|p| p.ops.iter().all(|&op| op == '+'))
                })
        })
        .cloned()
        .collect()
}

/// Rewrite an addition-only word problem with freshly drawn quantities.
///
/// Every base quantity (an operand that is not the result of an earlier
/// expression) draws a new value whose digit count is uniform on
/// `digit_range`; derived quantities and the reference answer are
/// recomputed through the expression chain, and the question text is
/// rewritten with matching substitutions. Substitution is positional: the
/// n-th standalone occurrence of a literal in the text pairs with its n-th
/// use as a base operand, and a mismatch between occurrence and use counts
/// is an error rather than a guess. Inflation never draws zero.
pub fn inflate_numbers(
    item: &EvalItem,
    digit_range: (usize, usize),
    seed: u64,
) -> Result<EvalItem> {
    let (lo, hi) = digit_range;
    if lo < 1 || lo > hi {
        return Err(Error::Config(format!("bad digit range {lo}-{hi}")));
    }
    let Question::Word(text) = &item.question else {
        return Err(Error::Dataset(format!(
            "item {}: only word problems can be inflated",
            item.id
        )));
    };
    let exprs: Vec<ParsedExpr> =
        item.expressions.iter().map(|e| parse_expression(e)).collect::<Result<_>>()?;
    if exprs.is_empty() {
        return Err(Error::Dataset(format!("item {}: no expressions to inflate", item.id)));
    }
    if exprs.iter().any(|e| e.ops.iter().any(|&op| op != '+')) {
        return Err(Error::Dataset(format!(
            "item {}: inflation requires an addition-only item",
            item.id
        )));
    }

    let mut rng = stream_rng("inflate", seed, &item.id);
    // Walk the chain: operands equal to an earlier stated result are
    // derived (latest earlier expression wins); everything else is a base
    // quantity and draws fresh.
    let mut new_stated: Vec<Value> = Vec::with_capacity(exprs.len());
    let mut substitutions: Vec<(String, String)> = Vec::new();
    let mut new_exprs: Vec<String> = Vec::with_capacity(exprs.len());
    for (i, expr) in exprs.iter().enumerate() {
        let mut new_operands = Vec::with_capacity(expr.operands.len());
        for &operand in &expr.operands {
            let derived =
                (0..i).rev().find(|&k| exprs[k].stated == operand).map(|k| new_stated[k]);
            match derived {
                Some(value) => new_operands.push(value),
                None => {
                    let len = rng.random_range(lo..=hi);
                    let mut v: Value = rng.random_range(1..=9);
                    for _ in 1..len {
                        v = v * 10 + rng.random_range(0..=9);
                    }
                    substitutions.push((operand.to_string(), v.to_string()));
                    new_operands.push(v);
                }
            }
        }
        let result: Value = new_operands.iter().sum();
        new_stated.push(result);
        let lhs: Vec<String> = new_operands.iter().map(Value::to_string).collect();
        new_exprs.push(format!("{}={result}", lhs.join("+")));
    }
    let answer = *new_stated.last().expect("nonempty chain");

    let new_text = substitute_literals(text, &substitutions)
        .map_err(|e| Error::Dataset(format!("item {}: {e}", item.id)))?;

    let inflated = EvalItem {
        id: format!("{}-inflated", item.id),
        task: item.task,
        question: Question::Word(new_text),
        answer,
        answer_length: answer_length(answer),
        expressions: new_exprs,
        metadata: ItemMeta { seed, source: format!("inflated:{}", item.id) },
    };
    inflated.validate()?;
    Ok(inflated)
}

/// Replace base-quantity literals in question text, pairing the n-th
/// standalone occurrence of each literal with its n-th drawn substitution.
fn substitute_literals(text: &str, substitutions: &[(String, String)]) -> Result<String> {
    // Group replacement values per distinct literal, in draw order.
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (old, new) in substitutions {
        groups.entry(old).or_default().push(new);
    }
    // Collect (offset, old, new) edits.
    let mut edits: Vec<(usize, &str, &str)> = Vec::new();
    for (old, news) in &groups {
        let occurrences = standalone_occurrences(text, old);
        if occurrences.is_empty() {
            return Err(Error::Dataset(format!(
                "quantity {old} does not appear in the question text"
            )));
        }
        if occurrences.len() != news.len() {
            return Err(Error::Dataset(format!(
                "quantity {old} appears {} times in the text but is used {} times; \
                 cannot disambiguate",
                occurrences.len(),
                news.len()
            )));
        }
        for (&offset, &new) in occurrences.iter().zip(news) {
            edits.push((offset, old, new));
        }
    }
    edits.sort_by_key(|&(offset, _, _)| std::cmp::Reverse(offset));
    let mut out = text.to_string();
    for (offset, old, new) in edits {
        out.replace_range(offset..offset + old.len(), new);
    }
    Ok(out)
}

/// Byte offsets where `literal` appears as a whole number (no digit on
/// either side).
fn standalone_occurrences(text: &str, literal: &str) -> Vec<usize> {
    let bytes = text.as_bytes();
    let mut found = Vec::new();
    let mut from = 0;
    while let Some(rel) = text[from..].find(literal) {
        let start = from + rel;
        let end = start + literal.len();
        let digit_before = start > 0 && bytes[start - 1].is_ascii_digit();
        let digit_after = end < bytes.len() && bytes[end].is_ascii_digit();
        if !digit_before && !digit_after {
            found.push(start);
        }
        from = start + 1;
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn sampled_items_hit_their_length_buckets_exactly() {
        for (task, lengths) in [
            (Task::Addition, vec![2usize, 5, 19]),
            (Task::AdditionSubtraction, vec![2, 7, 14]),
            (Task::Multiplication, vec![2, 4, 7]),
            (Task::Parity, vec![2, 17, 30]),
            (Task::MultiAddition, vec![2, 6, 10]),
            (Task::MultiplyAsAddition, vec![2, 6, 10]),
        ] {
            let items = sample_by_answer_length(task, &lengths, 20, 7).expect("sample");
            assert_eq!(items.len(), lengths.len() * 20);
            for item in &items {
                item.validate().expect("invariants");
                assert_eq!(item.task, task);
                assert!(lengths.contains(&item.answer_length));
            }
            for &l in &lengths {
                assert_eq!(items.iter().filter(|i| i.answer_length == l).count(), 20);
            }
        }
    }

    #[test]
    fn full_protocol_ranges_are_feasible() {
        for task in [
            Task::Addition,
            Task::AdditionSubtraction,
            Task::Multiplication,
            Task::Parity,
            Task::MultiAddition,
            Task::MultiplyAsAddition,
        ] {
            let range = supported_lengths(task).expect("sampled task");
            let lengths: Vec<usize> = range.collect();
            let items = sample_by_answer_length(task, &lengths, 3, 123).expect("sample");
            assert_eq!(items.len(), lengths.len() * 3);
        }
    }

    #[test]
    fn multiplication_keeps_one_factor_small() {
        let lengths: Vec<usize> = (2..=7).collect();
        let items =
            sample_by_answer_length(Task::Multiplication, &lengths, 25, 99).expect("sample");
        for item in items {
            let Question::Mul { a, b } = item.question else { panic!("mul item") };
            assert!(a.min(b) < 1000, "{a}*{b} has no small factor");
        }
    }

    #[test]
    fn out_of_range_and_unsampleable_requests_fail() {
        assert!(sample_by_answer_length(Task::Multiplication, &[8], 1, 0).is_err());
        assert!(sample_by_answer_length(Task::Addition, &[1], 1, 0).is_err());
        assert!(sample_by_answer_length(Task::Gsm8k, &[3], 1, 0).is_err());
    }

    #[test]
    fn same_seed_means_identical_files() {
        let dir = tempfile::tempdir().expect("tempdir");
        let lengths = [2usize, 3, 4];
        let mut bytes = Vec::new();
        for run in 0..2 {
            let items =
                sample_by_answer_length(Task::Addition, &lengths, 10, 42).expect("sample");
            let path = dir.path().join(format!("run{run}.jsonl"));
            write_dataset(&path, Task::Addition, 42, &items).expect("write");
            bytes.push((
                fs::read(&path).expect("items"),
                fs::read(manifest_path(&path)).expect("manifest"),
            ));
        }
        assert_eq!(bytes[0], bytes[1], "same seed must produce identical bytes");
        let different =
            sample_by_answer_length(Task::Addition, &lengths, 10, 43).expect("sample");
        let original = read_items(&dir.path().join("run0.jsonl")).expect("read");
        assert_ne!(original, different, "different seeds must differ");
    }

    #[test]
    fn length_streams_are_independent() {
        let solo = sample_by_answer_length(Task::Addition, &[5], 10, 42).expect("sample");
        let joint = sample_by_answer_length(Task::Addition, &[2, 5], 10, 42).expect("sample");
        let joint_five: Vec<&EvalItem> =
            joint.iter().filter(|i| i.answer_length == 5).collect();
        for (a, b) in solo.iter().zip(joint_five) {
            assert_eq!(a, b, "length-5 stream must not depend on other requested lengths");
        }
    }

    #[test]
    fn datasets_round_trip_and_manifests_verify() {
        let dir = tempfile::tempdir().expect("tempdir");
        let items = sample_by_answer_length(Task::Parity, &[2, 3], 5, 1).expect("sample");
        let path = dir.path().join("parity.jsonl");
        let manifest = write_dataset(&path, Task::Parity, 1, &items).expect("write");
        assert_eq!(manifest.total(), 10);
        assert_eq!(manifest.lengths, vec![2, 3]);
        let (back, sidecar) = read_dataset(&path).expect("read");
        assert_eq!(back, items);
        assert_eq!(sidecar, manifest);

        // A doctored manifest no longer matches.
        let mut wrong = manifest;
        wrong.counts.insert(2, 4);
        assert!(wrong.matches(&items).is_err());
    }

    /// Leading-digit distribution oracle: an independent reimplementation
    /// of the declared operand scheme (different RNG, different code path)
    /// must produce a statistically indistinguishable answer population.
    /// Two-sample chi-square over leading digits, 8 degrees of freedom;
    /// 40.0 is far above the 99.99th percentile (~33.4) so a false alarm is
    /// vanishingly rare, while a scheme change (e.g. value-uniform instead
    /// of digit-length-uniform operands) scores in the hundreds.
    #[test]
    fn leading_digit_distribution_matches_declared_scheme() {
        const N: usize = 10_000;
        const LEN: usize = 4;
        let items = sample_by_answer_length(Task::Addition, &[LEN], N, 5).expect("sample");
        let mut ours = [0f64; 9];
        for item in &items {
            let lead = item.answer.to_string().as_bytes()[0] - b'0';
            ours[lead as usize - 1] += 1.0;
        }

        use rand::rngs::StdRng;
        let mut rng = StdRng::seed_from_u64(998877);
        let mut draw = |max_len: usize| -> i128 {
            let len = rng.random_range(1..=max_len);
            let first = if len == 1 { rng.random_range(0..=9) } else { rng.random_range(1..=9) };
            (1..len).fold(first, |v, _| v * 10 + rng.random_range(0..=9i128))
        };
        let mut theirs = [0f64; 9];
        let mut accepted = 0;
        while accepted < N {
            let sum = draw(LEN) + draw(LEN);
            if sum >= 1000 && sum < 10_000 {
                theirs[(sum.to_string().as_bytes()[0] - b'0') as usize - 1] += 1.0;
                accepted += 1;
            }
        }

        let chi2: f64 = ours
            .iter()
            .zip(&theirs)
            .filter(|(a, b)| **a + **b > 0.0)
            .map(|(a, b)| (a - b) * (a - b) / (a + b))
            .sum();
        assert!(chi2 < 40.0, "leading-digit chi-square {chi2:.1} exceeds the documented bound");
    }

    const TOMMY: &str = r#"{"question": "Tommy has 3 toy cars. His neighbor, Jessie, has 3 cars too. Jessie's older brother has 5 more cars than Tommy and Jessie. How many cars do the three of them have altogether?", "answer": "Tommy and Jessie have 3+3=<<3+3=6>>6 cars. Jessie's brother has 5+6=<<5+6=11>>11 cars. Altogether they have 6+11=<<6+11=17>>17 cars. #### 17"}"#;

    fn corpus_file(dir: &tempfile::TempDir, name: &str, lines: &[&str]) -> PathBuf {
        let path = dir.path().join(name);
        let mut f = fs::File::create(&path).expect("create");
        for line in lines {
            writeln!(f, "{line}").expect("write");
        }
        path
    }

    #[test]
    fn word_problems_load_with_extracted_expressions() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = corpus_file(&dir, "wp.jsonl", &[TOMMY]);
        let items = load_word_problems(&path).expect("load");
        assert_eq!(items.len(), 1);
        let item = &items[0];
        assert_eq!(item.answer, 17);
        assert_eq!(item.answer_length, 2);
        assert_eq!(item.expressions, vec!["3+3=6", "5+6=11", "6+11=17"]);
        assert!(matches!(&item.question, Question::Word(t) if t.starts_with("Tommy")));
        item.validate().expect("invariants");
    }

    #[test]
    fn empty_corpus_loads_empty() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = corpus_file(&dir, "empty.jsonl", &[]);
        assert!(load_word_problems(&path).expect("load").is_empty());
    }

    #[test]
    fn corrupt_records_name_their_line() {
        let dir = tempfile::tempdir().expect("tempdir");
        for (name, bad_line, needle) in [
            ("notjson.jsonl", "this is not json", "2"),
            (
                "mismatch.jsonl",
                r#"{"id": "bad-sum", "question": "q 1 and 2?", "answer": 4, "expressions": ["1+2=3"]}"#,
                "bad-sum",
            ),
            (
                "noexprs.jsonl",
                r#"{"question": "seven plus one?", "answer": "eight #### 8"}"#,
                "2",
            ),
            (
                "badexpr.jsonl",
                r#"{"question": "half of 9?", "answer": 4, "expressions": ["9/2=4"]}"#,
                "9/2",
            ),
        ] {
            let path = corpus_file(&dir, name, &[TOMMY, bad_line]);
            let err = load_word_problems(&path).expect_err("must fail").to_string();
            assert!(err.contains(needle), "{name}: error {err:?} lacks {needle:?}");
        }
    }

    #[test]
    fn addition_only_filter_keeps_exactly_the_pure_items() {
        let dir = tempfile::tempdir().expect("tempdir");
        let mut lines = vec![TOMMY.to_string()];
        // Three more addition-only items.
        for (i, expr) in [("a", "2+2=4"), ("b", "10+5=15"), ("c", "7+1+2=10")] {
            lines.push(format!(
                r#"{{"id": "add-{i}", "question": "q {i} uses {q}?", "answer": {ans}, "expressions": ["{expr}"]}}"#,
                q = expr.split('=').next().unwrap().replace('+', " and "),
                ans = expr.split('=').nth(1).unwrap(),
            ));
        }
        // Six items that use other operators.
        for (i, expr, ans) in [
            ("m1", "4·87=348", 348),
            ("m2", "4*87=348", 348),
            ("s1", "9-2=7", 7),
            ("d1", "8/2=4", 4),
            ("x1", "3×5=15", 15),
            ("mix", "2+3*1=5", 5),
        ] {
            lines.push(format!(
                r#"{{"id": "other-{i}", "question": "q {i}?", "answer": {ans}, "expressions": ["{expr}"]}}"#,
            ));
        }
        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        let path = corpus_file(&dir, "mixed.jsonl", &refs);
        let items = load_word_problems(&path).expect("load");
        assert_eq!(items.len(), 10);
        let pure = filter_addition_only(&items);
        assert_eq!(pure.len(), 4);
        assert!(pure.iter().all(|i| {
            i.expressions.iter().all(|e| !e.contains(['*', '-', '/', '·', '×']))
        }));
    }

    fn tommy_item() -> EvalItem {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = corpus_file(&dir, "wp.jsonl", &[TOMMY]);
        load_word_problems(&path).expect("load").remove(0)
    }

    #[test]
    fn inflation_recomputes_the_whole_chain() {
        let item = tommy_item();
        let big = inflate_numbers(&item, (3, 7), 11).expect("inflate");
        big.validate().expect("invariants");
        assert_eq!(big.expressions.len(), item.expressions.len());

        // Independent oracle: re-evaluate the rewritten chain.
        let mut results: Vec<Value> = Vec::new();
        for expr in &big.expressions {
            let (lhs, rhs) = expr.split_once('=').expect("eq");
            let sum: Value = lhs.split('+').map(|t| t.parse::<Value>().expect("int")).sum();
            assert_eq!(sum, rhs.parse::<Value>().expect("int"));
            results.push(sum);
        }
        assert_eq!(*results.last().expect("chain"), big.answer);

        // Graph shape preserved: same operator counts, derived links intact.
        let Question::Word(text) = &big.question else { panic!("word item") };
        let (first_lhs, _) = big.expressions[0].split_once('=').expect("eq");
        for operand in first_lhs.split('+') {
            assert!(
                text.contains(operand),
                "base quantity {operand} missing from rewritten text"
            );
            assert!(operand.len() >= 3 && operand.len() <= 7);
        }
        // The derived operand of the second expression is the first result.
        let (second_lhs, _) = big.expressions[1].split_once('=').expect("eq");
        assert!(second_lhs.split('+').any(|t| t.parse::<Value>().unwrap() == results[0]));

        // Deterministic per seed, different across seeds.
        let again = inflate_numbers(&item, (3, 7), 11).expect("inflate");
        assert_eq!(big, again);
        let other = inflate_numbers(&item, (3, 7), 12).expect("inflate");
        assert_ne!(big.answer, other.answer);
    }

    #[test]
    fn degenerate_range_keeps_single_digit_bases() {
        let item = tommy_item();
        let small = inflate_numbers(&item, (1, 1), 3).expect("inflate");
        small.validate().expect("invariants");
        let (first_lhs, _) = small.expressions[0].split_once('=').expect("eq");
        for operand in first_lhs.split('+') {
            assert_eq!(operand.len(), 1);
            assert_ne!(operand, "0", "inflation never draws zero");
        }
    }

    #[test]
    fn inflation_rejects_missing_and_ambiguous_literals() {
        let mut item = tommy_item();
        // Literal not present in the text.
        item.expressions = vec!["7+2=9".to_string(), "9+8=17".to_string()];
        let err = inflate_numbers(&item, (2, 2), 0).expect_err("missing literal").to_string();
        assert!(err.contains("does not appear"), "{err}");

        // More text occurrences than base uses.
        let mut ambiguous = tommy_item();
        let Question::Word(text) = &mut ambiguous.question else { panic!() };
        *text = text.replacen("Jessie's older brother", "Jessie's 3 brothers", 1);
        let err = inflate_numbers(&ambiguous, (2, 2), 0).expect_err("ambiguous").to_string();
        assert!(err.contains("cannot disambiguate"), "{err}");

        // Non-additive chains refuse inflation.
        let mut mul = tommy_item();
        mul.expressions = vec!["3*3=9".to_string()];
        mul.answer = 9;
        mul.answer_length = 1;
        assert!(inflate_numbers(&mul, (2, 2), 0).is_err());
    }

    #[test]
    fn mean_inflated_answer_length_is_tunable_to_seven() {
        let item = tommy_item();
        let mut total = 0usize;
        let mut count = 0usize;
        for len in 3..=12 {
            for seed in 0..5 {
                let inflated =
                    inflate_numbers(&item, (len, len), seed).expect("inflate");
                total += inflated.answer_length;
                count += 1;
            }
        }
        let mean = total as f64 / count as f64;
        assert!((6.5..=8.5).contains(&mean), "mean answer length {mean:.2} not near 7");
    }
}
