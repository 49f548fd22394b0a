//! Prompt text generation: renders execution traces as prompt blocks and
//! assembles complete few-shot prompts.
//!
//! Every prompt is built from *blocks* — one fully worked example per shot —
//! joined by a strategy-specific separator and closed with the *trigger* for
//! the question under evaluation. Each block textually starts with its own
//! trigger, so a reference continuation for any question is the block text
//! with the trigger prefix removed.

pub mod addition;
pub mod addsub;
pub mod composite;
pub mod fmt;
pub mod gsm8k;
pub mod multiplication;
pub mod parity;

use std::collections::BTreeSet;
use std::fmt as stdfmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numerics::{digits_of, Value};
use crate::{Error, Result};

pub use addition::{SnShift, StandardOpts, SymbolSet};

/// The arithmetic task family a prompt or dataset targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Two-operand addition of nonnegative integers.
    Addition,
    /// Two-term sums with signed operands (mixed `+`/`-`).
    AdditionSubtraction,
    /// Two-operand multiplication.
    Multiplication,
    /// Parity of a binary list.
    Parity,
    /// Sums of two or more operands solved as a chain of additions.
    MultiAddition,
    /// Multiplication rewritten as repeated addition.
    MultiplyAsAddition,
    /// Natural-language word problems with addition-only solutions.
    Gsm8k,
}

impl Task {
    /// Every task, in a stable order.
    pub const ALL: [Task; 7] = [
        Task::Addition,
        Task::AdditionSubtraction,
        Task::Multiplication,
        Task::Parity,
        Task::MultiAddition,
        Task::MultiplyAsAddition,
        Task::Gsm8k,
    ];

    /// Stable identifier used in files, manifests, and the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Task::Addition => "addition",
            Task::AdditionSubtraction => "addition_subtraction",
            Task::Multiplication => "multiplication",
            Task::Parity => "parity",
            Task::MultiAddition => "multi_addition",
            Task::MultiplyAsAddition => "multiply_as_addition",
            Task::Gsm8k => "gsm8k",
        }
    }
}

impl stdfmt::Display for Task {
    fn fmt(&self, f: &mut stdfmt::Formatter<'_>) -> stdfmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Task> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown task: {s}")))
    }
}

/// A single question an item poses to the model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Question {
    /// `a+b` (either term may be negative, rendering as subtraction).
    Add { a: Value, b: Value },
    /// `a*b`.
    Mul { a: Value, b: Value },
    /// A sum of two or more nonnegative terms.
    Sum(Vec<Value>),
    /// A binary list whose parity is asked for.
    List(Vec<u8>),
    /// A natural-language word problem.
    Word(String),
}

impl Question {
    /// The numeric answer, when the question has one derivable by arithmetic.
    pub fn answer(&self) -> Option<Value> {
        match self {
            Question::Add { a, b } => Some(a + b),
            Question::Mul { a, b } => Some(a * b),
            Question::Sum(vs) => Some(vs.iter().sum()),
            Question::List(bits) => Some(Value::from(bits.iter().sum::<u8>() % 2)),
            Question::Word(_) => None,
        }
    }

    /// The answer-length bucket the question falls in: digit count of the
    /// answer magnitude, except parity questions which bucket by list length.
    pub fn answer_len(&self) -> usize {
        match self {
            Question::List(bits) => bits.len(),
            _ => self
                .answer()
                .map(|v| digits_of(v.unsigned_abs() as Value).len())
                .unwrap_or(0),
        }
    }

    /// The question as it appears in prompt text (without any `Q:`/`Problem:`
    /// framing).
    pub fn display(&self) -> String {
        match self {
            Question::Add { a, b } => addition::term_chain(&[*a, *b]),
            Question::Mul { a, b } => format!("{a}*{b}"),
            Question::Sum(vs) => addition::term_chain(vs),
            Question::List(bits) => parity::parity_question(bits),
            Question::Word(text) => text.clone(),
        }
    }
}

/// Routing marker appended to a word-problem trigger, selecting between an
/// algorithmic and a direct answer style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Algo,
    NonAlgo,
}

impl Flag {
    /// The literal token inserted after the answer marker.
    pub fn token(&self) -> &'static str {
        match self {
            Flag::Algo => "<ALGO>",
            Flag::NonAlgo => "<NONALGO>",
        }
    }
}

/// How worked examples and the trigger are phrased.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Full step-by-step execution trace.
    Algorithmic,
    /// Bare question/answer pairs.
    FewShot,
    /// Freeform decomposition into round-number partial sums.
    ChainOfThought,
    /// A fixed natural-language description of the procedure, no shots.
    InstructionOnly,
    /// Compact digit-state scratchpad.
    Scratchpad,
    /// Scratchpad with per-step prose annotations.
    DetailedScratchpad,
    /// Algorithmic trace without the remaining-digit copy sentences.
    UncommonOperation,
    /// Algorithmic trace without the explicit carry-division clauses.
    NonexplicitCarry,
    /// Algorithmic trace whose displayed second digit is perturbed in the
    /// listed 1-based calculation steps only.
    IrregularErrors { steps: BTreeSet<usize>, delta: i8 },
    /// Algorithmic trace whose displayed second digit is perturbed in every
    /// calculation step.
    SystematicErrors { delta: i8 },
    /// Compact symbolic trace with meaningful keywords (`Len`, `MaxLen`).
    SymbolsOnly,
    /// Symbolic trace with meaningless keywords (`VBZ`, `UXOVBZ`).
    SymbolsUninformative,
    /// Symbolic trace with misleading keywords (`Str`, `MinStr`).
    SymbolsMisleading,
    /// Sign-aware addition/subtraction traces in one prompt.
    CombinedAddSub,
    /// Composition prompt: plain addition shots plus the new-skill shots.
    CompositeSimple,
    /// Composition prompt with the addition shots recast as one-step chains.
    CompositeAugmented,
    /// Composition prompt with only the new-skill shots.
    CompositeNone,
    /// Chain traces that defer each subproblem to a tool call.
    ToolCall,
}

impl Strategy {
    /// Stable identifier used in files, manifests, and the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Algorithmic => "algorithmic",
            Strategy::FewShot => "few_shot",
            Strategy::ChainOfThought => "chain_of_thought",
            Strategy::InstructionOnly => "instruction_only",
            Strategy::Scratchpad => "scratchpad",
            Strategy::DetailedScratchpad => "detailed_scratchpad",
            Strategy::UncommonOperation => "uncommon_operation",
            Strategy::NonexplicitCarry => "nonexplicit_carry",
            Strategy::IrregularErrors { .. } => "irregular_errors",
            Strategy::SystematicErrors { .. } => "systematic_errors",
            Strategy::SymbolsOnly => "symbols_only",
            Strategy::SymbolsUninformative => "symbols_uninformative",
            Strategy::SymbolsMisleading => "symbols_misleading",
            Strategy::CombinedAddSub => "combined_add_sub",
            Strategy::CompositeSimple => "composite_simple",
            Strategy::CompositeAugmented => "composite_augmented",
            Strategy::CompositeNone => "composite_none",
            Strategy::ToolCall => "tool_call",
        }
    }

    /// Parse a strategy name, filling variant parameters with their
    /// defaults (irregular errors: steps {1,3}, delta −1; systematic
    /// errors: delta −1).
    pub fn from_name(s: &str) -> Option<Strategy> {
        Some(match s {
            "algorithmic" => Strategy::Algorithmic,
            "few_shot" => Strategy::FewShot,
            "chain_of_thought" => Strategy::ChainOfThought,
            "instruction_only" => Strategy::InstructionOnly,
            "scratchpad" => Strategy::Scratchpad,
            "detailed_scratchpad" => Strategy::DetailedScratchpad,
            "uncommon_operation" => Strategy::UncommonOperation,
            "nonexplicit_carry" => Strategy::NonexplicitCarry,
            "irregular_errors" => Strategy::IrregularErrors {
                steps: [1usize, 3].into_iter().collect(),
                delta: -1,
            },
            "systematic_errors" => Strategy::SystematicErrors { delta: -1 },
            "symbols_only" => Strategy::SymbolsOnly,
            "symbols_uninformative" => Strategy::SymbolsUninformative,
            "symbols_misleading" => Strategy::SymbolsMisleading,
            "combined_add_sub" => Strategy::CombinedAddSub,
            "composite_simple" => Strategy::CompositeSimple,
            "composite_augmented" => Strategy::CompositeAugmented,
            "composite_none" => Strategy::CompositeNone,
            "tool_call" => Strategy::ToolCall,
            _ => return None,
        })
    }

    /// True for the non-algorithmic comparison strategies.
    pub fn is_baseline(&self) -> bool {
        matches!(
            self,
            Strategy::FewShot
                | Strategy::ChainOfThought
                | Strategy::InstructionOnly
                | Strategy::Scratchpad
                | Strategy::DetailedScratchpad
        )
    }
}

impl stdfmt::Display for Strategy {
    fn fmt(&self, f: &mut stdfmt::Formatter<'_>) -> stdfmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        Strategy::from_name(s).ok_or_else(|| Error::Config(format!("unknown strategy: {s}")))
    }
}

/// Everything needed to assemble one prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub task: Task,
    pub strategy: Strategy,
    /// Worked examples; `None` selects the task/strategy default catalog.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<Vec<Question>>,
    /// The question left open for the model.
    pub trigger: Question,
    /// Optional routing marker appended after the trigger's answer marker.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<Flag>,
}

impl PromptSpec {
    /// A spec with default shots and no flag.
    pub fn new(task: Task, strategy: Strategy, trigger: Question) -> PromptSpec {
        PromptSpec { task, strategy, shots: None, trigger, flag: None }
    }
}

/// What a span of assembled prompt text contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    /// The i-th worked example, including its trailing separator.
    Shot(usize),
    /// The trailing trigger for the evaluated question.
    Trigger,
}

/// A half-open byte range of the assembled text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub kind: SpanKind,
    pub start: usize,
    pub end: usize,
}

/// An assembled prompt plus the layout facts consumers need: where each shot
/// lives, what stop sequences apply, and the ID/OOD answer-length boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    /// Spans tile `text` exactly: sorted, contiguous, first starts at 0 and
    /// last ends at `text.len()`.
    pub spans: Vec<Span>,
    pub stop_sequences: Vec<String>,
    pub task: Task,
    pub strategy: String,
    pub n_shots: usize,
    /// Longest answer among the shots; answers longer than this are
    /// out-of-distribution for the prompt.
    pub max_shot_answer_len: usize,
}

/// The tool-call marker emitted by chain prompts that defer arithmetic.
pub const TOOL_CALL_TOKEN: &str = "\u{27E8}GET\u{27E9}";

fn unsupported(task: Task, strategy: &Strategy) -> Error {
    Error::Unsupported { task: task.name().to_string(), strategy: strategy.name().to_string() }
}

fn bad_question(task: Task, q: &Question) -> Error {
    Error::InvalidQuestion(format!("task {task} cannot pose question {q:?}"))
}

/// Whether `task` has a defined prompt format under `strategy`.
pub fn supported(task: Task, strategy: &Strategy) -> bool {
    use Strategy::*;
    match task {
        Task::Addition => matches!(
            strategy,
            Algorithmic
                | FewShot
                | ChainOfThought
                | InstructionOnly
                | Scratchpad
                | DetailedScratchpad
                | UncommonOperation
                | NonexplicitCarry
                | IrregularErrors { .. }
                | SystematicErrors { .. }
                | SymbolsOnly
                | SymbolsUninformative
                | SymbolsMisleading
        ),
        Task::AdditionSubtraction => {
            matches!(strategy, Algorithmic | CombinedAddSub | FewShot | ChainOfThought)
        }
        Task::Multiplication => matches!(strategy, Algorithmic | FewShot | ChainOfThought),
        Task::Parity => matches!(strategy, Algorithmic | FewShot | Scratchpad),
        Task::MultiAddition | Task::MultiplyAsAddition => matches!(
            strategy,
            Algorithmic
                | CompositeSimple
                | CompositeAugmented
                | CompositeNone
                | FewShot
                | ChainOfThought
                | ToolCall
        ),
        Task::Gsm8k => matches!(strategy, Algorithmic),
    }
}

fn nonneg_pair(task: Task, q: &Question) -> Result<(Value, Value)> {
    match q {
        Question::Add { a, b } if *a >= 0 && *b >= 0 => Ok((*a, *b)),
        _ => Err(bad_question(task, q)),
    }
}

fn mul_pair(task: Task, q: &Question) -> Result<(Value, Value)> {
    match q {
        Question::Mul { a, b } if *a >= 0 && *b >= 0 => Ok((*a, *b)),
        _ => Err(bad_question(task, q)),
    }
}

fn sum_values(task: Task, q: &Question) -> Result<Vec<Value>> {
    match q {
        Question::Sum(vs) if vs.len() >= 2 && vs.iter().all(|v| *v >= 0) => Ok(vs.clone()),
        Question::Add { a, b } if *a >= 0 && *b >= 0 => Ok(vec![*a, *b]),
        _ => Err(bad_question(task, q)),
    }
}

fn parity_bits<'q>(task: Task, q: &'q Question) -> Result<&'q [u8]> {
    match q {
        Question::List(bits) if !bits.is_empty() && bits.iter().all(|b| *b <= 1) => Ok(bits),
        _ => Err(bad_question(task, q)),
    }
}

/// Validate an irregular-error step set against the trace length of `a+b`.
fn check_irregular(steps: &BTreeSet<usize>, a: Value, b: Value) -> Result<()> {
    let n_steps = digits_of(a).len().max(digits_of(b).len());
    match steps.iter().max() {
        None => Err(Error::InvalidQuestion("irregular error step set is empty".into())),
        Some(max) if *max > n_steps => Err(Error::InvalidQuestion(format!(
            "irregular error step {max} exceeds the {n_steps}-step trace of {a}+{b}"
        ))),
        _ => Ok(()),
    }
}

/// One fully worked example block for `q` under `task`/`strategy`.
///
/// `shot_idx` is the example's 0-based position in its prompt, or `None` for
/// a free-standing render; the standard addition prompt states its third
/// shot's header with `FN=[…]` instead of `FN […]`, and the position feeds
/// that quirk.
pub fn block_text(
    task: Task,
    strategy: &Strategy,
    q: &Question,
    shot_idx: Option<usize>,
) -> Result<String> {
    use Strategy::*;
    if !supported(task, strategy) {
        return Err(unsupported(task, strategy));
    }
    let header_eq = shot_idx == Some(2);
    let std_opts = |shift: SnShift, prefix: bool, explicit_carry: bool| StandardOpts {
        header_eq,
        prefix,
        explicit_carry,
        shift,
    };
    match task {
        Task::Addition => {
            let (a, b) = nonneg_pair(task, q)?;
            Ok(match strategy {
                Algorithmic => addition::addition_standard_block(a, b, &std_opts(SnShift::None, true, true)),
                UncommonOperation => {
                    addition::addition_standard_block(a, b, &std_opts(SnShift::None, false, true))
                }
                NonexplicitCarry => {
                    addition::addition_standard_block(a, b, &std_opts(SnShift::None, true, false))
                }
                SystematicErrors { delta } => addition::addition_standard_block(
                    a,
                    b,
                    &std_opts(SnShift::All(*delta), true, true),
                ),
                IrregularErrors { steps, delta } => {
                    check_irregular(steps, a, b)?;
                    addition::addition_standard_block(
                        a,
                        b,
                        &std_opts(SnShift::Steps(steps.clone(), *delta), true, true),
                    )
                }
                SymbolsOnly | SymbolsUninformative | SymbolsMisleading => {
                    let set = match strategy {
                        SymbolsOnly => SymbolSet::Plain,
                        SymbolsUninformative => SymbolSet::Uninformative,
                        _ => SymbolSet::Misleading,
                    };
                    addition::addition_symbols_block(a, b, set, &[3usize].into_iter().collect())
                }
                FewShot => addition::pair_few_shot_block(a, b),
                ChainOfThought => addition::pair_cot_block(a, b),
                InstructionOnly => {
                    format!(
                        "{}\nQ: What is {a}+{b}=?\nA:{}",
                        addition::instruction_text(),
                        addition::instruction_completion(a, b)
                    )
                }
                Scratchpad => addition::scratchpad_block(a, b),
                DetailedScratchpad => addition::detailed_scratchpad_block(a, b),
                _ => return Err(unsupported(task, strategy)),
            })
        }
        Task::AdditionSubtraction => match q {
            Question::Add { a, b } => Ok(match strategy {
                Algorithmic | CombinedAddSub => addsub::addsub_algorithmic_block(*a, *b),
                FewShot => addition::pair_few_shot_block(*a, *b),
                ChainOfThought => addition::pair_cot_block(*a, *b),
                _ => return Err(unsupported(task, strategy)),
            }),
            _ => Err(bad_question(task, q)),
        },
        Task::Multiplication => {
            let (a, b) = mul_pair(task, q)?;
            Ok(match strategy {
                Algorithmic => multiplication::multiplication_algorithmic_block(a, b),
                FewShot => multiplication::mult_few_shot_block(a, b),
                ChainOfThought => multiplication::mult_cot_block(a, b),
                _ => return Err(unsupported(task, strategy)),
            })
        }
        Task::Parity => {
            let bits = parity_bits(task, q)?;
            Ok(match strategy {
                Algorithmic => parity::parity_algorithmic_block(bits),
                Scratchpad => parity::parity_scratchpad_block(bits),
                FewShot => parity::parity_few_shot_block(bits),
                _ => return Err(unsupported(task, strategy)),
            })
        }
        Task::MultiAddition | Task::MultiplyAsAddition => match strategy {
            Algorithmic | CompositeSimple | CompositeAugmented | CompositeNone => Ok(match q {
                Question::Add { .. } => {
                    let (a, b) = nonneg_pair(task, q)?;
                    if matches!(strategy, CompositeAugmented) {
                        composite::multiadd_chain_block(&[a, b])
                    } else {
                        composite::plain_addition_block(a, b)
                    }
                }
                Question::Sum(_) => composite::multiadd_chain_block(&sum_values(task, q)?),
                Question::Mul { .. } => {
                    let (a, b) = mul_pair(task, q)?;
                    composite::mulasadd_block(a, b)
                }
                _ => return Err(bad_question(task, q)),
            }),
            ChainOfThought => Ok(match q {
                Question::Mul { .. } => {
                    let (a, b) = mul_pair(task, q)?;
                    composite::mulasadd_cot_block(a, b)
                }
                _ => composite::multiadd_cot_block(&sum_values(task, q)?),
            }),
            FewShot => Ok(match q {
                Question::Mul { .. } => {
                    let (a, b) = mul_pair(task, q)?;
                    multiplication::mult_few_shot_block(a, b)
                }
                _ => composite::multiadd_few_shot_block(&sum_values(task, q)?),
            }),
            ToolCall => Ok(match q {
                Question::Mul { .. } => {
                    let (a, b) = mul_pair(task, q)?;
                    composite::toolcall_mulasadd_block(a, b)
                }
                _ => composite::toolcall_multiadd_block(&sum_values(task, q)?),
            }),
            _ => Err(unsupported(task, strategy)),
        },
        Task::Gsm8k => match q {
            Question::Add { .. } => {
                let (a, b) = nonneg_pair(task, q)?;
                Ok(gsm8k::word_chain_block(&[a, b]))
            }
            Question::Sum(_) => Ok(gsm8k::word_chain_block(&sum_values(task, q)?)),
            _ => Err(bad_question(task, q)),
        },
    }
}

/// The unanswered framing of `q`: the text a prompt ends with so the model
/// continues from the answer marker. Every block starts with its trigger.
pub fn trigger_text(task: Task, strategy: &Strategy, q: &Question) -> Result<String> {
    use Strategy::*;
    if !supported(task, strategy) {
        return Err(unsupported(task, strategy));
    }
    match task {
        Task::Addition => {
            let (a, b) = nonneg_pair(task, q)?;
            Ok(match strategy {
                FewShot => format!("Q: {a}+{b}=\nA:"),
                ChainOfThought => {
                    format!("Problem: {a}+{b}=?\nExplanation: Let's think step by step.")
                }
                InstructionOnly => {
                    format!("{}\nQ: What is {a}+{b}=?\nA:", addition::instruction_text())
                }
                Scratchpad | DetailedScratchpad => format!("Input:\n{a}+{b}\nTarget:"),
                _ => format!("Problem: {a}+{b}=\nExplanation:"),
            })
        }
        Task::AdditionSubtraction => match q {
            Question::Add { .. } => {
                let chain = q.display();
                Ok(match strategy {
                    FewShot => format!("Q: {chain}=\nA:"),
                    ChainOfThought => {
                        format!("Problem: {chain}=?\nExplanation: Let's think step by step.")
                    }
                    _ => format!("Problem: {chain}=\nExplanation:"),
                })
            }
            _ => Err(bad_question(task, q)),
        },
        Task::Multiplication => {
            let (a, b) = mul_pair(task, q)?;
            Ok(match strategy {
                FewShot => format!("Q: {a}*{b}=\nA:"),
                ChainOfThought => format!("Q: {a}*{b}=?\nA: Let's think step by step."),
                _ => format!("Q: {a}*{b}=\nExplanation:"),
            })
        }
        Task::Parity => Ok(format!("Q: {}\nA:", parity::parity_question(parity_bits(task, q)?))),
        Task::MultiAddition | Task::MultiplyAsAddition => {
            let chain = match q {
                Question::Mul { .. } => {
                    let (a, b) = mul_pair(task, q)?;
                    format!("{a}*{b}")
                }
                _ => {
                    sum_values(task, q)?;
                    q.display()
                }
            };
            Ok(match strategy {
                FewShot => format!("Q: {chain}=\nA:"),
                ChainOfThought => format!("Q: {chain}=\nA: Let's think step by step."),
                _ => format!("Problem: {chain}=\nExplanation:"),
            })
        }
        Task::Gsm8k => match q {
            Question::Word(text) => Ok(format!("Q: {text}\nA:")),
            Question::Add { .. } | Question::Sum(_) => {
                sum_values(task, q)?;
                Ok(format!("Problem: {}=\nExplanation:", q.display()))
            }
            _ => Err(bad_question(task, q)),
        },
    }
}

/// The reference continuation for `q`: its worked block with the trigger
/// prefix removed.
pub fn golden_completion(task: Task, strategy: &Strategy, q: &Question) -> Result<String> {
    let block = block_text(task, strategy, q, None)?;
    let trigger = trigger_text(task, strategy, q)?;
    match block.strip_prefix(&trigger) {
        Some(rest) => Ok(rest.to_string()),
        None => Err(Error::InvalidQuestion(format!(
            "block for {q:?} does not extend its trigger under {strategy}"
        ))),
    }
}

/// The canonical full-trace block for `q` under `task`.
pub fn render_algorithmic(task: Task, q: &Question) -> Result<String> {
    block_text(task, &Strategy::Algorithmic, q, None)
}

/// A comparison-strategy block (few-shot, chain-of-thought, instructions,
/// scratchpads) for `q` under `task`.
pub fn render_baseline(strategy: &Strategy, task: Task, q: &Question) -> Result<String> {
    if !strategy.is_baseline() {
        return Err(unsupported(task, strategy));
    }
    block_text(task, strategy, q, None)
}

/// An algorithmic-variant block for `q`; the task is inferred from the
/// variant and question shape.
pub fn render_variant(variant: &Strategy, q: &Question) -> Result<String> {
    let task = match (variant, q) {
        (Strategy::CombinedAddSub, _) => Task::AdditionSubtraction,
        (
            Strategy::CompositeSimple
            | Strategy::CompositeAugmented
            | Strategy::CompositeNone
            | Strategy::ToolCall,
            Question::Mul { .. },
        ) => Task::MultiplyAsAddition,
        (
            Strategy::CompositeSimple
            | Strategy::CompositeAugmented
            | Strategy::CompositeNone
            | Strategy::ToolCall,
            _,
        ) => Task::MultiAddition,
        _ => Task::Addition,
    };
    if variant.is_baseline() || matches!(variant, Strategy::Algorithmic) {
        return Err(unsupported(task, variant));
    }
    block_text(task, variant, q, None)
}

/// The separator written between blocks (and before the trigger).
pub fn separator(task: Task, strategy: &Strategy) -> &'static str {
    match (task, strategy) {
        (
            Task::Addition,
            Strategy::ChainOfThought | Strategy::Scratchpad | Strategy::DetailedScratchpad,
        ) => "\n\n",
        _ => "\n",
    }
}

/// Stop sequences a completion under this prompt should declare: the block
/// separator joined to the next question's opening marker, plus the tool
/// token for tool-call prompts.
pub fn stop_sequences(task: Task, strategy: &Strategy) -> Vec<String> {
    use Strategy::*;
    let sep = separator(task, strategy);
    let marker = match task {
        Task::Addition => match strategy {
            FewShot | InstructionOnly => "Q:",
            Scratchpad | DetailedScratchpad => "Input:",
            _ => "Problem:",
        },
        Task::AdditionSubtraction => match strategy {
            FewShot => "Q:",
            _ => "Problem:",
        },
        Task::Multiplication | Task::Parity | Task::Gsm8k => "Q:",
        Task::MultiAddition | Task::MultiplyAsAddition => match strategy {
            FewShot | ChainOfThought => "Q:",
            _ => "Problem:",
        },
    };
    let mut stops = vec![format!("{sep}{marker}")];
    if matches!(strategy, ToolCall) {
        stops.push(TOOL_CALL_TOKEN.to_string());
    }
    stops
}

/// The default worked-example catalog for `task` under `strategy`.
pub fn default_shots(task: Task, strategy: &Strategy) -> Vec<Question> {
    use Strategy::*;
    let add = |a, b| Question::Add { a, b };
    let mul = |a, b| Question::Mul { a, b };
    match task {
        Task::Addition => match strategy {
            InstructionOnly => vec![],
            Scratchpad | DetailedScratchpad => vec![add(128, 367), add(9980, 29)],
            _ => vec![add(128, 367), add(9980, 29), add(802, 7145)],
        },
        Task::AdditionSubtraction => vec![
            add(128, 367),
            add(9980, 29),
            add(29, -570),
            add(-99, -21),
            add(483, -389),
            add(-30, 8002),
        ],
        Task::Multiplication => vec![mul(128, 367), mul(2035, 87)],
        Task::Parity => vec![
            Question::List(vec![1, 1, 0, 1, 0]),
            Question::List(vec![0, 1, 1, 0, 0, 0, 0, 0]),
        ],
        Task::MultiAddition | Task::MultiplyAsAddition => match strategy {
            CompositeNone => {
                if task == Task::MultiAddition {
                    vec![Question::Sum(vec![802, 7145, 6])]
                } else {
                    vec![mul(3, 7)]
                }
            }
            ChainOfThought | FewShot => {
                if task == Task::MultiAddition {
                    vec![
                        Question::Sum(vec![9980, 29]),
                        Question::Sum(vec![802, 7145, 6]),
                        Question::Sum(vec![7, 7, 7]),
                    ]
                } else {
                    vec![mul(3, 107), mul(5, 6)]
                }
            }
            ToolCall => {
                if task == Task::MultiAddition {
                    vec![Question::Sum(vec![802, 7145, 6])]
                } else {
                    vec![Question::Sum(vec![802, 7145, 6]), mul(3, 7)]
                }
            }
            _ => vec![add(128, 367), add(9980, 29), Question::Sum(vec![802, 7145, 6]), mul(3, 7)],
        },
        Task::Gsm8k => vec![],
    }
}

/// The longest answer among `shots` (see [`Question::answer_len`]).
pub fn max_shot_answer_len(shots: &[Question]) -> usize {
    shots.iter().map(Question::answer_len).max().unwrap_or(0)
}

/// Longest `The answer is N.` value in the fixed word-problem prompt,
/// measured in digits.
fn word_prompt_max_answer_len(text: &str) -> usize {
    let mut max = 0;
    for (_, rest) in text.match_indices("The answer is ").map(|(i, m)| (i, &text[i + m.len()..])) {
        let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        max = max.max(digits);
    }
    max
}

/// Assemble the full prompt for `spec`: each shot block followed by the
/// separator, then the trigger (plus the routing flag, when set).
pub fn assemble_prompt(spec: &PromptSpec) -> Result<RenderedPrompt> {
    let task = spec.task;
    let strategy = &spec.strategy;
    if !supported(task, strategy) {
        return Err(unsupported(task, strategy));
    }
    let sep = separator(task, strategy);
    let mut text = String::new();
    let mut spans = Vec::new();
    let n_shots;
    let max_answer;

    if task == Task::Gsm8k {
        if spec.shots.is_some() {
            return Err(Error::InvalidQuestion(
                "word-problem prompts use a fixed example set; omit shots".into(),
            ));
        }
        if !matches!(spec.trigger, Question::Word(_)) {
            return Err(bad_question(task, &spec.trigger));
        }
        let asset = gsm8k::word_problem_prompt_text();
        text.push_str(asset);
        text.push_str(sep);
        spans.push(Span { kind: SpanKind::Shot(0), start: 0, end: text.len() });
        n_shots = asset.matches("\nQ: ").count() + 1;
        max_answer = word_prompt_max_answer_len(asset);
    } else {
        let shots = match &spec.shots {
            Some(shots) => shots.clone(),
            None => default_shots(task, strategy),
        };
        if matches!(strategy, Strategy::InstructionOnly) && !shots.is_empty() {
            return Err(Error::InvalidQuestion(
                "instruction-only prompts carry their preamble in the trigger; omit shots".into(),
            ));
        }
        for (i, q) in shots.iter().enumerate() {
            let block = block_text(task, strategy, q, Some(i))?;
            let start = text.len();
            text.push_str(&block);
            text.push_str(sep);
            spans.push(Span { kind: SpanKind::Shot(i), start, end: text.len() });
        }
        n_shots = shots.len();
        max_answer = max_shot_answer_len(&shots);
    }

    let start = text.len();
    text.push_str(&trigger_text(task, strategy, &spec.trigger)?);
    if let Some(flag) = spec.flag {
        text.push(' ');
        text.push_str(flag.token());
    }
    spans.push(Span { kind: SpanKind::Trigger, start, end: text.len() });

    Ok(RenderedPrompt {
        text,
        spans,
        stop_sequences: stop_sequences(task, strategy),
        task,
        strategy: strategy.name().to_string(),
        n_shots,
        max_shot_answer_len: max_answer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strategies_for(task: Task) -> Vec<Strategy> {
        let all = [
            "algorithmic",
            "few_shot",
            "chain_of_thought",
            "instruction_only",
            "scratchpad",
            "detailed_scratchpad",
            "uncommon_operation",
            "nonexplicit_carry",
            "irregular_errors",
            "systematic_errors",
            "symbols_only",
            "symbols_uninformative",
            "symbols_misleading",
            "combined_add_sub",
            "composite_simple",
            "composite_augmented",
            "composite_none",
            "tool_call",
        ];
        all.iter()
            .map(|n| Strategy::from_name(n).unwrap())
            .filter(|s| supported(task, s))
            .collect()
    }

    #[test]
    fn every_block_starts_with_its_trigger() {
        for task in Task::ALL {
            for strategy in strategies_for(task) {
                for q in default_shots(task, &strategy) {
                    let block = block_text(task, &strategy, &q, None).unwrap();
                    let trigger = trigger_text(task, &strategy, &q).unwrap();
                    assert!(
                        block.starts_with(&trigger),
                        "{task}/{strategy}: block for {q:?} does not start with its trigger"
                    );
                }
            }
        }
    }

    #[test]
    fn spans_tile_assembled_text() {
        for task in Task::ALL {
            for strategy in strategies_for(task) {
                let trigger = match task {
                    Task::Addition => Question::Add { a: 1234, b: 5678 },
                    Task::AdditionSubtraction => Question::Add { a: 48, b: -1260 },
                    Task::Multiplication => Question::Mul { a: 44, b: 131 },
                    Task::Parity => Question::List(vec![1, 0, 1]),
                    Task::MultiAddition => Question::Sum(vec![12, 34, 56]),
                    Task::MultiplyAsAddition => Question::Mul { a: 4, b: 25 },
                    Task::Gsm8k => Question::Word("How many apples are left?".into()),
                };
                let spec = PromptSpec::new(task, strategy.clone(), trigger);
                let p = assemble_prompt(&spec).unwrap();
                assert_eq!(p.spans.first().unwrap().start, 0);
                assert_eq!(p.spans.last().unwrap().end, p.text.len());
                for w in p.spans.windows(2) {
                    assert_eq!(w[0].end, w[1].start, "{task}/{strategy}: spans not contiguous");
                }
                assert!(matches!(p.spans.last().unwrap().kind, SpanKind::Trigger));
            }
        }
    }

    #[test]
    fn default_addition_prompt_matches_reference_shots() {
        let spec = PromptSpec::new(
            Task::Addition,
            Strategy::Algorithmic,
            Question::Add { a: 1234, b: 5678 },
        );
        let p = assemble_prompt(&spec).unwrap();
        let fixture = include_str!("../../fixtures/prompts/addition_algorithmic.txt");
        assert!(p.text.starts_with(fixture));
        assert!(p.text.ends_with("\nProblem: 1234+5678=\nExplanation:"));
        assert_eq!(p.n_shots, 3);
        assert_eq!(p.max_shot_answer_len, 5);
        assert_eq!(p.stop_sequences, vec!["\nProblem:".to_string()]);
    }

    #[test]
    fn default_cot_prompt_uses_blank_line_separator() {
        let spec = PromptSpec::new(
            Task::Addition,
            Strategy::ChainOfThought,
            Question::Add { a: 1234, b: 5678 },
        );
        let p = assemble_prompt(&spec).unwrap();
        let fixture = include_str!("../../fixtures/prompts/addition_cot.txt");
        assert!(p.text.starts_with(fixture));
        assert!(p
            .text
            .ends_with("\n\nProblem: 1234+5678=?\nExplanation: Let's think step by step."));
        assert_eq!(p.stop_sequences, vec!["\n\nProblem:".to_string()]);
    }

    #[test]
    fn combined_prompt_renders_all_six_shots() {
        let spec = PromptSpec::new(
            Task::AdditionSubtraction,
            Strategy::CombinedAddSub,
            Question::Add { a: 48, b: -1260 },
        );
        let p = assemble_prompt(&spec).unwrap();
        assert_eq!(p.n_shots, 6);
        assert_eq!(p.max_shot_answer_len, 5);
        assert!(p.text.contains("Problem: 29-570=\nExplanation:"));
        assert!(p.text.contains("Problem: -99-21=\nExplanation:"));
        assert!(p.text.ends_with("\nProblem: 48-1260=\nExplanation:"));
    }

    #[test]
    fn composite_prompt_matches_reference() {
        let spec = PromptSpec::new(
            Task::MultiAddition,
            Strategy::CompositeSimple,
            Question::Sum(vec![12, 34, 56]),
        );
        let p = assemble_prompt(&spec).unwrap();
        let fixture = include_str!("../../fixtures/prompts/multiadd_algorithmic.txt");
        assert!(p.text.starts_with(fixture));
        assert!(p.text.ends_with("\nProblem: 12+34+56=\nExplanation:"));
        assert_eq!(p.max_shot_answer_len, 5);
    }

    #[test]
    fn augmented_composite_recasts_additions_as_chains() {
        let spec = PromptSpec::new(
            Task::MultiAddition,
            Strategy::CompositeAugmented,
            Question::Sum(vec![12, 34, 56]),
        );
        let p = assemble_prompt(&spec).unwrap();
        assert!(p.text.contains("The subproblems are 128+367=ANS1. There is 1 operator."));
        assert!(!p.text.contains("Since there are no more operators"));
    }

    #[test]
    fn tool_call_prompt_declares_tool_stop() {
        let spec = PromptSpec::new(
            Task::MultiplyAsAddition,
            Strategy::ToolCall,
            Question::Mul { a: 4, b: 25 },
        );
        let p = assemble_prompt(&spec).unwrap();
        assert_eq!(
            p.stop_sequences,
            vec!["\nProblem:".to_string(), TOOL_CALL_TOKEN.to_string()]
        );
        assert!(p.text.starts_with(include_str!(
            "../../fixtures/prompts/toolcall_multiadd.txt"
        )));
        assert!(p.text.contains(include_str!("../../fixtures/prompts/toolcall_mulasadd.txt")));
    }

    #[test]
    fn word_problem_prompt_appends_flagged_trigger() {
        let mut spec = PromptSpec::new(
            Task::Gsm8k,
            Strategy::Algorithmic,
            Question::Word("How many cars are in the lot?".into()),
        );
        spec.flag = Some(Flag::NonAlgo);
        let p = assemble_prompt(&spec).unwrap();
        assert!(p.text.starts_with(gsm8k::word_problem_prompt_text()));
        assert!(p.text.ends_with("\nQ: How many cars are in the lot?\nA: <NONALGO>"));
        assert_eq!(p.spans.len(), 2);
        assert_eq!(p.n_shots, 8);
        assert_eq!(p.max_shot_answer_len, 4);
    }

    #[test]
    fn golden_completion_reconstructs_block() {
        let q = Question::Add { a: 128, b: 367 };
        let completion = golden_completion(Task::Addition, &Strategy::Algorithmic, &q).unwrap();
        let trigger = trigger_text(Task::Addition, &Strategy::Algorithmic, &q).unwrap();
        assert_eq!(
            format!("{trigger}{completion}"),
            block_text(Task::Addition, &Strategy::Algorithmic, &q, None).unwrap()
        );
        assert!(completion.starts_with("\nThe first number is 128"));
    }

    #[test]
    fn unsupported_combinations_are_rejected() {
        let q = Question::List(vec![1, 0]);
        assert!(matches!(
            block_text(Task::Parity, &Strategy::ChainOfThought, &q, None),
            Err(Error::Unsupported { .. })
        ));
        let q = Question::Add { a: 1, b: 2 };
        assert!(matches!(
            block_text(Task::Addition, &Strategy::ToolCall, &q, None),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn invalid_questions_are_rejected() {
        assert!(block_text(
            Task::Addition,
            &Strategy::Algorithmic,
            &Question::Add { a: -1, b: 2 },
            None
        )
        .is_err());
        assert!(block_text(
            Task::Parity,
            &Strategy::Algorithmic,
            &Question::List(vec![1, 2]),
            None
        )
        .is_err());
        assert!(block_text(
            Task::MultiAddition,
            &Strategy::Algorithmic,
            &Question::Sum(vec![5]),
            None
        )
        .is_err());
    }

    #[test]
    fn irregular_steps_must_fit_the_trace() {
        let strategy = Strategy::IrregularErrors {
            steps: [9usize].into_iter().collect(),
            delta: -1,
        };
        assert!(block_text(
            Task::Addition,
            &strategy,
            &Question::Add { a: 128, b: 367 },
            None
        )
        .is_err());
        let strategy = Strategy::IrregularErrors {
            steps: [1usize, 3].into_iter().collect(),
            delta: -1,
        };
        assert!(block_text(
            Task::Addition,
            &strategy,
            &Question::Add { a: 128, b: 367 },
            None
        )
        .is_ok());
    }

    #[test]
    fn variant_fixtures_match() {
        let q = Question::Add { a: 128, b: 367 };
        assert_eq!(
            render_variant(&Strategy::UncommonOperation, &q).unwrap(),
            include_str!("../../fixtures/prompts/addition_uncommon_operation.txt")
        );
        assert_eq!(
            render_variant(&Strategy::NonexplicitCarry, &q).unwrap(),
            include_str!("../../fixtures/prompts/addition_nonexplicit_carry.txt")
        );
        assert_eq!(
            render_variant(&Strategy::SystematicErrors { delta: -1 }, &q).unwrap(),
            include_str!("../../fixtures/prompts/addition_systematic_errors.txt")
        );
        assert_eq!(
            render_variant(
                &Strategy::IrregularErrors {
                    steps: [1usize, 3].into_iter().collect(),
                    delta: -1
                },
                &q
            )
            .unwrap(),
            include_str!("../../fixtures/prompts/addition_irregular_errors.txt")
        );
        assert_eq!(
            render_variant(&Strategy::SymbolsOnly, &q).unwrap(),
            include_str!("../../fixtures/prompts/addition_symbols_only.txt")
        );
        assert_eq!(
            render_variant(&Strategy::SymbolsUninformative, &q).unwrap(),
            include_str!("../../fixtures/prompts/addition_symbols_uninformative.txt")
        );
        assert_eq!(
            render_variant(&Strategy::SymbolsMisleading, &q).unwrap(),
            include_str!("../../fixtures/prompts/addition_symbols_misleading.txt")
        );
    }

    #[test]
    fn baseline_fixtures_match() {
        let q = Question::Add { a: 128, b: 367 };
        let scratch = render_baseline(&Strategy::Scratchpad, Task::Addition, &q).unwrap();
        let fixture = include_str!("../../fixtures/prompts/addition_scratchpad.txt");
        assert!(fixture.starts_with(&scratch));
        let instr = render_baseline(&Strategy::InstructionOnly, Task::Addition, &q).unwrap();
        assert!(instr.starts_with(include_str!(
            "../../fixtures/prompts/addition_instruction.txt"
        )));
        assert!(instr.ends_with("The answer is 495."));
    }

    #[test]
    fn strategy_names_round_trip() {
        for name in [
            "algorithmic",
            "few_shot",
            "chain_of_thought",
            "instruction_only",
            "scratchpad",
            "detailed_scratchpad",
            "uncommon_operation",
            "nonexplicit_carry",
            "irregular_errors",
            "systematic_errors",
            "symbols_only",
            "symbols_uninformative",
            "symbols_misleading",
            "combined_add_sub",
            "composite_simple",
            "composite_augmented",
            "composite_none",
            "tool_call",
        ] {
            assert_eq!(Strategy::from_name(name).unwrap().name(), name);
        }
        assert!(Strategy::from_name("zero_shot").is_none());
        for task in Task::ALL {
            assert_eq!(task.name().parse::<Task>().unwrap(), task);
        }
    }

    #[test]
    fn answer_lengths_follow_digit_count_or_list_length() {
        assert_eq!(Question::Add { a: 128, b: 367 }.answer_len(), 3);
        assert_eq!(Question::Add { a: 29, b: -570 }.answer_len(), 3);
        assert_eq!(Question::Mul { a: 2035, b: 87 }.answer_len(), 6);
        assert_eq!(Question::List(vec![1, 0, 1, 1]).answer_len(), 4);
        assert_eq!(Question::Sum(vec![802, 7145, 6]).answer_len(), 4);
        assert_eq!(Question::Word("anything".into()).answer_len(), 0);
    }
}
