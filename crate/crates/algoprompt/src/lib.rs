//! Toolkit for algorithmic prompting on digit-level arithmetic tasks.
//!
//! The crate is organized as a pipeline:
//!
//! - [`numerics`] computes exact digit-by-digit execution traces (addition,
//!   signed addition/subtraction, multiplication, parity, composite chains).
//!   Everything downstream treats these traces as ground truth.
//! - [`tracegen`] renders traces into prompt text: algorithmic prompts,
//!   ablation variants, and the baseline strategies (few-shot,
//!   chain-of-thought, instruction-only, scratchpads), plus tool-call
//!   dialogues and the grade-school word-problem prompt.
//! - [`traceparse`] parses model output back into structured steps and grades
//!   each field against the ground-truth trace, classifying the first error.
//! - [`datasets`] samples evaluation items by answer length and ingests
//!   word-problem corpora.
//! - [`backends`] issues completion requests: a live HTTP client, a perfect
//!   offline oracle, a fault-injecting oracle, and record/replay stores with
//!   an on-disk cache.
//! - [`orchestrator`] runs items through a backend (single pass, recovery
//!   second pass, tool-call loop) and persists transcripts.
//! - [`metrics`] aggregates transcripts into accuracy tables, error
//!   breakdowns, and comparative summaries.

pub mod backends;
pub mod cli;
pub mod config;
pub mod datasets;
pub mod error;
pub mod metrics;
pub mod numerics;
pub mod orchestrator;
pub mod tracegen;
pub mod traceparse;

pub use backends::{
    estimate_tokens, identify_trigger, record_fixtures, Backend, CacheBackend, CompletionRequest,
    CompletionResponse, FaultPlan, FaultyBackend, FinishReason, HttpBackend, HttpConfig,
    OracleBackend, PlannedFault, ReplayBackend, TokenUsage,
};
pub use datasets::{
    filter_addition_only, inflate_numbers, load_word_problems, read_dataset, read_items,
    sample_by_answer_length, write_dataset, write_items, DatasetManifest, EvalItem, ItemMeta,
};
pub use error::{Error, Result};
pub use traceparse::{
    extract_final_answer, extract_subproblem, find_last_complete_step, grade, inject_fault,
    parse_trace, truth_trace, Completion, ErrorCategory, FieldCheck, FirstError, GradeSummary,
    ParsedField, ParsedStep, ParsedTrace, StepKind, StepVerdict, SubProblem,
};
pub use tracegen::{
    assemble_prompt, render_algorithmic, render_baseline, render_variant, Flag, PromptSpec,
    Question, RenderedPrompt, Span, SpanKind, Strategy, Task,
};
