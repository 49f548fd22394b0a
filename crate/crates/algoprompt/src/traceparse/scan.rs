//! Line-level scanners for worked-trace dialects.
//!
//! Every renderer emits one physical line per logical step, so parsing works
//! line by line: each task owns an ordered list of [`Matcher`]s, and the
//! first matcher whose anchored regex accepts the line yields the step kind,
//! its graded fields, and whether the line terminates the trace.
//!
//! Lexing is deliberately tolerant in exactly two ways — keywords match
//! case-insensitively and list separators accept optional whitespace after
//! commas — while any other deviation fails the whole line.

use once_cell::sync::Lazy;
use regex::Regex;

use super::{ErrorCategory as C, ParsedField, StepKind};
use crate::tracegen::Task;

/// A trimmed, non-empty physical line with byte offsets into the source.
#[derive(Debug, Clone, Copy)]
pub(super) struct Line<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Split `text` into trimmed, non-empty lines with byte spans.
pub(super) fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut pos = 0;
    for raw in text.split('\n') {
        let trimmed = raw.trim();
        if !trimmed.is_empty() {
            let lead = raw.len() - raw.trim_start().len();
            out.push(Line { text: trimmed, start: pos + lead, end: pos + lead + trimmed.len() });
        }
        pos += raw.len() + 1;
    }
    out
}

/// Canonical form of a captured value: whitespace stripped, lowercased.
pub(super) fn canon(raw: &str) -> String {
    raw.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase()
}

/// Unsigned digit list interior: `1,0,6,2` with optional spaces.
const LIST: &str = r"(?:\d(?:,\s*\d)*)?";
/// Signed digit list interior for subtraction answers: `-5,9`.
const SIGNED: &str = r"(?:[+-]?\d(?:,\s*[+-]?\d)*)?";
/// Sign-marked digit list interior: `+1,+0,-6`.
const MARKED: &str = r"(?:[+-]\d(?:,\s*[+-]\d)*)?";
/// The length-keyword family used by symbol ablations (`Len`, `VBZ`, `Str`).
const LEN_KW: &str = r"(?:Len|VBZ|Str)";

/// Shared tail of a pairwise-addition calculation line: carry-in, digit
/// equation, optional compare/mod clauses, answer list, optional division
/// clause, and carry-out. The compare and division clauses are absent when
/// the prompt style leaves carries implicit.
const ADD_TAIL: &str = concat!(
    r" C\[(?P<cii>\d+)\]=(?P<ci>\d+)\. ",
    r"Since (?P<eqf>\d+)\+(?P<eqs>\d+)\+(?P<eqc>\d+)=(?P<sum>\d+)",
    r"(?:, (?P<cmp>\d+)[<>=]\d+, (?P<mods>\d+)%10=(?P<modd>\d+))?\. ",
    r"Length of A is (?P<al>\d+)\. Thus A=\[(?P<alist>«L»)\]\.",
    r"(?: Since \((?P<divs>\d+)-(?P<divd>\d+)\)/10=(?P<divo>\d+),)?",
    r" C\[(?P<coi>\d+)\]=(?P<co>\d+)\."
);

/// Expand list/keyword placeholders and anchor the pattern to a whole line.
fn prep(pattern: &str) -> Regex {
    let body = pattern
        .replace("«T»", ADD_TAIL)
        .replace("«L»", LIST)
        .replace("«S»", SIGNED)
        .replace("«M»", MARKED)
        .replace("«K»", LEN_KW);
    Regex::new(&format!("(?i)^{body}$")).expect("static trace regex")
}

macro_rules! rx {
    ($name:ident, $re:expr) => {
        static $name: Lazy<Regex> = Lazy::new(|| prep($re));
    };
}

// --- addition family --------------------------------------------------------

rx!(
    HDR_PROSE,
    concat!(
        r"The first number is (?P<fnv>-?\d+|ANS\d+), FN=\[(?P<flist>«L»)\]\. ",
        r"The second number is (?P<snv>-?\d+|ANS\d+), SN=\[(?P<slist>«L»)\]\. ",
        r"Since FN[ =]\[(?P<fecho>«L»)\] has (?P<fl>\d+) digits?, ",
        r"SN[ =]\[(?P<secho>«L»)\] has (?P<sl>\d+) digits?, ",
        r"thus the maximum number of digits is (?P<max>\d+)\. ",
        r"In each subsequent step, we remove one number from the end of FN ",
        r"and one from the end of SN\.( Length of A is 0\.)?"
    )
);

rx!(
    STEP_STD,
    concat!(
        r"(?:Length of FN is (?P<fl2>\d+)\. FN=\[(?P<flist>«L»)\]\. ",
        r"Length of SN is (?P<sl2>\d+)\. SN=\[(?P<slist>«L»)\]\. )?",
        r"(?:FN\[(?P<fni>\d+)\]=(?P<fnd>\d+)|(?P<fne>FN is empty))\. ",
        r"(?:SN\[(?P<sni>\d+)\]=(?P<snd>\d+)|(?P<sne>SN is empty))\.",
        "«T»"
    )
);

rx!(
    STEP_BYOP,
    concat!(
        r"Length of FN is (?P<fl2>\d+)\. FN=\[(?P<flist>«L»)\]\. ",
        r"(?:FN\[(?P<fni>\d+)\]=(?P<fnd>\d+)|(?P<fne>FN is empty))\. ",
        r"Length of SN is (?P<sl2>\d+)\. SN=\[(?P<slist>«L»)\]\. ",
        r"(?:SN\[(?P<sni>\d+)\]=(?P<snd>\d+)|(?P<sne>SN is empty))\.",
        "«T»"
    )
);

rx!(
    CLOSE_PLAIN,
    concat!(
        r"There are no more digits and C\[0\]=0\. Thus the process is complete\. ",
        r"(?:Since there are no more operators, the problem is complete\. )?",
        r"The final Answer is \[(?P<fin>«L»)\]\."
    )
);

rx!(
    CLOSE_OVERFLOW,
    concat!(
        r"There are no more digits, but C\[0\]=1\. ",
        r"Length of A is (?P<oal>\d+)\. Thus A=\[(?P<oalist>«L»)\]\.",
        r"( The final Answer is \[(?P<fin>«L»)\]\.)?"
    )
);

rx!(
    CLOSE_OVERFLOW_END,
    concat!(
        r"There are no more digits and the process is complete\. ",
        r"Since there are no more operators, the problem is complete\. ",
        r"The final Answer is \[(?P<fin>«L»)\]\."
    )
);

// --- chained subproblems (composites and word problems) ----------------------

rx!(
    PLAN,
    concat!(
        r"The sub(?:mul)?problems are .+\. ",
        r"(?:Since we ended on ANS_\d+, there|There) (?:is|are) .*operators?\."
    )
);

rx!(SUB_MARK, r"Subproblem: \S+[+*]\S+=(?:ANS|MS)\d+");

rx!(
    CHAIN_CLOSE,
    concat!(
        r"There are no more digits",
        r"(?:, but C\[0\]=1\. Length of A is (?P<oal>\d+)\. A=\[(?P<oalist>«L»)\]\. ",
        r"Thus the process is complete",
        r"| and C\[0\]=0\. Thus the process is complete",
        r"| and the process is complete)\. ",
        r"Since there (?:is|are) \d+ (?:\S+ )?operators? and we processed up to ANS\d+, ",
        r"(?:there are more operators to process\. ",
        r"(?:Thus, ANS\d+ is|The new FN is) \[(?P<mid>«L»)\]\.",
        r"|the problem is complete\.(?: [^.]*\.)*? The final Answer is \[(?P<fin>«L»)\]\.",
        r"(?: Removing all \d+ commas?, we have (?P<finv>-?\d+)\.)?)"
    )
);

rx!(
    CHAIN_OVERFLOW_A,
    concat!(
        r"There are no more digits and C\[0\]=1\. ",
        r"Length of A is (?P<oal>\d+)\. Thus A=\[(?P<oalist>«L»)\]\."
    )
);

rx!(
    TOOL_STEP,
    concat!(
        r"Subproblem: (?P<lhs>\d+)\+(?P<rhs>\d+)(?:\x{27E8}GET\x{27E9}|<GET>)=(?P<res>-?\d+)\. ",
        r"Since there (?:is|are) \d+ operators? and we processed up to ANS\d+, ",
        r"(?:there are more operators to process\.",
        r"|the problem is complete\. The final Answer is (?P<fin>-?\d+)\.)"
    )
);

rx!(
    REWRITE,
    concat!(
        r"Since the problem is multiplication, we find the smaller of the two numbers ",
        r"and add the larger number as many times as the smaller number\. ",
        r"The first number is (?P<a>\d+), FN=\[(?P<flist>«L»)\]=\d+\. ",
        r"The second number is (?P<b>\d+), SN=\[(?P<slist>«L»)\]=\d+\. ",
        r"Since \d+ is smaller than \d+, we rewrite the problem as \d+ summed together ",
        r"\d+ times: \d+(?:\+\d+)*\. We end at ANS\(\d+-1\)=\d+=ANS\d+\."
    )
);

rx!(
    DIRECT_PRODUCT,
    concat!(
        r"Since (?P<small>\d+) is (?P<cnt>\d+), the product is direct: ",
        r"\d+\*\d+=(?P<prod>\d+)\. ",
        r"Since there is 1 \* operator and we processed up to MS1, ",
        r"the overall problem is complete\. The final Answer is \[(?P<fin>«L»)\]\."
    )
);

// --- grouped multiplication ---------------------------------------------------

rx!(
    MUL_HDR,
    concat!(
        r"FN=(?P<fnv>\d+), FN=\[(?P<flist>«L»)\]\. SN=(?P<snv>\d+), SN=\[(?P<slist>«L»)\]\. ",
        r"Len\(FN\)=(?P<fl>\d+), Len\(SN\)=(?P<sl>\d+)\. Max len is (?P<max>\d+)\. ",
        r"Since .* the MULVAL, thus MULVAL=(?P<mv>\d+)\."
    )
);

rx!(
    GROUP_HDR,
    concat!(
        r"FN=(?P<g>\d+), FN=\[(?P<flist>«L»)\]\. Mulval=(?P<mv>\d+)\. ",
        r"Len\(FN\)=(?P<fl>\d+)\. P0=0\."
    )
);

rx!(
    COMPACT_HDR,
    concat!(
        r"FN=(?:\d+|ANS\d+|ADV\d+|MUL\d+), FN=\[(?P<flist>«L»)\]\. ",
        r"SN=(?:\d+|ANS\d+|ADV\d+|MUL\d+), SN=\[(?P<slist>«L»)\]\. ",
        r"Len\(FN\)=(?P<fl>\d+), Len\(SN\)=(?P<sl>\d+), max len is (?P<max>\d+)\."
    )
);

rx!(
    MUL_DIGIT,
    concat!(
        r"Len\(FN\)=(?P<fl>\d+)\. FN=\[(?P<flist>«L»)\]\. FN\[(?P<fni>\d+)\]=(?P<fnd>\d+)\. ",
        r"(?P<de>\d+)\*(?P<mv>\d+)=(?P<prod>\d+)\. ",
        r"P0=(?P<p0>\d+), append \d+ zero \[[0,\s]*\] to ",
        r"(?:\[[\d,\s]*\]\[\]|\[[\d,\s]*\|[0,\s]*\]): \[(?P<shifted>«L»)\]=ADV\d+\."
    )
);

rx!(MUL_DONE, r"Len\(FN\)=0\. Done\.");

rx!(SUBMUL_MARK, r"Submulproblem: \d+\*\d+=MUL\d+");
rx!(MARK_STARS, r"\*\*(?:START|END)\*\*");
rx!(MARK_PLUS, r"\+\+(?:START|END)\+\+");
rx!(MARK_LABEL, r"Addition(?: Mul)? Problem: .+=");
rx!(MARK_EXPL, r"Explanation:");
rx!(MARK_COMBINE, r"We now combine the MUL results\.");

rx!(
    SYM_HDR,
    concat!(
        r"FN=(?P<fnv>-?\d+), FN=\[(?P<flist>«L»)\]\. SN=(?P<snv>-?\d+), SN=\[(?P<slist>«L»)\]\. ",
        r"«K»\(FN\)=(?P<fl>\d+), «K»\(SN\)=(?P<sl>\d+), (?:MaxLen|UXOVBZ|MinStr)=(?P<max>\d+)\."
    )
);

rx!(
    SYM_STEP,
    concat!(
        r"«K»\(FN\)=(?P<fl2>\d+)\. FN=\[(?P<flist>«L»)\]\. ",
        r"«K»\(SN\)=(?P<sl2>\d+)\. SN=\[(?P<slist>«L»)\]\. ",
        r"(?:FN\[(?P<fni>\d+)\]=(?P<fnd>\d+)|(?P<fne>FN is empty))\. ",
        r"(?:SN\[(?P<sni>\d+)\]=(?P<snd>\d+)|(?P<sne>SN is empty))\. ",
        r"C\[(?P<cii>\d+)\]=(?P<ci>\d+)\. ",
        r"(?:Since )?(?P<eqf>\d+)\+(?P<eqs>\d+)\+(?P<eqc>\d+)=(?P<sum>\d+), ",
        r"(?P<cmp>\d+)[<>=]\d+, (?P<mods>\d+)%10=(?P<modd>\d+)\. ",
        r"«K»\(A\)=(?P<al>\d+)\. A=\[(?P<alist>«L»)\]\. ",
        r"\((?P<divs>\d+)-(?P<divd>\d+)\)/10=(?P<divo>\d+), C\[(?P<coi>\d+)\]=(?P<co>\d+)\."
    )
);

rx!(
    SYM_CLOSE,
    concat!(
        r"«K»\(FN\)=0 and «K»\(SN\)=0",
        r"(?: and C\[0\]=0\. Done\.",
        r"|, but C\[0\]=1\. «K»\(A\)=(?P<oal>\d+)\. A=\[(?P<oalist>«L»)\]\. Done\.) ",
        r"The final Answer is \[(?P<fin>«L»)\]\."
    )
);

rx!(
    COMPACT_CLOSE,
    concat!(
        r"Len\(FN\)=0\. FN=\[\]\. Len\(SN\)=0\. SN=\[\]\. Both are empty\. ",
        r"C\[0\]=(?P<c>\d)\. (?:Done|Not done)\.(?: Len\(A\)=(?P<oal>\d+)\.)? ",
        r"ANS\d+=\[(?P<lst>«L»)\]\. ",
        r"Since there (?:is|are) (?:\S+ )?\d+(?: \S+)? operators? and we processed up to ANS\d+, ",
        r"(?:continue\. The new FN is \[(?P<mid>«L»)\]\.",
        r"|complete\. (?:The final ADDAnswer is \[(?P<addfin>«L»)\]",
        r"|The END Answer is \[(?P<fin>«L»)\])\.)"
    )
);

rx!(
    MUL_CLOSE,
    concat!(
        r"MUL\d+=\[(?P<lst>«L»)\]\. ",
        r"Since there (?:is|are) \d+ mul operators? and we processed up to MUL\d+, ",
        r"(?:complete|continue)\."
    )
);

rx!(
    MUL_SHIFT,
    concat!(
        r"Since \d+ mul operators?, we append 3\*\(\d+-\d+\)=3\*\d+=(?P<z>\d+) zeros to MUL\d+, ",
        r"MUL\d+=\[(?P<orig>«L»)\]\[(?P<zl>[0,\s]*)\]=\[(?P<shifted>«L»)\]\."
    )
);

rx!(
    MUL_MA_SINGLE,
    concat!(
        r"Since EMPTY is in the equation, ANS1=MUL1=\[(?P<l1>«L»)\]\. ",
        r"Since there is 1 MA operator and we processed up to ANS1, complete\. ",
        r"The END Answer is \[(?P<fin>«L»)\]\."
    )
);

// --- combined addition/subtraction --------------------------------------------

rx!(
    SUB_HDR,
    concat!(
        r"The first number is (?P<fnv>-?\d+), adding commas between each number, ",
        r"FN=(?P<fsign>-?)\[(?P<flist>«L»)\]\. ",
        r"The second number is (?P<snv>-?\d+), adding commas between each number, ",
        r"SN=(?P<ssign>-?)\[(?P<slist>«L»)\]\. ",
        r"FN -?\[«L»\] has (?P<fl>\d+) digits?, SN -?\[«L»\] has (?P<sl>\d+) digits?, ",
        r"max is (?P<max>\d+)\."
    )
);

rx!(
    SUB_STEP,
    concat!(
        r"Len\(FN\)=(?P<fl2>\d+)\. FN=(?P<fsign>-?)\[(?P<flist>«L»)\]\. ",
        r"(?:FN\[(?P<fni>\d+)\]=(?P<fnd>-?\d+)|(?P<fne>FN\[0\]=empty))\. ",
        r"Len\(SN\)=(?P<sl2>\d+)\. SN=(?P<ssign>-?)\[(?P<slist>«L»)\]\. ",
        r"(?:SN\[(?P<sni>\d+)\]=(?P<snd>-?\d+)|(?P<sne>SN\[0\]=empty))\. ",
        r"C\[(?P<cii>\d+)\]=(?P<ci>-?\d+)\. ",
        r"Since (?P<eqf>-?\d+)(?P<eqs>[+-]\d+)(?P<eqc>[+-]\d+)=(?P<sum>-?\d+), ",
        r"(?P<cmp>-?\d+)[<>=]-?\d+, (?P<mods>-?\d+)%-?\d+=(?P<modd>-?\d+)\. ",
        r"Len\(A\)=(?P<al>\d+)\. A=\[(?P<alist>«S»)\]\. ",
        r"Since \((?P<divs>-?\d+)-(?P<divd>-?\d+)\)/10=(?P<divo>-?\d+), ",
        r"C\[(?P<coi>\d+)\]=(?P<co>-?\d+)\."
    )
);

rx!(
    SUB_TRANSITION,
    concat!(
        r"Len\(FN\)=0\. FN=-?\[\]\. FN\[0\]=empty\. Len\(SN\)=0\. SN=-?\[\]\. SN\[0\]=empty\. ",
        r"Since both FN and SN are empty, next\. ",
        r"(?:Since C\[0\]=(?P<cf>-?\d+), we add C\[0\]=-?\d+ to the front of A\. ",
        r"A=\[(?P<plist>«S»)\]\. ",
        r"|Since C\[0\]=0, the steps are done\. )",
        r"(?:Since there are no - in A, the problem is complete\. ",
        r"The final Answer is \[(?P<fin>«L»)\]\.",
        r"|Since there are - in A, we check the sign of the last step ",
        r"A\[1\]=(?P<sd>[+-]?\d+)\. ",
        r"(?:Since 0 is zero, we check the sign of A\[\d+\]=[+-]?\d+\. )*",
        r"Since [+-]?\d+ is (?:neg|non-neg), we (?:change the sign and )?process A from ",
        r"right to left\. A=\[(?P<raw>«S»)\]=(?P<nsign>-?)\[(?P<marked>«M»)\]\. ",
        r"C\[(?P<ck>\d+)\]=0\.)"
    )
);

rx!(
    SUB_NORM_STEP,
    concat!(
        r"Len\(A\)=(?P<al2>\d+)\. A=(?P<nsign>-?)\[(?P<marked>«M»)\]\. ",
        r"A\[(?P<ki>\d+)\]=(?P<dk>[+-]\d+)\. ",
        r"Since (?:[+-]?\d+<0, B=10, C\[\d+\]=-1|\+0 is 0, B=0, C\[\d+\]=0",
        r"|\+\d+>0, B=0, C\[\d+\]=0)\. ",
        r"Since C\[(?P<cii>\d+)\]=(?P<ci>-?\d+), ",
        r"thus (?P<eqd>-?\d+)\+(?P<eqb>\d+)(?P<eqc>[+-]\d+)=(?P<ft>-?\d+)",
        r"(?:, which is neg, thus repeat with B=10, C\[\d+\]=-1\. ",
        r"-?\d+\+10\+0=(?P<out>-?\d+)\.|\.) ",
        r"Len\(ANEW\)=(?P<nl>\d+)\. ANEW=(?P<asign>-?)\[(?P<anew>«L»)\]\. ",
        r"C\[(?P<coi>\d+)\]=(?P<co>-?\d+)\."
    )
);

rx!(
    SUB_NORM_END,
    concat!(
        r"Len\(A\)=0\. A=-?\[\]\. Since A is empty, the problem is complete\. ",
        r"The final Answer is (?P<fsig>-?)\[(?P<fin>«L»)\]\."
    )
);

// --- parity --------------------------------------------------------------------

rx!(PAR_INIT, r"We initialize s=");

rx!(
    PAR_STEP,
    concat!(
        r"a=\[(?P<rem>«L»)\]\. The first element of a is (?P<b1>\d) so b=(?P<b2>\d)\. ",
        r"s = s \+ b = (?P<sin>\d+) \+ (?P<b3>\d) = (?P<sout>\d+)\. s=(?P<secho>\d+)\."
    )
);

rx!(
    PAR_CLOSE,
    concat!(
        r"a=\[\] is empty\. Since the list a is empty and we have s=(?P<s>\d+), ",
        r"the parity is (?P<fin>\d)\."
    )
);

/// How a matcher decides whether its line ends the whole trace.
enum Terminal {
    Never,
    /// Terminal exactly when the named capture group participated.
    IfGroup(&'static str),
}

/// Slot marker that splits an answer list into its newly inserted head
/// digit and the copied tail.
const SPLIT_ANSWER: &str = "__split_answer__";

type FieldSpec = (&'static str, &'static str, C);

/// One recognizable line shape: anchored regex plus field extraction table.
pub(super) struct Matcher {
    kind: StepKind,
    re: &'static Lazy<Regex>,
    fields: &'static [FieldSpec],
    terminal: Terminal,
}

/// A successful line match, before step numbering is assigned.
pub(super) struct LineMatch {
    pub kind: StepKind,
    pub terminal: bool,
    pub fields: Vec<ParsedField>,
}

impl Matcher {
    fn try_match(&self, line: &Line<'_>) -> Option<LineMatch> {
        let caps = self.re.captures(line.text)?;
        let mut fields = Vec::new();
        for &(group, slot, category) in self.fields {
            let Some(m) = caps.name(group) else { continue };
            if slot == SPLIT_ANSWER {
                split_answer_list(&m, line.start, category, &mut fields);
            } else {
                fields.push(ParsedField {
                    slot: slot.to_string(),
                    category,
                    value: canon(m.as_str()),
                    span: (line.start + m.start(), line.start + m.end()),
                });
            }
        }
        let terminal = match self.terminal {
            Terminal::Never => false,
            Terminal::IfGroup(g) => caps.name(g).is_some(),
        };
        Some(LineMatch { kind: self.kind, terminal, fields })
    }
}

/// Split a captured answer list `9,5` into `a_head` (the digit inserted at
/// the front this step) and `a_rest` (the carried-over tail), preserving
/// byte spans so faults can be spliced into either part.
fn split_answer_list(m: &regex::Match<'_>, base: usize, head_cat: C, out: &mut Vec<ParsedField>) {
    let raw = m.as_str();
    let (head, rest) = match raw.find(',') {
        Some(i) => (&raw[..i], Some(&raw[i + 1..])),
        None => (raw, None),
    };
    out.push(ParsedField {
        slot: "a_head".to_string(),
        category: head_cat,
        value: canon(head),
        span: (base + m.start(), base + m.start() + head.len()),
    });
    if let Some(rest) = rest {
        out.push(ParsedField {
            slot: "a_rest".to_string(),
            category: C::CopyAccumulatedAnswer,
            value: canon(rest),
            span: (base + m.start() + head.len() + 1, base + m.end()),
        });
    }
}

/// Try every matcher registered for `task` against one line.
pub(super) fn classify(task: Task, line: &Line<'_>) -> Option<LineMatch> {
    matchers(task).iter().find_map(|m| m.try_match(line))
}

/// Whether any dialect of any task recognizes this line (used when the task
/// is unknown, e.g. locating a resumption point in a truncated reply).
pub(super) fn classify_any(line: &Line<'_>) -> Option<LineMatch> {
    Task::ALL.iter().find_map(|&task| classify(task, line))
}

macro_rules! m {
    ($kind:ident, $re:ident, never, $fields:expr) => {
        Matcher { kind: StepKind::$kind, re: &$re, fields: $fields, terminal: Terminal::Never }
    };
    ($kind:ident, $re:ident, fin, $fields:expr) => {
        Matcher {
            kind: StepKind::$kind,
            re: &$re,
            fields: $fields,
            terminal: Terminal::IfGroup("fin"),
        }
    };
}

const STD_STEP_FIELDS: &[FieldSpec] = &[
    ("fl2", "fn_len", C::CountFirstDigits),
    ("flist", "fn_list", C::CopyUnprocessedFirst),
    ("sl2", "sn_len", C::CountSecondDigits),
    ("slist", "sn_list", C::CopyUnprocessedSecond),
    ("fni", "fn_idx", C::ExtractLastFirst),
    ("fnd", "fn_digit", C::ExtractLastFirst),
    ("fne", "fn_digit", C::ExtractLastFirst),
    ("sni", "sn_idx", C::ExtractLastSecond),
    ("snd", "sn_digit", C::ExtractLastSecond),
    ("sne", "sn_digit", C::ExtractLastSecond),
    ("cii", "carry_idx", C::CopyPreviousCarry),
    ("ci", "carry_in", C::CopyPreviousCarry),
    ("eqf", "eq_first", C::ExtractLastFirst),
    ("eqs", "eq_second", C::ExtractLastSecond),
    ("eqc", "eq_carry", C::CopyPreviousCarry),
    ("sum", "sum", C::TwoDigitSum),
    ("cmp", "cmp_sum", C::TwoDigitSum),
    ("mods", "mod_sum", C::TwoDigitSum),
    ("modd", "mod_digit", C::InsertNewAnswerDigit),
    ("al", "answer_len", C::InsertNewAnswerDigit),
    ("alist", SPLIT_ANSWER, C::InsertNewAnswerDigit),
    ("divs", "div_sum", C::TwoDigitSum),
    ("divd", "div_digit", C::InsertNewAnswerDigit),
    ("divo", "div_carry", C::NewCarry),
    ("coi", "carry_out_idx", C::NewCarry),
    ("co", "carry_out", C::NewCarry),
];

const HDR_PROSE_FIELDS: &[FieldSpec] = &[
    ("flist", "fn_list", C::ConvertFirstToList),
    ("slist", "sn_list", C::ConvertSecondToList),
    ("fecho", "fn_list_echo", C::ConvertFirstToList),
    ("fl", "fn_len", C::CountFirstDigits),
    ("secho", "sn_list_echo", C::ConvertSecondToList),
    ("sl", "sn_len", C::CountSecondDigits),
    ("max", "max", C::IdentifyMaxDigits),
];

const CLOSE_PLAIN_FIELDS: &[FieldSpec] = &[("fin", "final_list", C::CopyAccumulatedAnswer)];

const CLOSE_OVERFLOW_FIELDS: &[FieldSpec] = &[
    ("oal", "answer_len", C::InsertNewAnswerDigit),
    ("oalist", "a_full", C::CopyAccumulatedAnswer),
    ("fin", "final_list", C::CopyAccumulatedAnswer),
];

const CHAIN_CLOSE_FIELDS: &[FieldSpec] = &[
    ("oal", "answer_len", C::InsertNewAnswerDigit),
    ("oalist", "a_full", C::CopyAccumulatedAnswer),
    ("mid", "result_list", C::CopyAccumulatedAnswer),
    ("fin", "final_list", C::CopyAccumulatedAnswer),
    ("finv", "final_value", C::CopyAccumulatedAnswer),
];

const TOOL_STEP_FIELDS: &[FieldSpec] = &[
    ("lhs", "tool_lhs", C::CopyUnprocessedFirst),
    ("rhs", "tool_rhs", C::CopyUnprocessedSecond),
    ("res", "tool_result", C::TwoDigitSum),
    ("fin", "final_value", C::CopyAccumulatedAnswer),
];

const REWRITE_FIELDS: &[FieldSpec] = &[
    ("flist", "fn_list", C::ConvertFirstToList),
    ("slist", "sn_list", C::ConvertSecondToList),
];

const DIRECT_FIELDS: &[FieldSpec] =
    &[("prod", "sum", C::TwoDigitSum), ("fin", "final_list", C::CopyAccumulatedAnswer)];

const MUL_HDR_FIELDS: &[FieldSpec] = &[
    ("flist", "fn_list", C::ConvertFirstToList),
    ("slist", "sn_list", C::ConvertSecondToList),
    ("fl", "fn_len", C::CountFirstDigits),
    ("sl", "sn_len", C::CountSecondDigits),
    ("max", "max", C::IdentifyMaxDigits),
    ("mv", "mulval", C::ConvertSecondToList),
];

const GROUP_HDR_FIELDS: &[FieldSpec] = &[
    ("flist", "fn_list", C::ConvertFirstToList),
    ("mv", "mulval", C::ConvertSecondToList),
    ("fl", "fn_len", C::CountFirstDigits),
];

const COMPACT_HDR_FIELDS: &[FieldSpec] = &[
    ("flist", "fn_list", C::ConvertFirstToList),
    ("slist", "sn_list", C::ConvertSecondToList),
    ("fl", "fn_len", C::CountFirstDigits),
    ("sl", "sn_len", C::CountSecondDigits),
    ("max", "max", C::IdentifyMaxDigits),
];

const MUL_DIGIT_FIELDS: &[FieldSpec] = &[
    ("fl", "fn_len", C::CountFirstDigits),
    ("flist", "fn_list", C::CopyUnprocessedFirst),
    ("fni", "fn_idx", C::ExtractLastFirst),
    ("fnd", "fn_digit", C::ExtractLastFirst),
    ("de", "eq_first", C::ExtractLastFirst),
    ("mv", "mulval", C::ConvertSecondToList),
    ("prod", "sum", C::TwoDigitSum),
    ("p0", "pad_zeros", C::NewCarry),
    ("shifted", "a_full", C::InsertNewAnswerDigit),
];

const SYM_HDR_FIELDS: &[FieldSpec] = &[
    ("flist", "fn_list", C::ConvertFirstToList),
    ("slist", "sn_list", C::ConvertSecondToList),
    ("fl", "fn_len", C::CountFirstDigits),
    ("sl", "sn_len", C::CountSecondDigits),
    ("max", "max", C::IdentifyMaxDigits),
];

const SYM_CLOSE_FIELDS: &[FieldSpec] = &[
    ("oal", "answer_len", C::InsertNewAnswerDigit),
    ("oalist", "a_full", C::CopyAccumulatedAnswer),
    ("fin", "final_list", C::CopyAccumulatedAnswer),
];

const COMPACT_CLOSE_FIELDS: &[FieldSpec] = &[
    ("c", "carry_out", C::NewCarry),
    ("oal", "answer_len", C::InsertNewAnswerDigit),
    ("lst", "result_list", C::CopyAccumulatedAnswer),
    ("mid", "new_fn", C::CopyAccumulatedAnswer),
    ("addfin", "final_list", C::CopyAccumulatedAnswer),
    ("fin", "final_list", C::CopyAccumulatedAnswer),
];

const MUL_CLOSE_FIELDS: &[FieldSpec] = &[("lst", "result_list", C::CopyAccumulatedAnswer)];

const MUL_SHIFT_FIELDS: &[FieldSpec] = &[
    ("z", "pad_zeros", C::NewCarry),
    ("orig", "result_list", C::CopyAccumulatedAnswer),
    ("shifted", "a_full", C::CopyAccumulatedAnswer),
];

const MUL_MA_SINGLE_FIELDS: &[FieldSpec] = &[
    ("l1", "result_list", C::CopyAccumulatedAnswer),
    ("fin", "final_list", C::CopyAccumulatedAnswer),
];

const SUB_HDR_FIELDS: &[FieldSpec] = &[
    ("flist", "fn_list", C::ConvertFirstToList),
    ("slist", "sn_list", C::ConvertSecondToList),
    ("fl", "fn_len", C::CountFirstDigits),
    ("sl", "sn_len", C::CountSecondDigits),
    ("max", "max", C::IdentifyMaxDigits),
];

const SUB_TRANSITION_FIELDS: &[FieldSpec] = &[
    ("cf", "carry_front", C::NewCarry),
    ("plist", "a_full", C::CopyAccumulatedAnswer),
    ("fin", "final_list", C::CopyAccumulatedAnswer),
    ("sd", "sign_digit", C::CopyAccumulatedAnswer),
    ("raw", "raw_list", C::CopyAccumulatedAnswer),
    ("marked", "marked_list", C::CopyAccumulatedAnswer),
];

const SUB_NORM_FIELDS: &[FieldSpec] = &[
    ("al2", "answer_len", C::InsertNewAnswerDigit),
    ("marked", "marked_list", C::CopyAccumulatedAnswer),
    ("ki", "fn_idx", C::ExtractLastFirst),
    ("dk", "fn_digit", C::ExtractLastFirst),
    ("cii", "carry_idx", C::CopyPreviousCarry),
    ("ci", "carry_in", C::CopyPreviousCarry),
    ("eqd", "eq_first", C::ExtractLastFirst),
    ("eqb", "eq_second", C::NewCarry),
    ("eqc", "eq_carry", C::CopyPreviousCarry),
    ("ft", "sum", C::TwoDigitSum),
    ("out", "mod_digit", C::InsertNewAnswerDigit),
    ("nl", "new_len", C::InsertNewAnswerDigit),
    ("anew", "a_full", C::CopyAccumulatedAnswer),
    ("coi", "carry_out_idx", C::NewCarry),
    ("co", "carry_out", C::NewCarry),
];

const SUB_NORM_END_FIELDS: &[FieldSpec] = &[("fin", "final_list", C::CopyAccumulatedAnswer)];

const PAR_STEP_FIELDS: &[FieldSpec] = &[
    ("rem", "fn_list", C::CopyUnprocessedFirst),
    ("b1", "fn_digit", C::ExtractLastFirst),
    ("b2", "eq_first", C::ExtractLastFirst),
    ("sin", "carry_in", C::CopyPreviousCarry),
    ("b3", "eq_second", C::ExtractLastFirst),
    ("sout", "sum", C::TwoDigitSum),
    ("secho", "a_full", C::CopyAccumulatedAnswer),
];

const PAR_CLOSE_FIELDS: &[FieldSpec] = &[
    ("s", "a_full", C::CopyAccumulatedAnswer),
    ("fin", "final_digit", C::InsertNewAnswerDigit),
];

static ADDITION: Lazy<Vec<Matcher>> = Lazy::new(|| {
    vec![
        m!(Calc, STEP_STD, never, STD_STEP_FIELDS),
        m!(Header, HDR_PROSE, never, HDR_PROSE_FIELDS),
        m!(Close, CLOSE_PLAIN, fin, CLOSE_PLAIN_FIELDS),
        m!(Close, CLOSE_OVERFLOW, fin, CLOSE_OVERFLOW_FIELDS),
        m!(Close, CLOSE_OVERFLOW_END, fin, CLOSE_PLAIN_FIELDS),
        m!(Calc, SYM_STEP, never, STD_STEP_FIELDS),
        m!(Header, SYM_HDR, never, SYM_HDR_FIELDS),
        m!(Close, SYM_CLOSE, fin, SYM_CLOSE_FIELDS),
    ]
});

static ADDSUB: Lazy<Vec<Matcher>> = Lazy::new(|| {
    vec![
        m!(Calc, SUB_STEP, never, STD_STEP_FIELDS),
        m!(Header, SUB_HDR, never, SUB_HDR_FIELDS),
        m!(Close, SUB_TRANSITION, fin, SUB_TRANSITION_FIELDS),
        m!(Calc, SUB_NORM_STEP, never, SUB_NORM_FIELDS),
        m!(Close, SUB_NORM_END, fin, SUB_NORM_END_FIELDS),
    ]
});

static MULTIPLICATION: Lazy<Vec<Matcher>> = Lazy::new(|| {
    vec![
        m!(Marker, SUBMUL_MARK, never, &[]),
        m!(Marker, MARK_STARS, never, &[]),
        m!(Marker, MARK_PLUS, never, &[]),
        m!(Marker, MARK_LABEL, never, &[]),
        m!(Marker, MARK_EXPL, never, &[]),
        m!(Note, MARK_COMBINE, never, &[]),
        m!(Note, MUL_DONE, never, &[]),
        m!(Close, COMPACT_CLOSE, fin, COMPACT_CLOSE_FIELDS),
        m!(Calc, MUL_DIGIT, never, MUL_DIGIT_FIELDS),
        m!(Calc, SYM_STEP, never, STD_STEP_FIELDS),
        m!(Header, GROUP_HDR, never, GROUP_HDR_FIELDS),
        m!(Header, COMPACT_HDR, never, COMPACT_HDR_FIELDS),
        m!(Header, MUL_HDR, never, MUL_HDR_FIELDS),
        m!(Close, MUL_CLOSE, never, MUL_CLOSE_FIELDS),
        m!(Note, MUL_SHIFT, never, MUL_SHIFT_FIELDS),
        m!(Close, MUL_MA_SINGLE, fin, MUL_MA_SINGLE_FIELDS),
        m!(Marker, SUB_MARK, never, &[]),
        m!(Plan, PLAN, never, &[]),
    ]
});

fn chain_matchers() -> Vec<Matcher> {
    vec![
        m!(Calc, TOOL_STEP, fin, TOOL_STEP_FIELDS),
        m!(Marker, SUB_MARK, never, &[]),
        m!(Calc, STEP_STD, never, STD_STEP_FIELDS),
        m!(Header, HDR_PROSE, never, HDR_PROSE_FIELDS),
        m!(Close, CHAIN_CLOSE, fin, CHAIN_CLOSE_FIELDS),
        m!(Close, CHAIN_OVERFLOW_A, never, CLOSE_OVERFLOW_FIELDS),
        m!(Close, CLOSE_PLAIN, fin, CLOSE_PLAIN_FIELDS),
        m!(Close, CLOSE_OVERFLOW, fin, CLOSE_OVERFLOW_FIELDS),
        m!(Close, CLOSE_OVERFLOW_END, fin, CLOSE_PLAIN_FIELDS),
        m!(Plan, PLAN, never, &[]),
    ]
}

static MULTI_ADD: Lazy<Vec<Matcher>> = Lazy::new(chain_matchers);

static MUL_AS_ADD: Lazy<Vec<Matcher>> = Lazy::new(|| {
    let mut v = vec![
        m!(Note, REWRITE, never, REWRITE_FIELDS),
        m!(Close, DIRECT_PRODUCT, fin, DIRECT_FIELDS),
    ];
    v.extend(chain_matchers());
    v
});

static GSM8K: Lazy<Vec<Matcher>> = Lazy::new(|| {
    vec![
        m!(Marker, SUB_MARK, never, &[]),
        m!(Calc, STEP_BYOP, never, STD_STEP_FIELDS),
        m!(Header, HDR_PROSE, never, HDR_PROSE_FIELDS),
        m!(Close, CHAIN_CLOSE, fin, CHAIN_CLOSE_FIELDS),
        m!(Close, CHAIN_OVERFLOW_A, never, CLOSE_OVERFLOW_FIELDS),
        m!(Plan, PLAN, never, &[]),
    ]
});

static PARITY: Lazy<Vec<Matcher>> = Lazy::new(|| {
    vec![
        m!(Calc, PAR_STEP, never, PAR_STEP_FIELDS),
        m!(Header, PAR_INIT, never, &[]),
        m!(Close, PAR_CLOSE, fin, PAR_CLOSE_FIELDS),
    ]
});

fn matchers(task: Task) -> &'static [Matcher] {
    match task {
        Task::Addition => &ADDITION,
        Task::AdditionSubtraction => &ADDSUB,
        Task::Multiplication => &MULTIPLICATION,
        Task::Parity => &PARITY,
        Task::MultiAddition => &MULTI_ADD,
        Task::MultiplyAsAddition => &MUL_AS_ADD,
        Task::Gsm8k => &GSM8K,
    }
}
