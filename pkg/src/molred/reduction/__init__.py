"""The reduction engine."""

from .engine import (
    BranchPolicy,
    Exhaustive,
    First,
    Ledger,
    LedgerReport,
    PathCapExceeded,
    Random,
    ScriptError,
    Scripted,
    Second,
    Trace,
    bound_exponents,
    ledger_check,
    parse_script,
    phase1,
    record_from_json,
    record_to_json,
    run_reduction,
    run_scripted,
    trace_from_jsonl,
    trace_to_jsonl,
)
from .kinds import TABLE, StepKind, classify, table_values
from .rules import ReductionConfig, Stuck, admissible, match_next
from .steps import InvariantError, PreconditionError, StepDescriptor, StepError, StepRecord, apply_step
