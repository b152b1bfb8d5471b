"""Frequent trace mining on labeled DAGs by conditional path sampling."""
__version__ = "0.1.0"

from .counting import PathCountTable, count_traces, total_traces
from .dag import LabeledDag, build_dag, load_dag, save_dag
from .enumeration import TraceMultiset, all_traces, exact_frequencies
from .errors import BudgetExceeded, CycleError, DomainError, ParseError, RangeError
from .hashing import TraceHasher, extend_hash, trace_hash
from .heavy_hitters import CandidateReport, CounterSet, mine_frequent, second_pass_verify
from .ingestion import EventRecord, build_event_dag, parse_events
from .sampling import SampleConfig, TraceSampler, choose_p, sample_traces, select_recursing_children

__all__ = [
    "BudgetExceeded", "CandidateReport", "CounterSet", "CycleError", "DomainError", "EventRecord",
    "LabeledDag", "ParseError", "PathCountTable", "RangeError", "SampleConfig", "TraceHasher",
    "TraceMultiset", "TraceSampler", "all_traces", "build_dag", "build_event_dag", "choose_p",
    "count_traces", "exact_frequencies", "extend_hash", "load_dag", "mine_frequent", "parse_events",
    "sample_traces", "save_dag", "second_pass_verify", "select_recursing_children", "total_traces",
    "trace_hash",
]
