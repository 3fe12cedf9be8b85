"""lolac: a compiler from Lola stream specifications to constant-memory monitors."""

from .analysis import AnalysisReport, analyze
from .codegen import CodegenOptions, EmittedProgram, generate
from .errors import EvalError, LolaError
from .frontend import load_spec
from .interpreter import EvaluationModel, evaluate
from .traces import Trace, read_trace_csv, write_trace_csv

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "CodegenOptions",
    "EmittedProgram",
    "EvalError",
    "EvaluationModel",
    "LolaError",
    "Trace",
    "analyze",
    "evaluate",
    "generate",
    "load_spec",
    "read_trace_csv",
    "write_trace_csv",
]
