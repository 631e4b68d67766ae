"""Satisfiability checking for linear temporal logic over finite traces with
first-order theory atoms: parser, incremental SMT encoding, reference
tableau, witness extraction/verification and benchmark generators.

Heavy submodules load lazily so that spawning the bundled solver subprocess
(`python -m ltlmt.minismt`) stays cheap.
"""

__version__ = "0.1.0"

_LAZY = {
    "parse": ("ltlmt.parser", "parse"),
    "ParseError": ("ltlmt.parser", "ParseError"),
    "solve": ("ltlmt.solver", "solve"),
    "SolveOptions": ("ltlmt.solver", "SolveOptions"),
    "SolveOutcome": ("ltlmt.solver", "SolveOutcome"),
    "verify_witness": ("ltlmt.solver", "verify_witness"),
    "SolverConfig": ("ltlmt.backend", "SolverConfig"),
    "Trace": ("ltlmt.semantics", "Trace"),
    "enumerate_sat": ("ltlmt.semantics", "enumerate_sat"),
    "flatten_next": ("ltlmt.flatten", "flatten_next"),
    "closure": ("ltlmt.closure", "closure"),
    "to_nnf": ("ltlmt.nnf", "to_nnf"),
    "sort_check": ("ltlmt.sortcheck", "sort_check"),
}


def __getattr__(name: str):
    if name in _LAZY:
        import importlib

        module, attr = _LAZY[name]
        return getattr(importlib.import_module(module), attr)
    raise AttributeError(f"module 'ltlmt' has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_LAZY))
