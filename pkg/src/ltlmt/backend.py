"""Incremental solving sessions over an external SMT solver process.

The session speaks SMT-LIB 2.6 over the solver's stdin/stdout: declarations
are emitted on first use (with :global-declarations so they survive pops),
assertions are serialized from ground formulas, and model values are read
back exactly (integers, fractions, booleans, abstract sort elements).

By default the bundled solver (`python -m ltlmt.minismt`) is spawned, so a
plain installation is self-contained; any SMT-LIB compliant solver can be
substituted via SolverConfig.executable (e.g. ``z3``).
"""

from __future__ import annotations

import os
import selectors
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .ast import (
    Add,
    And,
    Apply,
    Atom,
    BoundVar,
    Const,
    Div,
    Exists,
    FoFormula,
    FoFalse,
    FoTrue,
    Forall,
    Iff,
    Implies,
    IntLit,
    Mul,
    Neg,
    Not,
    Or,
    RatLit,
    RELATIONS,
    REAL,
    Signature,
    Sort,
    StateVar,
    Sub,
    TemporalFormula,
    Term,
    temporal_fo_leaves,
    fo_subformulas,
    fo_terms,
    subterms,
)
from .minismt.sexp import format_symbol, parse_all, parse_one
from .semantics import Elem, Value


class BackendError(Exception):
    pass


class Status(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CheckResult:
    status: Status
    reason: str | None = None

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status is Status.UNSAT

    @property
    def is_unknown(self) -> bool:
        return self.status is Status.UNKNOWN


@dataclass
class SolverConfig:
    executable: str | None = None  # None: bundled solver
    args: tuple[str, ...] = ()
    logic: str | None = None  # None: inferred per formula
    timeout_ms: int | None = 60_000
    trace_log: str | None = None

    def command(self) -> list[str]:
        if self.executable is None:
            return [sys.executable, "-m", "ltlmt.minismt"]
        cmd = [self.executable, *self.args]
        base = self.executable.rsplit("/", 1)[-1]
        if base.startswith("z3") and not self.args:
            cmd.append("-in")
        return cmd


def infer_logic(phi: TemporalFormula, sig: Signature) -> str:
    """ALL for quantified formulas, otherwise QF_ + UF/LIA/LRA/LIRA letters."""
    quantified = False
    for lam in temporal_fo_leaves(phi):
        for f in fo_subformulas(lam):
            if isinstance(f, (Exists, Forall)):
                quantified = True
    if quantified:
        return "ALL"
    uf = bool(sig.functions) or bool(sig.predicates) or any(
        s.uninterpreted for s in sig.sorts.values()
    )
    sorts = {s.name for s in sig.state_vars.values()} | {
        s.name for s in sig.constants.values()
    }
    ints = "Int" in sorts
    reals = "Real" in sorts
    if ints and reals:
        arith = "LIRA"
    elif reals:
        arith = "LRA"
    elif ints:
        arith = "LIA"
    else:
        arith = ""
    if uf:
        return f"QF_UF{arith}"
    return f"QF_{arith}" if arith else "QF_UF"


# ---------------------------------------------------------------------------
# Serialization


def _resolve_base(name: str) -> str:
    return name.rsplit("@", 1)[0] if "@" in name and not name.startswith("_") else name


class _Serializer:
    def __init__(self, sig: Signature):
        self.sig = sig

    def sort_of_var(self, name: str) -> Sort:
        base = _resolve_base(name)
        sort = self.sig.state_vars.get(base)
        if sort is None:
            raise BackendError(f"cannot resolve sort of symbol {name}")
        return sort

    def term_sort_name(self, t: Term) -> str:
        if isinstance(t, StateVar):
            return self.sort_of_var(t.name).name
        if isinstance(t, Const):
            return self.sig.constants[t.name].name
        if isinstance(t, Apply):
            return self.sig.functions[t.func][1].name
        if isinstance(t, IntLit):
            return "Int"
        if isinstance(t, RatLit):
            return "Real"
        if isinstance(t, (Add, Sub, Mul)):
            l = self.term_sort_name(t.left)
            return l if l != "Int" else self.term_sort_name(t.right)
        if isinstance(t, Div):
            return "Real"
        if isinstance(t, Neg):
            return self.term_sort_name(t.arg)
        if isinstance(t, BoundVar):
            return "?"
        raise BackendError(f"unknown term {t!r}")

    def term(self, t: Term, real_ctx: bool, binders: dict[str, str]) -> str:
        if isinstance(t, StateVar):
            return format_symbol(t.name)
        if isinstance(t, BoundVar):
            return format_symbol(t.name)
        if isinstance(t, Const):
            return format_symbol(t.name)
        if isinstance(t, IntLit):
            v = t.value
            body = f"{abs(v)}.0" if real_ctx else str(abs(v))
            return f"(- {body})" if v < 0 else body
        if isinstance(t, RatLit):
            return _rat_sexp(t.value)
        if isinstance(t, Apply):
            params = self.sig.functions[t.func][0]
            args = " ".join(
                self.term(a, p.name == "Real", binders)
                for a, p in zip(t.args, params)
            )
            return f"({format_symbol(t.func)} {args})"
        if isinstance(t, Add):
            return f"(+ {self.term(t.left, real_ctx, binders)} {self.term(t.right, real_ctx, binders)})"
        if isinstance(t, Sub):
            return f"(- {self.term(t.left, real_ctx, binders)} {self.term(t.right, real_ctx, binders)})"
        if isinstance(t, Mul):
            return f"(* {self.term(t.left, real_ctx, binders)} {self.term(t.right, real_ctx, binders)})"
        if isinstance(t, Div):
            return f"(/ {self.term(t.num, True, binders)} {self.term(t.den, True, binders)})"
        if isinstance(t, Neg):
            return f"(- {self.term(t.arg, real_ctx, binders)})"
        raise BackendError(f"cannot serialize term {t!r}")

    def _atom_real_ctx(self, a: Atom, binders: dict[str, str]) -> bool:
        for arg in a.args:
            s = self.term_sort_name(arg)
            if s == "Real":
                return True
            if s == "?" and binders.get(_bound_name(arg), "") == "Real":
                return True
        return False

    def formula(self, f: FoFormula, binders: dict[str, str] | None = None) -> str:
        binders = binders or {}
        if isinstance(f, FoTrue):
            return "true"
        if isinstance(f, FoFalse):
            return "false"
        if isinstance(f, Atom):
            if f.pred in RELATIONS:
                real_ctx = self._atom_real_ctx(f, binders)
                l = self.term(f.args[0], real_ctx, binders)
                r = self.term(f.args[1], real_ctx, binders)
                return f"({f.pred} {l} {r})"
            if not f.args:
                return format_symbol(f.pred)
            params = self.sig.predicates.get(f.pred, ())
            args = " ".join(
                self.term(a, p.name == "Real", binders)
                for a, p in zip(f.args, params)
            )
            return f"({format_symbol(f.pred)} {args})"
        if isinstance(f, Not):
            return f"(not {self.formula(f.arg, binders)})"
        if isinstance(f, And):
            return f"(and {self.formula(f.left, binders)} {self.formula(f.right, binders)})"
        if isinstance(f, Or):
            return f"(or {self.formula(f.left, binders)} {self.formula(f.right, binders)})"
        if isinstance(f, Implies):
            return f"(=> {self.formula(f.left, binders)} {self.formula(f.right, binders)})"
        if isinstance(f, Iff):
            return f"(= {self.formula(f.left, binders)} {self.formula(f.right, binders)})"
        if isinstance(f, (Exists, Forall)):
            kw = "exists" if isinstance(f, Exists) else "forall"
            inner = dict(binders)
            inner[f.var] = f.sort.name
            return f"({kw} (({format_symbol(f.var)} {f.sort.name})) {self.formula(f.body, inner)})"
        raise BackendError(f"cannot serialize formula {f!r}")


def _bound_name(t: Term) -> str:
    for s in subterms(t):
        if isinstance(s, BoundVar):
            return s.name
    return ""


def _rat_sexp(v: Fraction) -> str:
    sign = v < 0
    v = abs(v)
    if v.denominator == 1:
        body = f"{v.numerator}.0"
    else:
        body = f"(/ {v.numerator}.0 {v.denominator}.0)"
    return f"(- {body})" if sign else body


# ---------------------------------------------------------------------------
# Value parsing


def parse_value(e, sort_name: str) -> Value:
    v = _parse_value_raw(e)
    if sort_name == "Int":
        if isinstance(v, Fraction):
            if v.denominator != 1:
                raise BackendError(f"non-integer value for Int symbol: {e}")
            return int(v)
        if isinstance(v, bool) or not isinstance(v, int):
            raise BackendError(f"bad Int value: {e}")
        return v
    if sort_name == "Real":
        if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
            return Fraction(v)
        raise BackendError(f"bad Real value: {e}")
    if sort_name == "Bool":
        if isinstance(v, bool):
            return v
        raise BackendError(f"bad Bool value: {e}")
    if isinstance(v, Elem):
        return Elem(sort_name, v.label)
    return Elem(sort_name, str(e))


def _parse_value_raw(e):
    if isinstance(e, str):
        if e == "true":
            return True
        if e == "false":
            return False
        try:
            if "." in e:
                return Fraction(e)
            return int(e)
        except ValueError:
            return Elem("?", e)
    if not e:
        raise BackendError("empty value expression")
    head = e[0]
    if head == "-" and len(e) == 2:
        inner = _parse_value_raw(e[1])
        if isinstance(inner, (int, Fraction)):
            return -inner
        raise BackendError(f"bad negative value {e}")
    if head == "/" and len(e) == 3:
        num = _parse_value_raw(e[1])
        den = _parse_value_raw(e[2])
        return Fraction(num) / Fraction(den)
    if head == "as" and len(e) == 3:
        return Elem(str(e[2]), str(e[1]))
    if head == "_":
        return Elem("?", " ".join(map(str, e)))
    raise BackendError(f"cannot parse value {e}")


# ---------------------------------------------------------------------------
# Session


class Session:
    """One solver process; single-owner, synchronous request/response."""

    def __init__(self, cfg: SolverConfig, sig: Signature, logic: str = "ALL"):
        self.cfg = cfg
        self.sig = sig
        self.serializer = _Serializer(sig)
        self.declared: set[str] = set()
        self.declared_sorts: set[str] = set()
        self.depth = 0
        self.dead = False
        self._log = open(cfg.trace_log, "w") if cfg.trace_log else None
        cmd = cfg.command()
        try:
            self.proc = subprocess.Popen(
                cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as e:
            raise BackendError(f"cannot start solver {cmd[0]}: {e}") from None
        self._fd = self.proc.stdout.fileno()
        self._selector = selectors.DefaultSelector()
        self._selector.register(self._fd, selectors.EVENT_READ)
        self._buf = ""
        self._send("(set-option :print-success false)")
        self._send("(set-option :global-declarations true)")
        if cfg.timeout_ms is not None:
            self._send(f"(set-option :timeout {cfg.timeout_ms})")
        self._send(f"(set-logic {logic})")
        self._handshake()

    # -- plumbing

    def _send(self, line: str) -> None:
        if self.dead:
            raise BackendError("solver session is dead")
        if self._log:
            self._log.write(line + "\n")
            self._log.flush()
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self.dead = True
            raise BackendError("solver process died") from None

    def _read_line(self, deadline: float | None) -> str:
        while True:
            nl = self._buf.find("\n")
            if nl >= 0:
                line = self._buf[:nl]
                self._buf = self._buf[nl + 1 :]
                if line.strip():
                    return line.strip()
                continue
            timeout = None
            if deadline is not None:
                timeout = deadline - time.monotonic()
                if timeout <= 0:
                    raise TimeoutError()
            events = self._selector.select(timeout)
            if not events:
                raise TimeoutError()
            data = os.read(self._fd, 65536)
            if not data:
                self.dead = True
                raise BackendError("solver process closed its output")
            self._buf += data.decode()

    def _read_response(self, deadline: float | None) -> str:
        line = self._read_line(deadline)
        if not line.startswith("("):
            return line
        text = line
        while text.count("(") > text.count(")"):
            text += " " + self._read_line(deadline)
        return text

    def _handshake(self) -> None:
        token = "ltlmt-ready"
        self._send(f'(echo "{token}")')
        deadline = time.monotonic() + 30.0
        while True:
            try:
                line = self._read_response(deadline)
            except TimeoutError:
                self.kill()
                raise BackendError("solver handshake timed out") from None
            if token in line:
                return
            if line.startswith("(error"):
                self.kill()
                raise BackendError(f"solver error during setup: {line}")

    # -- declarations

    def _declare_sort(self, sort: Sort) -> None:
        if sort.uninterpreted and sort.name not in self.declared_sorts:
            self.declared_sorts.add(sort.name)
            self._send(f"(declare-sort {format_symbol(sort.name)} 0)")

    def _declare_symbol(self, name: str, kind: str) -> None:
        if name in self.declared:
            return
        self.declared.add(name)
        sig = self.sig
        if kind == "var":
            sort = self.serializer.sort_of_var(name)
            self._declare_sort(sort)
            self._send(f"(declare-const {format_symbol(name)} {sort.name})")
        elif kind == "bool":
            self._send(f"(declare-const {format_symbol(name)} Bool)")
        elif kind == "const":
            sort = sig.constants[name]
            self._declare_sort(sort)
            self._send(f"(declare-const {format_symbol(name)} {sort.name})")
        elif kind == "fun":
            args, res = sig.functions[name]
            for s in args + (res,):
                self._declare_sort(s)
            params = " ".join(s.name for s in args)
            self._send(f"(declare-fun {format_symbol(name)} ({params}) {res.name})")
        elif kind == "pred":
            args = sig.predicates[name]
            for s in args:
                self._declare_sort(s)
            params = " ".join(s.name for s in args)
            self._send(f"(declare-fun {format_symbol(name)} ({params}) Bool)")

    def _declare_for(self, f: FoFormula) -> None:
        for g in fo_subformulas(f):
            if isinstance(g, Atom):
                if g.pred not in RELATIONS:
                    if g.pred in self.sig.predicates:
                        self._declare_symbol(g.pred, "pred")
                    else:
                        self._declare_symbol(g.pred, "bool")
        for t in fo_terms(f):
            if isinstance(t, StateVar):
                self._declare_symbol(t.name, "var")
            elif isinstance(t, Const):
                self._declare_symbol(t.name, "const")
            elif isinstance(t, Apply):
                self._declare_symbol(t.func, "fun")

    # -- operations

    def assert_formula(self, f: FoFormula) -> None:
        self._declare_for(f)
        self._send(f"(assert {self.serializer.formula(f)})")

    def push(self) -> None:
        self.depth += 1
        self._send("(push 1)")

    def pop(self) -> None:
        if self.depth <= 0:
            raise BackendError("pop without matching push")
        self.depth -= 1
        self._send("(pop 1)")

    def check(self) -> CheckResult:
        self._send("(check-sat)")
        deadline = None
        if self.cfg.timeout_ms is not None:
            deadline = time.monotonic() + (self.cfg.timeout_ms / 1000.0) + 10.0
        try:
            while True:
                line = self._read_response(deadline)
                if line == "sat":
                    return CheckResult(Status.SAT)
                if line == "unsat":
                    return CheckResult(Status.UNSAT)
                if line == "unknown":
                    return CheckResult(Status.UNKNOWN, self._reason_unknown())
                if line.startswith("(error"):
                    raise BackendError(f"solver error: {line}")
        except TimeoutError:
            self.kill()
            return CheckResult(Status.UNKNOWN, "timeout")

    def _reason_unknown(self) -> str:
        self._send("(get-info :reason-unknown)")
        try:
            line = self._read_response(time.monotonic() + 10.0)
        except TimeoutError:
            return "unknown"
        try:
            e = parse_one(line)
            if isinstance(e, list) and len(e) >= 2:
                reason = e[1]
                if isinstance(reason, str) and reason.startswith('"'):
                    reason = reason[1:-1]
                text = reason if isinstance(reason, str) else str(reason)
                if "timeout" in text or "canceled" in text or "resource" in text:
                    return "timeout"
                return text
        except Exception:
            pass
        return "unknown"

    def model_values(self, symbols: list[str]) -> dict[str, Value]:
        """Values of declared symbols after a sat answer."""
        if not symbols:
            return {}
        out: dict[str, Value] = {}
        query = " ".join(format_symbol(s) for s in symbols)
        self._send(f"(get-value ({query}))")
        line = self._read_response(self._value_deadline())
        if line.startswith("(error"):
            raise BackendError(f"solver error: {line}")
        pairs = parse_one(line)
        if not isinstance(pairs, list) or len(pairs) != len(symbols):
            raise BackendError(f"bad get-value response: {line}")
        for name, (sym, val) in zip(symbols, pairs):
            out[name] = parse_value(val, self._symbol_sort(name))
        return out

    def value_of_term(self, t: Term) -> Value:
        self._declare_for(Atom("=", (t, t)))
        text = self.serializer.term(
            t, self.serializer.term_sort_name(t) == "Real", {}
        )
        self._send(f"(get-value ({text}))")
        line = self._read_response(self._value_deadline())
        if line.startswith("(error"):
            raise BackendError(f"solver error: {line}")
        pairs = parse_one(line)
        return parse_value(pairs[0][1], self.serializer.term_sort_name(t))

    def value_of_pred(self, f: Atom) -> bool:
        self._declare_for(f)
        text = self.serializer.formula(f)
        self._send(f"(get-value ({text}))")
        line = self._read_response(self._value_deadline())
        if line.startswith("(error"):
            raise BackendError(f"solver error: {line}")
        pairs = parse_one(line)
        v = parse_value(pairs[0][1], "Bool")
        return bool(v)

    def _value_deadline(self) -> float:
        return time.monotonic() + 30.0

    def _symbol_sort(self, name: str) -> str:
        if name.startswith("_l@") or name.startswith("_g@"):
            return "Bool"
        if "@" in name:
            return self.serializer.sort_of_var(name).name
        if name in self.sig.constants:
            return self.sig.constants[name].name
        if name in self.sig.state_vars:
            return self.sig.state_vars[name].name
        return "Bool"

    # -- lifecycle

    def close(self) -> None:
        if self.dead:
            self.kill()
            return
        try:
            self._send("(exit)")
            self.proc.wait(timeout=5)
        except (BackendError, subprocess.TimeoutExpired):
            self.kill()
        finally:
            self.dead = True
            if self._log:
                self._log.close()
                self._log = None
            self._selector.close()

    def kill(self) -> None:
        self.dead = True
        try:
            self.proc.kill()
            self.proc.wait(timeout=5)
        except Exception:
            pass
        if self._log:
            self._log.close()
            self._log = None

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_session(cfg: SolverConfig, sig: Signature, logic: str | None = None) -> Session:
    return Session(cfg, sig, logic or cfg.logic or "ALL")


def default_config() -> SolverConfig:
    return SolverConfig()


def find_external_solver() -> str | None:
    """Path of a z3 binary if present; informational only."""
    return shutil.which("z3")
