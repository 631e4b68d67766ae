"""Explicit one-pass tree-shaped tableau, used as the reference engine.

Branches are explored breadth-first by poised-node count.  A poised node's
first-order obligations are asserted into one shared solver session, scoped
so that sibling branches reuse the common prefix: session scope j holds the
labeled, stepped formulas of poised node j plus the step literal of node
j-1.  A branch is rejected when its summary formula is unsatisfiable and
accepted when it has no pending tomorrow and the summary stays satisfiable
with the final step literal forced false.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .ast import (
    Fo,
    R,
    Signature,
    TAnd,
    TemporalFormula,
    TOr,
    TTrue,
    U,
    WX,
    X,
    is_elementary,
)
from .backend import SolverConfig, infer_logic, open_session
from .closure import ClosureTable, closure
from .encoder import label_L, step_formula, step_literal
from .ast import Not as FoNot
from .solver import SolveOutcome, extract_trace


@dataclass
class _Node:
    """Exploration record for the optional DOT dump."""

    nid: int
    label: frozenset[int]
    parent: int | None
    rule: str
    status: str = ""


@dataclass
class _Branch:
    poised: tuple[frozenset[int], ...]
    node: int  # id of its last node in the dump


class _Dump:
    def __init__(self, ct: ClosureTable):
        self.ct = ct
        self.nodes: list[_Node] = []

    def add(self, label: frozenset[int], parent: int | None, rule: str) -> int:
        nid = len(self.nodes)
        self.nodes.append(_Node(nid, label, parent, rule))
        return nid

    def mark(self, nid: int, status: str) -> None:
        self.nodes[nid].status = status

    def write(self, path: str) -> None:
        from .printer import print_temporal

        def esc(s: str) -> str:
            return s.replace("\\", "\\\\").replace('"', '\\"')

        with open(path, "w") as fh:
            fh.write("digraph tableau {\n  node [shape=box, fontname=monospace];\n")
            for n in self.nodes:
                text = "\\n".join(
                    esc(print_temporal(self.ct.formula(i))) for i in sorted(n.label)
                ) or "{}"
                color = {
                    "rejected": "red",
                    "accepted": "green",
                    "trimmed": "gray",
                }.get(n.status, "black")
                fh.write(f'  n{n.nid} [label="{text}", color={color}];\n')
                if n.parent is not None:
                    fh.write(f'  n{n.parent} -> n{n.nid} [label="{n.rule}"];\n')
            fh.write("}\n")


def expand(label: frozenset[int], ct: ClosureTable) -> list[tuple[frozenset[int], str]]:
    """Apply one expansion rule to the first non-elementary formula.

    Returns the child labels in rule order, or [] when the label is poised.
    """
    target = None
    for idx in sorted(label):
        if not is_elementary(ct.formula(idx)):
            target = idx
            break
    if target is None:
        return []
    f = ct.formula(target)
    rest = label - {target}
    if isinstance(f, TOr):
        return [
            (rest | {ct.idx(f.left)}, "or-left"),
            (rest | {ct.idx(f.right)}, "or-right"),
        ]
    if isinstance(f, TAnd):
        return [(rest | {ct.idx(f.left), ct.idx(f.right)}, "and")]
    if isinstance(f, U):
        return [
            (rest | {ct.idx(f.right)}, "until-now"),
            (rest | {ct.idx(f.left), ct.idx(X(f))}, "until-later"),
        ]
    if isinstance(f, R):
        return [
            (rest | {ct.idx(f.left), ct.idx(f.right)}, "release-now"),
            (rest | {ct.idx(f.right), ct.idx(WX(f))}, "release-later"),
        ]
    raise TypeError(f"unexpected non-elementary formula {f!r}")


def step(label: frozenset[int], ct: ClosureTable) -> frozenset[int]:
    """Step rule: keep the arguments of all tomorrow/weak-tomorrow formulas."""
    out = set()
    for idx in label:
        f = ct.formula(idx)
        if isinstance(f, (X, WX)):
            out.add(ct.idx(f.arg))
    return frozenset(out)


def _poised_descendants(
    label: frozenset[int], ct: ClosureTable, dump: _Dump | None, parent: int
) -> list[tuple[frozenset[int], int]]:
    children = expand(label, ct)
    if not children:
        return [(label, parent)]
    out = []
    for child, rule in children:
        nid = dump.add(child, parent, rule) if dump else parent
        out.extend(_poised_descendants(child, ct, dump, nid))
    return out


class _OmegaSession:
    """Session whose push/pop scopes mirror a branch's poised prefix."""

    def __init__(self, cfg: SolverConfig, sig: Signature, logic: str):
        self.session = open_session(cfg, sig, logic)
        self.stack: list[tuple[frozenset[int], ...]] = []

    def align(self, poised: tuple[frozenset[int], ...], ct: ClosureTable) -> None:
        common = 0
        while (
            common < len(self.stack)
            and common < len(poised)
            and self.stack[common] == poised[common]
        ):
            common += 1
        while len(self.stack) > common:
            self.session.pop()
            self.stack.pop()
        while len(self.stack) < len(poised):
            i = len(self.stack)
            self.session.push()
            for idx in sorted(poised[i]):
                f = ct.formula(idx)
                if isinstance(f, Fo):
                    self.session.assert_formula(step_formula(label_L(f.formula, i), i))
            if i >= 1:
                self.session.assert_formula(step_literal(i - 1))
            self.stack.append(poised[i])

    def close(self) -> None:
        self.session.close()


def search(
    phi: TemporalFormula,
    sig: Signature,
    cfg: SolverConfig,
    max_poised: int = 0,
    dump_path: str | None = None,
    wall_deadline: float | None = None,
) -> SolveOutcome:
    """Breadth-first tableau construction; SAT on the first accepted branch,
    UNSAT when every branch is rejected, UNKNOWN when the poised bound (or a
    backend unknown) trims live branches."""
    ct = closure(phi)
    dump = _Dump(ct) if dump_path else None
    logic = cfg.logic or infer_logic(phi, sig)
    omega = _OmegaSession(cfg, sig, logic)
    trimmed = False
    try:
        root_label = frozenset({ct.idx(phi)})
        root = dump.add(root_label, None, "root") if dump else 0
        frontier: deque[_Branch] = deque()
        for label, nid in _poised_descendants(root_label, ct, dump, root):
            frontier.append(_Branch((label,), nid))
        while frontier:
            if wall_deadline is not None and time.monotonic() > wall_deadline:
                return SolveOutcome("unknown", reason="timeout")
            branch = frontier.popleft()
            m = len(branch.poised)
            omega.align(branch.poised, ct)
            r = omega.session.check()
            if r.is_unknown:
                return SolveOutcome(
                    "unknown",
                    k=m - 1,
                    reason="timeout" if r.reason == "timeout" else "backend-unknown",
                )
            if r.is_unsat:
                if dump:
                    dump.mark(branch.node, "rejected")
                continue
            last = branch.poised[-1]
            has_tomorrow = any(isinstance(ct.formula(i), X) for i in last)
            if not has_tomorrow:
                omega.session.push()
                omega.session.assert_formula(FoNot(step_literal(m - 1)))
                r2 = omega.session.check()
                if r2.is_unknown:
                    return SolveOutcome(
                        "unknown",
                        k=m - 1,
                        reason="timeout" if r2.reason == "timeout" else "backend-unknown",
                    )
                if r2.is_sat:
                    trace = extract_trace(omega.session, sig, phi, m - 1)
                    omega.session.pop()
                    if dump:
                        dump.mark(branch.node, "accepted")
                    return SolveOutcome("sat", k=m - 1, trace=trace)
                omega.session.pop()
            if max_poised and m >= max_poised:
                trimmed = True
                if dump:
                    dump.mark(branch.node, "trimmed")
                continue
            next_label = step(last, ct)
            step_nid = dump.add(next_label, branch.node, "step") if dump else branch.node
            for label, nid in _poised_descendants(next_label, ct, dump, step_nid):
                frontier.append(_Branch(branch.poised + (label,), nid))
        if trimmed:
            return SolveOutcome("unknown", reason="bound-exhausted")
        return SolveOutcome("unsat")
    finally:
        omega.close()
        if dump and dump_path:
            dump.write(dump_path)
