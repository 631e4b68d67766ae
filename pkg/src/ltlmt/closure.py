"""Closure of a temporal formula with stable integer indices.

The closure holds every temporal-layer subformula plus X-wrapped untils and
wX-wrapped releases; the wrapper indices name the grounded tomorrow symbols
in the encoder, so index assignment must be deterministic: preorder discovery,
wrappers added right after their until/release subtree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import R, TemporalFormula, U, WX, X, temporal_children


@dataclass
class ClosureTable:
    entries: list[TemporalFormula]
    index: dict[TemporalFormula, int]
    xr: tuple[int, ...]
    wxr: tuple[int, ...]

    def idx(self, f: TemporalFormula) -> int:
        try:
            return self.index[f]
        except KeyError:
            raise KeyError(f"formula not in closure: {f}") from None

    def formula(self, i: int) -> TemporalFormula:
        return self.entries[i]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, f: TemporalFormula) -> bool:
        return f in self.index


def closure(phi: TemporalFormula) -> ClosureTable:
    entries: list[TemporalFormula] = []
    index: dict[TemporalFormula, int] = {}

    def add(f: TemporalFormula) -> None:
        if f in index:
            return
        index[f] = len(entries)
        entries.append(f)
        for c in temporal_children(f):
            add(c)
        if isinstance(f, U):
            add(X(f))
        elif isinstance(f, R):
            add(WX(f))

    add(phi)
    xr = tuple(i for i, f in enumerate(entries) if isinstance(f, X))
    wxr = tuple(i for i, f in enumerate(entries) if isinstance(f, WX))
    return ClosureTable(entries, index, xr, wxr)
