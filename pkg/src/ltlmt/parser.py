"""Parser for the `.ltlmt` input language.

A source file holds declarations followed by exactly one `formula: ...;`
section (or the `init:`/`trans:`/`property:` sections of a transition-system
file).  Parsing resolves names against the declarations, rejects temporal
operators under quantifiers and next-state terms over bound variables, then
converts to negation normal form and sort-checks the result.

Precedence, loosest first: `->` (right), `|`, `&`, `U`/`R` (right), then
negation, quantifiers and the unary temporal operators.  Comments run from
`#` to end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .ast import (
    Add,
    Apply,
    BoundVar,
    Const,
    Div,
    IntLit,
    Mul,
    Neg,
    Next,
    INT,
    REAL,
    RatLit,
    Signature,
    SignatureError,
    Sort,
    StateVar,
    Sub,
    TemporalFormula,
    Term,
    WNext,
    subterms,
)
from .nnf import (
    SAnd,
    SAtom,
    SExists,
    SFalse,
    SForall,
    SImplies,
    SNot,
    SOr,
    SR,
    STrue,
    SU,
    SWX,
    SX,
    Surface,
    sugar_F,
    sugar_G,
    to_nnf,
)
from .sortcheck import SortError, sort_check


class ParseError(Exception):
    def __init__(self, filename: str, line: int, col: int, message: str):
        self.filename = filename
        self.line = line
        self.col = col
        self.message = message
        super().__init__(str(self))

    def __str__(self) -> str:
        return f"{self.filename}:{self.line}:{self.col}: {self.message}"


KEYWORDS = {
    "var", "const", "fun", "pred", "sort", "formula", "init", "trans",
    "property", "logic", "true", "false", "exists", "forall", "next",
    "wnext", "X", "wX", "F", "G", "U", "R",
}

RELOPS = {"=", "!=", "<", "<=", ">", ">="}

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<decimal>\d+\.\d+)"
    r"|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>->|<=|>=|!=|[()&|!=<>+\-*/,:;.])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'int', 'decimal', 'ident', 'kw', 'op', 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str, filename: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    linestart = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - linestart + 1
            raise ParseError(filename, line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        tok = m.group()
        col = pos - linestart + 1
        if kind in ("ws", "comment"):
            pass
        elif kind == "ident":
            k = "kw" if tok in KEYWORDS else "ident"
            tokens.append(Token(k, tok, line, col))
        else:
            tokens.append(Token(kind, tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            linestart = pos + tok.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "<eof>", line, len(text) - linestart + 1))
    return tokens


# ---------------------------------------------------------------------------
# Declarations (spec-level source file model)


@dataclass(frozen=True)
class Decl:
    kind: str  # 'var' | 'const' | 'fun' | 'pred' | 'sort'
    name: str
    arg_sorts: tuple[Sort, ...] = ()
    result: Sort | None = None


@dataclass
class SourceFile:
    declarations: list[Decl] = field(default_factory=list)
    options: dict[str, str] = field(default_factory=dict)
    formula: Surface | None = None
    sections: dict[str, Surface] = field(default_factory=dict)


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.tokens = _tokenize(text, filename)
        self.pos = 0
        self.sig = Signature.empty()
        self.binders: list[tuple[str, Sort]] = []
        self.quant_depth = 0

    # -- token helpers

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("op", "kw")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            t = self.peek()
            self.fail(t, f"expected '{text}', found '{t.text}'")
        return self.advance()

    def fail(self, tok: Token, message: str):
        raise ParseError(self.filename, tok.line, tok.col, message)

    # -- declarations

    def parse_source(self) -> SourceFile:
        sf = SourceFile()
        while True:
            t = self.peek()
            if t.kind == "eof":
                break
            if t.kind != "kw":
                self.fail(t, f"expected a declaration or section, found '{t.text}'")
            if t.text in ("var", "const", "fun", "pred", "sort"):
                self.parse_decl(sf)
            elif t.text == "logic":
                self.advance()
                self.expect(":")
                name = self.advance()
                if name.kind not in ("ident", "kw"):
                    self.fail(name, "expected logic name")
                sf.options["logic"] = name.text
                self.expect(";")
            elif t.text == "formula":
                if sf.formula is not None:
                    self.fail(t, "duplicate formula section")
                self.advance()
                self.expect(":")
                sf.formula = self.parse_formula()
                self.expect(";")
            elif t.text in ("init", "trans", "property"):
                if t.text in sf.sections:
                    self.fail(t, f"duplicate {t.text} section")
                self.advance()
                self.expect(":")
                sf.sections[t.text] = self.parse_formula()
                self.expect(";")
            else:
                self.fail(t, f"unexpected keyword '{t.text}'")
        return sf

    def _decl_name(self) -> str:
        t = self.advance()
        if t.kind != "ident":
            self.fail(t, f"expected an identifier, found '{t.text}'")
        if t.text.startswith("_"):
            self.fail(t, "identifiers may not begin with '_'")
        return t.text

    def parse_sort_name(self) -> Sort:
        t = self.advance()
        if t.kind not in ("ident", "kw"):
            self.fail(t, f"expected a sort name, found '{t.text}'")
        sort = self.sig.sorts.get(t.text)
        if sort is None:
            self.fail(t, f"undeclared sort '{t.text}'")
        return sort

    def parse_decl(self, sf: SourceFile) -> None:
        kw = self.advance()
        try:
            if kw.text == "sort":
                name = self._decl_name()
                self.sig = self.sig.with_sort(name)
                sf.declarations.append(Decl("sort", name))
            elif kw.text == "var":
                name = self._decl_name()
                self.expect(":")
                sort = self.parse_sort_name()
                self.sig = self.sig.with_var(name, sort)
                sf.declarations.append(Decl("var", name, result=sort))
            elif kw.text == "const":
                name = self._decl_name()
                self.expect(":")
                sort = self.parse_sort_name()
                self.sig = self.sig.with_const(name, sort)
                sf.declarations.append(Decl("const", name, result=sort))
            elif kw.text == "fun":
                name = self._decl_name()
                self.expect("(")
                args = self.parse_sort_list()
                self.expect(")")
                self.expect(":")
                res = self.parse_sort_name()
                if not args:
                    self.fail(kw, "0-ary functions are not allowed; declare a const")
                self.sig = self.sig.with_function(name, args, res)
                sf.declarations.append(Decl("fun", name, arg_sorts=args, result=res))
            elif kw.text == "pred":
                name = self._decl_name()
                args: tuple[Sort, ...] = ()
                if self.at("("):
                    self.advance()
                    args = self.parse_sort_list()
                    self.expect(")")
                self.sig = self.sig.with_predicate(name, args)
                sf.declarations.append(Decl("pred", name, arg_sorts=args))
        except SignatureError as e:
            self.fail(kw, str(e))
        self.expect(";")

    def parse_sort_list(self) -> tuple[Sort, ...]:
        if self.at(")"):
            return ()
        sorts = [self.parse_sort_name()]
        while self.at(","):
            self.advance()
            sorts.append(self.parse_sort_name())
        return tuple(sorts)

    # -- formulas

    def parse_formula(self) -> Surface:
        return self.parse_implies()

    def parse_implies(self) -> Surface:
        left = self.parse_or()
        if self.at("->"):
            self.advance()
            right = self.parse_implies()
            return SImplies(left, right)
        return left

    def parse_or(self) -> Surface:
        f = self.parse_and()
        while self.at("|"):
            self.advance()
            f = SOr(f, self.parse_and())
        return f

    def parse_and(self) -> Surface:
        f = self.parse_ur()
        while self.at("&"):
            self.advance()
            f = SAnd(f, self.parse_ur())
        return f

    def parse_ur(self) -> Surface:
        left = self.parse_unary()
        t = self.peek()
        if t.kind == "kw" and t.text in ("U", "R"):
            self._temporal_guard(t)
            self.advance()
            right = self.parse_ur()
            return SU(left, right) if t.text == "U" else SR(left, right)
        return left

    def _temporal_guard(self, tok: Token) -> None:
        if self.quant_depth > 0:
            self.fail(tok, "temporal operator under quantifier")

    def parse_unary(self) -> Surface:
        t = self.peek()
        if self.at("!"):
            self.advance()
            return SNot(self.parse_unary())
        if t.kind == "kw" and t.text in ("X", "wX", "F", "G"):
            self._temporal_guard(t)
            self.advance()
            arg = self.parse_unary()
            if t.text == "X":
                return SX(arg)
            if t.text == "wX":
                return SWX(arg)
            if t.text == "F":
                return sugar_F(arg)
            return sugar_G(arg)
        if t.kind == "kw" and t.text in ("exists", "forall"):
            self.advance()
            name_tok = self.advance()
            if name_tok.kind != "ident":
                self.fail(name_tok, f"expected a variable name, found '{name_tok.text}'")
            name = name_tok.text
            if name.startswith("_"):
                self.fail(name_tok, "identifiers may not begin with '_'")
            if any(name == b for b, _ in self.binders):
                self.fail(name_tok, f"variable '{name}' is already bound")
            if (
                name in self.sig.state_vars
                or name in self.sig.constants
                or name in self.sig.functions
                or name in self.sig.predicates
            ):
                self.fail(name_tok, f"quantified variable '{name}' shadows a declaration")
            self.expect(":")
            sort = self.parse_sort_name()
            self.expect(".")
            self.binders.append((name, sort))
            self.quant_depth += 1
            try:
                body = self.parse_unary()
            finally:
                self.binders.pop()
                self.quant_depth -= 1
            return SExists(name, sort, body) if t.text == "exists" else SForall(name, sort, body)
        return self.parse_primary()

    def parse_primary(self) -> Surface:
        t = self.peek()
        if t.kind == "kw" and t.text == "true":
            self.advance()
            return STrue()
        if t.kind == "kw" and t.text == "false":
            self.advance()
            return SFalse()
        if t.kind == "ident" and t.text in self.sig.predicates:
            name = self.advance().text
            args: tuple[Term, ...] = ()
            if self.at("("):
                self.advance()
                args = self.parse_term_list()
                self.expect(")")
            want = len(self.sig.predicates[name])
            if len(args) != want:
                self.fail(t, f"predicate {name} expects {want} arguments, got {len(args)}")
            return SAtom(name, args)
        if self.at("("):
            # Either a parenthesized formula or a parenthesized term opening
            # a relational atom; try the formula reading first.
            save = self.pos
            try:
                self.advance()
                f = self.parse_formula()
                self.expect(")")
                return f
            except ParseError as formula_err:
                self.pos = save
                try:
                    return self.parse_rel_atom()
                except ParseError as atom_err:
                    raise formula_err if _further(formula_err, atom_err) else atom_err
        return self.parse_rel_atom()

    def parse_rel_atom(self) -> Surface:
        lhs = self.parse_term()
        t = self.peek()
        if t.kind == "op" and t.text in RELOPS:
            self.advance()
            rhs = self.parse_term()
            if t.text == "!=":
                return SNot(SAtom("=", (lhs, rhs)))
            return SAtom(t.text, (lhs, rhs))
        self.fail(t, f"expected a relation, found '{t.text}'")

    # -- terms

    def parse_term_list(self) -> tuple[Term, ...]:
        if self.at(")"):
            return ()
        terms = [self.parse_term()]
        while self.at(","):
            self.advance()
            terms.append(self.parse_term())
        return tuple(terms)

    def parse_term(self) -> Term:
        t = self.parse_term_mul()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.advance().text
            rhs = self.parse_term_mul()
            t = Add(t, rhs) if op == "+" else Sub(t, rhs)
        return t

    def parse_term_mul(self) -> Term:
        t = self.parse_term_unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.advance().text
            rhs = self.parse_term_unary()
            t = Mul(t, rhs) if op == "*" else Div(t, rhs)
        return t

    def parse_term_unary(self) -> Term:
        if self.at("-"):
            self.advance()
            return Neg(self.parse_term_unary())
        return self.parse_term_primary()

    def parse_term_primary(self) -> Term:
        t = self.peek()
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text))
        if t.kind == "decimal":
            self.advance()
            return RatLit(Fraction(t.text))
        if t.kind == "kw" and t.text in ("next", "wnext"):
            self.advance()
            self.expect("(")
            inner = self.parse_term()
            self.expect(")")
            for sub in subterms(inner):
                if isinstance(sub, BoundVar):
                    self.fail(t, f"next-state term over bound variable '{sub.name}'")
            return Next(inner) if t.text == "next" else WNext(inner)
        if self.at("("):
            self.advance()
            inner = self.parse_term()
            self.expect(")")
            return inner
        if t.kind == "ident":
            self.advance()
            name = t.text
            for bname, _ in reversed(self.binders):
                if bname == name:
                    return BoundVar(name)
            if name in self.sig.state_vars:
                return StateVar(name)
            if name in self.sig.constants:
                return Const(name)
            if name in self.sig.functions:
                self.expect("(")
                args = self.parse_term_list()
                self.expect(")")
                want = len(self.sig.functions[name][0])
                if len(args) != want:
                    self.fail(t, f"function {name} expects {want} arguments, got {len(args)}")
                return Apply(name, args)
            if name in self.sig.predicates:
                self.fail(t, f"predicate '{name}' used as a term")
            if name.startswith("_"):
                self.fail(t, "identifiers may not begin with '_'")
            self.fail(t, f"undeclared identifier '{name}'")
        self.fail(t, f"expected a term, found '{t.text}'")


def _further(a: ParseError, b: ParseError) -> bool:
    return (a.line, a.col) >= (b.line, b.col)


# ---------------------------------------------------------------------------
# Entry points


def parse_source(text: str, filename: str = "<input>") -> tuple[Signature, SourceFile]:
    p = _Parser(text, filename)
    sf = p.parse_source()
    return p.sig, sf


def parse(text: str, filename: str = "<input>") -> tuple[Signature, TemporalFormula]:
    """Parse a formula file into a signature and an NNF, sort-checked AST."""
    sig, sf = parse_source(text, filename)
    if sf.formula is None:
        raise ParseError(filename, 1, 1, "missing formula section")
    if sf.sections:
        raise ParseError(filename, 1, 1, "transition-system sections in a formula file")
    phi = to_nnf(sf.formula)
    try:
        sort_check(phi, sig)
    except SortError as e:
        raise ParseError(filename, 1, 1, str(e)) from None
    return sig, phi


def parse_transition_sections(
    text: str, filename: str = "<input>"
) -> tuple[Signature, TemporalFormula, TemporalFormula, TemporalFormula]:
    """Parse `init:`/`trans:`/`property:` sections of a transition-system file."""
    sig, sf = parse_source(text, filename)
    if sf.formula is not None:
        raise ParseError(filename, 1, 1, "formula section in a transition-system file")
    for section in ("init", "trans", "property"):
        if section not in sf.sections:
            raise ParseError(filename, 1, 1, f"missing {section} section")
    parts = []
    for section in ("init", "trans", "property"):
        phi = to_nnf(sf.sections[section])
        try:
            sort_check(phi, sig)
        except SortError as e:
            raise ParseError(filename, 1, 1, f"in {section}: {e}") from None
        parts.append(phi)
    return sig, parts[0], parts[1], parts[2]
