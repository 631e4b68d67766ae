"""S-expression reading and writing for the SMT-LIB wire format.

Atoms are plain strings; ``|``-quoted symbols keep their bars stripped and
string literals keep their quotes so the two stay distinguishable.
"""

from __future__ import annotations


class SexpError(Exception):
    pass


def tokenize(text: str):
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            yield text[i + 1 : j]
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise SexpError("unterminated string literal")
            yield text[i : j + 1]
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();|\"":
                j += 1
            yield text[i:j]
            i = j


def parse_all(text: str) -> list:
    """Parse every s-expression in the text."""
    stack: list[list] = []
    out: list = []
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise SexpError("unbalanced ')'")
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                out.append(done)
        else:
            if stack:
                stack[-1].append(tok)
            else:
                out.append(tok)
    if stack:
        raise SexpError("unbalanced '('")
    return out


def parse_one(text: str):
    exprs = parse_all(text)
    if len(exprs) != 1:
        raise SexpError(f"expected one s-expression, got {len(exprs)}")
    return exprs[0]


_PLAIN = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789~!@$%^&*_-+=<>.?/")


def format_symbol(name: str) -> str:
    if name and all(c in _PLAIN for c in name) and "@" not in name:
        return name
    return f"|{name}|"


def format_sexp(e) -> str:
    if isinstance(e, str):
        return e
    return "(" + " ".join(format_sexp(x) for x in e) + ")"


def read_commands(stream):
    """Yield complete top-level s-expressions from a text stream.

    Reads line by line, emitting commands as soon as their parentheses
    balance; interactive use therefore works without end-of-input.
    """
    buf = ""
    depth = 0
    in_bars = False
    in_str = False
    for line in stream:
        buf += line
        for c in line:
            if in_bars:
                if c == "|":
                    in_bars = False
            elif in_str:
                if c == '"':
                    in_str = False
            elif c == "|":
                in_bars = True
            elif c == '"':
                in_str = True
            elif c == ";":
                break
            elif c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
        if depth == 0 and buf.strip():
            for cmd in parse_all(buf):
                yield cmd
            buf = ""
    if buf.strip():
        for cmd in parse_all(buf):
            yield cmd
