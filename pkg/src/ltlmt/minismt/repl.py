"""SMT-LIB 2.6 read-eval-print loop over stdin/stdout."""

from __future__ import annotations

import sys

from .core import SmtError
from .sexp import SexpError, format_sexp, read_commands
from .solver import Solver

_KNOWN_LOGICS = {
    "ALL",
    "LIA",
    "LRA",
    "LIRA",
    "UF",
    "UFLIA",
    "UFLRA",
    "UFLIRA",
    "QF_LIA",
    "QF_LRA",
    "QF_LIRA",
    "QF_UF",
    "QF_UFLIA",
    "QF_UFLRA",
    "QF_UFLIRA",
    "QF_IDL",
    "QF_RDL",
}


class Repl:
    def __init__(self, out=None):
        self.solver = Solver()
        self.out = out or sys.stdout
        self.print_success = False
        self.running = True

    def emit(self, text: str) -> None:
        self.out.write(text + "\n")
        self.out.flush()

    def success(self) -> None:
        if self.print_success:
            self.emit("success")

    def handle(self, cmd) -> None:
        try:
            self._handle(cmd)
        except (SmtError, SexpError) as e:
            self.emit(f'(error "{e}")')
        except RecursionError:
            self.emit('(error "formula too deep")')

    def _handle(self, cmd) -> None:
        if not isinstance(cmd, list) or not cmd or not isinstance(cmd[0], str):
            raise SmtError(f"bad command: {format_sexp(cmd)}")
        head, *args = cmd
        s = self.solver
        if head == "set-logic":
            if len(args) != 1 or args[0] not in _KNOWN_LOGICS:
                raise SmtError(f"unknown logic {format_sexp(args[0]) if args else ''}")
            self.success()
        elif head == "set-option":
            self._set_option(args)
        elif head == "set-info":
            self.success()
        elif head == "declare-sort":
            if len(args) == 2 and args[1] != "0":
                raise SmtError("only 0-arity sorts are supported")
            s.declare_sort(args[0])
            self.success()
        elif head == "declare-const":
            s.declare_const(args[0], self._sort(args[1]))
            self.success()
        elif head == "declare-fun":
            name, params, result = args[0], args[1], args[2]
            s.declare_fun(name, [self._sort(p) for p in params], self._sort(result))
            self.success()
        elif head == "assert":
            if len(args) != 1:
                raise SmtError("assert takes one argument")
            s.assert_sexpr(args[0])
            self.success()
        elif head == "push":
            for _ in range(int(args[0]) if args else 1):
                s.push()
            self.success()
        elif head == "pop":
            s.pop(int(args[0]) if args else 1)
            self.success()
        elif head == "check-sat":
            self.emit(s.check_sat())
        elif head == "get-value":
            if len(args) != 1 or not isinstance(args[0], list):
                raise SmtError("get-value takes a term list")
            pairs = []
            for term in args[0]:
                pairs.append(f"({format_sexp(term)} {s.render_value(term)})")
            self.emit("(" + " ".join(pairs) + ")")
        elif head == "get-info":
            self._get_info(args)
        elif head == "echo":
            text = args[0] if args else '""'
            self.emit(text[1:-1] if text.startswith('"') else text)
        elif head == "reset":
            self.solver = Solver()
            self.success()
        elif head == "exit":
            self.running = False
        else:
            raise SmtError(f"unknown command {head}")

    def _sort(self, e) -> str:
        if isinstance(e, str):
            return e
        raise SmtError(f"bad sort {format_sexp(e)}")

    def _set_option(self, args) -> None:
        if len(args) >= 1 and args[0] == ":print-success":
            self.print_success = len(args) > 1 and args[1] == "true"
            self.success()
            return
        if len(args) >= 2 and args[0] == ":timeout":
            self.solver.timeout_ms = int(args[1])
        # other options (e.g. :global-declarations) are accepted silently;
        # declarations are global here anyway
        self.success()

    def _get_info(self, args) -> None:
        key = args[0] if args else ""
        if key == ":name":
            self.emit('(:name "minismt")')
        elif key == ":version":
            self.emit('(:version "0.1.0")')
        elif key == ":reason-unknown":
            self.emit(f'(:reason-unknown "{self.solver.reason_unknown}")')
        elif key == ":authors":
            self.emit('(:authors "minismt")')
        else:
            self.emit("unsupported")


def main() -> int:
    repl = Repl()
    try:
        for cmd in read_commands(sys.stdin):
            repl.handle(cmd)
            if not repl.running:
                break
    except (KeyboardInterrupt, BrokenPipeError):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
