"""Canonical text forms for elements and terms, and their parser.

Elements: a(i,j)  b(i,j)  d(k)  c  t([e1,...,en],tag)
Terms:    x0  u(t)  upqr{p;q;r}(t)  f(t1,...,tn)  plus element literals
          as constant leaves.  Whitespace-insensitive.
"""

from __future__ import annotations

from . import elements as el
from . import terms as terms_mod
from .elements import Element
from .errors import ParseError
from .terms import Term


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def starts_with(self, prefix: str) -> bool:
        self.skip_ws()
        return self.text.startswith(prefix, self.pos)

    def take(self, prefix: str):
        self.skip_ws()
        if not self.text.startswith(prefix, self.pos):
            raise ParseError(f"expected {prefix!r}", self.pos)
        self.pos += len(prefix)

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError("expected an integer", self.pos)
        return int(self.text[start : self.pos])

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    # -- elements ----------------------------------------------------------

    def element(self) -> Element:
        ch = self.peek()
        if ch == "a" or ch == "b":
            self.pos += 1
            self.expect("(")
            i = self.integer()
            self.expect(",")
            j = self.integer()
            self.expect(")")
            return el.AGen(i, j) if ch == "a" else el.BGen(i, j)
        if ch == "d":
            self.pos += 1
            self.expect("(")
            k = self.integer()
            self.expect(")")
            return el.DConst(k)
        if ch == "c":
            self.pos += 1
            return el.CConst()
        if ch == "t":
            self.pos += 1
            self.expect("(")
            self.expect("[")
            args = [self.element()]
            while self.peek() == ",":
                self.pos += 1
                args.append(self.element())
            self.expect("]")
            self.expect(",")
            tag = self.integer()
            self.expect(")")
            return el.Tagged(tuple(args), tag)
        raise ParseError("expected an element", self.pos)

    # -- terms -------------------------------------------------------------

    def term(self) -> Term:
        self.skip_ws()
        if self.starts_with("x"):
            self.pos += 1
            return terms_mod.Var(self.integer())
        if self.starts_with("upqr"):
            self.take("upqr")
            self.expect("{")
            p = self.element()
            self.expect(";")
            q = self.element()
            self.expect(";")
            r = self.element()
            self.expect("}")
            self.expect("(")
            arg = self.term()
            self.expect(")")
            return terms_mod.UPQRApp(p, q, r, arg)
        if self.starts_with("u") and not self.starts_with("upqr"):
            # distinguish u(...) from nothing else starting with u
            save = self.pos
            self.pos += 1
            if self.peek() == "(":
                self.pos += 1
                arg = self.term()
                self.expect(")")
                return terms_mod.UApp(arg)
            self.pos = save
        if self.starts_with("f"):
            save = self.pos
            self.pos += 1
            if self.peek() == "(":
                self.pos += 1
                args = [self.term()]
                while self.peek() == ",":
                    self.pos += 1
                    args.append(self.term())
                self.expect(")")
                return terms_mod.FApp(tuple(args))
            self.pos = save
        return terms_mod.Const(self.element())


def parse_element(text: str) -> Element:
    p = _Parser(text)
    e = p.element()
    if not p.at_end():
        raise ParseError("trailing input after element", p.pos)
    return e


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if not p.at_end():
        raise ParseError("trailing input after term", p.pos)
    return t
