"""Term syntax trees, evaluation, unary polynomials and bounded enumeration.

Plain terms are constant-free; constant leaves only appear inside unary
polynomial bodies.  Enumeration is canonical (by depth, then constructor
order Var < UApp < UPQRApp < FApp, then children) so that every witness
search has a well-defined first hit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence, Union

from . import elements
from .elements import Element, Params, sort_key, validate_triple
from .errors import BudgetExceededError

DEFAULT_TERM_CAP = 10**6


@dataclass(frozen=True)
class Var:
    idx: int


@dataclass(frozen=True)
class Const:
    value: Element


@dataclass(frozen=True)
class UApp:
    arg: "Term"


@dataclass(frozen=True)
class UPQRApp:
    p: Element
    q: Element
    r: Element
    arg: "Term"

    def __post_init__(self):
        validate_triple(self.p, self.q, self.r)


@dataclass(frozen=True)
class FApp:
    args: tuple["Term", ...]


Term = Union[Var, Const, UApp, UPQRApp, FApp]

Assignment = Mapping[int, Element]


def depth(t: Term) -> int:
    if isinstance(t, (Var, Const)):
        return 0
    if isinstance(t, (UApp, UPQRApp)):
        return 1 + depth(t.arg)
    return 1 + max(depth(a) for a in t.args)


def free_vars(t: Term) -> frozenset[int]:
    if isinstance(t, Var):
        return frozenset((t.idx,))
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, (UApp, UPQRApp)):
        return free_vars(t.arg)
    out: frozenset[int] = frozenset()
    for a in t.args:
        out |= free_vars(a)
    return out


def eval_term(t: Term, a: Assignment, params: Params) -> Element:
    if isinstance(t, Var):
        try:
            return a[t.idx]
        except KeyError:
            raise KeyError(f"unbound variable x{t.idx}") from None
    if isinstance(t, Const):
        return t.value
    if isinstance(t, UApp):
        return elements.eval_u(eval_term(t.arg, a, params), params)
    if isinstance(t, UPQRApp):
        return elements.eval_u_pqr(t.p, t.q, t.r, eval_term(t.arg, a, params), params)
    return elements.eval_f([eval_term(s, a, params) for s in t.args], params)


@dataclass(frozen=True)
class UnaryPolynomial:
    """A term in one variable (index 0) whose other leaves are constants."""

    body: Term

    def __post_init__(self):
        if free_vars(self.body) - {0}:
            raise ValueError("polynomial body may only use variable x0")


def eval_poly(g: UnaryPolynomial, x: Element, params: Params) -> Element:
    return eval_term(g.body, {0: x}, params)


def default_triple_pool(params: Params) -> list[tuple[Element, Element, Element]]:
    """All valid ordered triples over the d-constants plus c, canonically
    ordered.  The low-level slice of the (infinite) unary signature."""
    pool_elems = [elements.DConst(k) for k in range(1, params.d_count + 1)]
    pool_elems.append(elements.CConst())
    triples = []
    for p, q, r in itertools.permutations(pool_elems, 3):
        triples.append((p, q, r))
    triples.sort(key=lambda t: tuple(sort_key(e) for e in t))
    return triples


def enumerate_terms(
    num_vars: int,
    max_depth: int,
    triple_pool: Sequence[tuple[Element, Element, Element]],
    params: Params,
    cap: int = DEFAULT_TERM_CAP,
) -> Iterator[Term]:
    """Every constant-free term with variables among x0..x{num_vars-1} and
    depth <= max_depth, each exactly once, in canonical order."""
    if num_vars < 1:
        raise ValueError("need at least one variable")
    emitted = 0

    def bump():
        nonlocal emitted
        emitted += 1
        if emitted > cap:
            raise BudgetExceededError(f"term enumeration exceeded cap of {cap}")

    by_depth: list[list[Term]] = [[Var(i) for i in range(num_vars)]]
    cumulative: list[Term] = list(by_depth[0])
    for t in by_depth[0]:
        bump()
        yield t
    for d in range(1, max_depth + 1):
        prev_cum_len = len(cumulative) - len(by_depth[d - 1])
        layer: list[Term] = []
        for t in by_depth[d - 1]:
            layer.append(UApp(t))
        for (p, q, r) in triple_pool:
            for t in by_depth[d - 1]:
                layer.append(UPQRApp(p, q, r, t))
        # f-applications: children drawn from depth <= d-1 in canonical
        # order, at least one child of exact depth d-1.
        for combo in itertools.product(range(len(cumulative)), repeat=params.n):
            if max(combo) < prev_cum_len:
                continue
            layer.append(FApp(tuple(cumulative[i] for i in combo)))
        for t in layer:
            bump()
            yield t
        by_depth.append(layer)
        cumulative.extend(layer)


def count_terms(
    num_vars: int,
    max_depth: int,
    pool_size: int,
    params: Params,
) -> int:
    """Closed-form companion of enumerate_terms (used as an independent
    completeness check)."""
    exact = [num_vars]
    for d in range(1, max_depth + 1):
        cum = sum(exact)
        cum_prev = cum - exact[-1]
        layer = exact[-1] * (1 + pool_size) + (cum**params.n - cum_prev**params.n)
        exact.append(layer)
    return sum(exact)


def u_power(x: Element, m: int, params: Params) -> Element:
    for _ in range(m):
        x = elements.eval_u(x, params)
    return x


def is_power_of_u_on(
    t: Term,
    samples: Sequence[Assignment],
    max_power: int,
    params: Params,
) -> Optional[tuple[int, int]]:
    """Least (variable index, exponent) such that t evaluates as that power
    of u applied to that variable on every sample; None if no such pair."""
    if not samples:
        raise ValueError("need at least one sample assignment")
    indices = set(samples[0].keys())
    for a in samples[1:]:
        indices &= set(a.keys())
    values = [eval_term(t, a, params) for a in samples]
    for i in sorted(indices):
        for m in range(max_power + 1):
            if all(u_power(a[i], m, params) == v for a, v in zip(samples, values)):
                return (i, m)
    return None


def term_to_text(t: Term) -> str:
    if isinstance(t, Var):
        return f"x{t.idx}"
    if isinstance(t, Const):
        return elements.element_to_text(t.value)
    if isinstance(t, UApp):
        return f"u({term_to_text(t.arg)})"
    if isinstance(t, UPQRApp):
        trip = ";".join(elements.element_to_text(e) for e in (t.p, t.q, t.r))
        return f"upqr{{{trip}}}({term_to_text(t.arg)})"
    return "f(" + ",".join(term_to_text(a) for a in t.args) + ")"
