"""Bounded verification suite for the constructed algebra.

Each check exhausts a finite, canonically ordered space and reports pass
or fail with a replayable counterexample.  Passing means "consistent with
the claimed property at these bounds", never a proof.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import cubes as cubes_mod
from . import elements as el
from . import terms as terms_mod
from ._grid import SymbolicGrid
from .cubes import (
    BlockAssignment,
    Cube,
    SearchStats,
    TCWitness,
    is_tc_failure,
    search_tc_witness,
    term_cube,
)
from .elements import Element, Params, element_to_text, sort_key
from .terms import (
    FApp,
    Term,
    UApp,
    UnaryPolynomial,
    UPQRApp,
    Var,
    enumerate_terms,
    eval_poly,
    term_to_text,
)


@dataclass
class VerificationReport:
    name: str
    params: dict
    outcome: str  # "pass" | "fail"
    counterexample: Optional[dict] = None
    counts: dict = field(default_factory=dict)
    millis: int = 0

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"

    def to_record(self, include_timing: bool = True) -> dict:
        rec = {
            "name": self.name,
            "params": self.params,
            "outcome": self.outcome,
            "counterexample": self.counterexample,
            "counts": self.counts,
        }
        if include_timing:
            rec["millis"] = self.millis
        return rec

    def to_json_line(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_record(include_timing), sort_keys=True)


def _timed(fn: Callable[[], VerificationReport]) -> VerificationReport:
    start = time.perf_counter()
    report = fn()
    report.millis = int((time.perf_counter() - start) * 1000)
    return report


def check_nfequal(params: Params, domain: Sequence[Element]) -> VerificationReport:
    """Distinct argument tuples with equal f-values must both lie in the
    base table (f is injective everywhere else)."""

    def run() -> VerificationReport:
        by_value: dict[Element, list[tuple[Element, ...]]] = {}
        scanned = 0
        for args in itertools.product(domain, repeat=params.n):
            scanned += 1
            by_value.setdefault(el.eval_f(args, params), []).append(args)
        collisions = 0
        for value, tuples in by_value.items():
            if len(tuples) < 2:
                continue
            collisions += 1
            for args in tuples:
                if not el.in_dmn_f0(args, params):
                    return VerificationReport(
                        "nfequal",
                        {"n": params.n, "domain_size": len(domain)},
                        "fail",
                        counterexample={
                            "value": element_to_text(value),
                            "tuples": [
                                [element_to_text(e) for e in t] for t in tuples
                            ],
                        },
                        counts={"tuples_scanned": scanned},
                    )
        return VerificationReport(
            "nfequal",
            {"n": params.n, "domain_size": len(domain)},
            "pass",
            counts={"tuples_scanned": scanned, "collision_values": collisions},
        )

    return _timed(run)


def _corner_violation(
    grid: SymbolicGrid, t: Term, m: int
) -> Optional[tuple[int, ...]]:
    """First assignment (domain indices p1,q1,...,pm,qm) where vertex 1
    equals all adjacent vertices but the cube is not constant."""
    d = len(grid.domain)
    codes = np.broadcast_to(grid.eval_codes(t, m), (d,) * m)
    axes = []
    for k in range(2 * m):
        shape = [1] * (2 * m)
        shape[k] = d
        axes.append(np.arange(d).reshape(shape))
    verts = []
    for i in range(2**m):
        sel = tuple(
            axes[2 * j + ((i >> (m - 1 - j)) & 1)] for j in range(m)
        )
        verts.append(codes[sel])
    v0 = verts[0]
    premise = np.ones(v0.shape, dtype=bool)
    for j in range(m):
        premise = premise & (v0 == verts[1 << (m - 1 - j)])
    nonconst = np.zeros(v0.shape, dtype=bool)
    for v in verts[1:]:
        nonconst = nonconst | (v != v0)
    viol = premise & nonconst
    if not viol.any():
        return None
    flat = int(np.argmax(viol.reshape(-1)))
    return tuple(int(x) for x in np.unravel_index(flat, viol.shape))


def check_corner_lemma(
    params: Params,
    m: int,
    domain: Sequence[Element],
    max_depth: int,
    triple_pool: Sequence[tuple[Element, Element, Element]],
) -> VerificationReport:
    """If the first cube vertex equals all its adjacent vertices, the whole
    cube must be constant (block length 1)."""

    def run() -> VerificationReport:
        grid = SymbolicGrid(params, list(domain))
        d = len(domain)
        terms_scanned = 0
        assignments = 0
        for t in enumerate_terms(m, max_depth, triple_pool, params):
            terms_scanned += 1
            assignments += d ** (2 * m)
            hit = _corner_violation(grid, t, m)
            if hit is not None:
                blocks = tuple(
                    ((domain[hit[2 * j]],), (domain[hit[2 * j + 1]],)) for j in range(m)
                )
                ba = BlockAssignment(blocks)
                cube = term_cube(t, ba, m, params)
                return VerificationReport(
                    "corner_lemma",
                    {"n": params.n, "m": m, "domain_size": d, "max_depth": max_depth},
                    "fail",
                    counterexample={
                        "term": term_to_text(t),
                        "blocks": [
                            {
                                "p": [element_to_text(e) for e in p],
                                "q": [element_to_text(e) for e in q],
                            }
                            for p, q in blocks
                        ],
                        "cube": [element_to_text(v) for v in cube.vertices],
                    },
                    counts={
                        "terms_scanned": terms_scanned,
                        "assignments_scanned": assignments,
                    },
                )
        return VerificationReport(
            "corner_lemma",
            {"n": params.n, "m": m, "domain_size": d, "max_depth": max_depth},
            "pass",
            counts={"terms_scanned": terms_scanned, "assignments_scanned": assignments},
        )

    return _timed(run)


def check_term_lemma(
    params: Params,
    domain: Sequence[Element],
    max_depth: int,
    triple_pool: Sequence[tuple[Element, Element, Element]],
    num_vars: int = 2,
) -> VerificationReport:
    """A term taking two distinct values inside the order-(2n+1) cycle's
    moving letters must act as a power of u on one of its variables."""

    def run() -> VerificationReport:
        grid = SymbolicGrid(params, list(domain))
        d = len(domain)
        n = params.n
        c_ids = set()
        for i in range(1, n + 1):
            c_ids.add(grid.intern(el.AGen(i, 0)))
            c_ids.add(grid.intern(el.BGen(i, 0)))
        c_id_arr = np.array(sorted(c_ids), dtype=np.int64)
        max_power = 2 * n + 1
        # u^k applied to every domain element, as id vectors
        powers = []
        cur = list(domain)
        for _ in range(max_power + 1):
            powers.append(np.array([grid.intern(e) for e in cur], dtype=np.int64))
            cur = [el.eval_u(e, params) for e in cur]
        terms_scanned = 0
        checked = 0
        for t in enumerate_terms(num_vars, max_depth, triple_pool, params):
            terms_scanned += 1
            ids = np.broadcast_to(grid.eval_ids(t, num_vars), (d,) * num_vars)
            in_c = np.isin(ids, c_id_arr)
            if not in_c.any():
                continue
            c_values = np.unique(ids[in_c])
            if len(c_values) < 2:
                continue
            checked += 1
            ok = False
            for i in range(num_vars):
                shape = [1] * num_vars
                shape[i] = d
                for k in range(max_power + 1):
                    expected = powers[k].reshape(shape)
                    if bool((ids == expected).all()):
                        ok = True
                        break
                if ok:
                    break
            if not ok:
                cells = np.argwhere(in_c)
                first = cells[0]
                second = None
                v0 = ids[tuple(first)]
                for cell in cells[1:]:
                    if ids[tuple(cell)] != v0:
                        second = cell
                        break
                def cell_assignment(cell):
                    return {
                        f"x{i}": element_to_text(domain[int(cell[i])])
                        for i in range(num_vars)
                    }
                return VerificationReport(
                    "term_lemma",
                    {"n": n, "domain_size": d, "max_depth": max_depth, "num_vars": num_vars},
                    "fail",
                    counterexample={
                        "term": term_to_text(t),
                        "assignment_a": cell_assignment(first),
                        "assignment_b": cell_assignment(second),
                    },
                    counts={"terms_scanned": terms_scanned, "premise_terms": checked},
                )
        return VerificationReport(
            "term_lemma",
            {"n": n, "domain_size": d, "max_depth": max_depth, "num_vars": num_vars},
            "pass",
            counts={"terms_scanned": terms_scanned, "premise_terms": checked},
        )

    return _timed(run)


def expected_top_cube(params: Params) -> tuple[Element, ...]:
    """(d1, d1, d2, d2, ..., d_{2^(n-1)-1} x2, d_{2^(n-1)}, d_{2^(n-1)+1})."""
    half = 2 ** (params.n - 1)
    verts: list[Element] = []
    for t in range(1, half):
        verts.extend([el.DConst(t), el.DConst(t)])
    verts.extend([el.DConst(half), el.DConst(half + 1)])
    return tuple(verts)


def top_commutator_blocks(params: Params) -> BlockAssignment:
    return BlockAssignment(
        tuple(((el.AGen(i, 0),), (el.BGen(i, 0),)) for i in range(1, params.n + 1))
    )


def verify_top_commutator(params: Params) -> VerificationReport:
    """The n-cube of f on the (a_i)/(b_i) blocks matches the base table
    pattern exactly and fails the term condition."""

    def run() -> VerificationReport:
        n = params.n
        t = FApp(tuple(Var(i) for i in range(n)))
        cube = term_cube(t, top_commutator_blocks(params), n, params)
        expected = expected_top_cube(params)
        ok = cube.vertices == expected and is_tc_failure(cube)
        rec = {
            "term": term_to_text(t),
            "cube": [element_to_text(v) for v in cube.vertices],
            "expected": [element_to_text(v) for v in expected],
            "is_tc_failure": is_tc_failure(cube),
        }
        return VerificationReport(
            "top_commutator",
            {"n": n},
            "pass" if ok else "fail",
            counterexample=None if ok else rec,
            counts={"vertices": len(cube.vertices)},
        )

    return _timed(run)


def search_np1_failure(
    params: Params,
    domain: Sequence[Element],
    max_depth: int,
    block_len: int,
    triple_pool: Sequence[tuple[Element, Element, Element]],
    jobs: int = 1,
) -> VerificationReport:
    """Exhaustive (n+1)-dimensional witness search; pass iff empty."""

    def run() -> VerificationReport:
        stats = SearchStats()
        witness = search_tc_witness(
            params.n + 1, max_depth, block_len, domain, triple_pool, params,
            stats=stats, jobs=jobs,
        )
        report_params = {
            "n": params.n,
            "dimension": params.n + 1,
            "domain_size": len(domain),
            "max_depth": max_depth,
            "block_len": block_len,
            "triple_pool_size": len(triple_pool),
        }
        counts = {
            "terms_scanned": stats.terms_scanned,
            "assignments_scanned": stats.assignments_scanned,
        }
        if witness is None:
            return VerificationReport("np1_no_failure", report_params, "pass", counts=counts)
        return VerificationReport(
            "np1_no_failure", report_params, "fail",
            counterexample=witness.to_record(), counts=counts,
        )

    return _timed(run)


def search_control(
    params: Params,
    domain: Sequence[Element],
    max_depth: int,
    block_len: int,
    triple_pool: Sequence[tuple[Element, Element, Element]],
    jobs: int = 1,
) -> VerificationReport:
    """Control run at dimension n on the same space: the searcher must find
    a witness there, or the negative result above means nothing."""

    def run() -> VerificationReport:
        stats = SearchStats()
        witness = search_tc_witness(
            params.n, max_depth, block_len, domain, triple_pool, params,
            stats=stats, jobs=jobs,
        )
        report_params = {
            "n": params.n,
            "dimension": params.n,
            "domain_size": len(domain),
            "max_depth": max_depth,
            "block_len": block_len,
            "triple_pool_size": len(triple_pool),
        }
        counts = {
            "terms_scanned": stats.terms_scanned,
            "assignments_scanned": stats.assignments_scanned,
        }
        if witness is None:
            return VerificationReport("control_search", report_params, "fail", counts=counts)
        rec = witness.to_record()
        return VerificationReport(
            "control_search", report_params, "pass",
            counterexample=None, counts={**counts, "witness": json.dumps(rec, sort_keys=True)},
        )

    return _timed(run)


# ---------------------------------------------------------------------------
# Simplicity chains


@dataclass(frozen=True)
class ChainStep:
    poly: UnaryPolynomial
    input_index: int
    output_pair: tuple[Element, Element]


@dataclass(frozen=True)
class MalcevChain:
    source: tuple[Element, Element]
    steps: tuple[ChainStep, ...]
    target: tuple[Element, Element]


def _is_in_b(e: Element) -> bool:
    return isinstance(e, (el.AGen, el.BGen))


def _triple_candidates(params: Params) -> list[Element]:
    """Pairwise distinct elements outside the generator block, canonically
    ordered, with two tagged elements appended so that at least three
    remain after excluding the pair being collapsed."""
    out: list[Element] = [el.DConst(k) for k in range(1, params.d_count + 1)]
    out.append(el.CConst())
    out.append(el.Tagged((el.CConst(),) * params.n, 0))
    out.append(el.Tagged((el.DConst(1),) * params.n, 0))
    return out


class _ChainBuilder:
    def __init__(self, params: Params, p: Element, q: Element):
        self.params = params
        self.steps: list[ChainStep] = []
        self.established: list[tuple[Element, Element]] = [(p, q)]

    def add(self, poly: UnaryPolynomial, idx: int) -> int:
        x, y = self.established[idx]
        out = (eval_poly(poly, x, self.params), eval_poly(poly, y, self.params))
        self.steps.append(ChainStep(poly, idx, out))
        self.established.append(out)
        return len(self.established) - 1


def simplicity_chain(params: Params, p: Element, q: Element, r: Element) -> MalcevChain:
    """Mal'cev chain deriving (q', r) from a collapsed pair (p, q), where
    q' is q pushed out of the generator block if necessary."""
    if p == q:
        raise ValueError("source pair must be distinct")
    n = params.n
    b = _ChainBuilder(params, p, q)

    if _is_in_b(p) or _is_in_b(q):
        diag_f = UnaryPolynomial(FApp((Var(0),) * n))
        base_idx = b.add(diag_f, 0)
    else:
        base_idx = 0
    p2, q2 = b.established[base_idx]
    target = (q2, r)

    def finish() -> MalcevChain:
        return MalcevChain((p, q), tuple(b.steps), target)

    if r == p2 or r == q2:
        return finish()

    if not _is_in_b(r):
        b.add(UnaryPolynomial(UPQRApp(p2, q2, r, Var(0))), base_idx)
        return finish()

    # r is a generator a(i,j) or b(i,j): first reach the j = 0 letter by
    # walking the u-cycle from c, then shift the second index if needed.
    is_a = isinstance(r, el.AGen)
    i = r.i
    k = 2 * i - 1 if is_a else 2 * i

    if q2 != el.CConst():
        if p2 == el.CConst():
            pair_with_c = base_idx
        else:
            pair_with_c = b.add(
                UnaryPolynomial(UPQRApp(p2, q2, el.CConst(), Var(0))), base_idx
            )
    else:
        pair_with_c = base_idx  # (p2, c): p2 is the u-fixed component

    u_poly = UnaryPolynomial(UApp(Var(0)))
    idx = pair_with_c
    for _ in range(k):
        idx = b.add(u_poly, idx)

    if r.j > 0:
        pool = [
            e for e in _triple_candidates(params) if e != p2 and e != q2
        ]
        t1, t2, t3 = sorted(pool, key=sort_key)[:3]
        shift = UnaryPolynomial(UPQRApp(t1, t2, t3, Var(0)))
        for _ in range(r.j):
            idx = b.add(shift, idx)
    return finish()


def verify_chain(chain: MalcevChain, params: Params) -> bool:
    """Re-execute every step and confirm the symmetric-transitive closure
    of the recorded pairs connects the target components."""
    established = [chain.source]
    for step in chain.steps:
        if not 0 <= step.input_index < len(established):
            return False
        x, y = established[step.input_index]
        out = (eval_poly(step.poly, x, params), eval_poly(step.poly, y, params))
        if out != step.output_pair:
            return False
        established.append(out)
    index: dict[Element, int] = {}

    def node(e: Element) -> int:
        return index.setdefault(e, len(index))

    pairs = [(node(x), node(y)) for x, y in established]
    tx, ty = (node(chain.target[0]), node(chain.target[1]))
    parent = list(range(len(index)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, c in pairs:
        parent[find(a)] = find(c)
    return find(tx) == find(ty)


def run_chain_roundtrips(
    params: Params,
    domain: Sequence[Element],
    count: int = 50,
    seed: int = 0,
) -> VerificationReport:
    """Seeded random (p, q, r) triples: every emitted chain must verify,
    and one deliberately corrupted chain must be rejected."""

    def run() -> VerificationReport:
        rng = random.Random(seed)
        checked = 0
        attempts = 0
        last_good: Optional[MalcevChain] = None
        while checked < count:
            attempts += 1
            if attempts > 100 * count:
                raise RuntimeError("failed to sample enough distinct pairs")
            p = rng.choice(domain)
            q = rng.choice(domain)
            r = rng.choice(domain)
            if p == q:
                continue
            chain = simplicity_chain(params, p, q, r)
            if not verify_chain(chain, params):
                return VerificationReport(
                    "simplicity_chains",
                    {"n": params.n, "count": count, "seed": seed},
                    "fail",
                    counterexample={
                        "p": element_to_text(p),
                        "q": element_to_text(q),
                        "r": element_to_text(r),
                    },
                    counts={"verified": checked},
                )
            last_good = chain
            checked += 1
        # mutation control: corrupting a step must be caught
        mutation_ok = True
        if last_good is not None and last_good.steps:
            step = last_good.steps[-1]
            bad_out = (step.output_pair[0], el.DConst(1))
            if bad_out == step.output_pair:
                bad_out = (step.output_pair[0], el.DConst(2))
            bad = MalcevChain(
                last_good.source,
                last_good.steps[:-1] + (ChainStep(step.poly, step.input_index, bad_out),),
                last_good.target,
            )
            mutation_ok = not verify_chain(bad, params)
        return VerificationReport(
            "simplicity_chains",
            {"n": params.n, "count": count, "seed": seed},
            "pass" if mutation_ok else "fail",
            counterexample=None if mutation_ok else {"mutation": "accepted"},
            counts={"verified": checked, "mutation_rejected": int(mutation_ok)},
        )

    return _timed(run)
