"""Brute-force oracles used to validate the finite engine.

Everything here is deliberately naive: congruence generation by filtering
all partitions of the universe, and commutators by enumerating bounded-depth
term-operation tables and applying the term condition definition directly.
Only feasible for tiny algebras, which is the point.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Optional, Sequence

import numpy as np

from commlab.finengine import Congruence, FiniteAlgebra


def all_partitions(s: int) -> list[tuple[int, ...]]:
    """Class maps of all partitions of 0..s-1 in restricted-growth form."""
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], used: int):
        if len(prefix) == s:
            out.append(tuple(prefix))
            return
        for c in range(used + 1):
            extend(prefix + [c], max(used, c + 1))

    extend([], 0)
    return out


def _compatible(alg: FiniteAlgebra, cm: Sequence[int]) -> bool:
    for op in alg.operations:
        if op.arity == 0:
            continue
        for args in itertools.product(range(alg.size), repeat=op.arity):
            v = alg.apply(op, args)
            for pos in range(op.arity):
                for y in range(alg.size):
                    if cm[y] != cm[args[pos]]:
                        continue
                    alt = args[:pos] + (y,) + args[pos + 1 :]
                    if cm[alg.apply(op, alt)] != cm[v]:
                        return False
    return True


def _contains(cm: Sequence[int], pairs: Iterable[tuple[int, int]]) -> bool:
    return all(cm[a] == cm[b] for a, b in pairs)


def _refines(fine: Sequence[int], coarse: Sequence[int]) -> bool:
    rep: dict[int, int] = {}
    for f, c in zip(fine, coarse):
        if rep.setdefault(f, c) != c:
            return False
    return True


def _to_congruence(size: int, cm: Sequence[int]) -> Congruence:
    groups: dict[int, list[int]] = {}
    for x, c in enumerate(cm):
        groups.setdefault(c, []).append(x)
    blocks = sorted((tuple(sorted(g)) for g in groups.values()), key=lambda b: b[0])
    return Congruence(size, tuple(blocks))


def oracle_congruences(alg: FiniteAlgebra) -> list[tuple[int, ...]]:
    return [cm for cm in all_partitions(alg.size) if _compatible(alg, cm)]


def oracle_cg(alg: FiniteAlgebra, pairs: Sequence[tuple[int, int]]) -> Congruence:
    """Least compatible partition containing the pairs, by filtering all
    partitions of the universe."""
    candidates = [
        cm for cm in oracle_congruences(alg) if _contains(cm, pairs)
    ]
    # the least candidate must refine every other one
    best = None
    for cm in candidates:
        if all(_refines(cm, other) for other in candidates):
            best = cm
            break
    assert best is not None, "congruence lattice not closed under meet?"
    return _to_congruence(alg.size, best)


def term_tables(
    alg: FiniteAlgebra, num_vars: int, depth: int, cap: int = 20000
) -> Optional[np.ndarray]:
    """All distinct term-operation tables on num_vars variables built to the
    given composition depth, as an array of shape (k, size**num_vars).
    Returns None if the cap is exceeded."""
    s = alg.size
    cells = s**num_vars
    grids = np.indices((s,) * num_vars).reshape(num_vars, cells)
    funcs = [grids[v].astype(np.int64) for v in range(num_vars)]

    # dedup by scalar base-s codes when the whole table fits in an int64,
    # by bytes otherwise
    use_codes = cells * np.log2(s) <= 62
    pw = s ** np.arange(cells - 1, -1, -1, dtype=np.int64) if use_codes else None
    if use_codes:
        known = np.unique(np.stack(funcs) @ pw)
    else:
        seen = {f.tobytes() for f in funcs}

    def absorb(cand: np.ndarray, new: list[np.ndarray]) -> bool:
        nonlocal known
        if use_codes:
            codes, first = np.unique(cand @ pw, return_index=True)
            fresh = ~np.isin(codes, known, assume_unique=True)
            if fresh.any():
                known = np.union1d(known, codes[fresh])
                new.extend(np.copy(t) for t in cand[first[fresh]])
            return len(known) <= cap
        for t in cand:
            b = t.tobytes()
            if b not in seen:
                seen.add(b)
                new.append(t.copy())
                if len(seen) > cap:
                    return False
        return True

    last_start = 0
    for _ in range(depth):
        prev = np.stack(funcs)
        k = len(funcs)
        new: list[np.ndarray] = []
        for op in alg.operations:
            if op.arity == 0:
                cand = np.full(cells, op.table[0], dtype=np.int64)[None, :]
                if not absorb(cand, new):
                    return None
            elif op.arity == 1:
                table = np.array(op.table, dtype=np.int64)
                if not absorb(table[prev[last_start:]], new):
                    return None
            else:
                table = np.array(op.table, dtype=np.int64)
                chunk = max(1, 2**22 // (k * cells))
                for lo in range(0, k, chunk):
                    rows = prev[lo : lo + chunk]
                    idx = rows[:, None, :] * s + prev[None, :, :]
                    if lo + chunk <= last_start:
                        # old-vs-old pairs contribute nothing new
                        idx = idx[:, last_start:]
                    if not absorb(table[idx.reshape(-1, cells)], new):
                        return None
        if not new:
            break
        last_start = len(funcs)
        funcs.extend(new)
    return np.stack(funcs)


def oracle_higher_commutator(
    alg: FiniteAlgebra,
    m: int = 2,
    depth: int = 4,
    block_vars: int = 2,
    cap: int = 20000,
) -> Optional[Congruence]:
    """Least congruence closed under the forcing rule of the m-dimensional
    term condition, scanning all bounded-depth term tables directly.

    Returns None when the term-table cap is exceeded.
    """
    s = alg.size
    num_vars = m * block_vars
    tables = term_tables(alg, num_vars, depth, cap=cap)
    if tables is None:
        return None
    # vertex index tensors over the assignment space: each variable gets an
    # independent (p, q) pair, so the space has 2 * num_vars axes of size s
    shape = (s,) * (2 * num_vars)
    vertex_cells = []
    for bits in itertools.product((0, 1), repeat=m):
        axes = []
        for v in range(num_vars):
            sel = 2 * v + bits[v // block_vars]
            ax_shape = [1] * (2 * num_vars)
            ax_shape[sel] = s
            axes.append(np.arange(s).reshape(ax_shape))
        flat = np.zeros((1,) * (2 * num_vars), dtype=np.int64)
        for ax in axes:
            flat = flat * s + ax
        vertex_cells.append(np.broadcast_to(flat, shape).reshape(-1))
    cells = np.stack(vertex_cells)  # (2**m, s**(2*num_vars))

    pairs: set[tuple[int, int]] = set()
    delta = Congruence.identity(s)
    while True:
        cm = np.array(delta.class_map(), dtype=np.int64)
        forced: set[tuple[int, int]] = set()
        chunk = max(1, 2**22 // cells.size)
        for lo in range(0, len(tables), chunk):
            verts = tables[lo : lo + chunk][:, cells]  # (chunk, 2**m, assignments)
            classes = cm[verts]
            matched = np.ones(verts.shape[::2], dtype=bool)
            for i in range(1, 2 ** (m - 1)):
                matched &= classes[:, 2 * i - 2] == classes[:, 2 * i - 1]
            bad = matched & (classes[:, -2] != classes[:, -1])
            if bad.any():
                codes = np.unique(verts[:, -2][bad] * s + verts[:, -1][bad])
                forced.update((int(v) // s, int(v) % s) for v in codes)
        if not forced - pairs:
            return delta
        pairs |= forced
        delta = oracle_cg(alg, sorted(pairs))


def oracle_commutator_m2(alg: FiniteAlgebra) -> Congruence:
    """Tiered m = 2 oracle: two variables per block when the table codes
    stay small, one variable per block otherwise."""
    result = None
    if alg.size == 2:
        result = oracle_higher_commutator(alg, 2, block_vars=2, cap=20000)
    if result is None:
        result = oracle_higher_commutator(alg, 2, block_vars=1, cap=30000)
    assert result is not None, "one-variable-per-block tables exceeded the cap"
    return result


def random_algebra(rng: random.Random) -> FiniteAlgebra:
    """Seeded random algebra: size 2 or 3, one or two operations of arity
    one or two, uniform tables."""
    s = rng.choice((2, 3))
    ops = []
    for i in range(rng.choice((1, 2))):
        arity = rng.choice((1, 2))
        table = [rng.randrange(s) for _ in range(s**arity)]
        ops.append((f"g{i}", arity, table))
    return FiniteAlgebra.from_tables(s, ops)
