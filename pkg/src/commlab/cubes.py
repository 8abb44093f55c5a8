"""m-dimensional term cubes and term-condition witness search.

Vertex convention: writing i-1 in binary as m bits, block j receives the
bit of weight 2^(m-j), i.e. the last block varies fastest.  Consecutive
vertices therefore differ only in block m and the critical edge is the
final pair (r_{2^m - 1}, r_{2^m}).
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import terms as terms_mod
from ._grid import SymbolicGrid
from .elements import Element, Params, element_to_text
from .errors import BudgetExceededError
from .terms import Term, enumerate_terms, eval_term, free_vars, term_to_text

NAIVE_SPACE_CAP = 2 * 10**6
GRID_CELL_CAP = 2 * 10**7


@dataclass(frozen=True)
class Cube:
    dim: int
    vertices: tuple

    def __post_init__(self):
        if len(self.vertices) != 2**self.dim:
            raise ValueError(
                f"a {self.dim}-cube needs {2 ** self.dim} vertices, got {len(self.vertices)}"
            )


@dataclass(frozen=True)
class BlockAssignment:
    """Per block, a pair (p, q) of equal-length element tuples.  Term
    variables map to block positions consecutively: block 1 owns the first
    len(p_1) variable indices, block 2 the next, and so on."""

    blocks: tuple[tuple[tuple[Element, ...], tuple[Element, ...]], ...]

    def __post_init__(self):
        for p, q in self.blocks:
            if len(p) != len(q):
                raise ValueError("p and q tuples of a block must have equal length")

    def assignment(self, bits: Sequence[int]) -> dict[int, Element]:
        out: dict[int, Element] = {}
        var = 0
        for (p, q), bit in zip(self.blocks, bits):
            chosen = q if bit else p
            for e in chosen:
                out[var] = e
                var += 1
        return out


@dataclass(frozen=True)
class TCWitness:
    term: Term
    blocks: BlockAssignment
    cube: Cube
    dim: int

    def to_record(self) -> dict:
        return {
            "term": term_to_text(self.term),
            "blocks": [
                {
                    "p": [element_to_text(e) for e in p],
                    "q": [element_to_text(e) for e in q],
                }
                for p, q in self.blocks.blocks
            ],
            "cube": [element_to_text(v) for v in self.cube.vertices],
            "dim": self.dim,
        }


def vertex_assignment(m: int, i: int) -> tuple[int, ...]:
    """Bit per block for vertex i (1-based); bit 1 selects the q tuple."""
    if not 1 <= i <= 2**m:
        raise IndexError(f"vertex index {i} out of range for dimension {m}")
    return tuple((i - 1) >> (m - j) & 1 for j in range(1, m + 1))


def adjacent_vertices(m: int, i: int) -> set[int]:
    if not 1 <= i <= 2**m:
        raise IndexError(f"vertex index {i} out of range for dimension {m}")
    return {((i - 1) ^ (1 << b)) + 1 for b in range(m)}


def term_cube(t: Term, blocks: BlockAssignment, m: int, params: Params) -> Cube:
    if len(blocks.blocks) != m:
        raise ValueError(f"expected {m} blocks, got {len(blocks.blocks)}")
    verts = []
    for i in range(1, 2**m + 1):
        a = blocks.assignment(vertex_assignment(m, i))
        verts.append(eval_term(t, a, params))
    return Cube(m, tuple(verts))


def is_tc_failure(c: Cube) -> bool:
    v = c.vertices
    half = 2 ** (c.dim - 1)
    for t in range(1, half):
        if v[2 * t - 2] != v[2 * t - 1]:
            return False
    return v[-2] != v[-1]


@dataclass
class SearchStats:
    terms_scanned: int = 0
    assignments_scanned: int = 0


def _uses_all_blocks(t: Term, m: int, block_len: int) -> bool:
    # A witness term must use a variable of every block: a term ignoring
    # block m has an equal critical edge outright, and one ignoring block
    # j < m maps the critical edge onto a matched edge by flipping bit j.
    fv = free_vars(t)
    blocks = {v // block_len for v in fv}
    return len(blocks) == m and max(fv, default=-1) < m * block_len


def _assignment_iter(domain: Sequence[Element], m: int, block_len: int):
    for flat in itertools.product(domain, repeat=2 * m * block_len):
        blocks = []
        for j in range(m):
            base = 2 * j * block_len
            p = flat[base : base + block_len]
            q = flat[base + block_len : base + 2 * block_len]
            blocks.append((p, q))
        yield BlockAssignment(tuple(blocks))


def _scan_term_naive(
    t: Term,
    m: int,
    block_len: int,
    domain: Sequence[Element],
    params: Params,
    stats: SearchStats,
) -> Optional[TCWitness]:
    for blocks in _assignment_iter(domain, m, block_len):
        stats.assignments_scanned += 1
        ok = True
        verts = []
        for i in range(1, 2**m + 1):
            a = blocks.assignment(vertex_assignment(m, i))
            verts.append(eval_term(t, a, params))
            if i % 2 == 0 and i < 2**m and verts[i - 2] != verts[i - 1]:
                ok = False
                break
        if ok and verts[-2] != verts[-1]:
            return TCWitness(t, blocks, Cube(m, tuple(verts)), m)
    return None


def _grid_term_has_witness(grid: SymbolicGrid, t: Term, m: int) -> bool:
    d = len(grid.domain)
    codes = np.broadcast_to(grid.eval_codes(t, m), (d,) * m)
    if m == 2:
        eq = codes[:, :, None] == codes[:, None, :]
        any_eq = eq.any(axis=0)
        any_neq = (~eq).any(axis=0)
        return bool((any_eq & any_neq).any())
    if m == 3:
        return _grid_dim3_has_witness(codes, d)
    raise BudgetExceededError(f"grid search strategy not available for dimension {m}")


def _canonical_labels(row: np.ndarray) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    out = []
    for v in row.tolist():
        lab = seen.get(v)
        if lab is None:
            lab = len(seen)
            seen[v] = lab
        out.append(lab)
    return tuple(out)


def _grid_dim3_has_witness(codes: np.ndarray, d: int) -> bool:
    # Cells are (x1, x2); the fiber of a cell is its value row over x3.
    # H[cell] for a block-3 pair (p3, q3) is "fiber equal at p3 and q3";
    # a witness exists iff some H contains the 2x2 pattern [[1,1],[1,0]].
    fibers = codes.reshape(d * d, d)
    srt = np.sort(fibers, axis=1)
    injective = (np.diff(srt, axis=1) != 0).all(axis=1)
    constant = srt[:, 0] == srt[:, -1]
    other = ~injective & ~constant

    # Signature 0: injective fiber (equal only on the diagonal).
    # Signature 1: constant fiber (always equal).  Further signatures are
    # the canonical partitions of the remaining fibers.
    sig_ids = np.where(injective, 0, 1)
    partitions: list[tuple[int, ...]] = []
    part_index: dict[tuple[int, ...], int] = {}
    for cell in np.nonzero(other)[0]:
        lab = _canonical_labels(fibers[cell])
        sid = part_index.get(lab)
        if sid is None:
            sid = 2 + len(partitions)
            part_index[lab] = sid
            partitions.append(lab)
        sig_ids[cell] = sid

    # Group x3 values behaving identically across all partition signatures.
    joint: dict[tuple[int, ...], list[int]] = {}
    for x3 in range(d):
        key = tuple(lab[x3] for lab in partitions)
        joint.setdefault(key, []).append(x3)
    classes = list(joint.values())

    n_sigs = 2 + len(partitions)
    sig_ids_flat = sig_ids
    for ci in range(len(classes)):
        for cj in range(len(classes)):
            if ci == cj and len(classes[ci]) < 2:
                continue  # needs p3 != q3
            p3 = classes[ci][0]
            q3 = classes[cj][0] if ci != cj else classes[cj][1]
            b = np.zeros(n_sigs, dtype=bool)
            b[0] = False  # injective fibers never equal off-diagonal
            b[1] = True
            for s, lab in enumerate(partitions):
                b[2 + s] = lab[p3] == lab[q3]
            h = b[sig_ids_flat].reshape(d, d)
            if h.all() or not h.any():
                continue
            hf = h.astype(np.float32)
            common = (hf @ hf.T) > 0.5
            excl = (hf @ (1.0 - hf).T) > 0.5
            if bool((common & excl).any()):
                return True
    return False


def _full_space(domain_size: int, m: int, block_len: int) -> int:
    return domain_size ** (2 * m * block_len)


def _scan_chunk(
    chunk: list[tuple[int, Term]],
    m: int,
    block_len: int,
    domain: list[Element],
    params: Params,
    strategy: str,
) -> tuple[Optional[int], Optional[TCWitness], int, int]:
    stats = SearchStats()
    grid = SymbolicGrid(params, domain) if strategy == "grid" else None
    space = _full_space(len(domain), m, block_len)
    for idx, t in chunk:
        stats.terms_scanned += 1
        if not _uses_all_blocks(t, m, block_len):
            stats.assignments_scanned += space
            continue
        if grid is not None:
            if _grid_term_has_witness(grid, t, m):
                w = _scan_term_naive(t, m, block_len, domain, params, stats)
                assert w is not None, "grid strategy claimed a witness the scan cannot find"
                return idx, w, stats.terms_scanned, stats.assignments_scanned
            stats.assignments_scanned += space
        else:
            w = _scan_term_naive(t, m, block_len, domain, params, stats)
            if w is not None:
                return idx, w, stats.terms_scanned, stats.assignments_scanned
    return None, None, stats.terms_scanned, stats.assignments_scanned


def search_tc_witness(
    m: int,
    max_depth: int,
    block_len: int,
    domain: Sequence[Element],
    triple_pool: Sequence[tuple[Element, Element, Element]],
    params: Params,
    term_cap: int = terms_mod.DEFAULT_TERM_CAP,
    stats: Optional[SearchStats] = None,
    jobs: int = 1,
) -> Optional[TCWitness]:
    """First (canonical term order, then lexicographic block assignment)
    term-condition failure witness in the bounded space, or None after
    exhausting it."""
    if m < 1 or block_len < 1:
        raise ValueError("dimension and block length must be >= 1")
    if not domain:
        raise ValueError("domain must be nonempty")
    domain = list(domain)
    num_vars = m * block_len
    space = _full_space(len(domain), m, block_len)
    if space <= NAIVE_SPACE_CAP:
        strategy = "naive"
    elif block_len == 1 and m in (2, 3) and len(domain) ** m <= GRID_CELL_CAP:
        strategy = "grid"
    else:
        raise BudgetExceededError(
            f"assignment space of {space} per term is beyond the configured strategies"
        )
    term_list = list(enumerate_terms(num_vars, max_depth, triple_pool, params, cap=term_cap))
    indexed = list(enumerate(term_list))
    if stats is None:
        stats = SearchStats()

    if jobs <= 1 or len(indexed) < 2 * jobs:
        chunks = [indexed]
    else:
        size = (len(indexed) + jobs - 1) // jobs
        chunks = [indexed[i : i + size] for i in range(0, len(indexed), size)]

    results = []
    if len(chunks) == 1:
        results.append(_scan_chunk(chunks[0], m, block_len, domain, params, strategy))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_scan_chunk, ch, m, block_len, domain, params, strategy)
                for ch in chunks
            ]
            results = [f.result() for f in futures]

    # Merge in canonical order: counts accumulate up to and including the
    # first chunk that found a witness, so totals match a sequential run.
    for idx, witness, terms_scanned, assignments in results:
        stats.terms_scanned += terms_scanned
        stats.assignments_scanned += assignments
        if witness is not None:
            return witness
    return None
