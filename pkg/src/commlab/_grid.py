"""Vectorized bulk evaluation of terms over a finite element domain.

Elements are interned to integer ids so that term values over a whole
assignment grid become numpy gather operations.  Two output modes:

- id arrays: every value is a real interned id (needed when values are
  inspected, e.g. membership in C);
- equality codes: injective unary wrappers are stripped and a root
  f-application is encoded as a composite integer that is equal for two
  cells exactly when the element values are equal.  This avoids interning
  the (potentially huge) set of top-level f-images when only the equality
  pattern of a cube matters.
"""

from __future__ import annotations

import numpy as np

from . import elements, terms
from .elements import Element, Params
from .errors import BudgetExceededError

F_NODE_CAP = 2 * 10**6


class SymbolicGrid:
    def __init__(self, params: Params, domain: list[Element]):
        self.params = params
        self.domain = list(domain)
        self._ids: dict[Element, int] = {}
        self._elems: list[Element] = []
        for e in self.domain:
            self.intern(e)
        if len(self._elems) != len(self.domain):
            raise ValueError("domain contains duplicates")
        self._u_cache: dict[int, int] = {}
        self._upqr_caches: dict[tuple[Element, Element, Element], dict[int, int]] = {}
        self._f_cache: dict[tuple[int, ...], int] = {}
        n = params.n
        self._a_ids = [self.intern(elements.AGen(i, 0)) for i in range(1, n + 1)]
        self._b_ids = [self.intern(elements.BGen(i, 0)) for i in range(1, n + 1)]
        self._d_ids = [self.intern(elements.DConst(k)) for k in range(1, params.d_count + 1)]

    def intern(self, e: Element) -> int:
        i = self._ids.get(e)
        if i is None:
            i = len(self._elems)
            self._ids[e] = i
            self._elems.append(e)
        return i

    def element(self, i: int) -> Element:
        return self._elems[i]

    def _map_unary(self, cache: dict[int, int], fn, arr: np.ndarray) -> np.ndarray:
        uniq = np.unique(arr)
        out = np.empty(uniq.shape, dtype=np.int64)
        for pos, i in enumerate(uniq):
            i = int(i)
            v = cache.get(i)
            if v is None:
                v = self.intern(fn(self._elems[i]))
                cache[i] = v
            out[pos] = v
        return out[np.searchsorted(uniq, arr)]

    def _var_axis(self, idx: int, m: int) -> np.ndarray:
        d = len(self.domain)
        shape = [1] * m
        shape[idx] = d
        return np.arange(d, dtype=np.int64).reshape(shape)

    def eval_ids(self, t: terms.Term, m: int) -> np.ndarray:
        """Interned ids of t over the m-axis domain grid (broadcast shape)."""
        p = self.params
        if isinstance(t, terms.Var):
            return self._var_axis(t.idx, m)
        if isinstance(t, terms.Const):
            return np.full((1,) * m, self.intern(t.value), dtype=np.int64)
        if isinstance(t, terms.UApp):
            return self._map_unary(
                self._u_cache, lambda e: elements.eval_u(e, p), self.eval_ids(t.arg, m)
            )
        if isinstance(t, terms.UPQRApp):
            cache = self._upqr_caches.setdefault((t.p, t.q, t.r), {})
            return self._map_unary(
                cache,
                lambda e: elements.eval_u_pqr(t.p, t.q, t.r, e, p),
                self.eval_ids(t.arg, m),
            )
        children = np.broadcast_arrays(*(self.eval_ids(a, m) for a in t.args))
        shape = children[0].shape
        flat = np.stack([c.ravel() for c in children], axis=1)
        if flat.shape[0] > F_NODE_CAP:
            raise BudgetExceededError(
                f"f-node grid of {flat.shape[0]} cells exceeds cap {F_NODE_CAP}"
            )
        rows, inverse = np.unique(flat, axis=0, return_inverse=True)
        out_ids = np.empty(rows.shape[0], dtype=np.int64)
        for pos in range(rows.shape[0]):
            key = tuple(int(x) for x in rows[pos])
            v = self._f_cache.get(key)
            if v is None:
                v = self.intern(elements.eval_f([self._elems[i] for i in key], p))
                self._f_cache[key] = v
            out_ids[pos] = v
        return out_ids[inverse].reshape(shape)

    def eval_codes(self, t: terms.Term, m: int) -> np.ndarray:
        """Equality codes of t over the grid: code equality iff value equality."""
        while isinstance(t, (terms.UApp, terms.UPQRApp)):
            t = t.arg  # injective wrappers preserve the equality pattern
        if not isinstance(t, terms.FApp):
            return self.eval_ids(t, m)
        children = [self.eval_ids(a, m) for a in t.args]
        children = np.broadcast_arrays(*children)
        base = len(self._elems)
        code = np.zeros_like(children[0])
        for c in children:
            code = code * base + c
        code = code + base
        in_dmn = np.ones(children[0].shape, dtype=bool)
        bits = []
        for pos, c in enumerate(children):
            is_a = c == self._a_ids[pos]
            is_b = c == self._b_ids[pos]
            in_dmn &= is_a | is_b
            bits.append(is_b)
        if in_dmn.any():
            k = np.zeros(children[0].shape, dtype=np.int64)
            for bit in bits[:-1]:
                k = (k << 1) + bit
            all_b = np.ones(children[0].shape, dtype=bool)
            for bit in bits:
                all_b &= bit
            d_index = np.where(all_b, 2 ** (self.params.n - 1), k)
            d_table = np.array(self._d_ids, dtype=np.int64)
            code = np.where(in_dmn, d_table[d_index], code)
        return code
