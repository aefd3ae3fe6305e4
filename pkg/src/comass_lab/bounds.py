"""Best-known bounds on the squared norm-ratio constants ``C²_{n,p}``.

Each cell stores an exact rational upper bound on ``C²_{n,p}`` (and the exact
value when known). Working with squares keeps every known value rational.
:func:`build_table` iterates the bounding rules to a fixed point; the
numerical :func:`lower_bound_search` approaches the same constants from below.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping

import numpy as np
from scipy.optimize import linprog

from .comass import OptimizerConfig, _ascend, _initial_frames, comass_estimate, plucker_coordinates
from .exterior import Covector, euclidean_norm, multi_indices

__all__ = [
    "BoundCell",
    "BoundTable",
    "SearchConfig",
    "SearchResult",
    "exact_registry",
    "pascal_rule",
    "k_rule",
    "build_table",
    "lower_bound_search",
]

MAX_PASSES = 1000
IMPROVE_TOL = Fraction(1, 10**12)

# exact C² values beyond the degree-1 and degree-2 families
_SPORADIC = {(6, 3): 4, (7, 3): 7, (7, 4): 7, (8, 4): 14}


def _check_cell(n: int, p: int):
    if n < 2 or not 1 <= p <= n - 1:
        raise ValueError(f"no table cell for (n={n}, p={p}); need n >= 2 and 1 <= p <= n-1")


def exact_registry(n: int, p: int) -> Fraction | None:
    """Known exact value of ``C²_{n,p}``, or None."""
    _check_cell(n, p)
    if p in (1, n - 1):
        return Fraction(1)
    if p in (2, n - 2):
        return Fraction(n // 2)
    if (n, p) in _SPORADIC:
        return Fraction(_SPORADIC[(n, p)])
    return None


@dataclass
class BoundCell:
    n: int
    p: int
    upper: Fraction
    exact: Fraction | None = None
    provenance: list[str] = field(default_factory=list)

    @property
    def upper_float(self) -> float:
        return float(self.upper)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "exact": None if self.exact is None else str(self.exact),
            "upper": str(self.upper),
            "upper_float": float(self.upper),
            "provenance": list(self.provenance),
        }

    def label(self) -> str:
        if self.exact is not None:
            return f"exact:{self.exact}"
        return f"≤{self.upper} ({'+'.join(self.provenance)})"


class BoundTable(Mapping):
    """Mapping ``(n, p) -> BoundCell`` for ``2 <= n <= n_max``, ``1 <= p <= n-1``."""

    def __init__(self, cells: dict, n_max: int, passes: int = 0):
        self._cells = cells
        self.n_max = n_max
        self.passes = passes

    def __getitem__(self, key) -> BoundCell:
        return self._cells[tuple(key)]

    def __iter__(self):
        return iter(self._cells)

    def __len__(self):
        return len(self._cells)

    def upper(self, n: int, p: int) -> Fraction:
        _check_cell(n, p)
        if n > self.n_max:
            raise KeyError(f"row {n} beyond n_max={self.n_max}")
        return self._cells[(n, p)].upper

    def row(self, n: int) -> list[BoundCell]:
        return [self._cells[(n, p)] for p in range(1, n)]

    def to_dict(self) -> dict:
        return {"n_max": self.n_max, "cells": [c.to_dict() for c in self._cells.values()]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n"] + [f"p={p}" for p in range(1, self.n_max)])
        for n in range(2, self.n_max + 1):
            writer.writerow([n] + [c.label() for c in self.row(n)])
        return buf.getvalue()


def pascal_rule(row_above, n: int, p: int) -> Fraction | None:
    """``upper(n-1, p-1) + upper(n-1, p)``; None when ``p`` is a boundary degree.

    ``row_above`` is either a row list indexed from ``p = 1`` or a table.
    """
    _check_cell(n, p)
    if not 1 < p < n - 1:
        return None
    if isinstance(row_above, Mapping):
        return row_above[(n - 1, p - 1)].upper + row_above[(n - 1, p)].upper
    return row_above[p - 2].upper + row_above[p - 1].upper


def k_rule(cells, n: int, p: int, k: int) -> Fraction:
    """``binom(n, p-k) / binom(p, k) * upper(n, k)``."""
    if not 1 <= k < p < n:
        raise ValueError(f"k-rule needs 1 <= k < p < n, got n={n}, p={p}, k={k}")
    return Fraction(comb(n, p - k), comb(p, k)) * cells[(n, k)].upper


def _offer(cell: BoundCell, value: Fraction | None, tag: str) -> bool:
    """Lower ``cell.upper`` to ``value`` if it improves; record ties. Returns True on improvement."""
    if value is None or cell.exact is not None:
        return False
    if value < cell.upper - IMPROVE_TOL:
        cell.upper = value
        cell.provenance = [tag]
        return True
    if value == cell.upper and tag not in cell.provenance:
        cell.provenance.append(tag)
    return False


def build_table(n_max: int = 12, start: BoundTable | None = None) -> BoundTable:
    """Fixed point of the bounding rules on rows ``2..n_max``.

    ``start`` seeds the initial uppers (used to check idempotence).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    cells: dict[tuple[int, int], BoundCell] = {}
    for n in range(2, n_max + 1):
        for p in range(1, n):
            exact = exact_registry(n, p)
            if exact is not None:
                tag = "TRIVIAL_DEGREE" if p in (1, n - 1) else "EXACT"
                cell = BoundCell(n, p, exact, exact, [tag])
            else:
                cell = BoundCell(n, p, Fraction(min(comb(n, p), comb(n - 2, p - 1))), None, ["BINOM"])
            if start is not None and (n, p) in start and exact is None:
                seeded = start[(n, p)]
                if seeded.upper < cell.upper:
                    cell.upper, cell.provenance = seeded.upper, list(seeded.provenance)
            cells[(n, p)] = cell

    passes = 0
    for passes in range(1, MAX_PASSES + 1):
        improved = False
        for n in range(2, n_max + 1):
            for p in range(2, n):
                for k in range(1, p):
                    improved |= _offer(cells[(n, p)], k_rule(cells, n, p, k), f"KRULE({k})")
            for p in range(1, n):
                improved |= _offer(cells[(n, p)], pascal_rule(cells, n, p), "PASCAL")
            for p in range(1, n):
                improved |= _offer(cells[(n, p)], cells[(n, n - p)].upper, "HODGE")
        if not improved:
            break
    return BoundTable(cells, n_max, passes)


# -- numerical lower bounds ----------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    """Budget for :func:`lower_bound_search`.

    ``budget`` caps the total number of inner comass estimates (cut rounds).
    ``outer`` caps the ascent steps per start; ``starts`` random starting
    covectors are tried. The final ratio is re-verified with ``verify``.
    """

    budget: int = 200
    seed: int = 0
    outer: int = 20
    starts: int = 1
    inner_restarts: int = 6
    inner_max_iter: int = 100
    cut_tol: float = 1e-6
    verify: OptimizerConfig = OptimizerConfig()


@dataclass(frozen=True)
class SearchResult:
    ratio: float
    covector: Covector
    evaluations: int


class _CutSet:
    """Oriented planes found so far, stored as Plücker vectors and frames."""

    def __init__(self, n: int, p: int):
        self.keys = multi_indices(n, p)
        self.index = np.array(self.keys, dtype=np.intp) - 1
        # coordinate planes bound every |coefficient| from the start
        self.planes = [np.eye(len(self.keys))]
        self.frames: list[np.ndarray] = []

    def add(self, frames: np.ndarray):
        self.planes.append(plucker_coordinates(self.index, frames))
        self.frames.extend(frames)

    def minimize_comass(self, direction: np.ndarray):
        """Minimize ``max_planes |<phi, plane>|`` subject to ``<direction, phi> = 1``."""
        planes = np.vstack(self.planes)
        dim = len(direction)
        a_ub = np.block([[planes, -np.ones((len(planes), 1))], [-planes, -np.ones((len(planes), 1))]])
        res = linprog(
            np.r_[np.zeros(dim), 1.0],
            A_ub=a_ub,
            b_ub=np.zeros(2 * len(planes)),
            A_eq=np.r_[direction, 0.0][None],
            b_eq=[1.0],
            bounds=[(None, None)] * (dim + 1),
            method="highs",
        )
        if res.status != 0:
            raise RuntimeError(f"cutting-plane LP failed: {res.message}")
        return res.x[:dim], res.x[-1]


def lower_bound_search(
    n: int, p: int, budget: SearchConfig | None = None, initial: Covector | None = None
) -> SearchResult:
    """Best-effort search for a covector with large ``|a| / comass(a)``.

    Each ascent step normalizes the current covector to ``u`` and minimizes
    the comass over the hyperplane ``<u, phi> = 1`` by cutting planes, the
    cuts being maximizing planes found by the frame optimizer. The minimizer's
    ratio is at least the previous one (the minimum equals one over the mass
    of ``u``), so the steps ascend. The returned ratio is recomputed from a
    full-restart comass estimate; no optimality is claimed.
    """
    _check_cell(n, p)
    cfg = budget or SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    cuts = _CutSet(n, p)
    evaluations = 0
    best_ratio, best_phi = -np.inf, None
    if initial is not None:
        if (initial.n, initial.p) != (n, p) or not initial.coeffs:
            raise ValueError("initial covector must be a nonzero p-covector on R^n")
        # the seed is itself a candidate, so a good witness is never lost
        seed_phi = initial.to_array()
        starts = _initial_frames(n, p, cfg.inner_restarts, int(rng.integers(2**31)))
        frames, _, _ = _ascend(cuts.index, seed_phi, starts, cfg.inner_max_iter, 1e-9)
        evaluations += 1
        cuts.add(frames)
        best_ratio = np.linalg.norm(seed_phi) / (plucker_coordinates(cuts.index, frames) @ seed_phi).max()
        best_phi = seed_phi

    for start in range(cfg.starts):
        if start == 0 and initial is not None:
            u = initial.to_array()
        else:
            u = rng.standard_normal(len(cuts.keys))
        u = u / np.linalg.norm(u)
        ratio = 0.0
        for _ in range(cfg.outer):
            while True:
                phi, level = cuts.minimize_comass(u)
                starts = np.concatenate(
                    [np.array(cuts.frames[-cfg.inner_restarts:]).reshape(-1, n, p),
                     _initial_frames(n, p, cfg.inner_restarts, int(rng.integers(2**31)))]
                )
                frames, _, _ = _ascend(cuts.index, phi, starts, cfg.inner_max_iter, 1e-9)
                values = plucker_coordinates(cuts.index, frames) @ phi
                evaluations += 1
                violated = values > level * (1 + cfg.cut_tol)
                if not violated.any() or evaluations >= cfg.budget:
                    break
                cuts.add(frames[violated])
            new_ratio = np.linalg.norm(phi) / values.max()
            if new_ratio > best_ratio:
                best_ratio, best_phi = new_ratio, phi
            if new_ratio <= ratio * (1 + 1e-9) or evaluations >= cfg.budget:
                break
            ratio = new_ratio
            u = phi / np.linalg.norm(phi)
        if evaluations >= cfg.budget:
            break

    phi = Covector.from_array(n, p, best_phi)
    warm = cuts.frames[-cfg.verify.restarts:] or None
    final = comass_estimate(phi, cfg.verify, initial_frames=warm)
    return SearchResult(euclidean_norm(phi) / final.lower_bound, phi, evaluations)
