"""Checks of the wedge-product comass inequalities on concrete forms.

Comass estimates are lower bounds, so a violated inequality may just mean the
right-hand side was under-estimated. A check that misses by more than ``tol``
is re-run with ten times the restarts (status ``RETRY`` if that fixes it) and
only then reported as ``FAIL``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .bounds import BoundTable, build_table
from .comass import OptimizerConfig, comass
from .exterior import Covector, euclidean_norm, multi_indices, random_covector, wedge

__all__ = [
    "WedgeBoundReport",
    "check_complementary",
    "check_general",
    "check_m_fold",
    "m_fold_constant",
    "random_basis_form",
    "summarize",
]

PASS, RETRY, FAIL = "PASS", "RETRY", "FAIL"
TOL = 1e-6
RETRY_FACTOR = 10


@dataclass
class WedgeBoundReport:
    lhs: float
    rhs: float
    constant_used: float
    status: str
    inputs: list = field(default_factory=list)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant_used": self.constant_used,
            "margin": self.margin,
            "status": self.status,
            "inputs": self.inputs,
        }


def _describe(a: Covector) -> dict:
    return {"n": a.n, "p": a.p, "terms": len(a)}


_TABLES: dict[int, BoundTable] = {}


def _upper(n: int, p: int) -> Fraction:
    if p in (0, n):
        return Fraction(1)
    n_max = max(n, 12)
    if n_max not in _TABLES:
        _TABLES[n_max] = build_table(n_max)
    return _TABLES[n_max].upper(n, p)


def _run(lhs_fn, constant: Fraction, factors: Sequence[Covector], cfg, tol) -> WedgeBoundReport:
    cfg = cfg or OptimizerConfig()
    attempts = [(cfg, PASS), (cfg.scaled(RETRY_FACTOR), RETRY)]
    for run_cfg, status in attempts:
        lhs = lhs_fn(run_cfg)
        rhs = float(constant) * float(np.prod([comass(f, run_cfg) for f in factors]))
        if lhs <= rhs + tol:
            break
    else:
        status = FAIL
    return WedgeBoundReport(lhs, rhs, float(constant), status, [_describe(f) for f in factors])


def check_complementary(a: Covector, b: Covector, cfg: OptimizerConfig | None = None, tol: float = TOL):
    """``|a∧b| <= C²_{n,p} ‖a‖ ‖b‖`` for complementary degrees; the left side is exact."""
    if a.n != b.n or a.p + b.p != a.n:
        raise ValueError(f"degrees {a.p} + {b.p} are not complementary in R^{a.n}")
    top = euclidean_norm(wedge(a, b))
    return _run(lambda _cfg: top, _upper(a.n, a.p), [a, b], cfg, tol)


def check_general(a: Covector, b: Covector, cfg: OptimizerConfig | None = None, tol: float = TOL):
    """``‖a∧b‖ <= C²_{p+q,p} ‖a‖ ‖b‖``; both sides estimated."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: R^{a.n} vs R^{b.n}")
    if a.p + b.p > a.n:
        raise ValueError(f"degree overflow: {a.p} + {b.p} > {a.n}")
    product = wedge(a, b)
    return _run(lambda c: comass(product, c), _upper(a.p + b.p, a.p), [a, b], cfg, tol)


def m_fold_constant(m: int, p: int) -> Fraction:
    """``C²_{mp,p} C²_{(m-1)p,p} ... C²_{2p,p}`` from the bound table."""
    if m < 1 or p < 1:
        raise ValueError("need m >= 1 and p >= 1")
    return reduce(lambda acc, j: acc * _upper(j * p, p), range(2, m + 1), Fraction(1))


def check_m_fold(forms: Sequence[Covector], cfg: OptimizerConfig | None = None, tol: float = TOL):
    """``|φ1∧...∧φm| <= (product of constants) ‖φ1‖ ... ‖φm‖`` for p-forms on R^{mp}."""
    if not forms:
        raise ValueError("need at least one form")
    m, p, n = len(forms), forms[0].p, forms[0].n
    if any((f.n, f.p) != (n, p) for f in forms) or n != m * p:
        raise ValueError(f"m-fold check needs {m} forms of one degree p in R^(m*p)")
    top = euclidean_norm(reduce(wedge, forms))
    return _run(lambda _cfg: top, m_fold_constant(m, p), list(forms), cfg, tol)


def random_basis_form(n: int, p: int, rng: np.random.Generator, signed: bool = True) -> Covector:
    """A single ``±c e_I*`` term with ``c`` in [0.5, 2)."""
    keys = multi_indices(n, p)
    key = keys[int(rng.integers(len(keys)))]
    coeff = rng.uniform(0.5, 2.0) * (rng.choice((-1.0, 1.0)) if signed else 1.0)
    return Covector(n, p, {key: coeff})


def random_form(n: int, p: int, terms: int | None, rng: np.random.Generator) -> Covector:
    return random_covector(n, p, terms, rng)


def summarize(reports: Sequence[WedgeBoundReport]) -> dict:
    counts = {PASS: 0, RETRY: 0, FAIL: 0}
    for r in reports:
        counts[r.status] += 1
    worst = min((r.margin for r in reports), default=float("nan"))
    return {"trials": len(reports), **{k.lower(): v for k, v in counts.items()}, "worst_margin": worst}
