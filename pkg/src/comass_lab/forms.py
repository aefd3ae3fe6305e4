"""Extremal witness forms: special Lagrangian family in R^6, Kähler powers, Cayley form."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from .exterior import Covector, wedge

__all__ = [
    "SpecialLagParams",
    "special_lagrangian_form",
    "dadok_harvey_check",
    "is_canonical",
    "symplectic_power_form",
    "cayley_form",
    "CAYLEY_TERMS",
]


@dataclass(frozen=True)
class SpecialLagParams:
    mu: tuple[float, float, float, float] = (1.0, 1.0, -1.0, 0.0)

    def __post_init__(self):
        mu = tuple(float(m) for m in self.mu)
        if len(mu) != 4:
            raise ValueError(f"expected four parameters, got {len(mu)}")
        object.__setattr__(self, "mu", mu)


def _product(n: int, *order: int) -> Covector:
    """``e_{i1}* ∧ e_{i2}* ∧ ...`` in the given (unsorted) order."""
    return reduce(wedge, (Covector.basis(n, (i,)) for i in order))


# (coefficient slot, factor order); slot None is the fixed leading term
_SPECIAL_LAG_TERMS = [
    (None, (1, 2, 3)),
    (0, (1, 5, 6)),
    (1, (4, 2, 6)),
    (2, (4, 5, 3)),
    (3, (4, 5, 6)),
]


def special_lagrangian_form(params: SpecialLagParams | tuple = SpecialLagParams()) -> Covector:
    """The 3-covector ``e123 + μ1 e156 + μ2 e4∧e2∧e6 + μ3 e4∧e5∧e3 + μ4 e456`` on R^6.

    Signs come from wedging the basis factors in the listed order, so
    ``e4∧e2∧e6 = -e246`` and ``e4∧e5∧e3 = +e345``.
    """
    if not isinstance(params, SpecialLagParams):
        params = SpecialLagParams(tuple(params))
    out = Covector.zero(6, 3)
    for slot, order in _SPECIAL_LAG_TERMS:
        coeff = 1.0 if slot is None else params.mu[slot]
        out = out + coeff * _product(6, *order)
    return out


def dadok_harvey_check(params: SpecialLagParams | tuple) -> bool:
    """``μ1² + μ2² + μ3² + μ4² + 2 μ1 μ2 μ3 <= 1``, boundary included, no tolerance."""
    m1, m2, m3, m4 = params.mu if isinstance(params, SpecialLagParams) else params
    return m1 * m1 + m2 * m2 + m3 * m3 + m4 * m4 + 2 * m1 * m2 * m3 <= 1


def is_canonical(params: SpecialLagParams | tuple) -> bool:
    """Side conditions ``1 >= μ1 >= μ2 >= |μ3|`` and ``μ1² + μ4² <= 1``."""
    m1, m2, m3, m4 = params.mu if isinstance(params, SpecialLagParams) else params
    return 1 >= m1 >= m2 >= abs(m3) and m1 * m1 + m4 * m4 <= 1


def symplectic_power_form(k: int, n: int) -> Covector:
    """``ω_k = e12* + e34* + ... + e_{2k-1,2k}*`` in R^n."""
    if k < 1 or 2 * k > n:
        raise ValueError(f"need 1 <= k and 2k <= n, got k={k}, n={n}")
    return Covector(n, 2, {(2 * i - 1, 2 * i): 1.0 for i in range(1, k + 1)})


# ½ω² + Re(dz1∧dz2∧dz3∧dz4) with z_j = x_{2j-1} + i x_{2j}
CAYLEY_TERMS = {
    (1, 2, 3, 4): 1, (1, 2, 5, 6): 1, (1, 2, 7, 8): 1, (3, 4, 5, 6): 1,
    (3, 4, 7, 8): 1, (5, 6, 7, 8): 1,
    (1, 3, 5, 7): 1, (1, 3, 6, 8): -1, (1, 4, 5, 8): -1, (1, 4, 6, 7): -1,
    (2, 3, 5, 8): -1, (2, 3, 6, 7): -1, (2, 4, 5, 7): -1, (2, 4, 6, 8): 1,
}  # fmt: skip


def cayley_form() -> Covector:
    return Covector(8, 4, CAYLEY_TERMS)
