"""Input validation helpers shared by the public entry points."""

from __future__ import annotations

MAX_DIMENSION = 16


class FormatError(ValueError):
    """Malformed serialized input. ``position`` is the offending term index, if any."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"term {position}: {message}"
        super().__init__(message)


def check_degree(n: int, p: int) -> None:
    if not 1 <= n <= MAX_DIMENSION:
        raise ValueError(f"ambient dimension must be in 1..{MAX_DIMENSION}, got {n}")
    if not 0 <= p <= n:
        raise ValueError(f"degree must satisfy 0 <= p <= n, got p={p}, n={n}")


def check_multi_index(index, n: int, p: int) -> tuple:
    key = tuple(int(i) for i in index)
    if len(key) != p:
        raise ValueError(f"index {list(key)} has length {len(key)}, expected {p}")
    if any(b <= a for a, b in zip(key, key[1:])):
        raise ValueError(f"index {list(key)} is not strictly increasing")
    if key and (key[0] < 1 or key[-1] > n):
        raise ValueError(f"index {list(key)} has entries outside 1..{n}")
    return key


def check_covector(a, *, degrees=None, nonzero: bool = False):
    from .exterior import Covector

    if not isinstance(a, Covector):
        raise TypeError(f"expected a Covector, got {type(a).__name__}")
    if degrees is not None and a.p not in degrees:
        raise ValueError(f"degree {a.p} not supported here (allowed: {sorted(degrees)})")
    if nonzero and not a.coeffs:
        raise ValueError("covector is zero")
    return a


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
