"""Floating-point exterior algebra on R^n.

Multi-indices are tuples of strictly increasing 1-based integers, matching the
``e_1, ..., e_n`` convention. A :class:`Covector` is a sparse map from
multi-indices to coefficients in the orthonormal basis ``{e_I*}``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping

import numpy as np

from ._validation import FormatError, check_degree, check_multi_index

__all__ = [
    "Covector",
    "Frame",
    "FormatError",
    "wedge",
    "hodge_star",
    "euclidean_norm",
    "evaluate_on_frame",
    "orthonormalize",
    "random_frame",
    "random_covector",
    "shuffle_sign",
    "multi_indices",
]

GRAM_TOL = 1e-10


@lru_cache(maxsize=None)
def shuffle_sign(first: tuple, second: tuple) -> int:
    """Sign of the permutation sorting ``first + second``; 0 if they overlap."""
    if set(first) & set(second):
        return 0
    inversions = sum(1 for i in first for j in second if i > j)
    return -1 if inversions % 2 else 1


def multi_indices(n: int, p: int) -> list[tuple[int, ...]]:
    """All strictly increasing 1-based multi-indices of length ``p``."""
    return list(itertools.combinations(range(1, n + 1), p))


@dataclass(frozen=True, eq=False)
class Covector:
    """A p-covector on R^n stored as ``{multi_index: coefficient}``.

    Zero coefficients are dropped on construction, so two covectors are equal
    iff their coefficient maps are equal.
    """

    n: int
    p: int
    coeffs: Mapping[tuple, float] = field(default_factory=dict)

    def __post_init__(self):
        check_degree(self.n, self.p)
        clean = {}
        for key, value in dict(self.coeffs).items():
            key = check_multi_index(key, self.n, self.p)
            value = float(value)
            if value != 0.0:
                clean[key] = value
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def basis(cls, n: int, index: Iterable[int], coeff: float = 1.0) -> "Covector":
        index = tuple(index)
        return cls(n, len(index), {index: coeff})

    @classmethod
    def zero(cls, n: int, p: int) -> "Covector":
        return cls(n, p, {})

    @classmethod
    def scalar(cls, n: int, value: float) -> "Covector":
        return cls(n, 0, {(): value})

    @classmethod
    def from_array(cls, n: int, p: int, values) -> "Covector":
        """Build from a dense coefficient vector ordered like :func:`multi_indices`."""
        keys = multi_indices(n, p)
        values = np.asarray(values, dtype=float)
        if values.shape != (len(keys),):
            raise ValueError(f"expected {len(keys)} coefficients, got shape {values.shape}")
        return cls(n, p, dict(zip(keys, values)))

    def to_array(self) -> np.ndarray:
        return np.array([self.coeffs.get(k, 0.0) for k in multi_indices(self.n, self.p)])

    def __getitem__(self, index) -> float:
        return self.coeffs.get(tuple(index), 0.0)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Covector):
            return NotImplemented
        return (self.n, self.p, self.coeffs) == (other.n, other.p, other.coeffs)

    def __repr__(self) -> str:
        terms = " + ".join(
            f"{c:g}*e{''.join(map(str, k)) if k else '()'}" for k, c in self.coeffs.items()
        )
        return f"Covector(n={self.n}, p={self.p}, {terms or '0'})"

    def _check_same_space(self, other: "Covector"):
        if (self.n, self.p) != (other.n, other.p):
            raise ValueError(
                f"cannot combine covectors in Λ^{self.p}(R^{self.n}) and Λ^{other.p}(R^{other.n})"
            )

    def __add__(self, other: "Covector") -> "Covector":
        self._check_same_space(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return Covector(self.n, self.p, out)

    def __neg__(self) -> "Covector":
        return Covector(self.n, self.p, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "Covector") -> "Covector":
        return self + (-other)

    def __mul__(self, scale: float) -> "Covector":
        scale = float(scale)
        return Covector(self.n, self.p, {k: scale * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "Covector") -> "Covector":
        return wedge(self, other)

    # Dense views used by the evaluators; computed once per instance.
    @cached_property
    def _index_array(self) -> np.ndarray:
        if not self.coeffs:
            return np.zeros((0, self.p), dtype=np.intp)
        return np.array(list(self.coeffs), dtype=np.intp).reshape(len(self.coeffs), self.p) - 1

    @cached_property
    def _coef_array(self) -> np.ndarray:
        return np.array(list(self.coeffs.values()), dtype=float)

    # JSON wire format
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "terms": [{"index": list(k), "coeff": v} for k, v in self.coeffs.items()],
        }

    @classmethod
    def from_dict(cls, data) -> "Covector":
        """Parse the ``{"n", "p", "terms": [...]}`` wire format.

        Raises :class:`FormatError` naming the offending term position on
        duplicates, unsorted or out-of-range indices.
        """
        if not isinstance(data, Mapping):
            raise FormatError("covector JSON must be an object")
        try:
            n, p, terms = data["n"], data["p"], data["terms"]
        except KeyError as exc:
            raise FormatError(f"missing field {exc.args[0]!r}") from None
        if not (isinstance(n, int) and isinstance(p, int)) or isinstance(n, bool):
            raise FormatError("'n' and 'p' must be integers")
        try:
            check_degree(n, p)
        except ValueError as exc:
            raise FormatError(str(exc)) from None
        if not isinstance(terms, list):
            raise FormatError("'terms' must be a list")
        coeffs: dict[tuple, float] = {}
        for pos, term in enumerate(terms):
            if not isinstance(term, Mapping) or "index" not in term or "coeff" not in term:
                raise FormatError("term must have 'index' and 'coeff'", position=pos)
            raw = term["index"]
            if not isinstance(raw, list) or not all(
                isinstance(i, int) and not isinstance(i, bool) for i in raw
            ):
                raise FormatError("index must be a list of integers", position=pos)
            try:
                key = check_multi_index(raw, n, p)
            except ValueError as exc:
                raise FormatError(str(exc), position=pos) from None
            if key in coeffs:
                raise FormatError(f"duplicate index {list(key)}", position=pos)
            coeff = term["coeff"]
            if not isinstance(coeff, (int, float)) or isinstance(coeff, bool):
                raise FormatError("coeff must be a number", position=pos)
            if not np.isfinite(coeff):
                raise FormatError("coeff must be finite", position=pos)
            coeffs[key] = float(coeff)
        return cls(n, p, coeffs)

    @classmethod
    def from_json(cls, text: str) -> "Covector":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)


@dataclass(frozen=True, eq=False)
class Frame:
    """``p`` orthonormal columns in R^n, standing for ``v_1 ∧ ... ∧ v_p``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("frame matrix must be 2-dimensional (n x p)")
        n, p = m.shape
        if p > n:
            raise ValueError(f"a frame in R^{n} cannot have {p} columns")
        residual = np.abs(m.T @ m - np.eye(p)).max(initial=0.0)
        if residual > GRAM_TOL:
            raise ValueError(f"columns are not orthonormal (Gram residual {residual:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    @property
    def columns(self) -> list[np.ndarray]:
        return [self.matrix[:, j] for j in range(self.p)]

    @classmethod
    def from_basis(cls, n: int, index: Iterable[int]) -> "Frame":
        index = list(index)
        return cls(np.eye(n)[:, [i - 1 for i in index]])

    def tolist(self) -> list[list[float]]:
        return self.matrix.tolist()


def wedge(a: Covector, b: Covector) -> Covector:
    """Exterior product; raises instead of returning 0 when the degree exceeds n."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: R^{a.n} vs R^{b.n}")
    if a.p + b.p > a.n:
        raise ValueError(f"degree overflow: {a.p} + {b.p} > {a.n}")
    out: dict[tuple, float] = {}
    for i, x in a.coeffs.items():
        for j, y in b.coeffs.items():
            sign = shuffle_sign(i, j)
            if sign:
                k = tuple(sorted(i + j))
                out[k] = out.get(k, 0.0) + sign * x * y
    return Covector(a.n, a.p + b.p, out)


def hodge_star(a: Covector) -> Covector:
    full = range(1, a.n + 1)
    out = {}
    for i, x in a.coeffs.items():
        comp = tuple(k for k in full if k not in i)
        out[comp] = shuffle_sign(i, comp) * x
    return Covector(a.n, a.n - a.p, out)


def euclidean_norm(a: Covector) -> float:
    return float(np.sqrt(np.sum(a._coef_array**2)))


def evaluate_on_frame(a: Covector, frame: Frame | np.ndarray) -> float:
    """``a(v_1 ∧ ... ∧ v_p)``: sum of coefficient times the matching p x p minor."""
    m = frame.matrix if isinstance(frame, Frame) else np.asarray(frame, dtype=float)
    if m.shape != (a.n, a.p):
        raise ValueError(f"frame of shape {m.shape} cannot be paired with Λ^{a.p}(R^{a.n})*")
    if a.p == 0:
        return a[()]
    if not a.coeffs:
        return 0.0
    minors = np.linalg.det(m[a._index_array])
    return float(minors @ a._coef_array)


def orthonormalize(vectors: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt on the columns, with one re-orthogonalization pass if needed."""
    q = np.array(vectors, dtype=float)
    _, p = q.shape
    for j in range(p):
        for _ in range(2):
            for k in range(j):
                q[:, j] -= (q[:, k] @ q[:, j]) * q[:, k]
            norm = np.linalg.norm(q[:, j])
            if norm == 0.0:
                raise ValueError("columns are linearly dependent")
            q[:, j] /= norm
            if np.abs(q[:, : j + 1].T @ q[:, j] - np.eye(j + 1)[j]).max() <= GRAM_TOL:
                break
    return q


def _as_rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_frame(n: int, p: int, seed=None) -> Frame:
    """Orthonormalized Gaussian frame; ``seed`` may be an int or a ``Generator``."""
    if not 1 <= p <= n:
        raise ValueError(f"need 1 <= p <= n, got n={n}, p={p}")
    rng = _as_rng(seed)
    return Frame(orthonormalize(rng.standard_normal((n, p))))


def random_covector(n: int, p: int, terms: int | None = None, seed=None) -> Covector:
    """Standard-normal coefficients on ``terms`` distinct random multi-indices (all if None)."""
    check_degree(n, p)
    rng = _as_rng(seed)
    keys = multi_indices(n, p)
    if terms is None or terms >= len(keys):
        chosen = keys
    else:
        if terms < 1:
            raise ValueError("terms must be positive")
        chosen = [keys[i] for i in sorted(rng.choice(len(keys), size=terms, replace=False))]
    values = rng.standard_normal(len(chosen))
    return Covector(n, p, dict(zip(chosen, values)))
