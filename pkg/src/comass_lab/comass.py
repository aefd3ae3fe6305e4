"""Comass of p-covectors: closed forms where they exist, frame optimization otherwise.

The comass is the maximum of ``a(v_1 ∧ ... ∧ v_p)`` over orthonormal frames.
:func:`comass_estimate` runs projected gradient ascent on the Stiefel manifold
from many random frames; every iterate is feasible, so the best value found is
a certified lower bound and the frame attaining it is returned as a witness.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_covector, check_positive_int
from .exterior import Covector, Frame, euclidean_norm, evaluate_on_frame, orthonormalize

__all__ = [
    "NoClosedFormError",
    "OptimizerConfig",
    "ComassEstimate",
    "ComassEstimator",
    "paired_singular_values",
    "comass_exact",
    "has_closed_form",
    "comass_estimate",
    "ratio_estimate",
    "frame_gradient",
    "comass",
]

# With c = 1e-4 the search accepts steps at the 2/curvature stability edge and
# the ascent oscillates across ridges (sublinear on the Cayley form).
ARMIJO = 0.25
MIN_STEP = 1e-12
TIE_TOL = 1e-12
PAIR_TOL = 1e-8
SINGULAR_DET = 1e-6
# restarts are ascended in fixed blocks so threading never changes the arithmetic
CHUNK = 32


class NoClosedFormError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    max_iter: int = 500
    tol: float = 1e-9
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        check_positive_int(self.restarts, "restarts")
        check_positive_int(self.max_iter, "max_iter")
        check_positive_int(self.threads, "threads")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def scaled(self, factor: int) -> "OptimizerConfig":
        return OptimizerConfig(self.restarts * factor, self.max_iter, self.tol, self.seed, self.threads)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ComassEstimate:
    lower_bound: float
    witness: Frame
    restarts_used: int
    iterations: int
    converged: tuple[bool, ...]

    @property
    def converged_fraction(self) -> float:
        return sum(self.converged) / len(self.converged)


# -- closed forms ---------------------------------------------------------


def paired_singular_values(a: Covector) -> list[float]:
    """The values ``λ_1 >= λ_2 >= ... >= 0`` of the canonical form of a 2-covector.

    Eigenvalues of ``AᵀA`` for the skew matrix ``A`` come in equal pairs; each
    pair contributes one value.
    """
    check_covector(a, degrees={2})
    skew = np.zeros((a.n, a.n))
    for (i, j), c in a.coeffs.items():
        skew[i - 1, j - 1] = c
        skew[j - 1, i - 1] = -c
    eig = np.sort(np.clip(np.linalg.eigvalsh(skew.T @ skew), 0.0, None))[::-1]
    values = np.sqrt(eig)
    paired = []
    k = 0
    while k < len(values):
        if k + 1 < len(values) and abs(values[k] - values[k + 1]) <= PAIR_TOL * max(1.0, values[k]):
            paired.append(float(values[k]))
            k += 2
        else:
            # An unpaired value can only be the trailing zero in odd dimension.
            k += 1
    return paired


def has_closed_form(a: Covector) -> bool:
    return a.p in (0, 1, 2, a.n - 1, a.n) or len(a.coeffs) <= 1


def comass_exact(a: Covector) -> float:
    check_covector(a)
    if a.p in (0, a.n):
        return abs(next(iter(a.coeffs.values()), 0.0))
    if a.p in (1, a.n - 1) or len(a.coeffs) <= 1:
        # simple covectors: comass equals the Euclidean norm
        return euclidean_norm(a)
    if a.p == 2:
        values = paired_singular_values(a)
        return values[0] if values else 0.0
    raise NoClosedFormError(
        f"no closed form for the comass of a {a.p}-covector in R^{a.n}; use comass_estimate"
    )


# -- frame optimization ---------------------------------------------------


@lru_cache(maxsize=None)
def _minor_indices(p: int):
    keep = np.array([[k for k in range(p) if k != r] for r in range(p)], dtype=np.intp)
    rows = keep[:, None, :, None]  # (p, 1, p-1, 1)
    cols = keep[None, :, None, :]  # (1, p, 1, p-1)
    sign = (-1.0) ** np.add.outer(np.arange(p), np.arange(p))
    return rows, cols, sign


def _det(a: np.ndarray) -> np.ndarray:
    """Batched determinant over the last two axes; closed forms up to 3 x 3."""
    k = a.shape[-1]
    if k == 1:
        return a[..., 0, 0]
    if k == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    if k == 3:
        return (
            a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
            - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
            + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
        )
    return np.linalg.det(a)


def _cofactors(a: np.ndarray) -> np.ndarray:
    """Batched cofactor matrices; singular inputs are fine."""
    k = a.shape[-1]
    if k == 1:
        return np.ones_like(a)
    if k <= 4:
        rows, cols, sign = _minor_indices(k)
        return _det(a[..., rows, cols]) * sign
    # det(A) A⁻ᵀ, except near-singular minors which go through the SVD
    flat = a.reshape(-1, k, k)
    det = np.linalg.det(flat)
    small = np.abs(det) < SINGULAR_DET
    out = np.empty_like(flat)
    good = ~small
    if good.any():
        out[good] = det[good, None, None] * np.swapaxes(np.linalg.inv(flat[good]), -1, -2)
    if small.any():
        out[small] = _cofactors_svd(flat[small])
    return out.reshape(a.shape)


def _cofactors_svd(a: np.ndarray) -> np.ndarray:
    # adj(A) = det(U) det(V) V adj(S) Uᵀ for A = U S Vᵀ; cofactor = adj(A)ᵀ
    k = a.shape[-1]
    u, sv, vt = np.linalg.svd(a)
    adj_s = np.prod(np.where(np.eye(k, dtype=bool), 1.0, sv[..., None, :]), axis=-1)
    orient = np.linalg.det(u) * np.linalg.det(vt)
    return (u * adj_s[..., None, :]) @ vt * orient[..., None, None]


def plucker_coordinates(index: np.ndarray, frames: np.ndarray) -> np.ndarray:
    """p x p minors of each frame in (R, n, p) for the rows in ``index`` (T, p)."""
    return _det(frames[:, index, :])


def _values_and_gradients(index: np.ndarray, coef: np.ndarray, frames: np.ndarray):
    """Objective and Euclidean gradient for a stack of frames of shape (R, n, p)."""
    r, n, p = frames.shape
    sub = frames[:, index, :]  # (R, T, p, p)
    values = _det(sub) @ coef
    cof = _cofactors(sub)
    weighted = cof * coef[None, :, None, None]
    grad = np.zeros((r, n, p))
    for slot in range(p):
        # row index[t, slot] of the frame feeds row `slot` of minor t
        np.add.at(grad, (slice(None), index[:, slot]), weighted[:, :, slot, :])
    return values, grad


def frame_gradient(a: Covector, frame) -> np.ndarray:
    """Euclidean gradient of ``M -> a(M)`` at an n x p matrix.

    Entry ``(i, j)`` is the evaluation with column ``j`` replaced by ``e_i``.
    """
    m = frame.matrix if isinstance(frame, Frame) else np.asarray(frame, dtype=float)
    if m.shape != (a.n, a.p):
        raise ValueError(f"matrix of shape {m.shape} cannot be paired with Λ^{a.p}(R^{a.n})*")
    if a.p == 0 or not a.coeffs:
        return np.zeros_like(m)
    return _values_and_gradients(a._index_array, a._coef_array, m[None])[1][0]


def _retract(points: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(points)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def _ascend(index, coef, frames, max_iter, tol):
    """Backtracking projected-gradient ascent; returns frames, iteration counts, flags."""
    frames = frames.copy()
    count = len(frames)
    values, grad = _values_and_gradients(index, coef, frames)
    active = np.ones(count, dtype=bool)
    converged = np.zeros(count, dtype=bool)
    iterations = np.zeros(count, dtype=int)
    for _ in range(max_iter):
        if not active.any():
            break
        ids = np.flatnonzero(active)
        m, g = frames[ids], grad[ids]
        mtg = np.swapaxes(m, 1, 2) @ g
        direction = g - m @ (0.5 * (mtg + np.swapaxes(mtg, 1, 2)))
        slope = np.einsum("rij,rij->r", direction, direction)
        done = np.sqrt(slope) < tol
        converged[ids[done]] = True
        active[ids[done]] = False
        keep = ~done
        ids, m, direction, slope = ids[keep], m[keep], direction[keep], slope[keep]
        step = np.ones(len(ids))
        searching = np.ones(len(ids), dtype=bool)
        while searching.any():
            s = np.flatnonzero(searching)
            trial = _retract(m[s] + step[s, None, None] * direction[s])
            tv, tg = _values_and_gradients(index, coef, trial)
            ok = tv >= values[ids[s]] + ARMIJO * step[s] * slope[s]
            acc = s[ok]
            frames[ids[acc]], values[ids[acc]], grad[ids[acc]] = trial[ok], tv[ok], tg[ok]
            searching[acc] = False
            rej = s[~ok]
            step[rej] *= 0.5
            stalled = rej[step[rej] < MIN_STEP]
            searching[stalled] = False
            converged[ids[stalled]] = True
            active[ids[stalled]] = False
        iterations[ids] += 1
    return frames, iterations, converged


def _initial_frames(n: int, p: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.stack([orthonormalize(rng.standard_normal((n, p))) for _ in range(count)])


def _resolve_threads(threads: int) -> int:
    env = os.environ.get("COMASS_LAB_THREADS")
    if threads == 1 and env:
        return max(1, int(env))
    return threads


def comass_estimate(a: Covector, cfg: OptimizerConfig | None = None, initial_frames=None) -> ComassEstimate:
    """Certified lower bound on the comass by multi-restart Stiefel ascent.

    ``initial_frames`` (optional, shape (k, n, p)) are prepended to the
    ``cfg.restarts`` random starting frames. Hitting ``max_iter`` is reported
    in ``converged``, not raised.
    """
    cfg = cfg or OptimizerConfig()
    check_covector(a)
    if not 1 <= a.p <= a.n:
        raise ValueError(f"comass_estimate needs 1 <= p <= n, got p={a.p}, n={a.n}")
    starts = _initial_frames(a.n, a.p, cfg.restarts, cfg.seed)
    if initial_frames is not None:
        extra = np.stack([_retract(np.asarray(f.matrix if isinstance(f, Frame) else f, dtype=float)[None])[0]
                          for f in initial_frames])
        starts = np.concatenate([extra, starts])
    if not a.coeffs:
        frames = starts
        iterations = np.zeros(len(starts), dtype=int)
        converged = np.ones(len(starts), dtype=bool)
    else:
        index, coef = a._index_array, a._coef_array
        chunks = [starts[i : i + CHUNK] for i in range(0, len(starts), CHUNK)]
        threads = min(_resolve_threads(cfg.threads), len(chunks))
        run = lambda c: _ascend(index, coef, c, cfg.max_iter, cfg.tol)  # noqa: E731
        if threads == 1:
            parts = [run(c) for c in chunks]
        else:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(run, chunks))
        frames = np.concatenate([f for f, _, _ in parts])
        iterations = np.concatenate([i for _, i, _ in parts])
        converged = np.concatenate([c for _, _, c in parts])
    witnesses = [Frame(f) for f in frames]
    values = np.array([evaluate_on_frame(a, w) for w in witnesses])
    best = int(np.flatnonzero(values >= values.max() - TIE_TOL)[0])
    return ComassEstimate(
        lower_bound=float(values[best]),
        witness=witnesses[best],
        restarts_used=len(starts),
        iterations=int(iterations.sum()),
        converged=tuple(bool(c) for c in converged),
    )


def comass(a: Covector, cfg: OptimizerConfig | None = None) -> float:
    """Closed form when available, otherwise the optimizer's lower bound."""
    if has_closed_form(a):
        return comass_exact(a)
    return comass_estimate(a, cfg).lower_bound


def ratio_estimate(a: Covector, cfg: OptimizerConfig | None = None) -> float:
    """``|a| / comass(a)`` with the comass estimated from below.

    The result over-estimates the true ratio by at most the optimizer's gap.
    """
    check_covector(a, nonzero=True)
    if a.p in (0, a.n):
        denom = comass_exact(a)
    else:
        denom = comass_estimate(a, cfg).lower_bound
    return euclidean_norm(a) / denom


class ComassEstimator(BaseEstimator):
    """Estimator-style wrapper around :func:`comass_estimate`.

    ``fit(phi)`` locates a maximizing frame for the covector ``phi``;
    ``transform(frames)`` evaluates the fitted covector on a stack of frames.

    Attributes set by ``fit``: ``lower_bound_``, ``witness_``, ``ratio_``,
    ``estimate_``, ``n_features_in_`` (the ambient dimension).
    """

    def __init__(self, restarts=64, max_iter=500, tol=1e-9, seed=0, threads=1):
        self.restarts = restarts
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed
        self.threads = threads

    def _config(self) -> OptimizerConfig:
        return OptimizerConfig(self.restarts, self.max_iter, self.tol, self.seed, self.threads)

    def fit(self, X, y=None):
        covector = check_covector(X if isinstance(X, Covector) else Covector.from_dict(X), nonzero=True)
        self.covector_ = covector
        self.estimate_ = comass_estimate(covector, self._config())
        self.lower_bound_ = self.estimate_.lower_bound
        self.witness_ = self.estimate_.witness
        self.ratio_ = euclidean_norm(covector) / self.lower_bound_
        self.n_features_in_ = covector.n
        return self

    def _check_fitted(self):
        if not hasattr(self, "estimate_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("ComassEstimator is not fitted yet; call fit(covector) first")

    def transform(self, X):
        self._check_fitted()
        frames = np.asarray([f.matrix if isinstance(f, Frame) else f for f in X], dtype=float)
        return np.array([evaluate_on_frame(self.covector_, f) for f in frames])

    def score(self, X=None, y=None) -> float:
        self._check_fitted()
        return self.lower_bound_
