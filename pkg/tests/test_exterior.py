import json
from itertools import combinations, permutations
from math import cos, sin, sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from comass_lab import Covector, FormatError, Frame, euclidean_norm, evaluate_on_frame, hodge_star, wedge
from comass_lab.exterior import multi_indices, random_covector, random_frame, shuffle_sign

from conftest import covectors


def e(n, *index, c=1.0):
    return Covector.basis(n, index, c)


def perm_sign(seq):
    seq = list(seq)
    inversions = sum(seq[i] > seq[j] for i in range(len(seq)) for j in range(i + 1, len(seq)))
    return -1 if inversions % 2 else 1


def wedge_oracle(a, b):
    """Coefficient-by-coefficient definition with inversion-count signs."""
    out = {}
    for k in combinations(range(1, a.n + 1), a.p + b.p):
        total = 0.0
        for i in combinations(k, a.p):
            j = tuple(x for x in k if x not in i)
            total += perm_sign(i + j) * a[i] * b[j]
        out[k] = total
    return Covector(a.n, a.p + b.p, out)


def evaluate_oracle(a, m):
    """Full alternation over permutations, without determinants."""
    total = 0.0
    for index, coeff in a:
        rows = [i - 1 for i in index]
        for perm in permutations(range(a.p)):
            total += coeff * perm_sign(perm) * np.prod([m[rows[perm[j]], j] for j in range(a.p)])
    return total


# -- wedge ---------------------------------------------------------------


def test_wedge_examples():
    assert wedge(e(3, 1), e(3, 2)) == e(3, 1, 2)
    assert wedge(e(3, 1) + e(3, 3), e(3, 2)) == e(3, 1, 2) - e(3, 2, 3)
    assert wedge(e(4, 1, 2), e(4, 1, 3)) == Covector.zero(4, 4)


def test_wedge_errors():
    with pytest.raises(ValueError, match="dimension"):
        wedge(e(3, 1), e(4, 1))
    with pytest.raises(ValueError, match="overflow"):
        wedge(e(3, 1, 2), e(3, 1, 3))


def test_wedge_with_scalar_is_scaling():
    a = e(4, 1, 3, c=2.0) + e(4, 2, 4)
    assert wedge(Covector.scalar(4, 3.0), a) == 3.0 * a
    assert a ^ Covector.scalar(4, -1.0) == -a


def test_shuffle_sign_overlap_and_parity():
    assert shuffle_sign((1,), (2,)) == 1
    assert shuffle_sign((2,), (1,)) == -1
    assert shuffle_sign((1, 3), (2,)) == -1
    assert shuffle_sign((1, 2), (2, 3)) == 0


@given(st.data())
def test_wedge_matches_definition(data):
    n = data.draw(st.integers(2, 6))
    p = data.draw(st.integers(0, n))
    q = data.draw(st.integers(0, n - p))
    a = data.draw(covectors(n=n, p=p))
    b = data.draw(covectors(n=n, p=q))
    got, want = wedge(a, b).to_array(), wedge_oracle(a, b).to_array()
    assert np.allclose(got, want, atol=1e-12)


@given(st.data())
def test_wedge_anticommutes(data):
    n = data.draw(st.integers(2, 7))
    p = data.draw(st.integers(0, n))
    q = data.draw(st.integers(0, n - p))
    a = data.draw(covectors(n=n, p=p))
    b = data.draw(covectors(n=n, p=q))
    lhs = wedge(a, b).to_array()
    rhs = (-1) ** (p * q) * wedge(b, a).to_array()
    assert np.abs(lhs - rhs).max(initial=0) <= 1e-12


@given(st.data())
def test_wedge_is_bilinear(data):
    n = data.draw(st.integers(2, 6))
    p = data.draw(st.integers(1, n - 1))
    a1 = data.draw(covectors(n=n, p=p, integer=True))
    a2 = data.draw(covectors(n=n, p=p, integer=True))
    b = data.draw(covectors(n=n, p=n - p, integer=True))
    c = data.draw(st.integers(-3, 3))
    assert wedge(a1 + c * a2, b) == wedge(a1, b) + c * wedge(a2, b)


# -- hodge star ----------------------------------------------------------


def test_hodge_examples():
    assert hodge_star(e(4, 1, 2)) == e(4, 3, 4)
    assert hodge_star(e(3, 2)) == -e(3, 1, 3)
    a = e(3, 1, c=2.0) - e(3, 3)
    assert hodge_star(hodge_star(a)) == a


@pytest.mark.parametrize("n", range(1, 9))
def test_double_hodge_sign(n):
    rng = np.random.default_rng(n)
    for p in range(n + 1):
        a = random_covector(n, p, None, rng)
        twice = hodge_star(hodge_star(a))
        assert np.allclose(twice.to_array(), (-1) ** (p * (n - p)) * a.to_array(), atol=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_hodge_of_basis_is_complement_with_permutation_sign(n):
    for p in range(n + 1):
        for index in multi_indices(n, p):
            comp = tuple(i for i in range(1, n + 1) if i not in index)
            assert hodge_star(e(n, *index)) == e(n, *comp, c=perm_sign(index + comp))


@given(covectors(max_n=8))
def test_hodge_is_isometry(a):
    assert abs(euclidean_norm(hodge_star(a)) - euclidean_norm(a)) <= 1e-12


def test_wedge_with_own_hodge_is_squared_norm_volume():
    rng = np.random.default_rng(0)
    a = random_covector(6, 3, None, rng)
    vol = wedge(a, hodge_star(a))
    assert vol.p == 6
    assert vol[(1, 2, 3, 4, 5, 6)] == pytest.approx(euclidean_norm(a) ** 2, rel=1e-12)


# -- norms and evaluation ------------------------------------------------


def test_euclidean_norm_examples():
    assert euclidean_norm(e(6, 1, 2, 3) + e(6, 4, 5, 6)) == pytest.approx(sqrt(2), abs=1e-15)
    assert euclidean_norm(Covector.zero(5, 2)) == 0.0


def test_evaluate_examples():
    e12 = e(3, 1, 2)
    assert evaluate_on_frame(e12, Frame.from_basis(3, (1, 2))) == 1.0
    theta = 0.7
    m = np.array([[cos(theta), 0], [0, 1], [sin(theta), 0]])
    assert evaluate_on_frame(e12, Frame(m)) == pytest.approx(cos(theta), abs=1e-15)
    for index in multi_indices(4, 2):
        for other in multi_indices(4, 2):
            want = 1.0 if index == other else 0.0
            assert evaluate_on_frame(e(4, *index), Frame.from_basis(4, other)) == want


def test_evaluate_scalar_and_mismatch():
    assert evaluate_on_frame(Covector.scalar(3, -2.5), np.zeros((3, 0))) == -2.5
    with pytest.raises(ValueError):
        evaluate_on_frame(e(4, 1, 2), Frame.from_basis(4, (1, 2, 3)))


@given(covectors(min_n=1, max_n=5), st.integers(0, 2**32 - 1))
def test_evaluate_matches_alternation(a, seed):
    if a.p == 0:
        return
    m = random_frame(a.n, a.p, seed).matrix
    assert evaluate_on_frame(a, m) == pytest.approx(evaluate_oracle(a, m), abs=1e-10)


@given(covectors(min_n=2, max_n=7), st.integers(0, 2**32 - 1))
def test_evaluation_bounded_by_euclidean_norm(a, seed):
    if a.p == 0:
        return
    f = random_frame(a.n, a.p, seed)
    assert abs(evaluate_on_frame(a, f)) <= euclidean_norm(a) + 1e-12


@given(covectors(min_n=2, max_n=6), st.integers(0, 2**32 - 1))
def test_evaluation_rotation_invariance_and_flip(a, seed):
    if a.p == 0:
        return
    rng = np.random.default_rng(seed)
    m = random_frame(a.n, a.p, rng).matrix
    q, _ = np.linalg.qr(rng.standard_normal((a.p, a.p)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    value = evaluate_on_frame(a, m)
    assert evaluate_on_frame(a, m @ q) == pytest.approx(value, abs=1e-10)
    flip = np.eye(a.p)
    flip[0, 0] = -1
    assert evaluate_on_frame(a, m @ q @ flip) == pytest.approx(-value, abs=1e-10)


# -- frames --------------------------------------------------------------


def test_random_frame_contracts():
    f = random_frame(3, 3, 11)
    assert np.abs(f.matrix.T @ f.matrix - np.eye(3)).max() <= 1e-10
    assert np.array_equal(random_frame(5, 2, 42).matrix, random_frame(5, 2, 42).matrix)
    with pytest.raises(ValueError):
        random_frame(2, 3, 0)


def test_random_frame_mean_is_zero_monte_carlo():
    rng = np.random.default_rng(2024)
    e12 = e(5, 1, 2)
    values = np.array([evaluate_on_frame(e12, random_frame(5, 2, rng)) for _ in range(10_000)])
    sigma = values.std(ddof=1) / np.sqrt(len(values))
    assert abs(values.mean()) <= 3 * sigma


def test_frame_rejects_non_orthonormal():
    with pytest.raises(ValueError, match="orthonormal"):
        Frame(np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        Frame(np.ones((2, 3)))


def test_frame_is_read_only():
    f = random_frame(4, 2, 0)
    with pytest.raises(ValueError):
        f.matrix[0, 0] = 1.0


# -- covector container and JSON -----------------------------------------


def test_zero_coefficients_dropped_and_sorted():
    a = Covector(4, 2, {(3, 4): 1.0, (1, 2): 0.0, (1, 3): -2})
    assert list(a.coeffs) == [(1, 3), (3, 4)]
    assert len(a) == 2


def test_covector_rejects_bad_keys():
    with pytest.raises(ValueError):
        Covector(3, 2, {(2, 1): 1.0})
    with pytest.raises(ValueError):
        Covector(3, 2, {(1, 4): 1.0})
    with pytest.raises(ValueError):
        Covector(3, 4, {})


@given(covectors(max_n=7))
def test_json_round_trip(a):
    assert Covector.from_json(json.dumps(a.to_dict())) == a


def test_array_round_trip():
    a = random_covector(6, 3, 5, 1)
    assert Covector.from_array(6, 3, a.to_array()) == a


@pytest.mark.parametrize(
    "terms, position, needle",
    [
        ([{"index": [1, 2], "coeff": 1}, {"index": [1, 2], "coeff": 2}], 1, "duplicate"),
        ([{"index": [1, 3], "coeff": 1}, {"index": [3, 2], "coeff": 1}], 1, "increasing"),
        ([{"index": [1, 5], "coeff": 1}], 0, "outside"),
        ([{"index": [1, 2], "coeff": "x"}], 0, "number"),
        ([{"index": [1, 2], "coeff": 1}, {"index": [1], "coeff": 1}], 1, "length"),
        ([{"index": [1, 2]}], 0, "coeff"),
    ],
)
def test_loader_errors_name_the_term(terms, position, needle):
    text = json.dumps({"n": 4, "p": 2, "terms": terms})
    with pytest.raises(FormatError, match=needle) as info:
        Covector.from_json(text)
    assert info.value.position == position
    assert f"term {position}" in str(info.value)


def test_loader_errors_without_position():
    for text in ["not json", "[1, 2]", '{"n": 3, "p": 1}', '{"n": 3, "p": 5, "terms": []}']:
        with pytest.raises(FormatError):
            Covector.from_json(text)
