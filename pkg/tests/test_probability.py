import numpy as np
import pytest

from tspbnb import (InputError, OracleSizeError, ProbabilityMatrix, Tour,
                    brute_force_optimum, expected_optimality, generate, load_matrix,
                    noisy_oracle_matrix, oracle_matrix, render_matrix)


def uniform_matrix(n, value=0.5):
    p = np.full((n, n), float(value))
    np.fill_diagonal(p, 0.0)
    return ProbabilityMatrix(p)


def test_expected_optimality_is_probability_sum():
    p = np.zeros((3, 3))
    p[0, 1] = p[1, 0] = 0.9
    p[1, 2] = p[2, 1] = 0.8
    p[0, 2] = p[2, 0] = 0.7
    tri = Tour(order=(0, 1, 2), length=1.0)
    score = expected_optimality(tri, ProbabilityMatrix(p))
    assert score.value == pytest.approx(2.4)
    assert score.normalized == pytest.approx(0.8)


def test_expected_optimality_oracle_is_exactly_one():
    inst = generate(7, seed=2)
    opt = brute_force_optimum(inst)
    score = expected_optimality(opt, oracle_matrix(inst))
    assert score.value == inst.n
    assert score.normalized == 1.0


def test_expected_optimality_zero_matrix():
    inst = generate(5, seed=0)
    opt = brute_force_optimum(inst)
    assert expected_optimality(opt, uniform_matrix(5, 0.0)).value == 0.0


def test_expected_optimality_dimension_mismatch():
    inst = generate(5, seed=0)
    opt = brute_force_optimum(inst)
    with pytest.raises(InputError):
        expected_optimality(opt, uniform_matrix(6))


def test_expected_optimality_monotone_in_matrix():
    inst = generate(6, seed=4)
    opt = brute_force_optimum(inst)
    rng = np.random.default_rng(0)
    base = rng.random((6, 6)) * 0.5
    base = (base + base.T) / 2
    np.fill_diagonal(base, 0.0)
    low = ProbabilityMatrix(base)
    high = ProbabilityMatrix(np.clip(base + 0.3, 0, 1) - np.diag(np.full(6, 0.3)))
    assert expected_optimality(opt, low).value <= expected_optimality(opt, high).value


def test_expected_optimality_relabeling_invariant():
    inst = generate(6, seed=9)
    opt = brute_force_optimum(inst)
    rng = np.random.default_rng(1)
    p = rng.random((6, 6))
    p = (p + p.T) / 2
    np.fill_diagonal(p, 0.0)
    P = ProbabilityMatrix(p)
    perm = np.array([3, 1, 5, 0, 2, 4])
    relabeled = Tour(order=tuple(int(perm[v]) for v in opt.order), length=opt.length)
    P2 = ProbabilityMatrix(p[np.ix_(np.argsort(perm), np.argsort(perm))])
    assert expected_optimality(opt, P).value == pytest.approx(
        expected_optimality(relabeled, P2).value)


def test_oracle_matrix_marks_optimal_edges(square):
    P = oracle_matrix(square)
    assert P.edge(0, 1) == P.edge(1, 2) == P.edge(2, 3) == P.edge(0, 3) == 1.0
    assert P.edge(0, 2) == P.edge(1, 3) == 0.0


def test_oracle_matrix_size_cap():
    with pytest.raises(OracleSizeError):
        oracle_matrix(generate(13, seed=0))


def test_noisy_oracle_zero_noise_is_oracle():
    inst = generate(6, seed=3)
    assert np.array_equal(noisy_oracle_matrix(inst, 0.0, seed=1).p, oracle_matrix(inst).p)


def test_noisy_oracle_entry_ranges():
    inst = generate(8, seed=12)
    P = noisy_oracle_matrix(inst, 0.3, seed=5)
    off = P.p[~np.eye(8, dtype=bool)]
    assert np.all((off <= 0.3) | (off >= 0.7))


def test_noisy_oracle_deterministic():
    inst = generate(6, seed=3)
    a = noisy_oracle_matrix(inst, 0.2, seed=42)
    b = noisy_oracle_matrix(inst, 0.2, seed=42)
    assert np.array_equal(a.p, b.p)


def test_noisy_oracle_rejects_bad_noise():
    inst = generate(5, seed=0)
    with pytest.raises(InputError):
        noisy_oracle_matrix(inst, 0.6, seed=0)


def test_load_well_formed():
    text = "# comment\n4\n" + "\n".join(
        " ".join("0.25" if i != j else "0" for j in range(4)) for i in range(4)) + "\n"
    P = load_matrix(text)
    assert P.n == 4
    assert P.edge(0, 1) == 0.25


def test_load_rejects_out_of_range():
    text = "3\n0 1.3 0\n1.3 0 0\n0 0 0\n"
    with pytest.raises(InputError, match=r"\[0, 1\]"):
        load_matrix(text)


def test_load_symmetrizes_small_asymmetry():
    p = np.zeros((3, 3))
    p[0, 1], p[1, 0] = 0.5, 0.5000004
    text = "3\n" + "\n".join(" ".join(repr(float(v)) for v in row) for row in p) + "\n"
    P = load_matrix(text)
    assert P.edge(0, 1) == pytest.approx(0.5000002, abs=1e-12)


def test_load_rejects_large_asymmetry():
    text = "3\n0 0.5 0\n0.6 0 0\n0 0 0\n"
    with pytest.raises(InputError, match="asymmetry"):
        load_matrix(text)


def test_load_rejects_row_count_mismatch():
    with pytest.raises(InputError, match="rows"):
        load_matrix("3\n0 0 0\n0 0 0\n")


def test_load_rejects_entry_count_mismatch():
    with pytest.raises(InputError, match="entries"):
        load_matrix("2\n0 0\n0\n")


def test_render_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    p = rng.random((5, 5))
    p = (p + p.T) / 2
    np.fill_diagonal(p, 0.0)
    P = ProbabilityMatrix(p)
    again = load_matrix(render_matrix(P))
    assert np.abs(again.p - P.p).max() <= 1e-12


def test_matrix_rejects_nonzero_diagonal():
    p = np.zeros((3, 3))
    p[1, 1] = 0.2
    with pytest.raises(InputError, match="diagonal"):
        ProbabilityMatrix(p)
