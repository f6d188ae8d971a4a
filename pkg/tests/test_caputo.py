import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1fade.caputo import (
    caputo_l1,
    gamma,
    generic_truncation_bound,
    l1_weights,
    memory_term,
    truncation_bound,
)
from l1fade.errors import DomainError
from l1fade.mesh import TemporalMesh, MeshKind, build_quasi_uniform_mesh, build_uniform_mesh

mpmath.mp.dps = 40


def mesh_from_steps(steps) -> TemporalMesh:
    steps = np.asarray(steps, dtype=np.float64)
    nodes = np.concatenate([[0.0], np.cumsum(steps)])
    return TemporalMesh(nodes=nodes, kind=MeshKind.QUASI_UNIFORM)


def weights_oracle(nodes, n, alpha):
    # closed form evaluated in 40-digit arithmetic on the same float nodes
    t = [mpmath.mpf(float(v)) for v in nodes]
    p = 1 - mpmath.mpf(alpha)
    return [
        float(((t[n] - t[k - 1]) ** p - (t[n] - t[k]) ** p) / (t[k] - t[k - 1]))
        for k in range(1, n + 1)
    ]


# {{{ gamma


def test_gamma_known_values():
    assert gamma(1.0) == 1.0
    assert gamma(0.5) == pytest.approx(1.772453850905516, rel=1e-15)
    assert gamma(1.5) == pytest.approx(0.886226925452758, rel=1e-15)


def test_gamma_against_mpmath():
    xs = np.concatenate([np.linspace(1e-3, 20.0, 997), [0.1, 0.5, 1.7, 2.5, 3.9, 5.5, 6.0]])
    for x in xs:
        ref = mpmath.gamma(mpmath.mpf(float(x)))
        assert abs(gamma(x) - float(ref)) <= 1e-13 * abs(float(ref))


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan")])
def test_gamma_domain(x):
    with pytest.raises(DomainError):
        gamma(x)


# }}}

# {{{ weights


def test_weights_first_level_uniform():
    w = l1_weights(build_uniform_mesh(4, 1.0), 1, 0.5)
    assert w.weights[0] == pytest.approx(2.0, rel=1e-15)


def test_weights_second_level():
    w = l1_weights(build_uniform_mesh(2, 2.0), 2, 0.5)
    np.testing.assert_allclose(w.weights, weights_oracle([0.0, 1.0, 2.0], 2, 0.5), rtol=1e-14)
    assert w.weights[0] == pytest.approx(0.41421356237309503, rel=1e-14)
    assert w.weights[1] == 1.0


def test_weights_quasi_uniform_last():
    mesh = build_quasi_uniform_mesh(10, 1.0)
    w = l1_weights(mesh, 10, 0.5)
    assert w.weights[-1] == pytest.approx(math.sqrt(55.0), rel=1e-12)
    assert w.weights[-1] == pytest.approx(7.416198487095663, rel=1e-12)
    np.testing.assert_allclose(w.weights, weights_oracle(mesh.nodes, 10, 0.5), rtol=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
def test_weights_reject_alpha(alpha):
    with pytest.raises(DomainError, match=r"\(0, 1\)"):
        l1_weights(build_uniform_mesh(4, 1.0), 1, alpha)


def test_weights_reject_level():
    mesh = build_uniform_mesh(4, 1.0)
    with pytest.raises(ValueError):
        l1_weights(mesh, 0, 0.5)
    with pytest.raises(ValueError):
        l1_weights(mesh, 5, 0.5)


@settings(max_examples=60, deadline=None)
@given(
    steps=st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=50),
    alpha=st.sampled_from([0.1, 0.25, 0.5, 0.75, 0.9]),
)
def test_weight_invariants_random_meshes(steps, alpha):
    mesh = mesh_from_steps(steps)
    for n in range(1, mesh.N + 1):
        w = l1_weights(mesh, n, alpha)
        assert np.all(w.weights > 0)
        assert np.all(np.diff(w.weights) > 0)
        dt = mesh.step(n)
        assert w.weights[-1] == pytest.approx(dt**-alpha, rel=1e-12)
        assert dt**alpha * w.increments().sum() == pytest.approx(1.0, abs=1e-12)


def test_weights_match_oracle_on_random_mesh():
    rng = np.random.default_rng(3)
    mesh = mesh_from_steps(rng.uniform(0.01, 0.2, 30))
    for alpha in (0.1, 0.5, 0.9):
        for n in (1, 7, 30):
            w = l1_weights(mesh, n, alpha)
            np.testing.assert_allclose(w.weights, weights_oracle(mesh.nodes, n, alpha), rtol=1e-11)


# }}}

# {{{ L1 derivative


def test_l1_constant_vanishes():
    mesh = build_quasi_uniform_mesh(12, 1.0)
    for n in range(1, 13):
        assert caputo_l1(np.full(n + 1, 3.5), mesh, n, 0.4) == 0.0


def test_l1_linear_function():
    mesh = build_quasi_uniform_mesh(16, 1.0)
    value = caputo_l1(mesh.nodes, mesh, 16, 0.3)
    expected = float(1 / mpmath.gamma(mpmath.mpf("1.7")))
    assert expected == pytest.approx(1.100547, abs=1e-6)
    assert value == pytest.approx(expected, abs=1e-12)


def test_l1_quadratic_within_final_bound():
    mesh = build_quasi_uniform_mesh(160, 1.0)
    value = caputo_l1(mesh.nodes**2, mesh, 160, 0.5)
    expected = float(2 / mpmath.gamma(mpmath.mpf("2.5")))
    assert expected == pytest.approx(1.504505, abs=1e-6)
    assert abs(value - expected) <= truncation_bound(0.5, 1.0, 160, 2.0, "final")


def test_l1_vectorised_over_trailing_axes():
    mesh = build_uniform_mesh(8, 1.0)
    v = np.stack([mesh.nodes**2, mesh.nodes**3], axis=1)
    both = caputo_l1(v, mesh, 8, 0.5)
    assert both[0] == caputo_l1(v[:, 0], mesh, 8, 0.5)
    assert both[1] == caputo_l1(v[:, 1], mesh, 8, 0.5)


def test_l1_length_mismatch():
    mesh = build_uniform_mesh(8, 1.0)
    with pytest.raises(ValueError):
        caputo_l1(np.zeros(5), mesh, 5, 0.5)


@settings(max_examples=40, deadline=None)
@given(
    steps=st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=40),
    alpha=st.sampled_from([0.1, 0.25, 0.5, 0.75, 0.9]),
    slope=st.floats(-10, 10),
    offset=st.floats(-10, 10),
)
def test_l1_exact_for_affine(steps, alpha, slope, offset):
    mesh = mesh_from_steps(steps)
    v = offset + slope * mesh.nodes
    for n in range(1, mesh.N + 1):
        exact = slope * mesh.nodes[n] ** (1 - alpha) / gamma(2 - alpha)
        assert abs(caputo_l1(v[: n + 1], mesh, n, alpha) - exact) <= 1e-10


@pytest.mark.parametrize("power", [2, 3])
@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_l1_error_within_truncation_bound(power, alpha):
    for N in (10, 20, 40, 80, 160):
        mesh = build_quasi_uniform_mesh(N, 1.0)
        t = mesh.nodes
        v = t**power
        c = math.gamma(power + 1) / gamma(power + 1 - alpha)
        for n in range(1, N + 1):
            err = abs(caputo_l1(v[: n + 1], mesh, n, alpha) - c * t[n] ** (power - alpha))
            M2 = power * (power - 1) * t[n] ** (power - 2)
            level = "final" if n == N else "interior"
            assert err <= truncation_bound(alpha, 1.0, N, M2, level)


def test_l1_cubic_final_slope():
    errors = []
    Ns = [10, 20, 40, 80, 160, 320]
    for N in Ns:
        mesh = build_quasi_uniform_mesh(N, 1.0)
        errors.append(abs(caputo_l1(mesh.nodes**3, mesh, N, 0.5) - 6 / gamma(3.5)))
    slopes = np.diff(np.log2(errors)) / np.diff(np.log2(Ns))
    assert abs(slopes[-1] + 2.0) <= 0.25


# }}}

# {{{ memory operator


def test_memory_first_level():
    mesh = build_uniform_mesh(3, 3.0)
    w = l1_weights(mesh, 1, 0.5)
    assert memory_term([2.5], w, mesh.step(1)) == 2.5


def test_memory_constant_history():
    mesh = build_quasi_uniform_mesh(9, 1.0)
    for n in range(1, 10):
        w = l1_weights(mesh, n, 0.7)
        assert memory_term(np.full(n, -1.25), w, mesh.step(n)) == -1.25


def test_memory_second_level():
    mesh = build_uniform_mesh(2, 2.0)
    w = l1_weights(mesh, 2, 0.5)
    value = memory_term([0.0, 1.0], w, 1.0)

    # independent summation in 40-digit arithmetic
    U = [mpmath.mpf(0), mpmath.mpf(1)]
    T = weights_oracle([0.0, 1.0, 2.0], 2, 0.5)
    oracle = U[1] - sum(mpmath.mpf(T[k - 1]) * (U[k] - U[k - 1]) for k in range(1, 2))
    assert value == pytest.approx(float(oracle), abs=1e-15)
    assert value == pytest.approx(2 - math.sqrt(2), abs=1e-12)


def test_memory_matches_direct_sum_on_random_history():
    rng = np.random.default_rng(7)
    mesh = build_quasi_uniform_mesh(25, 1.0)
    U = rng.normal(size=(25, 3))
    w = l1_weights(mesh, 25, 0.35)
    dt = mesh.step(25)
    got = memory_term(U, w, dt)
    for j in range(3):
        s = sum(w.weights[k - 1] * (U[k, j] - U[k - 1, j]) for k in range(1, 25))
        assert got[j] == pytest.approx(U[24, j] - dt**0.35 * s, rel=1e-12, abs=1e-12)
    np.testing.assert_array_equal(memory_term(U, w, dt, increments=np.diff(U, axis=0)), got)


def test_memory_length_mismatch():
    mesh = build_uniform_mesh(4, 1.0)
    w = l1_weights(mesh, 3, 0.5)
    with pytest.raises(ValueError):
        memory_term([0.0, 1.0], w, 0.25)


# }}}

# {{{ truncation bounds


def test_truncation_bound_zero_curvature():
    assert truncation_bound(0.5, 1.0, 10, 0.0, "interior") == 0.0
    assert truncation_bound(0.5, 1.0, 10, 0.0, "final") == 0.0


def test_truncation_bound_final_value():
    a = mpmath.mpf("0.5")
    ref = (1 / mpmath.gamma(1 - a)) * (1 + a) / (1 - a) * 2 ** (1 - a) * 2 * mpmath.mpf(10) ** -2
    got = truncation_bound(0.5, 1.0, 10, 2.0, "final")
    assert got == pytest.approx(float(ref), rel=1e-14)
    assert got == pytest.approx(0.047873, abs=1e-6)


def test_truncation_bound_interior_value():
    a = mpmath.mpf("0.3")
    ref = (
        (1 / mpmath.gamma(1 - a))
        * (1 + a + 2 ** (1 - a) / (1 - a))
        * 3
        * mpmath.mpf(2) ** (2 - a)
        * mpmath.mpf(21) ** (a - 2)
    )
    assert truncation_bound(0.3, 2.0, 20, 3.0) == pytest.approx(float(ref), rel=1e-14)


def test_truncation_bound_scaling():
    ratio = truncation_bound(0.5, 1.0, 2001, 1.0) / truncation_bound(0.5, 1.0, 1000, 1.0)
    assert ratio == pytest.approx(2**-1.5, rel=1e-12)
    ratio = truncation_bound(0.5, 1.0, 20, 1.0, "final") / truncation_bound(0.5, 1.0, 10, 1.0, "final")
    assert ratio == pytest.approx(0.25, rel=1e-14)


@pytest.mark.parametrize(
    "args", [(1.0, 1.0, 10, 1.0), (0.5, 0.0, 10, 1.0), (0.5, 1.0, 0, 1.0), (0.5, 1.0, 10, -1.0)]
)
def test_truncation_bound_domain(args):
    with pytest.raises(DomainError):
        truncation_bound(*args)


def test_generic_bound_holds_on_uniform_mesh():
    for N in (10, 40):
        mesh = build_uniform_mesh(N, 1.0)
        t = mesh.nodes
        for n in range(1, N + 1):
            err = abs(caputo_l1(t[: n + 1] ** 2, mesh, n, 0.5) - 2 / gamma(2.5) * t[n] ** 1.5)
            assert err <= generic_truncation_bound(mesh, n, 0.5, 2.0)


# }}}


def test_memory_sum_complements_memory_term():
    from l1fade.caputo import memory_sum

    mesh = build_quasi_uniform_mesh(6, 1.0)
    rng = np.random.default_rng(3)
    U = rng.normal(size=(7, 4))
    for n in range(1, 7):
        w = l1_weights(mesh, n, 0.4)
        s = memory_sum(U[:n], w, mesh.step(n))
        np.testing.assert_allclose(U[n - 1] - s, memory_term(U[:n], w, mesh.step(n)), rtol=1e-15)
        if n == 1:
            np.testing.assert_array_equal(s, 0.0)
