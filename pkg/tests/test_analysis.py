import math

import numpy as np
import pytest

from l1fade.analysis import (
    ConvergenceRow,
    convergence_sweep,
    max_error,
    observed_order,
    spatial_sweep,
)
from l1fade.errors import DomainError, MissingExactSolutionError
from l1fade.model import example1, example2, example3
from l1fade.solver import solve


def test_max_error_self_comparison():
    h = solve(example1(0.5), 10, 20)
    lookup = dict(zip(h.grid.nodes, h.final))
    assert max_error(h, lambda x, t: np.array([lookup[v] for v in x])) == 0.0


def test_max_error_table_values():
    p = example1(0.5)
    assert max_error(solve(p, 10, 100, "quasi"), p.exact) == pytest.approx(5.5793e-03, rel=0.02)
    assert max_error(solve(p, 10, 100, "uniform"), p.exact) == pytest.approx(1.9875e-02, rel=0.02)


def test_max_error_needs_exact():
    h = solve(example3(0.5), 4, 10)
    with pytest.raises(MissingExactSolutionError):
        max_error(h, None)


def test_observed_order():
    assert observed_order(4e-3, 1e-3) == 2.0
    assert observed_order(5.5793e-03, 1.7121e-03) == pytest.approx(1.7044, abs=1e-4)
    assert observed_order(3e-5, 3e-5) == 0.0
    for bad in [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)]:
        with pytest.raises(DomainError):
            observed_order(*bad)


def test_sweep_example1_alpha09_quasi():
    report = convergence_sweep(example1(0.9), 100, [10, 20, 40, 80], "quasi")
    np.testing.assert_allclose(
        report.errors, [4.6556e-02, 2.1358e-02, 9.8735e-03, 4.5790e-03], rtol=0.02
    )
    assert report.orders[0] is None
    np.testing.assert_allclose(report.orders[1:], [1.1242, 1.1131, 1.1085], atol=0.05)
    assert report.refined == "N" and report.fixed == 100


def test_sweep_example2_alpha05_uniform():
    report = convergence_sweep(example2(0.5), 100, [10, 20, 40, 80], "uniform")
    np.testing.assert_allclose(
        report.errors, [1.3182e-03, 4.8998e-04, 1.7898e-04, 6.4671e-05], rtol=0.02
    )


def test_sweep_single_row():
    report = convergence_sweep(example2(0.5), 20, [10])
    assert len(report.rows) == 1 and report.rows[0].order is None


def test_sweep_requires_doubling_and_exact():
    with pytest.raises(ValueError):
        convergence_sweep(example2(0.5), 20, [10, 30])
    with pytest.raises(MissingExactSolutionError):
        convergence_sweep(example3(0.5), 20, [10, 20])


def test_spatial_sweep_single_row():
    report = spatial_sweep(example1(0.5), 20, [8])
    assert report.rows == (ConvergenceRow(8, report.rows[0].e_inf, None),)
    assert report.refined == "J"


def test_spatial_sweep_example2_is_j_independent():
    report = spatial_sweep(example2(0.5), 400, [8, 16, 32])
    # no spatial error: the error is the temporal one, whatever J
    assert max(report.errors) - min(report.errors) <= 1e-2 * min(report.errors)


def test_sweep_with_exact_reproduction_has_no_order():
    # u = x^2 with zero source under K1 = 0: steady, reproduced to roundoff
    from l1fade.model import ExplicitSource, ProblemSpec

    p = ProblemSpec(
        alpha=0.5, K1=0.0, K2=1.0, a=0.0, b=1.0, T=1.0,
        source=ExplicitSource(lambda x, t: -2.0),
        initial=lambda x: x**2,
        boundary_left=lambda t: 0.0,
        boundary_right=lambda t: 1.0,
        exact=lambda x, t: x**2,
    )
    report = spatial_sweep(p, 10, [4, 8])
    assert max(report.errors) <= 1e-14
    if 0.0 in report.errors:
        assert report.rows[1].order is None
