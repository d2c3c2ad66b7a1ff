import numpy as np
import pytest
import scipy.sparse as sp

from fdmderham.errors import InvalidArgument, NumericalFailure
from fdmderham.helper.counters import FlopCounter
from fdmderham.krylov import (SolverReport, chebyshev, lanczos_bounds, minres,
                              pcg)

import testcommon


def _textbook_pcg(a, minv, b, rtol, maxit):
    x = np.zeros_like(b)
    r = b.copy()
    z = minv * r
    p = z.copy()
    rz = r @ z
    norm0 = np.sqrt(rz)
    for it in range(1, maxit + 1):
        q = a @ p
        alpha = rz / (p @ q)
        x = x + alpha * p
        r = r - alpha * q
        z = minv * r
        rz_new = r @ z
        if np.sqrt(rz_new) <= rtol * norm0:
            return x, it
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxit


def test_pcg_identity():
    b = np.arange(1.0, 6.0)
    x, report = pcg(np.eye(5), None, b)
    np.testing.assert_allclose(x, b)
    assert report.converged and report.iterations == 1


def test_pcg_exact_preconditioner():
    d = np.arange(1.0, 11.0)
    _, report = pcg(np.diag(d), lambda r: r / d, np.ones(10))
    assert report.iterations == 1


def test_pcg_matches_reference():
    a = testcommon.laplacian_2d(16)
    minv = 1.0 / a.diagonal()
    b = np.random.default_rng(0).standard_normal(a.shape[0])
    counter = FlopCounter()
    x, report = pcg(a, lambda r: minv * r, b, rtol=1e-10, maxit=500,
                    counter=counter)
    ref, its = _textbook_pcg(a, minv, b, 1e-10, 500)
    assert report.iterations == its
    np.testing.assert_allclose(x, ref, rtol=1e-8, atol=1e-12)
    assert counter.flops > 0
    assert report.reduction <= 1e-10


def test_pcg_zero_rhs():
    x, report = pcg(np.eye(3), None, np.zeros(3))
    assert report.converged and report.iterations == 0
    assert not x.any()


def test_pcg_indefinite():
    with pytest.raises(NumericalFailure) as exc:
        pcg(np.diag([1.0, -1.0]), None, np.ones(2))
    assert exc.value.diagnostics['iteration'] == 1


def test_pcg_indefinite_preconditioner():
    with pytest.raises(NumericalFailure):
        pcg(np.eye(2), lambda r: -r, np.ones(2))


def test_pcg_maxit():
    a = testcommon.laplacian_1d(50)
    _, report = pcg(a, None, np.ones(50), maxit=3)
    assert not report.converged
    assert report.iterations == 3
    assert len(report.history) == 4


def test_minres_spd():
    a = testcommon.laplacian_2d(8)
    minv = 1.0 / a.diagonal()
    b = np.random.default_rng(1).standard_normal(a.shape[0])
    x, report = minres(a, lambda r: minv * r, b, rtol=1e-10)
    assert report.converged
    np.testing.assert_allclose(x, np.linalg.solve(a.toarray(), b), rtol=1e-6,
                               atol=1e-8)
    history = np.array(report.history)
    assert np.all(np.diff(history) <= 1e-12 * history[0])


def test_minres_indefinite():
    x, report = minres(np.diag([1.0, -1.0]), None, np.ones(2))
    assert report.converged
    assert report.iterations <= 2
    np.testing.assert_allclose(x, [1.0, -1.0], atol=1e-12)


def test_minres_saddle_point():
    rng = np.random.default_rng(2)
    m = np.diag(rng.uniform(1.0, 2.0, 6))
    b = rng.standard_normal((2, 6))
    k = np.block([[m, b.T], [b, np.zeros((2, 2))]])
    rhs = rng.standard_normal(8)
    x, report = minres(k, None, rhs, rtol=1e-12)
    assert report.converged
    np.testing.assert_allclose(x, np.linalg.solve(k, rhs), rtol=1e-8, atol=1e-10)


def test_chebyshev_single_step():
    a = np.diag([1.0, 2.0, 3.0])
    op = chebyshev(a, None, (1.0, 3.0), 1)
    b = np.array([1.0, 1.0, 1.0])
    np.testing.assert_allclose(op.matvec(b), b / 2.0)


def test_chebyshev_exact_preconditioner():
    d = np.arange(1.0, 6.0)
    op = chebyshev(np.diag(d), lambda r: r / d, (0.99, 1.01), 3)
    b = np.ones(5)
    np.testing.assert_allclose(op.matvec(b), b / d, rtol=1e-12)


def test_chebyshev_error_bound():
    lo, hi, steps = 1.0, 10.0, 4
    d = np.linspace(lo, hi, 10)
    op = chebyshev(np.diag(d), None, (lo, hi), steps)
    exact = np.zeros(10)
    exact[0] = 1.0
    error = exact - op.matvec(d * exact)
    ratio = np.sqrt(error @ (d * error)) / np.sqrt(exact @ (d * exact))
    sigma = (hi + lo) / (hi - lo)
    bound = 1.0 / np.cosh(steps * np.arccosh(sigma))
    assert ratio == pytest.approx(bound, rel=1e-8)
    # every eigencomponent is damped at least as much
    x = np.ones(10)
    error = x - op.matvec(d * x)
    assert np.sqrt(error @ (d * error)) <= bound * np.sqrt(x @ (d * x)) * (1 + 1e-10)


def test_chebyshev_invalid():
    with pytest.raises(InvalidArgument):
        chebyshev(np.eye(2), None, (0.0, 1.0), 2)
    with pytest.raises(InvalidArgument):
        chebyshev(np.eye(2), None, (2.0, 1.0), 2)
    with pytest.raises(InvalidArgument):
        chebyshev(np.eye(2), None, (0.5, 1.0), 0)
    with pytest.raises(InvalidArgument):
        chebyshev(lambda v: v, None, (0.5, 1.0), 2)


def test_lanczos_exact_preconditioner():
    d = np.arange(1.0, 6.0)
    lo, hi = lanczos_bounds(np.diag(d), lambda r: r / d, m=10, seed=0)
    assert lo == pytest.approx(0.9)
    assert hi == pytest.approx(1.1)


def test_lanczos_spectrum():
    d = np.arange(1.0, 101.0)
    a = sp.diags(d)
    lo, hi = lanczos_bounds(a, None, m=10, seed=3)
    assert hi >= 99.0
    assert 0.0 < lo <= 9.0
    assert (lo, hi) == lanczos_bounds(a, None, m=10, seed=3)


def test_report_row():
    report = SolverReport(method='pcg', converged=True, iterations=3,
                          history=[1.0, 0.1, 1e-3, 1e-9],
                          nnz={'coarse': 10, 'primary': 5}, icc_shifts=[1e-9])
    row = report.to_row()
    assert row['nnz_total'] == 15
    assert row['nnz_coarse'] == 10
    assert row['max_icc_shift'] == 1e-9
    assert row['reduction'] == pytest.approx(1e-9)
