'''
Krylov solvers with the preconditioned residual norm sqrt(r^T P^{-1} r)
as stopping criterion, relative to the zero initial guess.
'''
import dataclasses
import logging
import time
from typing import Dict, List

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from .errors import InvalidArgument, NumericalFailure
from .helper.rng import make_rng

_logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-8
DEFAULT_MAXIT = 200
LANCZOS_STEPS = 10
# safety factors applied to the extreme Ritz values
LANCZOS_LOW = 0.9
LANCZOS_HIGH = 1.1


@dataclasses.dataclass
class SolverReport:
    method: str = ''
    converged: bool = False
    iterations: int = 0
    history: List[float] = dataclasses.field(default_factory=list)
    flops: int = 0
    nnz: Dict[str, int] = dataclasses.field(default_factory=dict)
    icc_shifts: List[float] = dataclasses.field(default_factory=list)
    memory_bytes: int = 0
    wall_time: float = 0.0
    setup_time: float = 0.0

    @property
    def reduction(self):
        if not self.history or self.history[0] == 0.0:
            return 0.0
        return self.history[-1] / self.history[0]

    def to_row(self):
        row = dict(method=self.method, converged=self.converged,
                   iterations=self.iterations, reduction=self.reduction,
                   flops=self.flops, memory_bytes=self.memory_bytes,
                   nnz_total=sum(self.nnz.values()),
                   max_icc_shift=max(self.icc_shifts, default=0.0),
                   setup_time=self.setup_time, wall_time=self.wall_time)
        for name, value in sorted(self.nnz.items()):
            row[f'nnz_{name}'] = value
        return row


def _as_apply(op):
    if op is None:
        return lambda v: np.array(v, dtype=float, copy=True)
    if callable(op) and not hasattr(op, 'shape'):
        return op
    return aslinearoperator(op).matvec


def _count(counter, n):
    if counter is not None:
        counter.add(n)


def _checked_sqrt(value, what, **diagnostics):
    if value < 0.0:
        raise NumericalFailure(f'{what} is not positive definite',
                               value=float(value), **diagnostics)
    return float(np.sqrt(value))


def pcg(apply_a, apply_pinv, b, rtol=DEFAULT_RTOL, maxit=DEFAULT_MAXIT,
        counter=None):
    '''
    Preconditioned conjugate gradients from the zero initial guess.

    Returns (x, SolverReport); running out of iterations is reported by
    converged=False.
    '''
    start = time.perf_counter()
    amul, pmul = _as_apply(apply_a), _as_apply(apply_pinv)
    b = np.asarray(b, dtype=float)
    n = len(b)
    report = SolverReport(method='pcg')
    x = np.zeros(n)
    r = b.copy()
    z = pmul(r)
    rz = float(r @ z)
    norm0 = _checked_sqrt(rz, 'preconditioner', iteration=0)
    report.history.append(norm0)
    if norm0 == 0.0:
        report.converged = True
        report.wall_time = time.perf_counter() - start
        return x, report
    p = z.copy()
    for it in range(1, maxit + 1):
        q = amul(p)
        curvature = float(p @ q)
        if not curvature > 0.0:
            raise NumericalFailure('operator is not positive definite',
                                   iteration=it, curvature=curvature)
        step = rz / curvature
        x += step * p
        r -= step * q
        z = pmul(r)
        rz_new = float(r @ z)
        norm = _checked_sqrt(rz_new, 'preconditioner', iteration=it)
        report.history.append(norm)
        report.iterations = it
        _count(counter, 10 * n)
        if norm <= rtol * norm0:
            report.converged = True
            break
        p = z + (rz_new / rz) * p
        rz = rz_new
    if not report.converged:
        _logger.warning(f'pcg did not converge in {maxit} iterations '
                        f'(reduction {report.reduction:.3g})')
    report.wall_time = time.perf_counter() - start
    return x, report


def minres(apply_a, apply_pinv, b, rtol=DEFAULT_RTOL, maxit=DEFAULT_MAXIT,
           counter=None):
    '''
    Preconditioned MINRES (Paige-Saunders recurrences) for symmetric,
    possibly indefinite A and SPD preconditioner
    '''
    start = time.perf_counter()
    amul, pmul = _as_apply(apply_a), _as_apply(apply_pinv)
    b = np.asarray(b, dtype=float)
    n = len(b)
    report = SolverReport(method='minres')
    x = np.zeros(n)
    r1 = b.copy()
    y = pmul(r1)
    beta1 = _checked_sqrt(float(r1 @ y), 'preconditioner', iteration=0)
    report.history.append(beta1)
    if beta1 == 0.0:
        report.converged = True
        report.wall_time = time.perf_counter() - start
        return x, report
    r2 = r1.copy()
    oldb, beta, dbar, epsln, phibar = 0.0, beta1, 0.0, 0.0, beta1
    cs, sn = -1.0, 0.0
    w = np.zeros(n)
    w2 = np.zeros(n)
    eps = np.finfo(float).eps
    for it in range(1, maxit + 1):
        v = y / beta
        y = amul(v)
        if it >= 2:
            y = y - (beta / oldb) * r1
        alfa = float(v @ y)
        y = y - (alfa / beta) * r2
        r1, r2 = r2, y
        y = pmul(r2)
        oldb = beta
        beta = _checked_sqrt(float(r2 @ y), 'preconditioner', iteration=it)
        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = max(np.hypot(gbar, beta), eps)
        cs, sn = gbar / gamma, beta / gamma
        phi = cs * phibar
        phibar = sn * phibar
        w1, w2 = w2, w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x += phi * w
        report.history.append(abs(phibar))
        report.iterations = it
        _count(counter, 14 * n)
        if abs(phibar) <= rtol * beta1:
            report.converged = True
            break
        if beta == 0.0:
            # invariant subspace found; the iterate is exact
            report.converged = True
            break
    if not report.converged:
        _logger.warning(f'minres did not converge in {maxit} iterations '
                        f'(reduction {report.reduction:.3g})')
    report.wall_time = time.perf_counter() - start
    return x, report


def _size(op, n):
    if n is not None:
        return int(n)
    if hasattr(op, 'shape'):
        return int(op.shape[0])
    raise InvalidArgument('operator size is unknown, pass n')


def chebyshev(apply_a, apply_pinv, interval, steps, n=None) -> LinearOperator:
    '''
    Fixed number of preconditioned Chebyshev steps from the zero initial
    guess, as a linear operator b -> x
    '''
    lo, hi = (float(v) for v in interval)
    if not 0.0 < lo < hi:
        raise InvalidArgument(f'Chebyshev interval must satisfy 0 < lo < hi, got {interval}')
    if steps < 1:
        raise InvalidArgument(f'Chebyshev needs at least one step, got {steps}')
    size = _size(apply_a, n)
    amul, pmul = _as_apply(apply_a), _as_apply(apply_pinv)
    theta = 0.5 * (hi + lo)
    delta = 0.5 * (hi - lo)
    sigma = theta / delta

    def matvec(b):
        b = np.asarray(b, dtype=float).ravel()
        x = np.zeros_like(b)
        r = b.copy()
        rho = 1.0 / sigma
        d = pmul(r) / theta
        for i in range(steps):
            x += d
            if i == steps - 1:
                break
            r -= amul(d)
            rho_new = 1.0 / (2.0 * sigma - rho)
            d = rho_new * rho * d + (2.0 * rho_new / delta) * pmul(r)
            rho = rho_new
        return x

    return LinearOperator((size, size), matvec=matvec, rmatvec=matvec,
                          dtype=float)


def lanczos_bounds(apply_a, apply_pinv, m=LANCZOS_STEPS, seed=None, n=None):
    '''
    Spectral interval estimate of P^{-1} A from m Lanczos steps in the
    P-inner product; breakdown ends the process early
    '''
    size = _size(apply_a, n)
    amul, pmul = _as_apply(apply_a), _as_apply(apply_pinv)
    rng = make_rng(seed, size, m)
    r = rng.uniform(-1.0, 1.0, size=size)
    z = pmul(r)
    beta = _checked_sqrt(float(r @ z), 'preconditioner')
    if beta == 0.0:
        raise InvalidArgument('Lanczos start vector is in the preconditioner kernel')
    v, w = z / beta, r / beta
    w_prev = np.zeros(size)
    beta_prev = 0.0
    alphas, betas = [], []
    for j in range(m):
        u = amul(v)
        alpha = float(v @ u)
        alphas.append(alpha)
        u = u - alpha * w - beta_prev * w_prev
        zz = pmul(u)
        b = float(u @ zz)
        if j == m - 1 or not b > 1e-24 * max(alpha * alpha, 1e-300):
            break
        b = np.sqrt(b)
        betas.append(b)
        w_prev, w = w, u / b
        v = zz / b
        beta_prev = b
    ritz = eigvalsh_tridiagonal(np.array(alphas), np.array(betas))
    lo, hi = LANCZOS_LOW * ritz[0], LANCZOS_HIGH * ritz[-1]
    _logger.debug(f'lanczos {len(alphas)} steps: bounds ({lo:.4g}, {hi:.4g})')
    return float(lo), float(hi)
