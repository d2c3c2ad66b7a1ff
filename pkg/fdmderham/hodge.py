'''
Mixed Hodge Laplacian on V^{k-1} x V^k without boundary conditions:

    -(tau, sigma) + (d tau, u)  = 0
    (v, d sigma)  + (d v, d u)  = F(v)

solved by MINRES with a block-diagonal preconditioner made of Chebyshev
accelerated Riesz-map solvers.
'''
import logging
import time

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .assembly import (OperatorHandle, assemble_rhs, assemble_transfer,
                       broken_mass_diagonal)
from .decompositions import build_preconditioner
from .errors import InvalidArgument
from .helper.counters import FlopCounter
from .krylov import (DEFAULT_MAXIT, DEFAULT_RTOL, SolverReport, chebyshev,
                     lanczos_bounds, minres)

_logger = logging.getLogger(__name__)

CHEBYSHEV_STEPS = 4


class HodgeSystem:

    def __init__(self, mesh, k, p):
        if k not in (1, 2, 3):
            raise InvalidArgument(f'Hodge Laplacian needs k in (1, 2, 3), got {k}')
        self.mesh = mesh
        self.k = k
        self.p = p
        self.counter = FlopCounter()
        self.potential_mass = OperatorHandle(mesh, k - 1, p, alpha=0.0, beta=1.0,
                                             dirichlet='none', counter=self.counter)
        self.mass = OperatorHandle(mesh, k, p, alpha=0.0, beta=1.0,
                                   dirichlet='none', counter=self.counter)
        self.stiffness = None
        if k < 3:
            self.stiffness = OperatorHandle(mesh, k, p, alpha=1.0, beta=0.0,
                                            dirichlet='none', counter=self.counter)
        self.transfer = assemble_transfer(mesh, k, p, 'none', self.mass.basis)
        self.n1 = self.potential_mass.size
        self.n2 = self.mass.size

    @property
    def size(self):
        return self.n1 + self.n2

    def split(self, x):
        return x[:self.n1], x[self.n1:]

    def coupling(self, sigma):
        '''
        (2,1) block: M^k D sigma
        '''
        self.counter.matvec(self.transfer)
        return self.mass.apply(self.transfer @ sigma)

    def coupling_transpose(self, u):
        self.counter.matvec(self.transfer)
        return self.transfer.T @ self.mass.apply(u)

    def apply(self, x):
        sigma, u = self.split(np.asarray(x, dtype=float))
        top = -self.potential_mass.apply(sigma) + self.coupling_transpose(u)
        bottom = self.coupling(sigma)
        if self.stiffness is not None:
            bottom = bottom + self.stiffness.apply(u)
        return np.concatenate([top, bottom])

    def as_linear_operator(self):
        return LinearOperator((self.size, self.size), matvec=self.apply,
                              rmatvec=self.apply, dtype=float)

    def rhs(self, seed=None):
        riesz = self.mass.with_coefficients(1.0, 1.0)
        return np.concatenate([np.zeros(self.n1), assemble_rhs(riesz, seed)])


def build_hodge(mesh, k, p) -> HodgeSystem:
    return HodgeSystem(mesh, k, p)


def dense_saddle_matrix(system: HodgeSystem):
    '''
    Dense saddle matrix from unit vectors; small problems only
    '''
    m1 = np.column_stack([system.potential_mass.apply(e) for e in np.eye(system.n1)])
    m2 = np.column_stack([system.mass.apply(e) for e in np.eye(system.n2)])
    d = system.transfer.toarray()
    coupling = m2 @ d
    if system.stiffness is not None:
        stiff = np.column_stack([system.stiffness.apply(e) for e in np.eye(system.n2)])
    else:
        stiff = np.zeros((system.n2, system.n2))
    out = np.block([[-m1, coupling.T], [coupling, stiff]])
    return 0.5 * (out + out.T)


def mass_diagonal(handle):
    '''
    Diagonal of the assembled mass matrix of V^k in the FDM basis
    '''
    local = broken_mass_diagonal(handle, handle.k, handle.mass_weights)
    cf = handle.dofmap.cell_free
    keep = cf >= 0
    diag = np.zeros(handle.size)
    np.add.at(diag, cf[keep], local[keep])
    return diag


class BlockPreconditioner:

    def __init__(self, n1, first, second, blocks=()):
        self.n1 = n1
        self.first = first
        self.second = second
        self.blocks = list(blocks)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        return np.concatenate([self.first(x[:self.n1]), self.second(x[self.n1:])])

    def nnz_summary(self):
        out = {}
        for name, pre in self.blocks:
            for key, value in pre.nnz_summary().items():
                out[f'{name}_{key}'] = value
        return out

    @property
    def memory_bytes(self):
        return int(sum(pre.memory_bytes for _, pre in self.blocks))

    def icc_shifts(self):
        return [s for _, pre in self.blocks for s in pre.icc_shifts()]


def _riesz_block(mesh, k, p, decomposition, factorization, steps,
                 lanczos_steps, seed, counter):
    handle = OperatorHandle(mesh, k, p, alpha=1.0, beta=1.0, dirichlet='none',
                            counter=counter)
    pre = build_preconditioner(handle, decomposition, factorization,
                               seed=seed, lanczos_steps=lanczos_steps,
                               counter=counter)
    op = handle.as_linear_operator()
    bounds = lanczos_bounds(op, pre.apply, m=lanczos_steps, seed=seed)
    _logger.debug(f'Hodge block k={k}: Chebyshev interval {bounds}')
    return chebyshev(op, pre.apply, bounds, steps).matvec, pre


def build_hodge_preconditioner(system: HodgeSystem, decomposition='sc_ph',
                               factorization='chol', steps=CHEBYSHEV_STEPS,
                               lanczos_steps=10, seed=None):
    k, p, mesh = system.k, system.p, system.mesh
    counter = system.counter
    first, pre1 = _riesz_block(mesh, k - 1, p, decomposition, factorization,
                               steps, lanczos_steps, seed, counter)
    blocks = [('potential', pre1)]
    if k == 3:
        inv = 1.0 / mass_diagonal(system.mass)

        def second(r):
            counter.add(len(r))
            return inv * r
    else:
        second, pre2 = _riesz_block(mesh, k, p, decomposition, factorization,
                                    steps, lanczos_steps, seed, counter)
        blocks.append(('form', pre2))
    return BlockPreconditioner(system.n1, first, second, blocks)


def solve_hodge(system: HodgeSystem, decomposition='sc_ph', factorization='chol',
                rtol=DEFAULT_RTOL, maxit=DEFAULT_MAXIT, seed=None,
                steps=CHEBYSHEV_STEPS, lanczos_steps=10):
    '''
    Returns (sigma, u, SolverReport)
    '''
    start = time.perf_counter()
    pre = build_hodge_preconditioner(system, decomposition, factorization,
                                     steps, lanczos_steps, seed)
    setup = time.perf_counter() - start
    system.counter.reset()
    x, report = minres(system.apply, pre.apply, system.rhs(seed), rtol, maxit,
                       counter=system.counter)
    report = _finish(report, system, pre, setup)
    sigma, u = system.split(x)
    return sigma, u, report


def _finish(report: SolverReport, system, pre, setup):
    report.flops = system.counter.flops
    report.nnz = pre.nnz_summary()
    report.icc_shifts = pre.icc_shifts()
    report.memory_bytes = pre.memory_bytes
    report.setup_time = setup
    return report
