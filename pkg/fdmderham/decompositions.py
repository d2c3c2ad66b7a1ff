'''
Space decompositions and the two-level hybrid preconditioner.

Patches are stars of mesh entities: vertex stars (PAFW), or stars of the
k-dimensional entities together with potential-space stars of the
(k-1)-dimensional entities (PH). The SC variants smooth the interface
Schur complement of the auxiliary operator and solve cell interiors
exactly.
'''
import dataclasses
import logging
import time
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .assembly import (assemble_auxiliary, assemble_embedding, assemble_p1,
                       assemble_potential_auxiliary, assemble_transfer)
from .elements import build_element
from .errors import InvalidArgument, NumericalFailure
from .helper.counters import FlopCounter, nbytes
from .krylov import lanczos_bounds
from .mesh import Entity, build_dofmap, star
from .sparse import cholesky, condense, icc_imposed, sc_pattern, submatrix

_logger = logging.getLogger(__name__)

DECOMPOSITIONS = ('pafw', 'ph', 'sc_pafw', 'sc_ph')
FACTORIZATIONS = ('chol', 'icc_sc')
STAR_KINDS = {0: 'vertex_star', 1: 'edge_star', 2: 'face_star', 3: 'cell_interior'}
# fill-reducing ordering of the Cholesky factor per patch kind
PATCH_ORDERINGS = {
    'vertex_star': 'nested_dissection',
    'edge_star': 'rcm',
    'face_star': 'natural',
    'cell_interior': 'natural',
}


@dataclasses.dataclass(frozen=True)
class PatchSet:
    kind: str
    form_degree: int
    centers: List[Entity]
    # sorted DOF indices per patch; interface positions when interface_only
    dofs: List[np.ndarray]
    interface_only: bool = False

    def __len__(self):
        return len(self.dofs)

    def covered(self, n):
        mask = np.zeros(n, dtype=bool)
        for idx in self.dofs:
            mask[idx] = True
        return mask

    def sizes(self):
        return np.array([len(d) for d in self.dofs], dtype=np.int64)


@dataclasses.dataclass(frozen=True)
class PatchCollection:
    decomposition: str
    primary: PatchSet
    potential: Optional[PatchSet] = None
    potential_dofmap: object = None
    interior: Optional[PatchSet] = None

    @property
    def condensed(self):
        return self.decomposition.startswith('sc_')


def check_decomposition(decomposition, k):
    if decomposition not in DECOMPOSITIONS:
        raise InvalidArgument(
            f'Unknown decomposition "{decomposition}", expected one of {DECOMPOSITIONS}')
    if k not in (0, 1, 2, 3):
        raise InvalidArgument(f'form degree must be in 0..3, got {k}')


def _centers(mesh, dim, dirichlet):
    ids = np.arange(mesh.count(dim))
    if dirichlet == 'all':
        ids = ids[~mesh.on_boundary(mesh.entities[dim])]
    return [Entity(dim, int(i)) for i in ids]


def _star_patches(mesh, dofmap, dim, kind, form_degree, select=None):
    centers, dofs = [], []
    for center in _centers(mesh, dim, dofmap.dirichlet):
        idx = dofmap.owned_free(star(mesh, center))
        if select is not None:
            idx = select(idx)
        if idx.size:
            centers.append(center)
            dofs.append(idx)
    return PatchSet(kind, form_degree, centers, dofs,
                    interface_only=select is not None)


def interface_positions(dofmap):
    '''
    Map from unconstrained DOF index to its position among interface DOFs
    (-1 for cell-interior DOFs)
    '''
    interface = np.flatnonzero(~dofmap.interior)
    pos = np.full(dofmap.nfree, -1, dtype=np.int64)
    pos[interface] = np.arange(interface.size)
    return pos


def interface_select(dofmap):
    '''
    Patch filter keeping interface DOFs, renumbered to interface positions
    '''
    pos = interface_positions(dofmap)

    def select(idx):
        p = pos[idx]
        return np.sort(p[p >= 0])
    return select


def build_patches(mesh, dofmap, decomposition, k) -> PatchCollection:
    check_decomposition(decomposition, k)
    condensed = decomposition.startswith('sc_')
    hiptmair = decomposition.endswith('ph') and k > 0
    select = interface_select(dofmap) if condensed else None

    dim = k if hiptmair else 0
    primary = _star_patches(mesh, dofmap, dim, STAR_KINDS[dim], k, select)

    potential = potential_dofmap = None
    if hiptmair and k < 3:
        potential_dofmap = build_dofmap(mesh, build_element(k - 1, dofmap.element.degree),
                                        dofmap.dirichlet)
        potential = _star_patches(
            mesh, potential_dofmap, k - 1, STAR_KINDS[k - 1], k - 1,
            interface_select(potential_dofmap) if condensed else None)

    interior = None
    if condensed:
        cells = [Entity(3, c) for c in range(mesh.ncells)]
        inner = [dofmap.owned_free([c]) for c in cells]
        interior = PatchSet('cell_interior', k, cells, inner)

    covered = primary.covered(primary_size(dofmap, condensed))
    if not covered.all():
        raise InvalidArgument(
            f'{decomposition} patches miss {int((~covered).sum())} DOFs; '
            f'the mesh is too coarse for this decomposition')
    _logger.debug(f'{decomposition} k={k}: {len(primary)} {primary.kind} patches'
                  + (f', {len(potential)} potential patches' if potential else ''))
    return PatchCollection(decomposition, primary, potential, potential_dofmap, interior)


def primary_size(dofmap, condensed):
    return int((~dofmap.interior).sum()) if condensed else dofmap.nfree


class PatchRelaxation:
    '''
    Additive Schwarz relaxation sum_i R_i^T A_i^{-1} R_i, optionally
    composed with a transfer D as D (sum_i ...) D^T
    '''

    def __init__(self, patches: PatchSet, factors, n, transfer=None, counter=None):
        self.patches = patches
        self.factors = factors
        self.transfer = None if transfer is None else sp.csr_matrix(transfer)
        self.counter = counter or FlopCounter()
        self.n = n if transfer is None else self.transfer.shape[0]

    def apply(self, r):
        r = np.asarray(r, dtype=float)
        if self.transfer is not None:
            self.counter.matvec(self.transfer)
            r = self.transfer.T @ r
        out = np.zeros_like(r)
        for idx, factor in zip(self.patches.dofs, self.factors):
            out[idx] += factor.solve(r[idx])
            self.counter.add(4 * factor.nnz)
        if self.transfer is not None:
            self.counter.matvec(self.transfer)
            out = self.transfer @ out
        return out

    @property
    def nnz(self):
        return int(sum(f.nnz for f in self.factors))

    @property
    def nbytes(self):
        return int(sum(f.nbytes for f in self.factors)) + nbytes(self.transfer)

    @property
    def shifts(self):
        return [f.shift for f in self.factors if getattr(f, 'shift', 0.0) > 0.0]


def _factorize(matrix, kind, form_degree, factorization, points=None,
               interior=None):
    if factorization == 'icc_sc' and kind == 'vertex_star' and form_degree == 0:
        mask = np.zeros(matrix.shape[0], dtype=bool) if interior is None else interior
        pattern, perm = sc_pattern(matrix, mask)
        return icc_imposed(matrix, pattern, perm)
    ordering = PATCH_ORDERINGS[kind]
    if ordering == 'nested_dissection' and points is None:
        ordering = 'rcm'
    return cholesky(matrix, ordering, points)


def build_relaxation(matrix, patches: PatchSet, factorization='chol',
                     points=None, interior=None, transfer=None,
                     counter=None) -> PatchRelaxation:
    '''
    Factorizes every patch submatrix of the (auxiliary or Schur) matrix.
    points are the DOF locations used by nested dissection, interior marks
    cell-interior DOFs for the condensed ICC pattern.
    '''
    if factorization not in FACTORIZATIONS:
        raise InvalidArgument(
            f'Unknown factorization "{factorization}", expected one of {FACTORIZATIONS}')
    matrix = sp.csr_matrix(matrix)
    factors = []
    for i, idx in enumerate(patches.dofs):
        sub = submatrix(matrix, idx)
        try:
            factors.append(_factorize(
                sub, patches.kind, patches.form_degree, factorization,
                None if points is None else points[idx],
                None if interior is None else interior[idx]))
        except NumericalFailure as exc:
            exc.diagnostics['patch'] = i
            exc.diagnostics['center'] = tuple(patches.centers[i])
            raise
    relaxation = PatchRelaxation(patches, factors, matrix.shape[0], transfer, counter)
    _logger.debug(f'{len(factors)} {patches.kind} factors, nnz={relaxation.nnz}')
    return relaxation


class Smoother:
    '''
    Additive combination of relaxation stages
    '''

    def __init__(self, stages):
        self.stages = list(stages)

    def apply(self, r):
        out = self.stages[0].apply(r)
        for stage in self.stages[1:]:
            out = out + stage.apply(r)
        return out


class Preconditioner:
    '''
    Two-level V(1,1) cycle: pre-smoothing with the patch relaxation, a
    coarse correction through the lowest-order space and post-smoothing,
    all on the auxiliary operator (or its interface Schur complement).
    '''

    def __init__(self, operator, smoother, coarse, embedding, condensed=None,
                 omega=1.0, counter=None):
        self.operator = sp.csr_matrix(operator)
        self.smoother = smoother
        self.coarse = coarse
        self.embedding = sp.csr_matrix(embedding)
        self.condensed = condensed
        self.omega = omega
        self.counter = counter or FlopCounter()
        self.n = (condensed.n if condensed is not None else self.operator.shape[0])
        self.collection = None
        self.setup_time = 0.0

    def coarse_correct(self, r):
        self.counter.matvec(self.embedding, 2)
        self.counter.add(4 * self.coarse.nnz)
        return self.embedding @ self.coarse.solve(self.embedding.T @ r)

    def smooth(self, r):
        return self.omega * self.smoother.apply(r)

    def cycle(self, r):
        if self.smoother is None:
            return self.coarse_correct(r)
        x = self.smooth(r)
        x = x + self.coarse_correct(r - self.operator @ x)
        x = x + self.smooth(r - self.operator @ x)
        self.counter.matvec(self.operator, 2)
        return x

    def apply(self, r):
        r = np.asarray(r, dtype=float)
        if self.condensed is None:
            return self.cycle(r)
        self.counter.matvec(self.condensed.linv_ii, 4)
        self.counter.matvec(self.condensed.p_gi)
        self.counter.matvec(self.condensed.p_ig)
        return self.condensed.solve(r, self.cycle)

    __call__ = apply

    def as_linear_operator(self):
        return LinearOperator((self.n, self.n), matvec=self.apply,
                              rmatvec=self.apply, dtype=float)

    @property
    def stages(self):
        return [] if self.smoother is None else self.smoother.stages

    def nnz_summary(self):
        out = {'coarse': int(self.coarse.nnz)}
        names = ('primary', 'potential')
        for name, stage in zip(names, self.stages):
            out[name] = stage.nnz
        return out

    def icc_shifts(self):
        return [s for stage in self.stages for s in stage.shifts]

    @property
    def memory_bytes(self):
        total = nbytes(self.operator) + nbytes(self.embedding) + self.coarse.nbytes
        total += sum(stage.nbytes for stage in self.stages)
        if self.condensed is not None:
            total += self.condensed.nbytes
        return int(total)


def build_two_level(operator, relaxation, coarse, embedding, condensed=None,
                    damping=None, seed=None, lanczos_steps=10,
                    counter=None) -> Preconditioner:
    '''
    V(1,1) preconditioner around the given smoother. For a condensed
    operator the cycle acts on the interface Schur complement and the coarse
    embedding is restricted to interface rows, R_0^T without the harmonic
    extension correction of R_0 R_G^T. The smoother is damped by
    the inverse Lanczos upper bound unless damping gives a fixed weight.
    '''
    embedding = sp.csr_matrix(embedding)
    cycle_operator = operator
    if condensed is not None:
        cycle_operator = condensed.schur
        embedding = embedding[condensed.interface]
    smoother = relaxation
    if relaxation is not None and not isinstance(relaxation, Smoother):
        smoother = Smoother(relaxation if isinstance(relaxation, (list, tuple))
                            else [relaxation])
    omega = 1.0
    if smoother is not None:
        if damping is not None:
            omega = float(damping)
        else:
            _, hi = lanczos_bounds(sp.csr_matrix(cycle_operator), smoother.apply,
                                   m=lanczos_steps, seed=seed)
            omega = 1.0 / hi
        _logger.debug(f'smoother damping {omega:.4g}')
    return Preconditioner(cycle_operator, smoother, coarse, embedding,
                          condensed, omega, counter)


def _potential_stage(handle, collection, condensed, factorization, counter):
    '''
    Relaxation D (sum_j R_j^T B_j^{-1} R_j) D^T over the potential space. For
    a condensed operator both spaces are reduced to their interfaces: the
    patches factor the Schur complement of B and D becomes D_GG.
    '''
    potential, potmap = assemble_potential_auxiliary(handle)
    transfer = assemble_transfer(handle.mesh, handle.k, handle.p, handle.dirichlet,
                                 handle.basis)
    points = potmap.free_points()
    interior = potmap.interior
    if condensed is not None:
        reduced = condense(potential, potmap.interior)
        potential = reduced.schur
        transfer = transfer[condensed.interface][:, reduced.interface]
        points = points[reduced.interface]
        interior = None
    return build_relaxation(potential, collection.potential, factorization,
                            points, interior, transfer, counter)


def build_preconditioner(handle, decomposition, factorization='chol',
                         damping=None, seed=None, lanczos_steps=10,
                         counter=None) -> Preconditioner:
    '''
    Full setup from an operator handle: auxiliary operator, optional static
    condensation, patch relaxations and the lowest-order coarse solve
    '''
    start = time.perf_counter()
    mesh, k, p = handle.mesh, handle.k, handle.p
    dofmap = handle.dofmap
    check_decomposition(decomposition, k)
    counter = counter or FlopCounter()
    aux = assemble_auxiliary(handle)

    coarse_map = build_dofmap(mesh, build_element(k, 1), handle.dirichlet)
    coarse_matrix = assemble_p1(mesh, k, handle.alpha, handle.beta, handle.dirichlet)
    coarse = cholesky(coarse_matrix, 'nested_dissection', coarse_map.free_points())
    embedding = assemble_embedding(mesh, k, p, handle.dirichlet, handle.basis)

    if p == 1:
        pre = Preconditioner(aux, None, coarse, embedding, counter=counter)
        pre.setup_time = time.perf_counter() - start
        return pre

    collection = build_patches(mesh, dofmap, decomposition, k)
    condensed = None
    smoothed = aux
    points = dofmap.free_points()
    interior = dofmap.interior
    if collection.condensed:
        condensed = condense(aux, dofmap.interior)
        smoothed = condensed.schur
        points = points[condensed.interface]
        interior = None
    if condensed is not None and condensed.interface.size == 0:
        # cell interiors carry every DOF; condensation is an exact solve
        pre = build_two_level(aux, None, coarse, embedding, condensed, counter=counter)
        pre.collection = collection
        pre.setup_time = time.perf_counter() - start
        return pre
    stages = [build_relaxation(smoothed, collection.primary, factorization,
                               points, interior, counter=counter)]
    if collection.potential is not None:
        stages.append(_potential_stage(handle, collection, condensed,
                                       factorization, counter))
    pre = build_two_level(aux, Smoother(stages), coarse, embedding, condensed,
                          damping, seed, lanczos_steps, counter)
    pre.collection = collection
    pre.setup_time = time.perf_counter() - start
    _logger.info(f'{decomposition} preconditioner k={k} p={p}: '
                 f'nnz {pre.nnz_summary()}, {pre.setup_time:.2f}s setup')
    return pre
