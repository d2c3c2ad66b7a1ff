'''
Tensor-product k-form elements on the reference hexahedron [-1, 1]^3.

DOFs are ordered component-major, then lexicographically by (l, j, i) with
i (the x1 index) running fastest. A per-component matrix therefore is the
Kronecker product kron(M3, M2, M1) of per-direction factors.
'''
import dataclasses
from enum import Enum
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument
from .fdm1d import FdmBasis1D, QuadratureRule


class Family(Enum):
    CG = 1  # P_p factor, p+1 functions, indices 0 and p on the interface
    DG = 2  # DP_{p-1} factor, p functions, never on the interface


C, D = Family.CG, Family.DG

# per component, the families of the x1, x2, x3 factors
FAMILIES = {
    0: [(C, C, C)],
    1: [(D, C, C), (C, D, C), (C, C, D)],
    2: [(C, D, D), (D, C, D), (D, D, C)],
    3: [(D, D, D)],
}

SPACE_NAMES = {0: 'H(grad)', 1: 'H(curl)', 2: 'H(div)', 3: 'L2'}


def _check_form(k, allowed=(0, 1, 2, 3)):
    if k not in allowed:
        raise InvalidArgument(f'form degree must be one of {allowed}, got {k}')


def kron3(a3, a2, a1):
    '''
    Kronecker product with the x3 factor slowest and x1 fastest
    '''
    return sp.kron(a3, sp.kron(a2, a1, format='csr'), format='csr')


@dataclasses.dataclass(frozen=True)
class ElementSpace:
    form_degree: int
    degree: int
    families: Tuple[Tuple[Family, Family, Family], ...]
    # per DOF: component and (i, j, l) index triple
    dof_component: np.ndarray
    dof_index: np.ndarray
    interior_mask: np.ndarray
    offsets: np.ndarray

    @property
    def ndofs(self):
        return len(self.dof_component)

    @property
    def ncomponents(self):
        return len(self.families)

    @property
    def ninterior(self):
        return int(self.interior_mask.sum())

    def size(self, family):
        return self.degree + 1 if family is Family.CG else self.degree

    def shape(self, m):
        '''
        Per-component coefficient shape (n3, n2, n1)
        '''
        f1, f2, f3 = self.families[m]
        return (self.size(f3), self.size(f2), self.size(f1))

    def component_slice(self, m):
        return slice(self.offsets[m], self.offsets[m + 1])


def build_element(k: int, p: int) -> ElementSpace:
    _check_form(k)
    if p < 1:
        raise InvalidArgument(f'polynomial degree must be >= 1, got {p}')
    families = tuple(FAMILIES[k])
    comps, triples, interior = [], [], []
    offsets = [0]
    for m, fams in enumerate(families):
        n1, n2, n3 = [p + 1 if f is C else p for f in fams]
        ll, jj, ii = np.meshgrid(np.arange(n3), np.arange(n2), np.arange(n1),
                                 indexing='ij')
        idx = np.stack([ii.ravel(), jj.ravel(), ll.ravel()], axis=1)
        on_interface = np.zeros(len(idx), dtype=bool)
        for d, f in enumerate(fams):
            if f is C:
                on_interface |= (idx[:, d] == 0) | (idx[:, d] == p)
        comps.append(np.full(len(idx), m))
        triples.append(idx)
        interior.append(~on_interface)
        offsets.append(offsets[-1] + len(idx))
    return ElementSpace(
        form_degree=k, degree=p, families=families,
        dof_component=np.concatenate(comps),
        dof_index=np.concatenate(triples),
        interior_mask=np.concatenate(interior),
        offsets=np.array(offsets))


@dataclasses.dataclass(frozen=True)
class ReferenceDiff:
    form_degree: int
    matrix: sp.csr_matrix


def _directional(basis, fams, direction, sign=1.0):
    '''
    d/dx_direction acting on a component with the given families
    '''
    p = basis.degree
    ops = []
    for d, f in enumerate(fams):
        if d == direction:
            if f is not C:
                raise InvalidArgument('cannot differentiate a DP factor')
            ops.append(sp.csr_matrix(basis.D))
        else:
            ops.append(sp.identity(p + 1 if f is C else p, format='csr'))
    return sign * kron3(ops[2], ops[1], ops[0])


def reference_diff(k: int, p: int, basis: FdmBasis1D) -> ReferenceDiff:
    '''
    Exterior derivative d^k on the reference cell in FDM coefficients.

    The curl uses the orientation (d3 u2 - d2 u3, d1 u3 - d3 u1,
    d2 u1 - d1 u2) so that interior columns reproduce the FDM curl relations
    with positive leading terms.
    '''
    _check_form(k, (0, 1, 2))
    if basis.degree != p:
        raise InvalidArgument(f'basis degree {basis.degree} != {p}')
    fam = FAMILIES[k]
    if k == 0:
        mat = sp.vstack([_directional(basis, fam[0], d) for d in range(3)])
    elif k == 1:
        blocks = [[None, _directional(basis, fam[1], 2),
                   _directional(basis, fam[2], 1, -1.0)],
                  [_directional(basis, fam[0], 2, -1.0), None,
                   _directional(basis, fam[2], 0)],
                  [_directional(basis, fam[0], 1),
                   _directional(basis, fam[1], 0, -1.0), None]]
        mat = sp.bmat(blocks)
    else:
        mat = sp.hstack([_directional(basis, fam[d], d) for d in range(3)])
    mat = sp.csr_matrix(mat)
    mat.eliminate_zeros()
    mat.sort_indices()
    return ReferenceDiff(k, mat)


def broken_transform(k: int, p: int, basis: FdmBasis1D) -> sp.csr_matrix:
    '''
    Maps FDM coefficients of V^k(K) to coefficients in the L2-orthonormal
    broken basis
    '''
    _check_form(k)
    g1d = sp.csr_matrix(basis.G1d)
    blocks = []
    for fams in FAMILIES[k]:
        ops = [g1d if f is C else sp.identity(p, format='csr') for f in fams]
        blocks.append(kron3(ops[2], ops[1], ops[0]))
    mat = sp.csr_matrix(sp.block_diag(blocks))
    mat.eliminate_zeros()
    return mat


@dataclasses.dataclass(frozen=True)
class Tabulation1D:
    points: np.ndarray
    weights: np.ndarray
    s: np.ndarray
    ds: np.ndarray
    r: np.ndarray
    # L2-orthonormal broken counterpart of s
    sbar: np.ndarray

    def values(self, family: Family, broken=False):
        if family is Family.DG:
            return self.r
        return self.sbar if broken else self.s


@dataclasses.dataclass(frozen=True)
class ElementTabulation:
    element: ElementSpace
    table: Tabulation1D

    def component_tables(self, m, broken=False) -> List[np.ndarray]:
        '''
        Value tables (nq x n) for the x1, x2, x3 factors of component m
        '''
        return [self.table.values(f, broken)
                for f in self.element.families[m]]


def tabulate_element(k: int, p: int, basis: FdmBasis1D,
                     rule: QuadratureRule) -> ElementTabulation:
    s, ds = basis.tabulate_s(rule.points)
    table = Tabulation1D(points=rule.points, weights=rule.weights,
                         s=s, ds=ds, r=basis.tabulate_r(rule.points),
                         sbar=basis.tabulate_broken(rule.points))
    return ElementTabulation(build_element(k, p), table)
