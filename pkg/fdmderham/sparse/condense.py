'''
Static condensation of cell-interior DOFs of the auxiliary operator.

With I the interior and G the interface indices, P^{-1} is applied through
the block LDL^T decomposition

    P^{-1} = R_I^T P_II^{-1} R_I + R_G^T S^{-1} R_G,  P_II = L L^T,
    S = P_GG - P_GI P_II^{-1} P_IG,  R_G = [-P_GI P_II^{-1}, I].
'''
import dataclasses
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..errors import InvalidArgument, InvalidStructure, NumericalFailure
from .csr import as_csr

_logger = logging.getLogger(__name__)

MAX_INTERIOR_BLOCK = 3


def _split(n, interior_mask):
    mask = np.asarray(interior_mask, dtype=bool)
    if mask.shape != (n,):
        raise InvalidArgument(f'classification has {mask.shape} entries, matrix has {n} rows')
    return np.flatnonzero(mask), np.flatnonzero(~mask)


def interior_groups(block):
    '''
    Connected components of the interior-interior coupling graph
    '''
    graph = sp.csr_matrix(block)
    graph.eliminate_zeros()
    if graph.shape[0] == 0:
        return 0, np.zeros(0, dtype=np.int64)
    ncomp, labels = connected_components(graph, directed=False)
    return ncomp, labels


def sc_pattern(matrix, interior_mask):
    '''
    Returns (pattern, perm): the original pattern joined with the symbolic
    pattern of the interface Schur complement, and the interiors-first
    permutation
    '''
    pat = sp.csr_matrix(matrix, dtype=bool)
    pat.eliminate_zeros()
    interior, interface = _split(pat.shape[0], interior_mask)
    perm = np.concatenate([interior, interface]).astype(np.int64)
    if interior.size == 0:
        return pat, perm
    ncomp, labels = interior_groups(pat[interior][:, interior])
    member = sp.csr_matrix((np.ones(interior.size, dtype=np.int64),
                            (np.arange(interior.size), labels)),
                           shape=(interior.size, ncomp))
    coupled = sp.csr_matrix(pat[interface][:, interior], dtype=np.int64) @ member
    schur = (coupled @ coupled.T).tocoo()
    fill = sp.csr_matrix((np.ones(schur.nnz, dtype=bool),
                          (interface[schur.row], interface[schur.col])),
                         shape=pat.shape)
    out = sp.csr_matrix(pat + fill, dtype=bool)
    out.sort_indices()
    return out, perm


def _lower_inverse(chol):
    '''
    Batched inverse of lower-triangular factors, shape (nblocks, s, s)
    '''
    size = chol.shape[1]
    inv = np.zeros_like(chol)
    for i in range(size):
        inv[:, i, i] = 1.0 / chol[:, i, i]
        for j in range(i):
            acc = np.einsum('bm,bm->b', chol[:, i, j:i], inv[:, j:i, j])
            inv[:, i, j] = -acc / chol[:, i, i]
    return inv


def interior_factor(block, max_block=MAX_INTERIOR_BLOCK):
    '''
    Inverse Cholesky factor L^{-1} (P_II = L L^T) of a matrix that decouples
    into dense SPD blocks of size at most max_block, as a block-diagonal
    sparse lower-triangular matrix
    '''
    block = sp.csr_matrix(block)
    n = block.shape[0]
    ncomp, labels = interior_groups(block)
    if n == 0:
        return sp.csr_matrix((0, 0))
    sizes = np.bincount(labels, minlength=ncomp)
    if sizes.max() > max_block:
        raise InvalidStructure(
            f'interior block couples {sizes.max()} DOFs, at most {max_block} '
            f'expected for an auxiliary operator')
    order = np.argsort(labels, kind='stable')
    starts = np.concatenate([[0], np.cumsum(sizes)])
    rows, cols, vals = [], [], []
    for size in np.unique(sizes):
        comps = np.flatnonzero(sizes == size)
        members = np.stack([order[starts[comps] + t] for t in range(size)], axis=1)
        r = np.repeat(members, size, axis=1)
        c = np.tile(members, (1, size))
        dense = np.asarray(block[r.ravel(), c.ravel()]).reshape(len(comps), size, size)
        try:
            chol = np.linalg.cholesky(dense)
        except np.linalg.LinAlgError:
            bad = [int(members[b, 0]) for b in range(len(comps))
                   if np.any(np.linalg.eigvalsh(dense[b]) <= 0.0)]
            raise NumericalFailure('interior block is not positive definite',
                                   size=int(size), row=bad[0] if bad else -1)
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(_lower_inverse(chol).ravel())
    out = sp.csr_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=(n, n))
    out.eliminate_zeros()
    out.sort_indices()
    return out


@dataclasses.dataclass(frozen=True)
class CondensedOperator:
    interior: np.ndarray
    interface: np.ndarray
    # P_II^{-1} = linv_ii^T linv_ii
    linv_ii: sp.csr_matrix
    p_ig: sp.csr_matrix
    p_gi: sp.csr_matrix
    schur: sp.csr_matrix

    @property
    def n(self):
        return len(self.interior) + len(self.interface)

    @property
    def nbytes(self):
        return int(sum(m.data.nbytes + m.indices.nbytes + m.indptr.nbytes
                       for m in (self.linv_ii, self.p_ig, self.p_gi, self.schur)))

    def interior_solve(self, b):
        '''
        P_II^{-1} b by the two triangular factors
        '''
        return self.linv_ii.T @ (self.linv_ii @ b)

    def restrict(self, r):
        '''
        Ideal restriction R_G r onto the interface
        '''
        r = np.asarray(r, dtype=float)
        return r[self.interface] - self.p_gi @ self.interior_solve(r[self.interior])

    def extend(self, g):
        '''
        Harmonic extension R_G^T g
        '''
        g = np.asarray(g, dtype=float)
        out = np.zeros((self.n,) + g.shape[1:])
        out[self.interface] = g
        out[self.interior] = -self.interior_solve(self.p_ig @ g)
        return out

    def solve(self, r, schur_solve):
        '''
        Applies P^{-1} with the given interface solver standing in for S^{-1}
        '''
        r = np.asarray(r, dtype=float)
        xi = self.interior_solve(r[self.interior])
        g = schur_solve(r[self.interface] - self.p_gi @ xi)
        out = np.zeros_like(r)
        out[self.interface] = g
        out[self.interior] = xi - self.interior_solve(self.p_ig @ g)
        return out


def condense(matrix, interior_mask) -> CondensedOperator:
    '''
    Static condensation of the masked DOFs, with the Schur complement formed
    as P_GG - W^T W for W = L^{-1} P_IG
    '''
    p = as_csr(matrix)
    interior, interface = _split(p.shape[0], interior_mask)
    linv = interior_factor(p[interior][:, interior])
    p_ig = sp.csr_matrix(p[interior][:, interface])
    p_gi = sp.csr_matrix(p[interface][:, interior])
    w = sp.csr_matrix(linv @ p_ig)
    schur = sp.csr_matrix(p[interface][:, interface] - w.T @ w)
    schur = 0.5 * (schur + schur.T)
    schur = sp.csr_matrix(schur)
    schur.sort_indices()
    _logger.debug(f'condensed {interior.size} interior DOFs, '
                  f'Schur complement {interface.size} x {interface.size} nnz={schur.nnz}')
    return CondensedOperator(interior=interior, interface=interface,
                             linv_ii=linv, p_ig=p_ig, p_gi=p_gi, schur=schur)
