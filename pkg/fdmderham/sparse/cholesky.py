'''
Sparse Cholesky factorization: elimination-tree symbolic phase followed by
an up-looking numeric phase on the predicted pattern.
'''
import dataclasses
import logging
from typing import List

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from ..errors import InvalidArgument, NumericalFailure
from .csr import as_csr
from .ordering import order

_logger = logging.getLogger(__name__)

# matrices smaller than this are factorized with a dense kernel
DENSE_CUTOFF = 12


@dataclasses.dataclass(frozen=True)
class SymbolicFactor:
    parent: np.ndarray
    # sorted strictly-lower row indices of each column of L
    structs: List[np.ndarray]

    @property
    def n(self):
        return len(self.parent)

    @property
    def nnz(self):
        return self.n + int(sum(len(s) for s in self.structs))

    def pattern(self):
        '''
        Lower-triangular pattern of L as a boolean CSC matrix
        '''
        colptr, rowind = _column_layout(self.structs)
        data = np.ones(len(rowind), dtype=bool)
        return sp.csc_matrix((data, rowind, colptr), shape=(self.n, self.n))


def symbolic_cholesky(matrix) -> SymbolicFactor:
    '''
    Column structures of L from the elimination tree: the structure of
    column j is the lower pattern of A[:, j] merged with the structures of
    its children in the tree.
    '''
    a = sp.csr_matrix(matrix)
    n = a.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    children = [[] for _ in range(n)]
    structs = []
    for j in range(n):
        cols = a.indices[a.indptr[j]:a.indptr[j + 1]]
        parts = [cols[cols > j]]
        for c in children[j]:
            s = structs[c]
            parts.append(s[s > j])
        st = np.unique(np.concatenate(parts)).astype(np.int64)
        structs.append(st)
        if st.size:
            parent[j] = st[0]
            children[st[0]].append(j)
    return SymbolicFactor(parent, structs)


def pattern_structs(pattern) -> List[np.ndarray]:
    '''
    Column structures of an imposed (symmetric) pattern
    '''
    low = sp.csc_matrix(sp.tril(sp.csr_matrix(pattern, dtype=bool), k=-1))
    low.sort_indices()
    return [low.indices[low.indptr[j]:low.indptr[j + 1]].astype(np.int64)
            for j in range(low.shape[0])]


def _column_layout(structs):
    n = len(structs)
    lens = np.array([len(s) for s in structs], dtype=np.int64)
    colptr = np.zeros(n + 1, dtype=np.int64)
    colptr[1:] = np.cumsum(lens + 1)
    rowind = np.empty(colptr[-1], dtype=np.int64)
    rowind[colptr[:-1]] = np.arange(n)
    for j, s in enumerate(structs):
        rowind[colptr[j] + 1:colptr[j + 1]] = s
    return colptr, rowind


def up_looking(matrix, structs, shift=0.0) -> sp.csr_matrix:
    '''
    Numeric factorization restricted to the given column structures.

    Row k of L solves a triangular system with the already computed rows;
    contributions falling outside the structures are dropped, so a full
    symbolic structure gives the exact factor and a smaller one an
    incomplete factor. Raises NumericalFailure naming the row on a
    nonpositive pivot.
    '''
    a = sp.csr_matrix(matrix)
    n = a.shape[0]
    colptr, rowind = _column_layout(structs)
    vals = np.zeros(len(rowind))
    lens = np.diff(colptr) - 1
    rows_all = (np.concatenate(structs) if n else np.zeros(0, np.int64)).astype(np.int64)
    cols_all = np.repeat(np.arange(n), lens)
    perm = np.lexsort((cols_all, rows_all))
    rowpat = cols_all[perm]
    rowptr = np.zeros(n + 1, dtype=np.int64)
    rowptr[1:] = np.cumsum(np.bincount(rows_all, minlength=n))
    fill = colptr[:-1] + 1
    x = np.zeros(n)
    for k in range(n):
        lo, hi = a.indptr[k], a.indptr[k + 1]
        cols = a.indices[lo:hi]
        keep = cols <= k
        x[cols[keep]] = a.data[lo:hi][keep]
        d = x[k] + shift
        x[k] = 0.0
        for i in rowpat[rowptr[k]:rowptr[k + 1]]:
            lki = x[i] / vals[colptr[i]]
            x[i] = 0.0
            c0, c1 = colptr[i] + 1, fill[i]
            if c1 > c0:
                x[rowind[c0:c1]] -= vals[c0:c1] * lki
            d -= lki * lki
            vals[c1] = lki
            fill[i] = c1 + 1
        if not d > 0.0:
            raise NumericalFailure('nonpositive pivot',
                                   row=int(k), pivot=float(d))
        vals[colptr[k]] = np.sqrt(d)
        x[:k] = 0.0
    factor = sp.csc_matrix((vals, rowind, colptr), shape=(n, n)).tocsr()
    factor.sort_indices()
    return factor


def _dense_factor(matrix, structs, shift=0.0):
    dense = sp.csr_matrix(matrix).toarray() + shift * np.eye(matrix.shape[0])
    try:
        chol = np.linalg.cholesky(dense)
    except np.linalg.LinAlgError:
        # locate the failing row for the diagnostics
        return up_looking(matrix, structs, shift)
    colptr, rowind = _column_layout(structs)
    cols = np.repeat(np.arange(len(structs)), np.diff(colptr))
    factor = sp.csc_matrix((chol[rowind, cols], rowind, colptr),
                           shape=dense.shape).tocsr()
    factor.sort_indices()
    return factor


def triangular_solve(lower, upper, b):
    if lower.shape[0] == 0:
        return np.zeros_like(b, dtype=float)
    y = spsolve_triangular(lower, b, lower=True)
    return spsolve_triangular(upper, y, lower=False)


@dataclasses.dataclass(frozen=True)
class CholFactor:
    perm: np.ndarray
    L: sp.csr_matrix
    nnz: int

    def __post_init__(self):
        object.__setattr__(self, '_upper', self.L.T.tocsr())

    @property
    def n(self):
        return len(self.perm)

    @property
    def nbytes(self):
        return int(self.L.data.nbytes + self.L.indices.nbytes
                   + self.L.indptr.nbytes + self.perm.nbytes)

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise InvalidArgument(f'right-hand side has {b.shape[0]} rows, '
                                  f'factor has {self.n}')
        out = np.empty_like(b)
        out[self.perm] = triangular_solve(self.L, self._upper, b[self.perm])
        return out

    def reconstruct(self):
        '''
        P^T L L^T P, for checks
        '''
        inv = np.argsort(self.perm)
        llt = (self.L @ self.L.T).tocsr()
        return llt[inv][:, inv]


def _resolve_perm(a, ordering, points):
    if isinstance(ordering, str):
        return order(a, ordering, points)
    perm = np.asarray(ordering, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(a.shape[0])):
        raise InvalidArgument('ordering is not a permutation')
    return perm


def cholesky(matrix, ordering='natural', points=None) -> CholFactor:
    '''
    Cholesky factor of the SPD matrix with the named fill-reducing ordering
    (or an explicit permutation)
    '''
    a = as_csr(matrix)
    perm = _resolve_perm(a, ordering, points)
    pa = a[perm][:, perm]
    symbolic = symbolic_cholesky(pa)
    try:
        if a.shape[0] < DENSE_CUTOFF:
            factor = _dense_factor(pa, symbolic.structs)
        else:
            factor = up_looking(pa, symbolic.structs)
    except NumericalFailure as exc:
        if 'row' in exc.diagnostics:
            exc.diagnostics['row'] = int(perm[exc.diagnostics['row']])
        raise
    _logger.debug(f'cholesky n={a.shape[0]} nnz(A)={a.nnz} nnz(L)={symbolic.nnz}')
    return CholFactor(perm=perm, L=factor, nnz=symbolic.nnz)


def weighted_symbolic_nnz(graph, sizes) -> int:
    '''
    nnz of the Cholesky factor of a matrix whose blocks (of the given sizes)
    are dense and coupled along the block graph, eliminated in the graph's
    row order
    '''
    sizes = np.asarray(sizes, dtype=np.int64)
    symbolic = symbolic_cholesky(graph)
    total = int(np.sum(sizes * (sizes + 1) // 2))
    for j, st in enumerate(symbolic.structs):
        total += int(sizes[j] * sizes[st].sum())
    return total
