import numpy as np
import scipy.sparse as sp


class FlopCounter:
    '''
    Accumulates floating point operations under a fixed cost model: 2 flops
    per multiply-add in 1D contractions, pointwise weight products and
    sparse mat-vecs; 1 flop per entry in scatter-adds.
    '''

    def __init__(self):
        self.flops = 0

    def add(self, n):
        self.flops += int(n)

    def contraction(self, out_size, inner):
        self.add(2 * out_size * inner)

    def matvec(self, matrix, nvec=1):
        self.add(2 * matrix.nnz * nvec)

    def reset(self):
        self.flops = 0


def nbytes(obj):
    '''
    Bytes held by dense arrays and sparse matrices (memory proxy)
    '''
    if obj is None:
        return 0
    if sp.issparse(obj):
        obj = obj.tocsr()
        return obj.data.nbytes + obj.indices.nbytes + obj.indptr.nbytes
    if isinstance(obj, np.ndarray):
        return obj.nbytes
    if hasattr(obj, 'nbytes'):
        return int(obj.nbytes)
    if isinstance(obj, (list, tuple)):
        return sum(nbytes(o) for o in obj)
    return 0
