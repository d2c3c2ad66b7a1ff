import numpy as np
import scipy.sparse as sp

from ..errors import InvalidArgument


def as_csr(matrix, square=True):
    '''
    CSR copy with summed duplicates and sorted column indices
    '''
    mat = sp.csr_matrix(matrix, dtype=float, copy=True)
    mat.sum_duplicates()
    mat.sort_indices()
    if square and mat.shape[0] != mat.shape[1]:
        raise InvalidArgument(f'expected a square matrix, got {mat.shape}')
    return mat


def submatrix(matrix, rows, cols=None):
    rows = np.asarray(rows)
    cols = rows if cols is None else np.asarray(cols)
    sub = matrix[rows][:, cols]
    sub = sp.csr_matrix(sub)
    sub.sort_indices()
    return sub


def lower_pattern(matrix):
    '''
    Boolean lower triangle including the diagonal
    '''
    low = sp.tril(sp.csr_matrix(matrix), format='csr')
    low.data = np.ones_like(low.data, dtype=bool)
    low = low + sp.identity(matrix.shape[0], dtype=bool, format='csr')
    low = sp.csr_matrix(low, dtype=bool)
    low.sort_indices()
    return low
