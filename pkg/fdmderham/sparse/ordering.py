'''
Fill-reducing orderings. Each returns a permutation perm such that
A[perm][:, perm] is factorized.
'''
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from ..errors import InvalidArgument

ORDERINGS = ('natural', 'rcm', 'nested_dissection')

# subsets at most this size are not bisected further
ND_LEAF_SIZE = 8


def natural(matrix):
    return np.arange(matrix.shape[0])


def rcm(matrix):
    graph = sp.csr_matrix(matrix)
    return np.asarray(reverse_cuthill_mckee(graph, symmetric_mode=True),
                      dtype=np.int64)


def nested_dissection(matrix, points, leaf_size=ND_LEAF_SIZE):
    '''
    Recursive coordinate bisection: split at the median of the widest
    coordinate, take the smaller one-sided boundary as vertex separator,
    order both halves recursively and the separator last
    '''
    graph = sp.csr_matrix(matrix, dtype=bool)
    graph = (graph + graph.T).tocsr()
    points = np.asarray(points, dtype=float)
    if len(points) != graph.shape[0]:
        raise InvalidArgument('nested dissection needs one point per row')

    def split(idx):
        if len(idx) <= leaf_size:
            return [idx]
        pts = points[idx]
        extent = pts.max(axis=0) - pts.min(axis=0)
        for axis in np.argsort(-extent, kind='stable'):
            median = np.median(pts[:, axis])
            left = pts[:, axis] < median
            if left.any() and not left.all():
                break
            left = pts[:, axis] <= median
            if left.any() and not left.all():
                break
        else:
            return [idx]
        sub = graph[idx][:, idx]
        cross_l = np.asarray(sub[left][:, ~left].sum(axis=1)).ravel() > 0
        cross_r = np.asarray(sub[~left][:, left].sum(axis=1)).ravel() > 0
        lidx, ridx = idx[left], idx[~left]
        if cross_l.sum() <= cross_r.sum():
            sep, lidx = lidx[cross_l], lidx[~cross_l]
        else:
            sep, ridx = ridx[cross_r], ridx[~cross_r]
        return split(lidx) + split(ridx) + [sep]

    parts = split(np.arange(graph.shape[0]))
    return np.concatenate(parts).astype(np.int64) if parts else np.zeros(0, np.int64)


def order(matrix, ordering='natural', points=None):
    if ordering == 'natural':
        return natural(matrix)
    if ordering == 'rcm':
        return rcm(matrix)
    if ordering == 'nested_dissection':
        if points is None:
            raise InvalidArgument('nested dissection needs DOF points')
        return nested_dissection(matrix, points)
    raise InvalidArgument(f'Unknown ordering "{ordering}", expected one of {ORDERINGS}')
