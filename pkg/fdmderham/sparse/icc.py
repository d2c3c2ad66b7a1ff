import dataclasses
import logging

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidArgument, NumericalFailure
from .cholesky import pattern_structs, triangular_solve, up_looking
from .csr import as_csr

_logger = logging.getLogger(__name__)

# diagonal shifts relative to max|diag(A)|
SHIFT_START = 1e-10
SHIFT_LIMIT = 1e-2


@dataclasses.dataclass(frozen=True)
class IccFactor:
    perm: np.ndarray
    pattern: sp.csr_matrix
    L: sp.csr_matrix
    shift: float

    def __post_init__(self):
        object.__setattr__(self, '_upper', self.L.T.tocsr())

    @property
    def n(self):
        return len(self.perm)

    @property
    def nnz(self):
        return int(self.L.nnz)

    @property
    def nbytes(self):
        return int(self.L.data.nbytes + self.L.indices.nbytes
                   + self.L.indptr.nbytes + self.perm.nbytes)

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        out = np.empty_like(b)
        out[self.perm] = triangular_solve(self.L, self._upper, b[self.perm])
        return out


def icc_imposed(matrix, pattern, perm=None, shift_start=SHIFT_START,
                shift_limit=SHIFT_LIMIT) -> IccFactor:
    '''
    Incomplete Cholesky factor restricted to the imposed symmetric pattern.

    On a nonpositive pivot the factorization restarts on A + sigma I with
    sigma = shift_start * max|diag(A)|, doubled on every further failure;
    giving up once sigma exceeds shift_limit * max|diag(A)|.
    '''
    a = as_csr(matrix)
    n = a.shape[0]
    pattern = sp.csr_matrix(pattern, dtype=bool)
    if pattern.shape != a.shape:
        raise InvalidArgument(f'pattern shape {pattern.shape} != {a.shape}')
    if not np.all(pattern.diagonal()):
        raise InvalidArgument('imposed pattern must contain the diagonal')
    perm = np.arange(n) if perm is None else np.asarray(perm, dtype=np.int64)
    pa = a[perm][:, perm]
    pp = pattern[perm][:, perm]
    structs = pattern_structs(pp)

    scale = float(np.max(np.abs(a.diagonal()))) if n else 0.0
    shift = 0.0
    while True:
        try:
            factor = up_looking(pa, structs, shift)
            break
        except NumericalFailure as exc:
            shift = shift_start * scale if shift == 0.0 else 2.0 * shift
            if scale == 0.0 or shift > shift_limit * scale:
                raise NumericalFailure(
                    'incomplete Cholesky failed for every admissible shift',
                    row=int(perm[exc.diagnostics.get('row', 0)]), shift=shift)
    if shift > 0.0:
        _logger.warning(f'incomplete Cholesky needed diagonal shift {shift:.3g} '
                        f'(n={n})')
    return IccFactor(perm=perm, pattern=pp.tocsr(), L=factor, shift=shift)
