from .csr import as_csr, submatrix  # noqa: F401
from .ordering import ORDERINGS, order  # noqa: F401
from .cholesky import CholFactor, cholesky, symbolic_cholesky  # noqa: F401
from .icc import IccFactor, icc_imposed  # noqa: F401
from .condense import CondensedOperator, condense, sc_pattern  # noqa: F401
