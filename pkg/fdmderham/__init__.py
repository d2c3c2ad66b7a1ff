from .version import __version__  # noqa: F401
from .errors import (FdmDerhamError, InvalidArgument, ConfigError,  # noqa: F401
                     NumericalFailure, ParseError, InvalidData, InvalidStructure)
from .fdm1d import build_fdm_basis  # noqa: F401
from .mesh import build_box_mesh, build_dofmap  # noqa: F401
from .assembly import OperatorHandle, apply_operator, assemble_auxiliary  # noqa: F401
from .decompositions import build_preconditioner  # noqa: F401
from .krylov import pcg, minres, chebyshev, lanczos_bounds  # noqa: F401
from .config import ExperimentConfig  # noqa: F401
