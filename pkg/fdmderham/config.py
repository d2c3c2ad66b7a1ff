import logging

from .assembly import analytic, constant, half_jump, ANALYTIC_FIELDS
from .decompositions import DECOMPOSITIONS, FACTORIZATIONS, check_decomposition
from .errors import ConfigError, InvalidArgument
from .helper.rng import global_seed
from .mesh import DIRICHLET_KINDS, Distortion, build_box_mesh, refine_uniform
from .meshio import read_mesh

_logger = logging.getLogger(__name__)

COARSE_SOLVERS = ('direct',)
JUMP_PREFIX = 'jump:'


def parse_coefficient(spec):
    '''
    Coefficient from its text form: a number, jump:<axis>:<low>:<high> or
    the name of an analytic field
    '''
    if not isinstance(spec, str):
        return constant(spec)
    text = spec.strip()
    if text.startswith(JUMP_PREFIX):
        parts = text[len(JUMP_PREFIX):].split(':')
        if len(parts) != 3:
            raise ConfigError(f'expected jump:<axis>:<low>:<high>, got "{spec}"')
        try:
            axis, low, high = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise ConfigError(f'invalid jump coefficient "{spec}"')
        if not (low > 0.0 and high > 0.0):
            raise ConfigError(f'jump values must be positive, got "{spec}"')
        try:
            return half_jump(axis, low, high)
        except InvalidArgument as e:
            raise ConfigError(str(e))
    if text in ANALYTIC_FIELDS:
        return analytic(text)
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f'invalid coefficient "{spec}"')
    if value < 0.0:
        raise ConfigError(f'coefficient must be >= 0, got {value}')
    return constant(value)


def _convert(name, default, text):
    text = text.strip()
    try:
        if isinstance(default, bool):
            if text.lower() in ('1', 'true', 'yes', 'on'):
                return True
            if text.lower() in ('0', 'false', 'no', 'off'):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, list):
            kind = type(default[0]) if default else float
            return [kind(v) for v in text.split(',') if v.strip()]
        if default is None:
            return None if text.lower() in ('', 'none') else int(text)
    except ValueError:
        raise ConfigError(f'invalid value "{text}" for {name}')
    return text


class ExperimentConfig:

    def __init__(self):
        # form degree of the Riesz map (0: H(grad) .. 3: L2)
        self.k = 0
        # polynomial degree, and the degrees of a complexity or sweep series
        self.p = 3
        self.ps = [3, 5, 7]
        # number of uniform refinements of the base mesh
        self.level = 0

        # base mesh: cells per direction of the unit box, or a hexmesh file
        self.nx = 2
        self.ny = 2
        self.nz = 2
        self.mesh_file = ''
        # vertex displacement of generated meshes: none, smooth or jitter
        self.distortion = 'none'
        self.amplitude = 0.0
        # global seed for jitter and right-hand sides; None takes
        # FDMDERHAM_SEED (default 0)
        self.seed = None
        # all: homogeneous Dirichlet conditions on the whole boundary
        self.dirichlet = 'all'

        # coefficients: number, jump:<axis>:<low>:<high>, checker or smooth
        self.alpha = '1'
        self.beta = '1e-8'

        # solver: decomposition pafw, ph, sc_pafw or sc_ph; patch
        # factorization chol or icc_sc
        self.decomposition = 'sc_ph'
        self.factorization = 'chol'
        self.coarse = 'direct'
        # fixed smoother weight; 0 takes the inverse Lanczos upper bound
        self.damping = 0.0
        self.rtol = 1e-8
        self.maxit = 200
        self.cheb_steps = 4
        self.lanczos_steps = 10

        # coefficient sweep grid and the factor of the scale invariance check
        self.sweep_alpha = [1e-3, 1.0, 1e3]
        self.sweep_beta = [1e-6, 1e-3, 1.0, 1e3, 1e6]
        self.sweep_scale = 1e3
        # ratio of an extra half-domain beta jump row; 0 disables
        self.jump = 0.0

        # output: CSV path (stdout if empty) and optional Markdown report
        self.output = ''
        self.markdown = ''

    def keys(self):
        return list(vars(self).keys())

    def set(self, key, text, lineno=None):
        if key not in vars(self):
            where = f' (line {lineno})' if lineno is not None else ''
            raise ConfigError(f'Unknown configuration key "{key}"{where}')
        default = ExperimentConfig().__dict__[key]
        setattr(self, key, _convert(key, default, str(text)))

    def update(self, overrides):
        '''
        Applies key=value strings
        '''
        for item in overrides or []:
            if '=' not in item:
                raise ConfigError(f'expected key=value, got "{item}"')
            key, value = item.split('=', 1)
            self.set(key.strip(), value)
        return self

    @classmethod
    def from_file(cls, path):
        cfg = cls()
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split('#', 1)[0].strip()
                if not line:
                    continue
                if '=' not in line:
                    raise ConfigError(f'line {lineno}: expected key = value')
                key, value = line.split('=', 1)
                cfg.set(key.strip(), value, lineno)
        return cfg

    def get_seed(self):
        return global_seed() if self.seed is None else self.seed

    def coefficient(self, name):
        return parse_coefficient(getattr(self, name))

    def non_default(self):
        default = ExperimentConfig()
        return {key: value for key, value in vars(self).items()
                if default.__dict__[key] != value}

    def validate(self):
        if self.k not in (0, 1, 2, 3):
            raise ConfigError(f'k must be in 0..3, got {self.k}')
        for p in [self.p] + list(self.ps):
            if p < 1:
                raise ConfigError(f'polynomial degree must be >= 1, got {p}')
        if self.level < 0:
            raise ConfigError(f'level must be >= 0, got {self.level}')
        if min(self.nx, self.ny, self.nz) < 1:
            raise ConfigError('mesh extents must be >= 1')
        if self.dirichlet not in DIRICHLET_KINDS:
            raise ConfigError(f'dirichlet must be one of {DIRICHLET_KINDS}')
        if self.decomposition not in DECOMPOSITIONS:
            raise ConfigError(f'decomposition must be one of {DECOMPOSITIONS}')
        try:
            check_decomposition(self.decomposition, self.k)
        except InvalidArgument as e:
            raise ConfigError(str(e))
        if self.factorization not in FACTORIZATIONS:
            raise ConfigError(f'factorization must be one of {FACTORIZATIONS}')
        if self.coarse not in COARSE_SOLVERS:
            raise ConfigError(f'coarse must be one of {COARSE_SOLVERS}')
        if self.distortion not in ('none', 'smooth', 'jitter'):
            raise ConfigError(f'Unknown distortion "{self.distortion}"')
        if self.distortion != 'none' and not self.mesh_file:
            bound = 0.5 / max(self.nx, self.ny, self.nz)
            if not 0.0 <= self.amplitude < bound:
                raise ConfigError(f'amplitude must lie in [0, {bound:.4g})')
        if not 0.0 < self.rtol < 1.0:
            raise ConfigError(f'rtol must lie in (0, 1), got {self.rtol}')
        if self.maxit < 1 or self.cheb_steps < 1 or self.lanczos_steps < 1:
            raise ConfigError('maxit, cheb_steps and lanczos_steps must be >= 1')
        if self.damping < 0.0:
            raise ConfigError(f'damping must be >= 0, got {self.damping}')
        if self.seed is not None and self.seed < 0:
            raise ConfigError('seed must be non-negative')
        self.coefficient('alpha')
        self.coefficient('beta')
        return self

    def get_damping(self):
        return None if self.damping == 0.0 else self.damping

    def build_mesh(self):
        '''
        Base mesh refined level times
        '''
        if self.mesh_file:
            mesh = read_mesh(self.mesh_file)
        else:
            distortion = Distortion(self.distortion, self.amplitude, self.get_seed())
            mesh = build_box_mesh(self.nx, self.ny, self.nz, distortion)
        for _ in range(self.level):
            mesh = refine_uniform(mesh)
        _logger.debug(f'mesh {mesh.shape}, {mesh.ncells} cells')
        return mesh
