import os

import numpy as np

from ..errors import ConfigError

SEED_ENV = 'FDMDERHAM_SEED'
DEFAULT_SEED = 0


def make_rng(seed, *stream):
    '''
    Counter-based generator for the given seed; extra integers select an
    independent stream (e.g. a refinement level or a right-hand side id)
    '''
    if seed is None:
        seed = global_seed()
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(seq))


def global_seed():
    value = os.environ.get(SEED_ENV)
    if value is None or value == '':
        return DEFAULT_SEED
    try:
        seed = int(value)
    except ValueError:
        raise ConfigError(f'{SEED_ENV} must be an integer, got "{value}"')
    if seed < 0:
        raise ConfigError(f'{SEED_ENV} must be non-negative')
    return seed
