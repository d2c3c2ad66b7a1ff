import logging

from .riesz import datatable as riesz
from .sweep import datatable as sweep
from .hodge import datatable as hodge
from .complexity import datatable as complexity

_logger = logging.getLogger(__name__)

TABLES = {
    'riesz': riesz,
    'sweep': sweep,
    'hodge': hodge,
    'complexity': complexity,
}


def get_table(name, results):
    '''
    Returns (title, columns) of the named table for a list of result rows
    '''
    fnc = TABLES.get(name)
    if fnc is None:
        _logger.warning(f"No table provider for '{name}'")
        raise KeyError(name)
    return fnc(results)
