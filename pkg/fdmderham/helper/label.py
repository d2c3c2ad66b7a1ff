from ..elements import SPACE_NAMES
from .params import get_params_str

DECOMPOSITION_LABELS = {
    'pafw': 'PAFW',
    'ph': 'PH',
    'sc_pafw': 'SC-PAFW',
    'sc_ph': 'SC-PH',
}


def decomposition2label(name):
    return DECOMPOSITION_LABELS.get(name, name)


def space2label(k):
    return SPACE_NAMES[k]


def mesh2label(mesh):
    '''
    cartesian or distorted; file meshes count as distorted
    '''
    return mesh.distortion.label


def config2label(config, params=False):
    label = f'{space2label(config.k)} {decomposition2label(config.decomposition)}'
    if params:
        param_labels = get_params_str(config)
        if len(param_labels) > 0:
            label += f' [{param_labels}]'
    return label
