'''
Plain-text hexmesh v1 format: a header line ``hexmesh v1 nx ny nz``
followed by one ``x y z`` line per vertex, x index fastest.
'''
import logging

import numpy as np

from .errors import InvalidData, ParseError
from .mesh import Distortion, MeshComplex, box_coordinates

_logger = logging.getLogger(__name__)

MAGIC = 'hexmesh'
VERSION = 'v1'


def write_mesh(mesh: MeshComplex, path):
    nx, ny, nz = mesh.shape
    with open(path, 'w') as fh:
        fh.write(f'{MAGIC} {VERSION} {nx} {ny} {nz}\n')
        for x, y, z in mesh.coordinates:
            fh.write(f'{float(x)!r} {float(y)!r} {float(z)!r}\n')
    _logger.debug(f'wrote {len(mesh.coordinates)} vertices to {path}')


def read_mesh(path) -> MeshComplex:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [(no, ln) for no, ln in enumerate(lines, start=1) if ln]
    if not lines:
        raise ParseError('empty mesh file', 1)
    no, header = lines[0]
    parts = header.split()
    if len(parts) != 5 or parts[0] != MAGIC or parts[1] != VERSION:
        raise ParseError(f'expected "{MAGIC} {VERSION} nx ny nz", got "{header}"', no)
    try:
        shape = tuple(int(v) for v in parts[2:])
    except ValueError:
        raise ParseError(f'invalid extents in header "{header}"', no)
    if min(shape) < 1:
        raise ParseError(f'extents must be positive, got {shape}', no)
    nvert = (shape[0] + 1) * (shape[1] + 1) * (shape[2] + 1)
    body = lines[1:]
    if len(body) != nvert:
        lineno = body[nvert][0] if len(body) > nvert else no + len(body) + 1
        raise ParseError(f'expected {nvert} vertex lines, found {len(body)}', lineno)
    coords = np.empty((nvert, 3))
    for row, (no, ln) in enumerate(body):
        values = ln.split()
        if len(values) != 3:
            raise ParseError(f'expected 3 coordinates, got {len(values)}', no)
        try:
            coords[row] = [float(v) for v in values]
        except ValueError:
            raise ParseError(f'invalid coordinate in "{ln}"', no)
    if not np.all(np.isfinite(coords)):
        raise InvalidData('mesh coordinates must be finite')
    kind = 'none' if np.allclose(coords, box_coordinates(*shape), atol=1e-14) else 'file'
    mesh = MeshComplex(shape, coords, Distortion(kind))
    det = mesh.min_jacobian()
    if det <= 0.0:
        raise InvalidData(f'mesh has a nonpositive Jacobian determinant ({det:.3g})')
    return mesh
