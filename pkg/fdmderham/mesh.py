'''
Logically-structured hexahedral cell complexes on the unit box.

Every entity is addressed by its position on the doubled lattice
(2nx+1) x (2ny+1) x (2nz+1): coordinate 2a is the vertex plane a and
coordinate 2a+1 the open interval between planes a and a+1. The number of
odd coordinates is the entity dimension.
'''
import dataclasses
import logging
from typing import List, NamedTuple, Optional

import numpy as np

from .elements import ElementSpace, Family
from .errors import InvalidArgument
from .fdm1d import gauss_legendre_rule, gauss_lobatto_rule
from .helper.rng import make_rng

_logger = logging.getLogger(__name__)

DIRICHLET_KINDS = ('all', 'none')
DISTORTION_KINDS = ('none', 'smooth', 'jitter', 'file')
# phase shifts of the smooth displacement, one per coordinate
SMOOTH_PHASES = (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)


class Entity(NamedTuple):
    dim: int
    id: int


@dataclasses.dataclass(frozen=True)
class Distortion:
    kind: str = 'none'
    amplitude: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in DISTORTION_KINDS:
            raise InvalidArgument(f'Unknown distortion "{self.kind}"')

    @property
    def label(self):
        return 'cartesian' if self.kind == 'none' else 'distorted'


def smooth(amplitude):
    return Distortion('smooth', amplitude)


def jitter(amplitude, seed=None):
    return Distortion('jitter', amplitude, seed)


def _hat(points):
    points = np.asarray(points, dtype=float)
    val = np.stack([0.5 * (1.0 - points), 0.5 * (1.0 + points)], axis=1)
    der = np.tile([-0.5, 0.5], (len(points), 1))
    return val, der


@dataclasses.dataclass(frozen=True)
class GeometryMap:
    '''
    Trilinear cell maps sampled at tensor-product points; point index
    (q3 * n + q2) * n + q1
    '''
    x: np.ndarray      # (ncells, nq, 3)
    J: np.ndarray      # (ncells, nq, 3, 3), J[..., a, b] = dx_a / dxi_b
    detJ: np.ndarray   # (ncells, nq)


class MeshComplex:

    def __init__(self, shape, coordinates, distortion=Distortion()):
        self.shape = tuple(int(n) for n in shape)
        nx, ny, nz = self.shape
        if min(self.shape) < 1:
            raise InvalidArgument(f'grid extents must be >= 1, got {self.shape}')
        self.coordinates = np.asarray(coordinates, dtype=float).reshape(-1, 3)
        if len(self.coordinates) != (nx + 1) * (ny + 1) * (nz + 1):
            raise InvalidArgument('coordinate count does not match extents')
        self.coordinates.setflags(write=False)
        self.distortion = distortion
        self._build_entities()

    def _build_entities(self):
        nx, ny, nz = self.shape
        dshape = (2 * nx + 1, 2 * ny + 1, 2 * nz + 1)
        self.lattice_shape = dshape
        # doubled coordinates of every lattice point, x fastest
        zz, yy, xx = np.meshgrid(np.arange(dshape[2]), np.arange(dshape[1]),
                                 np.arange(dshape[0]), indexing='ij')
        coords = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)
        odd = coords % 2
        dims = odd.sum(axis=1)
        self.entity_id = np.full(dshape, -1, dtype=np.int64)
        self.entities = []
        for dim in range(4):
            sel = coords[dims == dim]
            if dim in (1, 2):
                # group by direction: edges along x, y, z; faces normal to x, y, z
                direction = np.argmax(odd[dims == dim] == (1 if dim == 1 else 0),
                                      axis=1)
                sel = sel[np.argsort(direction, kind='stable')]
            ids = np.arange(len(sel))
            self.entity_id[sel[:, 0], sel[:, 1], sel[:, 2]] = ids
            sel.setflags(write=False)
            self.entities.append(sel)
        self.entity_offsets = np.cumsum([0] + [len(e) for e in self.entities])

        def lookup(points):
            return self.entity_id[points[..., 0], points[..., 1], points[..., 2]]

        unit = np.eye(3, dtype=np.int64)
        cells = self.entities[3]
        self.cell_faces = np.stack(
            [lookup(cells + s * unit[m]) for m in range(3) for s in (-1, 1)],
            axis=1)
        faces = self.entities[2]
        fodd = faces % 2
        edge_cols = []
        for t in range(2):
            axis = np.argsort(-fodd, axis=1, kind='stable')[:, t]
            for s in (-1, 1):
                edge_cols.append(lookup(faces + s * unit[axis]))
        self.face_edges = np.stack(edge_cols, axis=1)
        edges = self.entities[1]
        axis = np.argmax(edges % 2, axis=1)
        self.edge_vertices = np.stack(
            [lookup(edges - unit[axis]), lookup(edges + unit[axis])], axis=1)

        # cell corner vertices, local corner (c3 * 2 + c2) * 2 + c1
        corners = []
        for c3 in (-1, 1):
            for c2 in (-1, 1):
                for c1 in (-1, 1):
                    corners.append(lookup(cells + np.array([c1, c2, c3])))
        self.cell_vertices = np.stack(corners, axis=1)

    @property
    def ncells(self):
        return len(self.entities[3])

    def count(self, dim):
        return len(self.entities[dim])

    def lattice(self, entity: Entity):
        self._check(entity)
        return self.entities[entity.dim][entity.id]

    def entity_at(self, point) -> Entity:
        point = np.asarray(point)
        return Entity(int((point % 2).sum()),
                      int(self.entity_id[point[0], point[1], point[2]]))

    def rank(self, dim, ids):
        '''
        Global entity rank: vertices, then edges, faces and cells
        '''
        return self.entity_offsets[dim] + np.asarray(ids)

    def _check(self, entity):
        dim, eid = entity
        if dim not in range(4) or not 0 <= eid < self.count(dim):
            raise InvalidArgument(f'Unknown entity {tuple(entity)}')

    def on_boundary(self, points):
        '''
        True for lattice points whose entity lies in the box boundary
        '''
        points = np.atleast_2d(points)
        upper = np.array(self.lattice_shape) - 1
        even = points % 2 == 0
        return np.any(even & ((points == 0) | (points == upper)), axis=1)

    def cell_centroids(self):
        return self.coordinates[self.cell_vertices].mean(axis=1)

    def geometry(self, points) -> GeometryMap:
        val, der = _hat(points)
        xc = self.coordinates[self.cell_vertices].reshape(-1, 2, 2, 2, 3)
        x = np.einsum('nabcx,ka,jb,ic->nkjix', xc, val, val, val)
        j1 = np.einsum('nabcx,ka,jb,ic->nkjix', xc, val, val, der)
        j2 = np.einsum('nabcx,ka,jb,ic->nkjix', xc, val, der, val)
        j3 = np.einsum('nabcx,ka,jb,ic->nkjix', xc, der, val, val)
        nq = len(points) ** 3
        jac = np.stack([j1, j2, j3], axis=-1).reshape(self.ncells, nq, 3, 3)
        return GeometryMap(x=x.reshape(self.ncells, nq, 3), J=jac,
                           detJ=np.linalg.det(jac))

    def min_jacobian(self, npoints=4):
        rule = gauss_lobatto_rule(npoints)
        return float(self.geometry(rule.points).detJ.min())

    def interpolate(self, cells, reference_points):
        '''
        Images of reference points (m x 3, in [-1,1]^3) under the maps of
        the given cells, one point per cell
        '''
        cells = np.asarray(cells)
        ref = np.asarray(reference_points, dtype=float)
        xc = self.coordinates[self.cell_vertices[cells]].reshape(-1, 2, 2, 2, 3)
        h = [np.stack([0.5 * (1 - ref[:, d]), 0.5 * (1 + ref[:, d])], axis=1)
             for d in range(3)]
        return np.einsum('nabcx,na,nb,nc->nx', xc, h[2], h[1], h[0])


def box_coordinates(nx, ny, nz):
    zz, yy, xx = np.meshgrid(np.linspace(0, 1, nz + 1), np.linspace(0, 1, ny + 1),
                             np.linspace(0, 1, nx + 1), indexing='ij')
    return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)


def build_box_mesh(nx, ny, nz, distortion: Distortion = Distortion()) -> MeshComplex:
    if min(nx, ny, nz) < 1:
        raise InvalidArgument(f'grid extents must be >= 1, got {(nx, ny, nz)}')
    if distortion.kind == 'file':
        raise InvalidArgument('file distortion cannot be generated')
    coords = box_coordinates(nx, ny, nz)
    a = distortion.amplitude
    if distortion.kind != 'none':
        bound = 0.5 / max(nx, ny, nz)
        if not 0.0 <= a < bound:
            raise InvalidArgument(
                f'distortion amplitude {a} must lie in [0, {bound:.4g})')
        interior = np.all((coords > 0.0) & (coords < 1.0), axis=1)
        if distortion.kind == 'smooth':
            # component m moves by a cos(phase_m) sin(pi x) sin(pi y) sin(pi z),
            # zero on the box boundary
            bump = np.where(interior, np.prod(np.sin(np.pi * coords), axis=1), 0.0)
            for m, phase in enumerate(SMOOTH_PHASES):
                coords[:, m] += a * np.cos(phase) * bump
        else:
            rng = make_rng(distortion.seed, nx, ny, nz)
            shift = rng.uniform(-a, a, size=coords.shape)
            coords[interior] += shift[interior]
    mesh = MeshComplex((nx, ny, nz), coords, distortion)
    if distortion.kind != 'none':
        det = mesh.min_jacobian()
        if det <= 0.0:
            raise InvalidArgument(
                f'distortion amplitude {a} produces a nonpositive Jacobian ({det:.3g})')
    _logger.debug(f'box mesh {mesh.shape} ({distortion.kind}), {mesh.ncells} cells')
    return mesh


def refine_uniform(mesh: MeshComplex) -> MeshComplex:
    '''
    Splits every cell into 8; new vertices are images of the parent cell map
    '''
    nx, ny, nz = mesh.shape
    fine = np.stack(np.meshgrid(np.arange(2 * nz + 1), np.arange(2 * ny + 1),
                                np.arange(2 * nx + 1), indexing='ij'),
                    axis=-1).reshape(-1, 3)[:, ::-1]
    parent = np.minimum(fine // 2, np.array([nx - 1, ny - 1, nz - 1]))
    ref = (fine - 2 * parent - 1).astype(float)
    cell = mesh.entity_id[2 * parent[:, 0] + 1, 2 * parent[:, 1] + 1,
                          2 * parent[:, 2] + 1]
    coords = mesh.interpolate(cell, ref)
    return MeshComplex((2 * nx, 2 * ny, 2 * nz), coords, mesh.distortion)


def star(mesh: MeshComplex, entity: Entity) -> List[Entity]:
    '''
    The entity and all entities containing it, sorted by (dim, id)
    '''
    point = mesh.lattice(Entity(*entity))
    offsets = [(0,) if c % 2 else (-1, 0, 1) for c in point]
    upper = np.array(mesh.lattice_shape)
    found = []
    for dz in offsets[2]:
        for dy in offsets[1]:
            for dx in offsets[0]:
                q = point + np.array([dx, dy, dz])
                if np.all(q >= 0) and np.all(q < upper):
                    found.append(mesh.entity_at(q))
    return sorted(found)


def star_cells(mesh, entity):
    return [e.id for e in star(mesh, entity) if e.dim == 3]


class DofMap:
    '''
    Global numbering of the DOFs of a k-form element on a mesh.

    DOFs are grouped by owning entity (vertices, edges, faces, cells) and
    within one entity by (component, l, j, i) of their local index.
    '''

    def __init__(self, mesh: MeshComplex, element: ElementSpace, dirichlet='all'):
        if dirichlet not in DIRICHLET_KINDS:
            raise InvalidArgument(f'Unknown boundary spec "{dirichlet}"')
        self.mesh = mesh
        self.element = element
        self.dirichlet = dirichlet
        p = element.degree
        nloc = element.ndofs

        fams = np.array([[f is Family.CG for f in element.families[m]]
                         for m in element.dof_component])
        idx = element.dof_index
        offset = np.where(fams, np.where(idx == 0, 0, np.where(idx == p, 2, 1)), 1)
        inner = np.where(fams & (idx > 0) & (idx < p), idx - 1, idx)
        inner = np.where(fams & (idx == p), 0, inner)

        cells = mesh.entities[3] - 1
        lattice = cells[:, None, :] + offset[None, :, :]
        flat = lattice.reshape(-1, 3)
        dim = (flat % 2).sum(axis=1)
        ent = mesh.entity_id[flat[:, 0], flat[:, 1], flat[:, 2]]
        comp = np.tile(element.dof_component, mesh.ncells)
        inn = np.tile(inner, (mesh.ncells, 1))
        rows = np.stack([dim, ent, comp, inn[:, 2], inn[:, 1], inn[:, 0]], axis=1)
        uniq, first, inverse = np.unique(rows, axis=0, return_index=True,
                                         return_inverse=True)
        self.cell_dofs = inverse.reshape(mesh.ncells, nloc)
        self.ndofs = len(uniq)
        self.dof_dim = uniq[:, 0]
        self.dof_entity = uniq[:, 1]
        self.dof_rank = mesh.rank(self.dof_dim, self.dof_entity)
        self.dof_lattice = flat[first]

        if dirichlet == 'all':
            self.mask = mesh.on_boundary(self.dof_lattice)
        else:
            self.mask = np.zeros(self.ndofs, dtype=bool)
        self.free = np.flatnonzero(~self.mask)
        self.free_index = np.full(self.ndofs, -1, dtype=np.int64)
        self.free_index[self.free] = np.arange(len(self.free))
        self.cell_free = self.free_index[self.cell_dofs]
        self.interior = self.dof_dim[self.free] == 3

        total = mesh.entity_offsets[-1]
        self._owned_ptr = np.searchsorted(self.dof_rank, np.arange(total + 1))

        # representative points: tensor-product node images
        gll = gauss_lobatto_rule(p + 1).points
        gl = gauss_legendre_rule(p).points
        ref = np.where(fams, gll[np.minimum(idx, p)], gl[np.minimum(idx, p - 1)])
        cell_of = np.repeat(np.arange(mesh.ncells), nloc)[first]
        local_of = np.tile(np.arange(nloc), mesh.ncells)[first]
        self.points = mesh.interpolate(cell_of, ref[local_of])
        _logger.debug(f'dofmap k={element.form_degree} p={p}: {self.ndofs} dofs, '
                      f'{self.nfree} free')

    @property
    def nfree(self):
        return len(self.free)

    def owned(self, entity: Entity):
        '''
        Global DOFs owned by the entity
        '''
        r = self.mesh.rank(entity[0], entity[1])
        return np.arange(self._owned_ptr[r], self._owned_ptr[r + 1])

    def owned_free(self, entities):
        '''
        Sorted unconstrained indices of the DOFs owned by the entities
        '''
        if not len(entities):
            return np.zeros(0, dtype=np.int64)
        dofs = np.concatenate([self.owned(e) for e in entities])
        fi = self.free_index[dofs]
        return np.sort(fi[fi >= 0])

    def free_points(self):
        return self.points[self.free]


def build_dofmap(mesh, element, dirichlet='all') -> DofMap:
    return DofMap(mesh, element, dirichlet)
