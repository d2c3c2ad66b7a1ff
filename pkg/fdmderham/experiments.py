'''
Experiment drivers behind the command line: Riesz-map solves, coefficient
sweeps, Hodge Laplacians, complexity counters, pattern dumps and basis
dumps. Every driver returns plain result rows.
'''
import dataclasses
import logging
import os
import time

import numpy as np
import scipy.sparse as sp

from .assembly import (OperatorHandle, assemble_auxiliary, assemble_potential_auxiliary,
                       assemble_rhs, constant, half_jump)
from .decompositions import (PATCH_ORDERINGS, build_patches, build_preconditioner,
                             build_relaxation, interface_positions)
from .errors import InvalidArgument
from .fdm1d import build_fdm_basis
from .helper.counters import FlopCounter, nbytes
from .helper.label import decomposition2label, mesh2label
from .hodge import build_hodge, solve_hodge
from .krylov import pcg
from .mesh import star
from .sparse import cholesky, condense, submatrix, symbolic_cholesky
from .sparse.cholesky import weighted_symbolic_nnz
from .sparse.ordering import order

_logger = logging.getLogger(__name__)


@dataclasses.dataclass
class RieszRun:
    handle: OperatorHandle
    solution: np.ndarray
    report: object
    row: dict


def _base_row(config, mesh, p):
    return dict(k=config.k, p=p, level=config.level, mesh=mesh2label(mesh),
                decomposition=decomposition2label(config.decomposition),
                factorization=config.factorization)


def run_riesz(config, p=None, mesh=None, alpha=None, beta=None, handle=None):
    '''
    One preconditioned CG solve of the Riesz map with a random right-hand
    side
    '''
    p = config.p if p is None else p
    mesh = mesh or config.build_mesh()
    alpha = config.coefficient('alpha') if alpha is None else alpha
    beta = config.coefficient('beta') if beta is None else beta
    counter = FlopCounter()
    start = time.perf_counter()
    if handle is None:
        handle = OperatorHandle(mesh, config.k, p, alpha, beta, config.dirichlet,
                                counter=counter)
    else:
        handle = handle.with_coefficients(alpha, beta)
        handle.counter = counter
    seed = config.get_seed()
    pre = build_preconditioner(handle, config.decomposition, config.factorization,
                               config.get_damping(), seed, config.lanczos_steps,
                               counter)
    rhs = assemble_rhs(handle, seed)
    setup = time.perf_counter() - start
    counter.reset()
    x, report = pcg(handle.apply, pre.apply, rhs, config.rtol, config.maxit,
                    counter=counter)
    report.flops = counter.flops
    report.nnz = pre.nnz_summary()
    report.icc_shifts = pre.icc_shifts()
    report.memory_bytes = pre.memory_bytes + handle.scatter.data.nbytes
    report.setup_time = setup
    row = _base_row(config, mesh, p)
    row.update(alpha=handle.alpha.label, beta=handle.beta.label, ndofs=handle.size)
    row.update(report.to_row())
    _logger.info(f'riesz k={config.k} p={p}: {report.iterations} iterations '
                 f'(converged={report.converged})')
    return RieszRun(handle, x, report, row)


def run_riesz_series(config):
    mesh = config.build_mesh()
    return [run_riesz(config, p, mesh) for p in config.ps]


def run_sweep(config):
    '''
    Iteration counts over the (alpha, beta) grid, each paired with the run
    at (c alpha, c beta)
    '''
    if config.k not in (1, 2):
        raise InvalidArgument(f'coefficient sweeps need k in (1, 2), got {config.k}')
    mesh = config.build_mesh()
    c = config.sweep_scale
    base = OperatorHandle(mesh, config.k, config.p, 1.0, 1.0, config.dirichlet)
    rows = []

    def add(alpha, beta, alabel, blabel):
        first = run_riesz(config, config.p, mesh, alpha, beta, base)
        second = run_riesz(config, config.p, mesh, alpha.scaled(c), beta.scaled(c), base)
        row = dict(first.row)
        row.update(alpha=alabel, beta=blabel,
                   scaled_iterations=second.report.iterations,
                   invariant=first.report.iterations == second.report.iterations,
                   converged=first.report.converged and second.report.converged)
        if not row['invariant']:
            _logger.warning(f'scale invariance violated at alpha={alabel}, beta={blabel}: '
                            f'{first.report.iterations} != {second.report.iterations}')
        rows.append(row)

    for a in config.sweep_alpha:
        for b in config.sweep_beta:
            add(constant(a), constant(b), f'{a:g}', f'{b:g}')
    if config.jump > 0.0:
        add(constant(1.0), half_jump(0, 1.0, config.jump), '1',
            f'jump(1,{config.jump:g})')
    return rows


def run_hodge(config):
    mesh = config.build_mesh()
    rows = []
    for p in config.ps:
        system = build_hodge(mesh, config.k, p)
        _, _, report = solve_hodge(system, config.decomposition, config.factorization,
                                   config.rtol, config.maxit, config.get_seed(),
                                   config.cheb_steps, config.lanczos_steps)
        row = dict(k=config.k, p=p, level=config.level, mesh=mesh2label(mesh),
                   ndofs=system.size)
        row.update(report.to_row())
        rows.append(row)
        _logger.info(f'hodge k={config.k} p={p}: {report.iterations} iterations')
    return rows


def entity_blocks(mesh, dofmap, center):
    '''
    Entities of the star of center that own unconstrained DOFs, their DOF
    counts and the graph coupling entities of a common cell
    '''
    ents = [e for e in star(mesh, center)
            if dofmap.owned_free([e]).size]
    sizes = np.array([dofmap.owned_free([e]).size for e in ents], dtype=np.int64)
    lat = np.array([mesh.lattice(e) for e in ents])
    cells = np.array([mesh.lattice(e) for e in star(mesh, center) if e.dim == 3])
    inc = np.all(np.abs(lat[:, None, :] - cells[None, :, :]) <= 1, axis=2)
    inc = sp.csr_matrix(inc.astype(np.int64))
    graph = sp.csr_matrix((inc @ inc.T) > 0)
    return ents, sizes, graph


def gll_patch_nnz(mesh, dofmap, center):
    '''
    Exact nnz of the Cholesky factor of a vertex patch matrix in the GLL
    basis, eliminating cell interiors first, then faces, edges and the
    vertex
    '''
    ents, sizes, graph = entity_blocks(mesh, dofmap, center)
    perm = np.argsort([-e.dim for e in ents], kind='stable')
    return weighted_symbolic_nnz(graph[perm][:, perm], sizes[perm])


def gll_patch_pattern(dofmap, dofs):
    '''
    Pattern of a patch matrix in the GLL basis: dense coupling within
    every cell
    '''
    pos = np.full(dofmap.nfree, -1, dtype=np.int64)
    pos[dofs] = np.arange(len(dofs))
    rows, cols = [], []
    for cell in dofmap.cell_free:
        local = pos[cell[cell >= 0]]
        local = local[local >= 0]
        r, c = np.meshgrid(local, local, indexing='ij')
        rows.append(r.ravel())
        cols.append(c.ravel())
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    pat = sp.csr_matrix((np.ones(len(rows), dtype=bool), (rows, cols)),
                        shape=(len(dofs), len(dofs)))
    pat.sort_indices()
    return pat


def run_complexity(config):
    mesh = config.build_mesh()
    rows = []
    for p in config.ps:
        counter = FlopCounter()
        handle = OperatorHandle(mesh, config.k, p, config.coefficient('alpha'),
                                config.coefficient('beta'), config.dirichlet,
                                counter=counter)
        aux = assemble_auxiliary(handle)
        patches = build_patches(mesh, handle.dofmap, 'pafw', config.k).primary
        points = handle.dofmap.free_points()
        interior = handle.dofmap.interior
        nnz = {}
        for fac in ('chol', 'icc_sc'):
            relax = build_relaxation(aux, patches, fac, points, interior)
            nnz[fac] = relax.nnz
        gll = sum(gll_patch_nnz(mesh, handle.dofmap, c) for c in patches.centers)
        pre = build_preconditioner(handle, 'pafw', config.factorization,
                                   config.get_damping(), config.get_seed(),
                                   config.lanczos_steps, counter)
        r = np.ones(handle.size)
        counter.reset()
        pre.apply(r)
        handle.apply(r)
        rows.append(dict(k=config.k, p=p, ndofs=handle.size, nnz_aux=int(aux.nnz),
                         nnz_chol=nnz['chol'], nnz_icc=nnz['icc_sc'], nnz_gll=int(gll),
                         flops_cycle=counter.flops,
                         memory_bytes=pre.memory_bytes + nbytes(aux)))
        _logger.info(f'complexity p={p}: {rows[-1]}')
    return rows


def write_coo(path, name, matrix, values=True):
    coo = sp.coo_matrix(matrix)
    with open(path, 'w') as fh:
        fh.write(f'# {name} {coo.shape[0]} {coo.shape[1]} {coo.nnz}\n')
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f'{i} {j} {float(v)!r}\n' if values else f'{i} {j}\n')


def _factor_pattern(pattern, perm):
    symbolic = symbolic_cholesky(pattern[perm][:, perm])
    return symbolic.pattern()


def run_spy(config, outdir):
    '''
    Writes the matrix and factor patterns of the first patch of every kind
    of the decomposition, in the FDM and GLL bases. Returns the written
    file names.
    '''
    os.makedirs(outdir, exist_ok=True)
    mesh = config.build_mesh()
    handle = OperatorHandle(mesh, config.k, config.p, config.coefficient('alpha'),
                            config.coefficient('beta'), config.dirichlet)
    dofmap = handle.dofmap
    aux = assemble_auxiliary(handle)
    collection = build_patches(mesh, dofmap, config.decomposition.replace('sc_', ''),
                               config.k)
    sets = [(collection.primary, aux, dofmap)]
    if collection.potential is not None:
        potential, potmap = assemble_potential_auxiliary(handle)
        sets.append((collection.potential, potential, potmap))
    written = []
    for patches, matrix, dmap in sets:
        if not len(patches):
            continue
        dofs = patches.dofs[0]
        sub = submatrix(matrix, dofs)
        ordering = PATCH_ORDERINGS[patches.kind]
        perm = order(sub, ordering, dmap.free_points()[dofs])
        factor = cholesky(sub, perm)
        gll = gll_patch_pattern(dmap, dofs)
        files = {
            f'{patches.kind}_fdm_matrix.txt': (sub, True),
            f'{patches.kind}_fdm_factor.txt': (factor.L, True),
            f'{patches.kind}_gll_matrix.txt': (gll, False),
            f'{patches.kind}_gll_factor.txt': (_factor_pattern(gll, perm), False),
        }
        if config.decomposition.startswith('sc_') and patches is collection.primary:
            pos = interface_positions(dmap)
            schur = condense(aux, dmap.interior).schur
            sidx = np.sort(pos[dofs][pos[dofs] >= 0])
            files[f'{patches.kind}_fdm_schur.txt'] = (submatrix(schur, sidx), True)
        for name, (mat, values) in files.items():
            path = os.path.join(outdir, name)
            write_coo(path, name[:-4], mat, values)
            written.append(path)
    _logger.info(f'wrote {len(written)} pattern files to {outdir}')
    return written


def dump_basis(p, fh):
    '''
    Writes S, Lambda, D, B and G1d as plain-text blocks
    '''
    basis = build_fdm_basis(p)
    blocks = [('S', basis.S), ('Lambda', basis.eigenvalues[:, None]),
              ('D', basis.D), ('B', basis.B), ('G1d', basis.G1d)]
    for name, mat in blocks:
        fh.write(f'# {name} {mat.shape[0]} {mat.shape[1]}\n')
        np.savetxt(fh, mat, fmt='%.17g')
    return basis
