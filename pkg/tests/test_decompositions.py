import numpy as np
import pytest

from fdmderham.assembly import assemble_auxiliary, assemble_rhs
from fdmderham.decompositions import (build_patches, build_preconditioner,
                                      build_relaxation, interface_positions)
from fdmderham.errors import InvalidArgument
from fdmderham.krylov import pcg
from fdmderham.sparse import condense, submatrix

import testcommon


def _patches(k, p, decomposition, n=2):
    handle = testcommon.make_handle(k, p, testcommon.cartesian_mesh(n))
    return handle, build_patches(handle.mesh, handle.dofmap, decomposition, k)


def test_pafw_single_vertex_star():
    handle, collection = _patches(1, 2, 'pafw')
    assert len(collection.primary) == 1
    assert collection.primary.kind == 'vertex_star'
    np.testing.assert_array_equal(collection.primary.dofs[0],
                                  np.arange(handle.size))
    assert collection.potential is None
    assert not collection.condensed


@pytest.mark.parametrize('k, nprimary, npotential, kinds', [
    (1, 6, 1, ('edge_star', 'vertex_star')),
    (2, 12, 6, ('face_star', 'edge_star')),
])
def test_ph_patch_counts(k, nprimary, npotential, kinds):
    _, collection = _patches(k, 2, 'ph')
    assert len(collection.primary) == nprimary
    assert len(collection.potential) == npotential
    assert (collection.primary.kind, collection.potential.kind) == kinds
    assert collection.potential.form_degree == k - 1


def test_ph_degenerates_for_scalar_and_l2():
    _, collection = _patches(0, 2, 'ph')
    assert collection.primary.kind == 'vertex_star'
    assert collection.potential is None
    _, collection = _patches(3, 2, 'ph')
    assert collection.primary.kind == 'cell_interior'
    assert len(collection.primary) == 8


def test_sc_patches_use_interface_positions():
    handle, collection = _patches(2, 3, 'sc_ph')
    assert collection.condensed
    assert collection.primary.interface_only
    interface = np.flatnonzero(~handle.dofmap.interior)
    pos = interface_positions(handle.dofmap)
    for idx in collection.primary.dofs:
        assert np.all(idx < interface.size)
        assert not np.any(handle.dofmap.interior[interface[idx]])
        np.testing.assert_array_equal(pos[interface[idx]], idx)
    assert len(collection.interior) == 8


@pytest.mark.parametrize('k', [1, 2])
def test_sc_potential_patches_use_interface_positions(k):
    handle, collection = _patches(k, 3, 'sc_ph')
    potential = collection.potential
    potmap = collection.potential_dofmap
    assert potential.interface_only
    interface = np.flatnonzero(~potmap.interior)
    for idx in potential.dofs:
        assert np.all(idx < interface.size)
        assert not np.any(potmap.interior[interface[idx]])


@pytest.mark.parametrize('k', [1, 2])
def test_sc_potential_stage_acts_on_interfaces(k):
    handle = testcommon.make_handle(k, 3)
    pre = build_preconditioner(handle, 'sc_ph', seed=0)
    primary, potential = pre.stages
    potmap = pre.collection.potential_dofmap
    n_interface = int((~handle.dofmap.interior).sum())
    assert potential.transfer.shape == (n_interface, int((~potmap.interior).sum()))
    assert potential.n == primary.n == n_interface

def test_face_patches_of_schur_complement_are_diagonal():
    handle, collection = _patches(2, 3, 'sc_ph')
    cond = condense(assemble_auxiliary(handle), handle.dofmap.interior)
    for idx in collection.primary.dofs:
        sub = submatrix(cond.schur, idx).toarray()
        off = sub - np.diag(np.diag(sub))
        assert np.abs(off).max() <= 1e-12 * np.abs(np.diag(sub)).max()


def test_coarse_mesh_is_rejected():
    handle = testcommon.make_handle(0, 2, testcommon.cartesian_mesh(1))
    with pytest.raises(InvalidArgument):
        build_patches(handle.mesh, handle.dofmap, 'pafw', 0)


def test_unknown_names():
    handle = testcommon.make_handle(0, 2)
    with pytest.raises(InvalidArgument):
        build_patches(handle.mesh, handle.dofmap, 'jacobi', 0)
    with pytest.raises(InvalidArgument):
        build_preconditioner(handle, 'pafw', factorization='lu')


def test_single_patch_relaxation_is_exact():
    handle, collection = _patches(1, 2, 'pafw')
    aux = assemble_auxiliary(handle)
    relaxation = build_relaxation(aux, collection.primary,
                                  points=handle.dofmap.free_points())
    x = np.random.default_rng(0).standard_normal(handle.size)
    np.testing.assert_allclose(relaxation.apply(aux @ x), x, rtol=1e-8, atol=1e-10)


def test_relaxation_independent_of_patch_order():
    handle, collection = _patches(2, 2, 'ph')
    aux = assemble_auxiliary(handle)
    forward = build_relaxation(aux, collection.primary)
    patches = collection.primary
    rev = type(patches)(patches.kind, patches.form_degree, patches.centers[::-1],
                        patches.dofs[::-1])
    backward = build_relaxation(aux, rev)
    r = np.random.default_rng(1).standard_normal(handle.size)
    np.testing.assert_allclose(forward.apply(r), backward.apply(r),
                               rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize('decomposition', ['pafw', 'sc_pafw', 'ph', 'sc_ph'])
def test_preconditioner_symmetric(decomposition):
    handle = testcommon.make_handle(1, 2, testcommon.distorted_mesh(2))
    pre = build_preconditioner(handle, decomposition, seed=1)
    rng = np.random.default_rng(2)
    u, v = rng.standard_normal((2, handle.size))
    left, right = v @ pre.apply(u), u @ pre.apply(v)
    assert abs(left - right) <= 1e-9 * abs(left)
    assert u @ pre.apply(u) > 0.0


@pytest.mark.parametrize('k', [0, 1, 2])
def test_lowest_order_is_exact(k):
    handle = testcommon.make_handle(k, 1, testcommon.distorted_mesh(2))
    pre = build_preconditioner(handle, 'sc_ph')
    b = assemble_rhs(handle, 3)
    _, report = pcg(handle.apply, pre.apply, b)
    assert report.converged
    assert report.iterations == 1


def test_sc_interior_residual_is_solved_exactly():
    handle = testcommon.make_handle(0, 3)
    pre = build_preconditioner(handle, 'sc_pafw', seed=0)
    aux = assemble_auxiliary(handle)
    e = np.zeros(handle.size)
    interior = np.flatnonzero(handle.dofmap.interior)
    e[interior] = np.random.default_rng(3).standard_normal(interior.size)
    np.testing.assert_allclose(pre.apply(aux @ e), e, atol=1e-10)


def test_empty_interface_condensation():
    handle = testcommon.make_handle(3, 2)
    pre = build_preconditioner(handle, 'sc_ph')
    aux = assemble_auxiliary(handle)
    x = np.random.default_rng(4).standard_normal(handle.size)
    np.testing.assert_allclose(pre.apply(aux @ x), x, rtol=1e-10)
    assert pre.stages == []


def test_fixed_damping():
    handle = testcommon.make_handle(0, 2)
    pre = build_preconditioner(handle, 'pafw', damping=0.5)
    assert pre.omega == 0.5
    summary = pre.nnz_summary()
    assert set(summary) == {'coarse', 'primary'}
    assert pre.memory_bytes > 0


@pytest.mark.parametrize('decomposition', ['pafw', 'sc_pafw', 'ph', 'sc_ph'])
@pytest.mark.parametrize('k', [0, 1, 2])
def test_pcg_converges(k, decomposition):
    handle = testcommon.make_handle(k, 3)
    pre = build_preconditioner(handle, decomposition, seed=0)
    b = assemble_rhs(handle, 0)
    x, report = pcg(handle.apply, pre.apply, b, rtol=1e-8, maxit=200)
    assert report.converged
    assert report.iterations <= 60
    assert np.linalg.norm(handle.apply(x) - b) <= 1e-6 * np.linalg.norm(b)
    if decomposition.endswith('ph') and 0 < k:
        assert set(pre.nnz_summary()) == {'coarse', 'primary', 'potential'}


@pytest.mark.parametrize('decomposition', ['pafw', 'sc_pafw', 'ph', 'sc_ph'])
@pytest.mark.parametrize('k', [1, 2])
def test_small_beta(k, decomposition):
    handle = testcommon.make_handle(k, 3, beta=1e-8)
    pre = build_preconditioner(handle, decomposition, seed=0)
    b = assemble_rhs(handle, 0)
    _, report = pcg(handle.apply, pre.apply, b, rtol=1e-8, maxit=200)
    assert report.converged

def test_icc_vertex_patches():
    handle = testcommon.make_handle(0, 3)
    pre = build_preconditioner(handle, 'pafw', factorization='icc_sc', seed=0)
    b = assemble_rhs(handle, 1)
    _, report = pcg(handle.apply, pre.apply, b, maxit=200)
    assert report.converged
    assert all(s > 0.0 for s in pre.icc_shifts())
