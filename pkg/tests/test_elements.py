import numpy as np
import pytest

from fdmderham.elements import (broken_transform, build_element, kron3,
                                reference_diff)
from fdmderham.errors import InvalidArgument
from fdmderham.fdm1d import build_fdm_basis


@pytest.mark.parametrize('p', [1, 2, 4])
def test_element_sizes(p):
    assert build_element(0, p).ndofs == (p + 1) ** 3
    assert build_element(1, p).ndofs == 3 * p * (p + 1) ** 2
    assert build_element(2, p).ndofs == 3 * p ** 2 * (p + 1)
    assert build_element(3, p).ndofs == p ** 3
    assert build_element(0, p).ninterior == (p - 1) ** 3
    assert build_element(3, p).ninterior == p ** 3


@pytest.mark.parametrize('p', [1, 2, 3, 6])
@pytest.mark.parametrize('k', [0, 1])
def test_reference_complex(k, p):
    basis = build_fdm_basis(p)
    first = reference_diff(k, p, basis).matrix
    second = reference_diff(k + 1, p, basis).matrix
    assert first.shape[0] == build_element(k + 1, p).ndofs
    prod = second @ first
    assert prod.nnz == 0 or abs(prod).max() < 1e-10


def test_gradient_interior_columns():
    p = 4
    basis = build_fdm_basis(p)
    element = build_element(0, p)
    grad = reference_diff(0, p, basis).matrix.tocsc()
    lam = basis.eigenvalues
    for col in np.flatnonzero(element.interior_mask):
        i, j, l = element.dof_index[col]
        values = np.sort(grad[:, col].data)
        np.testing.assert_allclose(
            values, np.sort(np.sqrt([lam[i], lam[j], lam[l]])), rtol=1e-12)


def test_divergence_interior_column():
    p = 2
    basis = build_fdm_basis(p)
    source, target = build_element(2, p), build_element(3, p)
    div = reference_diff(2, p, basis).matrix.tocsc()
    col = np.flatnonzero((source.dof_component == 0)
                         & np.all(source.dof_index == [1, 1, 1], axis=1))[0]
    assert source.interior_mask[col]
    column = div[:, col]
    row = np.flatnonzero(np.all(target.dof_index == [1, 1, 1], axis=1))[0]
    assert column.nnz == 1
    assert column.indices[0] == row
    assert column.data[0] == pytest.approx(np.sqrt(2.5), rel=1e-10)

def test_broken_transform_is_kronecker():
    p = 3
    basis = build_fdm_basis(p)
    g = broken_transform(0, p, basis).toarray()
    np.testing.assert_allclose(
        g, kron3(basis.G1d, basis.G1d, basis.G1d).toarray())
    # DP factors pass through unchanged
    assert broken_transform(3, p, basis).shape == (p ** 3, p ** 3)
    np.testing.assert_allclose(broken_transform(3, p, basis).toarray(),
                               np.eye(p ** 3))


def test_invalid_arguments():
    basis = build_fdm_basis(2)
    with pytest.raises(InvalidArgument):
        build_element(4, 2)
    with pytest.raises(InvalidArgument):
        build_element(0, 0)
    with pytest.raises(InvalidArgument):
        reference_diff(3, 2, basis)
    with pytest.raises(InvalidArgument):
        reference_diff(0, 3, basis)
