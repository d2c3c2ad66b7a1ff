'''
Operators of the weighted Riesz maps

    a(u, v) = (v, beta u) + (d v, alpha d u)

on V^k: matrix-free application of the true operator by sum factorization,
the sparse auxiliary operator built from the L2-orthonormal broken basis,
the lowest-order coarse matrix, transfer matrices and right-hand sides.
'''
import logging
import math
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .elements import (FAMILIES, Family, broken_transform, build_element,
                       kron3, reference_diff, tabulate_element)
from .errors import InvalidArgument
from .fdm1d import build_fdm_basis, gauss_legendre_rule, gauss_lobatto_rule
from .helper.counters import FlopCounter
from .helper.rng import make_rng
from .mesh import build_dofmap

_logger = logging.getLogger(__name__)

# relative size of the mass shift that removes the curl-free kernel of the
# H(curl) potential problem
POTENTIAL_SHIFT = 1e-8

ANALYTIC_FIELDS = {
    'checker': lambda x: 1.0 + 0.5 * np.sign(
        np.sin(2 * np.pi * x[..., 0]) * np.sin(2 * np.pi * x[..., 1])
        * np.sin(2 * np.pi * x[..., 2])),
    'smooth': lambda x: 1.0 + 0.5 * np.prod(np.sin(np.pi * x), axis=-1),
}


class CoefficientField:
    '''
    Positive weight alpha or beta. A constant zero drops the term.
    '''

    def __init__(self, kind, value=None, values=None,
                 sampler: Optional[Callable] = None, label=None):
        if kind not in ('constant', 'cellwise', 'analytic'):
            raise InvalidArgument(f'Unknown coefficient kind "{kind}"')
        if kind == 'constant' and (value is None or not value >= 0.0):
            raise InvalidArgument(f'constant coefficient must be >= 0, got {value}')
        if kind != 'constant' and values is None and sampler is None:
            raise InvalidArgument(f'{kind} coefficient needs values or a sampler')
        self.kind = kind
        self.value = value
        self.values = None if values is None else np.asarray(values, dtype=float)
        self.sampler = sampler
        self.label = label or (str(value) if kind == 'constant' else kind)

    @property
    def is_zero(self):
        return self.kind == 'constant' and self.value == 0.0

    def sample(self, mesh, x):
        '''
        Values at the physical points x (ncells, nq, 3), shape (ncells, nq)
        '''
        if self.kind == 'constant':
            out = np.full(x.shape[:2], float(self.value))
        elif self.kind == 'cellwise':
            vals = self.values
            if vals is None:
                vals = np.asarray(self.sampler(mesh.cell_centroids()), dtype=float)
            if vals.shape != (mesh.ncells,):
                raise InvalidArgument(
                    f'cellwise coefficient needs {mesh.ncells} values, got {vals.shape}')
            out = np.repeat(vals[:, None], x.shape[1], axis=1)
        else:
            out = np.asarray(self.sampler(x), dtype=float)
        if self.kind != 'constant' and not np.all(out > 0.0):
            raise InvalidArgument(f'coefficient "{self.label}" must be positive')
        return out

    def scaled(self, c):
        if self.kind == 'constant':
            return constant(c * self.value)
        if self.values is not None:
            return CoefficientField(self.kind, values=c * self.values,
                                    label=f'{c:g}*{self.label}')
        fn = self.sampler
        return CoefficientField(self.kind, sampler=lambda x: c * fn(x),
                                label=f'{c:g}*{self.label}')


def constant(value):
    return CoefficientField('constant', value=float(value))


def cellwise(values):
    return CoefficientField('cellwise', values=values)


def analytic(sampler, label='analytic'):
    if isinstance(sampler, str):
        if sampler not in ANALYTIC_FIELDS:
            raise InvalidArgument(f'Unknown analytic field "{sampler}"')
        return CoefficientField('analytic', sampler=ANALYTIC_FIELDS[sampler],
                                label=sampler)
    return CoefficientField('analytic', sampler=sampler, label=label)


def half_jump(axis, low, high):
    '''
    Cellwise field equal to low where the cell centroid has x_axis < 1/2
    '''
    if axis not in (0, 1, 2):
        raise InvalidArgument(f'jump axis must be 0, 1 or 2, got {axis}')
    return CoefficientField(
        'cellwise', sampler=lambda c: np.where(c[:, axis] < 0.5, low, high),
        label=f'jump{axis}({low:g},{high:g})')


def as_coefficient(value):
    if isinstance(value, CoefficientField):
        return value
    return constant(value)


def pullback_weights(k, geom):
    '''
    Pointwise matrices W with (F u, F v) dx = u^T W v dxi for the k-form
    pullback F: identity, J^-T, J / det J and 1 / det J
    '''
    jac, det = geom.J, geom.detJ
    if k == 0:
        return det[..., None, None]
    if k == 3:
        return (1.0 / det)[..., None, None]
    if k == 1:
        jinv = np.linalg.inv(jac)
        return det[..., None, None] * (jinv @ jinv.swapaxes(-1, -2))
    return (jac.swapaxes(-1, -2) @ jac) / det[..., None, None]


def _evaluate(coeffs, tables, counter=None):
    '''
    Sum-factorized evaluation: coeffs (nc, n3, n2, n1) -> (nc, q3, q2, q1)
    '''
    t1, t2, t3 = tables
    a = np.einsum('clji,ai->clja', coeffs, t1, optimize=True)
    b = np.einsum('clja,bj->clba', a, t2, optimize=True)
    v = np.einsum('clba,gl->cgba', b, t3, optimize=True)
    if counter is not None:
        counter.contraction(a.size, t1.shape[1])
        counter.contraction(b.size, t2.shape[1])
        counter.contraction(v.size, t3.shape[1])
    return v


def _integrate(values, tables, counter=None):
    '''
    Transpose of _evaluate: values (nc, q3, q2, q1) -> (nc, n3, n2, n1)
    '''
    t1, t2, t3 = tables
    a = np.einsum('cgba,gl->clba', values, t3, optimize=True)
    b = np.einsum('clba,bj->clja', a, t2, optimize=True)
    u = np.einsum('clja,ai->clji', b, t1, optimize=True)
    if counter is not None:
        counter.contraction(a.size, t3.shape[0])
        counter.contraction(b.size, t2.shape[0])
        counter.contraction(u.size, t1.shape[0])
    return u


class OperatorHandle:
    '''
    Setup state of A^k on a mesh: basis, element, DOF map, quadrature,
    geometry and pointwise weights
    '''

    def __init__(self, mesh, k, p, alpha=1.0, beta=1.0, dirichlet='all',
                 counter=None):
        if k not in (0, 1, 2, 3):
            raise InvalidArgument(f'form degree must be in 0..3, got {k}')
        self.mesh = mesh
        self.k = k
        self.p = p
        self.dirichlet = dirichlet
        self.alpha = as_coefficient(alpha)
        self.beta = as_coefficient(beta)
        self.counter = counter or FlopCounter()
        self.basis = build_fdm_basis(p)
        self.element = build_element(k, p)
        self.dofmap = build_dofmap(mesh, self.element, dirichlet)
        self.rule = gauss_lobatto_rule(math.ceil(3 * (p + 1) / 2))
        self.tabulation = tabulate_element(k, p, self.basis, self.rule)
        self.geometry = mesh.geometry(self.rule.points)
        w = self.rule.weights
        self.qweights = np.kron(w, np.kron(w, w))
        self.dhat = None
        self.next_tabulation = None
        if k < 3:
            self.dhat = reference_diff(k, p, self.basis).matrix
            self.next_tabulation = tabulate_element(k + 1, p, self.basis, self.rule)
        self._set_weights()
        self._build_scatter()

    def _set_weights(self):
        self.mass_weights = None
        self.diff_weights = None
        if not self.beta.is_zero:
            self.mass_weights = self.weights(self.k, self.beta)
        if self.k < 3 and not self.alpha.is_zero:
            self.diff_weights = self.weights(self.k + 1, self.alpha)

    def weights(self, k, coefficient):
        scale = self.qweights[None, :] * coefficient.sample(self.mesh, self.geometry.x)
        return pullback_weights(k, self.geometry) * scale[..., None, None]

    def _build_scatter(self):
        cf = self.dofmap.cell_free
        flat = np.arange(cf.size)
        keep = cf.ravel() >= 0
        self.scatter = sp.csr_matrix(
            (np.ones(keep.sum()), (cf.ravel()[keep], flat[keep])),
            shape=(self.dofmap.nfree, cf.size))

    @property
    def size(self):
        return self.dofmap.nfree

    def with_coefficients(self, alpha, beta):
        '''
        Same discretization with other weights; the setup is shared
        '''
        other = object.__new__(OperatorHandle)
        other.__dict__.update(self.__dict__)
        other.alpha = as_coefficient(alpha)
        other.beta = as_coefficient(beta)
        other.counter = FlopCounter()
        other._set_weights()
        return other

    def gather(self, u):
        cf = self.dofmap.cell_free
        return np.where(cf >= 0, u[np.maximum(cf, 0)], 0.0)

    def scatter_add(self, local):
        self.counter.add(local.size)
        return self.scatter @ local.ravel()

    def form_action(self, coeffs, tabulation, weights, counter=None):
        '''
        Cell actions of a weighted mass form: coeffs (nc, nloc) in the FDM
        basis of the tabulated element, weights (nc, nq, ncomp, ncomp)
        '''
        el = tabulation.element
        nc = coeffs.shape[0]
        vals = []
        for m in range(el.ncomponents):
            tables = tabulation.component_tables(m)
            block = coeffs[:, el.component_slice(m)].reshape((nc,) + el.shape(m))
            vals.append(_evaluate(block, tables, counter).reshape(nc, -1))
        vals = np.stack(vals, axis=1)
        weighted = np.einsum('cqmn,cnq->cmq', weights, vals, optimize=True)
        if counter is not None:
            counter.contraction(weighted.size, el.ncomponents)
        nq = len(tabulation.table.points)
        out = np.empty_like(coeffs)
        for m in range(el.ncomponents):
            tables = tabulation.component_tables(m)
            qv = weighted[:, m].reshape(nc, nq, nq, nq)
            out[:, el.component_slice(m)] = _integrate(
                qv, tables, counter).reshape(nc, -1)
        return out

    def cell_action(self, coeffs, cells=None, counter=None):
        '''
        Cell matrices times coefficient rows; row c belongs to cells[c]
        '''
        if cells is None:
            cells = slice(None)
        out = np.zeros_like(coeffs)
        if self.mass_weights is not None:
            out += self.form_action(coeffs, self.tabulation,
                                    self.mass_weights[cells], counter)
        if self.diff_weights is not None:
            du = coeffs @ self.dhat.T
            dv = self.form_action(du, self.next_tabulation,
                                  self.diff_weights[cells], counter)
            out += dv @ self.dhat
            if counter is not None:
                counter.matvec(self.dhat, 2 * coeffs.shape[0])
        return out

    def apply(self, u):
        return apply_operator(self, u)

    def as_linear_operator(self):
        return LinearOperator((self.size, self.size), matvec=self.apply,
                              dtype=float)

    def cell_matrices(self, cells=None):
        '''
        Dense element matrices (ncells, nloc, nloc); the test oracle
        '''
        nloc = self.element.ndofs
        cells = np.arange(self.mesh.ncells) if cells is None else np.asarray(cells)
        out = np.empty((len(cells), nloc, nloc))
        eye = np.eye(nloc)
        for t, c in enumerate(cells):
            out[t] = self.cell_action(eye, np.full(nloc, c))
        return 0.5 * (out + out.swapaxes(1, 2))


def apply_operator(handle: OperatorHandle, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (handle.size,):
        raise InvalidArgument(
            f'vector of size {u.shape} does not match {handle.size} unconstrained DOFs')
    local = handle.cell_action(handle.gather(u), counter=handle.counter)
    return handle.scatter_add(local)


def assemble_cells(dofmap, cell_mats):
    '''
    Sums dense cell matrices into a CSR matrix over unconstrained DOFs
    '''
    cf = dofmap.cell_free
    nloc = cf.shape[1]
    r = np.repeat(cf, nloc, axis=1).ravel()
    c = np.tile(cf, (1, nloc)).ravel()
    v = cell_mats.reshape(len(cf), -1).ravel()
    keep = (r >= 0) & (c >= 0)
    mat = sp.coo_matrix((v[keep], (r[keep], c[keep])),
                        shape=(dofmap.nfree, dofmap.nfree)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def assemble_matrix(handle: OperatorHandle):
    '''
    Exact assembly of A from dense cell matrices (test oracle and lowest order)
    '''
    return assemble_cells(handle.dofmap, handle.cell_matrices())


def assemble_p1(mesh, k, alpha=1.0, beta=1.0, dirichlet='all'):
    handle = OperatorHandle(mesh, k, 1, alpha, beta, dirichlet)
    return assemble_matrix(handle)


def _gram_map(rows_matrix):
    '''
    For H (nrows x ncols) returns the pattern (r, c) of H^T diag(d) H and a
    sparse K with values = K @ d
    '''
    h = sp.csr_matrix(rows_matrix)
    h.eliminate_zeros()
    ncols = h.shape[1]
    rr, cc, src, coef = [], [], [], []
    for a in range(h.shape[0]):
        lo, hi = h.indptr[a], h.indptr[a + 1]
        idx, val = h.indices[lo:hi], h.data[lo:hi]
        ri, ci = np.meshgrid(idx, idx, indexing='ij')
        rr.append(ri.ravel())
        cc.append(ci.ravel())
        src.append(np.full(ri.size, a))
        coef.append(np.outer(val, val).ravel())
    key = np.concatenate(rr).astype(np.int64) * ncols + np.concatenate(cc)
    uniq, inv = np.unique(key, return_inverse=True)
    kmat = sp.csr_matrix((np.concatenate(coef), (inv.ravel(), np.concatenate(src))),
                         shape=(len(uniq), h.shape[0]))
    return uniq // ncols, uniq % ncols, kmat


def _assemble_pattern(dofmap, local_rows, local_cols, values):
    cf = dofmap.cell_free
    r = cf[:, local_rows].ravel()
    c = cf[:, local_cols].ravel()
    v = values.ravel()
    keep = (r >= 0) & (c >= 0)
    n = dofmap.nfree
    mat = sp.coo_matrix((v[keep], (r[keep], c[keep])), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def broken_mass_diagonal(handle, k, weights):
    '''
    Per-cell diagonal of the broken-basis mass matrix of V^k, (nc, nloc)
    '''
    tab = handle.tabulation if k == handle.k else tabulate_element(
        k, handle.p, handle.basis, handle.rule)
    el = tab.element
    nc = weights.shape[0]
    nq = len(handle.rule)
    out = np.empty((nc, el.ndofs))
    for m in range(el.ncomponents):
        tables = [t ** 2 for t in tab.component_tables(m, broken=True)]
        wmm = weights[:, :, m, m].reshape(nc, nq, nq, nq)
        out[:, el.component_slice(m)] = _integrate(wmm, tables).reshape(nc, -1)
    return out


def assemble_auxiliary(handle: OperatorHandle):
    '''
    P = sum_K Gbar^T diag(Mbar_beta) Gbar + Dbar^T diag(Mbar_alpha) Dbar
    '''
    k, p = handle.k, handle.p
    nc = handle.mesh.ncells
    blocks, diags = [], []
    if handle.mass_weights is not None:
        blocks.append(broken_transform(k, p, handle.basis))
        diags.append(broken_mass_diagonal(handle, k, handle.mass_weights))
    if handle.diff_weights is not None:
        gnext = broken_transform(k + 1, p, handle.basis)
        blocks.append(gnext @ handle.dhat)
        diags.append(broken_mass_diagonal(handle, k + 1, handle.diff_weights))
    if not blocks:
        return sp.csr_matrix((handle.size, handle.size))
    rows, cols, kmat = _gram_map(sp.vstack(blocks))
    values = (kmat @ np.hstack(diags).T).T
    mat = _assemble_pattern(handle.dofmap, rows, cols, values)
    _logger.debug(f'auxiliary k={k} p={p}: n={mat.shape[0]}, nnz={mat.nnz}, '
                  f'{nc} cells')
    return mat


def assemble_potential_auxiliary(handle: OperatorHandle, dirichlet=None):
    '''
    Auxiliary form of a^k(d phi, d psi) on the potential space V^{k-1}.

    For k=2 the curl-free kernel is removed by adding
    1e-8 * max(diag B) * diag(M)/max(diag M), with M the V^1 mass in the
    broken basis. The scale is taken from the global matrix, not per patch,
    because the shifted B is statically condensed before any patch is
    extracted, and its interior blocks contain the kernel too.
    '''
    k, p = handle.k, handle.p
    if k not in (1, 2):
        raise InvalidArgument(f'potential space needs k in (1, 2), got {k}')
    dirichlet = dirichlet or handle.dirichlet
    potential = build_dofmap(handle.mesh, build_element(k - 1, p), dirichlet)
    dprev = reference_diff(k - 1, p, handle.basis).matrix
    rows, cols, kmat = _gram_map(broken_transform(k, p, handle.basis) @ dprev)
    beta = handle.beta if not handle.beta.is_zero else constant(1.0)
    diag = broken_mass_diagonal(handle, k, handle.weights(k, beta))
    values = (kmat @ diag.T).T
    mat = _assemble_pattern(potential, rows, cols, values)
    if k == 2 and mat.shape[0]:
        prev = broken_mass_diagonal(handle, k - 1, handle.weights(k - 1, beta))
        grev = broken_transform(k - 1, p, handle.basis)
        mrows, mcols, mk = _gram_map(grev)
        mass = _assemble_pattern(potential, mrows, mcols, (mk @ prev.T).T)
        mdiag = mass.diagonal()
        shift = POTENTIAL_SHIFT * mat.diagonal().max() * mdiag / mdiag.max()
        mat = (mat + sp.diags(shift)).tocsr()
        mat.sort_indices()
    return mat, potential


def assemble_transfer(mesh, k, p, dirichlet='all', basis=None):
    '''
    Global d^{k-1}: V^{k-1} -> V^k over unconstrained DOFs
    '''
    if k not in (1, 2, 3):
        raise InvalidArgument(f'transfer needs k in (1, 2, 3), got {k}')
    basis = basis or build_fdm_basis(p)
    target = build_dofmap(mesh, build_element(k, p), dirichlet)
    source = build_dofmap(mesh, build_element(k - 1, p), dirichlet)
    return _assemble_injection(reference_diff(k - 1, p, basis).matrix,
                               target, source)


def _assemble_injection(local, target, source):
    '''
    Assembles a geometry-independent cell operator whose shared entries
    agree between cells; duplicates are set, not summed
    '''
    local = sp.coo_matrix(local)
    rt = target.cell_dofs[:, local.row].ravel()
    cs = source.cell_dofs[:, local.col].ravel()
    vals = np.tile(local.data, target.mesh.ncells)
    key = rt.astype(np.int64) * source.ndofs + cs
    _, first = np.unique(key, return_index=True)
    rt, cs, vals = rt[first], cs[first], vals[first]
    rf, cf = target.free_index[rt], source.free_index[cs]
    keep = (rf >= 0) & (cf >= 0)
    mat = sp.csr_matrix((vals[keep], (rf[keep], cf[keep])),
                        shape=(target.nfree, source.nfree))
    mat.eliminate_zeros()
    mat.sort_indices()
    return mat


def _embedding_1d(basis):
    '''
    FDM coefficients of the lowest-order 1D functions: hats for P_p,
    the constant for DP_{p-1}
    '''
    p = basis.degree
    rule = gauss_legendre_rule(p + 1)
    hats = np.stack([0.5 * (1 - rule.points), 0.5 * (1 + rule.points)], axis=1)
    s, _ = basis.tabulate_s(rule.points)
    ecg = np.zeros((p + 1, 2))
    ecg[0, 0] = ecg[p, 1] = 1.0
    ecg[1:p] = s[:, 1:p].T @ (rule.weights[:, None] * hats)
    edg = np.zeros((p, 1))
    edg[0, 0] = 1.0
    return ecg, edg


def assemble_embedding(mesh, k, p, dirichlet='all', basis=None):
    '''
    R0^T: interpolation of the p=1 space into the degree-p FDM space
    '''
    basis = basis or build_fdm_basis(p)
    ecg, edg = _embedding_1d(basis)
    blocks = []
    for fams in FAMILIES[k]:
        ops = [sp.csr_matrix(ecg if f is Family.CG else edg) for f in fams]
        blocks.append(kron3(ops[2], ops[1], ops[0]))
    local = sp.block_diag(blocks)
    fine = build_dofmap(mesh, build_element(k, p), dirichlet)
    coarse = build_dofmap(mesh, build_element(k, 1), dirichlet)
    return _assemble_injection(local, fine, coarse)


def rhs_representative(handle, seed):
    '''
    Random coefficient vector w, i.i.d. uniform on [-1, 1]
    '''
    rng = make_rng(seed, handle.k, handle.p, handle.size)
    return rng.uniform(-1.0, 1.0, size=handle.size)


def assemble_rhs(handle: OperatorHandle, seed):
    '''
    F = A|_{alpha=beta=1} w for a random representative w
    '''
    unit = handle.with_coefficients(1.0, 1.0)
    return apply_operator(unit, rhs_representative(handle, seed))
