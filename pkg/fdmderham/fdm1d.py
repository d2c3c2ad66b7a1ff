'''
One-dimensional building blocks: quadrature rules, Lagrange tabulation and
the fast-diagonalization (FDM) basis of P_p and DP_{p-1} on [-1, 1].
'''
import dataclasses
import logging
from typing import Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy.linalg import solve_triangular

from .errors import InvalidArgument, NumericalFailure

_logger = logging.getLogger(__name__)

# sweeps stop once the off-diagonal Frobenius norm is below this fraction
# of the full norm
JACOBI_THRESHOLD = 1e-14
JACOBI_MAX_SWEEPS = 100


def _readonly(*arrays):
    for a in arrays:
        a.setflags(write=False)


@dataclasses.dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    def __post_init__(self):
        _readonly(self.points, self.weights)

    def __len__(self):
        return len(self.points)

    def integrate(self, values):
        '''
        Integrates tabulated values along the first axis
        '''
        return np.tensordot(self.weights, values, axes=(0, 0))


def gauss_lobatto_rule(n: int) -> QuadratureRule:
    '''
    Gauss-Lobatto-Legendre rule with n points, endpoints included.

    Nodes are the zeros of (1-x^2) P'_{n-1}(x), found by Newton iteration
    on the Legendre recurrence starting from the Chebyshev-Lobatto points.
    '''
    if n < 2:
        raise InvalidArgument(f'Gauss-Lobatto rule needs n >= 2, got {n}')
    deg = n - 1
    x = -np.cos(np.pi * np.arange(n) / deg)
    vander = np.zeros((n, n))
    for _ in range(100):
        vander[:, 0] = 1.0
        vander[:, 1] = x
        for k in range(2, n):
            vander[:, k] = ((2 * k - 1) * x * vander[:, k - 1]
                            - (k - 1) * vander[:, k - 2]) / k
        xold = x
        x = xold - (x * vander[:, deg] - vander[:, deg - 1]) / (
            n * vander[:, deg])
        if np.max(np.abs(x - xold)) < 1e-16:
            break
    # symmetrize so that mirrored nodes are exact negatives
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    pn = legendre.legval(x, np.eye(n)[deg])
    w = 2.0 / (deg * n * pn ** 2)
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(x, w, 2 * n - 3)


def gauss_legendre_rule(n: int) -> QuadratureRule:
    if n < 1:
        raise InvalidArgument(f'Gauss-Legendre rule needs n >= 1, got {n}')
    x, w = legendre.leggauss(n)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(x, w, 2 * n - 1)


def lagrange_tabulate(nodes, eval_points) -> Tuple[np.ndarray, np.ndarray]:
    '''
    Returns (values, derivatives) with values[q, j] = l_j(x_q) for the
    Lagrange polynomials on the given nodes, using the barycentric form.
    '''
    nodes = np.asarray(nodes, dtype=float)
    xs = np.atleast_1d(np.asarray(eval_points, dtype=float))
    n = len(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise InvalidArgument('Lagrange nodes must be distinct')
    bw = 1.0 / np.prod(diff, axis=1)

    # differentiation matrix at the nodes themselves
    dmat = (bw[None, :] / bw[:, None]) / diff
    np.fill_diagonal(dmat, 0.0)
    np.fill_diagonal(dmat, -dmat.sum(axis=1))

    values = np.zeros((len(xs), n))
    derivs = np.zeros((len(xs), n))
    for q, x in enumerate(xs):
        hit = np.flatnonzero(x == nodes)
        if hit.size:
            values[q, hit[0]] = 1.0
            derivs[q] = dmat[hit[0]]
            continue
        a = bw / (x - nodes)
        total = a.sum()
        values[q] = a / total
        t = np.sum(a / (x - nodes)) / total
        derivs[q] = values[q] * (t - 1.0 / (x - nodes))
    return values, derivs


def reference_matrices_gll(p: int) -> Tuple[np.ndarray, np.ndarray]:
    '''
    Stiffness and mass matrices of the GLL Lagrange basis of P_p on [-1, 1]
    '''
    if p < 1:
        raise InvalidArgument(f'polynomial degree must be >= 1, got {p}')
    nodes = gauss_lobatto_rule(p + 1).points
    rule = gauss_legendre_rule(p + 1)
    val, der = lagrange_tabulate(nodes, rule.points)
    a = der.T @ (rule.weights[:, None] * der)
    b = val.T @ (rule.weights[:, None] * val)
    return 0.5 * (a + a.T), 0.5 * (b + b.T)


def jacobi_eigh(matrix, threshold=JACOBI_THRESHOLD,
                max_sweeps=JACOBI_MAX_SWEEPS):
    '''
    Cyclic Jacobi eigensolver for a small dense symmetric matrix.

    Returns (eigenvalues, eigenvectors) unsorted; columns of the second
    array are orthonormal eigenvectors.
    '''
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(a[iu] ** 2))
        if off <= threshold * norm:
            _logger.debug(f'Jacobi converged after {sweep} sweeps')
            return np.diag(a).copy(), v
        for ip in range(n - 1):
            for iq in range(ip + 1, n):
                apq = a[ip, iq]
                if apq == 0.0:
                    continue
                theta = (a[iq, iq] - a[ip, ip]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (
                    abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, ip].copy()
                colq = a[:, iq].copy()
                a[:, ip] = c * colp - s * colq
                a[:, iq] = s * colp + c * colq
                rowp = a[ip, :].copy()
                rowq = a[iq, :].copy()
                a[ip, :] = c * rowp - s * rowq
                a[iq, :] = s * rowp + c * rowq
                a[ip, iq] = a[iq, ip] = 0.0
                vp = v[:, ip].copy()
                vq = v[:, iq].copy()
                v[:, ip] = c * vp - s * vq
                v[:, iq] = s * vp + c * vq
    off = np.sqrt(2.0 * np.sum(a[iu] ** 2))
    raise NumericalFailure(
        'Jacobi eigensolver did not converge',
        sweeps=max_sweeps, offdiag=off, norm=norm)


def _fix_signs(vectors):
    '''
    Scales each column so that its entry of largest magnitude is positive.
    Near-ties are resolved by the lowest index.
    '''
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = np.abs(out[:, j])
        idx = np.flatnonzero(col >= (1.0 - 1e-8) * col.max())[0]
        if out[idx, j] < 0.0:
            out[:, j] *= -1.0
    return out


@dataclasses.dataclass(frozen=True)
class FdmBasis1D:
    '''
    FDM basis of P_p (coefficients S over the GLL Lagrange basis) and the
    matching orthonormal basis of DP_{p-1} (values R at the p Gauss-Legendre
    nodes).
    '''
    degree: int
    gll_nodes: np.ndarray
    S: np.ndarray
    eigenvalues: np.ndarray
    D: np.ndarray
    G1d: np.ndarray
    # FDM mass and stiffness on the reference interval
    B: np.ndarray
    A: np.ndarray
    gl_nodes: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        _readonly(self.gll_nodes, self.S, self.eigenvalues, self.D,
                  self.G1d, self.B, self.A, self.gl_nodes, self.R)

    @property
    def interface(self):
        return np.array([0, self.degree])

    @property
    def interior(self):
        return np.arange(1, self.degree)

    def tabulate_s(self, points):
        '''
        Values and derivatives of the FDM functions s_j at the points
        '''
        val, der = lagrange_tabulate(self.gll_nodes, points)
        return val @ self.S, der @ self.S

    def tabulate_r(self, points):
        '''
        Values of the DP functions r_j at the points
        '''
        val, _ = lagrange_tabulate(self.gl_nodes, points)
        return val @ self.R

    def tabulate_broken(self, points):
        '''
        Values of the L2-orthonormal broken functions at the points
        '''
        val, _ = self.tabulate_s(points)
        return np.linalg.solve(self.G1d.T, val.T).T


def broken_orthogonalize(basis: FdmBasis1D) -> np.ndarray:
    '''
    Returns G1d such that G1d^T G1d equals the FDM mass matrix, identity on
    interior indices and the symmetric square root of the interface Gram on
    {0, p}.
    '''
    p = basis.degree
    gamma = basis.interface
    gram = basis.B[np.ix_(gamma, gamma)]
    mu, vec = jacobi_eigh(gram)
    if np.any(mu <= 0.0):
        raise NumericalFailure('interface Gram matrix is not positive definite',
                               degree=p, eigenvalues=mu.tolist())
    root = (vec * np.sqrt(mu)) @ vec.T
    g1d = np.eye(p + 1)
    g1d[np.ix_(gamma, gamma)] = 0.5 * (root + root.T)
    return g1d


def build_fdm_basis(p: int) -> FdmBasis1D:
    if p < 1:
        raise InvalidArgument(f'polynomial degree must be >= 1, got {p}')
    nodes = gauss_lobatto_rule(p + 1).points
    a_gll, b_gll = reference_matrices_gll(p)
    inner = np.arange(1, p)
    gamma = np.array([0, p])

    s = np.eye(p + 1)
    lam = np.zeros(p)
    lam[0] = 2.0
    if p > 1:
        chol = np.linalg.cholesky(b_gll[np.ix_(inner, inner)])
        tmp = solve_triangular(chol, a_gll[np.ix_(inner, inner)], lower=True)
        reduced = solve_triangular(chol, tmp.T, lower=True)
        mu, vec = jacobi_eigh(0.5 * (reduced + reduced.T))
        order = np.argsort(mu, kind='stable')
        mu, vec = mu[order], vec[:, order]
        if np.any(mu <= 0.0):
            raise NumericalFailure('nonpositive generalized eigenvalue',
                                   degree=p, eigenvalues=mu.tolist())
        s_ii = _fix_signs(solve_triangular(chol.T, vec, lower=False))
        s_ig = -s_ii @ (s_ii.T @ b_gll[np.ix_(inner, gamma)])
        s[np.ix_(inner, inner)] = s_ii
        s[np.ix_(inner, gamma)] = s_ig
        lam[1:] = mu

    b_fdm = s.T @ b_gll @ s
    a_fdm = s.T @ a_gll @ s

    gl = gauss_legendre_rule(p)
    _, der = lagrange_tabulate(nodes, gl.points)
    ds = der @ s
    r = np.empty((p, p))
    r[:, 0] = lam[0] ** -0.5
    r[:, 1:] = ds[:, inner] / np.sqrt(lam[1:])
    d = r.T @ (gl.weights[:, None] * ds)
    d[:, inner] = 0.0
    d[inner, inner] = np.sqrt(lam[1:])

    basis = FdmBasis1D(degree=p, gll_nodes=nodes.copy(), S=s,
                       eigenvalues=lam, D=d, G1d=np.eye(p + 1),
                       B=0.5 * (b_fdm + b_fdm.T), A=0.5 * (a_fdm + a_fdm.T),
                       gl_nodes=gl.points.copy(), R=r)
    basis = dataclasses.replace(basis, G1d=broken_orthogonalize(basis))
    _logger.debug(f'FDM basis p={p}: eigenvalues {lam}')
    return basis
