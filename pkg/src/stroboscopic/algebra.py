"""Dense complex linear algebra for small open-system problems.

Everything here works on plain numpy arrays. Operators on an N-dimensional
Hilbert space are ``(N, N)`` arrays; superoperators act on column-stacked
operators and are ``(N**2, N**2)`` arrays wrapped in :class:`Superoperator`.

Column stacking is the convention that makes ``vec(A @ B @ C) ==
kron(C.T, A) @ vec(B)`` hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from stroboscopic.errors import InvariantViolation, NumericalError

TOL_HERM = 1e-12
TOL_RANK = 1e-10
TOL_CLUSTER_REL = 1e-8
# eigendecomposition route of matrix_exp is only used below this eigenvector condition number
_EXPM_EIG_MAX_COND = 1e6

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA1, SIGMA2, SIGMA3)


@dataclass(frozen=True)
class Superoperator:
    """A linear map on N x N operators stored as an N^2 x N^2 matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvariantViolation(f"superoperator matrix must be square, got shape {m.shape}")
        n = int(round(np.sqrt(m.shape[0])))
        if n * n != m.shape[0]:
            raise InvariantViolation(f"superoperator size {m.shape[0]} is not a perfect square")
        if not np.all(np.isfinite(m)):
            raise InvariantViolation("superoperator has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def hilbert_dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(x))

    def __add__(self, other: Superoperator) -> Superoperator:
        return Superoperator(self.matrix + other.matrix)

    def __mul__(self, scalar) -> Superoperator:
        return Superoperator(scalar * self.matrix)

    __rmul__ = __mul__


def _square(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvariantViolation(f"{name} must be square, got shape {a.shape}")
    return a


def is_hermitian(a, tol: float = TOL_HERM) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.abs(a - a.conj().T).max() <= tol


def check_hermitian(a, tol: float = TOL_HERM, name: str = "operator") -> np.ndarray:
    """Return ``a`` as a complex array, raising if it is not self-adjoint."""
    a = _square(a, name)
    if not np.all(np.isfinite(a)):
        raise InvariantViolation(f"{name} has non-finite entries")
    defect = np.abs(a - a.conj().T).max()
    if defect > tol:
        raise InvariantViolation(f"{name} is not Hermitian (max |A - A^dag| = {defect:.3e})")
    return a


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(a^dag b)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def vec(a) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v) -> np.ndarray:
    v = np.asarray(v)
    n = int(round(np.sqrt(v.size)))
    if v.ndim != 1 or n * n != v.size:
        raise ValueError(f"cannot unvec a vector of length {v.size}: not a perfect square")
    return v.reshape(n, n, order="F")


def sandwich_superop(a, c) -> Superoperator:
    """Superoperator of ``B -> a @ B @ c``, i.e. ``kron(c.T, a)``."""
    a = _square(a, "a")
    c = _square(c, "c")
    if a.shape != c.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {c.shape}")
    return Superoperator(np.kron(c.T, a))


def matrix_exp(m, t: float = 1.0) -> np.ndarray:
    """``exp(m t)``.

    Uses the eigendecomposition when ``m`` is diagonalizable with a
    well-conditioned eigenbasis, and scaling-and-squaring Pade otherwise.
    """
    m = _square(m)
    if not np.all(np.isfinite(m)):
        raise InvariantViolation("matrix has non-finite entries")
    n = m.shape[0]
    if t == 0:
        return np.eye(n, dtype=complex)
    mt = m * t
    with np.errstate(over="ignore", invalid="ignore"):
        w, v = np.linalg.eig(mt)
        if np.linalg.cond(v) < _EXPM_EIG_MAX_COND:
            out = (v * np.exp(w)) @ np.linalg.inv(v)
        else:
            out = scipy.linalg.expm(mt)
    if not np.all(np.isfinite(out)):
        raise NumericalError(f"matrix exponential overflowed (t * ||m|| = {abs(t) * np.abs(m).max():.3e})")
    return out


def matrix_exp_many(m, times) -> np.ndarray:
    """``exp(m t)`` for every ``t`` in ``times``, stacked along axis 0.

    Same method choice as :func:`matrix_exp`, but the eigendecomposition is
    done once and reused for all instants.
    """
    m = _square(m)
    if not np.all(np.isfinite(m)):
        raise InvariantViolation("matrix has non-finite entries")
    times = np.asarray(times, dtype=float).ravel()
    n = m.shape[0]
    w, v = np.linalg.eig(m)
    if np.linalg.cond(v) >= _EXPM_EIG_MAX_COND:
        return np.array([matrix_exp(m, t) for t in times]).reshape(len(times), n, n)
    vinv = np.linalg.inv(v)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.einsum("ij,tj,jk->tik", v, np.exp(np.outer(times, w)), vinv)
    out[times == 0] = np.eye(n)
    if not np.all(np.isfinite(out)):
        raise NumericalError("matrix exponential overflowed")
    return out


def numerical_rank(vectors, tol_rank: float = TOL_RANK) -> int:
    """Number of singular values above ``tol_rank`` times the largest one."""
    a = np.asarray([np.ravel(v) for v in vectors]) if not isinstance(vectors, np.ndarray) else vectors
    if a.size == 0:
        return 0
    s = np.linalg.svd(np.atleast_2d(a), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol_rank * s[0]))


@dataclass(frozen=True)
class EigenCluster:
    eigenvalue: complex
    algebraic_mult: int
    geometric_mult: int


def default_cluster_tol(m, rel: float = TOL_CLUSTER_REL) -> float:
    w = np.linalg.eigvals(_square(m))
    radius = np.abs(w).max() if w.size else 0.0
    return rel * max(1.0, radius)


def eig_clustered(m, tol_cluster: float | None = None, tol_rank: float = TOL_RANK) -> list[EigenCluster]:
    """Group numerically equal eigenvalues and attach their multiplicities.

    Two eigenvalues share a cluster only if every pair within it is closer than
    ``tol_cluster``. The representative is the cluster centroid, and the
    geometric multiplicity is ``n - rank(m - centroid * I)``, clamped to
    ``[1, algebraic_mult]``.
    """
    m = _square(m)
    n = m.shape[0]
    w = np.linalg.eigvals(m)
    if tol_cluster is None:
        tol_cluster = TOL_CLUSTER_REL * max(1.0, np.abs(w).max())
    if tol_cluster <= 0:
        raise ValueError("tol_cluster must be positive")

    groups: list[list[complex]] = []
    for lam in sorted(w, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if all(abs(lam - other) <= tol_cluster for other in g):
                g.append(lam)
                break
        else:
            groups.append([lam])

    eye = np.eye(n)
    scale = max(1.0, np.abs(m).max())
    clusters = []
    for g in groups:
        centroid = complex(np.mean(g))
        shifted = m - centroid * eye
        # absolute floor keeps rank(0 matrix) == 0 without a tiny relative threshold
        s = np.linalg.svd(shifted, compute_uv=False)
        rank = int(np.sum(s > max(tol_rank * s[0], tol_rank * scale)))
        geo = min(max(n - rank, 1), len(g))
        clusters.append(EigenCluster(centroid, len(g), geo))
    return clusters


def minimal_polynomial(m, tol_rank: float = TOL_RANK) -> tuple[int, np.ndarray]:
    """Degree and monic coefficients (highest power first) of the minimal polynomial.

    Grows ``{I, a, a^2, ...}`` with ``a = m / ||m||_2`` until the next power
    lies in the span of the previous ones. Each new power is orthogonalized
    against an orthonormal basis of the span built so far (Arnoldi on the
    left-multiplication map), so the dependence test compares a residual norm
    against ``tol_rank`` instead of taking the rank of badly scaled raw powers.
    """
    m = _square(m)
    n = m.shape[0]
    scale = np.linalg.norm(m, 2)
    if scale == 0:
        return 1, np.array([1.0, 0.0], dtype=complex)
    a = m / scale
    basis = [np.eye(n, dtype=complex).ravel() / np.sqrt(n)]
    powers = [np.eye(n, dtype=complex)]
    for deg in range(1, n + 1):
        powers.append(powers[-1] @ a)
        w = (a @ basis[-1].reshape(n, n)).ravel()
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        residual = np.linalg.norm(w)
        if residual <= tol_rank:
            stacked = np.array([p.ravel() for p in powers])
            c, *_ = np.linalg.lstsq(stacked[:-1].T, -stacked[-1], rcond=None)
            # undo the rescaling: coefficient of lambda^k picks up scale^(deg - k)
            coeffs = np.concatenate([[1.0], c[::-1] * scale ** np.arange(1, deg + 1)])
            return deg, coeffs
        basis.append(w / residual)
    raise NumericalError("minimal polynomial search exceeded the matrix size")


def poly_at_matrix(coeffs, m) -> np.ndarray:
    """Evaluate a polynomial (highest power first) at a square matrix by Horner's rule."""
    m = _square(m)
    out = np.zeros_like(m)
    eye = np.eye(m.shape[0])
    for c in coeffs:
        out = out @ m + c * eye
    return out


@dataclass(frozen=True)
class HermitianBasis:
    """Orthonormal basis of the N x N Hermitian operators, identity first."""

    dim: int
    elements: tuple

    @property
    def matrix(self) -> np.ndarray:
        """Columns are the vectorized basis elements."""
        return _basis_matrix(self.dim)


@lru_cache(maxsize=None)
def _gell_mann(n: int) -> tuple:
    elements = [np.eye(n, dtype=complex) / np.sqrt(n)]
    for j in range(n):
        for k in range(j + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((n, n), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            elements += [sym, anti]
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1
        d[l] = -l
        elements.append(np.diag(d / np.sqrt(l * (l + 1))).astype(complex))
    for e in elements:
        e.setflags(write=False)
    return tuple(elements)


@lru_cache(maxsize=None)
def _basis_matrix(n: int) -> np.ndarray:
    t = np.array([vec(e) for e in _gell_mann(n)]).T
    t.setflags(write=False)
    return t


def hermitian_basis(n: int) -> HermitianBasis:
    """Identity/sqrt(n) followed by generalized Gell-Mann matrices, all with unit HS norm.

    For ``n == 2`` this is ``{I, sigma1, sigma2, sigma3} / sqrt(2)``.
    """
    if n < 2:
        raise ValueError("hermitian_basis needs n >= 2")
    return HermitianBasis(n, _gell_mann(n))


def to_coords(q, basis: HermitianBasis | None = None) -> np.ndarray:
    """Real coordinates ``<B_a|q>`` of a Hermitian operator."""
    q = _square(q)
    basis = basis or hermitian_basis(q.shape[0])
    if basis.dim != q.shape[0]:
        raise ValueError(f"dimension mismatch: basis {basis.dim} vs operator {q.shape[0]}")
    return (basis.matrix.conj().T @ vec(q)).real


def from_coords(v, basis: HermitianBasis) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (basis.dim**2,):
        raise ValueError(f"expected {basis.dim**2} coordinates, got shape {v.shape}")
    return unvec(basis.matrix @ v)


def real_representation(l: Superoperator) -> np.ndarray:
    """Matrix of a hermiticity-preserving superoperator in Hermitian-basis coordinates.

    Entry ``[a, b]`` is ``<B_a | l(B_b)>``; it is real whenever ``l`` maps
    Hermitian operators to Hermitian operators.
    """
    t = _basis_matrix(l.hilbert_dim)
    return (t.conj().T @ l.matrix @ t).real
