"""Which observables and which time instants determine the initial state.

The measured signal of an observable Q is ``m(t) = <exp(L* t) Q | rho(0)>``,
and ``exp(L t) = sum_k alpha_k(t) L^k`` over ``k < mu``. So one observable
probes rho(0) along its Krylov vectors ``(L*)^k Q``, and the time grid must make
``[alpha_k(t_j)]`` invertible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial
from typing import NamedTuple

import numpy as np

from stroboscopic.algebra import (
    TOL_CLUSTER_REL,
    TOL_RANK,
    Superoperator,
    check_hermitian,
    eig_clustered,
    hermitian_basis,
    minimal_polynomial,
    numerical_rank,
    real_representation,
    to_coords,
)
from stroboscopic.errors import InvariantViolation, NumericalError
from stroboscopic.generators import dual_generator, spectrum_report

TOL_DET = 1e-10
# confluent Vandermonde systems beyond this condition number give untrustworthy alphas
MAX_VANDERMONDE_COND = 1e12


@dataclass(frozen=True)
class ObservableSet:
    """Observables Q_1..Q_r. The identity Q_0 is always implied and never stored."""

    observables: tuple

    def __post_init__(self):
        qs = tuple(check_hermitian(q, name=f"observable {i + 1}") for i, q in enumerate(self.observables))
        if not qs:
            raise InvariantViolation("an observable set needs at least one observable")
        if len({q.shape for q in qs}) != 1:
            raise InvariantViolation("observables have mismatched dimensions")
        object.__setattr__(self, "observables", qs)

    @property
    def dim(self) -> int:
        return self.observables[0].shape[0]

    def __len__(self):
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def __getitem__(self, i):
        return self.observables[i]


def _as_set(qs) -> ObservableSet:
    return qs if isinstance(qs, ObservableSet) else ObservableSet(tuple(qs))


def _check_dims(l: Superoperator, n: int):
    if l.hilbert_dim != n:
        raise ValueError(f"dimension mismatch: generator acts on N={l.hilbert_dim}, observables have N={n}")


def krylov_subspace(l: Superoperator, q, mu: int | None = None) -> list[np.ndarray]:
    """The spanning set ``[(L*)^k q for k < mu]``; not rank-reduced."""
    q = check_hermitian(q, name="observable")
    _check_dims(l, q.shape[0])
    if mu is None:
        mu, _ = minimal_polynomial(l.matrix)
    dual = dual_generator(l)
    out = [q]
    for _ in range(mu - 1):
        out.append(dual.apply(out[-1]))
    return out


def krylov_dims(l: Superoperator, qs, tol_rank: float = TOL_RANK) -> list[int]:
    """Dimension of each observable's Krylov subspace.

    This is the number of distinct instants at which that observable must be
    measured in the minimal scheme.
    """
    qs = _as_set(qs)
    _check_dims(l, qs.dim)
    mu, _ = minimal_polynomial(l.matrix, tol_rank)
    dual_real = _scaled_dual(l)
    return [len(_krylov_basis(dual_real, to_coords(q), mu, tol_rank)) for q in qs]


def _scaled_dual(l: Superoperator) -> np.ndarray:
    """L* in real Hermitian coordinates, divided by its 2-norm (the Krylov span is unchanged)."""
    a = real_representation(dual_generator(l))
    norm = np.linalg.norm(a, 2)
    return a / norm if norm > 0 else a


def _krylov_basis(a: np.ndarray, v: np.ndarray, mu: int, tol_rank: float) -> list[np.ndarray]:
    """Orthonormal basis of span{v, a v, ..., a^(mu-1) v} by Arnoldi with re-orthogonalization.

    ``a`` is assumed to have unit 2-norm, so breakdown is judged against ``tol_rank``.
    """
    norm = np.linalg.norm(v)
    if norm == 0:
        return []
    basis = [v / norm]
    for _ in range(mu - 1):
        w = a @ basis[-1]
        for _ in range(2):
            for b in basis:
                w = w - (b @ w) * b
        norm = np.linalg.norm(w)
        if norm <= tol_rank:
            break
        basis.append(w / norm)
    return basis


def _spanned_dim(a: np.ndarray, vectors, mu: int, n: int, tol_rank: float) -> int:
    rows = [np.eye(n * n)[0]]
    for v in vectors:
        rows += _krylov_basis(a, v, mu, tol_rank)
    return numerical_rank(np.array(rows), tol_rank)


class Reconstructibility(NamedTuple):
    ok: bool
    achieved_dim: int
    required_dim: int


def krylov_coordinate_rows(l: Superoperator, qs, mu: int | None = None) -> np.ndarray:
    """Rows: coordinates of I, then ``(L*)^k Q_i`` ordered by observable, then k."""
    qs = _as_set(qs)
    n = qs.dim
    _check_dims(l, n)
    if mu is None:
        mu, _ = minimal_polynomial(l.matrix)
    basis = hermitian_basis(n)
    rows = [to_coords(np.eye(n), basis)]
    for q in qs:
        rows += [to_coords(k, basis) for k in krylov_subspace(l, q, mu)]
    return np.array(rows)


def is_reconstructible(l: Superoperator, qs, tol_rank: float = TOL_RANK) -> Reconstructibility:
    """Do I and the Krylov vectors of ``qs`` span all Hermitian operators?"""
    qs = _as_set(qs)
    _check_dims(l, qs.dim)
    mu, _ = minimal_polynomial(l.matrix, tol_rank)
    basis = hermitian_basis(qs.dim)
    achieved = _spanned_dim(_scaled_dual(l), [to_coords(q, basis) for q in qs], mu, qs.dim, tol_rank)
    required = qs.dim**2
    return Reconstructibility(achieved == required, achieved, required)


class AlphaFunctions:
    """Coefficients ``alpha_k(t)`` of ``exp(L t) = sum_{k < mu} alpha_k(t) L^k``.

    ``alpha(t)`` is the interpolating polynomial of ``exp(lambda t)`` on the
    roots of the minimal polynomial, with derivatives matched up to each root's
    multiplicity. The roots are rescaled by the spectral radius before the
    confluent Vandermonde system is built.
    """

    def __init__(self, l: Superoperator, tol_cluster_rel: float = TOL_CLUSTER_REL, tol_rank: float = TOL_RANK):
        m = l.matrix
        n = m.shape[0]
        self.mu, _ = minimal_polynomial(m, tol_rank)
        radius = np.abs(np.linalg.eigvals(m)).max()
        clusters = eig_clustered(m, tol_cluster_rel * max(1.0, radius), tol_rank)

        roots = []
        for c in clusters:
            roots.append((c.eigenvalue, self._root_index(m, c.eigenvalue, n - c.algebraic_mult, tol_rank)))
        if sum(s for _, s in roots) != self.mu:
            raise NumericalError(
                f"root multiplicities {[s for _, s in roots]} do not add up to the minimal polynomial degree {self.mu}"
            )
        self.roots = roots
        self.scale = max(1.0, max(abs(lam) for lam, _ in roots))

        rows = []
        for lam, s in roots:
            z = lam / self.scale
            for j in range(s):
                rows.append([factorial(k) / factorial(k - j) * z ** (k - j) if k >= j else 0.0 for k in range(self.mu)])
        self.vandermonde = np.array(rows, dtype=complex)
        self.condition = float(np.linalg.cond(self.vandermonde))
        if not np.isfinite(self.condition) or self.condition > MAX_VANDERMONDE_COND:
            raise NumericalError(f"confluent Vandermonde system is ill-conditioned (cond = {self.condition:.3e})")
        self._inv = np.linalg.inv(self.vandermonde)

    @staticmethod
    def _root_index(m, lam, target_rank, tol_rank) -> int:
        """Size of the largest Jordan block: smallest s with rank((m - lam)^s) == n - alg."""
        n = m.shape[0]
        shifted = m - lam * np.eye(n)
        scale = max(1.0, np.abs(m).max())
        power = np.eye(n, dtype=complex)
        for s in range(1, n + 1):
            power = power @ (shifted / scale)
            sv = np.linalg.svd(power, compute_uv=False)
            rank = int(np.sum(sv > tol_rank * max(sv[0], 1.0)))
            if rank <= target_rank:
                return s
        return n

    def __call__(self, t: float) -> np.ndarray:
        if t == 0:
            return np.eye(self.mu)[0]
        rhs = []
        for lam, s in self.roots:
            e = np.exp(lam * t)
            rhs += [(self.scale * t) ** j * e for j in range(s)]
        beta = self._inv @ np.array(rhs, dtype=complex)
        return (beta / self.scale ** np.arange(self.mu)).real

    def matrix(self, times) -> np.ndarray:
        """``[alpha_k(t_j)]`` with rows indexed by time and columns by k."""
        return np.array([self(t) for t in times])


def alpha_at(l: Superoperator, t: float) -> np.ndarray:
    if not np.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    return AlphaFunctions(l)(t)


@dataclass(frozen=True)
class TimeGridCertificate:
    times: tuple
    alpha_matrix: np.ndarray
    determinant: float
    valid: bool


def validate_time_grid(l: Superoperator, times, tol_det: float = TOL_DET, alphas: AlphaFunctions | None = None) -> TimeGridCertificate:
    """Check that ``det[alpha_k(t_j)]`` is nonzero on exactly mu time points.

    Singularity is judged relative to the product of the row norms, so the
    test is independent of the time and rate scales. Repeated instants are not
    an error; they simply yield an invalid certificate.
    """
    alphas = alphas or AlphaFunctions(l)
    times = tuple(float(t) for t in times)
    if len(times) != alphas.mu:
        raise ValueError(f"need exactly mu = {alphas.mu} time points, got {len(times)}")
    if not all(np.isfinite(times)):
        raise ValueError("time points must be finite")
    a = alphas.matrix(times)
    det = float(np.linalg.det(a))
    scale = float(np.prod(np.linalg.norm(a, axis=1)))
    valid = len(set(times)) == len(times) and scale > 0 and abs(det) > tol_det * scale
    return TimeGridCertificate(times, a, det, bool(valid))


def _sparse_candidates(n: int, max_support: int):
    """Traceless unit-norm combinations of basis elements, sparsest first."""
    elements = hermitian_basis(n).elements[1:]
    for support in range(1, max_support + 1):
        for idx in itertools.combinations(range(len(elements)), support):
            # leading sign fixed to + so each operator appears once up to sign
            for signs in itertools.product((1, -1), repeat=support - 1):
                q = elements[idx[0]] + sum(s * elements[i] for s, i in zip(signs, idx[1:]))
                yield q / np.sqrt(support)


def suggest_observables(
    l: Superoperator,
    seed: int = 0,
    max_combinations: int = 5000,
    max_random_attempts: int = 200,
    tol_rank: float = TOL_RANK,
) -> ObservableSet:
    """A reconstructible set of exactly eta traceless, unit-norm observables.

    Tries sparse basis combinations first, then sums of eigenvectors of L*
    taken across eigenvalues, then seeded random observables. Every answer is
    verified with :func:`is_reconstructible`; failure raises.
    """
    n = l.hilbert_dim
    eta = spectrum_report(l, tol_rank=tol_rank).eta
    basis = hermitian_basis(n)
    mu, _ = minimal_polynomial(l.matrix, tol_rank)
    dual_real = _scaled_dual(l)

    def passes(coords_list) -> bool:
        return _spanned_dim(dual_real, coords_list, mu, n, tol_rank) == n * n

    def to_set(coords_list) -> ObservableSet:
        ops = []
        for c in coords_list:
            q = sum(x * b for x, b in zip(c, basis.elements))
            ops.append(0.5 * (q + q.conj().T))
        return ObservableSet(tuple(ops))

    max_support = 3 if n == 2 else 2
    pool = [to_coords(q, basis) for q in _sparse_candidates(n, max_support)]
    for combo in itertools.islice(itertools.combinations(pool, eta), max_combinations):
        if passes(combo):
            return to_set(combo)

    w, v = np.linalg.eig(dual_real)
    groups: dict[int, list[np.ndarray]] = {}
    clusters = eig_clustered(dual_real, tol_rank=tol_rank)
    for i, lam in enumerate(w):
        key = int(np.argmin([abs(lam - c.eigenvalue) for c in clusters]))
        groups.setdefault(key, []).append(v[:, i])
    seeded = []
    for j in range(eta):
        c = sum(g[j].real + g[j].imag for g in groups.values() if len(g) > j)
        c = np.asarray(c, dtype=float)
        c[0] = 0.0
        norm = np.linalg.norm(c)
        if norm > 0:
            seeded.append(c / norm)
    if len(seeded) == eta and passes(seeded):
        return to_set(seeded)

    rng = np.random.default_rng(seed)
    for _ in range(max_random_attempts):
        cands = []
        for _ in range(eta):
            c = rng.normal(size=n * n)
            c[0] = 0.0
            cands.append(c / np.linalg.norm(c))
        if passes(cands):
            return to_set(cands)
    raise NumericalError(f"no reconstructible set of {eta} observables found after bounded search")
