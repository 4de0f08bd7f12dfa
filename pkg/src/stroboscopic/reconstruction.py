"""Forward simulation of measurement records and recovery of rho(0).

Three independent routes are provided:

* :func:`reconstruct_alpha` solves ``[alpha_k(t_j)] c_i = m_i`` per observable
  for the projections ``c_ik = <(L*)^k Q_i | rho(0)>`` and then assembles
  rho(0) from them.
* :func:`reconstruct_direct` treats every sample ``m_i(t_j) =
  <exp(L* t_j) Q_i | rho(0)>`` as one linear constraint.
* :func:`dephasing_closed_form` evaluates the explicit two-level dephasing
  formula.

All of them solve in real Hermitian-basis coordinates with the identity
coordinate pinned by ``Tr rho = 1``, and return both the raw linear estimate
and its projection onto the density matrices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from stroboscopic.algebra import (
    PAULI,
    TOL_RANK,
    Superoperator,
    check_hermitian,
    from_coords,
    hermitian_basis,
    matrix_exp_many,
    numerical_rank,
    to_coords,
    vec,
)
from stroboscopic.errors import (
    InvariantViolation,
    NotReconstructibleError,
    RankDeficientError,
    SingularTimeGridError,
)
from stroboscopic.jsonio import ParseError, decode_matrix, encode_matrix
from stroboscopic.observability import (
    TOL_DET,
    AlphaFunctions,
    ObservableSet,
    _as_set,
    is_reconstructible,
    krylov_coordinate_rows,
    validate_time_grid,
)

TOL_TRACE = 1e-12
TOL_PSD = 1e-10


class Method(str, enum.Enum):
    ALPHA = "alpha"
    DIRECT = "direct"
    CLOSED_FORM = "closed-form"


def check_density_matrix(rho, name: str = "state") -> np.ndarray:
    rho = check_hermitian(rho, name=name)
    tr = np.trace(rho).real
    if abs(tr - 1) > TOL_TRACE:
        raise InvariantViolation(f"{name} has trace {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -TOL_PSD:
        raise InvariantViolation(f"{name} is not positive semidefinite (min eigenvalue {lo:.3e})")
    return rho


def bloch_to_density(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return 0.5 * (np.eye(2) + sum(x * p for x, p in zip(s, PAULI)))


def density_to_bloch(rho) -> np.ndarray:
    return np.array([np.trace(p @ rho).real for p in PAULI])


def random_density_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank random state ``G G^dag / Tr(G G^dag)`` with complex Gaussian G."""
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def project_to_physical(raw) -> np.ndarray:
    """Closest density matrix in Frobenius norm.

    Hermitizes, then projects the eigenvalues onto the probability simplex:
    a common shift is subtracted and negatives are clipped to zero so the
    spectrum sums to one. States that are already physical come back unchanged.
    """
    raw = np.asarray(raw, dtype=complex)
    h = 0.5 * (raw + raw.conj().T)
    w, v = np.linalg.eigh(h)
    if w.max() <= 0:
        raise InvariantViolation("cannot project to a state: no positive eigenvalue left after clipping")
    if w.min() >= 0 and abs(w.sum() - 1) <= TOL_TRACE:
        return h
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    k = np.nonzero(u - (css - 1) / np.arange(1, len(u) + 1) > 0)[0][-1]
    shift = (css[k] - 1) / (k + 1)
    p = np.clip(w - shift, 0, None)
    return (v * p) @ v.conj().T


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcomes ``values[i, j] = Tr(Q_i rho(t_j))``."""

    observables: ObservableSet
    times: tuple
    values: np.ndarray
    noise_sigma: float = 0.0

    def __post_init__(self):
        obs = _as_set(self.observables)
        times = tuple(float(t) for t in self.times)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(obs), len(times)):
            raise InvariantViolation(
                f"values shape {values.shape} does not match {len(obs)} observables x {len(times)} times"
            )
        if not np.all(np.isfinite(values)) or not all(np.isfinite(times)):
            raise InvariantViolation("record contains non-finite values")
        if self.noise_sigma < 0:
            raise InvariantViolation("noise_sigma must be non-negative")
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "noise_sigma", float(self.noise_sigma))

    def to_dict(self) -> dict:
        return {
            "observables": [encode_matrix(q) for q in self.observables],
            "times": list(self.times),
            "values": self.values.tolist(),
            "noise_sigma": self.noise_sigma,
        }

    @classmethod
    def from_dict(cls, data: dict) -> MeasurementRecord:
        try:
            return cls(
                ObservableSet(tuple(decode_matrix(q) for q in data["observables"])),
                tuple(data["times"]),
                np.asarray(data["values"], dtype=float),
                float(data.get("noise_sigma", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed measurement record: {exc!r}") from None


@dataclass(frozen=True)
class ReconstructionResult:
    rho0: np.ndarray
    raw_estimate: np.ndarray
    residual: float
    condition: float
    method: Method
    projections: np.ndarray | None = field(default=None, repr=False)

    @property
    def bloch(self) -> np.ndarray:
        if self.rho0.shape != (2, 2):
            raise ValueError("Bloch coordinates are only defined for N = 2")
        return density_to_bloch(self.rho0)

    def to_dict(self) -> dict:
        out = {
            "method": self.method.value,
            "matrix": encode_matrix(self.rho0),
            "raw_estimate": encode_matrix(self.raw_estimate),
            "residual": self.residual,
            "condition": self.condition,
        }
        if self.rho0.shape == (2, 2):
            out["bloch"] = self.bloch.tolist()
            out["raw_bloch"] = density_to_bloch(self.raw_estimate).tolist()
        if self.projections is not None:
            out["projections"] = self.projections.tolist()
        return out


def simulate_measurements(
    l: Superoperator,
    rho0,
    qs,
    times,
    noise_sigma: float = 0.0,
    seed: int | None = None,
) -> MeasurementRecord:
    """Exact expectations along ``exp(L t) rho0``, plus optional seeded Gaussian noise."""
    rho0 = check_density_matrix(rho0)
    qs = _as_set(qs)
    if rho0.shape[0] != l.hilbert_dim or qs.dim != l.hilbert_dim:
        raise ValueError("dimension mismatch between generator, state and observables")
    if any(t < 0 for t in times):
        raise InvariantViolation("measurement times must be non-negative")
    if noise_sigma < 0:
        raise InvariantViolation("noise_sigma must be non-negative")
    values = _expectations(l, rho0, qs, times)
    if noise_sigma > 0:
        values = values + np.random.default_rng(seed).normal(scale=noise_sigma, size=values.shape)
    return MeasurementRecord(qs, tuple(times), values, noise_sigma)


def _expectations(l: Superoperator, rho, qs, times) -> np.ndarray:
    """``Tr(Q_i rho(t_j))`` as an r x p array."""
    if len(times) == 0:
        return np.empty((len(qs), 0))
    rho_t = matrix_exp_many(l.matrix, times) @ vec(rho)
    q_rows = np.array([vec(q) for q in qs]).conj()
    return (q_rows @ rho_t.T).real


def _predicted(l: Superoperator, raw: np.ndarray, record: MeasurementRecord) -> np.ndarray:
    return _expectations(l, raw, record.observables, record.times)


def _solve_pinned_trace(rows: np.ndarray, rhs: np.ndarray, n: int, tol_rank: float):
    """Least squares for Hermitian coordinates with the identity coordinate fixed by Tr = 1.

    Returns ``(coords, rank_ok, condition)``.
    """
    x0 = 1 / np.sqrt(n)
    reduced = rows[:, 1:]
    b = rhs - rows[:, 0] * x0
    rank = numerical_rank(reduced, tol_rank) if reduced.size else 0
    sol, *_ = np.linalg.lstsq(reduced, b, rcond=None)
    s = np.linalg.svd(reduced, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    return np.concatenate([[x0], sol]), rank == n * n - 1, cond


def reconstruct_alpha(
    l: Superoperator,
    record: MeasurementRecord,
    tol_rank: float = TOL_RANK,
    tol_det: float = TOL_DET,
) -> ReconstructionResult:
    """Recover rho(0) through the projections ``<(L*)^k Q_i | rho(0)>``.

    Every observable must be sampled on a common grid of at least mu instants.
    With exactly mu instants the grid must pass :func:`validate_time_grid`.
    """
    qs = record.observables
    n = qs.dim
    check = is_reconstructible(l, qs, tol_rank)
    if not check.ok:
        raise NotReconstructibleError(
            f"observability condition failed: identity plus the Krylov subspaces of the observables "
            f"span {check.achieved_dim} of {check.required_dim} dimensions"
        )
    alphas = AlphaFunctions(l, tol_rank=tol_rank)
    mu = alphas.mu
    p = len(record.times)
    if p < mu:
        raise SingularTimeGridError(f"time-grid condition failed: {p} instants given, at least mu = {mu} needed")
    if p == mu:
        cert = validate_time_grid(l, record.times, tol_det, alphas)
        a = cert.alpha_matrix
        grid_ok = cert.valid
    else:
        a = alphas.matrix(record.times)
        s = np.linalg.svd(a, compute_uv=False)
        grid_ok = s[-1] > tol_det * s[0]
    if not grid_ok:
        raise SingularTimeGridError("time-grid condition failed: det[alpha_k(t_j)] vanishes on these instants")

    projections = np.array([np.linalg.lstsq(a, m, rcond=None)[0] for m in record.values])
    rows = krylov_coordinate_rows(l, qs, mu)
    rhs = np.concatenate([[1.0], projections.ravel()])
    coords, rank_ok, cond = _solve_pinned_trace(rows, rhs, n, tol_rank)
    if not rank_ok:
        raise RankDeficientError("stacked projection system is rank deficient")
    raw = from_coords(coords, hermitian_basis(n))
    residual = float(np.linalg.norm(_predicted(l, raw, record) - record.values))
    return ReconstructionResult(
        project_to_physical(raw), raw, residual, cond * float(np.linalg.cond(a)), Method.ALPHA, projections
    )


def reconstruct_direct(l: Superoperator, record: MeasurementRecord, tol_rank: float = TOL_RANK) -> ReconstructionResult:
    """Recover rho(0) from one linear constraint per sample, without the alpha functions.

    Accepts any number of instants. A rank-deficient system is diagnosed: if
    the observables themselves are insufficient :class:`NotReconstructibleError`
    is raised, otherwise the instants are blamed.
    """
    qs = record.observables
    n = qs.dim
    if l.hilbert_dim != n:
        raise ValueError("dimension mismatch between generator and record")
    basis = hermitian_basis(n)
    dual = l.matrix.conj().T
    rows = [to_coords(np.eye(n), basis)]
    rhs = [1.0]
    heis_all = matrix_exp_many(dual, record.times) if record.times else []
    for j, heis in enumerate(heis_all):
        for i, q in enumerate(qs):
            evolved = (heis @ vec(q)).reshape(n, n, order="F")
            rows.append(to_coords(0.5 * (evolved + evolved.conj().T), basis))
            rhs.append(record.values[i, j])
    coords, rank_ok, cond = _solve_pinned_trace(np.array(rows), np.array(rhs), n, tol_rank)
    if not rank_ok:
        check = is_reconstructible(l, qs, tol_rank)
        if not check.ok:
            raise NotReconstructibleError(
                f"observability condition failed: identity plus the Krylov subspaces of the observables "
                f"span {check.achieved_dim} of {check.required_dim} dimensions"
            )
        raise RankDeficientError("measurement instants do not determine rho(0): stacked system is rank deficient")
    raw = from_coords(coords, basis)
    residual = float(np.linalg.norm(_predicted(l, raw, record) - record.values))
    return ReconstructionResult(project_to_physical(raw), raw, residual, cond, Method.DIRECT)


def dephasing_closed_form(gamma: float, t1: float, t2: float, m1_t1: float, m2_t1: float, m2_t2: float) -> ReconstructionResult:
    """Explicit state for dephasing with ``Q1 = sigma1`` (read at t1) and ``Q2 = sigma2 + sigma3`` (read at t1, t2)."""
    if gamma <= 0:
        raise InvariantViolation(f"gamma must be positive, got {gamma}")
    if t1 < 0 or t2 < 0:
        raise InvariantViolation("times must be non-negative")
    e1, e2 = np.exp(-gamma * t1), np.exp(-gamma * t2)
    if t1 == t2 or e1 == e2:
        raise SingularTimeGridError("time-grid condition failed: the two instants of Q2 coincide")
    s1 = m1_t1 * np.exp(gamma * t1)
    s2 = (m2_t1 - m2_t2) / (e1 - e2)
    s3 = (m2_t2 * e1 - m2_t1 * e2) / (e1 - e2)
    raw = bloch_to_density([s1, s2, s3]).astype(complex)
    misfit = np.array([s1 * e1 - m1_t1, s2 * e1 + s3 - m2_t1, s2 * e2 + s3 - m2_t2])
    cond = float(np.linalg.cond(np.array([[e1, 1.0], [e2, 1.0]])))
    return ReconstructionResult(project_to_physical(raw), raw, float(np.linalg.norm(misfit)), cond, Method.CLOSED_FORM)
