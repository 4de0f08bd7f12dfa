"""Evolution generators and their spectral structure.

A generator L is stored as a column-stacked :class:`Superoperator`, so
``d vec(rho)/dt = L.matrix @ vec(rho)``. The spectral report carries the two
numbers that drive stroboscopic tomography: the index of cyclicity ``eta``
(largest geometric multiplicity, the minimal number of observables) and the
minimal polynomial degree ``mu`` (the number of time instants).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from stroboscopic.algebra import (
    SIGMA1,
    SIGMA2,
    SIGMA3,
    TOL_CLUSTER_REL,
    TOL_RANK,
    EigenCluster,
    Superoperator,
    _square,
    check_hermitian,
    eig_clustered,
    minimal_polynomial,
    unvec,
    vec,
)
from stroboscopic.channels import KrausFamilySpec, Model
from stroboscopic.errors import InvariantViolation

TOL_GENERATOR = 1e-10


@dataclass(frozen=True)
class GkslComponents:
    """Hamiltonian plus ``(jump_operator, rate)`` pairs of a GKSL master equation."""

    hamiltonian: np.ndarray | None = None
    jumps: tuple = ()
    dim: int | None = None

    def __post_init__(self):
        dims = set()
        h = self.hamiltonian
        if h is not None:
            h = check_hermitian(h, name="hamiltonian")
            dims.add(h.shape[0])
        jumps = []
        for op, rate in self.jumps:
            op = _square(op, "jump operator")
            if not np.isfinite(rate) or rate < 0:
                raise InvariantViolation(f"jump rates must be non-negative, got {rate}")
            dims.add(op.shape[0])
            jumps.append((op, float(rate)))
        if self.dim is not None:
            dims.add(self.dim)
        if len(dims) > 1:
            raise InvariantViolation(f"GKSL components have mismatched dimensions {sorted(dims)}")
        if not dims:
            raise InvariantViolation("cannot infer the Hilbert dimension of an empty GKSL description")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))
        object.__setattr__(self, "dim", dims.pop())


def gksl_generator(c: GkslComponents) -> Superoperator:
    n = c.dim
    eye = np.eye(n)
    out = np.zeros((n * n, n * n), dtype=complex)
    if c.hamiltonian is not None:
        h = c.hamiltonian
        out += -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for v, rate in c.jumps:
        vdv = v.conj().T @ v
        out += rate * (np.kron(v.conj(), v) - 0.5 * np.kron(eye, vdv) - 0.5 * np.kron(vdv.T, eye))
    return Superoperator(out)


def model_jumps(spec: KrausFamilySpec) -> GkslComponents:
    """Jump description whose GKSL generator equals the closed form of ``spec``."""
    g = spec.gamma
    if spec.model is Model.DEPHASING:
        jumps = [(SIGMA3, g / 2)]
    elif spec.model is Model.DEPOLARIZING:
        jumps = [(s, g / 4) for s in (SIGMA1, SIGMA2, SIGMA3)]
    else:
        jumps = [(SIGMA1, spec.a * g / 3), (SIGMA2, (2 - spec.a) * g / 3)]
    return GkslComponents(jumps=tuple(jumps), dim=2)


def model_generator(spec: KrausFamilySpec) -> Superoperator:
    """Closed-form generator of a built-in family, written out from its vectorized dissipator."""
    g = spec.gamma
    if spec.model is Model.DEPHASING:
        return Superoperator(-g * np.diag([0, 1, 1, 0]).astype(complex))
    if spec.model is Model.DEPOLARIZING:
        m = np.array([[1, 0, 0, -1], [0, 2, 0, 0], [0, 0, 2, 0], [-1, 0, 0, 1]], dtype=complex)
        return Superoperator(-g / 2 * m)
    a = spec.a
    m = -2 * np.eye(4) + a * np.kron(SIGMA1, SIGMA1) + (2 - a) * np.kron(SIGMA2.T, SIGMA2)
    return Superoperator(g / 3 * m)


def dual_generator(l: Superoperator) -> Superoperator:
    """Heisenberg-picture generator: the adjoint under ``<A|B> = Tr(A^dag B)``."""
    return Superoperator(l.matrix.conj().T)


def check_trace_preservation(l: Superoperator, tol: float = TOL_GENERATOR) -> tuple[bool, float]:
    """``vec(I)^dag L == 0``, i.e. ``Tr(L rho) == 0`` for every rho."""
    defect = float(np.abs(vec(np.eye(l.hilbert_dim)).conj() @ l.matrix).max())
    return defect <= tol, defect


def check_hermiticity_preservation(
    l: Superoperator, samples: int = 100, seed: int = 0, tol: float = TOL_GENERATOR
) -> tuple[bool, float]:
    rng = np.random.default_rng(seed)
    n = l.hilbert_dim
    defect = 0.0
    for _ in range(samples):
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q = x + x.conj().T
        y = unvec(l.matrix @ vec(q))
        defect = max(defect, float(np.abs(y - y.conj().T).max()))
    return defect <= tol, defect


@dataclass(frozen=True)
class SpectrumReport:
    clusters: tuple[EigenCluster, ...]
    eta: int
    mu: int
    minimal_polynomial: np.ndarray = field(repr=False)

    @property
    def degenerate(self) -> bool:
        return self.eta > 1

    @property
    def eigenvalues(self) -> list[complex]:
        return [c.eigenvalue for c in self.clusters]


def spectrum_report(
    l: Superoperator, tol_cluster_rel: float = TOL_CLUSTER_REL, tol_rank: float = TOL_RANK
) -> SpectrumReport:
    m = l.matrix
    radius = np.abs(np.linalg.eigvals(m)).max()
    clusters = eig_clustered(m, tol_cluster_rel * max(1.0, radius), tol_rank)
    mu, coeffs = minimal_polynomial(m, tol_rank)
    eta = max(c.geometric_mult for c in clusters)
    return SpectrumReport(tuple(clusters), eta, mu, coeffs)


def parameter_sweep(
    gamma: float, a_values, tol_cluster_rel: float = TOL_CLUSTER_REL, tol_rank: float = TOL_RANK
) -> list[tuple[float, SpectrumReport]]:
    """Spectrum of the one-parametric family at each ``a``; invalid ``a`` raises."""
    out = []
    for a in a_values:
        spec = KrausFamilySpec(Model.ONE_PARAMETRIC, gamma, float(a))
        out.append((float(a), spectrum_report(model_generator(spec), tol_cluster_rel, tol_rank)))
    return out
