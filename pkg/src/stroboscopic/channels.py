"""Kraus collections, the built-in decoherence families, and CPTP checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from stroboscopic.algebra import IDENTITY2, SIGMA1, SIGMA2, SIGMA3, Superoperator, _square
from stroboscopic.errors import InvariantViolation

TOL_TP = 1e-10


class Model(str, enum.Enum):
    DEPHASING = "dephasing"
    DEPOLARIZING = "depolarizing"
    ONE_PARAMETRIC = "one_parametric"


@dataclass(frozen=True)
class KrausFamilySpec:
    """A built-in channel family with decay ``kappa(t) = exp(-gamma t)``.

    ``a`` only matters for the one-parametric family, where it must lie in
    ``[0, 2]``. The endpoints are valid channels but have a degenerate
    generator spectrum.
    """

    model: Model
    gamma: float
    a: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise InvariantViolation(f"gamma must be positive, got {self.gamma}")
        if self.model is Model.ONE_PARAMETRIC:
            if self.a is None:
                raise InvariantViolation("one_parametric model needs the structure parameter a")
            if not 0 <= self.a <= 2:
                raise InvariantViolation(f"a must lie in [0, 2], got {self.a}")

    def kappa(self, t: float) -> float:
        return float(np.exp(-self.gamma * t))

    @property
    def on_degenerate_boundary(self) -> bool:
        """True at a in {0, 1, 2}, where the family loses its non-degenerate spectrum."""
        return self.model is Model.ONE_PARAMETRIC and self.a in (0, 1, 2)


@dataclass(frozen=True)
class KrausCollection:
    operators: tuple

    def __post_init__(self):
        ops = tuple(_square(k, "Kraus operator") for k in self.operators)
        if not ops:
            raise InvariantViolation("a Kraus collection needs at least one operator")
        if len({k.shape for k in ops}) != 1:
            raise InvariantViolation("Kraus operators have mismatched dimensions")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)


def kraus_at(spec: KrausFamilySpec, t: float) -> KrausCollection:
    """Concrete Kraus operators of a built-in family at time ``t``.

    Zero-weight operators (e.g. every non-identity term at ``t = 0``) are kept
    so the collection has the same length at every time.
    """
    if t < 0:
        raise InvariantViolation(f"t must be non-negative, got {t}")
    k = spec.kappa(t)
    if spec.model is Model.DEPHASING:
        ops = [np.sqrt((1 + k) / 2) * IDENTITY2, np.sqrt((1 - k) / 2) * SIGMA3]
    elif spec.model is Model.DEPOLARIZING:
        ops = [np.sqrt((1 + 3 * k) / 4) * IDENTITY2] + [np.sqrt((1 - k) / 4) * s for s in (SIGMA1, SIGMA2, SIGMA3)]
    else:
        a = spec.a
        ops = [
            np.sqrt((1 + 2 * k) / 3) * IDENTITY2,
            np.sqrt(a * (1 - k) / 3) * SIGMA1,
            np.sqrt((2 - a) * (1 - k) / 3) * SIGMA2,
        ]
    coll = KrausCollection(tuple(ops))
    ok, defect = check_trace_preserving(coll)
    if not ok:
        raise InvariantViolation(f"built-in family lost trace preservation (defect {defect:.3e})")
    return coll


def apply_channel(kraus: KrausCollection, x) -> np.ndarray:
    x = _square(x)
    if x.shape[0] != kraus.dim:
        raise ValueError(f"dimension mismatch: channel acts on {kraus.dim}, operator is {x.shape[0]}")
    return sum(k @ x @ k.conj().T for k in kraus)


def check_trace_preserving(kraus: KrausCollection, tol: float = TOL_TP) -> tuple[bool, float]:
    total = sum(k.conj().T @ k for k in kraus)
    defect = float(np.abs(total - np.eye(kraus.dim)).max())
    return defect <= tol, defect


def channel_superoperator(kraus: KrausCollection) -> Superoperator:
    """Column-stacked matrix of the channel: sum of ``kron(conj(K), K)``."""
    return Superoperator(sum(np.kron(k.conj(), k) for k in kraus))
