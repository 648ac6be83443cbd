"""Dense complex linear algebra over the joint (spin1, spin2, path1, path2) space.

Basis ordering contract (everything in the package depends on it):

* four two-level factors, ordered ``(spin1, spin2, path1, path2)``;
* spin bit 0 means up, 1 means down; path bit 0 means the u branch, 1 the d branch;
* flat index ``k = s1*8 + s2*4 + p1*2 + p2``, so kets read like
  ``|s1 s2> |p1 p2>`` with spins grouped before paths.

``tensor4`` builds 16x16 operators as the Kronecker product of four 2x2
factors in exactly this order, which keeps the flat-index convention and the
operator embedding consistent by construction.

Matrix exponentials of Hermitian operators go through an exact spectral
decomposition rather than a truncated series: the space is only
16-dimensional and exactness removes a tolerance from every downstream
check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonHermitianInput

DIM = 16

#: Absolute tolerance for the Hermiticity check in :func:`spectral`.
HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class BasisIndex:
    """One joint basis label; round-trips with the flat index in [0, 16)."""

    s1: int
    s2: int
    p1: int
    p2: int

    def __post_init__(self):
        for name in ("s1", "s2", "p1", "p2"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1, got {getattr(self, name)}")

    @property
    def flat(self) -> int:
        return self.s1 * 8 + self.s2 * 4 + self.p1 * 2 + self.p2

    @classmethod
    def from_flat(cls, k: int) -> "BasisIndex":
        if not 0 <= k < DIM:
            raise ValueError(f"flat index out of range: {k}")
        return cls((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1)


def _frozen_array(a, shape) -> np.ndarray:
    out = np.array(a, dtype=complex).reshape(shape)
    if not np.all(np.isfinite(out.view(float))):
        raise ValueError("non-finite entries")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateVector:
    """16 complex amplitudes over the joint basis, indexed by ``BasisIndex.flat``."""

    amps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amps", _frozen_array(self.amps, (DIM,)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    @classmethod
    def basis_state(cls, index: BasisIndex | int) -> "StateVector":
        k = index.flat if isinstance(index, BasisIndex) else int(index)
        amps = np.zeros(DIM, dtype=complex)
        amps[k] = 1.0
        return cls(amps)


@dataclass(frozen=True)
class Operator:
    """16x16 complex matrix with a human-readable label."""

    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen_array(self.entries, (DIM, DIM)))

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T)) <= tol)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and an orthonormal eigenbasis, columns of ``vectors``.

    Most operators here are highly degenerate, so individual eigenvectors are
    only fixed up to a rotation inside each eigenspace; consumers must rely on
    spectral projectors, never on particular columns.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float).reshape(DIM)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "vectors", _frozen_array(self.vectors, (DIM, DIM)))

    def eigenvector(self, k: int) -> StateVector:
        return StateVector(self.vectors[:, k])

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T


def inner(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>; conjugate-linear in the first argument."""
    return complex(np.vdot(a.amps, b.amps))


def apply(op: Operator, v: StateVector) -> StateVector:
    """Matrix-vector product ``op @ v``."""
    return StateVector(op.entries @ v.amps)


def tensor4(f1, f2, f3, f4, label: str = "") -> Operator:
    """Embed four 2x2 factors, ordered (spin1, spin2, path1, path2), into the joint space."""
    mats = []
    for f in (f1, f2, f3, f4):
        m = np.asarray(f, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"factor must be 2x2, got shape {m.shape}")
        mats.append(m)
    out = np.kron(np.kron(np.kron(mats[0], mats[1]), mats[2]), mats[3])
    return Operator(out, label=label)


def identity(label: str = "I") -> Operator:
    return Operator(np.eye(DIM, dtype=complex), label=label)


def spectral(op: Operator) -> SpectralDecomposition:
    """Full eigendecomposition of a Hermitian operator, eigenvalues ascending.

    Raises :class:`NonHermitianInput` when the Hermiticity defect exceeds
    ``HERMITICITY_TOL``. ``np.linalg.eigh`` is deterministic for identical
    input, which makes every consumer reproducible.
    """
    defect = float(np.max(np.abs(op.entries - op.entries.conj().T)))
    if defect > HERMITICITY_TOL:
        raise NonHermitianInput(
            f"operator {op.label!r} is not Hermitian (defect {defect:.3e})"
        )
    ev, vec = np.linalg.eigh(op.entries)
    return SpectralDecomposition(ev, vec)


def matexp_neg(op: Operator, t: float) -> Operator:
    """Contraction ``exp(-op * t)`` of a Hermitian operator, via the spectral path.

    The result is Hermitian positive-definite for real ``t >= 0``.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    dec = spectral(op)
    scaled = dec.vectors * np.exp(-dec.eigenvalues * t)
    out = scaled @ dec.vectors.conj().T
    out = (out + out.conj().T) / 2  # kill the rounding-level asymmetry
    return Operator(out, label=f"exp(-{op.label or 'O'}*{t:g})")
