"""Pre/post-selected state construction and exact weak-value evaluation.

The weak value of an observable ``O`` between a pre-selected ``|i>`` and a
post-selected ``|f>`` is ``<f|O|i> / <f|i>``. It is complex in general; for
the real-amplitude states built here every canonical weak value comes out
purely real, and tests assert that instead of assuming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OrthogonalSelection
from .hilbert import DIM, Operator, StateVector, apply, inner
from .observables import canonical_observables

#: Minimum post-selection success probability |<f|i>|^2 for a weak value.
EPS_OVERLAP = 1e-9

NORMALIZATION_TOL = 1e-12


def _state(amplitudes: dict[int, complex]) -> StateVector:
    amps = np.zeros(DIM, dtype=complex)
    for flat, a in amplitudes.items():
        amps[flat] = a
    return StateVector(amps)


def preselect(alpha: float) -> StateVector:
    """Entangled pre-selected state, spin singlet times a path superposition.

    ``(1/sqrt2)(|ud> - |du>)_spin (sin(alpha)|ud> + cos(alpha)|du>)_path``.
    Physically meaningful runs keep ``alpha`` inside (0, pi/2); the builder
    accepts any real and leaves range policy to callers.
    """
    r = 1.0 / math.sqrt(2.0)
    s, c = math.sin(alpha), math.cos(alpha)
    # flat = s1*8 + s2*4 + p1*2 + p2
    return _state({
        0b0101: r * s,   # up1 dn2, u1 d2
        0b0110: r * c,   # up1 dn2, d1 u2
        0b1001: -r * s,  # dn1 up2, u1 d2
        0b1010: -r * c,  # dn1 up2, d1 u2
    })


def post_exchange() -> StateVector:
    """Post-selected state that flags spin exchange between the particles.

    Triplet component on the (u1, d2) paths plus singlet component on the
    (d1, u2) paths, all four amplitudes of magnitude 1/2.
    """
    return _state({
        0b0101: 0.5,
        0b1001: 0.5,
        0b0110: 0.5,
        0b1010: -0.5,
    })


def post_identity() -> StateVector:
    """Post-selected state under which nothing is exchanged: the product ket
    up1 dn2 on paths (d1, u2)."""
    return _state({0b0110: 1.0})


def post_state(name: str) -> StateVector:
    """Resolve a post-selection by name: 'exchange' or 'identity'."""
    if name == "exchange":
        return post_exchange()
    if name == "identity":
        return post_identity()
    raise ValueError(f"unknown post-selection {name!r}")


@dataclass(frozen=True)
class Selection:
    """A (pre, post) state pair with the cached overlap <f|i> and its square."""

    pre: StateVector
    post: StateVector
    overlap: complex = field(init=False)
    n0: float = field(init=False)

    def __post_init__(self):
        for name, v in (("pre", self.pre), ("post", self.post)):
            if abs(v.norm() - 1.0) > NORMALIZATION_TOL:
                raise ValueError(f"{name} state is not normalized: |v| = {v.norm()!r}")
        ov = inner(self.post, self.pre)
        object.__setattr__(self, "overlap", ov)
        object.__setattr__(self, "n0", abs(ov) ** 2)

    def require_valid(self) -> None:
        if self.n0 < EPS_OVERLAP:
            raise OrthogonalSelection(
                f"post-selection probability {self.n0:.3e} below {EPS_OVERLAP:g}; "
                "pre and post states are (numerically) orthogonal"
            )


@dataclass(frozen=True)
class WeakValue:
    value: complex
    observable_label: str

    @property
    def real(self) -> float:
        return self.value.real


def weak_value(op: Operator, sel: Selection) -> WeakValue:
    """Exact weak value <f|O|i> / <f|i>.

    Raises :class:`OrthogonalSelection` when the post-selection probability
    is below ``EPS_OVERLAP``; that threshold turns a silent blow-up near an
    orthogonal selection into a typed error.
    """
    sel.require_valid()
    numerator = inner(sel.post, apply(op, sel.pre))
    return WeakValue(numerator / sel.overlap, op.label)


def weak_value_table(sel: Selection) -> list[WeakValue]:
    """Weak values of the eight canonical observables, in the canonical order."""
    return [weak_value(op, sel) for op in canonical_observables().values()]
