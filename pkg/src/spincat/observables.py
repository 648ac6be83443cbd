"""Builders for the measurement operators, embedded in the joint 16-dim space.

Spin convention: ``S_z = diag(+1/2, -1/2)`` on the (up, down) basis of a
single spin factor. Every sign in the weak-value tables traces back to this
single choice.

Canonical observable order, used by every table and report:
``Pi_u1, Pi_u2, Pi_d1, Pi_d2, Pi_u1_S1, Pi_u2_S2, Pi_d1_S1, Pi_d2_S2``.
"""

from __future__ import annotations

import numpy as np

from .hilbert import Operator, tensor4

_I2 = np.eye(2, dtype=complex)
_PROJ_U = np.diag([1.0, 0.0]).astype(complex)  # |u><u| on a path factor
_PROJ_D = np.diag([0.0, 1.0]).astype(complex)  # |d><d|
_SZ = np.diag([0.5, -0.5]).astype(complex)  # hbar = 1

#: Fixed reading order of the eight canonical observables.
CANONICAL_LABELS = (
    "Pi_u1",
    "Pi_u2",
    "Pi_d1",
    "Pi_d2",
    "Pi_u1_S1",
    "Pi_u2_S2",
    "Pi_d1_S1",
    "Pi_d2_S2",
)


def _check_particle(particle: int) -> None:
    if particle not in (1, 2):
        raise ValueError(f"particle must be 1 or 2, got {particle}")


def _check_branch(branch: str) -> None:
    if branch not in ("u", "d"):
        raise ValueError(f"branch must be 'u' or 'd', got {branch!r}")


def path_projector(particle: int, branch: str) -> Operator:
    """Rank-8 projector onto one path branch of one particle."""
    _check_particle(particle)
    _check_branch(branch)
    proj = _PROJ_U if branch == "u" else _PROJ_D
    factors = [_I2, _I2, _I2, _I2]
    factors[1 + particle] = proj  # path slots are factors 3 and 4
    return tensor4(*factors, label=f"Pi_{branch}{particle}")


def spin_z(particle: int) -> Operator:
    """z spin of one particle: +1/2 on up, -1/2 on down, identity elsewhere."""
    _check_particle(particle)
    factors = [_I2, _I2, _I2, _I2]
    factors[particle - 1] = _SZ
    return tensor4(*factors, label=f"Sz{particle}")


def path_spin(particle: int, branch: str) -> Operator:
    """Composite path-projector times spin-z of the same particle.

    The two factors live in disjoint tensor slots, so the operator product
    equals the two-factor tensor observable; spectrum is {-1/2, 0, +1/2}.
    """
    proj = path_projector(particle, branch)
    sz = spin_z(particle)
    return Operator(proj.entries @ sz.entries, label=f"Pi_{branch}{particle}_S{particle}")


def canonical_observables() -> dict[str, Operator]:
    """The eight canonical observables keyed by label, in the fixed order."""
    ops = {}
    for particle in (1, 2):
        for branch in ("u", "d"):
            p = path_projector(particle, branch)
            ops[p.label] = p
            c = path_spin(particle, branch)
            ops[c.label] = c
    return {label: ops[label] for label in CANONICAL_LABELS}
