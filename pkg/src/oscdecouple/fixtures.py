"""The post-disturbance 3-machine 9-bus system used throughout the tests.

``ninebus_literal`` is the three-digit printed field term by term, including
the ``+3.12`` constants in the angle equations and the ``-5.98`` constants in
every speed equation. That printed field has no equilibrium at the stated
``x_sep``: the angle constants make all angles drift together and the speed
constants of machines 2 and 3 leave a residual of about 40.

``ninebus_post_fault`` is the usable fixture: angles measured in a frame
co-rotating with the drift, and speed constants rebalanced so that ``x_sep``
is an equilibrium. Every ``sin``/``cos`` term is untouched, so all Taylor
coefficients of degree >= 1 match the printed field exactly.
"""

from __future__ import annotations

import numpy as np

from .poly import TrigTerm, TrigVectorField

X_SEP = np.array([3.12, 0.0, 3.12, 0.0, 3.12, 0.0])

# Steady-state rotor angles implied by the phase offsets of the coupling
# terms, up to a common shift: delta_2 - delta_1 = 0.728, delta_3 - delta_1 = 0.463.
STEADY_ANGLE_OFFSETS = np.array([0.0, 0.728, 0.463])

_D13 = (1, 0, -1, 0, 0, 0)
_D15 = (1, 0, 0, 0, -1, 0)
_D35 = (0, 0, 1, 0, -1, 0)

_TERMS = (
    TrigTerm(1, -1.14, "cos", _D13, -0.728),
    TrigTerm(1, -6.25, "sin", _D13, -0.728),
    TrigTerm(1, -1.56, "cos", _D15, -0.463),
    TrigTerm(1, -9.11, "sin", _D15, -0.463),
    TrigTerm(3, -4.22, "cos", _D13, -0.728),
    TrigTerm(3, 23.1, "sin", _D13, -0.728),
    TrigTerm(3, -6.04, "cos", _D35, 0.265),
    TrigTerm(3, -38.0, "sin", _D35, 0.265),
    TrigTerm(5, -12.3, "cos", _D15, -0.463),
    TrigTerm(5, 71.6, "sin", _D15, -0.463),
    TrigTerm(5, -12.8, "cos", _D35, 0.265),
    TrigTerm(5, 80.7, "sin", _D35, 0.265),
)


def _linear() -> np.ndarray:
    lin = np.zeros((6, 6))
    for i in range(3):
        lin[2 * i, 2 * i + 1] = 1.0
        lin[2 * i + 1, 2 * i + 1] = -0.5
    return lin


def ninebus_literal() -> TrigVectorField:
    """The printed post-disturbance field, constants included."""
    const = np.array([3.12, -5.98, 3.12, -5.98, 3.12, -5.98])
    return TrigVectorField(const, _linear(), _TERMS, (0, 2, 4))


def ninebus_post_fault() -> TrigVectorField:
    """Co-rotating, rebalanced field with an exact equilibrium at :data:`X_SEP`."""
    field = TrigVectorField(np.zeros(6), _linear(), _TERMS, (0, 2, 4))
    return field.with_constant(-field(X_SEP))


def ninebus_physical_equilibrium() -> np.ndarray:
    """``X_SEP`` with the steady-state angle offsets added (speeds zero)."""
    x = X_SEP.copy()
    x[[0, 2, 4]] += STEADY_ANGLE_OFFSETS
    return x


def ninebus_fault_scenario():
    """Bolted fault at bus 5 cleared by tripping line 5-7, with the tested durations.

    The fault-on field and the pre-fault state are reduced from the standard
    WSCC 9-bus network data by ``tools/wscc9_reduction.py``; its post-fault
    network reproduces the couplings and steady angles of :func:`ninebus_post_fault`.
    """
    from .io import fault_from_dict, read_package_json

    return fault_from_dict(read_package_json("ninebus_fault.json"))


def ninebus_system():
    """The post-fault fixture, its steady angles and the fault scenario as one input."""
    from .io import LoadedSystem

    scenario, durations = ninebus_fault_scenario()
    return LoadedSystem(
        "ninebus",
        ninebus_post_fault(),
        X_SEP.copy(),
        X_SEP[[0, 2, 4]] + STEADY_ANGLE_OFFSETS,
        None,
        scenario,
        durations,
    )
