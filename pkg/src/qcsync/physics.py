"""Physical model: media, link geometry and length/time kinematics.

All times are signed integer picoseconds and all lengths integer
micrometers. Velocities are exact rationals in micrometers per picosecond,
so converting a length to a time and back never drifts. Every conversion
rounds half away from zero.

A speed of ``c`` m/s equals ``c / 10**6`` um/ps (1 m = 10**6 um,
1 s = 10**12 ps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Hashable, Iterable, Union

from qcsync.errors import (
    DelayExceedsBudget,
    InvalidGeometry,
    NonPositiveTime,
    RefractionOutOfRange,
)

Picoseconds = int
Micrometers = int
NodeId = Hashable
Number = Union[int, float, str, Fraction]

SPEED_OF_LIGHT = 299_792_458  # m/s, exact by SI definition
CLASSICAL_FIBER_RATIO = Fraction(2, 3)
N_P_MIN = Fraction(1)
N_P_MAX = Fraction(3, 2)

PS_PER_UNIT = {"ps": 1, "ns": 10**3, "us": 10**6}
UM_PER_UNIT = {"um": 1, "mm": 10**3, "m": 10**6}

_UM_PER_PS_PER_M_PER_S = Fraction(1, 10**6)


def as_fraction(value: Number) -> Fraction:
    """Convert *value* to an exact Fraction.

    Floats go through their shortest decimal repr, so ``1.47`` becomes
    ``147/100`` rather than the nearest binary double.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact number")


def round_half_away(x: Fraction) -> int:
    """Round a rational to the nearest integer, ties away from zero."""
    if x >= 0:
        return math.floor(x + Fraction(1, 2))
    return -math.floor(-x + Fraction(1, 2))


def seconds(value: Number) -> Picoseconds:
    """Exact conversion of a duration in seconds to picoseconds.

    Raises ValueError if the duration is not a whole number of picoseconds.
    """
    ps = as_fraction(value) * 10**12
    if ps.denominator != 1:
        raise ValueError(f"{value!r} s is not a whole number of picoseconds")
    return int(ps)


def meters(value: Number) -> Micrometers:
    """Exact conversion of a length in meters to micrometers."""
    um = as_fraction(value) * 10**6
    if um.denominator != 1:
        raise ValueError(f"{value!r} m is not a whole number of micrometers")
    return int(um)


@dataclass(frozen=True)
class MediumProfile:
    """Propagation speeds for the quantum (PMF) and classical fibers.

    Args:
        n_p: Refraction index of the polarization-maintaining fiber,
            strictly between 1 and 3/2.
        c_vacuum: Speed of light in vacuum in m/s.
    """

    n_p: Fraction
    c_vacuum: Fraction = field(default=Fraction(SPEED_OF_LIGHT))

    def __post_init__(self):
        n_p = as_fraction(self.n_p)
        c = as_fraction(self.c_vacuum)
        if not N_P_MIN < n_p < N_P_MAX:
            raise RefractionOutOfRange(
                f"refraction index n_p={n_p} must satisfy 1 < n_p < 3/2"
            )
        if c <= 0:
            raise InvalidGeometry(f"c_vacuum must be positive, got {c}")
        object.__setattr__(self, "n_p", n_p)
        object.__setattr__(self, "c_vacuum", c)

    @property
    def v_p(self) -> Fraction:
        """Photon speed in the PMF, m/s."""
        return self.c_vacuum / self.n_p

    @property
    def v_f(self) -> Fraction:
        """Light speed in the classical silica fiber, m/s."""
        return CLASSICAL_FIBER_RATIO * self.c_vacuum

    @property
    def v_p_um_per_ps(self) -> Fraction:
        return self.v_p * _UM_PER_PS_PER_M_PER_S

    @property
    def v_f_um_per_ps(self) -> Fraction:
        return self.v_f * _UM_PER_PS_PER_M_PER_S


@dataclass(frozen=True)
class DelayElement:
    """One serial multihop delay (propagation, processing, queueing...)."""

    id: str
    duration: Picoseconds

    def __post_init__(self):
        if isinstance(self.duration, bool) or not isinstance(self.duration, int):
            raise InvalidGeometry(
                f"delay {self.id!r}: duration must be integer picoseconds"
            )
        if self.duration <= 0:
            raise InvalidGeometry(
                f"delay {self.id!r}: duration must be > 0, got {self.duration} ps"
            )


@dataclass(frozen=True)
class NodeLink:
    """Quantum and classical paths from the sender to one destination node.

    ``delays`` are the serial delays on the classical path, in route order.
    """

    node_id: NodeId
    quantum_length: Micrometers
    classical_length: Micrometers
    delays: tuple[DelayElement, ...] = ()

    def __post_init__(self):
        for name in ("quantum_length", "classical_length"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidGeometry(
                    f"link {self.node_id!r}: {name} must be integer micrometers"
                )
            if value < 0:
                raise InvalidGeometry(
                    f"link {self.node_id!r}: {name} must be >= 0, got {value} um"
                )
        delays = tuple(self.delays)
        for d in delays:
            if not isinstance(d, DelayElement):
                raise InvalidGeometry(
                    f"link {self.node_id!r}: delays must be DelayElement values"
                )
        object.__setattr__(self, "delays", delays)

    @property
    def total_delay(self) -> Picoseconds:
        return sum(d.duration for d in self.delays)


def total_duration(delays: Iterable[DelayElement]) -> Picoseconds:
    return sum(d.duration for d in delays)


def photon_velocity(medium: MediumProfile) -> Fraction:
    """Average photon speed in the PMF, ``c_vacuum / n_p`` in m/s."""
    if not N_P_MIN < medium.n_p < N_P_MAX:
        raise RefractionOutOfRange(
            f"refraction index n_p={medium.n_p} must satisfy 1 < n_p < 3/2"
        )
    return medium.v_p


def quantum_path_length(t: Picoseconds, medium: MediumProfile) -> Micrometers:
    """PMF length a photon covers in *t* picoseconds."""
    if t <= 0:
        raise NonPositiveTime(f"transit time must be > 0 ps, got {t}")
    return round_half_away(t * medium.v_p_um_per_ps)


def classical_path_length(
    t: Picoseconds, delays: Iterable[DelayElement], medium: MediumProfile
) -> Micrometers:
    """Classical fiber length covered in *t* once the serial delays are paid."""
    budget = total_duration(delays)
    if budget >= t:
        raise DelayExceedsBudget(
            f"serial delays total {budget} ps, which leaves no propagation "
            f"time inside {t} ps"
        )
    return round_half_away((t - budget) * medium.v_f_um_per_ps)


def quantum_transit(length: Micrometers, medium: MediumProfile) -> Picoseconds:
    return round_half_away(length / medium.v_p_um_per_ps)


def classical_transit(
    length: Micrometers, delays: Iterable[DelayElement], medium: MediumProfile
) -> Picoseconds:
    return round_half_away(length / medium.v_f_um_per_ps) + total_duration(delays)


def transit_times(
    link: NodeLink, medium: MediumProfile
) -> tuple[Picoseconds, Picoseconds]:
    """Return ``(t_quantum, t_classical)`` for *link* in picoseconds."""
    return (
        quantum_transit(link.quantum_length, medium),
        classical_transit(link.classical_length, link.delays, medium),
    )


def synchronized_link(
    node_id: NodeId,
    t: Picoseconds,
    delays: Iterable[DelayElement],
    medium: MediumProfile,
) -> NodeLink:
    """Build the link whose two channels both take exactly *t* picoseconds."""
    delays = tuple(delays)
    return NodeLink(
        node_id=node_id,
        quantum_length=quantum_path_length(t, medium),
        classical_length=classical_path_length(t, delays, medium),
        delays=delays,
    )
