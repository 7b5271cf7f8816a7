"""Single-motor exoskeleton model: rate-limited servo, slider-crank
rotary-to-linear conversion, and the four-finger openness mapping.

One servomotor drives fore, middle, ring and little finger together, so
a single openness fraction describes the whole hand. All functions are
pure; states are immutable snapshots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .signals import IntentEvent, IntentKind, IntentMode

# Rated sweep speed: 60 degrees in 0.17 s.
SECONDS_PER_60_DEG = 0.17
THETA_MIN = 0.0
THETA_MAX = 180.0


class OutOfRange(Exception):
    pass


@dataclass(frozen=True)
class ServoSpec:
    v_max_deg_s: float = 60.0 / SECONDS_PER_60_DEG
    theta_min: float = THETA_MIN
    theta_max: float = THETA_MAX

    def __post_init__(self) -> None:
        if self.v_max_deg_s <= 0:
            raise ValueError("v_max_deg_s must be positive")
        if not self.theta_min < self.theta_max:
            raise ValueError("theta_min must be below theta_max")


DEFAULT_SERVO = ServoSpec()


@dataclass(frozen=True)
class ServoState:
    theta_deg: float = 0.0
    target_deg: float = 0.0


def command(state: ServoState, target_deg: float, spec: ServoSpec = DEFAULT_SERVO) -> ServoState:
    """Set a new target angle; the shaft does not move until step()."""
    if not spec.theta_min <= target_deg <= spec.theta_max:
        raise OutOfRange(
            f"target {target_deg} outside [{spec.theta_min}, {spec.theta_max}]"
        )
    return ServoState(state.theta_deg, target_deg)


def step(state: ServoState, dt_s: float, spec: ServoSpec = DEFAULT_SERVO) -> ServoState:
    """Advance the shaft toward its target at the rated speed, never past it."""
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    remaining = state.target_deg - state.theta_deg
    travel = spec.v_max_deg_s * dt_s
    if abs(remaining) <= travel:
        theta = state.target_deg
    else:
        theta = state.theta_deg + math.copysign(travel, remaining)
    theta = min(spec.theta_max, max(spec.theta_min, theta))
    return ServoState(theta, state.target_deg)


@dataclass(frozen=True)
class LinkageModel:
    stroke_mm: float = 20.0

    def __post_init__(self) -> None:
        if self.stroke_mm <= 0:
            raise ValueError("stroke_mm must be positive")


@dataclass(frozen=True)
class FingerPose:
    openness: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.openness <= 1.0:
            raise ValueError(f"openness {self.openness} outside [0, 1]")


def linkage_position(theta_deg: float, model: LinkageModel) -> float:
    """Shaft displacement in mm for a crank angle.

    The cosine profile gives zero linear velocity at both ends of the
    sweep, the soft start/stop a rotary-to-linear crank introduces.
    """
    if not THETA_MIN <= theta_deg <= THETA_MAX:
        raise ValueError(f"theta {theta_deg} outside [{THETA_MIN}, {THETA_MAX}]")
    return (model.stroke_mm / 2.0) * (1.0 - math.cos(math.radians(theta_deg)))


def finger_openness(x_mm: float, model: LinkageModel, mode: IntentMode) -> FingerPose:
    """Map shaft displacement to hand openness.

    Extension mode opens a clenched hand as the shaft extends; flexion
    mode closes an open hand, so the fraction inverts.
    """
    if not 0.0 <= x_mm <= model.stroke_mm:
        raise ValueError(f"displacement {x_mm} outside [0, {model.stroke_mm}]")
    frac = x_mm / model.stroke_mm
    if mode is IntentMode.FLEXION:
        frac = 1.0 - frac
    return FingerPose(frac)


def intent_to_command(event: IntentEvent) -> float:
    """Target angle for an intent event.

    Onset drives the full assisted sweep, offset returns to rest. The
    mode changes what openness means, not the servo motion itself.
    """
    return THETA_MAX if event.kind is IntentKind.ONSET else THETA_MIN
