"""Platoon configuration, mistuning profiles, and per-vehicle gain schedules.

A platoon of N identical double-integrator vehicles runs a decentralized
bidirectional controller: vehicle i applies a position gain toward its
predecessor (front) and its follower (back) plus velocity damping.  The
nominal design is symmetric (all gains equal); "mistuning" perturbs the
front/back gains antisymmetrically by a small amplitude ``epsilon`` along
a profile defined on the scaled platoon axis [0, 2*pi].

Everything in this module is pure and immutable: profiles are evaluated
as functions on [0, 2*pi] and sampled at the desired vehicle positions
x_i = 2*pi - i*delta to produce a concrete gain schedule.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class ConfigurationError(ValueError):
    """Raised when a platoon configuration cannot produce valid gains."""


class Scenario(enum.Enum):
    """Boundary configuration of the platoon.

    I  -- fictitious lead and follow vehicles (platoon length (N+1)*Delta)
    II -- fictitious lead vehicle only (platoon length N*Delta)
    """

    I = "I"
    II = "II"


class ProfileKind(enum.Enum):
    SYMMETRIC = "symmetric"
    OPTIMAL_STEP_I = "optimal_step_i"
    OPTIMAL_CONSTANT_II = "optimal_constant_ii"
    PIECEWISE_CONSTANT = "piecewise_constant"
    SINE = "sine"


@dataclass(frozen=True)
class MistuningProfile:
    """A front-gain perturbation shape k^(f,purt): [0, 2*pi] -> [-1, 1].

    The back-gain perturbation is always the exact negative, so the sum
    perturbation vanishes identically and the difference is twice the
    front perturbation.  Pieces of a piecewise-constant profile are
    (start, value) pairs, closed on the left; the first start must be 0.
    """

    kind: ProfileKind
    pieces: tuple[tuple[float, float], ...] = ()
    amplitude: float = 0.0
    wavenumber: int = 0

    def __post_init__(self):
        if self.kind is ProfileKind.PIECEWISE_CONSTANT:
            if not self.pieces:
                raise ConfigurationError("piecewise profile needs at least one piece")
            starts = [x for x, _ in self.pieces]
            if starts[0] != 0.0:
                raise ConfigurationError("first piece must start at x = 0")
            if any(b <= a for a, b in zip(starts, starts[1:])):
                raise ConfigurationError("piece breakpoints must be strictly increasing")
            if starts[-1] > TWO_PI:
                raise ConfigurationError("piece breakpoints must lie in [0, 2*pi]")
            if any(abs(v) > 1.0 for _, v in self.pieces):
                raise ConfigurationError("piecewise values must have |value| <= 1")
        if self.kind is ProfileKind.SINE:
            if abs(self.amplitude) > 1.0:
                raise ConfigurationError("sine amplitude must have |amplitude| <= 1")
            if self.wavenumber < 1:
                raise ConfigurationError("sine wavenumber must be a positive integer")

    @staticmethod
    def symmetric() -> "MistuningProfile":
        return MistuningProfile(ProfileKind.SYMMETRIC)

    @staticmethod
    def optimal_step() -> "MistuningProfile":
        """Sign step at the platoon midpoint, the best choice with lead+follow ends."""
        return MistuningProfile(ProfileKind.OPTIMAL_STEP_I)

    @staticmethod
    def optimal_constant() -> "MistuningProfile":
        """Constant +1, the best choice with a lead vehicle only."""
        return MistuningProfile(ProfileKind.OPTIMAL_CONSTANT_II)

    @staticmethod
    def piecewise_constant(pieces) -> "MistuningProfile":
        return MistuningProfile(
            ProfileKind.PIECEWISE_CONSTANT,
            pieces=tuple((float(x), float(v)) for x, v in pieces),
        )

    @staticmethod
    def sine(amplitude: float, wavenumber: int) -> "MistuningProfile":
        return MistuningProfile(
            ProfileKind.SINE, amplitude=float(amplitude), wavenumber=int(wavenumber)
        )

    def breakpoints(self) -> tuple[float, ...]:
        """Interior discontinuities, used to split quadrature panels."""
        if self.kind is ProfileKind.OPTIMAL_STEP_I:
            return (math.pi,)
        if self.kind is ProfileKind.PIECEWISE_CONSTANT:
            return tuple(x for x, _ in self.pieces if 0.0 < x < TWO_PI)
        return ()


def evaluate_profile(profile: MistuningProfile, x: float) -> float:
    """Evaluate k^(f,purt) at a point of the scaled axis.

    The step resolves to +1 at its midpoint discontinuity (Heaviside with
    H(0) = 1) and piecewise pieces are closed on the left, consistently.
    """
    if not 0.0 <= x <= TWO_PI:
        raise ValueError(f"profile argument {x!r} outside [0, 2*pi]")
    kind = profile.kind
    if kind is ProfileKind.SYMMETRIC:
        return 0.0
    if kind is ProfileKind.OPTIMAL_STEP_I:
        return 1.0 if x >= math.pi else -1.0
    if kind is ProfileKind.OPTIMAL_CONSTANT_II:
        return 1.0
    if kind is ProfileKind.PIECEWISE_CONSTANT:
        value = profile.pieces[0][1]
        for start, v in profile.pieces:
            if x >= start:
                value = v
        return value
    if kind is ProfileKind.SINE:
        return profile.amplitude * math.sin(profile.wavenumber * x)
    raise ValueError(f"unknown profile kind {kind!r}")


@dataclass(frozen=True)
class PlatoonConfig:
    """Immutable description of a platoon and its controller family."""

    n_vehicles: int
    k0: float = 1.0
    b0: float = 0.5
    scenario: Scenario = Scenario.I
    epsilon: float = 0.0
    profile: MistuningProfile = field(default_factory=MistuningProfile.symmetric)

    def __post_init__(self):
        if self.n_vehicles < 2:
            raise ConfigurationError("n_vehicles must be >= 2")
        if self.n_vehicles > 1000:
            raise ConfigurationError("n_vehicles capped at 1000 (dense eigensolver scale)")
        if not self.k0 > 0:
            raise ConfigurationError("k0 must be positive")
        if not self.b0 > 0:
            raise ConfigurationError("b0 must be positive")
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be nonnegative")
        if self.epsilon >= 1:
            raise ConfigurationError("epsilon must be < 1 to keep gains positive")

    @property
    def delta(self) -> float:
        """Scaled inter-vehicle spacing: the 2*pi axis split into N+1 or N gaps."""
        gaps = self.n_vehicles + 1 if self.scenario is Scenario.I else self.n_vehicles
        return TWO_PI / gaps

    def sample_positions(self) -> np.ndarray:
        """Desired scaled positions x_i = 2*pi - i*delta, i = 1..N (descending).

        With a lead vehicle only the last position is exactly 0; clipping
        guards against roundoff pushing it infinitesimally outside the
        profile domain.
        """
        i = np.arange(1, self.n_vehicles + 1, dtype=float)
        return np.clip(TWO_PI - i * self.delta, 0.0, TWO_PI)

    def front_gain(self, x: float) -> float:
        """Continuum front position gain k^(f)(x) = k0*(1 + eps*k^(f,purt)(x))."""
        return self.k0 * (1.0 + self.epsilon * evaluate_profile(self.profile, x))

    def back_gain(self, x: float) -> float:
        """Continuum back position gain k^(b)(x) = k0*(1 - eps*k^(f,purt)(x))."""
        return self.k0 * (1.0 - self.epsilon * evaluate_profile(self.profile, x))

    def k_m(self, x: float) -> float:
        """Gain-difference coefficient of the continuum model: k^(f) - k^(b)
        per unit epsilon, i.e. 2*k0*k^(f,purt)(x)."""
        return 2.0 * self.k0 * evaluate_profile(self.profile, x)

    def k_s(self, x: float) -> float:
        """Gain-sum perturbation per unit epsilon; identically zero here because
        back perturbations mirror front ones."""
        return 0.0


@dataclass(frozen=True)
class GainSchedule:
    """Per-vehicle controller gains, sampled from a configuration."""

    k_front: np.ndarray
    k_back: np.ndarray
    damping: np.ndarray
    scenario: Scenario
    delta: float

    @property
    def n_vehicles(self) -> int:
        return len(self.k_front)


def build_gain_schedule(config: PlatoonConfig) -> GainSchedule:
    """Sample the continuum gain functions at the desired vehicle positions.

    Gains are fixed offline, so they are sampled at the *desired* scaled
    positions x_i = 2*pi - i*delta rather than actual ones.  In scenario II
    the last vehicle has no follower and its back gain is forced to zero.
    """
    x = config.sample_positions()
    pert = np.array([evaluate_profile(config.profile, xi) for xi in x])
    k_front = config.k0 * (1.0 + config.epsilon * pert)
    # complementing rather than resampling keeps k_front + k_back = 2*k0 exact
    k_back = 2.0 * config.k0 - k_front
    if config.scenario is Scenario.II:
        k_back[-1] = 0.0
    if np.any(k_front <= 0) or np.any(k_back[:-1] <= 0) or (
        config.scenario is Scenario.I and k_back[-1] <= 0
    ):
        raise ConfigurationError(
            "mistuning amplitude produces a nonpositive position gain"
        )
    damping = np.full(config.n_vehicles, config.b0)
    return GainSchedule(k_front, k_back, damping, config.scenario, config.delta)


# ---------------------------------------------------------------------------
# JSON configuration loading
# ---------------------------------------------------------------------------

_PROFILE_KINDS = {k.value: k for k in ProfileKind}


def config_from_dict(data: dict) -> PlatoonConfig:
    """Build a PlatoonConfig from a parsed JSON document.

    Expected keys: n_vehicles, k0, b0, scenario ("I" or "II"), epsilon,
    profile {kind, pieces?, amplitude?, wavenumber?}.
    """
    try:
        scenario = Scenario(data.get("scenario", "I"))
    except ValueError:
        raise ConfigurationError(f"scenario must be 'I' or 'II', got {data.get('scenario')!r}")
    pdata = data.get("profile", {"kind": "symmetric"})
    kind_name = pdata.get("kind", "symmetric")
    if kind_name not in _PROFILE_KINDS:
        raise ConfigurationError(
            f"unknown profile kind {kind_name!r}; expected one of {sorted(_PROFILE_KINDS)}"
        )
    kind = _PROFILE_KINDS[kind_name]
    if kind is ProfileKind.PIECEWISE_CONSTANT:
        profile = MistuningProfile.piecewise_constant(pdata.get("pieces", ()))
    elif kind is ProfileKind.SINE:
        profile = MistuningProfile.sine(
            pdata.get("amplitude", 1.0), pdata.get("wavenumber", 1)
        )
    else:
        profile = MistuningProfile(kind)
    try:
        return PlatoonConfig(
            n_vehicles=int(data["n_vehicles"]),
            k0=float(data.get("k0", 1.0)),
            b0=float(data.get("b0", 0.5)),
            scenario=scenario,
            epsilon=float(data.get("epsilon", 0.0)),
            profile=profile,
        )
    except KeyError as exc:
        raise ConfigurationError(f"missing configuration key: {exc}")


def load_config(path: str) -> PlatoonConfig:
    """Load a PlatoonConfig from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
