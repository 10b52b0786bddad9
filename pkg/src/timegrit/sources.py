"""Excitation signals driving the wire current."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PwmSource:
    """Pulse-width-modulated drive whose local duty cycle tracks a sinusoid.

    The carrier is the sawtooth s_n(t) = frac(n t / T) with n teeth per
    period T; the output is sign(sin(2 pi t / T)) whenever the sawtooth lies
    strictly below |sin(2 pi t / T)|, else 0.  Values are in {-1, 0, +1}.
    """

    period: float = 0.02
    teeth: int = 1100
    amplitude: float = 1.0

    def __post_init__(self):
        if self.period <= 0.0:
            raise ValueError(f"period must be positive, got {self.period}")
        if self.teeth < 1:
            raise ValueError(f"teeth must be >= 1, got {self.teeth}")

    def __call__(self, t) -> np.ndarray:
        return self.amplitude * pwm_excitation(t, self.period, self.teeth)


def pwm_excitation(t, period: float, teeth: int):
    """Evaluate the unscaled PWM signal; vectorized over t, range {-1, 0, +1}.

    t is reduced modulo the period first, making the signal exactly periodic
    instead of relying on cancellation in the sawtooth for large arguments.
    """
    t = np.mod(np.asarray(t, dtype=float), period)
    phase = 2.0 * math.pi * t / period
    s = np.mod(t * (teeth / period), 1.0)
    sine = np.sin(phase)
    out = np.where(s - np.abs(sine) < 0.0, np.sign(sine), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SineSource:
    """Smooth sinusoidal drive, used for time-convergence studies."""

    period: float = 0.02
    amplitude: float = 1.0

    def __post_init__(self):
        if self.period <= 0.0:
            raise ValueError(f"period must be positive, got {self.period}")

    def __call__(self, t):
        return self.amplitude * np.sin(2.0 * math.pi * np.asarray(t, dtype=float) / self.period)


@dataclass(frozen=True)
class ZeroSource:
    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros_like(t) if t.ndim else 0.0
