"""Simulated wrist force-torque sensing and the two-phase calibration.

The sensor owns one RNG stream; its sample counter is the clock, one tick per
reading at the configured rate. Noise defaults are tuned artifact choices,
not measured hardware values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .spatial import Wrench, _as_vec3


class InsufficientSamples(RuntimeError):
    """Averaging window too short to produce a single sample."""


class CalibrationIncomplete(RuntimeError):
    """A calibration phase required for this operation has not run."""


@dataclass(frozen=True)
class SensorConfig:
    sample_rate: float = 25.0      # Hz
    noise_torque: float = 0.01     # N*m std per axis
    noise_force: float = 0.25      # N std per axis
    bias_torque: tuple = (0.0, 0.0, 0.0)
    bias_force: tuple = (0.0, 0.0, 0.0)
    drift_torque: tuple = (0.0, 0.0, 0.0)  # N*m per second
    drift_force: tuple = (0.0, 0.0, 0.0)   # N per second
    seed: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0.0:
            raise ValueError("sample_rate must be positive")
        if self.noise_torque < 0.0 or self.noise_force < 0.0:
            raise ValueError("noise stds must be non-negative")


@dataclass(frozen=True)
class ReadingWindow:
    settle_time: float = 0.1    # s discarded after a pose change
    average_time: float = 0.5   # s averaged into one reading

    def __post_init__(self):
        if self.settle_time < 0.0 or self.average_time < 0.0:
            raise ValueError("window times must be non-negative")


class ForceTorqueSensor:
    """Noisy, biased wrench readings, reproducible from (seed, sample index)."""

    def __init__(self, config: SensorConfig, rng: np.random.Generator | None = None):
        self.config = config
        self._rng = rng if rng is not None else np.random.default_rng(config.seed)
        self._bias_torque = _as_vec3(config.bias_torque, "bias_torque")
        self._bias_force = _as_vec3(config.bias_force, "bias_force")
        self._drift_torque = _as_vec3(config.drift_torque, "drift_torque")
        self._drift_force = _as_vec3(config.drift_force, "drift_force")
        self._samples = 0

    @property
    def time(self) -> float:
        return self._samples / self.config.sample_rate

    def sample(self, true_wrench: Wrench) -> Wrench:
        t = self.time
        # noise is drawn even at zero std so the stream advances identically
        n_tau = self._rng.normal(0.0, self.config.noise_torque, 3)
        n_f = self._rng.normal(0.0, self.config.noise_force, 3)
        self._samples += 1
        return Wrench(
            true_wrench.torque + self._bias_torque + self._drift_torque * t + n_tau,
            true_wrench.force + self._bias_force + self._drift_force * t + n_f,
            frame=true_wrench.frame,
        )

    def settle_and_average(self, source, window: ReadingWindow) -> Wrench:
        """Discard the settle span, then average the window into one reading.

        ``source`` is a zero-argument callable giving the instantaneous true
        wrench; quasi-static callers pass a constant.
        """
        n_settle = int(np.floor(window.settle_time * self.config.sample_rate))
        n_avg = int(np.floor(window.average_time * self.config.sample_rate))
        if n_avg < 1:
            raise InsufficientSamples(
                f"window of {window.average_time} s yields no samples at "
                f"{self.config.sample_rate} Hz"
            )
        for _ in range(n_settle):
            self.sample(source())
        acc_tau = np.zeros(3)
        acc_f = np.zeros(3)
        frame = None
        for _ in range(n_avg):
            reading = self.sample(source())
            acc_tau += reading.torque
            acc_f += reading.force
            frame = reading.frame
        return Wrench(acc_tau / n_avg, acc_f / n_avg, frame=frame)


@dataclass(frozen=True)
class CalibrationState:
    """Hover baseline (phase 1) and flat-press reference (phase 2).

    Readings are stored in whatever frame the caller captured them in; the
    placement pipeline stores wrist-frame readings and converts them to the
    assumed-COM frame on use.
    """

    hover_baseline: Wrench | None = None
    flat_reference: Wrench | None = None

    @property
    def gravity_estimate(self) -> np.ndarray:
        if self.hover_baseline is None:
            raise CalibrationIncomplete("hover phase has not run")
        return self.hover_baseline.force

    @property
    def complete(self) -> bool:
        return self.hover_baseline is not None and self.flat_reference is not None

    def require_complete(self) -> None:
        if self.hover_baseline is None:
            raise CalibrationIncomplete("hover phase has not run")
        if self.flat_reference is None:
            raise CalibrationIncomplete("flat-press phase has not run")


def calibrate_hover(state: CalibrationState, reading: Wrench) -> CalibrationState:
    """Store the free-hang baseline; its force part is the gravity estimate."""
    if reading.force[2] >= 0.0:
        raise ValueError(
            f"hover reading shows no hanging weight (fz = {reading.force[2]:.3g} N)"
        )
    return replace(state, hover_baseline=reading)


def calibrate_flat_reference(state: CalibrationState, reading: Wrench) -> CalibrationState:
    """Store the settled flat-press reference; requires the hover phase first."""
    if state.hover_baseline is None:
        raise CalibrationIncomplete("flat-press phase requires the hover baseline first")
    return replace(state, flat_reference=reading)
