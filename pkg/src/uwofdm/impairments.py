"""Transmit-side nonlinearity and the fading channel with receiver noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GuardViolationError
from .txchain import TimeDomainSymbol


@dataclass(frozen=True)
class RappParams:
    """Smooth AM/AM saturation: knee sharpness, clip level above mean power.

    ``mean_power`` is the reference mean power of the input process; the
    saturation amplitude is fixed from it once, so the amplifier does not
    adapt per block.
    """

    knee: float
    backoff_db: float
    mean_power: float

    @property
    def sat_amplitude(self) -> float:
        return float(np.sqrt(self.mean_power * 10.0 ** (self.backoff_db / 10.0)))


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw: impulse response and its length-N transfer function."""

    taps: np.ndarray
    freq_response: np.ndarray


def rapp_amplify(x: np.ndarray, params: RappParams) -> np.ndarray:
    """Amplitude-only smooth clipping; phase passes through unchanged.

    Gain 1 for small inputs, output magnitude bounded by the saturation
    amplitude for large ones.
    """
    x = np.asarray(x, dtype=complex)
    p = params.knee
    ratio = np.abs(x) / params.sat_amplitude
    return x / (1.0 + ratio ** (2.0 * p)) ** (1.0 / (2.0 * p))


def power_delay_profile(l_c: int, decay: float) -> np.ndarray:
    """Exponential tap-power profile normalized to unit total power."""
    p = np.exp(-decay * np.arange(l_c))
    return p / p.sum()


def sample_channel(
    l_c: int, decay: float, rng: np.random.Generator, n_fft: int
) -> ChannelRealization:
    """Draw independent circularly-symmetric Gaussian taps on the profile."""
    profile = power_delay_profile(l_c, decay)
    taps = np.sqrt(profile / 2.0) * (
        rng.standard_normal(l_c) + 1j * rng.standard_normal(l_c)
    )
    return ChannelRealization(taps=taps, freq_response=np.fft.fft(taps, n=n_fft))


def apply_channel_and_noise(
    x: TimeDomainSymbol,
    ch: ChannelRealization,
    noise_var: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Circular convolution with the channel taps plus white Gaussian noise.

    Circular convolution is exact here because the guard interval of the
    preceding block carries the same fixed sequence that wraps around; the
    guard must therefore cover the channel memory.
    """
    if x.oversampled:
        raise GuardViolationError("channel operates on the critically sampled stream")
    if ch.taps.size - 1 > x.uw_len:
        raise GuardViolationError(
            f"channel memory {ch.taps.size - 1} exceeds guard length {x.uw_len}"
        )
    n = x.samples.size
    y = np.fft.ifft(np.fft.fft(x.samples) * np.fft.fft(ch.taps, n=n))
    if noise_var > 0:
        y = y + np.sqrt(noise_var / 2.0) * (
            rng.standard_normal(n) + 1j * rng.standard_normal(n)
        )
    return y
