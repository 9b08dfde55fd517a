"""Averaged-windowed-periodogram (Welch) power spectral density estimation.

The estimator slides a tapered window of length ``L`` across the analysis
range in steps of ``D = round(L * (1 - overlap))``, averages the squared
zero-padded DFTs of the ``K = floor((N - L) / D) + 1`` segments and scales by
``1 / (K * L * U * fs)`` with ``U`` the mean squared window value.  Interior
bins of the one-sided result are doubled (DC and Nyquist are not), so that
integrating the returned values over the frequency grid recovers the
mean-square power of the (detrended) input.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "WINDOW_KINDS",
    "Signal",
    "WelchConfig",
    "PsdEstimate",
    "TheoreticalMoments",
    "make_window",
    "welch_psd",
    "welch_theoretical_moments",
]

WINDOW_KINDS = ("hamming", "bartlett", "rectangular")


@dataclass(frozen=True, eq=False)
class Signal:
    """A uniformly sampled real-valued record from one actuator-sensor path.

    Parameters
    ----------
    samples : array_like
        Amplitudes in volts.
    sample_rate : float
        Sampling frequency in Hz.
    label : str
        Structural-state tag, e.g. ``"healthy"`` or a damage name.
    t0_offset : int
        Sample index where the analysis window begins by default.
    """

    samples: np.ndarray
    sample_rate: float
    label: str = ""
    t0_offset: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a nonempty 1-D sequence")
        if not np.isfinite(samples).all():
            raise ValueError("samples must all be finite")
        if not (float(self.sample_rate) > 0.0):
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate!r}")
        if not 0 <= int(self.t0_offset) < samples.size:
            raise ValueError("t0_offset must index into samples")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "t0_offset", int(self.t0_offset))

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class WelchConfig:
    """Estimation parameters that fix the PSD's distributional properties.

    ``nfft`` defaults to ``segment_length``; larger values zero-pad each
    segment onto a finer frequency grid.
    """

    segment_length: int
    overlap_fraction: float = 0.5
    nfft: int = None
    window_kind: str = "hamming"
    detrend_mean: bool = True

    def __post_init__(self):
        L = int(self.segment_length)
        if L < 2:
            raise ValueError(f"segment_length must be >= 2, got {L}")
        object.__setattr__(self, "segment_length", L)
        ov = float(self.overlap_fraction)
        if not 0.0 <= ov < 1.0:
            raise ValueError(f"overlap_fraction must lie in [0, 1), got {ov}")
        object.__setattr__(self, "overlap_fraction", ov)
        nfft = L if self.nfft is None else int(self.nfft)
        if nfft < L:
            raise ValueError(f"nfft ({nfft}) must be >= segment_length ({L})")
        object.__setattr__(self, "nfft", nfft)
        kind = str(self.window_kind).lower()
        if kind not in WINDOW_KINDS:
            raise ValueError(f"window_kind must be one of {WINDOW_KINDS}, got {self.window_kind!r}")
        object.__setattr__(self, "window_kind", kind)
        if self.step < 1:
            raise ValueError("derived window step must be >= 1")

    @property
    def step(self) -> int:
        """Hop between consecutive window starts."""
        return int(round(self.segment_length * (1.0 - self.overlap_fraction)))

    def window_count(self, n_samples: int) -> int:
        """Number of averaged windows for an analysis range of ``n_samples``."""
        n = int(n_samples)
        if n < self.segment_length:
            raise ValueError(
                f"analysis range of {n} samples is shorter than the "
                f"segment length {self.segment_length}"
            )
        return (n - self.segment_length) // self.step + 1

    def freq_grid(self, sample_rate: float) -> np.ndarray:
        """One-sided frequency grid, 0 ... fs/2 at spacing fs/nfft."""
        return np.arange(self.nfft // 2 + 1) * (float(sample_rate) / self.nfft)


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """One-sided PSD on a fixed frequency grid (power per Hz)."""

    values: np.ndarray
    freq_grid: np.ndarray
    config: WelchConfig
    k_windows: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        grid = np.asarray(self.freq_grid, dtype=float)
        if values.shape != grid.shape or values.ndim != 1:
            raise ValueError("values and freq_grid must be 1-D arrays of equal length")
        if values.size != self.config.nfft // 2 + 1:
            raise ValueError("values length must be nfft//2 + 1")
        if not np.isfinite(values).all():
            raise ValueError("PSD values must be finite")
        if (values < 0.0).any():
            raise ValueError("PSD values must be nonnegative")
        if int(self.k_windows) < 1:
            raise ValueError("k_windows must be >= 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "freq_grid", grid)
        object.__setattr__(self, "k_windows", int(self.k_windows))

    @property
    def df(self) -> float:
        """Frequency grid spacing in Hz."""
        return float(self.freq_grid[1] - self.freq_grid[0]) if self.freq_grid.size > 1 else 0.0

    def same_grid(self, other: "PsdEstimate") -> bool:
        return (self.config == other.config
                and np.array_equal(self.freq_grid, other.freq_grid))


def make_window(kind: str, length: int):
    """Return the taper ``w[0..L-1]`` and its mean squared value ``U``.

    ``hamming`` and ``bartlett`` use the symmetric (non-periodic) closed
    forms; ``bartlett`` is zero at both endpoints.  ``rectangular`` is
    all-ones with ``U = 1`` exactly.
    """
    L = int(length)
    if L < 2:
        raise ValueError(f"window length must be >= 2, got {length}")
    kind = str(kind).lower()
    t = np.arange(L, dtype=float)
    if kind == "hamming":
        w = 0.54 - 0.46 * np.cos(2.0 * np.pi * t / (L - 1))
    elif kind == "bartlett":
        w = 1.0 - np.abs(2.0 * t / (L - 1) - 1.0)
    elif kind == "rectangular":
        return np.ones(L), 1.0
    else:
        raise ValueError(f"unsupported window kind {kind!r}")
    u = float(np.mean(w * w))
    return w, u


def welch_psd(signal: Signal, config: WelchConfig, analysis_range=None) -> PsdEstimate:
    """Estimate the one-sided PSD of ``signal`` over an analysis range.

    Parameters
    ----------
    signal : Signal
    config : WelchConfig
    analysis_range : (start, length), optional
        Sample range to analyse.  Defaults to everything from the signal's
        ``t0_offset`` to its end.

    Returns
    -------
    PsdEstimate
        Deterministic for fixed input; an all-zero signal yields an all-zero
        estimate.
    """
    x = signal.samples
    if analysis_range is None:
        start, length = signal.t0_offset, x.size - signal.t0_offset
    else:
        start, length = int(analysis_range[0]), int(analysis_range[1])
    if start < 0 or length < 1 or start + length > x.size:
        raise ValueError(
            f"analysis range ({start}, {length}) exceeds the {x.size}-sample signal"
        )
    seg = x[start:start + length]

    L = config.segment_length
    D = config.step
    k = config.window_count(length)
    w, u = make_window(config.window_kind, L)
    if u == 0.0:
        raise ValueError("window has zero energy; pick a longer bartlett window")
    if config.detrend_mean:
        seg = seg - seg.mean()

    offsets = np.arange(k) * D
    frames = np.lib.stride_tricks.sliding_window_view(seg, L)[offsets] * w
    spec = np.fft.rfft(frames, n=config.nfft, axis=1)
    values = (np.abs(spec) ** 2).sum(axis=0) / (k * L * u * signal.sample_rate)
    # one-sided doubling: interior bins only (DC never; Nyquist exists for even nfft)
    if config.nfft % 2 == 0:
        values[1:-1] *= 2.0
    else:
        values[1:] *= 2.0
    return PsdEstimate(
        values=values,
        freq_grid=config.freq_grid(signal.sample_rate),
        config=config,
        k_windows=k,
    )


class TheoreticalMoments(NamedTuple):
    """Mean/variance diagnostics of the estimator for a flat true density.

    ``mean`` uses the unit-gain normalization of the spectral smoothing
    kernel, under which the estimator is asymptotically unbiased and the mean
    equals the true density.  ``raw_mean`` instead applies the kernel's peak
    gain ``|W(0)|^2 / (2*pi*L*U)`` as the plain plug-in constant; the two
    differ because the textbook constant mixes angular- and ordinary-frequency
    conventions, and both are reported rather than silently picking one.
    """

    mean: float
    variance: float
    raw_mean: float


def welch_theoretical_moments(true_psd_value: float, config: WelchConfig,
                              n_samples: int) -> TheoreticalMoments:
    """Theoretical mean and variance of the estimate at one frequency.

    The variance approximation ``(9/16) * (L/N) * S^2`` is derived for the
    bartlett window with 50% overlap, so any other ``window_kind`` is
    refused.  Diagnostic only; decision rules never consume these values.
    """
    if config.window_kind != "bartlett":
        raise ValueError(
            "theoretical variance is only defined for the bartlett window, "
            f"got {config.window_kind!r}"
        )
    s = float(true_psd_value)
    if s < 0.0:
        raise ValueError("true_psd_value must be >= 0")
    n = int(n_samples)
    L = config.segment_length
    if n < L:
        raise ValueError(f"n_samples ({n}) must be >= segment_length ({L})")
    w, u = make_window("bartlett", L)
    raw = s * float(np.sum(w)) ** 2 / (2.0 * math.pi * L * u)
    variance = (9.0 / 16.0) * (L / n) * s * s
    return TheoreticalMoments(mean=s, variance=variance, raw_mean=raw)
