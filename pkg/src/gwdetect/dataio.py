"""Signal-file I/O.

A signal file is a one-column CSV of volt samples with a two-line header::

    sample_rate,<Hz>
    label,<free text>
    <sample>
    ...

Decimal point is ``.``, separator is ``,``, line endings are LF.
"""

from pathlib import Path

import numpy as np

from .spectral import Signal

__all__ = ["read_signal", "write_signal", "fmt"]


def fmt(x: float) -> str:
    """Shortest round-trip decimal form of a float (deterministic)."""
    return repr(float(x))


def write_signal(path, signal: Signal) -> None:
    path = Path(path)
    lines = [f"sample_rate,{fmt(signal.sample_rate)}", f"label,{signal.label}"]
    lines.extend(fmt(v) for v in signal.samples)
    path.write_text("\n".join(lines) + "\n")


def read_signal(path) -> Signal:
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
        second = fh.readline().strip()
        if not first.startswith("sample_rate,") or not second.startswith("label,"):
            raise ValueError(f"{path}: expected a two-line sample_rate/label header")
        sample_rate = float(first.split(",", 1)[1])
        label = second.split(",", 1)[1]
        samples = np.loadtxt(fh, dtype=float, ndmin=1)
    return Signal(samples=samples, sample_rate=sample_rate, label=label)
