"""Noise configurations for the AWGN channel.

A noise vector is a plain float64 array, measured relative to the
transmitted all-plus codeword.  Components live in all of R: values below
0 (stronger than a clean signal) and above 2 are legitimate and are never
clamped.  The channel enters in exactly two places, the effective weight
and the decoder-input map, so a different noise-weight function would be
a local change here.
"""

from __future__ import annotations

import numpy as np


def weight(xi) -> float:
    """Effective weight of a noise vector: the squared Euclidean norm."""
    x = np.asarray(xi, dtype=np.float64).ravel()
    return float(np.dot(x, x))


def llr_from_noise(xi) -> np.ndarray:
    """Decoder input for a noise vector: h_i = 1 - xi_i.

    Min-sum decoding is invariant under positive scaling of its input, so
    the SNR-dependent prefactor is dropped; the scale-free form keeps the
    error set and all instantons unchanged.  xi = 0 gives the all-ones
    input (clean channel), xi_i = 1 gives h_i = 0 (fully undecided bit).
    """
    x = np.asarray(xi, dtype=np.float64).ravel()
    return 1.0 - x


def load_noise(text: str) -> np.ndarray:
    """Parse a noise vector: one decimal real per line, '#' lines ignored."""
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            values.append(float(stripped))
        except ValueError:
            raise ValueError(f"line {lineno}: not a number: {stripped!r}") from None
    if not values:
        raise ValueError("noise file has no numeric lines")
    return np.array(values, dtype=np.float64)


def save_noise(xi) -> str:
    """Serialize a noise vector, one real per line, exact on round-trip."""
    x = np.asarray(xi, dtype=np.float64).ravel()
    return "\n".join(repr(float(v)) for v in x) + "\n"
