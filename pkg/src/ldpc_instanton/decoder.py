"""Min-sum iterative decoder with per-iteration codeword checking.

Each iteration k computes the output vector m from the input h plus the
incoming check-to-bit messages, tests whether sign(m) is a valid codeword
(stopping if so), then refreshes the bit-to-check messages (input plus
all *other* incoming check messages) and the check-to-bit messages
(minimum magnitude times sign product over the *other* bits of the
check, with sign(0) = 0).  Before the first iteration there are no
check-to-bit messages.

The inner loop is a numba kernel; exclusion sums run in adjacency order
and the check update uses the two-smallest-magnitudes form, which is
exactly (bit-for-bit) equivalent to the literal min-over-others rule.
No normalization, damping, or saturation is applied.  Integer inputs
stay integer-valued through every message, and identical inputs produce
bit-identical traces.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .channel import llr_from_noise
from .code import TannerGraph

# Withstand value when sign(h) is already the transmitted codeword; kept
# distinct from withstanding 0 iterations (wrong at input, fixed by the
# first iteration).  Orders below every real count, so comparisons work.
IMMEDIATE_DECODE = -1

INFINITE_WITHSTAND = math.inf

_DECODED_AT_INPUT = 0
_CORRECTED = 1
_WRONG_CODEWORD = 2
_SURVIVED = 3


class Outcome(enum.Enum):
    DECODED_AT_INPUT = "decoded_at_input"
    CORRECTED = "corrected"
    WRONG_CODEWORD = "wrong_codeword"
    SURVIVED = "survived"


@dataclass(frozen=True)
class DecodeOutcome:
    """Classification of one decoding run.

    iteration is the k at which the run ended: the codeword iteration for
    CORRECTED / WRONG_CODEWORD (0 for DECODED_AT_INPUT), the cap for
    SURVIVED.  trace, when captured, holds every computed output vector,
    rows k = 0..iteration.
    """

    kind: Outcome
    iteration: int
    n_max: int
    trace: np.ndarray | None = None

    @property
    def withstand(self) -> float | int:
        """How many iterations the noise withstood (output still wrong after).

        Correcting at iteration k means k - 1 iterations were withstood;
        converging to a wrong codeword withstands every count; surviving
        the cap is reported as the cap itself (the true count may be
        larger, but callers only ever compare against their own cap).
        """
        if self.kind is Outcome.DECODED_AT_INPUT:
            return IMMEDIATE_DECODE
        if self.kind is Outcome.CORRECTED:
            return self.iteration - 1
        if self.kind is Outcome.WRONG_CODEWORD:
            return INFINITE_WITHSTAND
        return self.n_max


@njit(cache=True, nogil=True)
def _min_sum_kernel(bit_ptr, bit_slots, check_ptr, check_bits, h, n_max, trace, capture):
    n = h.shape[0]
    n_checks = check_ptr.shape[0] - 1
    n_edges = check_bits.shape[0]
    mu = np.zeros(n_edges)   # check -> bit, indexed by check-adjacency slot
    eta = np.zeros(n_edges)  # bit -> check, same indexing
    m = np.zeros(n)
    for k in range(n_max + 1):
        for i in range(n):
            acc = h[i]
            for t in range(bit_ptr[i], bit_ptr[i + 1]):
                acc += mu[bit_slots[t]]
            m[i] = acc
        if capture:
            for i in range(n):
                trace[k, i] = m[i]

        # Codeword test on sign(m); a zero output never forms a codeword.
        has_zero = False
        all_plus = True
        for i in range(n):
            if m[i] == 0.0:
                has_zero = True
                break
            if m[i] < 0.0:
                all_plus = False
        if not has_zero:
            if all_plus:
                return (_DECODED_AT_INPUT if k == 0 else _CORRECTED), k
            valid = True
            for a in range(n_checks):
                neg = 0
                for e in range(check_ptr[a], check_ptr[a + 1]):
                    if m[check_bits[e]] < 0.0:
                        neg += 1
                if neg & 1:
                    valid = False
                    break
            if valid:
                return _WRONG_CODEWORD, k
        if k == n_max:
            return _SURVIVED, n_max

        for i in range(n):
            lo = bit_ptr[i]
            hi = bit_ptr[i + 1]
            for t0 in range(lo, hi):
                acc = h[i]
                for t in range(lo, hi):
                    if t != t0:
                        acc += mu[bit_slots[t]]
                eta[bit_slots[t0]] = acc

        for a in range(n_checks):
            lo = check_ptr[a]
            hi = check_ptr[a + 1]
            min1 = np.inf
            min2 = np.inf
            arg1 = -1
            n_neg = 0
            n_zero = 0
            for e in range(lo, hi):
                v = eta[e]
                if v < 0.0:
                    n_neg += 1
                elif v == 0.0:
                    n_zero += 1
                av = abs(v)
                if av < min1:
                    min2 = min1
                    min1 = av
                    arg1 = e
                elif av < min2:
                    min2 = av
            for e in range(lo, hi):
                v = eta[e]
                zero_others = n_zero - (1 if v == 0.0 else 0)
                if zero_others > 0:
                    mu[e] = 0.0
                else:
                    mag = min2 if e == arg1 else min1
                    neg_others = n_neg - (1 if v < 0.0 else 0)
                    mu[e] = -mag if (neg_others & 1) == 1 else mag
    return _SURVIVED, n_max


_KIND_BY_CODE = {
    _DECODED_AT_INPUT: Outcome.DECODED_AT_INPUT,
    _CORRECTED: Outcome.CORRECTED,
    _WRONG_CODEWORD: Outcome.WRONG_CODEWORD,
    _SURVIVED: Outcome.SURVIVED,
}

_NO_TRACE = np.zeros((1, 1))


def decode(graph: TannerGraph, h, n_max: int, capture_trace: bool = False, exact: bool = False) -> DecodeOutcome:
    """Run min-sum on input h with up to n_max iterations.

    n_max = 0 is legal and classifies the raw channel output only.

    The default float64 path is fast but, like any fixed-precision
    implementation, cannot track orbits that amplify rounding noise (an
    input sitting exactly on the boundary of the failure set can fall off
    it after a few dozen iterations).  exact=True instead runs the same
    updates in arbitrary-precision integer arithmetic: every float input
    is a dyadic rational, so the whole vector scales exactly to integers,
    which min-sum preserves.  The exact path is orders of magnitude
    slower; use it to certify individual configurations, not in search
    loops.
    """
    hv = np.ascontiguousarray(h, dtype=np.float64).ravel()
    if hv.shape[0] != graph.n_bits:
        raise ValueError(f"input has length {hv.shape[0]}, graph has {graph.n_bits} bits")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if exact:
        return _decode_exact(graph, [Fraction(float(v)) for v in hv], n_max, capture_trace)
    trace = np.zeros((n_max + 1, graph.n_bits)) if capture_trace else _NO_TRACE
    kind_code, k = _min_sum_kernel(
        graph.bit_ptr,
        graph.bit_edge_slots,
        graph.check_ptr,
        graph.check_bits,
        hv,
        n_max,
        trace,
        capture_trace,
    )
    return DecodeOutcome(
        kind=_KIND_BY_CODE[kind_code],
        iteration=int(k),
        n_max=n_max,
        trace=trace[: k + 1].copy() if capture_trace else None,
    )


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    return Fraction(float(v))


def _scale_to_ints(fracs: list[Fraction]) -> tuple[list[int], int]:
    """Exact integer representatives h_i * s of a rational vector."""
    scale = 1
    for f in fracs:
        scale = scale * f.denominator // math.gcd(scale, f.denominator)
    return [int(f * scale) for f in fracs], scale


def _decode_exact(graph: TannerGraph, h_fracs: list[Fraction], n_max: int, capture_trace: bool) -> DecodeOutcome:
    # Literal updates on Python ints; positive scaling does not change the
    # outcome, so rescaling the rational input to integers is free.  Trace
    # rows are converted back to float64 of the original scale, for
    # inspection only.
    h, scale = _scale_to_ints(h_fracs)
    n = graph.n_bits
    bit_to_checks = graph.bit_to_checks
    check_to_bits = graph.check_to_bits
    mu = {(a, i): 0 for a, bits in enumerate(check_to_bits) for i in bits}
    rows = [] if capture_trace else None
    kind_code = _SURVIVED
    k_final = n_max
    for k in range(n_max + 1):
        m = [h[i] + sum(mu[(a, i)] for a in bit_to_checks[i]) for i in range(n)]
        if capture_trace:
            rows.append(m)
        if all(v != 0 for v in m):
            if all(v > 0 for v in m):
                kind_code = _DECODED_AT_INPUT if k == 0 else _CORRECTED
                k_final = k
                break
            if all(sum(1 for i in bits if m[i] < 0) % 2 == 0 for bits in check_to_bits):
                kind_code = _WRONG_CODEWORD
                k_final = k
                break
        if k == n_max:
            break
        eta = {}
        for i in range(n):
            for a in bit_to_checks[i]:
                eta[(i, a)] = h[i] + sum(mu[(b, i)] for b in bit_to_checks[i] if b != a)
        for a, bits in enumerate(check_to_bits):
            for i in bits:
                mag = None
                sign = 1
                for j in bits:
                    if j == i:
                        continue
                    v = eta[(j, a)]
                    av = -v if v < 0 else v
                    if mag is None or av < mag:
                        mag = av
                    if v < 0:
                        sign = -sign
                    elif v == 0:
                        sign = 0
                mu[(a, i)] = sign * mag
    trace = None
    if capture_trace:
        # Undo the dyadic scale so rows are comparable with the float path;
        # int/int division rounds correctly at any magnitude.
        trace = np.array([[v / scale for v in row] for row in rows], dtype=np.float64)
        trace = trace.reshape(len(rows), n)
    return DecodeOutcome(kind=_KIND_BY_CODE[kind_code], iteration=int(k_final), n_max=n_max, trace=trace)


def withstand_count(graph: TannerGraph, xi, n_max: int, exact: bool = False) -> float | int:
    """Withstand classification of a noise vector (no trace captured).

    With exact=True the noise may carry Fraction entries and the whole
    pipeline (input map included) runs in rational arithmetic, so
    configurations sitting exactly on the failure-set boundary are
    classified correctly; float entries are taken at their exact dyadic
    values.
    """
    if exact:
        entries = list(xi)
        if len(entries) != graph.n_bits:
            raise ValueError(f"noise has length {len(entries)}, graph has {graph.n_bits} bits")
        if n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {n_max}")
        h_fracs = [1 - _as_fraction(v) for v in entries]
        return _decode_exact(graph, h_fracs, n_max, False).withstand
    return decode(graph, llr_from_noise(xi), n_max).withstand


def trace_csv(trace: np.ndarray) -> str:
    """Trace as CSV: header "k,m_1,...,m_N", one full-precision row per iteration."""
    n = trace.shape[1]
    lines = ["k," + ",".join(f"m_{i + 1}" for i in range(n))]
    for k in range(trace.shape[0]):
        lines.append(str(k) + "," + ",".join(repr(float(v)) for v in trace[k]))
    return "\n".join(lines) + "\n"
