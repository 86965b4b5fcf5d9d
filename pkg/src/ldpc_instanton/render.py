"""Deterministic figure rendering: noise-space cuts, decoding traces, periods.

Cuts scan a 2-D plane of the noise space spanned by an anchor vector (on
the horizontal axis through the origin) and a third point, classify every
grid vector by how many iterations it withstands, and map the count to a
gray tone.  Trace images show the decoder output per iteration, one row
per iteration from top to bottom.  Output is binary PGM (bit-exact and
diffable) plus CSV companions for plotting pipelines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .code import TannerGraph
from .decoder import IMMEDIATE_DECODE, decode, withstand_count
from .channel import llr_from_noise

# Grid ranges are in units of the anchor norm, so the origin and the anchor
# itself sit at u = 0 and u = 1; the defaults bracket both horizontally.
DEFAULT_U_RANGE = (-0.25, 1.5)
DEFAULT_V_RANGE = (-0.6, 0.6)
DEFAULT_RESOLUTION = (432, 288)
DEFAULT_N_CAP = 1024

_COLLINEAR_TOL = 1e-9


@dataclass
class CutSpec:
    """A two-dimensional cut through the noise space.

    anchor spans the horizontal axis through the origin; third fixes the
    plane.  u_range / v_range are intervals in units of the anchor norm,
    sampled at pixel centers, width x height pixels.  Every grid vector is
    classified with an iteration cap of n_cap.
    """

    anchor: np.ndarray
    third: np.ndarray
    u_range: tuple[float, float] = DEFAULT_U_RANGE
    v_range: tuple[float, float] = DEFAULT_V_RANGE
    width: int = DEFAULT_RESOLUTION[0]
    height: int = DEFAULT_RESOLUTION[1]
    n_cap: int = DEFAULT_N_CAP


@dataclass
class CutRender:
    pixels: np.ndarray      # uint8, (height, width), row 0 on top
    withstand: np.ndarray   # float64, -1 = decoded at input, inf = wrong codeword
    tone: np.ndarray        # float64 in [0, 1]
    u: np.ndarray           # (width,) horizontal coordinates, anchor-norm units
    v: np.ndarray           # (height,) vertical coordinates, top row first


@dataclass
class TraceRender:
    pixels: np.ndarray      # uint8, (rows, n_bits); row 0 is the decoder input
    outcome: object         # DecodeOutcome of the run that produced the rows


def plane_basis(anchor, third):
    """Orthonormal (e1, e2): e1 along the anchor, e2 the normalized
    Gram-Schmidt residual of the third point.

    Rejects a third point that is (numerically) collinear with the anchor.
    """
    a = np.asarray(anchor, dtype=np.float64).ravel()
    t = np.asarray(third, dtype=np.float64).ravel()
    if a.shape != t.shape:
        raise ValueError(f"anchor has length {a.shape[0]}, third point {t.shape[0]}")
    norm_a = np.linalg.norm(a)
    norm_t = np.linalg.norm(t)
    if norm_a == 0 or norm_t == 0:
        raise ValueError("anchor and third point must be nonzero")
    e1 = a / norm_a
    residual = t - np.dot(t, e1) * e1
    res_norm = np.linalg.norm(residual)
    if res_norm < _COLLINEAR_TOL * norm_t:
        raise ValueError("third point is collinear with the anchor; cannot span a plane")
    return e1, residual / res_norm


def tone_for_withstand(wst) -> float:
    """Gray tone of a withstand count: (9 - log2 n)/11, clamped to [0, 1].

    Decoding straight from the channel output is white (tone 1); surviving
    0 iterations maps to 10/11; converging to a wrong codeword withstands
    every count and is black.
    """
    if wst == IMMEDIATE_DECODE:
        return 1.0
    if math.isinf(wst):
        return 0.0
    n = int(wst)
    if n == 0:
        return 10.0 / 11.0
    return min(1.0, max(0.0, (9.0 - math.log2(n)) / 11.0))


def tone_for_output(m: float) -> float:
    """Gray tone of a decoder output value: (1 + m/10)/2, clamped to [0, 1].

    Middle gray is the undecided output m = 0; the scale saturates at
    |m| = 10.
    """
    return min(1.0, max(0.0, (1.0 + m / 10.0) / 2.0))


def tone_to_byte(tone: float) -> int:
    """Quantize a tone in [0, 1] to a gray byte, 0 black / 255 white."""
    return min(255, int(256.0 * min(1.0, max(0.0, tone))))


def render_cut(graph: TannerGraph, spec: CutSpec) -> CutRender:
    """Classify every pixel of the cut and map counts to gray bytes.

    Pixel (0, 0) is top-left; u increases rightward, v increases upward.
    Deterministic given the spec: repeated renders are byte-identical.
    """
    if spec.width < 1 or spec.height < 1:
        raise ValueError(f"resolution must be positive, got {spec.width}x{spec.height}")
    if spec.n_cap < 0:
        raise ValueError("n_cap must be >= 0")
    e1, e2 = plane_basis(spec.anchor, spec.third)
    scale = float(np.linalg.norm(np.asarray(spec.anchor, dtype=np.float64)))

    u_lo, u_hi = spec.u_range
    v_lo, v_hi = spec.v_range
    u = u_lo + (np.arange(spec.width) + 0.5) * (u_hi - u_lo) / spec.width
    v = v_hi - (np.arange(spec.height) + 0.5) * (v_hi - v_lo) / spec.height

    wst = np.zeros((spec.height, spec.width))
    tone = np.zeros((spec.height, spec.width))
    pixels = np.zeros((spec.height, spec.width), dtype=np.uint8)
    for r in range(spec.height):
        base_v = scale * v[r] * e2
        for col in range(spec.width):
            xi = scale * u[col] * e1 + base_v
            w = withstand_count(graph, xi, spec.n_cap)
            t = tone_for_withstand(w)
            wst[r, col] = w
            tone[r, col] = t
            pixels[r, col] = tone_to_byte(t)
    return CutRender(pixels=pixels, withstand=wst, tone=tone, u=u, v=v)


def render_trace(graph: TannerGraph, xi, n_iters: int) -> TraceRender:
    """Image of the decoding dynamics on a noise vector.

    Row 0 is the decoder input, rows 1..k the outputs of each iteration,
    with the codeword-stop rule active: a run that decodes early yields a
    shorter image (the stop iteration is in the returned outcome).
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    h = llr_from_noise(xi)
    outcome = decode(graph, h, n_iters, capture_trace=True)
    return TraceRender(pixels=trace_pixels(outcome.trace), outcome=outcome)


def trace_pixels(trace: np.ndarray) -> np.ndarray:
    """Map a trace of output vectors to gray rows, one per iteration."""
    rows, n = trace.shape
    out = np.zeros((rows, n), dtype=np.uint8)
    for k in range(rows):
        for i in range(n):
            out[k, i] = tone_to_byte(tone_for_output(trace[k, i]))
    return out


def detect_sign_period(trace: np.ndarray, k_min: int):
    """Smallest p >= 1 with sign(m^(k+p)) == sign(m^(k)) for all k in
    [k_min, last - p]; None if no period fits.

    k_min discards the transient; the trace must reach at least k_min + 1
    so there is something to compare.
    """
    last = trace.shape[0] - 1
    if k_min < 0:
        raise ValueError("k_min must be >= 0")
    if last < k_min + 1:
        raise ValueError(f"trace ends at iteration {last}, need at least {k_min + 1} for k_min={k_min}")
    signs = np.sign(trace)
    for p in range(1, last - k_min + 1):
        if np.array_equal(signs[k_min : last - p + 1], signs[k_min + p : last + 1]):
            return p
    return None


def pgm_bytes(pixels: np.ndarray) -> bytes:
    """Binary PGM (P5), maxval 255, rows top to bottom."""
    if pixels.ndim != 2 or pixels.dtype != np.uint8:
        raise ValueError("pixels must be a 2-D uint8 array")
    height, width = pixels.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


def write_pgm(pixels: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(pixels))


def _format_withstand(w) -> str:
    if math.isinf(w):
        return "inf"
    return str(int(w))


def cut_csv(cut: CutRender) -> str:
    """Raw tones as CSV "u,v,withstand,tone", row-major from the top-left."""
    lines = ["u,v,withstand,tone"]
    for r in range(cut.pixels.shape[0]):
        for col in range(cut.pixels.shape[1]):
            lines.append(
                f"{float(cut.u[col])!r},{float(cut.v[r])!r},"
                f"{_format_withstand(cut.withstand[r, col])},{float(cut.tone[r, col])!r}"
            )
    return "\n".join(lines) + "\n"
