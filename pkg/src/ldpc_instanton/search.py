"""Instanton-array stochastic search for low-weight decoding failures.

The search state is an array of noise configurations indexed by k = 0..n_max,
where slot k always holds the lowest-weight configuration seen so far that
withstands k decoder iterations.  Slots are improved by weight-preserving
Gaussian perturbations whose amplitude follows a negative feedback: every
slot carries a number that doubles when a perturbation from the slot is
accepted somewhere and shrinks geometrically on every attempt.

A single run is strictly sequential (the sweep order over k is part of the
algorithm); parallelism belongs across independent runs with distinct seeds.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import weight
from .code import TannerGraph
from .decoder import IMMEDIATE_DECODE, withstand_count

SCHEMES = ("A", "D", "W")

# Normal/uniform draws come from numpy's PCG64 generator (ziggurat normal
# sampler); recorded in progress-log headers so archived runs state the
# exact sampler they used.
RNG_DESCRIPTION = "numpy-pcg64-ziggurat"

# The attached number could plausibly decay only on rejection, and the
# doubled value handed to accepted candidates could use the post-decay
# parent; this build decays on every attempt and doubles the pre-decay
# value.  Recorded in progress-log headers so archived runs are
# unambiguous.
FEEDBACK_DESCRIPTION = "decay-every-attempt;accepted-gets-2x-pre-decay"


@dataclass
class ArraySlot:
    """One best-known configuration: the vector, its cached weight, and the
    attached amplitude-feedback number (always > 0)."""

    xi: np.ndarray
    w: float
    amp: float


@dataclass
class InstantonArray:
    slots: list[ArraySlot]
    n_max: int

    def weights(self) -> np.ndarray:
        return np.array([s.w for s in self.slots])

    def best(self) -> ArraySlot:
        """The deepest slot: best known configuration withstanding n_max iterations."""
        return self.slots[self.n_max]


@dataclass
class SearchConfig:
    """Knobs of one search run.

    scheme: amplitude choice per attempt.  "A" uses the attached number A
    itself; "D" draws log-uniformly from (decay_span[0]*A, decay_span[1]*A);
    "W" draws log-uniformly from wide_bounds, ignoring A.
    Exactly one of budget_sweeps / budget_seconds must be set; seconds are
    measured on the process CPU clock by default ("cpu") or the wall clock
    ("wall").  target_w, when set, stops the run early once the deepest
    slot reaches that weight.
    """

    scheme: str = "A"
    n_max: int = 100
    budget_sweeps: int | None = None
    budget_seconds: float | None = None
    rng_seed: int = 0
    initial_amp: float = 0.1
    amp_growth: float = 2.0
    amp_decay: float = 0.999
    decay_span: tuple[float, float] = (0.1, 1.0)
    wide_bounds: tuple[float, float] = (1e-14, 0.1)
    seeds: list = field(default_factory=list)
    checkpoint_path: str | None = None
    resume_path: str | None = None
    target_w: float | None = None
    timer: str = "cpu"
    log_interval: float = 5.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if self.initial_amp <= 0 or self.amp_growth <= 1 or not (0 < self.amp_decay < 1):
            raise ValueError("need initial_amp > 0 and amp_decay < 1 < amp_growth")
        if not (0 < self.decay_span[0] < self.decay_span[1]):
            raise ValueError(f"bad decay_span {self.decay_span}")
        if not (0 < self.wide_bounds[0] < self.wide_bounds[1]):
            raise ValueError(f"bad wide_bounds {self.wide_bounds}")
        if self.timer not in ("cpu", "wall"):
            raise ValueError(f"timer must be 'cpu' or 'wall', got {self.timer!r}")


@dataclass
class SweepStats:
    accepted: int
    weights: np.ndarray


def init_array(graph: TannerGraph, n_max: int, initial_amp: float = 0.1) -> InstantonArray:
    """Fresh array: every slot holds the all-ones vector.

    All-ones noise zeroes the decoder input, which is a fixed point of
    min-sum, so it withstands any number of iterations and legitimately
    seeds every slot (at the worst weight, N).
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    ones = np.ones(graph.n_bits)
    ones.setflags(write=False)
    w = float(graph.n_bits)
    return InstantonArray(
        slots=[ArraySlot(xi=ones, w=w, amp=initial_amp) for _ in range(n_max + 1)],
        n_max=n_max,
    )


def offer(array: InstantonArray, xi, withstand, new_amp: float = 0.1) -> list[int]:
    """Offer a classified configuration to every slot it qualifies for.

    A configuration withstanding m iterations also withstands every k <= m
    (the error set only shrinks with iteration count), so it is offered to
    all slots k <= m and installed wherever it is strictly lighter.  Ties
    are rejected to avoid churn.  Updated slots receive `new_amp`.
    Returns the updated slot indices.
    """
    if withstand == IMMEDIATE_DECODE:
        return []
    m = array.n_max if math.isinf(withstand) else min(int(withstand), array.n_max)
    x = np.array(xi, dtype=np.float64, copy=True)
    if x.shape[0] != array.slots[0].xi.shape[0]:
        raise ValueError(f"vector has length {x.shape[0]}, array holds length {array.slots[0].xi.shape[0]}")
    x.setflags(write=False)
    w = weight(x)
    updated = []
    for k in range(m + 1):
        if w < array.slots[k].w:
            array.slots[k] = ArraySlot(xi=x, w=w, amp=new_amp)
            updated.append(k)
    return updated


def shrink_coefficient(w: float, a: float, n: int) -> float:
    """Contraction c = sqrt(1 - a^2 n / w) applied to the parent vector.

    Chosen so the expected weight of c*xi + a*psi (psi standard normal)
    equals w exactly: c^2 w + a^2 n = w.
    """
    arg = 1.0 - a * a * n / w
    if arg <= 0.0:
        raise ValueError(f"amplitude {a} infeasible for weight {w} in dimension {n}")
    return math.sqrt(arg)


def perturb(xi, a: float, rng: np.random.Generator) -> np.ndarray:
    """Weight-preserving Gaussian perturbation c*xi + a*psi.

    Requires a^2 N < w(xi); callers treat a violation as a rejected
    attempt (the amplitude decay then drives a back into feasibility).
    """
    x = np.asarray(xi, dtype=np.float64)
    c = shrink_coefficient(weight(x), a, x.shape[0])
    return c * x + a * rng.standard_normal(x.shape[0])


def choose_amplitude(
    scheme: str,
    amp: float,
    rng: np.random.Generator,
    decay_span: tuple[float, float] = (0.1, 1.0),
    wide_bounds: tuple[float, float] = (1e-14, 0.1),
) -> float:
    """Perturbation amplitude for one attempt; D and W are log-uniform."""
    if scheme == "A":
        return amp
    if scheme == "D":
        lo, hi = decay_span[0] * amp, decay_span[1] * amp
    elif scheme == "W":
        lo, hi = wide_bounds
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))


def sweep(graph: TannerGraph, array: InstantonArray, config: SearchConfig, rng: np.random.Generator) -> SweepStats:
    """One pass over the array: perturb each slot in order, classify, offer.

    Accepted attempts hand amp_growth times the proposing slot's (pre-decay)
    number to every slot they update; the proposing slot's own number decays
    by amp_decay on every attempt, accepted, rejected, or infeasible.
    """
    n = graph.n_bits
    accepted = 0
    for k in range(array.n_max + 1):
        slot = array.slots[k]
        parent_amp = slot.amp
        a = choose_amplitude(config.scheme, parent_amp, rng, config.decay_span, config.wide_bounds)
        if a * a * n >= slot.w:
            slot.amp = parent_amp * config.amp_decay
            continue
        candidate = perturb(slot.xi, a, rng)
        wc = withstand_count(graph, candidate, array.n_max)
        updated = offer(array, candidate, wc, new_amp=config.amp_growth * parent_amp)
        if updated:
            accepted += 1
        # slots[k] may have just been replaced; the decay applies to whatever
        # now occupies the slot the attempt came from.
        array.slots[k].amp = array.slots[k].amp * config.amp_decay
    return SweepStats(accepted=accepted, weights=array.weights())


def _timer_fn(kind: str):
    return time.process_time if kind == "cpu" else time.perf_counter


def run(graph: TannerGraph, config: SearchConfig, initial_array: InstantonArray | None = None):
    """Full search: init (or resume), apply seed vectors, sweep until the budget ends.

    Returns (array, progress) where progress is a list of (elapsed_seconds,
    weight of the deepest slot), recorded at the start, at every improvement
    of the deepest slot, at regular intervals, and at the end.
    """
    if (config.budget_sweeps is None) == (config.budget_seconds is None):
        raise ValueError("exactly one of budget_sweeps / budget_seconds must be set")
    rng = np.random.Generator(np.random.PCG64(config.rng_seed))

    if initial_array is not None:
        array = initial_array
        if array.n_max != config.n_max:
            raise ValueError(f"initial array has n_max={array.n_max}, config wants {config.n_max}")
    elif config.resume_path is not None:
        with open(config.resume_path, "r", encoding="utf-8") as fh:
            array = load_checkpoint(fh.read(), graph, n_max=config.n_max, initial_amp=config.initial_amp)
    else:
        array = init_array(graph, config.n_max, config.initial_amp)

    for seed_vec in config.seeds:
        vec = np.asarray(seed_vec, dtype=np.float64).ravel()
        if vec.shape[0] != graph.n_bits:
            warnings.warn(f"seed vector of length {vec.shape[0]} skipped (code has {graph.n_bits} bits)")
            continue
        wc = withstand_count(graph, vec, config.n_max)
        offer(array, vec, wc, new_amp=config.initial_amp)

    now = _timer_fn(config.timer)
    t0 = now()
    best_w = array.best().w
    progress = [(0.0, best_w)]
    last_log = 0.0

    def budget_left(sweeps_done: int, elapsed: float) -> bool:
        if config.budget_sweeps is not None:
            return sweeps_done < config.budget_sweeps
        return elapsed < config.budget_seconds

    sweeps_done = 0
    elapsed = 0.0
    while budget_left(sweeps_done, elapsed):
        if config.target_w is not None and best_w <= config.target_w:
            break
        sweep(graph, array, config, rng)
        sweeps_done += 1
        elapsed = now() - t0
        w = array.best().w
        if w < best_w:
            best_w = w
            progress.append((elapsed, w))
            last_log = elapsed
        elif elapsed - last_log >= config.log_interval:
            progress.append((elapsed, w))
            last_log = elapsed
    final = (now() - t0, array.best().w)
    if not progress or progress[-1][1] != final[1] or progress[-1][0] != final[0]:
        progress.append(final)

    if config.checkpoint_path is not None:
        with open(config.checkpoint_path, "w", encoding="utf-8") as fh:
            fh.write(save_checkpoint(array))
    return array, progress


CHECKPOINT_MAGIC = "instanton-array"


def save_checkpoint(array: InstantonArray) -> str:
    """Text form of the whole array, exact on round-trip.

    Header "instanton-array N=<N> n_max=<n_max>", then per slot a line
    "k w amp" followed by one line of N full-precision components.
    """
    n = array.slots[0].xi.shape[0]
    lines = [f"{CHECKPOINT_MAGIC} N={n} n_max={array.n_max}"]
    for k, slot in enumerate(array.slots):
        lines.append(f"{k} {slot.w!r} {slot.amp!r}")
        lines.append(" ".join(repr(float(v)) for v in slot.xi))
    return "\n".join(lines) + "\n"


def load_checkpoint(text: str, graph: TannerGraph, n_max: int | None = None, initial_amp: float = 0.1) -> InstantonArray:
    """Rebuild an array from checkpoint text, revalidating every slot.

    Each stored vector's weight is recomputed (a mismatch means corruption)
    and its withstand count is re-checked against the current graph; an
    entry that no longer withstands its own index is demoted to the slots
    it still qualifies for, with a warning.  Loading under a larger n_max
    seeds the prefix and leaves the new slots at all-ones.
    """
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty checkpoint")
    header = lines[0].split()
    if len(header) != 3 or header[0] != CHECKPOINT_MAGIC:
        raise ValueError(f"bad checkpoint header: {lines[0]!r}")
    try:
        n = int(header[1].removeprefix("N="))
        stored_n_max = int(header[2].removeprefix("n_max="))
    except ValueError:
        raise ValueError(f"bad checkpoint header: {lines[0]!r}") from None
    if n != graph.n_bits:
        raise ValueError(f"checkpoint is for N={n}, graph has {graph.n_bits} bits")
    target = stored_n_max if n_max is None else n_max

    entries = []
    body = lines[1:]
    if len(body) != 2 * (stored_n_max + 1):
        raise ValueError(f"expected {2 * (stored_n_max + 1)} slot lines, found {len(body)}")
    for k in range(stored_n_max + 1):
        meta = body[2 * k].split()
        try:
            k_stored = int(meta[0])
            w_stored = float(meta[1])
            amp = float(meta[2])
        except (IndexError, ValueError):
            raise ValueError(f"corrupted slot line: {body[2 * k]!r}") from None
        if k_stored != k:
            raise ValueError(f"slot lines out of order: expected {k}, found {k_stored}")
        if amp <= 0:
            raise ValueError(f"slot {k}: non-positive amplitude number {amp}")
        try:
            xi = np.array([float(tok) for tok in body[2 * k + 1].split()], dtype=np.float64)
        except ValueError:
            raise ValueError(f"corrupted components line for slot {k}") from None
        if xi.shape[0] != n:
            raise ValueError(f"slot {k}: {xi.shape[0]} components, expected {n}")
        w = weight(xi)
        if not math.isclose(w, w_stored, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"corrupted slot line: slot {k} stores weight {w_stored}, vector has {w}")
        entries.append((k, xi, w, amp))

    array = init_array(graph, target, initial_amp)
    demoted = []
    classified = []
    for k, xi, w, amp in entries:
        wc = withstand_count(graph, xi, target)
        classified.append((k, xi, w, amp, wc))
        m = target if math.isinf(wc) else (int(wc) if wc != IMMEDIATE_DECODE else IMMEDIATE_DECODE)
        if k <= target and m != IMMEDIATE_DECODE and m >= k:
            xi = xi.copy()
            xi.setflags(write=False)
            array.slots[k] = ArraySlot(xi=xi, w=w, amp=amp)
        elif k <= target:
            demoted.append(k)
    # Offer every entry to every slot it qualifies for: restores dominance
    # between slots even if the stored array was not monotone, places
    # demoted entries where they still belong, and folds in entries beyond
    # a shrunken cap.  For a sound checkpoint this changes nothing.
    for k, xi, w, amp, wc in classified:
        offer(array, xi, wc, new_amp=amp)
    if demoted:
        warnings.warn(f"checkpoint slots demoted on load (withstand too low for their index): {demoted}")
    return array


def write_progress_csv(progress, meta: dict) -> str:
    """Progress log CSV "seconds,w_nmax" with provenance comments."""
    lines = [f"# {key}={value}" for key, value in meta.items()]
    lines.append("seconds,w_nmax")
    for t, w in progress:
        lines.append(f"{float(t)!r},{float(w)!r}")
    return "\n".join(lines) + "\n"


def read_progress_csv(text: str):
    """Parse a progress log back into a list of (seconds, weight)."""
    out = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith("seconds"):
            continue
        t_str, w_str = stripped.split(",")
        out.append((float(t_str), float(w_str)))
    return out


def aggregate_progress(logs, times, weight_grid=None):
    """Empirical CDF of best weights across runs at the requested times.

    logs: per-run lists of (seconds, best weight so far), non-increasing in
    weight.  For each time t and each grid weight w, reports the fraction
    of runs whose best weight at time t is <= w.  Runs with no entry at or
    before t count as not yet below any weight.  Returns (t, w, fraction)
    rows ordered by t then w.
    """
    if not logs:
        raise ValueError("need at least one progress log")
    if weight_grid is None:
        weight_grid = sorted({w for log in logs for _, w in log})
    rows = []
    for t in times:
        best_at_t = []
        for log in logs:
            w_now = None
            for t_e, w_e in log:
                if t_e <= t:
                    w_now = w_e
                else:
                    break
            best_at_t.append(w_now)
        for w in weight_grid:
            frac = sum(1 for b in best_at_t if b is not None and b <= w) / len(logs)
            rows.append((t, w, frac))
    return rows


def write_aggregate_csv(rows) -> str:
    lines = ["t_seconds,w,fraction"]
    for t, w, frac in rows:
        lines.append(f"{float(t)!r},{float(w)!r},{float(frac)!r}")
    return "\n".join(lines) + "\n"
