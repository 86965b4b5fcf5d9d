"""Sparse Tanner-graph representation of LDPC codes.

A code is held as the bipartite adjacency between bit nodes and parity
checks.  Adjacency lists are canonicalized to ascending index order, and
flat CSR-style index arrays are precomputed for the decoder inner loop.
Graphs are immutable after construction and safe to share across
concurrent decoder calls.
"""

from __future__ import annotations

import numpy as np

# Circulant exponents of the three 31-row strips of the Tanner [155,64,20]
# parity-check matrix; block (s, b) has a 1 at (r, (r + exp) mod 31).
_TANNER_EXPONENTS = (
    (1, 2, 4, 8, 16),
    (5, 10, 20, 9, 18),
    (25, 19, 7, 14, 28),
)
_TANNER_CIRCULANT = 31


class AlistError(ValueError):
    """Malformed alist text."""


class TannerGraph:
    """Bipartite bit/check adjacency defining an LDPC code.

    Attributes:
        n_bits: number of bit (variable) nodes N.
        n_checks: number of parity checks M.
        check_to_bits: tuple of M tuples, ascending bit indices per check.
        bit_to_checks: tuple of N tuples, ascending check indices per bit.

    Every check must have degree >= 2: a degree-1 check pins its only bit
    and breaks min-sum message semantics, so such graphs are rejected.
    """

    def __init__(self, n_bits: int, n_checks: int, check_to_bits) -> None:
        if n_bits < 1 or n_checks < 1:
            raise ValueError(f"graph must have >=1 bit and >=1 check, got {n_bits}x{n_checks}")
        if len(check_to_bits) != n_checks:
            raise ValueError(f"expected {n_checks} check adjacency lists, got {len(check_to_bits)}")
        canon = []
        for a, bits in enumerate(check_to_bits):
            bits = sorted(int(i) for i in bits)
            if len(bits) < 2:
                raise ValueError(f"check {a} has degree {len(bits)} < 2")
            if any(i < 0 or i >= n_bits for i in bits):
                raise ValueError(f"check {a} has a bit index out of range 0..{n_bits - 1}")
            if len(set(bits)) != len(bits):
                raise ValueError(f"check {a} has duplicate bit entries")
            canon.append(tuple(bits))
        self.n_bits = int(n_bits)
        self.n_checks = int(n_checks)
        self.check_to_bits = tuple(canon)

        bit_lists = [[] for _ in range(n_bits)]
        for a, bits in enumerate(self.check_to_bits):
            for i in bits:
                bit_lists[i].append(a)
        self.bit_to_checks = tuple(tuple(lst) for lst in bit_lists)

        self._build_index_arrays()

    def _build_index_arrays(self) -> None:
        # Flat CSR layout; per-edge message storage in the decoder is indexed
        # by position in the check adjacency, so each bit also records where
        # its edges live in that storage (`bit_edge_slots`).
        check_deg = np.array([len(b) for b in self.check_to_bits], dtype=np.int32)
        self.check_ptr = np.zeros(self.n_checks + 1, dtype=np.int32)
        np.cumsum(check_deg, out=self.check_ptr[1:])
        self.check_bits = np.fromiter(
            (i for bits in self.check_to_bits for i in bits),
            dtype=np.int32,
            count=int(self.check_ptr[-1]),
        )

        bit_deg = np.array([len(c) for c in self.bit_to_checks], dtype=np.int32)
        self.bit_ptr = np.zeros(self.n_bits + 1, dtype=np.int32)
        np.cumsum(bit_deg, out=self.bit_ptr[1:])
        self.bit_checks = np.zeros(int(self.bit_ptr[-1]), dtype=np.int32)
        self.bit_edge_slots = np.zeros(int(self.bit_ptr[-1]), dtype=np.int32)
        cursor = self.bit_ptr[:-1].copy()
        for a, bits in enumerate(self.check_to_bits):
            base = int(self.check_ptr[a])
            for pos, i in enumerate(bits):
                t = cursor[i]
                self.bit_checks[t] = a
                self.bit_edge_slots[t] = base + pos
                cursor[i] += 1

        for arr in (self.check_ptr, self.check_bits, self.bit_ptr, self.bit_checks, self.bit_edge_slots):
            arr.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return int(self.check_ptr[-1])

    def bit_degrees(self):
        return tuple(len(c) for c in self.bit_to_checks)

    def check_degrees(self):
        return tuple(len(b) for b in self.check_to_bits)

    def dense(self) -> np.ndarray:
        """Dense 0/1 parity-check matrix, shape (n_checks, n_bits)."""
        h = np.zeros((self.n_checks, self.n_bits), dtype=np.uint8)
        for a, bits in enumerate(self.check_to_bits):
            for i in bits:
                h[a, i] = 1
        return h

    def __eq__(self, other) -> bool:
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (
            self.n_bits == other.n_bits
            and self.n_checks == other.n_checks
            and self.check_to_bits == other.check_to_bits
        )

    def __hash__(self):
        return hash((self.n_bits, self.n_checks, self.check_to_bits))

    def __repr__(self) -> str:
        return f"TannerGraph(n_bits={self.n_bits}, n_checks={self.n_checks}, n_edges={self.n_edges})"


def build_toy() -> TannerGraph:
    """4-bit, 5-check code whose only codewords are all-plus and all-minus.

    The first four checks form an 8-cycle of degree-2 checks, the fifth
    covers all bits; bit numbering follows the cycle.
    """
    return TannerGraph(4, 5, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 1, 2, 3)])


def build_tanner_155() -> TannerGraph:
    """Tanner's [155, 64, 20] quasi-cyclic code, 93 checks by 155 bits.

    Three strips of five 31x31 circulant permutation blocks; within strip s,
    row r of block b connects to bit 31*b + ((r + e[s][b]) mod 31) where e is
    the exponent table above.
    """
    z = _TANNER_CIRCULANT
    checks = []
    for exps in _TANNER_EXPONENTS:
        for r in range(z):
            checks.append(tuple(z * b + ((r + e) % z) for b, e in enumerate(exps)))
    return TannerGraph(5 * z, 3 * z, checks)


BUILTIN_CODES = {"toy": build_toy, "tanner155": build_tanner_155}


def _tokenize(text: str):
    """Whitespace tokens paired with 1-based line numbers."""
    toks = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split():
            toks.append((tok, lineno))
    return toks


class _TokenStream:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def remaining(self) -> int:
        return len(self.toks) - self.pos

    def take_int(self, what: str) -> tuple[int, int]:
        if self.pos >= len(self.toks):
            raise AlistError(f"unexpected end of file while reading {what}")
        tok, lineno = self.toks[self.pos]
        self.pos += 1
        try:
            return int(tok), lineno
        except ValueError:
            raise AlistError(f"line {lineno}: expected integer for {what}, got {tok!r}") from None


def _read_adjacency(stream, count, degrees, max_degree, padded, index_limit, what):
    """Read `count` 1-based index lists; returns (lists, first-line numbers)."""
    lists = []
    first_lines = []
    for n in range(count):
        want = max_degree if padded else degrees[n]
        entries = []
        first = None
        for _ in range(want):
            v, lineno = stream.take_int(f"{what} {n + 1} entry")
            if first is None:
                first = lineno
            if v == 0:
                if padded:
                    continue
                raise AlistError(f"line {lineno}: zero entry in unpadded {what} list {n + 1}")
            if v < 1 or v > index_limit:
                raise AlistError(f"line {lineno}: index {v} out of range 1..{index_limit} in {what} list {n + 1}")
            entries.append(v - 1)
        if len(entries) != degrees[n]:
            raise AlistError(f"{what} {n + 1}: declared degree {degrees[n]} but found {len(entries)} entries")
        if len(set(entries)) != len(entries):
            raise AlistError(f"{what} {n + 1}: duplicate entries")
        lists.append(sorted(entries))
        first_lines.append(first)
    return lists, first_lines


def from_alist(text: str) -> TannerGraph:
    """Parse alist text (see `to_alist` for the canonical layout).

    Accepts both the unpadded canonical form and the padded variant where
    every list is stretched to the declared maximum degree with zero
    entries.  Both the per-bit and per-check lists must describe the same
    edge set; a disagreement is reported as a transpose mismatch.
    """
    stream = _TokenStream(_tokenize(text))
    if stream.remaining() == 0:
        raise AlistError("empty alist text")
    n_bits, _ = stream.take_int("bit count")
    n_checks, _ = stream.take_int("check count")
    if n_bits < 1 or n_checks < 1:
        raise AlistError(f"bad dimensions {n_bits} {n_checks} in header")
    max_bd, _ = stream.take_int("max bit degree")
    max_cd, ln = stream.take_int("max check degree")
    if max_bd < 0 or max_cd < 1:
        raise AlistError(f"line {ln}: bad maximum degrees {max_bd} {max_cd}")

    bit_degs = []
    for i in range(n_bits):
        d, ln = stream.take_int(f"bit {i + 1} degree")
        if d < 0 or d > max_bd:
            raise AlistError(f"line {ln}: bit {i + 1} degree {d} outside 0..{max_bd}")
        bit_degs.append(d)
    check_degs = []
    for a in range(n_checks):
        d, ln = stream.take_int(f"check {a + 1} degree")
        if d < 0 or d > max_cd:
            raise AlistError(f"line {ln}: check {a + 1} degree {d} outside 0..{max_cd}")
        check_degs.append(d)

    unpadded = sum(bit_degs) + sum(check_degs)
    padded = n_bits * max_bd + n_checks * max_cd
    if stream.remaining() == unpadded:
        use_padding = False
    elif stream.remaining() == padded:
        use_padding = True
    else:
        raise AlistError(
            f"adjacency token count {stream.remaining()} matches neither the "
            f"unpadded ({unpadded}) nor the padded ({padded}) layout"
        )

    bit_lists, bit_lines = _read_adjacency(stream, n_bits, bit_degs, max_bd, use_padding, n_checks, "bit")
    check_lists, _ = _read_adjacency(stream, n_checks, check_degs, max_cd, use_padding, n_bits, "check")

    try:
        graph = TannerGraph(n_bits, n_checks, check_lists)
    except ValueError as exc:
        raise AlistError(str(exc)) from None

    for i in range(n_bits):
        if tuple(bit_lists[i]) != graph.bit_to_checks[i]:
            where = f"line {bit_lines[i]}: " if bit_lines[i] is not None else ""
            raise AlistError(f"{where}transpose mismatch at bit {i + 1}")
    return graph


def to_alist(graph: TannerGraph) -> str:
    """Canonical alist text: unpadded, ascending 1-based indices.

    Layout: "N M", "max_bit_degree max_check_degree", N bit degrees,
    M check degrees, then N per-bit check-index lines and M per-check
    bit-index lines.  `from_alist(to_alist(g)) == g`.
    """
    bit_degs = graph.bit_degrees()
    check_degs = graph.check_degrees()
    lines = [
        f"{graph.n_bits} {graph.n_checks}",
        f"{max(bit_degs)} {max(check_degs)}",
        " ".join(str(d) for d in bit_degs),
        " ".join(str(d) for d in check_degs),
    ]
    for checks in graph.bit_to_checks:
        lines.append(" ".join(str(a + 1) for a in checks))
    for bits in graph.check_to_bits:
        lines.append(" ".join(str(i + 1) for i in bits))
    return "\n".join(lines) + "\n"


def is_codeword(graph: TannerGraph, signs) -> bool:
    """True iff the sign vector satisfies every parity check.

    `signs` has one entry per bit in {-1, 0, +1}.  A zero entry (undecided
    bit) never completes a codeword.  Otherwise the vector is a codeword
    iff each check sees an even number of -1 neighbors.
    """
    s = np.asarray(signs, dtype=np.float64).ravel()
    if s.shape[0] != graph.n_bits:
        raise ValueError(f"sign vector has length {s.shape[0]}, graph has {graph.n_bits} bits")
    if np.any(s == 0):
        return False
    neg = (s < 0).astype(np.int64)
    per_check = np.add.reduceat(neg[graph.check_bits], graph.check_ptr[:-1])
    return bool(np.all(per_check % 2 == 0))


def gf2_rank(graph: TannerGraph) -> int:
    """Rank of the parity-check matrix over GF(2), by Gaussian elimination."""
    h = graph.dense()
    m, n = h.shape
    rank = 0
    for col in range(n):
        pivot = -1
        for r in range(rank, m):
            if h[r, col]:
                pivot = r
                break
        if pivot < 0:
            continue
        if pivot != rank:
            h[[rank, pivot]] = h[[pivot, rank]]
        for r in range(m):
            if r != rank and h[r, col]:
                h[r] ^= h[rank]
        rank += 1
        if rank == m:
            break
    return rank
