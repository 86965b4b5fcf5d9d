"""Literal, slow min-sum used as an independent oracle for the fast kernel.

Implements the update rules exactly as written: the bit-to-check message
is the input plus all other incoming check messages, the check-to-bit
message is the minimum of the other magnitudes times the product of the
other signs (sign(0) = 0), and sign(m) is tested against the code after
every output computation.  Sums run in adjacency order so the floating
point result is bit-identical to an equivalent implementation.
"""

import numpy as np


def _sgn(x):
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def naive_decode(graph, h, n_max):
    """Returns (kind, k, trace) with kind in {"decoded_at_input",
    "corrected", "wrong_codeword", "survived"} and trace a list of m rows."""
    n = graph.n_bits
    mu = {}
    for a, bits in enumerate(graph.check_to_bits):
        for i in bits:
            mu[(a, i)] = 0.0
    trace = []
    for k in range(n_max + 1):
        m = np.zeros(n)
        for i in range(n):
            acc = h[i]
            for a in graph.bit_to_checks[i]:
                acc += mu[(a, i)]
            m[i] = acc
        trace.append(m)
        signs = [_sgn(v) for v in m]
        if all(s != 0.0 for s in signs):
            valid = all(
                sum(1 for i in bits if signs[i] < 0) % 2 == 0
                for bits in graph.check_to_bits
            )
            if valid:
                if all(s > 0 for s in signs):
                    return ("decoded_at_input" if k == 0 else "corrected"), k, trace
                return "wrong_codeword", k, trace
        if k == n_max:
            return "survived", n_max, trace
        eta = {}
        for i in range(n):
            for a in graph.bit_to_checks[i]:
                acc = h[i]
                for b in graph.bit_to_checks[i]:
                    if b != a:
                        acc += mu[(b, i)]
                eta[(i, a)] = acc
        for a, bits in enumerate(graph.check_to_bits):
            for i in bits:
                mag = min(abs(eta[(j, a)]) for j in bits if j != i)
                sign = 1.0
                for j in bits:
                    if j != i:
                        sign *= _sgn(eta[(j, a)])
                mu[(a, i)] = mag * sign
    return "survived", n_max, trace
