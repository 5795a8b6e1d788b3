"""Random look-back-eliminable spec documents and exhaustive trace
enumeration over quantized domains.

Generated documents have integer-valued dynamics and region bounds so that
equality atoms evaluate exactly; enumerated traces follow the declared
dynamics (environment variables are forward-simulated from the declared
initial values) while system variables range freely over the quantized
grid.
"""

from __future__ import annotations

import itertools

import numpy as np

from contshield.speclang import SpecDocument, parse_spec
from contshield.speclang.analysis import _strip_prev
from contshield.speclang.evaluate import eval_arith


def random_anticipation_spec(rng: np.random.Generator,
                             max_traces: int = 1200) -> tuple[SpecDocument, int]:
    """Returns (document, trace_length)."""
    k = int(rng.integers(3, 8))  # quantized action values, <= 7
    length = 2
    while (k ** (length + 1)) <= max_traces and length < 6:
        length += 1

    half = k // 2
    a_values = list(range(-half, -half + k))
    a_lo, a_hi = min(a_values), max(a_values)
    init_x = int(rng.integers(-2, 3))
    init_a = int(rng.integers(a_lo, a_hi + 1))
    sign = "-" if rng.random() < 0.3 else "+"
    reach = abs(init_x) + abs(init_a) + (length + 1) * max(abs(a_lo), abs(a_hi))

    lines = [
        f"input x in [{-reach}.0, {reach}.0] init {init_x}.0;",
        f"output a in [{a_lo}.0, {a_hi}.0] init {init_a}.0;",
        f"assume G (x == prev(x) {sign} prev(a));",
    ]

    n_regions = int(rng.integers(1, 3))
    horizon = int(rng.integers(1, 4))
    for _ in range(n_regions):
        lo = int(rng.integers(-4, 4))
        hi = lo + int(rng.integers(1, 4))
        lines.append(
            f"guarantee G (in(x, {lo}.0, {hi}.0) -> "
            f"GB(1, {horizon}) !in(x, {lo}.0, {hi}.0));")
    if rng.random() < 0.5:
        c = int(rng.integers(-3, 4))
        c2 = int(rng.integers(a_lo, a_hi + 1))
        lines.append(f"guarantee G ((x <= {c}.0) -> (a >= {c2}.0));")

    return parse_spec("\n".join(lines) + "\n"), length


def consistent_traces(doc: SpecDocument, length: int):
    """Every length-``length`` trace that follows the declared dynamics.

    System variables enumerate the integer grid of their declared domain;
    each bound environment variable is forward-simulated from its binding
    (prev() reads the declared init values at step 0).
    """
    sys_vars = [d for d in doc.declarations if d.role.value == "system"]
    inits = {d.name: d.init for d in doc.declarations}
    assert sys_vars and doc.bindings
    assert all(v is not None for v in inits.values())
    bindings = [(name, _strip_prev(rhs)) for name, rhs in doc.bindings]

    names = [d.name for d in sys_vars]
    grids = [[float(v) for v in range(int(d.lo), int(d.hi) + 1)]
             for d in sys_vars]

    for combo in itertools.product(*grids, repeat=length):
        trace: list[dict[str, float]] = []
        for t in range(length):
            vals = {names[i]: combo[t * len(names) + i]
                    for i in range(len(names))}
            src = inits if t == 0 else trace[t - 1]
            for name, rhs in bindings:
                vals[name] = eval_arith(doc, [src], 0, rhs)
            trace.append(vals)
        yield trace


def random_free_trace(doc: SpecDocument, rng: np.random.Generator,
                      length: int) -> list[dict[str, float]]:
    """A trace ignoring the dynamics entirely (all variables free)."""
    trace = []
    for _ in range(length):
        step = {}
        for d in doc.declarations:
            lo = d.lo if np.isfinite(d.lo) else -5.0
            hi = d.hi if np.isfinite(d.hi) else 5.0
            step[d.name] = float(rng.integers(int(lo), int(hi) + 1))
        trace.append(step)
    return trace
