"""Emit the navigation collision requirements as a ``.shieldspec`` document.

The generated document declares one input per lidar beam plus the two
action outputs, then states per-beam turn prohibitions and translation
bounds with the same constants the constraint engine uses (thresholds,
body extents, margins).  A single-step trace valuation of the document
agrees exactly with ``constraints.instantiate`` + ``satisfies``, which the
test suite checks on random observations.
"""

from __future__ import annotations

from ..constraints import SAFETY_MARGIN
from ..geometry import RobotGeometry, TurnThresholds


def _f(v: float) -> str:
    return repr(float(v))


def collision_spec_text(geom: RobotGeometry, th: TurnThresholds,
                        corridor_margin: float = 0.0,
                        cap_margin: float = 0.0) -> str:
    lines = [
        "# Collision requirements for the lidar robot: per-beam turn",
        "# prohibitions and rotate-then-translate distance bounds.",
    ]
    for i in range(geom.n_beams):
        lines.append(f"input l{i} in [0.0, {_f(geom.max_range)}];")
    lines.append(f"output a0 in [{_f(-geom.l0)}, {_f(geom.l0)}];")
    lines.append(f"output a1 in [{_f(-geom.l1)}, {_f(geom.l1)}];")

    for i in range(geom.n_beams):
        if th.right[i] > 0.0:
            lines.append(
                f"guarantee G ((l{i} <= {_f(th.right[i])}) -> (a1 <= 0.0));")
        if th.left[i] > 0.0:
            lines.append(
                f"guarantee G ((l{i} <= {_f(th.left[i])}) -> (a1 >= 0.0));")

    half_width = geom.width / 2 + corridor_margin
    fwd_pad = geom.hf + cap_margin + SAFETY_MARGIN
    bwd_pad = geom.hb + cap_margin + SAFETY_MARGIN
    for i, theta in enumerate(geom.beam_angles):
        hat = f"{_f(theta)} - a1"
        lateral = f"l{i} * abs(cos({hat}))"
        forward = f"l{i} * abs(sin({hat}))"
        lines.append(
            f"guarantee G (((a0 > 0.0) & (sin({hat}) > 0.0) & "
            f"({lateral} <= {_f(half_width)})) -> "
            f"(a0 + {_f(fwd_pad)} <= {forward}));")
        lines.append(
            f"guarantee G (((a0 < 0.0) & (sin({hat}) < 0.0) & "
            f"({lateral} <= {_f(half_width)})) -> "
            f"((0.0 - a0) + {_f(bwd_pad)} <= {forward}));")
    return "\n".join(lines) + "\n"
