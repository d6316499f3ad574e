"""Runtime safety overrides.

Every filter takes a barrier, the stepper used for constraint prediction,
the current (safe) state, and a nominal control. Nominal controls outside
the actuator box are clamped first and the clamp is recorded; all distances
and line fractions are measured from the clamped nominal. A control u is
accepted when the one-step constraint c(s, u) is nonnegative; the evasive
maneuver itself is granted the certified-theorem slack (CONSTRAINT_TOL) and
anything below that raises TheoremViolation instead of returning.

Three overrides, cheapest search first:

  * filter_single: pass the nominal if safe, else apply the evasive
    maneuver outright.
  * filter_line: scan the segment from the nominal to the evasive maneuver
    at (segments + 1) evenly spaced points and return the safe point
    nearest the nominal. The far endpoint is always feasible. A uniform
    scan, not bisection: the safe set along the segment need not be an
    interval, and cost is monotone in the fraction, so the first safe
    point is the cheapest.
  * filter_with_candidates: additionally line-search from the nominal
    toward each externally supplied candidate control and return the
    cheapest safe result overall. A candidate segment whose endpoints are
    both unsafe is discarded wholesale, so the evasive-line result always
    remains available.

grid_oracle exhaustively searches a box grid (plus the evasive maneuver and
any supplied extra candidates) for the safe control nearest the nominal; it
exists to bound filter suboptimality in tests and is not meant for online
use.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .barrier import CONSTRAINT_TOL, BarrierFn, Stepper, constraint_value
from .dynamics import Box
from .errors import DomainError, PreconditionError, TheoremViolation

Control = Any

MODE_NOMINAL = "nominal-passed"
MODE_SINGLE = "single"
MODE_LINE = "line"
MODE_CANDIDATE = "candidate-line"

DEFAULT_SEGMENTS = 32


@dataclass(frozen=True)
class FilterDecision:
    """What the filter applied and why.

    line_fraction is the position on the search segment that produced the
    control: 0 is the (clamped) nominal, 1 is the segment's far endpoint.
    override_distance is the Euclidean distance from applied to the clamped
    nominal, so a passed nominal always reports 0.
    """

    applied: Control
    nominal: Control
    mode: str
    constraint_value: float
    override_distance: float
    line_fraction: float
    clamped: bool = False


def _as_control(proto: Control, values: Iterable[float]) -> Control:
    vals = tuple(values)
    try:
        return type(proto)(*vals)
    except TypeError:
        return vals


def _lerp(a: Sequence[float], b: Sequence[float], t: float) -> tuple:
    return tuple((1.0 - t) * x + t * y for x, y in zip(a, b))


def _prepare(h: BarrierFn, s, nominal, box: Box) -> tuple[float, Control, bool]:
    h_s = h.evaluate(s)
    if h_s < -CONSTRAINT_TOL:
        raise PreconditionError(f"filter called from an unsafe state: h(s) = {h_s}")
    clamped_vals = box.clamp(nominal)
    clamped = tuple(nominal) != clamped_vals
    return h_s, _as_control(nominal, clamped_vals), clamped


def _certified_evasive(
    h: BarrierFn, stepper: Stepper, s, decay: float, h_s: float, box: Box
) -> tuple[Control, float]:
    """The evasive control, its constraint value, both sanity-checked."""
    z = h.evasive(s)
    if not box.contains(z, tol=CONSTRAINT_TOL):
        raise TheoremViolation(f"evasive maneuver left the actuator box: {z!r}")
    c = constraint_value(h, stepper, s, z, decay, h_s=h_s)
    if c < -CONSTRAINT_TOL:
        raise TheoremViolation(
            f"evasive maneuver failed its own constraint: c = {c} at {s!r}"
        )
    return z, c


def filter_single(
    h: BarrierFn, stepper: Stepper, s, nominal: Control, decay: float, box: Box
) -> FilterDecision:
    """Pass a safe nominal through, otherwise apply the evasive maneuver."""
    h_s, nom, clamped = _prepare(h, s, nominal, box)
    c_nom = constraint_value(h, stepper, s, nom, decay, h_s=h_s)
    if c_nom >= 0.0:
        return FilterDecision(nom, nom, MODE_NOMINAL, c_nom, 0.0, 0.0, clamped)
    z, c_z = _certified_evasive(h, stepper, s, decay, h_s, box)
    return FilterDecision(
        applied=z,
        nominal=nom,
        mode=MODE_SINGLE,
        constraint_value=c_z,
        override_distance=math.dist(z, nom),
        line_fraction=1.0,
        clamped=clamped,
    )


def filter_line(
    h: BarrierFn,
    stepper: Stepper,
    s,
    nominal: Control,
    decay: float,
    box: Box,
    segments: int = DEFAULT_SEGMENTS,
) -> FilterDecision:
    """Safe point nearest the nominal on the nominal-to-evasive segment."""
    if segments < 1:
        raise DomainError(f"segments must be >= 1, got {segments}")
    h_s, nom, clamped = _prepare(h, s, nominal, box)
    c_nom = constraint_value(h, stepper, s, nom, decay, h_s=h_s)
    if c_nom >= 0.0:
        return FilterDecision(nom, nom, MODE_NOMINAL, c_nom, 0.0, 0.0, clamped)
    z, c_z = _certified_evasive(h, stepper, s, decay, h_s, box)
    for k in range(1, segments):
        t = k / segments
        u = _as_control(nom, _lerp(nom, z, t))
        c = constraint_value(h, stepper, s, u, decay, h_s=h_s)
        if c >= 0.0:
            return FilterDecision(
                applied=u,
                nominal=nom,
                mode=MODE_LINE,
                constraint_value=c,
                override_distance=math.dist(u, nom),
                line_fraction=t,
                clamped=clamped,
            )
    return FilterDecision(
        applied=z,
        nominal=nom,
        mode=MODE_SINGLE,
        constraint_value=c_z,
        override_distance=math.dist(z, nom),
        line_fraction=1.0,
        clamped=clamped,
    )


def filter_with_candidates(
    h: BarrierFn,
    stepper: Stepper,
    s,
    nominal: Control,
    candidates: Sequence[Control],
    decay: float,
    box: Box,
    segments: int = DEFAULT_SEGMENTS,
) -> FilterDecision:
    """Line-search toward the evasive maneuver and every candidate; apply
    the cheapest safe result (ties keep the evasive-line result)."""
    base = filter_line(h, stepper, s, nominal, decay, box, segments)
    if base.mode == MODE_NOMINAL:
        return base
    h_s = h.evaluate(s)
    nom = base.nominal
    c_nom = constraint_value(h, stepper, s, nom, decay, h_s=h_s)
    best = base
    for cand in candidates:
        cand_u = _as_control(nominal, box.clamp(cand))
        c_end = constraint_value(h, stepper, s, cand_u, decay, h_s=h_s)
        if c_nom < 0.0 and c_end < 0.0:
            # Both endpoints unsafe: the whole segment is suspect, drop it.
            continue
        for k in range(1, segments + 1):
            t = k / segments
            u = _as_control(nominal, _lerp(nom, cand_u, t))
            c = constraint_value(h, stepper, s, u, decay, h_s=h_s)
            if c >= 0.0:
                dist = math.dist(u, nom)
                if dist < best.override_distance:
                    best = FilterDecision(
                        applied=u,
                        nominal=nom,
                        mode=MODE_CANDIDATE,
                        constraint_value=c,
                        override_distance=dist,
                        line_fraction=t,
                        clamped=base.clamped,
                    )
                break
    return best


def grid_oracle(
    h: BarrierFn,
    stepper: Stepper,
    s,
    nominal: Control,
    decay: float,
    box: Box,
    resolution: int = 100,
    extra_candidates: Sequence[Control] = (),
) -> Control:
    """Safe control nearest the nominal over an exhaustive box grid.

    resolution is the cell count per axis; doubling it refines the grid in
    place (every old point remains), so the oracle distance never
    increases under refinement. The evasive maneuver and any extra
    candidates are always in the search set, so the search is never empty.
    Test-only: cost grows with resolution**dim, and dim must be at most 3.
    """
    dim = len(box.lo)
    if dim > 3:
        raise DomainError(f"grid oracle supports control dimension <= 3, got {dim}")
    h_s = h.evaluate(s)
    if h_s < -CONSTRAINT_TOL:
        raise PreconditionError(f"oracle called from an unsafe state: h(s) = {h_s}")
    nom = _as_control(nominal, box.clamp(nominal))
    z, _ = _certified_evasive(h, stepper, s, decay, h_s, box)

    axes = [
        [lo + (hi - lo) * k / resolution for k in range(resolution + 1)]
        for lo, hi in zip(box.lo, box.hi)
    ]
    best_u = None
    best_d2 = math.inf
    candidates = itertools.chain(
        itertools.product(*axes),
        [tuple(z)],
        (box.clamp(c) for c in extra_candidates),
    )
    for vals in candidates:
        c = constraint_value(h, stepper, s, vals, decay, h_s=h_s)
        tol = CONSTRAINT_TOL if vals == tuple(z) else 0.0
        if c < -tol:
            continue
        d2 = sum((a - b) ** 2 for a, b in zip(vals, nom))
        if d2 < best_d2:
            best_d2 = d2
            best_u = vals
    return _as_control(nominal, best_u)
