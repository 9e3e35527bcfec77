"""Neighbourhood unions of window elements as measurable regions.

``build_delta`` turns a weight window of a resonant system into the union of
fixed-radius neighbourhoods of its members: an exact interval union on the
line, an exact arc union on the circle (centres conservatively rounded, radii
conservatively shrunk), or a strip union in the square.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Union

from .errors import DomainError
from .funcs import ExtendedLogPower
from .geometry import Ball, IntervalUnion, Strip, StripUnion, round_down, round_nearest
from . import systems as systems_mod
from .systems import ResonantSystem, enumerate_window

#: rounding grid for irrational arc centres; radii shrink by twice this
ANGLE_DEN = 2**40
ANGLE_EPS = Fraction(2, ANGLE_DEN)


def radius_at(radius_fn, sys: ResonantSystem, n: int) -> Fraction:
    """radius_fn(u_n) as an exact Fraction, rounded toward zero if inexact."""
    if radius_fn is None:
        return Fraction(0)
    if isinstance(radius_fn, (int, float, Fraction)):
        return round_down(radius_fn)
    u = sys.u(n)
    exact = radius_fn.eval_exact(u)
    if exact is not None:
        return exact
    return round_down(radius_fn.eval(float(u)))


def build_delta(
    sys: ResonantSystem,
    n: int,
    radius_fn: Union[ExtendedLogPower, Fraction, float, None],
    within: Optional[Ball] = None,
    seed: int = 0,
    samples: int = 10**6,
    weights_from_one: bool = False,
) -> Union[IntervalUnion, StripUnion]:
    """Union of radius_fn(u_n)-neighbourhoods of the window's elements.

    On 1-D ambients the result is normalized (sorted, merged, exact rational
    endpoints).  Enumeration is widened by the radius so that elements just
    outside ``within`` whose neighbourhood reaches in are not missed.  With
    ``weights_from_one`` the weight window opens at 1 (the unrestricted form)
    instead of at the previous member of the sequence.
    """
    radius = radius_at(radius_fn, sys, n)
    if radius <= 0:
        if sys.ambient == "unit_square":
            return StripUnion((), seed, samples)
        return IntervalUnion((), sys.ambient == "unit_circle")

    search = within
    if within is not None and sys.ambient != "unit_square":
        search = Ball(within.center, Fraction(within.radius) + radius, within.ambient)

    if weights_from_one:
        elements = systems_mod.enumerate_weight_range(sys, 1, sys.window(n)[1], search)
    else:
        elements = enumerate_window(sys, n, search)

    if sys.ambient == "unit_interval":
        region = IntervalUnion.from_balls([el.geometry for el in elements], radius)
        if within is not None:
            lo, hi = within.interval()
            region = region.intersect_interval(lo, hi)
        return region

    if sys.ambient == "unit_circle":
        centers = []
        for el in elements:
            p1, p2, q = el.provenance
            ang = systems_mod.circle_angle(p1, p2, q)
            centers.append(round_nearest(ang, ANGLE_DEN))
        shrunk = radius - ANGLE_EPS
        if shrunk <= 0:
            return IntervalUnion((), True)
        region = IntervalUnion.from_balls(centers, shrunk, circular=True)
        if within is not None:
            c = round_nearest(within.center) % 1
            r = round_down(within.radius)
            pieces = []
            lo, hi = c - r, c + r
            if 2 * r >= 1:
                return region
            if lo < 0:
                pieces = [(Fraction(0), hi), (lo + 1, Fraction(1))]
            elif hi > 1:
                pieces = [(lo, Fraction(1)), (Fraction(0), hi - 1)]
            else:
                pieces = [(lo, hi)]
            out = IntervalUnion((), True)
            for a, b in pieces:
                out = out.union(region.intersect_interval(a, b))
            return out
        return region

    if sys.ambient == "unit_square":
        strips = tuple(Strip(el.geometry[0], el.geometry[1], el.geometry[2], float(radius)) for el in elements)
        return StripUnion(strips, seed, samples)

    raise DomainError(f"unknown ambient {sys.ambient}")
