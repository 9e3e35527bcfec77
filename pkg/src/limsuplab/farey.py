"""Stern-Brocot / mediant utilities for reduced fractions of bounded denominator.

The enumeration and measure fast paths for the rational-point system all
reduce to three primitives on F_Q (reduced fractions with denominator <= Q):

* the successor of a member,
* the first member > x for an arbitrary rational x,
* the unique neighbouring pair of F_Q in [0,1] with a prescribed ordered
  denominator pair (b, d); neighbours satisfy bc - ad = 1 and b + d > Q, and
  each such coprime (b, d) occurs exactly once.

All arithmetic is exact on Python ints.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterator, Optional, Tuple


def farey_gt(xn: int, xd: int, Q: int) -> Tuple[int, int]:
    """Smallest reduced p/q > xn/xd with q <= Q (xd > 0, Q >= 1).

    Stern-Brocot descent with run acceleration: any fraction strictly between
    the current endpoints a/b < c/d has denominator >= b + d, so once
    b + d > Q the right endpoint is the answer.
    """
    if xd <= 0 or Q < 1:
        raise ValueError("need xd > 0 and Q >= 1")
    f = xn // xd
    a, b, c, d = f, 1, f + 1, 1
    while b + d <= Q:
        if (a + c) * xd <= xn * (b + d):
            # mediant <= x: push the left endpoint as far as it goes
            t = (xn * b - a * xd) // (c * xd - xn * d)
            a, b = a + t * c, b + t * d
        else:
            cap = (Q - d) // b
            if a * xd == xn * b:
                t = cap
            else:
                # keep (c + t*a)/(d + t*b) strictly above x
                t = min((c * xd - xn * d - 1) // (xn * b - a * xd), cap)
            if t <= 0:
                break
            c, d = c + t * a, d + t * b
    return c, d


def farey_geq(x: Fraction, Q: int) -> Tuple[int, int]:
    """Smallest reduced p/q >= x with q <= Q."""
    if x.denominator <= Q:
        return x.numerator, x.denominator
    return farey_gt(x.numerator, x.denominator, Q)


def farey_next(a: int, b: int, Q: int) -> Optional[Tuple[int, int]]:
    """Successor of the member a/b in F_Q restricted to [0, 1]; None past 1."""
    if b == 1:
        if a >= 1:
            return None
        return (1, Q)
    d0 = (-pow(a, -1, b)) % b
    d = d0 + ((Q - d0) // b) * b
    return (1 + a * d) // b, d


def neighbour_pair(b: int, d: int, Q: int) -> Tuple[int, int]:
    """Numerators (a, c) of the unique F_Q neighbours a/b < c/d in [0, 1].

    Requires gcd(b, d) = 1, b, d <= Q and b + d > Q.
    """
    if d == 1:
        return b - 1, 1
    c = pow(b, -1, d)
    return (b * c - 1) // d, c


def iter_farey(Q: int, start: Fraction = Fraction(0), stop: Fraction = Fraction(1)) -> Iterator[Tuple[int, int]]:
    """Yield F_Q members in [start, stop] subset [0, 1] in increasing order."""
    a, b = farey_geq(max(start, Fraction(0)), Q)
    while Fraction(a, b) <= stop:
        yield a, b
        nxt = farey_next(a, b, Q)
        if nxt is None:
            return
        a, b = nxt


def farey_size(Q: int) -> int:
    """|F_Q| on [0,1] = 1 + sum of Euler phi up to Q (sieve, O(Q log Q))."""
    phi = list(range(Q + 1))
    for i in range(2, Q + 1):
        if phi[i] == i:  # prime
            for j in range(i, Q + 1, i):
                phi[j] -= phi[j] // i
    return 1 + sum(phi[1:])


def gap_pairs_below(Q: int, bd_bound: Fraction) -> Iterator[Tuple[int, int]]:
    """Ordered coprime (b, d) with b, d <= Q, b + d > Q and b*d < bd_bound.

    These index exactly the F_Q neighbour gaps of length 1/(bd) above the
    given threshold; everything else is too narrow to matter to the caller.
    """
    num, den = bd_bound.numerator, bd_bound.denominator
    for b in range(1, Q + 1):
        dmin = max(1, Q - b + 1)
        if b * dmin * den >= num:
            continue
        dmax = min(Q, (num - 1) // (b * den))
        for d in range(dmin, dmax + 1):
            if gcd(b, d) == 1:
                yield b, d
