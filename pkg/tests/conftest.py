import random
from fractions import Fraction

import pytest

from limsuplab.funcs import ExtendedLogPower


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def random_log_power(rng, p_range=(-3, 1), allow_logs=True) -> ExtendedLogPower:
    p = Fraction(rng.randint(p_range[0] * 12, p_range[1] * 12), 12)
    q = Fraction(rng.randint(-30, 30), 10) if allow_logs and rng.random() < 0.7 else Fraction(0)
    w = Fraction(rng.randint(-20, 20), 10) if allow_logs and rng.random() < 0.3 else Fraction(0)
    coeff = Fraction(rng.randint(1, 40), rng.randint(1, 7))
    return ExtendedLogPower(coeff, p, q, w)
