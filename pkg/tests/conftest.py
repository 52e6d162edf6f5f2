import numpy as np
import pytest

from forelli_lab import FormalSeries


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_series(rng, n, max_order, num_terms=12, holomorphic=False,
                  integer=False):
    """Random canonical series; integer=True gives exactly-representable
    Gaussian-integer coefficients (ring laws hold exactly in floats)."""
    terms = {}
    for _ in range(num_terms):
        total = int(rng.integers(0, max_order + 1))
        cut = 0 if holomorphic else int(rng.integers(0, total + 1))
        alpha = rng.multinomial(total - cut, np.ones(n) / n)
        beta = rng.multinomial(cut, np.ones(n) / n)
        if integer:
            c = complex(int(rng.integers(-9, 10)), int(rng.integers(-9, 10)))
        else:
            c = complex(rng.standard_normal(), rng.standard_normal())
        if c != 0:
            terms[(tuple(int(a) for a in alpha),
                   tuple(int(b) for b in beta))] = c
    return FormalSeries(n, max_order, terms)


def geometric_product_series(n_max=6, max_order=12):
    """Truncation of 1/((1-z1)(1-z2)) with exponents capped at n_max."""
    terms = {((i, j), (0, 0)): 1.0
             for i in range(n_max + 1) for j in range(n_max + 1)
             if i + j <= max_order}
    return FormalSeries(2, max_order, terms)
