import random

import numpy as np

from twocross.errors import GeneralPositionError, NotFound
from twocross.geometry import Drawing
from twocross.halving import find_halving_matching


def random_drawing(rng: random.Random, n: int, size: int = 100) -> Drawing:
    while True:
        try:
            return Drawing([(rng.randrange(size), rng.randrange(size)) for _ in range(n)])
        except GeneralPositionError:
            pass


def random_seed(rng: random.Random, m: int, size: int = 100):
    """Random drawing plus a random colouring that admits a halving matching."""
    while True:
        D = random_drawing(rng, m, size)
        col = np.array([rng.getrandbits(1) for _ in range(D.n_edges)], dtype=np.uint8)
        try:
            return D, col, find_halving_matching(D, col)
        except NotFound:
            pass


def seeds(count: int, rng_seed: int = 0, sizes=(4, 6, 8)):
    rng = random.Random(rng_seed)
    return [random_seed(rng, rng.choice(sizes)) for _ in range(count)]
