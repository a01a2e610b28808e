import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Published subband fractal dimensions of a histology texture, levels 1-8,
# in LL, LH, HL, HH order.
PUBLISHED_FD = [
    (2.5038, 2.6797, 2.7105, 2.7897),
    (2.9346, 2.8918, 2.8994, 2.8239),
    (2.9585, 2.9655, 2.9669, 2.9722),
    (2.9877, 2.9857, 2.9860, 2.9838),
    (2.9930, 2.9937, 2.9939, 2.9945),
    (2.9975, 2.9972, 2.9973, 2.9970),
    (2.9986, 2.9987, 2.9987, 2.9988),
    (2.9994, 2.9994, 2.9994, 2.9994),
]


@pytest.fixture
def published_fd():
    return PUBLISHED_FD
