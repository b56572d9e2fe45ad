"""Provide tests."""
from pathlib import Path

import numpy as np

ROOT_PATH = Path(__file__).parent.parent

# Parameters of the reference coefficient figures.
FIG3 = dict(a=1.0, q=1.0, eps=2.0, c=0.0, n_banks=10)
FIG3_ETA0 = 0.2335
FIG3_MFG_ETA0 = 0.2336
STATIONARY = dict(a=1.0, q=1.0, eps=2.0, c=0.0, n_banks=10, discount=0.1)
STATIONARY_ETA = 1.0 / (2.05 + (2.05 ** 2 + 0.99) ** 0.5)

SCENARIO_TEXT = """\
[model]
a = 1
q = 1
eps = 2
c = 0
n_banks = 10
gamma = 1

[horizon]
kind = finite
T = 1
game = finite-player
steps_per_unit = 1000

[simulation]
kind = equilibrium
dt = 0.01
paths = 40
seed = 7
block_size = 16
record = full-paths
record_stride = 10

[initial]
kind = point
value = 1

[outputs]
directory = feller-output
formats = csv, binary

[risk]
y0 = 10
"""


def standard_errors(sample):
    """Return the standard errors of the sample mean and sample variance."""
    sample = np.asarray(sample, dtype=float)
    n = sample.size
    centered = sample - sample.mean()
    variance = centered.var(ddof=1)
    fourth = np.mean(centered ** 4)
    return np.sqrt(variance / n), np.sqrt(max(fourth - variance ** 2, 0.0) / n)
