"""Published reference values used for comparison by the experiment harness.

Numbers from other methods (MPMC, NLP, L2 subset selection) are quoted
constants; this package does not reimplement those methods.  Every value is
tagged ``source="paper"`` when it reaches a CSV.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

SQRT2_LATTICE = "sqrt2-lattice"

# n = 260, d = 2: (L2 initial, L2 after descent, Linf initial, Linf after descent)
TABLE1 = {
    "fibonacci": (0.003438, 0.001893, 0.01200, 0.007035),
    SQRT2_LATTICE: (0.003714, 0.001927, 0.01192, 0.007960),
    "sobol": (0.003525, 0.002344, 0.01546, 0.01015),
}

# 200 uniform random starts, n = 260, after descent: median, mean, min, max
TABLE2_AFTER = {
    "l2-star": (0.003642, 0.003618, 0.003041, 0.004411),
    "linf-star": (0.02238, 0.01943, 0.01432, 0.04615),
}
# 2000 uniform random sets, n = 260, before descent
RANDOM_INITIAL_L2_MEAN = 0.007789
RANDOM_INITIAL_L2_MIN = 0.004529

# restart experiment from a random n = 260 set
RESTART_BEST_L2 = 0.003018
RESTART_BEST_LINF = 0.01344

# planar Linf: n -> (descent returned, descent best, MPMC, NLP)
COMPARE_LINF_2D = {
    20: (0.068339, 0.065558, 0.0666, 0.06219),
    100: (0.016419, 0.016115, 0.0188, 0.01492),
    180: (0.010313, 0.010119, 0.0115, 0.00901),
    260: (0.007047, 0.006965, 0.0084, 0.00640),
    420: (0.005072, 0.004992, 0.0058, 0.00412),
}

# Linf in d = 3, 4, 5: n -> (descent from Sobol', Sobol', descent from L2 subset, L2 subset)
HIGHER_DIM_LINF = {
    3: {
        50: (0.088927, 0.09708, 0.05864, 0.05952),
        100: (0.044201, 0.06058, 0.03740, 0.03835),
        150: (0.032323, 0.04483, 0.02499, 0.02612),
        200: (0.029209, 0.03315, 0.02181, 0.02203),
        250: (0.020672, 0.02548, 0.01837, 0.01840),
        500: (0.01194, 0.01460, 0.01125, 0.01207),
    },
    4: {
        50: (0.114514, 0.13422, 0.07968, 0.08482),
        100: (0.068758, 0.09269, 0.04660, 0.04760),
        150: (0.054589, 0.06174, 0.03937, 0.04110),
        200: (0.048119, 0.05026, 0.03013, 0.03008),
        250: (0.033515, 0.03822, 0.02604, 0.02596),
        500: (0.02077, 0.02290, 0.01645, 0.01810),
    },
    5: {
        50: (0.144112, 0.165488, 0.11355, 0.115507),
        100: (0.081881, 0.120707, 0.063010, 0.070071),
        150: (0.063564, 0.074899, 0.05324, 0.055612),
        200: (0.053791, 0.058292, 0.04249, 0.043016),
        500: (0.02914, 0.029017, 0.02454, 0.026378),
    },
}

# planar periodic / extreme L2: n -> (descent from Sobol', descent from Fibonacci, MPMC, Sobol', Fibonacci)
PERIODIC_2D = {
    16: (0.048778, 0.03642, 0.0381, 0.05163, 0.03819),
    32: (0.02276, 0.01923, 0.0208, 0.02336, 0.02075),
    64: (0.01276, 0.01038, 0.0114, 0.01312, 0.01158),
    128: (0.00695, 0.00540, 0.0060, 0.00719, 0.00589),
    256: (0.00409, 0.00286, 0.0034, 0.00437, 0.00317),
}
EXTREME_2D = {
    16: (0.02026, 0.01558, 0.0159, 0.02474, 0.01578),
    32: (0.00984, 0.00844, 0.0088, 0.01108, 0.00854),
    64: (0.00539, 0.00452, 0.0049, 0.00630, 0.00456),
    128: (0.00304, 0.00240, 0.0027, 0.00347, 0.00242),
    256: (0.00166, 0.00127, 0.0015, 0.00214, 0.00128),
}


@lru_cache(maxsize=None)
def sobol_baseline() -> dict:
    """This implementation's own committed values for every Sobol'-seeded cell."""
    text = resources.files("lowdisc").joinpath("data/sobol_baseline.json").read_text()
    return json.loads(text)
