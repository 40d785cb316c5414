"""Reference values derived by hand, independent of the library code."""

import math

# energy of -x2 on the unit half disc for G(t) = t^2/2: |grad u| = 1, area pi/2
ENERGY_LINEAR = math.pi / 4
# exact solution Re(z^{3/2}): |grad u|^2/2 = (9/8) r, integrated over the half disc
ENERGY_SIGNORINI = 3 * math.pi / 8
HALF_DISC_AREA = math.pi / 2
HALF_BALL_AREA_05 = math.pi * 0.25 / 2

# {1.5 sqrt(r) cos(theta/2) >= 3/4} ∩ B_{1/2}^+ is {r >= 1/(4 cos^2(theta/2))};
# in x = r cos(theta) it is the region right of the parabola y^2 = x + 1/4,
# which crosses r = 1/2 at theta = pi/3.  Polar integration gives
# pi/16 - 1/12.
LEVEL_AREA_075 = math.pi / 16 - 1 / 12

# sup over B_{3/4}^+ of |grad u| / sup over B_1^+ of |u|, both attained on the boundary
LIPSCHITZ_SIGNORINI = 1.5 * math.sqrt(0.75)

SUP_BOUND_ALPHA_2D = (math.sqrt(5) - 1) / 2

# (delta0, g0) for the examples
LIEBERMAN = {
    "power(1)": (1.0, 1.0),
    "power_log(2,1,1)": (2.0, 3.0),
    "double_power(2,3,1,3)": (1.0, 3.0),
    "product(t, t^2)": (3.0, 3.0),
    "composition(t^2, t^3)": (6.0, 6.0),
}

# caccioppoli constants for n=2, delta0=g0=1, C1M=1.3, k=1
KTILDE_PLUGIN = 1.0
C3_PLUGIN = 4 * 1.3 ** 2

# t g'/g for t^2 log(1+t) on [1e-6, 1e6]: 2 + t/((1+t) log(1+t)).
# The minimum sits at the right end: 2 + 1e6/((1e6+1) log(1e6+1)).
POWER_LOG_MIN_RATIO = 2 + 1e6 / ((1e6 + 1) * math.log(1e6 + 1))
