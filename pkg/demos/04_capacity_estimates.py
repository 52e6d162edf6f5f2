"""Logarithmic capacity: energies, Leja points, and extremal functions.

In one variable the transfinite diameter of Leja points estimates the
logarithmic capacity (interval of length L: L/4; disc: its radius).  In
several variables, lower bounds on the extremal growth function V_E give
the growth-defect capacity exp(-gamma); for balls the estimate is exact.
The same machinery powers the normality check for direction sets: a
chart image containing a ball of positive radius has positive capacity.
"""

import numpy as np

from forelli_lab import (CompactSet1D, cap1d_transfinite, cap_directions,
                         cap_siciak, energy, leja_points, normality_check,
                         siciak_lower_bound, sphere_directions)

# --- discrete energies ---------------------------------------------------------
m = 64
roots = np.exp(2j * np.pi * np.arange(m) / m)
print("energy of %d-th roots of unity: %.5f (= log(m)/m = %.5f)"
      % (m, energy(roots, np.full(m, 1 / m)), np.log(m) / m))

# --- transfinite diameter -------------------------------------------------------
for E, truth in ((CompactSet1D.segment(-1, 1), 0.5),
                 (CompactSet1D.disc(0, 0.7), 0.7)):
    est = cap1d_transfinite(E, 128)
    print("cap %s ~ %.4f  (closed form %.2f, raw delta %.4f)"
          % (E.kind, est.value, truth, est.diagnostics["delta_raw"]))

print("first Leja points of [-1,1]:",
      np.round(leja_points(CompactSet1D.segment(-1, 1), 5).real, 3))

# --- extremal-function route ----------------------------------------------------
theta = 2 * np.pi * np.arange(256) / 256
E = (np.exp(1j * theta))[:, None]          # unit circle sample
print("\nV_E lower bound at z=2 for the unit disc: %.5f (log 2 = %.5f)"
      % (siciak_lower_bound(E, [2.0], 32), np.log(2)))
est = cap_siciak(E, degree=32, trials=200, closed_form=1.0)
print("growth-defect capacity of the unit disc: %.5f" % est.value)

# --- normality of a direction set ----------------------------------------------
U_cap = cap_directions(2, 0.2, 500, seed=2)
res = normality_check(U_cap)
print("\ncap of angular radius 0.2: inscribed chart ball radius %.3f"
      % res.radius, "->", "normal (sufficient)" if res.is_normal_sufficient
      else "undecided")
U_full = sphere_directions(2, 500, seed=2)
print("full sphere sample: inscribed radius %.3f"
      % normality_check(U_full).radius)
