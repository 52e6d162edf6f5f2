"""Formal power series in z and zbar, and the degree-grading operators.

A quick tour of the exact series layer: building sparse truncated series,
the operators E and Ebar that multiply each term by |I| and |J|, and why
the kernel of Ebar is exactly the zbar-free ("holomorphic type") series.
"""

import numpy as np

from forelli_lab import FormalSeries

# --- build some series ------------------------------------------------------
# terms are {(I, J): coefficient} with I, J exponent tuples for z and zbar
n, N = 2, 8
z1 = FormalSeries.variable(1, n, N)
z2 = FormalSeries.variable(2, n, N)
zbar2 = FormalSeries.conj_variable(2, n, N)

S = z1 * z1 * z2 + 3.0 * z2          # holomorphic type
T = S + 0.5 * z1 * zbar2             # carries a zbar term

print("S =", S)
print("T =", T)

# --- the grading operators ---------------------------------------------------
# E scales each term by its z-degree, Ebar by its zbar-degree
print("\nE S    =", S.euler_e())
print("Ebar S =", S.euler_ebar())     # zero: S is free of zbar
print("Ebar T =", T.euler_ebar())     # picks out exactly the zbar term

# the check is exact, and a failing verdict names a witness term
print("\nS holomorphic type?", bool(S.is_holomorphic_type()))
verdict = T.is_holomorphic_type()
print("T holomorphic type?", bool(verdict), "witness:", verdict.witness)

# sampling Ebar T on random points agrees with the verdict
rng = np.random.default_rng(0)
pts = (rng.standard_normal(100) + 1j * rng.standard_normal(100),
       rng.standard_normal(100) + 1j * rng.standard_normal(100))
print("max |Ebar T| on 100 random points:",
      float(np.abs(T.euler_ebar().evaluate(pts)).max()))

# --- text round trip ---------------------------------------------------------
text = T.to_text()
print("\nserialized form:\n" + text)
assert FormalSeries.from_text(text) == T
print("round trip exact:", FormalSeries.from_text(text) == T)
