"""Extracting formal Taylor jets by sampling on tori.

The jet extractor samples f on product tori over a geometric schedule of
radii, reads off Fourier modes, and solves for the coefficients C[I,J]
mode by mode.  The cross-radius misfit of each solve certifies whether
the jet actually exists order by order; functions like monomials divided
by normsq(z) are smooth along every line but admit no second-order jet,
and the extractor reports exactly that.
"""

from forelli_lab import extract_jet, parse

# --- an entire function: every order is consistent ---------------------------
jet = extract_jet(parse("exp(z1+z2)"), 2, 10)
print("exp(z1+z2):", jet.verdict_text())
print("  c[(3,2)] =", jet.series.coefficient((3, 2)), "(1/(3!2!) = 1/12)")

# --- a meromorphic function, sampled inside its polydisc of analyticity ------
jet = extract_jet(parse("1/(1-z1)"), 1, 8, rho_max=0.5)
print("\n1/(1-z1):", jet.verdict_text())
print("  coefficients:", [round(jet.series.coefficient((k,)).real, 10)
                          for k in range(9)])

# --- the classical obstruction ------------------------------------------------
# f = z1^2 z2 conj(z1)/normsq(z) is holomorphic along every complex line
# through 0 (f(lambda v) = lambda^2 f(v)) but is NOT smooth at 0: its
# formal Taylor expansion stops being consistent at order 2.
f = parse("z1^2*z2*conj(z1)/normsq(z)")
jet = extract_jet(f, 2, 4)
print("\nz1^2*z2*conj(z1)/normsq(z):", jet.verdict_text())
for k, r in enumerate(jet.per_order_residuals):
    print("  order %d residual: %.3e" % (k, r))
