"""Pencils of holomorphic discs and Cauchy-Riemann verification.

A pencil attaches a holomorphic disc to every sampled direction of the
sphere.  Along each disc, holomorphy of f is a statement about negative
Fourier modes of lambda -> f(map(lambda, u)); for a C^1 pencil the
normalized disc map h~(z1, z2) = (z1, k(z1, z2)) turns the verification
into two computable invariants H and G with G = H * df/dwbar.  A patch of
directions passing at a common disc radius is a subpencil, and straight
rays near the base point stay inside the image (the standard subpencil).
"""

import numpy as np

from forelli_lab import (check_holo_along_pencil, compute_H_G,
                         disc_holo_residual, find_subpencil, parse,
                         pencil_from_exprs, sphere_directions,
                         standard_pencil, standard_subpencil_radius,
                         tilde_normalize)

# --- disc residuals --------------------------------------------------------------
print("residual of lambda^3:            %.2e"
      % disc_holo_residual(lambda lam: lam ** 3, 0.9))
print("residual of conj(lambda):        %.2e"
      % disc_holo_residual(np.conj, 0.9))
print("residual of lam^2 + 0.01 conj:   %.2e"
      % disc_holo_residual(lambda lam: lam ** 2 + 0.01 * np.conj(lam), 1.0))

# --- a twisted pencil -------------------------------------------------------------
# map expressions use l (disc parameter), u1, u2 and conj(u_k); construction
# validates the base point, per-disc holomorphy and mesh injectivity
U = sphere_directions(2, 150, seed=7)
twisted = pencil_from_exprs(2, ["l*u1", "l*u2 + l^2*conj(u1)*u2"], U)

f = parse("exp(z1+z2)")
res = check_holo_along_pencil(f, twisted, (0.3, 0.6, 0.9), tol=1e-9)
print("\nexp(z1+z2) along the twisted pencil: worst residual %.2e"
      % res.worst())

# --- normalization at a direction and the H/G invariants --------------------------
kd = tilde_normalize(twisted, (1.0, 0.0), eps=0.4)
print("normalization checks:",
      {k: "%.3g" % v for k, v in kd.checks.items()})
ring = np.concatenate([r * np.exp(2j * np.pi * np.arange(24) / 24)
                       for r in np.linspace(0.05, 0.45, 6)])
hg = compute_H_G(f, kd, ring, tol_G=1e-7)
print("H/G on the punctured ring: max|G| = %.2e, min|H| = %.2e -> %s"
      % (hg.max_abs_G, hg.min_abs_H, hg.claim))

# a genuinely antiholomorphic function fails the same check
bad = compute_H_G(parse("conj(z2)"), kd, ring, tol_G=1e-7)
print("conj(z2):                  max|G| = %.2e -> passed=%s"
      % (bad.max_abs_G, bad.passed))

# --- subpencils --------------------------------------------------------------------
sp = find_subpencil(f, twisted, tol=1e-6, ell_max=8)
print("\nsubpencil for exp: %d of %d directions at disc radius 1/%d"
      % (sp.direction_indices.size, twisted.num_directions, sp.m))
r = standard_subpencil_radius(twisted, np.arange(25), mesh=1000)
print("straight rays of the first 25 directions verified inside the image "
      "up to |lambda| < %.3f" % r)

# the standard pencil is its own normal form
std = standard_pencil(2, U)
print("standard pencil inversion radius:",
      standard_subpencil_radius(std, np.arange(25), mesh=400))
