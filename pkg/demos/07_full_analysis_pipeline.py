"""The end-to-end analysis: from a function to a convergence verdict.

Stages: holomorphy along the straight discs of the sampled directions,
jet extraction with per-order consistency, the zbar-freeness check,
per-direction root-test radii, capacity positivity of the chart image of
the direction set, and the explicit polydisc certificate.  The final
claim is stated modulo Hartogs extension, which is out of scope here.
"""

import json

from forelli_lab import (AnalyzeConfig, FormalSeries, cap_directions,
                         forelli_analyze, parse, sphere_directions)
from forelli_lab.report import sanitize


def show(rep):
    for st in rep.stages:
        print("  [%-7s] %s" % (st.status, st.name))
    print("  verdict:", rep.final_verdict)


# --- an entire function over a direction cap --------------------------------------
print("exp(z1+z2) on a cap of directions:")
U = cap_directions(2, 0.3, 200, seed=5)
rep = forelli_analyze(parse("exp(z1+z2)"), U)
show(rep)
print("  certified polyradius:", tuple(round(r, 4)
                                       for r in rep.certificate.r_prime))

# --- the line-holomorphic counterexample ------------------------------------------
# every disc residual vanishes, but the order-2 jet does not exist, so the
# smoothness hypothesis (1) fails and no conclusion is drawn
print("\nz1^2*z2*conj(z1)/normsq(z) on a full sphere sample:")
U = sphere_directions(2, 200, seed=6)
rep = forelli_analyze(parse("z1^2*z2*conj(z1)/normsq(z)"), U,
                      AnalyzeConfig(order=4))
show(rep)

# --- an explicit series with a zbar term ------------------------------------------
print("\nz1 + z1*zbar2 as an explicit series:")
S = (FormalSeries.variable(1, 2, 8)
     + FormalSeries.monomial((1, 0), (0, 1), 1.0, 8))
rep = forelli_analyze(S, U)
show(rep)

# reports serialize deterministically for pipelines and CI diffs
payload = sanitize(rep.to_dict())
print("\nJSON head:", json.dumps(payload, sort_keys=True)[:120], "...")
