"""Certificate gallery: sampled checks of global inversion hypotheses.

Each check returns a graded verdict (satisfied / violated-with-witness /
inconclusive) plus the sampled extremes, never more than the numerics can
back up.
"""

import json

import numpy as np

from newtonflow import (
    BallSampler,
    GridSampler,
    OmegaPoly,
    aux_log_coercive,
    aux_log_h,
    builtin,
    check_ball_criterion,
    check_coercive_map,
    check_cor22,
    check_hadamard,
    check_theorem21,
    check_theorem31,
)

zamp = builtin("zampieri-ex5")


def show(label, cert):
    print(f"{label:46s} -> {cert.verdict.value:12s} extremal={cert.extremal_value:.4g}")


# %% quadratic growth bound: x.F(x) <= 1 + |x|^2 certifies injectivity

show("growth bound on [-5,5]^2 (oracle map)",
     check_cor22(zamp, (0, 0), (0, 0), 1, 1, 0, GridSampler(((-5, 5), (-5, 5)), 201)))

# %% the matching auxiliary log function keeps its Newton-flow derivative bounded

k = aux_log_h(1, 1, 0, (0, 0), (0, 0), zamp)
show("aux log-h sup along the flow field",
     check_theorem21(zamp, (0, 0), k, BallSampler(5.0, 1000, seed=0)))

# %% growth-bound (Hadamard-Levy) gate: divergence of int 1/omega matters

show("cubic1d with omega = 1",
     check_hadamard(builtin("cubic1d"), OmegaPoly([1.0]), GridSampler(((-5, 5),), 201)))
show("arctan1d with omega = 1 + s^2  (integral finite)",
     check_hadamard(builtin("arctan1d"), OmegaPoly([1.0, 0.0, 1.0]),
                    GridSampler(((-5, 5),), 201)))

# %% coercivity of f: min ||f|| on growing spheres must grow

show("rot-poly2d coercivity evidence", check_coercive_map(builtin("rot-poly2d")))
cert = check_coercive_map(zamp)
show("oracle map coercivity evidence", cert)
print("   flat direction witness:", np.round(cert.witness, 3),
      " (||f|| = e^xi collapses along xi -> -inf)")

# %% bijectivity sup over all unit directions; here the auxiliary function's
# own coercivity is what fails for the non-surjective map

cert = check_theorem31(zamp, aux_log_coercive(zamp), BallSampler(4.0, 300, seed=1),
                       n_dirs=16, seed=2)
show("direction sup with k = ln(1+||f||^2)", cert)
print("   coercivity evidence:", cert.stats["coercivity"])

# %% sphere criterion (x-x0).F <= 0: sign profile on circles

for r in (0.5, 1.0, 2.0, 5.0):
    cert = check_ball_criterion(zamp, (0, 0), r, 2000, seed=3)
    print(f"circle r={r}: min={cert.stats['min']:.4f} max={cert.stats['max']:.4f} "
          f"-> {cert.verdict.value}")

# %% certificates serialize to JSON for downstream tooling

print("\n", json.dumps(check_coercive_map(zamp).to_json_dict(), indent=1)[:400], "...")
