"""Invert maps globally by integrating the continuous Newton flow.

The solver follows xdot = -f'(x)^{-1}(f(x) - y*): the image f(x(t)) slides
along the straight segment from f(start) to the target, so convergence does
not depend on a good initial guess the way plain Newton iteration does.
"""

import numpy as np

from newtonflow import FlowFailure, builtin, solve_inverse

# %% a planar map that is injective but NOT onto (first component > 0)

zamp = builtin("zampieri-ex5")
x_true = np.array([1.0, 1.0])
y = zamp.eval(x_true)
print("target y* = f(1,1) =", y)

x = solve_inverse(zamp, y, start=(0.0, 0.0))
print("recovered x =", x, " error =", np.linalg.norm(x - x_true))

# %% plain Newton from the same start stalls for far-away targets; the flow
# does not, because the residual shrinks exponentially along a fixed ray

for x_true in ([3.0, -2.0], [-4.0, 4.0], [2.5, 3.5]):
    y = zamp.eval(x_true)
    x = solve_inverse(zamp, y, start=(0.0, 0.0))
    print(f"f^-1({np.round(y, 4)}) = {np.round(x, 10)}  (true {x_true})")

# %% a monotone scalar map: x + x^3 = 10 has the root 2 exactly

cubic = builtin("cubic1d")
print("\ncubic1d: x + x^3 = 10  ->  x =", solve_inverse(cubic, (10.0,), (0.0,)))

# %% asking for a point outside the range ends in a detected blow-up

arctan = builtin("arctan1d")
try:
    solve_inverse(arctan, (2.0,), (0.0,))  # arctan never reaches 2
except FlowFailure as e:
    traj = e.trajectory
    print(f"\narctan1d target 2: {e.status.value} after {traj.steps} steps, "
          f"|x| = {abs(traj.final_state[0]):.3e}")
