"""Doubling the stage count buys a 4x larger step.

The stability interval grows like 1.9 s^2, so on a linear problem with known
spectral radius the maximal stable step should quadruple when s doubles.
Measured here on the discrete heat equation with a broadband start (a pure
eigenmode start would hide instability), judging each run against the exact
solution of the discrete system.
"""
import dataclasses
import math

import numpy as np

from tsrk import BlowUpError, design_method, integrate
from tsrk.problems import heat1d, heat1d_exact_state

N, T_END = 50, 0.5
base = heat1d(N, t_out=T_END)
rho = base.rho_bound(0.0, base.y0)
x = np.linspace(1 / (N + 1), 1 - 1 / (N + 1), N)
u0 = np.sin(np.pi * x) + 0.01 * np.where(np.arange(N) % 2 == 0, 1.0, -1.0)
prob = dataclasses.replace(base, y0=u0, reference=None)
exact = heat1d_exact_state(N, T_END, u0)


def is_stable(s, n_steps):
    try:
        res = integrate(design_method(s, 0.05), prob, T_END / n_steps)
    except BlowUpError:
        return False
    return float(np.max(np.abs(res.y_end - exact))) < 1.0


def minimal_stable_steps(s):
    n = max(2, math.ceil(T_END * rho / design_method(s, 0.05).l_s) - 4)
    while not is_stable(s, n):
        n += 1
    return n


print(f"heat1d n={N}: spectral radius {rho:.1f}, window [0, {T_END}]")
print(f"  {'s':>4} {'predicted h_max':>16} {'measured h_max':>16}")
steps = {}
for s in (4, 5, 6, 8, 10, 12):
    steps[s] = minimal_stable_steps(s)
    predicted = design_method(s, 0.05).l_s / rho
    print(f"  {s:>4} {predicted:>16.6f} {T_END / steps[s]:>16.6f}")
print("\nstage doubling:")
for s in (4, 5, 6):
    ratio = steps[s] / steps[2 * s]
    print(f"  s = {s} -> {2 * s}: maximal stable h grows {ratio:.3f}x")
