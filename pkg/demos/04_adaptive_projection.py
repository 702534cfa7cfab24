#!/usr/bin/env python3
"""The projection operator that keeps parameter estimates bounded.

The admissible set is a ball described by a convex boundary function g:
negative inside, zero where scaling starts, one on the hard bound.  The
operator passes updates through untouched in the interior, lets inward
updates through on the boundary, and strips outward normal components so
the estimate can never run away - the standard fix for parameter drift.
"""

import numpy as np

from gascert import boundary_function, project, update_projection

theta_max, eps0 = 1.0, 0.1

# ---------------------------------------------------------------------------
# The three regimes of g
# ---------------------------------------------------------------------------
for r in (0.0, 0.6, theta_max / np.sqrt(eps0 + 1.0), 0.99, 1.0):
    theta = np.array([r, 0.0])
    print(f"|theta| = {r:5.3f}:  g = {boundary_function(theta, theta_max, eps0):+8.4f}")

# ---------------------------------------------------------------------------
# Case behaviour
# ---------------------------------------------------------------------------
interior = np.array([0.2, 0.1])
update = np.array([5.0, -3.0])
print("\ninterior point, any update passes through:",
      project(interior, update, theta_max, eps0))

on_bound = np.array([theta_max, 0.0])
outward = np.array([2.0, 1.0])
inward = np.array([-2.0, 1.0])
print("boundary point, outward update -> radial part stripped:",
      project(on_bound, outward, theta_max, eps0))
print("boundary point, inward update  -> untouched:",
      project(on_bound, inward, theta_max, eps0))

# ---------------------------------------------------------------------------
# Drift containment: keep pushing outward for a long time
# ---------------------------------------------------------------------------
dt, gain = 1e-2, 1.0
theta = np.zeros(2)
peak_g = -np.inf
for k in range(50_000):
    nrm = np.linalg.norm(theta)
    radial = theta / nrm if nrm > 0 else np.array([1.0, 0.0])
    sweep = np.array([np.cos(1e-4 * k), np.sin(1e-4 * k)])
    drive = radial + 0.3 * sweep
    drive /= np.linalg.norm(drive)
    theta = theta + dt * gain * project(theta, drive, theta_max, eps0)
    peak_g = max(peak_g, boundary_function(theta, theta_max, eps0))
print(f"\nafter 5e4 outward-drive steps: |theta| = {np.linalg.norm(theta):.6f}, "
      f"peak g = {peak_g:.9f} (never exceeds 1)")

# ---------------------------------------------------------------------------
# The adaptation law wraps the same operator column by column
# ---------------------------------------------------------------------------
rng = np.random.default_rng(0)
P = np.eye(2)
B = np.array([[1.0], [0.0]])
x_err = np.array([0.05, -0.02])
x = np.array([1.0, 2.0])
theta_hat = np.zeros((2, 1))
rate = update_projection(x_err, P, B, x, 20.0, theta_hat, theta_max, eps0)
print("\ninterior estimate update rate:\n", rate)
print("equals gain * (-outer(x, x_err' P B)):\n",
      20.0 * -np.outer(x, x_err @ P @ B))
