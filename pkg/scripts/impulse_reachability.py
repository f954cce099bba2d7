#!/usr/bin/env python3
"""Demonstrate which modal constants an impulsive maneuver can reach.

A single burn at one point of the orbit changes only the c3 and c6
weights (velocities enter only those rows of the constants map), so
moving c1 or c5 needs two burns: coast to a second anomaly, remap the
constants to that epoch, and burn again. This script applies a burn,
re-extracts constants, and tabulates which entries moved.
"""

import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from relmodes import (make_chief, modal_constants, rebase_chief, reconstruct,
                      remap_epoch)


def burn(chief, constants, theta_burn, dv):
    """Apply an LVLH velocity impulse at theta_burn; constants come back
    expressed at that epoch."""
    x = reconstruct(chief, constants, theta_burn, "cartesian")
    x = x + np.concatenate([np.zeros(3), dv])
    chief_b = rebase_chief(chief, theta_burn)
    return chief_b, modal_constants(chief_b, x, "cartesian")


def main():
    chief = make_chief(26600.0, 0.74, math.radians(63.4), 0.0,
                       math.radians(270.0), math.radians(90.0))
    x0 = np.array([0.05, 0.12, 0.0, -1e-5, 2e-5, 0.0])
    c0 = modal_constants(chief, x0, "cartesian")

    # one burn, applied at the epoch itself: only c3 and c6 move
    _, c1b = burn(chief, c0, chief.theta0, np.array([1e-5, -2e-5, 0.0]))
    moved_single = np.abs(c1b.c - c0.c) > 1e-9 * np.max(np.abs(c0.c))

    # two burns separated by a coast arc: c1 and c5 become reachable
    th_2 = chief.theta0 + 2.1
    chief_2, c_mid = burn(chief, c0, th_2, np.array([2e-5, 1e-5, 0.0]))
    th_3 = th_2 + 1.7
    _, c_two = burn(chief_2, c_mid, th_3, np.array([-1e-5, 3e-5, 0.0]))
    c_two_at_epoch = remap_epoch(rebase_chief(chief_2, th_3), c_two,
                                 chief.theta0)
    moved_double = np.abs(c_two_at_epoch.c - c0.c) \
        > 1e-9 * np.max(np.abs(c0.c))

    labels = [f"c{k}" for k in range(1, 7)]
    print("single burn at the epoch moves:",
          [l for l, m in zip(labels, moved_single) if m])
    print("two burns with a coast move:   ",
          [l for l, m in zip(labels, moved_double) if m])


if __name__ == "__main__":
    main()
