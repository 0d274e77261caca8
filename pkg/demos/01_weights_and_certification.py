"""Radial weights: construction, the tau scale, and class certification.

Builds exponential, double-exponential, and custom weights, prints the
structural constants (c1, c2, m_tau) estimated from the tau function, and runs
the certification that every downstream component relies on.
"""

import numpy as np

from btk import (
    certify_class_L,
    make_custom_weight,
    make_double_exponential_weight,
    make_exponential_weight,
)


def describe(name, w):
    rep = certify_class_L(w)
    print(f"{name}:")
    print(f"  tau(0)   = {float(w.tau(0.0)):.6f}")
    print(f"  c1       = {w.c1:.6f}   (tau <= c1 (1 - r))")
    print(f"  c2       = {w.c2:.6f}   (|tau'| <= c2)")
    print(f"  m_tau    = {w.m_tau:.6f}   (largest safe lattice delta)")
    print(f"  certified: {rep.passed}  "
          f"(sup tau/(1-r) = {rep.sup_tau_ratio:.4f}, "
          f"measured Lipschitz = {rep.measured_lipschitz:.4f})")
    print()


def main():
    describe("exponential alpha=1", make_exponential_weight(1.0))
    describe("exponential alpha=2", make_exponential_weight(2.0))
    describe("double exponential (1,1,1)",
             make_double_exponential_weight(1.0, 1.0, 1.0))

    # a custom weight only needs tau and the constants it claims; the
    # certification then checks the claim on a grid
    w = make_custom_weight(
        tau=lambda r: 0.5 * (1.0 - np.asarray(r, dtype=float) ** 2),
        c1=1.0,
        c2=1.0,
    )
    describe("custom tau = (1 - r^2)/2", w)

    # the tau scale shrinks toward the boundary; delta tau(r) is the radius of
    # the disks every lattice and Carleson computation uses
    w1 = make_exponential_weight(1.0)
    delta = w1.m_tau / 8.0
    for r in (0.0, 0.5, 0.9, 0.99):
        print(f"r = {r:4}:  tau = {float(w1.tau(r)):.5f}   "
              f"delta*tau = {delta * float(w1.tau(r)):.6f}")


if __name__ == "__main__":
    main()
