#!/usr/bin/env python3
"""Reproduce the three optimized bound tables from the library API.

Runs every scheme through the multistart optimizer and prints the
resulting lower bounds (nats per site) with their sublattice densities.
Takes a few seconds in total.
"""
import time

from hardcore_entropy import blocks, block_bounds
from hardcore_entropy.bounds import (
    optimize_closed_form,
    optimize_equalized,
    optimize_three_hex,
)

if __name__ == "__main__":
    start = time.time()

    print("Closed-form staged fill-in, one Bernoulli parameter per stage:")
    for lattice in ("square", "honeycomb", "triangular", "kagome",
                    "square_moore"):
        rep = optimize_closed_form(lattice, starts=8)
        dens = ", ".join(f"{d:.4f}" for d in rep.densities)
        print(f"  {lattice:<13} {rep.value:.4f}  ({dens})")

    # the raw square/honeycomb optima put visibly more mass on the odd
    # sublattice; pinning both densities to the same value costs only
    # ~3e-4 nats and gives a more believable trial measure
    print("\nDensity-equalized variants:")
    for lattice in ("square", "honeycomb"):
        rep = optimize_equalized(lattice, starts=8)
        print(f"  {lattice:<13} {rep.value:.6f}  at density "
              f"{rep.densities[0]:.4f}")

    print("\nThree-tile clusters on one sublattice:")
    for lattice in ("honeycomb", "triangular"):
        rep = optimize_three_hex(lattice, starts=8)
        dens = ", ".join(f"{d:.4f}" for d in rep.densities)
        print(f"  {lattice:<13} {rep.value:.4f}  ({dens})")

    print("\nSquare-lattice n x n blocks (weak-site reduced variables):")
    for n in (1, 2, 3):
        family = blocks.reduce_family(n)
        _, rep = block_bounds.optimize_block_bound(family, seed=0, starts=8)
        dens = ", ".join(f"{d:.4f}" for d in rep.densities)
        print(f"  n={n}  {rep.value:.6f}  ({dens})  "
              f"[{family.free_variables} free]")

    print(f"\nTook {time.time() - start:.1f} seconds.")
