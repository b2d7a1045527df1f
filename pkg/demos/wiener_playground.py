"""Tour of the summable-coefficient norm and its algebra properties.

The norm is the plain l1 sum of Fourier coefficient moduli, which makes
every claim here checkable by mental arithmetic.
"""

import numpy as np

from nlsoptics import FourierSeries, free_propagator, w_norm


def main():
    f = FourierSeries({(-1,): 0.5, (0,): 1.0, (1,): 0.25j})
    g = FourierSeries({(0,): 2.0, (3,): -1.0})
    print(f"w_norm(f) = {w_norm(f)}   (0.5 + 1.0 + 0.25)")
    print(f"w_norm(g) = {w_norm(g)}")

    # the norm is submultiplicative, with equality iff no cancellation
    prod = f * g
    print(f"\nw_norm(f*g) = {w_norm(prod):.4f}  <=  "
          f"{w_norm(f) * w_norm(g):.4f} = w_norm(f) w_norm(g)")

    # substituting x -> x/eps maps lattice frequencies injectively, so the
    # sum of moduli is untouched: the fast scale costs nothing in this norm
    dilated = f.dilated(16)
    print(f"\nw_norm(f(x/eps)) at 1/eps=16: {w_norm(dilated)}  (unchanged)")

    # the free Schrodinger group multiplies each coefficient by a unit
    # phase, hence is an isometry
    moved = free_propagator(f, t=0.7, eps=1 / 16)
    print(f"w_norm after free propagation: {w_norm(moved)}  (unchanged)")

    # grid ingestion: sampled Gaussian, norm approximates the continuum
    # integral of |f_hat|, here sqrt(2 pi) for exp(-x^2/2)
    length, n = 80.0, 2048
    x = np.arange(n) * (length / n) - length / 2
    series = FourierSeries.from_grid(np.exp(-x * x / 2), length)
    print(f"\nsampled Gaussian: w_norm = {w_norm(series):.8f}, "
          f"sqrt(2 pi) = {np.sqrt(2 * np.pi):.8f}")


if __name__ == "__main__":
    main()
