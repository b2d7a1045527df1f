"""Survey resonance defects: integer lattices keep small divisors at bay.

On an integer lattice every nonzero defect is an integer, so 1/|delta| is
bounded by 1 outright; cubic defects are even, so the bound is 1/2.  The
generalized weighted bound and the Gram probe extend the question to
rational and irrational frequency sets.
"""

from fractions import Fraction

from nlsoptics import (
    WaveVector,
    close_under_resonances,
    fit_generalized_bound,
    gram_diophantine_probe,
    survey_divisors,
)


def main():
    modes = close_under_resonances(
        [WaveVector((0, 1)), WaveVector((1, 0)), WaveVector((1, 1))], 1
    )
    s = survey_divisors(modes)
    print(f"square lattice: {s.tuples_scanned} tuples, "
          f"{s.nonresonant_count} non-resonant, min |delta| = {s.min_delta} "
          f"(cubic defects are even)")

    print("\nweighted bound c(b) = min |delta| prod <kappa>^b:")
    for b, c in fit_generalized_bound(modes, b_grid=[0.0, 1.0, 2.0]):
        print(f"  b={b}: c={c}")

    # rational frequencies rescale to an integer lattice; the probe scans
    # integer combinations of Gram matrix entries exactly
    probe = gram_diophantine_probe([[1, 0], [0, Fraction(1, 3)]],
                                   beta_bound=4)
    print(f"\nrational generators (1,0), (0,1/3): min nonzero "
          f"|sum beta G| = {probe.exact_minimum} at beta={probe.beta_argmin}")

    # an irrational Gram entry: integer combinations approach zero but
    # never reach it, and raising the coefficient bound digs deeper
    for bound in (4, 12):
        probe = gram_diophantine_probe([[1.0, 0.0], [0.0, 2 ** 0.25]],
                                       beta_bound=bound)
        print(f"generators (1,0), (0,2^(1/4)), bound {bound:>2d}: "
              f"min {probe.minimum:.4e} at beta={probe.beta_argmin}")


if __name__ == "__main__":
    main()
