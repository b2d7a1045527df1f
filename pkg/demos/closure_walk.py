"""Walk through resonant closures: which wave vectors a seed set creates.

Four seeds are closed under the resonance relation and printed with the
generation at which each vector appeared (0 = seed).
"""

import warnings

from nlsoptics import WaveVector, close_under_resonances, complete_rectangle


def show(title, seed, sigma, **kw):
    vectors = [WaveVector(tuple(c)) for c in seed]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        modes = close_under_resonances(vectors, sigma, **kw)
    print(f"\n{title} (sigma={sigma})")
    for v, g in zip(modes.vectors, modes.generations):
        tag = "seed" if g == 0 else f"gen {g}"
        print(f"  {str(v.coords):>10}  {tag}")
    print(f"  saturated: {modes.saturated}")
    return modes


def main():
    # three corners of a unit square force the fourth
    show("square corners", [(0, 1), (1, 0), (1, 1)], 1)

    # a skew triple in the plane creates exactly one vector
    show("skew triple", [(1, 1), (1, 2), (3, 2)], 1)

    # this seed spans the lattice, so we cap the growth and watch the
    # first two generations arrive
    show("cascading seed, capped", [(-1, 1), (0, 1), (0, 0), (1, 0)], 1,
         max_generations=2)

    # on the line nothing is created by the cubic interaction, but the
    # quintic one reaches 3 = 2*2 - 0 - 0 + (-1)
    show("line, cubic", [(-1,), (0,), (2,)], 1)
    show("line, quintic", [(-1,), (0,), (2,)], 2)

    # the geometric picture behind the square: a resonant quadruple is a
    # rectangle; the corner opposite (1,1) completes the three seeds
    fourth = complete_rectangle(
        WaveVector((0, 1)), WaveVector((1, 1)), WaveVector((1, 0))
    )
    print(f"\nrectangle corner opposite (1,1): {fourth.coords}")


if __name__ == "__main__":
    main()
