"""Moment measures decompose over set partitions.

The n-th moment measure of a Poisson process is a nonnegative combination
of partition measures m_pi with coefficients alpha^{number of blocks}.
The demo estimates the coefficients from simulated data with a design of
window tuples whose exact [m_pi] matrix is unit upper triangular, then
reads the diagonal coefficient off a dyadic refinement scheme.
"""

from fractions import Fraction

from sushilab import (
    IntensitySpec,
    Rng,
    Window,
    default_design,
    diagonal_weight,
    fit_partition_decomposition,
    m_pi,
    partitions,
    sample_poisson,
)

alpha = IntensitySpec(Fraction(1, 2))

print("partitions of {1,2,3}:", [str(p) for p in partitions(3)])

# the design evaluates like an identity-with-units matrix, certified in
# exact arithmetic before any sampling happens
design = default_design(3)
print("exact design matrix [m_pi(rows)]:")
for row in design:
    vals = [m_pi(pi, row) for pi in partitions(3)]
    print("  " + " ".join(f"{str(v):>4s}" for v in vals))

W = Window.span(0, 3)
fit = fit_partition_decomposition(
    lambda rng: sample_poisson(alpha, W, rng), 3, design,
    40000, Rng(8, 1))
print("fitted coefficients vs alpha^{#blocks}:")
for pi in partitions(3):
    target = 0.5 ** pi.n_blocks
    print(f"  {str(pi):11s} {fit[pi]:+.4f}  target {target:.4f}  "
          f"(+-{fit.stderrs[pi]:.4f})")

# the single-block coefficient is also the limiting diagonal weight
A = Window.span(0, 2)
res = diagonal_weight(lambda rng: sample_poisson(alpha, A, rng),
                      A, 3, 8, 20000, Rng(8, 2))
print("refinement sequence for the 3-diagonal weight on [0,2):")
print("  " + " ".join(f"{v:.4f}" for v in res.estimates))
print(f"finest level {res.value:.4f} vs alpha * length = 1.0")
