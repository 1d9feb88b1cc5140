"""
Lossless coding by reversing a trajectory
=========================================

A memoryless source and the continued-fraction source, coded by pulling the
unit interval back along the observed symbols.
"""

from fractions import Fraction as F

import numpy as np

from symdyn import (
    RepresentativeGrid,
    build_gauss,
    build_memoryless,
    decode_lossless,
    encode_lossless,
    entropy,
    fundamental_interval,
    log2_frac,
)
from symdyn.harness import block_rng, sample_iid

# an i.i.d. source with P(0) = 2/3: the fundamental interval of a sequence
# is its arithmetic-coding interval
p = [F(2, 3), F(1, 3)]
source = build_memoryless(p)
print("interval of (0, 1):", fundamental_interval(source, (0, 1)))

# code a block of 40 symbols at a rate a little above the entropy
n = 40
y = sample_iid(block_rng(0, 0), p, n)
grid = RepresentativeGrid(n, F(11, 10))
code = encode_lossless(source, y, grid)
print("H(Y) =", float(entropy(p)), " index", code.m, "of", grid.size, " ok:", code.success)
print("decoded correctly:", decode_lossless(source, code.m, grid, n) == y)

# the interval length concentrates around 2**(-n H)
rates = [float(-log2_frac(fundamental_interval(source, sample_iid(block_rng(1, b), p, 512)).length)) / 512
         for b in range(50)]
print("per-symbol -log2|interval|: mean %.4f, std %.4f" % (np.mean(rates), np.std(rates)))

# continued fractions: digits are the symbols, and the interval of a digit
# string is bounded by consecutive convergents
gauss = build_gauss()
digits = (3, 7, 15, 1)
iv = fundamental_interval(gauss, digits)
print("[0; 3, 7, 15, 1, ...] lies in", iv)
grid = RepresentativeGrid(len(digits), F(5))
m = encode_lossless(gauss, digits, grid).m
print("round trip:", decode_lossless(gauss, m, grid, len(digits)))
