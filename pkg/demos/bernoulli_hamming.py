"""
Lossy coding with feedforward: Bernoulli source, Hamming distortion
===================================================================

The two-dimensional source built from the test channel Y = X xor Z with
Z ~ Bern(D).  The encoder sends the index of a grid cell inside the Delta
interval; the decoder follows theta from that cell, seeing each true symbol
only after it has produced its estimate.
"""

from fractions import Fraction as F

from symdyn import (
    CodecParams,
    block_distortion,
    bsc_joint,
    build_pm_dual,
    decode_stream,
    encode,
    functional_representation,
    mutual_information,
)
from symdyn.feedforward import DistortionMeasure
from symdyn.harness import block_rng, rd_experiment, sample_iid

D = F(1, 4)
pmf = bsc_joint(D)
fr = functional_representation(pmf)
print("P_Z =", [str(v) for v in fr.p_z], " xi =", fr.xi)

model = build_pm_dual(pmf)
for k in range(2):
    print(f"T0(., {k}) =", model.t0(k))
I = mutual_information(pmf.table)
print("I(X;Y) = 1 - h(1/4) =", float(I))

# one block, decoded step by step
n = 256
params = CodecParams(n=n, rate=F(27, 100))
y = sample_iid(block_rng(3, 0), pmf.p_y, n)
code = encode(model, y, params)
print("encoder success:", code.success, " index bits:", params.grid.size.bit_length(),
      " candidates tried:", code.attempts)

dec = decode_stream(model, code.m, params)
x_hat = []
for yk in y:
    x_hat.append(dec.emit())   # estimate first
    dec.feed(yk)               # then the true symbol arrives
print("block distortion:", float(block_distortion(x_hat, y, DistortionMeasure.hamming(2))))

# distortion over successful blocks, at a few block lengths
for n in (64, 128, 256):
    agg = rd_experiment(model, CodecParams(n=n, rate=F(27, 100)), 40, seed=1)["aggregates"]
    print(f"n={n:4d}  success {agg['success_rate']:.2f}  "
          f"mean distortion {agg['mean_distortion_success']:.4f}")
