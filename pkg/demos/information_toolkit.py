"""Tour of the information toolkit: entropies, substate weights, steering,
and the prefix-free integer code.

Run:  python3 demos/information_toolkit.py
"""

import numpy as np

from commlab import cinfo, qmath

rng = np.random.default_rng(1)

print("== entropy and mutual information ==")
epr = qmath.BipartitePureState(np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2),
                               2, 2)
rho = qmath.DensityMatrix(epr.density())
print(f"EPR pair: S(AB) = {max(0.0, qmath.von_neumann_entropy(rho)):.4f} bits, "
      f"S(A) = {qmath.von_neumann_entropy(epr.marginal_a()):.4f} bits, "
      f"I(A:B) = {qmath.mutual_information(rho, 2, 2):.4f} bits")
print(f"entanglement of the EPR pair: "
      f"{qmath.entanglement_amount(epr):.4f} bits")

print()
print("== substate weight: how much of sigma a state can occupy ==")
sigma = qmath.DensityMatrix(np.diag([0.75, 0.25]))
for label, vec in (("|0>", np.array([1.0, 0.0])),
                   ("|1>", np.array([0.0, 1.0])),
                   ("|+>", np.array([1.0, 1.0]) / np.sqrt(2))):
    rho_v = qmath.DensityMatrix(np.outer(vec, vec.conj()))
    k = qmath.max_substate_weight(rho_v, sigma)
    print(f"largest k with sigma - k|v><v| PSD, v = {label}: k = {k:.4f} "
          f"(inverse quadratic form {(1.0 / (vec @ np.linalg.inv(sigma.mat) @ vec)).real:.4f})")

print()
print("== steering a purification onto a chosen target ==")
phi = qmath.canonical_purification(sigma)
target = qmath.DensityMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
weight = qmath.max_substate_weight(target, sigma)
kraus = qmath.steering_kraus(phi, target, weight)
prob, post = qmath.apply_kraus_a(phi, kraus)
print(f"Alice's local operation succeeds with probability {prob:.4f} "
      f"(= substate weight {weight:.4f})")
print(f"Bob's marginal after success matches the target to "
      f"{qmath.trace_distance(post.marginal_b(), target):.2e} trace distance")

print()
print("== prefix-free integer code ==")
for n in (1, 2, 5, 100, 1 << 16):
    word = cinfo.prefix_encode(n)
    shown = word if len(word) <= 24 else word[:21] + "..."
    print(f"n = {n:>6}: {len(word):>2} bits  {shown}")
stream = cinfo.prefix_encode(12) + cinfo.prefix_encode(1) + cinfo.prefix_encode(345)
pos, decoded = 0, []
while pos < len(stream):
    value, pos = cinfo.prefix_decode(stream, pos)
    decoded.append(value)
print(f"self-delimiting stream decodes back to {decoded}")
kraft = sum(2.0 ** -cinfo.prefix_length(n) for n in range(1, 4096))
print(f"Kraft sum over n < 4096: {kraft:.4f} <= 1")
