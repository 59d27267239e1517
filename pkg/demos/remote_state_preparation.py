"""Exact remote state preparation through shared purifications.

Alice and Bob share purifications of a reference state sigma.  For a
target rho_x, Alice rotates her side so that a flag measurement succeeds
with the substate weight k_x = 1/Tr(sigma^{-1} rho_x)... and on success
Bob holds rho_x *exactly*.  Alice repeats over fresh copies and sends the
index of the first success with a prefix-free code, so the expected cost
is log of the expected index plus a loglog correction.

Run:  python3 demos/remote_state_preparation.py
"""

import numpy as np

from commlab import ersp
from commlab.qmath import random_pure_state

print("== steering the maximally mixed qubit onto |0> ==")
instance = ersp.ERSPInstance(np.array([[1.0, 0.0]], dtype=complex),
                             np.eye(2, dtype=complex) / 2.0)
print(f"per-copy success probability k = {instance.weight(0):.4f}, "
      f"expected first success at copy {instance.expected_index(0):.1f}")

run = ersp.run_ersp(instance, 0, budget=64, seed=5)
print(f"one literal run (seed 5): success at copy {run.index}, "
      f"{run.bits} bits transmitted, output fidelity {run.fidelity:.12f}")

trials = 20000
batch = ersp.simulate_ersp(instance, 0, trials=trials, budget=64, seed=5)
print(f"{trials} trials: mean index {batch.mean_index:.3f} (exact 2), "
      f"mean bits {batch.mean_bits:.3f} <= bound "
      f"{ersp.expected_bits_bound(instance.expected_index(0)):.2f}")

print()
print("== cost scales with how much of sigma the target occupies ==")
rng = np.random.default_rng(9)
for d in (2, 4, 8, 16):
    target = random_pure_state(d, rng)
    inst = ersp.ERSPInstance.uniform_reference(target[None, :])
    batch = ersp.simulate_ersp(inst, 0, trials=10000, budget=1024, seed=d)
    print(f"  sigma = I/{d:<2}: expected index {d:>2}, measured "
          f"{batch.mean_index:6.2f}, bits {batch.mean_bits:5.2f} "
          f"(bound {ersp.expected_bits_bound(d):5.2f}), "
          f"fidelity {batch.fidelity:.12f}")

print()
print("== a skewed reference makes rare targets expensive ==")
sigma = np.diag([0.99, 0.01]).astype(complex)
targets = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)
inst = ersp.ERSPInstance(targets, sigma)
for x, name in ((0, "|0> (heavy direction)"), (1, "|1> (light direction)")):
    batch = ersp.simulate_ersp(inst, x, trials=10000, budget=4096, seed=21 + x)
    print(f"  target {name}: expected index {inst.expected_index(x):6.1f}, "
          f"measured {batch.mean_index:7.1f}, mean bits {batch.mean_bits:.2f}")
