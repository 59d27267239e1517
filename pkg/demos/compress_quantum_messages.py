"""Shrinking a one-way quantum message with a corrector.

Alice's database protocol sends a few qubits of her 4-bit input.  The
compressed version shares copies of the average message as prior
entanglement; Alice's corrector steers one copy onto her actual message
with input-independent success probability alpha, and she transmits only
the index of the first success -- a classical word of
ceil(log2(copies)) bits.

Run:  python3 demos/compress_quantum_messages.py
"""

import math

from commlab import qproto

delta = 0.2
protocol, relation, mu = qproto.index_one_way(4, 2)
base = protocol.exact_error(relation, mu)
print(f"base protocol: {protocol.x_size} inputs, message dimension "
      f"{protocol.dim_msg} ({int(math.log2(protocol.dim_msg))} qubits), "
      f"exact error {base:.4f}")

comp = qproto.compress_one_way(protocol, relation, mu, delta)
print(f"corrector success probability alpha = {comp.alpha:.4f}")
print(f"copies shared = ceil(log2(2/delta) / alpha) = {comp.copies}, "
      f"so the classical message is {comp.beta_bits} bits")
print(f"abort probability (no copy corrected) = {comp.abort_prob:.2e}")
print(f"law error {comp.law_error():.4f} <= base + delta = "
      f"{base + delta:.4f}")

trials = 100000
res = qproto.evaluate_quantum(comp, trials=trials, seed=11)
print(f"{trials} Monte Carlo runs (seed 11): error {res.error:.4f}, "
      f"expected bits {res.expected_bits:.2f}")

print()
print("delta controls the copies/abort trade-off:")
for d in (0.4, 0.2, 0.1, 0.05):
    c = qproto.compress_one_way(protocol, relation, mu, d)
    print(f"  delta {d:>4}: {c.copies:>3} copies, {c.beta_bits} message "
          f"bits, abort {c.abort_prob:.1e}")
