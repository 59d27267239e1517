"""What protocols reveal beyond the answer.

Two measurements of leakage: how much a superposition-querying Bob
learns about Alice's whole input in the inner-product protocol, and the
exact (Alice leak, Bob leak) pair when Bob names part of his database
query classically.

Run:  python3 demos/privacy_tradeoffs.py
"""

from commlab import qproto

print("== inner-product protocol, Bob holds his input in superposition ==")
for n_bits in (1, 2):
    protocol, relation, mu = qproto.inner_product_two_way(n_bits)
    print(f"n = {n_bits}: exact error "
          f"{protocol.exact_error(relation, mu):.1e}")
    for r in range(protocol.rounds + 1):
        loss = qproto.quantum_privacy_loss(protocol, mu, r)
        print(f"  after round {r}: I(X : Bob) = {loss:.4f} bits")
    floor = n_bits / 2.0
    loss = qproto.quantum_privacy_loss(protocol, mu, 2)
    print(f"  -> leak {loss:.4f} >= n/2 = {floor}: answering one inner "
          f"product surrenders half the input")
    print()

print("== database index: revealing address bits shifts the burden ==")
print(f"{'revealed b':>10} {'Alice leak':>11} {'Bob leak':>9}")
for b in (0, 1, 2, 3):
    k_a, k_b, correct = qproto.index_tradeoff_demo(8, b)
    assert correct == 1.0
    print(f"{b:>10} {k_a:>11.2f} {k_b:>9.2f}")
print("Alice's leak halves with each address bit Bob gives up; the "
      "product of the two costs stays pinned to the database size.")
