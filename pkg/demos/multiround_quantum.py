"""Replacing the opening rounds of a two-way quantum protocol.

The compression swaps the first t' rounds for shared copies of the
average cut state plus a corrector.  Its bookkeeping rests on two
verifiable claims: the mean success rate r equals alpha*beta up to
delta_b/2, and only a sqrt(delta_b) fraction of input pairs see a rate
far from the mean.  Successes are counted in words of fixed width, so
the transmitted bits follow an explicit law.

Run:  python3 demos/multiround_quantum.py
"""

import math

from commlab import qproto

delta = 0.2
for builder, t_prime in ((qproto.forward_two_way, 1),
                         (qproto.parity_two_way, 1),
                         (qproto.parity_two_way, 3)):
    protocol, relation, mu = builder()
    base = protocol.exact_error(relation, mu)
    comp = qproto.compress_multiround_quantum(protocol, relation, mu,
                                              t_prime, delta)
    print(f"== {builder.__name__} (rounds {protocol.rounds}, replace first "
          f"{t_prime}) ==")
    print(f"  alpha = {comp.alpha:.4f}, beta = {comp.beta:.4f}, "
          f"mean success rate r = {comp.r_mean:.4f}")
    print(f"  rate claim: |r/(alpha*beta) - 1| = "
          f"{abs(comp.claim_ratio() - 1.0):.2e} <= delta_b/2 = "
          f"{comp.delta_b / 2.0:.2e}")
    print(f"  tail claim: mass of far-off pairs {comp.claim_tail_mass():.4f} "
          f"<= sqrt(delta_b) = {math.sqrt(comp.delta_b):.4f}")
    print(f"  {comp.K} repetitions, counts capped at {comp.cap}, "
          f"{comp.word_bits}-bit words -> expected "
          f"{comp.expected_bits_law():.1f} bits")
    res = qproto.evaluate_quantum(comp, trials=30000, seed=17)
    print(f"  30000 Monte Carlo runs: error {res.error:.4f} "
          f"(base {base:.4f}, budget {base + delta:.4f}), "
          f"abort rate {res.abort_rate:.4f}")
    print()
