"""Compressing a multiround classical protocol to its information cost.

A two-round tree computes AND of two bits by announcing both inputs; the
compressed version replaces the conversation with one rejection-sampling
message whose length is governed by the tree's information content rather
than its transcript length.  The constants in the true acceptance
thresholds are astronomical, so evaluation runs on the exact error/abort
law; tame override exponents let the same machinery run literally.

Run:  python3 demos/compress_classical_tree.py
"""

import numpy as np

from commlab import cproto
from commlab.cinfo import Distribution, JointDistribution


def uniform_prior(nx, ny):
    return JointDistribution.product(Distribution.uniform(range(nx)),
                                     Distribution.uniform(range(ny)))


def covering_relation(tree, target=0.8):
    """Accept the likeliest answers per input pair up to `target` mass."""
    pm = tree.transcript_matrix()
    pz = np.zeros((tree.x_size, tree.y_size, tree.z_size))
    for s in range(tree.n_transcripts):
        for y in range(tree.y_size):
            pz[:, y, tree.output[y, s]] += pm[:, y, s]
    order = np.argsort(-pz, axis=2)
    sorted_p = np.take_along_axis(pz, order, 2)
    keep = np.cumsum(sorted_p, 2) - sorted_p < target
    accept = np.zeros_like(keep)
    np.put_along_axis(accept, order, keep, 2)
    return cproto.Relation(accept)


tree = cproto.and_of_first_bits_tree(1, 1)
relation = cproto.Relation.and_first_bits(1, 1)
mu = uniform_prior(2, 2)

base_error = cproto.exact_tree_error(tree, relation, mu)
print(f"base tree: {tree.rounds} rounds, alphabets {tree.alphabets}, "
      f"exact error {base_error:.4f}")

delta_tilde = 0.25
comp = cproto.compress_multiround_classical(tree, relation, mu, delta_tilde)
print(f"compressed at budget {delta_tilde}: law error "
      f"{comp.law_error():.4f} <= {base_error + delta_tilde:.4f}, "
      f"abort rate {comp.abort_rate_law():.4f}")
print(f"log2(expected emitted bits) = {comp.expected_bits_log2():.2f}: "
      f"per-candidate acceptance runs at 2^-{comp.ea:.0f}, so literal "
      f"transmission is hopeless for a toy tree and the law engine "
      f"tracks lengths in log2 space")

trials = 50000
res = cproto.evaluate_protocol(comp, relation, mu, trials, seed=3)
print(f"{trials} Monte Carlo runs (seed 3): error {res.error:.4f}, "
      f"abort rate {res.abort_rate:.4f}")

print()
print("override the exponents and the machinery runs mechanically:")
lit = cproto.compress_multiround_classical(tree, relation, mu, delta_tilde,
                                           exponent_override=(3.0, 2.0))
run = cproto.simulate_literal(lit, 2000, seed=3)
print(f"  {lit.K} rejection rows, mean {run.bits.mean():.1f} emitted bits "
      f"per run, error {run.error:.4f} (law predicts {lit.law_error():.4f})")

print()
print("the guarantee holds tree by tree: ten random two-round protocols")
rng = np.random.default_rng(8)
mu4 = uniform_prior(4, 4)
for i in range(10):
    t = cproto.ClassicalProtocolTree.random(rng, 4, 4, (2, 3), 2)
    rel = covering_relation(t)
    eps = cproto.exact_tree_error(t, rel, mu4)
    c = cproto.compress_multiround_classical(t, rel, mu4, delta_tilde)
    r = cproto.evaluate_protocol(c, rel, mu4, 20000, seed=i)
    print(f"  tree {i}: base {eps:.4f} -> compressed {r.error:.4f} "
          f"(budget {eps + delta_tilde:.4f})")
