"""Experiment runner: seeded simulations in, CSV/JSON artifacts out.

Each experiment loads one JSON input document, runs with an explicit seed
and trial count, and writes a ``<experiment>_report.csv`` (plus a summary
JSON, and per-trial CSVs where natural) into the output directory.  All
randomness is position-addressed by trial index and aggregation follows
trial order, so outputs are byte-identical across runs and thread counts.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import cproto, entres, ersp, jsonio, qproto
from .cinfo import Distribution, JointDistribution

EXPERIMENTS = (
    "compress-classical",
    "compress-quantum",
    "compress-multiround",
    "privacy",
    "ersp",
    "eq-entangled",
    "direct-sum",
    "corrector-audit",
)

EXPERIMENT_KINDS = {
    "compress-classical": "classical-tree",
    "compress-quantum": "quantum-oneway",
    "compress-multiround": "quantum-twoway",
    "privacy": "privacy",
    "ersp": "ersp-instance",
    "eq-entangled": "partition-experiment",
    "direct-sum": "direct-sum",
    "corrector-audit": "ensemble",
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commlab",
        description="Seeded communication-protocol experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment from a JSON input")
    run.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    run.add_argument("--input", required=True,
                     help="JSON input document (see samples/)")
    run.add_argument("--seed", required=True, type=int,
                     help="64-bit master seed")
    run.add_argument("--trials", required=True, type=int,
                     help="Monte Carlo trial count")
    run.add_argument("--delta", type=float, default=None,
                     help="error-budget parameter; overrides the input file")
    run.add_argument("--out", default=".",
                     help="output directory for artifacts")
    run.add_argument("--threads", type=int, default=1,
                     help="worker hint; outputs never depend on it")
    val = sub.add_parser("validate", help="check an input document")
    val.add_argument("input", help="JSON document to check")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_run(args)
    except jsonio.InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_validate(args) -> int:
    doc = jsonio.load_document(args.input)
    diagnostics = jsonio.validate_document(doc, where=args.input)
    if diagnostics:
        for line in diagnostics:
            print(line)
        return 1
    print("ok")
    return 0


def _cmd_run(args) -> int:
    if args.seed < 0:
        raise ValueError("seed must be non-negative")
    if args.trials < 1:
        raise ValueError("trials must be >= 1")
    if args.threads < 1:
        raise ValueError("threads must be >= 1")
    doc = jsonio.load_document(args.input)
    want = EXPERIMENT_KINDS[args.experiment]
    if doc.get("kind") != want:
        raise jsonio.InputError(
            f"{args.input}: experiment '{args.experiment}' needs kind "
            f"'{want}', got '{doc.get('kind')}'")
    os.makedirs(args.out, exist_ok=True)
    handler = _HANDLERS[args.experiment]
    handler(args, doc)
    return 0


def _config_echo(args, delta) -> dict:
    # threads deliberately not echoed: outputs may never depend on it
    return {
        "experiment": args.experiment,
        "input": args.input,
        "seed": args.seed,
        "trials": args.trials,
        "delta": delta,
    }


def _artifact(args, suffix) -> str:
    return os.path.join(args.out, f"{args.experiment}_{suffix}")


def _write_report(args, delta, rows, extra=None) -> None:
    jsonio.write_csv(_artifact(args, "report.csv"), ("quantity", "value"), rows)
    payload = {"config": _config_echo(args, delta),
               "metrics": {key: val for key, val in rows}}
    if extra:
        payload.update(extra)
    jsonio.dump_json(_artifact(args, "summary.json"), payload)


def _mc_sigma3(p, trials) -> float:
    p = min(max(p, 0.0), 1.0)
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


# ---------------------------------------------------------------------------
# experiment handlers


def _run_compress_classical(args, doc) -> None:
    tree, relation, mu, delta = jsonio.build_classical_tree(doc, args.input)
    if args.delta is not None:
        delta = args.delta
    comp = cproto.compress_multiround_classical(tree, relation, mu, delta)
    base_err = cproto.exact_tree_error(tree, relation, mu)
    res = cproto.evaluate_protocol(comp, relation, mu, args.trials, args.seed)
    rows = [
        ("base_error_exact", base_err),
        ("law_error", comp.law_error()),
        ("mc_error", res.error),
        ("mc_error_3sigma", _mc_sigma3(res.error, args.trials)),
        ("abort_rate_law", comp.abort_rate_law()),
        ("abort_rate_mc", res.abort_rate),
        ("expected_bits_mc", res.expected_bits),
        ("expected_bits_log2_law", comp.expected_bits_log2()),
        ("delta_tilde", delta),
    ]
    _write_report(args, delta, rows)
    print(f"compress-classical: base_error={jsonio.fmt(base_err)} "
          f"mc_error={jsonio.fmt(res.error)} "
          f"budget={jsonio.fmt(base_err + delta)}")


def _run_compress_quantum(args, doc) -> None:
    protocol, relation, mu, delta = jsonio.build_quantum_oneway(doc, args.input)
    if args.delta is not None:
        delta = args.delta
    comp = qproto.compress_one_way(protocol, relation, mu, delta)
    base_err = protocol.exact_error(relation, mu)
    res = qproto.evaluate_quantum(comp, trials=args.trials, seed=args.seed)
    rows = [
        ("base_error_exact", base_err),
        ("law_error", comp.law_error()),
        ("mc_error", res.error),
        ("mc_error_3sigma", _mc_sigma3(res.error, args.trials)),
        ("abort_prob_law", comp.abort_prob),
        ("alpha", comp.alpha),
        ("copies", comp.copies),
        ("message_bits", comp.beta_bits),
        ("expected_bits_mc", res.expected_bits),
        ("delta", delta),
    ]
    _write_report(args, delta, rows)
    print(f"compress-quantum: base_error={jsonio.fmt(base_err)} "
          f"mc_error={jsonio.fmt(res.error)} "
          f"message_bits={comp.beta_bits}")


def _run_compress_multiround(args, doc) -> None:
    protocol, relation, mu, t_prime, delta = jsonio.build_quantum_twoway(
        doc, args.input)
    if args.delta is not None:
        delta = args.delta
    comp = qproto.compress_multiround_quantum(protocol, relation, mu,
                                              t_prime, delta)
    base_err = protocol.exact_error(relation, mu)
    res = qproto.evaluate_quantum(comp, trials=args.trials, seed=args.seed)
    rows = [
        ("base_error_exact", base_err),
        ("law_error", comp.law_error()),
        ("mc_error", res.error),
        ("mc_error_3sigma", _mc_sigma3(res.error, args.trials)),
        ("ratio_deviation", abs(comp.claim_ratio() - 1.0)),
        ("ratio_budget", comp.delta_b / 2.0),
        ("tail_mass_law", comp.claim_tail_mass()),
        ("alpha", comp.alpha),
        ("beta", comp.beta),
        ("success_rate_mean", comp.r_mean),
        ("repetitions", comp.K),
        ("count_cap", comp.cap),
        ("word_bits", comp.word_bits),
        ("abort_rate_law", comp.abort_rate_law()),
        ("abort_rate_mc", res.abort_rate),
        ("expected_bits_law", comp.expected_bits_law()),
        ("expected_bits_mc", res.expected_bits),
        ("good_pair_fidelity", comp.good_pair_fidelity),
        ("t_prime", t_prime),
        ("delta", delta),
    ]
    _write_report(args, delta, rows)
    print(f"compress-multiround: base_error={jsonio.fmt(base_err)} "
          f"mc_error={jsonio.fmt(res.error)} "
          f"ratio_dev={jsonio.fmt(abs(comp.claim_ratio() - 1.0))}")


def _run_privacy(args, doc) -> None:
    protocol, mu, rounds, tradeoff = jsonio.build_privacy(doc, args.input)
    rows = []
    for r in rounds:
        loss = qproto.quantum_privacy_loss(protocol, mu, r)
        rows.append(("round-privacy", str(r), loss))
    if tradeoff is not None:
        db_bits, revealed = tradeoff
        k_a, k_b, correct = qproto.index_tradeoff_demo(db_bits, revealed)
        rows.append(("index-tradeoff", "alice_leak_bits", k_a))
        rows.append(("index-tradeoff", "bob_leak_bits", k_b))
        rows.append(("index-tradeoff", "correctness", correct))
    jsonio.write_csv(_artifact(args, "report.csv"),
                     ("series", "label", "value"), rows)
    payload = {"config": _config_echo(args, None),
               "series": [{"series": s, "label": lab, "value": val}
                          for s, lab, val in rows]}
    jsonio.dump_json(_artifact(args, "summary.json"), payload)
    head = ", ".join(f"round {lab}: {jsonio.fmt(val)}"
                     for s, lab, val in rows if s == "round-privacy")
    print(f"privacy: {head}")


def _run_ersp(args, doc) -> None:
    instance, x, budget = jsonio.build_ersp(doc, args.input)
    batch = ersp.simulate_ersp(instance, x, trials=args.trials, budget=budget,
                               seed=args.seed)
    trial_rows = []
    for t in range(args.trials):
        fid = batch.fidelity if batch.success[t] else 0.0
        trial_rows.append((t, x, int(batch.indices[t]), int(batch.bits[t]),
                           int(batch.success[t]), fid))
    jsonio.write_csv(_artifact(args, "trials.csv"),
                     ("trial", "x", "index", "bits", "success", "fidelity"),
                     trial_rows)
    k = batch.success_prob
    expected = 1.0 / k
    rows = [
        ("success_prob", k),
        ("expected_index_exact", expected),
        ("mean_index_mc", batch.mean_index),
        ("mean_index_3sigma", 3.0 * math.sqrt(max(1.0 - k, 0.0))
         / k / math.sqrt(args.trials)),
        ("mean_bits_mc", batch.mean_bits),
        ("bits_bound", ersp.expected_bits_bound(expected)),
        ("fidelity", batch.fidelity),
        ("abort_count", int(np.sum(~batch.success))),
        ("budget", budget),
    ]
    jsonio.write_csv(_artifact(args, "report.csv"), ("quantity", "value"), rows)
    payload = {"config": _config_echo(args, None),
               "metrics": {key: val for key, val in rows}}
    jsonio.dump_json(_artifact(args, "summary.json"), payload)
    print(f"ersp: mean_index={jsonio.fmt(batch.mean_index)} "
          f"expected={jsonio.fmt(expected)} "
          f"fidelity={jsonio.fmt(batch.fidelity)}")


def _run_eq_entangled(args, doc) -> None:
    params = jsonio.build_partition_experiment(doc, args.input)
    partition = entres.build_partition(params["dim"], params["x_size"],
                                       params["partition_seed"])
    report = entres.partition_report(partition)
    honest = entres.equality_matrix(partition)
    n = partition.x_size
    pair_rows = []
    for x in range(n):
        for xp in range(n):
            pair_rows.append((x, xp, partition.dim, honest[x, xp]))
    attacks = []
    for bound in params["rank_bounds"]:
        attack = entres.truncation_attack(partition, bound)
        attacks.append(attack)
        for x in range(n):
            for xp in range(n):
                pair_rows.append((x, xp, bound, attack.accept[x, xp]))
    jsonio.write_csv(_artifact(args, "acceptance.csv"),
                     ("x", "x_prime", "rank_bound", "accept"), pair_rows)
    off = honest[~np.eye(n, dtype=bool)]
    tail = entres.schmidt_tail_bound(entres.epr_state(partition.dim))
    summary = {
        "config": _config_echo(args, None),
        "partition": {
            "dim": partition.dim,
            "x_size": n,
            "seed": params["partition_seed"],
            "subspace_rank": partition.rank,
            "unit_trace_dev": report.unit_trace_dev,
            "orthogonality_dev": report.orthogonality_dev,
            "completeness_dev": report.completeness_dev,
            "cross_overlap_max": report.cross_overlap_max,
            "cross_overlap_mean": report.cross_overlap_mean,
            "cross_overlap_below_quarter":
                report.cross_overlap_max < entres.CROSS_OVERLAP_BOUND,
        },
        "equality": {
            "message_bits": entres.MESSAGE_BITS,
            "equal_accept_dev": float(np.max(np.abs(np.diag(honest) - 1.0))),
            "unequal_accept_max": float(np.max(off)) if off.size else 0.0,
            "fraction_above_quarter":
                float(np.mean(off > 0.25)) if off.size else 0.0,
        },
        "truncation": [
            {"rank_bound": a.rank_bound, "kept_mass": a.kept_mass,
             "prior_distance": a.prior_distance, "equal_min": a.equal_min,
             "shift_max": a.shift_max, "below_threshold": a.below_threshold}
            for a in attacks
        ],
        "schmidt_tail": tail,
    }
    if params["intrusion"] is not None:
        rank_w, samples = params["intrusion"]
        summary["intrusion"] = entres.low_rank_intrusion(
            partition, rank_w, samples, args.seed)
    jsonio.dump_json(_artifact(args, "summary.json"), summary)
    print(f"eq-entangled: equal_dev="
          f"{jsonio.fmt(summary['equality']['equal_accept_dev'])} "
          f"unequal_max={jsonio.fmt(summary['equality']['unequal_accept_max'])} "
          f"cross_max={jsonio.fmt(report.cross_overlap_max)}")


def _run_direct_sum(args, doc) -> None:
    relation, epsilon, copies = jsonio.build_direct_sum(doc, args.input)
    nx, ny, _ = relation.accept.shape
    mu_one = JointDistribution.product(Distribution.uniform(range(nx)),
                                       Distribution.uniform(range(ny)))
    single = cproto.brute_force_one_way(relation, mu_one, epsilon)
    stacked = relation.direct_sum(copies)
    sx, sy, _ = stacked.accept.shape
    mu_many = JointDistribution.product(Distribution.uniform(range(sx)),
                                        Distribution.uniform(range(sy)))
    combined = cproto.brute_force_one_way(stacked, mu_many, epsilon)
    rows = [
        ("epsilon", epsilon),
        ("copies", copies),
        ("single_messages", single.messages),
        ("single_bits", single.bits),
        ("single_error", single.error),
        ("combined_messages", combined.messages),
        ("combined_bits", combined.bits),
        ("combined_error", combined.error),
        ("message_ratio", combined.messages / single.messages),
        ("naive_messages", single.messages ** copies),
    ]
    _write_report(args, epsilon, rows)
    print(f"direct-sum: single={single.messages} messages, "
          f"{copies} copies={combined.messages} messages "
          f"(ratio {jsonio.fmt(combined.messages / single.messages)})")


def _run_corrector_audit(args, doc) -> None:
    states, x_size, dim_rest, dim_b, mu, delta = jsonio.build_ensemble(
        doc, args.input)
    if args.delta is not None:
        delta = args.delta
    corrector = qproto.build_corrector(states, x_size, dim_rest, dim_b,
                                       mu, delta)
    audit = corrector.audit()
    passed = (audit["success_deviation"] <= 1e-9
              and audit["register_deviation"] <= 1e-9
              and audit["expected_distance"] <= delta + 1e-12)
    rows = [
        ("alpha", audit["alpha"]),
        ("success_deviation", audit["success_deviation"]),
        ("register_deviation", audit["register_deviation"]),
        ("expected_distance", audit["expected_distance"]),
        ("good_mass", audit["good_mass"]),
        ("delta", delta),
        ("pass", passed),
    ]
    _write_report(args, delta, rows)
    print(f"corrector-audit: alpha={jsonio.fmt(audit['alpha'])} "
          f"distance={jsonio.fmt(audit['expected_distance'])} "
          f"pass={'yes' if passed else 'no'}")


_HANDLERS = {
    "compress-classical": _run_compress_classical,
    "compress-quantum": _run_compress_quantum,
    "compress-multiround": _run_compress_multiround,
    "privacy": _run_privacy,
    "ersp": _run_ersp,
    "eq-entangled": _run_eq_entangled,
    "direct-sum": _run_direct_sum,
    "corrector-audit": _run_corrector_audit,
}


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
