"""JSON input schemas and deterministic artifact writers for the runner.

Every input document carries a top-level "kind" discriminator.  Complex
numbers are [re, im] pairs; distributions are {label: prob} objects keyed
by base-10 labels; protocol trees list one kernel array per round.
Artifacts are written with sorted keys, fixed indentation, and floats at
twelve significant digits, so identical configurations produce identical
bytes.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .cinfo import Distribution, JointDistribution
from .cproto import ClassicalProtocolTree, Relation
from .ersp import ERSPInstance
from .qproto import (
    QuantumOneWayProtocol,
    forward_two_way,
    inner_product_two_way,
    parity_two_way,
    verbatim_two_way,
)

KINDS = (
    "classical-tree",
    "quantum-oneway",
    "quantum-twoway",
    "privacy",
    "ersp-instance",
    "partition-experiment",
    "direct-sum",
    "ensemble",
)

TWO_WAY_BUILDERS = {
    "forward": lambda doc, where: forward_two_way(),
    "parity": lambda doc, where: parity_two_way(),
    "verbatim": lambda doc, where: verbatim_two_way(
        _int_field(doc, "n_bits", where, low=1, high=6)),
    "inner-product": lambda doc, where: inner_product_two_way(
        _int_field(doc, "n_bits", where, low=1, high=4)),
}


class InputError(ValueError):
    """Problem in an input document, labeled with its field path."""


# ---------------------------------------------------------------------------
# low-level parsing


def load_document(path) -> dict:
    """Read a JSON object from ``path`` with position-labeled errors."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} "
                         f"column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    kind = doc.get("kind")
    if not isinstance(kind, str):
        raise InputError(f"{path}: missing string field 'kind'")
    if kind not in KINDS:
        raise InputError(f"{path}: unknown kind '{kind}' "
                         f"(expected one of {', '.join(KINDS)})")
    return doc


def _field(doc, name, where):
    if name not in doc:
        raise InputError(f"{where}: missing field '{name}'")
    return doc[name]


def _int_field(doc, name, where, low=None, high=None, default=None):
    if name not in doc and default is not None:
        return default
    val = _field(doc, name, where)
    if isinstance(val, bool) or not isinstance(val, int):
        raise InputError(f"{where}: field '{name}' must be an integer")
    if low is not None and val < low:
        raise InputError(f"{where}: field '{name}' must be >= {low}, got {val}")
    if high is not None and val > high:
        raise InputError(f"{where}: field '{name}' must be <= {high}, got {val}")
    return val


def _float_field(doc, name, where, default=None):
    if name not in doc and default is not None:
        return default
    val = _field(doc, name, where)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise InputError(f"{where}: field '{name}' must be a number")
    return float(val)


def parse_complex_array(node, where, shape=None) -> np.ndarray:
    """Nested lists with [re, im] leaves to a complex ndarray."""
    try:
        arr = np.asarray(node, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{where}: entries must be nested lists of "
                         f"[re, im] number pairs")
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise InputError(f"{where}: complex entries must be [re, im] pairs")
    out = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None and out.shape != tuple(shape):
        raise InputError(f"{where}: expected shape {tuple(shape)}, "
                         f"got {out.shape}")
    return out


def parse_real_array(node, where, shape=None) -> np.ndarray:
    try:
        arr = np.asarray(node, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{where}: entries must be nested lists of numbers")
    if shape is not None and arr.shape != tuple(shape):
        raise InputError(f"{where}: expected shape {tuple(shape)}, "
                         f"got {arr.shape}")
    return arr


def parse_distribution(node, where, size) -> Distribution:
    """{label: prob} over base-10 labels 0..size-1; missing labels get 0."""
    if not isinstance(node, dict):
        raise InputError(f"{where}: distribution must be a "
                         f"{{label: prob}} object")
    probs = np.zeros(size)
    for key, val in node.items():
        try:
            idx = int(key, 10)
        except ValueError:
            raise InputError(f"{where}: label '{key}' is not a base-10 integer")
        if not 0 <= idx < size:
            raise InputError(f"{where}: label '{key}' outside [0, {size})")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise InputError(f"{where}: probability of '{key}' must be a number")
        if val < 0:
            raise InputError(f"{where}: probability of '{key}' is negative")
        probs[idx] = float(val)
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-9:
        raise InputError(f"{where}: probabilities sum to {total:.6g}, not 1 "
                         f"(normalization)")
    return Distribution(range(size), probs)


def parse_prior(node, where, nx, ny) -> JointDistribution:
    """Joint prior: "uniform", a product {"x": …, "y": …}, or an explicit
    {"table": {"i,j": prob}} object."""
    if node == "uniform":
        return JointDistribution.product(Distribution.uniform(range(nx)),
                                         Distribution.uniform(range(ny)))
    if not isinstance(node, dict):
        raise InputError(f"{where}: prior must be \"uniform\", a product "
                         f"object, or a table object")
    if "table" in node:
        table = np.zeros((nx, ny))
        entries = node["table"]
        if not isinstance(entries, dict):
            raise InputError(f"{where}.table: must be a {{\"x,y\": prob}} object")
        for key, val in entries.items():
            parts = key.split(",")
            if len(parts) != 2:
                raise InputError(f"{where}.table: label '{key}' is not 'x,y'")
            try:
                xi, yi = int(parts[0], 10), int(parts[1], 10)
            except ValueError:
                raise InputError(f"{where}.table: label '{key}' is not 'x,y'")
            if not (0 <= xi < nx and 0 <= yi < ny):
                raise InputError(f"{where}.table: label '{key}' out of range")
            if isinstance(val, bool) or not isinstance(val, (int, float)) or val < 0:
                raise InputError(f"{where}.table: probability of '{key}' invalid")
            table[xi, yi] = float(val)
        total = float(table.sum())
        if abs(total - 1.0) > 1e-9:
            raise InputError(f"{where}.table: probabilities sum to "
                             f"{total:.6g}, not 1 (normalization)")
        return JointDistribution(range(nx), range(ny), table)
    if "x" in node and "y" in node:
        px = parse_distribution(node["x"], f"{where}.x", nx)
        py = parse_distribution(node["y"], f"{where}.y", ny)
        return JointDistribution.product(px, py)
    raise InputError(f"{where}: prior needs either 'table' or both 'x' and 'y'")


def parse_relation(node, where) -> Relation:
    """Named relation or an explicit accept table."""
    if not isinstance(node, dict):
        raise InputError(f"{where}: relation must be an object")
    if "accept" in node:
        acc = parse_real_array(node["accept"], f"{where}.accept")
        if acc.ndim != 3:
            raise InputError(f"{where}.accept: must be a (x, y, z) array")
        return Relation(acc.astype(bool))
    name = _field(node, "name", where)
    if name == "equality":
        return Relation.equality(_int_field(node, "n_bits", where, low=1, high=4))
    if name == "index":
        return Relation.index(_int_field(node, "db_bits", where, low=1, high=10))
    if name == "copy-y":
        return Relation.copy_y(_int_field(node, "x_size", where, low=1),
                               _int_field(node, "y_size", where, low=1))
    if name == "and-bits":
        return Relation.and_first_bits(
            _int_field(node, "x_bits", where, low=1, high=4),
            _int_field(node, "y_bits", where, low=1, high=4))
    raise InputError(f"{where}: unknown relation name '{name}'")


# ---------------------------------------------------------------------------
# per-kind builders


def _expect_kind(doc, kind, where):
    if doc.get("kind") != kind:
        raise InputError(f"{where}: expected kind '{kind}', "
                         f"got '{doc.get('kind')}'")


def build_classical_tree(doc, where="input"):
    """(tree, relation, mu, delta_tilde) from a classical-tree document."""
    _expect_kind(doc, "classical-tree", where)
    x_size = _int_field(doc, "x_size", where, low=1)
    y_size = _int_field(doc, "y_size", where, low=1)
    alphabets = _field(doc, "alphabets", where)
    if (not isinstance(alphabets, list) or not alphabets
            or not all(isinstance(m, int) and m >= 1 for m in alphabets)):
        raise InputError(f"{where}: 'alphabets' must be a list of sizes >= 1")
    kernels_node = _field(doc, "kernels", where)
    if not isinstance(kernels_node, list) or len(kernels_node) != len(alphabets):
        raise InputError(f"{where}: 'kernels' must list one array per round "
                         f"({len(alphabets)} rounds)")
    kernels = []
    prefix = 1
    for i, node in enumerate(kernels_node):
        n_in = x_size if i % 2 == 0 else y_size
        k = parse_real_array(node, f"{where}.kernels[{i}]",
                             (n_in, prefix, alphabets[i]))
        rows = k.sum(axis=2)
        worst = np.unravel_index(np.argmax(np.abs(rows - 1.0)), rows.shape)
        if abs(rows[worst] - 1.0) > 1e-9:
            raise InputError(
                f"{where}.kernels[{i}]: kernel row (input {worst[0]}, prefix "
                f"{worst[1]}) sums to {rows[worst]:.6g}, not 1 (normalization)")
        if k.min() < 0:
            raise InputError(f"{where}.kernels[{i}]: negative probability")
        kernels.append(k)
        prefix *= alphabets[i]
    z_size = _int_field(doc, "z_size", where, low=1)
    output = parse_real_array(_field(doc, "output", where), f"{where}.output",
                              (y_size, prefix))
    if np.any(output != np.round(output)):
        raise InputError(f"{where}.output: entries must be integers")
    output = output.astype(int)
    relation = parse_relation(_field(doc, "relation", where), f"{where}.relation")
    mu = parse_prior(_field(doc, "prior", where), f"{where}.prior",
                     x_size, y_size)
    delta_tilde = _float_field(doc, "delta_tilde", where, default=0.25)
    try:
        tree = ClassicalProtocolTree(x_size, y_size, alphabets, kernels,
                                     output, z_size)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}")
    if relation.accept.shape[0] != x_size or relation.accept.shape[1] != y_size:
        raise InputError(f"{where}: relation shape "
                         f"{relation.accept.shape[:2]} does not match "
                         f"({x_size}, {y_size})")
    return tree, relation, mu, delta_tilde


def build_quantum_oneway(doc, where="input"):
    """(protocol, relation, mu, delta) from a quantum-oneway document."""
    _expect_kind(doc, "quantum-oneway", where)
    dim_work = _int_field(doc, "dim_work", where, low=1)
    dim_msg = _int_field(doc, "dim_msg", where, low=2)
    psis = parse_complex_array(_field(doc, "states", where), f"{where}.states")
    if psis.ndim != 2 or psis.shape[1] != dim_work * dim_msg:
        raise InputError(f"{where}.states: expected shape "
                         f"(x_size, {dim_work * dim_msg}), got {psis.shape}")
    povms = parse_complex_array(_field(doc, "povms", where), f"{where}.povms")
    if povms.ndim != 4 or povms.shape[2:] != (dim_msg, dim_msg):
        raise InputError(f"{where}.povms: expected shape "
                         f"(y_size, z_size, {dim_msg}, {dim_msg}), "
                         f"got {povms.shape}")
    eye = np.eye(dim_msg)
    for y in range(povms.shape[0]):
        dev = float(np.max(np.abs(povms[y].sum(axis=0) - eye)))
        if dev > 1e-9:
            raise InputError(f"{where}.povms[{y}]: POVM elements do not sum "
                             f"to the identity (deviation {dev:.3g})")
    relation = parse_relation(_field(doc, "relation", where), f"{where}.relation")
    mu = parse_prior(_field(doc, "prior", where), f"{where}.prior",
                     psis.shape[0], povms.shape[0])
    delta = _float_field(doc, "delta", where, default=0.2)
    try:
        protocol = QuantumOneWayProtocol(psis, dim_work, dim_msg, povms)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}")
    if relation.accept.shape[:2] != (protocol.x_size, protocol.y_size):
        raise InputError(f"{where}: relation shape "
                         f"{relation.accept.shape[:2]} does not match "
                         f"({protocol.x_size}, {protocol.y_size})")
    return protocol, relation, mu, delta


def _build_two_way(node, where):
    if not isinstance(node, dict):
        raise InputError(f"{where}: protocol must be an object")
    name = _field(node, "builder", where)
    if name not in TWO_WAY_BUILDERS:
        raise InputError(f"{where}: unknown builder '{name}' (expected one "
                         f"of {', '.join(sorted(TWO_WAY_BUILDERS))})")
    return TWO_WAY_BUILDERS[name](node, where)


def build_quantum_twoway(doc, where="input"):
    """(protocol, relation, mu, t_prime, delta) from a quantum-twoway doc."""
    _expect_kind(doc, "quantum-twoway", where)
    protocol, relation, mu = _build_two_way(_field(doc, "protocol", where),
                                            f"{where}.protocol")
    if "prior" in doc:
        mu = parse_prior(doc["prior"], f"{where}.prior",
                         protocol.x_size, protocol.y_size)
    t_prime = _int_field(doc, "t_prime", where, low=1)
    if t_prime % 2 == 0 or t_prime > protocol.rounds:
        raise InputError(f"{where}: t_prime must be an odd round count "
                         f"<= {protocol.rounds}, got {t_prime}")
    delta = _float_field(doc, "delta", where, default=0.2)
    return protocol, relation, mu, t_prime, delta


def build_privacy(doc, where="input"):
    """(protocol, mu, rounds, tradeoff) from a privacy document."""
    _expect_kind(doc, "privacy", where)
    protocol, _, mu = _build_two_way(_field(doc, "protocol", where),
                                     f"{where}.protocol")
    if "prior" in doc:
        mu = parse_prior(doc["prior"], f"{where}.prior",
                         protocol.x_size, protocol.y_size)
    rounds_node = _field(doc, "rounds", where)
    if (not isinstance(rounds_node, list) or not rounds_node
            or not all(isinstance(r, int) and 0 <= r <= protocol.rounds
                       for r in rounds_node)):
        raise InputError(f"{where}: 'rounds' must list round indices in "
                         f"[0, {protocol.rounds}]")
    tradeoff = None
    if "index_tradeoff" in doc:
        node = doc["index_tradeoff"]
        if not isinstance(node, dict):
            raise InputError(f"{where}.index_tradeoff: must be an object")
        db_bits = _int_field(node, "db_bits", f"{where}.index_tradeoff",
                             low=1, high=16)
        if db_bits & (db_bits - 1):
            raise InputError(f"{where}.index_tradeoff: 'db_bits' must be a "
                             f"power of two, got {db_bits}")
        revealed = _int_field(node, "revealed_bits", f"{where}.index_tradeoff",
                              low=0, high=db_bits.bit_length() - 1)
        tradeoff = (db_bits, revealed)
    return protocol, mu, list(rounds_node), tradeoff


def build_ersp(doc, where="input"):
    """(instance, x, budget) from an ersp-instance document."""
    _expect_kind(doc, "ersp-instance", where)
    targets = parse_complex_array(_field(doc, "targets", where),
                                  f"{where}.targets")
    if targets.ndim != 2:
        raise InputError(f"{where}.targets: must be a (x_size, dim) array")
    dim = targets.shape[1]
    sigma_node = _field(doc, "sigma", where)
    try:
        if sigma_node == "uniform":
            instance = ERSPInstance.uniform_reference(targets)
        else:
            sigma = parse_complex_array(sigma_node, f"{where}.sigma", (dim, dim))
            instance = ERSPInstance(targets, sigma)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}")
    x = _int_field(doc, "x", where, low=0, default=0)
    if x >= instance.x_size:
        raise InputError(f"{where}: field 'x' outside [0, {instance.x_size})")
    budget = _int_field(doc, "budget", where, low=1, default=4096)
    return instance, x, budget


def build_partition_experiment(doc, where="input"):
    """Partition parameters; the partition itself is rebuilt from its seed."""
    _expect_kind(doc, "partition-experiment", where)
    dim = _int_field(doc, "dim", where, low=16)
    if dim % 16 != 0:
        raise InputError(f"{where}: 'dim' must be divisible by 16, got {dim}")
    x_size = _int_field(doc, "x_size", where, low=1, high=16)
    partition_seed = _int_field(doc, "partition_seed", where, low=0)
    bounds = doc.get("rank_bounds", [dim, dim // 2, 1])
    if (not isinstance(bounds, list) or not bounds
            or not all(isinstance(r, int) and r >= 1 for r in bounds)):
        raise InputError(f"{where}: 'rank_bounds' must list ranks >= 1")
    intrusion = None
    if "intrusion" in doc:
        node = doc["intrusion"]
        if not isinstance(node, dict):
            raise InputError(f"{where}.intrusion: must be an object")
        intrusion = (_int_field(node, "rank_w", f"{where}.intrusion",
                                low=1, high=dim),
                     _int_field(node, "samples", f"{where}.intrusion", low=1))
    return {"dim": dim, "x_size": x_size, "partition_seed": partition_seed,
            "rank_bounds": list(bounds), "intrusion": intrusion}


def build_direct_sum(doc, where="input"):
    """(relation, epsilon, copies) from a direct-sum document."""
    _expect_kind(doc, "direct-sum", where)
    relation = parse_relation(_field(doc, "relation", where),
                              f"{where}.relation")
    if doc.get("prior", "uniform") != "uniform":
        raise InputError(f"{where}: only the uniform prior is supported")
    epsilon = _float_field(doc, "epsilon", where)
    if not 0.0 <= epsilon < 0.5:
        raise InputError(f"{where}: 'epsilon' must lie in [0, 0.5)")
    copies = _int_field(doc, "copies", where, low=2, high=3, default=2)
    if relation.accept.shape[0] ** copies > 16:
        raise InputError(f"{where}: {copies} copies exceed the exhaustive-"
                         f"search input limit of 16")
    return relation, epsilon, copies


def build_ensemble(doc, where="input"):
    """(states, x_size, dim_rest, dim_b, mu, delta) for corrector audits."""
    _expect_kind(doc, "ensemble", where)
    x_size = _int_field(doc, "x_size", where, low=1)
    dim_rest = _int_field(doc, "dim_rest", where, low=1)
    dim_b = _int_field(doc, "dim_b", where, low=1)
    total = x_size * dim_rest * dim_b
    states = parse_complex_array(_field(doc, "states", where),
                                 f"{where}.states", (x_size, total))
    norms = np.linalg.norm(states, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-9:
        worst = int(np.argmax(np.abs(norms - 1.0)))
        raise InputError(f"{where}.states[{worst}]: norm {norms[worst]:.6g}, "
                         f"expected a unit vector (normalization)")
    mu = parse_distribution(_field(doc, "prior", where), f"{where}.prior",
                            x_size)
    delta = _float_field(doc, "delta", where, default=0.2)
    if not 0.0 < delta < 1.0:
        raise InputError(f"{where}: 'delta' must lie in (0, 1)")
    return states, x_size, dim_rest, dim_b, mu, delta


_BUILDERS = {
    "classical-tree": build_classical_tree,
    "quantum-oneway": build_quantum_oneway,
    "quantum-twoway": build_quantum_twoway,
    "privacy": build_privacy,
    "ersp-instance": build_ersp,
    "partition-experiment": build_partition_experiment,
    "direct-sum": build_direct_sum,
    "ensemble": build_ensemble,
}


def validate_document(doc, where="input"):
    """Diagnostics for a parsed document; empty list means valid."""
    kind = doc.get("kind")
    if kind not in _BUILDERS:
        return [f"{where}: unknown kind '{kind}'"]
    try:
        _BUILDERS[kind](doc, where)
    except InputError as exc:
        return [str(exc)]
    except ValueError as exc:
        return [f"{where}: {exc}"]
    return []


# ---------------------------------------------------------------------------
# artifact writers


def fmt(value) -> str:
    """Fixed textual form: floats at 12 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        out = f"{float(value):.12g}"
        return "0" if out == "-0" else out
    return str(value)


def write_csv(path, header, rows) -> None:
    """Comma-separated artifact with a header row and LF newlines."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def to_jsonable(obj):
    """Recursive conversion to JSON-safe types; complex become [re, im]."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, tuple) and hasattr(obj, "_fields"):
        return {k: to_jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def dump_json(path, payload) -> None:
    """Sorted-key, indented JSON with a trailing newline."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(to_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


__all__ = [
    "InputError",
    "KINDS",
    "build_classical_tree",
    "build_direct_sum",
    "build_ensemble",
    "build_ersp",
    "build_partition_experiment",
    "build_privacy",
    "build_quantum_oneway",
    "build_quantum_twoway",
    "dump_json",
    "fmt",
    "load_document",
    "parse_complex_array",
    "parse_distribution",
    "parse_prior",
    "parse_real_array",
    "parse_relation",
    "to_jsonable",
    "validate_document",
    "write_csv",
]
