"""Runner and JSON-document tests: parsing, diagnostics, artifacts."""

import json
import os

import numpy as np
import pytest

from commlab import cli, jsonio

SAMPLES = os.path.normpath(
    os.path.join(os.path.dirname(__file__), os.pardir, "samples"))

SAMPLE_BY_EXPERIMENT = {
    "compress-classical": "compress_classical.json",
    "compress-quantum": "compress_quantum.json",
    "compress-multiround": "compress_multiround.json",
    "privacy": "privacy.json",
    "ersp": "ersp.json",
    "eq-entangled": "eq_entangled.json",
    "direct-sum": "direct_sum.json",
    "corrector-audit": "corrector_audit.json",
}


def sample_path(name):
    return os.path.join(SAMPLES, name)


def load_sample(name):
    with open(sample_path(name), "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_doc(tmp_path, doc, name="doc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def run_cli(*args):
    return cli.main([str(a) for a in args])


def run_sample(experiment, out_dir, seed, trials, *extra):
    return run_cli("run", "--experiment", experiment,
                   "--input", sample_path(SAMPLE_BY_EXPERIMENT[experiment]),
                   "--seed", seed, "--trials", trials, "--out", out_dir,
                   *extra)


def read_lines(out_dir, filename):
    with open(os.path.join(str(out_dir), filename), "r",
              encoding="utf-8") as fh:
        return fh.read().splitlines()


def report_dict(out_dir, experiment):
    lines = read_lines(out_dir, f"{experiment}_report.csv")
    assert lines[0] == "quantity,value"
    return {line.split(",")[0]: line.split(",")[1] for line in lines[1:]}


def read_summary(out_dir, experiment):
    with open(os.path.join(str(out_dir), f"{experiment}_summary.json"), "r",
              encoding="utf-8") as fh:
        return json.load(fh)


class TestFormatting:
    def test_fmt_bool_as_bit(self):
        assert jsonio.fmt(True) == "1"
        assert jsonio.fmt(False) == "0"
        assert jsonio.fmt(np.bool_(True)) == "1"

    def test_fmt_integers(self):
        assert jsonio.fmt(7) == "7"
        assert jsonio.fmt(np.int64(-3)) == "-3"

    def test_fmt_floats_twelve_digits(self):
        assert jsonio.fmt(0.25) == "0.25"
        assert jsonio.fmt(1.0 / 3.0) == "0.333333333333"
        assert jsonio.fmt(1.23456789012345e-7) == "1.23456789012e-07"

    def test_fmt_negative_zero(self):
        assert jsonio.fmt(-0.0) == "0"

    def test_fmt_string_passthrough(self):
        assert jsonio.fmt("label") == "label"

    def test_write_csv_bytes(self, tmp_path):
        path = tmp_path / "out.csv"
        jsonio.write_csv(str(path), ("a", "b"), [(1, 0.5), (True, "x")])
        assert path.read_bytes() == b"a,b\n1,0.5\n1,x\n"

    def test_to_jsonable_complex_pairs(self):
        assert jsonio.to_jsonable(1.0 + 2.0j) == [1.0, 2.0]
        out = jsonio.to_jsonable(np.array([1.0 + 0j, 0.5j]))
        assert out == [[1.0, 0.0], [0.0, 0.5]]

    def test_to_jsonable_numpy_scalars(self):
        assert jsonio.to_jsonable(np.float64(0.5)) == 0.5
        assert isinstance(jsonio.to_jsonable(np.float64(0.5)), float)
        assert jsonio.to_jsonable(np.int32(4)) == 4
        assert jsonio.to_jsonable(np.bool_(True)) is True

    def test_to_jsonable_namedtuple_and_nan(self):
        import collections
        point = collections.namedtuple("point", "a b")(1, 2.5)
        assert jsonio.to_jsonable(point) == {"a": 1, "b": 2.5}
        assert jsonio.to_jsonable(float("nan")) == "nan"

    def test_dump_json_sorted_keys(self, tmp_path):
        path = tmp_path / "out.json"
        jsonio.dump_json(str(path), {"b": 1, "a": 2})
        assert path.read_text() == '{\n  "a": 2,\n  "b": 1\n}\n'


class TestLoadDocument:
    def test_missing_file(self, tmp_path):
        with pytest.raises(jsonio.InputError, match="file not found"):
            jsonio.load_document(str(tmp_path / "absent.json"))

    def test_malformed_json_has_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"kind": "ensemble",\n  "x_size": }\n')
        with pytest.raises(jsonio.InputError, match="line 2 column"):
            jsonio.load_document(str(path))

    def test_top_level_must_be_object(self, tmp_path):
        path = tmp_path / "arr.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(jsonio.InputError, match="top level"):
            jsonio.load_document(str(path))

    def test_missing_kind(self, tmp_path):
        path = write_doc(tmp_path, {"x_size": 2})
        with pytest.raises(jsonio.InputError, match="missing string field 'kind'"):
            jsonio.load_document(path)

    def test_unknown_kind_lists_expected(self, tmp_path):
        path = write_doc(tmp_path, {"kind": "mystery"})
        with pytest.raises(jsonio.InputError) as err:
            jsonio.load_document(path)
        assert "unknown kind 'mystery'" in str(err.value)
        assert "classical-tree" in str(err.value)


class TestParsing:
    def test_complex_array_roundtrip(self):
        arr = jsonio.parse_complex_array(
            [[[1.0, 0.0], [0.0, -1.0]]], "t", shape=(1, 2))
        assert np.allclose(arr, [[1.0, -1.0j]])

    def test_complex_array_needs_pairs(self):
        with pytest.raises(jsonio.InputError, match=r"\[re, im\] pairs"):
            jsonio.parse_complex_array([[1.0, 0.0, 0.0]], "t")

    def test_complex_array_ragged(self):
        with pytest.raises(jsonio.InputError, match="number pairs"):
            jsonio.parse_complex_array([[1.0, [0.0, 0.0]]], "t")

    def test_complex_array_shape_mismatch(self):
        with pytest.raises(jsonio.InputError, match="expected shape"):
            jsonio.parse_complex_array([[1.0, 0.0]], "t", shape=(2,))

    def test_real_array_shape(self):
        arr = jsonio.parse_real_array([[1, 2], [3, 4]], "t", shape=(2, 2))
        assert arr.dtype == float
        with pytest.raises(jsonio.InputError, match="expected shape"):
            jsonio.parse_real_array([[1, 2]], "t", shape=(2, 2))

    def test_distribution_missing_labels_are_zero(self):
        dist = jsonio.parse_distribution({"2": 1.0}, "t", 4)
        assert np.allclose(dist.probs, [0, 0, 1, 0])

    def test_distribution_rejects_bad_labels(self):
        with pytest.raises(jsonio.InputError, match="base-10"):
            jsonio.parse_distribution({"x1": 1.0}, "t", 2)
        with pytest.raises(jsonio.InputError, match=r"outside \[0, 2\)"):
            jsonio.parse_distribution({"5": 1.0}, "t", 2)

    def test_distribution_normalization_diagnostic(self):
        with pytest.raises(jsonio.InputError,
                           match=r"sum to 1\.2, not 1 \(normalization\)"):
            jsonio.parse_distribution({"0": 0.7, "1": 0.5}, "t", 2)

    def test_prior_uniform(self):
        mu = jsonio.parse_prior("uniform", "t", 2, 4)
        assert np.allclose(mu.table, np.full((2, 4), 1 / 8))

    def test_prior_product(self):
        mu = jsonio.parse_prior({"x": {"0": 1.0}, "y": {"1": 1.0}}, "t", 2, 2)
        assert np.allclose(mu.table, [[0, 1], [0, 0]])

    def test_prior_table(self):
        mu = jsonio.parse_prior({"table": {"0,0": 0.5, "1,1": 0.5}}, "t", 2, 2)
        assert np.allclose(mu.table, [[0.5, 0], [0, 0.5]])

    def test_prior_table_rejects_bad_entries(self):
        with pytest.raises(jsonio.InputError, match="not 'x,y'"):
            jsonio.parse_prior({"table": {"0": 1.0}}, "t", 2, 2)
        with pytest.raises(jsonio.InputError, match="out of range"):
            jsonio.parse_prior({"table": {"0,9": 1.0}}, "t", 2, 2)
        with pytest.raises(jsonio.InputError, match="normalization"):
            jsonio.parse_prior({"table": {"0,0": 0.9}}, "t", 2, 2)

    def test_prior_needs_known_form(self):
        with pytest.raises(jsonio.InputError, match="'table' or both"):
            jsonio.parse_prior({"z": 1}, "t", 2, 2)

    def test_relation_named_shapes(self):
        assert jsonio.parse_relation(
            {"name": "equality", "n_bits": 2}, "t").accept.shape == (4, 4, 2)
        assert jsonio.parse_relation(
            {"name": "index", "db_bits": 2}, "t").accept.shape == (4, 2, 2)
        assert jsonio.parse_relation(
            {"name": "copy-y", "x_size": 3, "y_size": 2}, "t"
        ).accept.shape == (3, 2, 2)

    def test_relation_accept_table(self):
        rel = jsonio.parse_relation(
            {"accept": [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]}, "t")
        assert rel.accept.dtype == bool
        assert rel.accept[0, 0, 0]

    def test_relation_unknown_name(self):
        with pytest.raises(jsonio.InputError, match="unknown relation name"):
            jsonio.parse_relation({"name": "majority"}, "t")


class TestValidateCommand:
    @pytest.mark.parametrize("filename", sorted(SAMPLE_BY_EXPERIMENT.values()))
    def test_samples_validate_clean(self, filename, capsys):
        assert run_cli("validate", sample_path(filename)) == 0
        assert capsys.readouterr().out == "ok\n"

    def test_povm_completeness_diagnostic(self, tmp_path, capsys):
        doc = load_sample("compress_quantum.json")
        doc["povms"][0][0][0][0] = [0.9, 0.0]
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        out = capsys.readouterr().out
        assert "povms[0]" in out
        assert "POVM elements do not sum to the identity" in out
        assert "deviation 0.1" in out

    def test_kernel_row_diagnostic(self, tmp_path, capsys):
        doc = load_sample("compress_classical.json")
        doc["kernels"][0][0][0] = [0.98, 0.0]
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        out = capsys.readouterr().out
        assert "kernels[0]" in out
        assert "kernel row (input 0, prefix 0) sums to 0.98" in out

    def test_complex_pair_diagnostic(self, tmp_path, capsys):
        doc = {"kind": "quantum-oneway", "dim_work": 1, "dim_msg": 2,
               "states": [[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]]}
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        assert "[re, im] pairs" in capsys.readouterr().out

    def test_prior_normalization_diagnostic(self, tmp_path, capsys):
        doc = load_sample("corrector_audit.json")
        doc["prior"] = {"0": 0.7, "1": 0.5}
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        assert "sum to 1.2, not 1 (normalization)" in capsys.readouterr().out

    def test_state_norm_diagnostic(self, tmp_path, capsys):
        doc = load_sample("corrector_audit.json")
        doc["states"][0] = [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        out = capsys.readouterr().out
        assert "states[0]" in out and "unit vector" in out

    def test_unknown_builder_diagnostic(self, tmp_path, capsys):
        doc = load_sample("compress_multiround.json")
        doc["protocol"] = {"builder": "telepathy"}
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        out = capsys.readouterr().out
        assert "unknown builder 'telepathy'" in out
        assert "parity" in out

    def test_even_round_cut_diagnostic(self, tmp_path, capsys):
        doc = load_sample("compress_multiround.json")
        doc["t_prime"] = 2
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        assert "odd round count" in capsys.readouterr().out

    def test_partition_dim_diagnostic(self, tmp_path, capsys):
        doc = load_sample("eq_entangled.json")
        doc["dim"] = 24
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        assert "divisible by 16" in capsys.readouterr().out

    def test_direct_sum_size_limit(self, tmp_path, capsys):
        doc = {"kind": "direct-sum",
               "relation": {"name": "equality", "n_bits": 3},
               "epsilon": 0.125, "copies": 2}
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        assert "exhaustive-search input limit" in capsys.readouterr().out

    def test_direct_sum_epsilon_range(self, tmp_path, capsys):
        doc = load_sample("direct_sum.json")
        doc["epsilon"] = 0.5
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        assert "[0, 0.5)" in capsys.readouterr().out

    def test_ersp_x_range_diagnostic(self, tmp_path, capsys):
        doc = load_sample("ersp.json")
        doc["x"] = 5
        assert run_cli("validate", write_doc(tmp_path, doc)) == 1
        assert "outside [0, 1)" in capsys.readouterr().out

    def test_ersp_uniform_sigma_validates(self, tmp_path, capsys):
        doc = load_sample("ersp.json")
        doc["sigma"] = "uniform"
        assert run_cli("validate", write_doc(tmp_path, doc)) == 0
        assert capsys.readouterr().out == "ok\n"

    def test_unknown_kind_goes_to_stderr(self, tmp_path, capsys):
        path = write_doc(tmp_path, {"kind": "mystery"})
        assert run_cli("validate", path) == 1
        captured = capsys.readouterr()
        assert captured.out == ""
        assert captured.err.startswith("error:")
        assert "unknown kind 'mystery'" in captured.err


class TestRunErrors:
    def test_missing_input(self, tmp_path, capsys):
        rc = run_cli("run", "--experiment", "ersp",
                     "--input", tmp_path / "absent.json",
                     "--seed", 0, "--trials", 1, "--out", tmp_path)
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error:") and "file not found" in err

    def test_malformed_input(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{nope}")
        rc = run_cli("run", "--experiment", "ersp", "--input", path,
                     "--seed", 0, "--trials", 1, "--out", tmp_path)
        assert rc == 1
        assert "invalid JSON at line" in capsys.readouterr().err

    def test_kind_mismatch(self, tmp_path, capsys):
        rc = run_cli("run", "--experiment", "ersp",
                     "--input", sample_path("compress_classical.json"),
                     "--seed", 0, "--trials", 1, "--out", tmp_path)
        assert rc == 1
        err = capsys.readouterr().err
        assert "needs kind 'ersp-instance'" in err
        assert "'classical-tree'" in err

    def test_negative_seed(self, tmp_path, capsys):
        rc = run_sample("ersp", tmp_path, -1, 10)
        assert rc == 1
        assert "seed must be non-negative" in capsys.readouterr().err

    def test_zero_trials(self, tmp_path, capsys):
        rc = run_sample("ersp", tmp_path, 0, 0)
        assert rc == 1
        assert "trials must be >= 1" in capsys.readouterr().err

    def test_zero_threads(self, tmp_path, capsys):
        rc = run_sample("ersp", tmp_path, 0, 10, "--threads", 0)
        assert rc == 1
        assert "threads must be >= 1" in capsys.readouterr().err

    def test_unknown_experiment_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli("run", "--experiment", "bogus", "--input", "x.json",
                    "--seed", 0, "--trials", 1)
        assert err.value.code == 2

    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            run_cli()
        assert err.value.code == 2


class TestRunExperiments:
    def test_corrector_audit(self, tmp_path, capsys):
        assert run_sample("corrector-audit", tmp_path, 0, 1) == 0
        assert "pass=yes" in capsys.readouterr().out
        rep = report_dict(tmp_path, "corrector-audit")
        assert float(rep["alpha"]) == 1.0
        assert float(rep["expected_distance"]) <= 1e-12
        assert float(rep["success_deviation"]) <= 1e-9
        assert rep["pass"] == "1"
        summary = read_summary(tmp_path, "corrector-audit")
        assert summary["config"]["experiment"] == "corrector-audit"
        assert summary["config"]["seed"] == 0
        assert "threads" not in summary["config"]
        assert summary["metrics"]["pass"] is True

    def test_corrector_audit_delta_override(self, tmp_path):
        assert run_sample("corrector-audit", tmp_path, 0, 1,
                          "--delta", 0.5) == 0
        rep = report_dict(tmp_path, "corrector-audit")
        assert rep["delta"] == "0.5"
        assert read_summary(tmp_path, "corrector-audit")["config"]["delta"] == 0.5

    def test_ersp(self, tmp_path):
        trials = 2000
        assert run_sample("ersp", tmp_path, 7, trials) == 0
        rep = report_dict(tmp_path, "ersp")
        assert float(rep["success_prob"]) == pytest.approx(0.5, abs=1e-12)
        assert float(rep["expected_index_exact"]) == pytest.approx(2.0)
        assert float(rep["fidelity"]) >= 1.0 - 1e-9
        assert rep["abort_count"] == "0"
        sigma3 = float(rep["mean_index_3sigma"])
        assert abs(float(rep["mean_index_mc"]) - 2.0) <= sigma3
        assert float(rep["mean_bits_mc"]) <= float(rep["bits_bound"])
        lines = read_lines(tmp_path, "ersp_trials.csv")
        assert lines[0] == "trial,x,index,bits,success,fidelity"
        assert len(lines) == trials + 1
        assert lines[1].split(",")[4] == "1"

    def test_compress_classical(self, tmp_path):
        assert run_sample("compress-classical", tmp_path, 3, 2000) == 0
        rep = report_dict(tmp_path, "compress-classical")
        assert float(rep["base_error_exact"]) == 0.0
        law = float(rep["law_error"])
        assert law <= float(rep["delta_tilde"]) + 1e-9
        assert abs(float(rep["mc_error"]) - law) <= 0.05
        assert abs(float(rep["abort_rate_mc"])
                   - float(rep["abort_rate_law"])) <= 0.05

    def test_compress_quantum(self, tmp_path):
        assert run_sample("compress-quantum", tmp_path, 5, 4000) == 0
        rep = report_dict(tmp_path, "compress-quantum")
        assert rep["base_error_exact"] == "0.25"
        assert rep["alpha"] == "0.5"
        assert rep["copies"] == "7"
        assert rep["message_bits"] == "3"
        assert float(rep["abort_prob_law"]) == pytest.approx(0.5 ** 7)
        law = float(rep["law_error"])
        assert law <= 0.25 + float(rep["delta"]) + 1e-9
        assert abs(float(rep["mc_error"]) - law) <= 0.05

    def test_compress_multiround(self, tmp_path):
        assert run_sample("compress-multiround", tmp_path, 2, 64) == 0
        rep = report_dict(tmp_path, "compress-multiround")
        assert rep["base_error_exact"] == "0"
        assert rep["mc_error"] == "0"
        assert rep["alpha"] == "0.5"
        assert rep["beta"] == "1"
        assert rep["repetitions"] == "47"
        assert rep["count_cap"] == "47"
        assert rep["word_bits"] == "6"
        assert float(rep["ratio_deviation"]) <= 1e-9
        assert float(rep["ratio_deviation"]) <= float(rep["ratio_budget"])
        assert float(rep["expected_bits_law"]) == pytest.approx(147.0)
        assert float(rep["good_pair_fidelity"]) >= 1.0 - 1e-9

    def test_privacy(self, tmp_path):
        assert run_sample("privacy", tmp_path, 0, 1) == 0
        lines = read_lines(tmp_path, "privacy_report.csv")
        assert lines[0] == "series,label,value"
        rows = {}
        for line in lines[1:]:
            series, label, value = line.split(",")
            rows[(series, label)] = float(value)
        assert rows[("round-privacy", "1")] == pytest.approx(2.0, abs=1e-9)
        assert rows[("round-privacy", "2")] == pytest.approx(
            1.5487949406953985, abs=1e-9)
        assert rows[("round-privacy", "3")] == pytest.approx(2.0, abs=1e-9)
        assert rows[("index-tradeoff", "alice_leak_bits")] == 4.0
        assert rows[("index-tradeoff", "bob_leak_bits")] == 1.0
        assert rows[("index-tradeoff", "correctness")] == 1.0
        summary = read_summary(tmp_path, "privacy")
        assert len(summary["series"]) == len(lines) - 1

    def test_eq_entangled(self, tmp_path):
        assert run_sample("eq-entangled", tmp_path, 0, 1) == 0
        summary = read_summary(tmp_path, "eq-entangled")
        part = summary["partition"]
        assert part["dim"] == 32 and part["x_size"] == 8
        assert part["unit_trace_dev"] <= 1e-10
        assert part["orthogonality_dev"] <= 1e-10
        assert part["completeness_dev"] <= 1e-10
        assert part["cross_overlap_max"] < 0.25
        assert part["cross_overlap_mean"] == pytest.approx(1 / 16, abs=1e-12)
        assert part["cross_overlap_below_quarter"] is True
        eq = summary["equality"]
        assert eq["message_bits"] == 4
        assert eq["equal_accept_dev"] <= 1e-9
        assert eq["unequal_accept_max"] < 0.25
        assert eq["fraction_above_quarter"] == 0.0
        trunc = {t["rank_bound"]: t for t in summary["truncation"]}
        assert set(trunc) == {32, 16, 1}
        assert trunc[32]["shift_max"] <= 1e-9
        assert trunc[32]["below_threshold"] is False
        assert trunc[16]["below_threshold"] is True
        assert trunc[1]["equal_min"] < 0.25
        intrusion = summary["intrusion"]
        assert intrusion["rank_w"] == 1 and intrusion["samples"] == 20
        assert intrusion["threshold"] == 0.5625
        assert intrusion["worst_fraction"] <= intrusion["bound"] == 0.25
        assert intrusion["label"] == "statistical evidence"
        lines = read_lines(tmp_path, "eq-entangled_acceptance.csv")
        assert lines[0] == "x,x_prime,rank_bound,accept"
        assert len(lines) == 1 + 64 * 4

    def test_direct_sum_single_bit(self, tmp_path):
        doc = {"kind": "direct-sum",
               "relation": {"name": "equality", "n_bits": 1},
               "epsilon": 0.125, "copies": 2, "prior": "uniform"}
        path = write_doc(tmp_path, doc)
        rc = run_cli("run", "--experiment", "direct-sum", "--input", path,
                     "--seed", 1, "--trials", 1, "--out", tmp_path)
        assert rc == 0
        rep = report_dict(tmp_path, "direct-sum")
        assert rep["single_messages"] == "2"
        assert rep["single_bits"] == "1"
        assert rep["single_error"] == "0"
        assert rep["combined_messages"] == "4"
        assert rep["combined_bits"] == "2"
        assert rep["combined_error"] == "0"
        assert rep["message_ratio"] == "2"
        assert rep["naive_messages"] == "4"

    def test_direct_sum_two_bit_sample(self, tmp_path):
        # exhaustive search over both copy counts; the slowest sample (~20 s)
        assert run_sample("direct-sum", tmp_path, 1, 1) == 0
        rep = report_dict(tmp_path, "direct-sum")
        assert rep["single_messages"] == "3"
        assert rep["single_bits"] == "2"
        assert rep["single_error"] == "0.125"
        assert rep["combined_messages"] == "10"
        assert rep["combined_bits"] == "4"
        assert rep["combined_error"] == "0.125"
        assert rep["naive_messages"] == "9"
        assert float(rep["message_ratio"]) == pytest.approx(10 / 3)


class TestDeterminism:
    def artifact_bytes(self, out_dir):
        blobs = {}
        for name in sorted(os.listdir(str(out_dir))):
            with open(os.path.join(str(out_dir), name), "rb") as fh:
                blobs[name] = fh.read()
        return blobs

    def test_ersp_rerun_and_threads_byte_identical(self, tmp_path):
        outs = [tmp_path / f"o{i}" for i in range(3)]
        assert run_sample("ersp", outs[0], 7, 300) == 0
        assert run_sample("ersp", outs[1], 7, 300) == 0
        assert run_sample("ersp", outs[2], 7, 300, "--threads", 8) == 0
        first = self.artifact_bytes(outs[0])
        assert set(first) == {"ersp_report.csv", "ersp_summary.json",
                              "ersp_trials.csv"}
        assert self.artifact_bytes(outs[1]) == first
        assert self.artifact_bytes(outs[2]) == first

    def test_compress_classical_rerun_byte_identical(self, tmp_path):
        outs = [tmp_path / f"o{i}" for i in range(2)]
        assert run_sample("compress-classical", outs[0], 3, 300) == 0
        assert run_sample("compress-classical", outs[1], 3, 300) == 0
        assert self.artifact_bytes(outs[0]) == self.artifact_bytes(outs[1])

    def test_seed_changes_monte_carlo(self, tmp_path):
        outs = [tmp_path / f"o{i}" for i in range(2)]
        assert run_sample("ersp", outs[0], 7, 300) == 0
        assert run_sample("ersp", outs[1], 8, 300) == 0
        first = read_lines(outs[0], "ersp_trials.csv")
        second = read_lines(outs[1], "ersp_trials.csv")
        assert first != second
