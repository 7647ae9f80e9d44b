"""Command-line interface: formats, determinism, exit codes, round trips."""

import json

import pytest

from nfkit.cli import load_problem, main
from nfkit.brunovf import BrunoField, tm_add
from nfkit.errors import ProblemSpecError


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


BASE = {
    "field": "Q",
    "n": 2,
    "order": 6,
    "lambda": ["1", "3"],
    "terms": [["1", [2, 0], 2]],
}


class TestParsing:
    def test_round_trip_normal_form(self, tmp_path, capsys):
        path = write(tmp_path, "p.json", BASE)
        code, out, _ = run_cli(capsys, ["normalize", path, "--mode", "blockwise"])
        assert code == 0
        rep = json.loads(out)
        nf = rep["results"]["normal_form"]
        doc2 = {"field": "Q", "n": 2, "order": nf["order"],
                "lambda": nf["lambda"], "terms": nf["terms"]}
        path2 = write(tmp_path, "p2.json", doc2)
        prob2 = load_problem(path2)
        prob1 = load_problem(path)
        from nfkit.normalize import normalize
        G = normalize(prob1.main, mode="blockwise").normal_form
        assert prob2.main == G

    def test_scalar_literals(self, tmp_path):
        doc = dict(BASE, field="Q(i)",
                   **{"lambda": [["0", "1"], ["0", "-1"]], "terms": []})
        prob = load_problem(write(tmp_path, "g.json", doc))
        assert prob.main.lam[0] == prob.field.gen

    def test_number_field_descriptor(self, tmp_path):
        doc = {"field": {"minpoly": ["-2", "0", "1"], "root": [1.4142, 0.0]},
               "n": 2, "order": 5, "lambda": ["1", ["0", "1"]]}
        prob = load_problem(write(tmp_path, "nf.json", doc))
        assert prob.field.m == 2

    def test_position_annotated_error(self, tmp_path):
        doc = dict(BASE, terms=[["1", [2, 0], 7]])
        with pytest.raises(ProblemSpecError):
            load_problem(write(tmp_path, "bad.json", doc))


class TestCommands:
    def test_normalize_removes_term(self, tmp_path, capsys):
        path = write(tmp_path, "p.json", BASE)
        code, out, _ = run_cli(capsys, ["normalize", path])
        rep = json.loads(out)
        assert code == 0
        assert rep["results"]["verified"] is True
        assert rep["results"]["normal_form"]["terms"] == []
        assert {"degree": [2, -1], "coeff": ["0", "-1"]} in rep["results"]["transform"]["terms"]

    def test_distinguished_support_reported(self, tmp_path, capsys):
        doc = dict(BASE, **{"lambda": ["1", "2"],
                            "terms": [["1", [0, 2], 1], ["1", [2, 0], 2]]})
        path = write(tmp_path, "p.json", doc)
        code, out, _ = run_cli(capsys, ["normalize", path, "--mode", "distinguished"])
        rep = json.loads(out)
        assert code == 0
        h_support = {tuple(t["degree"]) for t in rep["results"]["transform"]["terms"]}
        assert (2, -1) not in h_support  # the resonant degree stays out

    def test_check_omega_integer_pair(self, tmp_path, capsys):
        doc = {"field": "Q", "n": 2, "order": 4, "lambda": ["1", "-1"]}
        path = write(tmp_path, "w.json", doc)
        code, out, _ = run_cli(capsys, ["check", path, "--omega", "3"])
        rep = json.loads(out)
        assert code == 0
        entries = rep["results"]["omega"]["entries"]
        assert [e["lower"] for e in entries] == ["1", "1", "1"]
        assert rep["results"]["omega"]["partial_sum_upper"] == "0"

    def test_check_siegel(self, tmp_path, capsys):
        doc = {"field": {"minpoly": ["-2", "0", "1"], "root": [1.4142, 0.0]},
               "n": 2, "order": 4, "lambda": ["1", ["0", "1"]]}
        path = write(tmp_path, "s.json", doc)
        code, out, _ = run_cli(capsys, ["check", path, "--siegel", "--scan-bound", "16"])
        rep = json.loads(out)
        assert code == 0
        assert rep["results"]["siegel_pliss"]["nu"] == 1

    def test_check_hull_violation(self, tmp_path, capsys):
        doc = {"field": {"minpoly": ["-2", "0", "1"], "root": [1.4142, 0.0]},
               "n": 4, "order": 4,
               "lambda": ["1", "-1", ["0", "1"], ["0", "-1"]],
               "decomposition": {
                   "vectors": [["1", "-1", "0", "0"],
                               ["0", "0", ["0", "1"], ["0", "-1"]]],
                   "gammas": ["1", "1"]}}
        path = write(tmp_path, "h.json", doc)
        code, out, _ = run_cli(capsys, ["check", path, "--hull", "50",
                                        "--scan-bound", "30"])
        rep = json.loads(out)
        assert code == 0
        assert rep["results"]["hull"]["status"] == "violated"
        assert rep["results"]["hull"]["witness"]

    def test_integrals(self, tmp_path, capsys):
        doc = {"field": "Q", "n": 2, "order": 6, "lambda": ["1", "-1"],
               "terms": [["1", [2, 1], 1], ["-1", [1, 2], 2]]}
        path = write(tmp_path, "i.json", doc)
        code, out, _ = run_cli(capsys, ["integrals", path])
        rep = json.loads(out)
        assert code == 0
        assert rep["results"]["lattice_basis"] == [[1, 1]]
        assert rep["results"]["integrals"][0]["is_integral"] is True

    def test_commuting(self, tmp_path, capsys):
        doc = {"field": "Q", "n": 3, "order": 6,
               "family": [
                   {"lambda": ["1", "-1", "0"],
                    "terms": [["2", [2, 1, 1], 1], ["-4", [1, 2, 1], 2], ["2", [1, 1, 2], 3]]},
                   {"lambda": ["0", "1", "-1"], "terms": []},
               ]}
        path = write(tmp_path, "c.json", doc)
        code, out, _ = run_cli(capsys, ["commuting", path])
        rep = json.loads(out)
        assert code == 0
        assert rep["results"]["commutes"] is True
        assert rep["results"]["verified"] is True


class TestContract:
    def test_exit_code_parse_error(self, tmp_path, capsys):
        p = tmp_path / "junk.json"
        p.write_text("{ not json")
        code, out, err = run_cli(capsys, ["normalize", str(p)])
        assert code == 2
        assert "problem error" in err and out == ""

    def test_exit_code_engine_error(self, tmp_path, capsys):
        # a valid file whose analysis hits an engine error: omega with no
        # nonresonant exponent at all (zero eigenvalues)
        doc = {"field": "Q", "n": 2, "order": 4, "lambda": ["0", "0"]}
        path = write(tmp_path, "z.json", doc)
        code, out, err = run_cli(capsys, ["check", path, "--omega", "2"])
        assert code == 1
        assert err

    def test_determinism_across_runs(self, tmp_path, capsys):
        doc = dict(BASE, **{"lambda": ["1", "2"],
                            "terms": [["1", [0, 2], 1], ["1", [2, 0], 2],
                                      ["1/2", [1, 2], 1]]})
        path = write(tmp_path, "d.json", doc)
        outs = []
        for _ in range(3):
            code, out, _ = run_cli(capsys, ["normalize", path, "--mode", "termwise"])
            assert code == 0
            rep = json.loads(out)
            rep.pop("timings")
            outs.append(json.dumps(rep, sort_keys=False))
        assert outs[0] == outs[1] == outs[2]

    def test_compact_json_flag(self, tmp_path, capsys):
        path = write(tmp_path, "p.json", BASE)
        code, out, _ = run_cli(capsys, ["normalize", path, "--json"])
        assert code == 0
        assert "\n" not in out.strip()
