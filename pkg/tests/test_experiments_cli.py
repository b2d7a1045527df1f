import hashlib
import json
import math

import numpy as np
import pytest

from nlsoptics.experiments_cli import REPORT_SCHEMA, SCENARIO_SCHEMA, run


def write_scenario(tmp_path, doc, name="scn.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def torus_doc(**extra):
    doc = {
        "schema": SCENARIO_SCHEMA,
        "dimension": 1,
        "sigma": 1,
        "lambda": 1.0,
        "domain": {"type": "torus"},
        "initial_modes": [
            {"kappa": [0], "amplitude": [0.7, 0.0]},
            {"kappa": [1], "amplitude": [0.4, 0.1]},
        ],
    }
    doc.update(extra)
    return doc


def load_report(tmp_path, name):
    with open(tmp_path / "out" / name) as fh:
        return json.load(fh)


class TestClosureCommand:
    def test_square_creates_zero_mode(self, tmp_path, capsys):
        doc = {
            "schema": SCENARIO_SCHEMA,
            "dimension": 2,
            "sigma": 1,
            "domain": {"type": "torus"},
            "initial_modes": [
                {"kappa": [0, 1], "amplitude": [0.2, 0.0]},
                {"kappa": [1, 0], "amplitude": [0.3, 0.0]},
                {"kappa": [1, 1], "amplitude": [0.1, 0.0]},
            ],
            "experiment": {"type": "closure"},
        }
        scn = write_scenario(tmp_path, doc)
        rc = run(["closure", "--scenario", scn, "--out", str(tmp_path / "out")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "1 created" in out and "saturated" in out
        rep = load_report(tmp_path, "closure_report.json")
        assert rep["schema"] == REPORT_SCHEMA
        assert rep["command"] == "closure"
        assert [0, 0] in rep["results"]["vectors"]
        assert rep["results"]["saturated"] is True
        assert rep["results"]["created_count"] == 1
        assert (tmp_path / "out" / "modes.csv").exists()
        assert (tmp_path / "out" / "edges.csv").exists()

    def test_already_closed_set(self, tmp_path, capsys):
        doc = torus_doc(
            sigma=3,
            initial_modes=[
                {"kappa": [0], "amplitude": [0.5, 0.0]},
                {"kappa": [2], "amplitude": [0.5, 0.0]},
            ],
            experiment={"type": "closure"},
        )
        scn = write_scenario(tmp_path, doc)
        rc = run(["closure", "--scenario", scn, "--out", str(tmp_path / "out")])
        assert rc == 0
        assert "saturated, no new vectors" in capsys.readouterr().out


class TestProfilesCommand:
    def test_torus_oracle_deviation(self, tmp_path, capsys):
        doc = torus_doc(
            initial_modes=[
                {"kappa": [-1], "amplitude": [0.5, 0.0]},
                {"kappa": [0], "amplitude": [1.0, 0.0]},
                {"kappa": [1], "amplitude": [0.5, 0.5]},
            ],
            experiment={"type": "profiles", "t_final": 0.2, "dt": 1e-3},
        )
        scn = write_scenario(tmp_path, doc)
        rc = run(
            [
                "profiles", "--scenario", scn, "--out", str(tmp_path / "out"),
                "--oracle", "explicit_torus_1d",
            ]
        )
        assert rc == 0
        rep = load_report(tmp_path, "profiles_report.json")
        assert rep["results"]["oracle"] == "explicit_torus_1d"
        assert rep["results"]["oracle_max_deviation"] < 1e-8
        assert rep["results"]["mass_relative_drift"] < 1e-10
        header = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()[0]
        assert header.split(",")[:3] == ["t", "re_j0", "im_j0"]
        assert "max deviation" in capsys.readouterr().out

    def test_two_mode_oracle_any_sigma(self, tmp_path):
        doc = torus_doc(
            sigma=2,
            initial_modes=[
                {"kappa": [0], "amplitude": [0.8, 0.0]},
                {"kappa": [2], "amplitude": [0.0, 0.5]},
            ],
            experiment={
                "type": "profiles", "t_final": 0.3, "dt": 1e-3,
                "oracle": "explicit_two_mode",
            },
        )
        scn = write_scenario(tmp_path, doc)
        rc = run(["profiles", "--scenario", scn, "--out", str(tmp_path / "out")])
        assert rc == 0
        rep = load_report(tmp_path, "profiles_report.json")
        assert rep["results"]["oracle_max_deviation"] < 1e-8

    def test_euclid_gaussians(self, tmp_path):
        doc = {
            "schema": SCENARIO_SCHEMA,
            "dimension": 1,
            "sigma": 1,
            "lambda": 1.0,
            "domain": {"type": "euclid", "length": 40.0, "grid_n": 256},
            "initial_modes": [
                {
                    "kappa": [-1],
                    "preset": {
                        "type": "gaussian", "center": 17.0, "width": 1.5,
                        "amplitude": [0.9, 0.0],
                    },
                },
                {
                    "kappa": [1],
                    "preset": {
                        "type": "gaussian", "center": 23.0, "width": 2.0,
                        "amplitude": [0.0, 0.7],
                    },
                },
            ],
            "experiment": {
                "type": "profiles", "t_final": 0.2, "dt": 1e-3,
                "quadrature_dt": 1e-3, "oracle": "explicit_euclid_1d",
            },
        }
        scn = write_scenario(tmp_path, doc)
        rc = run(["profiles", "--scenario", scn, "--out", str(tmp_path / "out")])
        assert rc == 0
        rep = load_report(tmp_path, "profiles_report.json")
        assert rep["results"]["oracle_max_deviation"] < 1e-6
        fields = np.load(tmp_path / "out" / "fields_final.npy")
        assert fields.shape == (2, 256)
        assert (tmp_path / "out" / "mass.csv").exists()


class TestConvergeCommand:
    def _doc(self, lam):
        return torus_doc(
            **{"lambda": lam},
            solver={"dt": None, "grid_n": None, "eps_list": ["1/2", "1/4"]},
            experiment={
                "type": "converge", "t_final": 0.1,
                "checkpoints": 1, "dt_self_check": False,
            },
        )

    def test_sweep_report_and_csv(self, tmp_path, capsys):
        scn = write_scenario(tmp_path, self._doc(1.0))
        rc = run(["converge", "--scenario", scn, "--out", str(tmp_path / "out")])
        assert rc == 0
        rep = load_report(tmp_path, "converge_report.json")
        rows = rep["results"]["rows"]
        assert [r["eps"] for r in rows] == [0.5, 0.25]
        assert all(r["status"] == "ok" for r in rows)
        assert rep["results"]["order_sup"] is not None
        lines = (tmp_path / "out" / "convergence.csv").read_text().splitlines()
        assert lines[0].startswith("eps,grid_n,dt,sup_error")
        assert len(lines) == 3
        assert "fitted order" in capsys.readouterr().out

    def test_floor_passes_any_order_assertion(self, tmp_path):
        scn = write_scenario(tmp_path, self._doc(0.0))
        rc = run(
            [
                "converge", "--scenario", scn, "--out", str(tmp_path / "out"),
                "--assert-order", "0.9",
            ]
        )
        assert rc == 0
        rep = load_report(tmp_path, "converge_report.json")
        assert rep["results"]["at_floor"] is True
        assert rep["results"]["order_sup"] is None

    def test_unmet_order_assertion_exits_one(self, tmp_path, capsys):
        scn = write_scenario(tmp_path, self._doc(1.0))
        rc = run(
            [
                "converge", "--scenario", scn, "--out", str(tmp_path / "out"),
                "--assert-order", "5.0",
            ]
        )
        assert rc == 1
        assert "order assertion failed" in capsys.readouterr().err

    def test_determinism_modulo_runtimes(self, tmp_path):
        scn = write_scenario(tmp_path, self._doc(1.0))
        assert run(["converge", "--scenario", scn, "--out", str(tmp_path / "a")]) == 0
        assert run(["converge", "--scenario", scn, "--out", str(tmp_path / "b")]) == 0
        with open(tmp_path / "a" / "converge_report.json") as fh:
            one = json.load(fh)
        with open(tmp_path / "b" / "converge_report.json") as fh:
            two = json.load(fh)
        assert one["content_hash"] == two["content_hash"]
        one.pop("runtimes"), two.pop("runtimes")
        assert one == two

    def test_scenario_hash_matches_file(self, tmp_path):
        scn = write_scenario(tmp_path, self._doc(1.0))
        run(["converge", "--scenario", scn, "--out", str(tmp_path / "out")])
        rep = load_report(tmp_path, "converge_report.json")
        with open(scn, "rb") as fh:
            assert rep["scenario_hash"] == hashlib.sha256(fh.read()).hexdigest()


class TestInstabilityCommand:
    def test_record_and_curve(self, tmp_path, capsys):
        doc = torus_doc(
            initial_modes=[{"kappa": [0], "amplitude": [0.5, 0.0]}],
            experiment={
                "type": "instability", "rho": 1.0, "delta": 0.1, "s": -2.0,
                "K": 32, "grid_points": 500,
            },
        )
        scn = write_scenario(tmp_path, doc)
        rc = run(["instability", "--scenario", scn, "--out", str(tmp_path / "out")])
        assert rc == 0
        rep = load_report(tmp_path, "instability_report.json")
        record = rep["results"]["record"]
        assert record["variant"] == "perturb_high"
        assert record["gap"] > 0.8
        assert record["hs_condition_ok"] is True
        assert record["solver_gap"] is None
        lines = (tmp_path / "out" / "gap_curve.csv").read_text().splitlines()
        assert len(lines) == 501
        assert "gap" in capsys.readouterr().out


class TestSmalldivCommand:
    def test_survey_fit_and_probe(self, tmp_path, capsys):
        doc = {
            "schema": SCENARIO_SCHEMA,
            "dimension": 2,
            "sigma": 1,
            "domain": {"type": "torus"},
            "initial_modes": [
                {"kappa": [0, 0], "amplitude": [0.0, 0.0]},
                {"kappa": [0, 1], "amplitude": [0.0, 0.0]},
                {"kappa": [1, 0], "amplitude": [0.0, 0.0]},
                {"kappa": [1, 1], "amplitude": [0.0, 0.0]},
            ],
            "experiment": {
                "type": "smalldiv",
                "b_grid": [0.0, 1.0],
                "probe": {
                    "generators": [[1, 0], [0, "1/3"]],
                    "beta_bound": 6,
                    "b_prime": 2.0,
                },
            },
        }
        scn = write_scenario(tmp_path, doc)
        rc = run(["smalldiv", "--scenario", scn, "--out", str(tmp_path / "out")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "min |delta| = 2" in out
        assert "min nonzero |sum beta G|" in out
        assert "not generic" in out
        rep = load_report(tmp_path, "smalldiv_report.json")
        assert rep["results"]["survey"]["min_delta"] == 2
        assert rep["results"]["probe"]["exact_minimum"] == "1/9"
        fit_lines = (tmp_path / "out" / "generalized_fit.csv").read_text().splitlines()
        assert fit_lines[0] == "b,c"
        assert len(fit_lines) == 3
        b0 = float(fit_lines[1].split(",")[1])
        assert b0 == 2.0


class TestErrorPaths:
    def test_missing_file(self, tmp_path, capsys):
        rc = run(
            [
                "closure", "--scenario", str(tmp_path / "nope.json"),
                "--out", str(tmp_path / "out"),
            ]
        )
        assert rc == 2
        assert "scenario error" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{не json")
        rc = run(["closure", "--scenario", str(path), "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "invalid JSON" in capsys.readouterr().err

    def test_wrong_schema(self, tmp_path, capsys):
        scn = write_scenario(tmp_path, {"schema": "other/9"})
        rc = run(["closure", "--scenario", scn, "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "schema" in capsys.readouterr().err

    def test_bad_eps_reports_field(self, tmp_path, capsys):
        doc = torus_doc(
            solver={"eps_list": [0.3]},
            experiment={"type": "converge", "t_final": 0.1},
        )
        scn = write_scenario(tmp_path, doc)
        rc = run(["converge", "--scenario", scn, "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "solver.eps_list[0]" in capsys.readouterr().err

    def test_kappa_arity_reported(self, tmp_path, capsys):
        doc = torus_doc(dimension=2)
        scn = write_scenario(tmp_path, doc)
        rc = run(["closure", "--scenario", scn, "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "initial_modes[0].kappa" in capsys.readouterr().err

    def test_command_scenario_mismatch(self, tmp_path, capsys):
        doc = torus_doc(experiment={"type": "closure"})
        scn = write_scenario(tmp_path, doc)
        rc = run(["smalldiv", "--scenario", scn, "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "declares experiment" in capsys.readouterr().err

    def test_duplicate_kappa_rejected(self, tmp_path, capsys):
        doc = torus_doc(
            initial_modes=[
                {"kappa": [1], "amplitude": [0.1, 0.0]},
                {"kappa": [1], "amplitude": [0.2, 0.0]},
            ],
            experiment={"type": "closure"},
        )
        scn = write_scenario(tmp_path, doc)
        rc = run(["closure", "--scenario", scn, "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "duplicate" in capsys.readouterr().err

    def test_nested_out_dir_created(self, tmp_path):
        doc = torus_doc(experiment={"type": "closure"})
        scn = write_scenario(tmp_path, doc)
        out = tmp_path / "deep" / "nested" / "dir"
        rc = run(["closure", "--scenario", scn, "--out", str(out)])
        assert rc == 0
        assert (out / "closure_report.json").exists()


class TestShippedScenarios:
    def test_scenario_corpus_loads(self):
        import glob
        import os

        from nlsoptics.experiments_cli import load_scenario

        here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        paths = sorted(glob.glob(os.path.join(here, "scenarios", "*.json")))
        assert len(paths) >= 10
        for p in paths:
            scn = load_scenario(p)
            assert scn.experiment["type"] in (
                "closure", "profiles", "converge", "instability", "smalldiv"
            )
