"""End-to-end checks of the ndscope executable: exit codes, schemas, determinism."""

import json
import os
import shutil
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

BIN = Path(sys.argv[1]).resolve()
ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
SCHEMAS = ROOT / "schemas"
MODEL = str(DATA / "reference_model.json")
DIRECTIONS = str(DATA / "reference_directions.json")
PHI_I = str(DATA / "phi_i.json")
PHI_U = str(DATA / "phi_u.json")


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("NDSCOPE_SEED", None)
    if env:
        full_env.update(env)
    p = subprocess.run([str(BIN), *args], capture_output=True, text=True, env=full_env)
    try:
        report = json.loads(p.stdout)
    except json.JSONDecodeError:
        report = None
    return p.returncode, report, p


class Base(unittest.TestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp(prefix="ndscope-"))

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def ok(self, command, *args, code=0, **kw):
        rc, rep, p = run(command, *args, **kw)
        self.assertEqual(rc, code, p.stderr)
        jsonschema.validate(rep, schema(command))
        return rep

    def error(self, *args, code=2):
        rc, rep, p = run(*args)
        self.assertEqual(rc, code, p.stdout + p.stderr)
        jsonschema.validate(rep, schema("error"))
        return rep


class DataFiles(Base):
    def test_shipped_inputs_validate(self):
        jsonschema.validate(json.loads(Path(MODEL).read_text()), schema("model"))
        for path in (PHI_I, PHI_U):
            self.assertIn("scm", json.loads(Path(path).read_text()))


class Identifiability(Base):
    def test_reference_scm(self):
        rep = self.ok("check-identifiability", MODEL)
        self.assertEqual(rep["verdict"], "not_identifiable")
        self.assertEqual(rep["null_basis"], [["0"], ["0"], ["1"], ["-2"]])

    def test_other_scm_is_identifiable(self):
        rep = self.ok("check-identifiability", MODEL, "--scm", PHI_I)
        self.assertEqual(rep["verdict"], "identifiable")

    def test_strict(self):
        self.ok("check-identifiability", MODEL, "--strict", code=1)
        self.ok("check-identifiability", MODEL, "--scm", "0,1;0,0;1,0;0,0", "--strict")

    def test_variants(self):
        ke = self.tmp / "ke.json"
        ke.write_text(json.dumps({"known_entries": {"J": [], "I": {}}}))
        rep = self.ok("check-identifiability", MODEL, "--constraints", str(ke))
        self.assertEqual(rep["mode"], "known_entries")
        self.assertEqual(rep["verdict"], "not_identifiable")
        self.assertEqual([c["index"] for c in rep["columns"]], [1, 2])
        rep = self.ok("check-identifiability", MODEL, "--augmented")
        self.assertEqual(rep["verdict"], "not_identifiable")

    def test_malformed_inputs(self):
        bad = self.tmp / "bad.json"
        bad.write_text("{not json")
        self.error("check-identifiability", str(bad))
        bad.write_text(json.dumps({"subsystems": []}))
        self.error("check-identifiability", str(bad))
        self.error("check-identifiability", MODEL, "--scm", "1,2;3")
        self.error("check-identifiability", MODEL, "--scm", "1,2")
        self.error("check-identifiability", str(self.tmp / "missing.json"))
        rc, _, _ = run("check-identifiability")
        self.assertEqual(rc, 2)
        rc, _, _ = run("no-such-command")
        self.assertEqual(rc, 2)

    def test_help(self):
        rc, _, p = run("--help")
        self.assertEqual(rc, 0)
        self.assertIn("reproduce-paper", p.stdout)


class Region(Base):
    def test_members_keep_tfm(self):
        rep = self.ok("region", MODEL, "--samples", "3")
        self.assertEqual(rep["dimension"], 1)
        self.assertEqual(len(rep["samples"]), 3)
        self.assertTrue(all(s["tfm_equal"] for s in rep["samples"] if s["regular"]))

    def test_zero_samples(self):
        rep = self.ok("region", MODEL, "--samples", "0")
        self.assertEqual(rep["samples"], [])
        self.assertEqual(len(rep["basis"]), 4)

    def test_trivial(self):
        rep = self.ok("region", MODEL, "--scm", PHI_I)
        self.assertEqual(rep["message"], "region is trivial")
        self.ok("region", MODEL, "--scm", PHI_I, "--strict", code=1)


class LumpReconstruct(Base):
    def test_round_trip(self):
        out = self.tmp / "lumped.json"
        self.ok("lump", MODEL, "--scm", PHI_U, "--out", str(out))
        jsonschema.validate(json.loads(out.read_text()), schema("lumped"))
        rep = self.ok("reconstruct", MODEL, "--lumped", str(out))
        self.assertEqual(rep["recovered_scm"], [["0", "0"], ["0", "0"], ["0", "0"], ["2", "0"]])

    def test_zero_feedback_recovers_zero(self):
        out = self.tmp / "lumped.json"
        self.ok("lump", MODEL, "--scm", "0,0;0,0;0,0;0,0", "--out", str(out))
        rep = self.ok("reconstruct", MODEL, "--lumped", str(out))
        self.assertEqual(rep["recovered_scm"], [["0", "0"]] * 4)

    def test_inconsistent(self):
        out = self.tmp / "lumped.json"
        self.ok("lump", MODEL, "--out", str(out))
        lumped = json.loads(out.read_text())
        lumped["A"][0][0] = "5"
        out.write_text(json.dumps(lumped))
        rep = self.ok("reconstruct", MODEL, "--lumped", str(out))
        self.assertFalse(rep["consistency"]["consistent"])
        self.ok("reconstruct", MODEL, "--lumped", str(out), "--strict", code=1)

    def test_shape_error(self):
        out = self.tmp / "lumped.json"
        out.write_text(json.dumps({"A": [["1"]], "B": [["1"]], "C": [["1"]], "D": [["0"]]}))
        self.error("reconstruct", MODEL, "--lumped", str(out))


class Simulation(Base):
    def test_paired_runs(self):
        rep = self.ok("simulate", MODEL, "--scm-a", "0,0;0,0;1,0;0,0", "--scm-b", PHI_U,
                      "--out-dir", str(self.tmp / "u"))
        self.assertLessEqual(max(rep["max_relative_error"]), 1e-6)
        rep = self.ok("simulate", MODEL, "--scm-a", "0,0;0,0;1,0;0,0", "--scm-b", PHI_I,
                      "--out-dir", str(self.tmp / "i"))
        self.assertGreaterEqual(max(rep["max_relative_error"]), 10)
        for name in ("traces.csv", "metrics.json", "outputs.svg", "relative_error.svg"):
            self.assertTrue((self.tmp / "i" / name).is_file(), name)
        header = (self.tmp / "i" / "traces.csv").read_text().splitlines()[0]
        self.assertEqual(header, "t,u1,u2,y_a1,y_a2,y_b1,y_b2,e_1,e_2")
        jsonschema.validate(json.loads((self.tmp / "i" / "metrics.json").read_text()), schema("simulate"))

    def test_identical_scms(self):
        rep = self.ok("simulate", MODEL, "--scm-a", PHI_I, "--scm-b", PHI_I, "--samples", "200",
                      "--out-dir", str(self.tmp))
        self.assertEqual(rep["d_T"], 0)

    def test_unstable_is_rejected(self):
        self.error("simulate", MODEL, "--scm-a", "0,0;0,0;1,0;0,0", "--scm-b", "40,0;0,0;0,0;0,0",
                   "--out-dir", str(self.tmp))

    def test_seed_controls_input(self):
        def traces(seed_args, env=None):
            d = self.tmp / ("s" + str(len(list(self.tmp.iterdir()))))
            rc, _, p = run("simulate", MODEL, "--scm-a", "0,0;0,0;1,0;0,0", "--scm-b", PHI_I, "--samples", "500",
                           "--out-dir", str(d), *seed_args, env=env)
            self.assertEqual(rc, 0, p.stderr)
            return (d / "traces.csv").read_bytes()

        base = traces([])
        self.assertEqual(base, traces(["--seed", "0"]))
        self.assertEqual(traces([], {"NDSCOPE_SEED": "5"}), traces(["--seed", "5"]))
        self.assertNotEqual(base, traces(["--seed", "5"]))
        self.assertEqual(traces(["--seed", "0"], {"NDSCOPE_SEED": "5"}), base)


class Sweep(Base):
    def sweep(self, out, *extra):
        return self.ok("sweep", MODEL, "--directions", "paper", "--tau", "0:1:4", "--out-dir", str(out), *extra)

    def test_outputs_and_determinism(self):
        a = self.sweep(self.tmp / "a")
        b = self.sweep(self.tmp / "b", "--jobs", "2")
        self.assertEqual(len(a["directions"]), 4)
        csv_a = (self.tmp / "a" / "sweep.csv").read_bytes()
        self.assertEqual(csv_a, (self.tmp / "b" / "sweep.csv").read_bytes())
        self.assertEqual((self.tmp / "a" / "sweep.json").read_text().replace(str(self.tmp / "a"), ""),
                         (self.tmp / "b" / "sweep.json").read_text().replace(str(self.tmp / "b"), ""))
        lines = csv_a.decode().splitlines()
        self.assertTrue(lines[0].startswith("k,tau,d_T,d_F,d_S,s_mr,s_md,skipped"))
        for line in lines[1:]:
            cells = line.split(",")
            if cells[1] == "0":
                self.assertEqual(cells[2:5], ["0", "0", "0"])
        for name in ("dT_vs_dF.svg", "dT_margins_vs_tau.svg", "sigma_response_difference.svg"):
            self.assertTrue((self.tmp / "a" / name).is_file(), name)

    def test_directions_file_matches_builtin(self):
        self.sweep(self.tmp / "a")
        self.ok("sweep", MODEL, "--directions", DIRECTIONS, "--tau", "0:1:4", "--out-dir", str(self.tmp / "f"))
        self.assertEqual((self.tmp / "a" / "sweep.csv").read_bytes(), (self.tmp / "f" / "sweep.csv").read_bytes())

    def test_bad_grid(self):
        self.error("sweep", MODEL, "--tau", "0:0:1", "--out-dir", str(self.tmp))
        self.error("sweep", MODEL, "--tau", "zero", "--out-dir", str(self.tmp))


class Reproduce(Base):
    def test_ci_grid(self):
        rc, rep, p = run("reproduce-paper", "--tau", "0:1:20", "--out-dir", str(self.tmp))
        jsonschema.validate(rep, schema("reproduce-paper"))
        passed = {c["id"]: c["pass"] for c in rep["checks"]}
        for i in range(1, 8):
            self.assertTrue(passed[i], rep["checks"][i - 1])
        self.assertEqual(rc, 0 if all(passed.values()) else 1, p.stderr)
        self.assertEqual(rep["status"], "ok" if rc == 0 else "negative")
        self.assertTrue((self.tmp / "summary.json").is_file())
        self.assertTrue((self.tmp / "summary.txt").read_text().startswith("PASS criterion 1"))


if __name__ == "__main__":
    unittest.main(argv=[sys.argv[0], "-v"])
