"""End-to-end checks of the tailcluster binary: schema, exit codes, determinism."""

import argparse
import csv
import io
import json
import os
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema

ARGS = None


def run(*argv, env=None):
    return subprocess.run([ARGS.binary, *argv], capture_output=True, text=True, env=env)


def cfg(name):
    return str(pathlib.Path(ARGS.configs) / name)


COMMANDS = {
    "estimate": ["estimate", "--model", "ar1.cfg", "--rep", "all", "--n", "500"],
    "compare": ["compare", "--model", "moving_max.cfg", "--rep", "samorodnitsky,albin_b1,cluster_sup_ffd_theta", "--n", "500"],
    "simulate": ["simulate", "--model", "moving_max.cfg", "--n", "3", "--field", "Theta"],
    "identity-check": ["identity-check", "--model", "moving_max.cfg", "--n", "300", "--identity", "tYY", "--lag", "1"],
    "m-approx": ["m-approx", "--model", "moving_max.cfg", "--n", "300", "--m-list", "1,2,4"],
    "maxstable-check": ["maxstable-check", "--model", "moving_max.cfg", "--n", "200", "--fidi-n", "400",
                        "--points", "0;1", "--levels", "1,2"],
}


def command(name, *extra):
    argv = list(COMMANDS[name])
    argv[2] = cfg(argv[2])
    return argv + ["--seed", "11", "--out", "-", *extra]


def strip_wall_time(text):
    return "\n".join(line for line in text.splitlines() if "wall_time_seconds" not in line)


class Reports(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        with open(ARGS.schema, encoding="utf-8") as fh:
            cls.schema = json.load(fh)
        jsonschema.Draft202012Validator.check_schema(cls.schema)
        cls.validator = jsonschema.Draft202012Validator(cls.schema)

    def test_every_command_validates(self):
        for name in COMMANDS:
            with self.subTest(command=name):
                res = run(*command(name))
                self.assertEqual(res.returncode, 0, res.stderr)
                report = json.loads(res.stdout)
                self.validator.validate(report)
                self.assertEqual(report["command"], name)

    def test_estimate_all_has_at_least_five(self):
        report = json.loads(run(*command("estimate")).stdout)
        self.assertGreaterEqual(len(report["estimates"]), 5)

    def test_json_round_trip(self):
        text = run(*command("estimate")).stdout
        report = json.loads(text)
        again = json.loads(json.dumps(report))
        self.assertEqual(report, again)
        for est in report["estimates"]:
            self.assertEqual(float(repr(est["value"])), est["value"])

    def test_out_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = pathlib.Path(tmp) / "r.json"
            argv = command("estimate")
            argv[argv.index("-")] = str(path)
            res = run(*argv)
            self.assertEqual(res.returncode, 0, res.stderr)
            self.validator.validate(json.loads(path.read_text(encoding="utf-8")))

    def test_csv(self):
        res = run(*command("estimate", "--format", "csv"))
        self.assertEqual(res.returncode, 0, res.stderr)
        header = [l for l in res.stdout.splitlines() if l.startswith("#")]
        body = [l for l in res.stdout.splitlines() if l and not l.startswith("#")]
        self.assertTrue(any("schema_version" in l for l in header))
        rows = list(csv.reader(io.StringIO("\n".join(body))))
        self.assertEqual(rows[0][:4], ["representation", "value", "stderr", "n_eff"])
        self.assertGreaterEqual(len(rows) - 1, 5)


class Determinism(unittest.TestCase):
    def test_thread_count_does_not_change_output(self):
        for name in ("estimate", "compare", "maxstable-check", "m-approx"):
            with self.subTest(command=name):
                one = run(*command(name, "--threads", "1"))
                four = run(*command(name, "--threads", "4"))
                self.assertEqual(one.returncode, 0, one.stderr)
                self.assertEqual(strip_wall_time(one.stdout), strip_wall_time(four.stdout))

    def test_rerun_is_identical(self):
        a = run(*command("identity-check"))
        b = run(*command("identity-check"))
        self.assertEqual(strip_wall_time(a.stdout), strip_wall_time(b.stdout))

    def test_env_thread_default(self):
        env = dict(os.environ, TAILCLUSTER_THREADS="3")
        a = run(*command("estimate"), env=env)
        b = run(*command("estimate"))
        self.assertEqual(a.returncode, 0, a.stderr)
        self.assertEqual(strip_wall_time(a.stdout), strip_wall_time(b.stdout))


class ExitCodes(unittest.TestCase):
    def test_missing_seed(self):
        res = run("estimate", "--model", cfg("ar1.cfg"), "--rep", "all", "--n", "10", "--out", "-")
        self.assertEqual(res.returncode, 2)
        self.assertTrue(res.stderr)

    def test_unknown_flag(self):
        res = run(*command("estimate", "--bogus"))
        self.assertEqual(res.returncode, 2)
        self.assertTrue(res.stderr)

    def test_compare_needs_two(self):
        res = run("compare", "--model", cfg("ar1.cfg"), "--rep", "samorodnitsky", "--n", "10", "--seed", "1", "--out", "-")
        self.assertEqual(res.returncode, 2)

    def test_bad_config_reports_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = pathlib.Path(tmp) / "bad.cfg"
            path.write_text("kind = ar1_tail_chain\nalpha = 1.0\nphi = 1.5\n", encoding="utf-8")
            res = run("estimate", "--model", str(path), "--rep", "all", "--n", "10", "--seed", "1", "--out", "-")
            self.assertEqual(res.returncode, 2)
            self.assertIn("3", res.stderr)

    def test_rosinski_needs_dissipative_model(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = pathlib.Path(tmp) / "slow.cfg"
            path.write_text("kind = brown_resnick\nalpha = 1.0\nvariogram_slope = 5\nwindow = 4\n", encoding="utf-8")
            base = ["maxstable-check", "--model", str(path), "--n", "50", "--fidi-n", "100", "--seed", "1",
                    "--points", "0", "--levels", "1", "--out", "-"]
            self.assertEqual(run(*base, "--rep", "rosinski").returncode, 2)
            self.assertEqual(run(*base, "--rep", "dehaan").returncode, 0)

    def test_numerical_failure(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = pathlib.Path(tmp) / "overflow.cfg"
            path.write_text("kind = brown_resnick\nalpha = 1.0\nvariogram_slope = 1e308\nwindow = 4\n", encoding="utf-8")
            res = run("estimate", "--model", str(path), "--rep", "samorodnitsky", "--n", "10", "--seed", "1", "--out", "-")
            self.assertEqual(res.returncode, 3)
            self.assertIn("numerical failure", res.stderr)

def main():
    global ARGS
    parser = argparse.ArgumentParser()
    parser.add_argument("--binary", required=True)
    parser.add_argument("--schema", required=True)
    parser.add_argument("--configs", required=True)
    ARGS, rest = parser.parse_known_args()
    unittest.main(argv=[sys.argv[0], *rest], verbosity=2)


if __name__ == "__main__":
    main()
