# Copyright 2026 The Attrguard Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""End-to-end checks of the attrguard command line and its exit codes.

Usage: cli_test.py <attrguard-binary> <fixtures-dir> <work-dir>
"""

import json
import pathlib
import shutil
import subprocess
import sys
import unittest

CLI = ""
FIXTURES = pathlib.Path()
WORK = pathlib.Path()


def run(*args):
  return subprocess.run([CLI, *map(str, args)], capture_output=True,
                        text=True, timeout=300, check=False)


class CliTest(unittest.TestCase):

  def setUp(self):
    self.store = WORK / self.id().rsplit(".", 1)[-1]
    shutil.rmtree(self.store, ignore_errors=True)
    self.store.mkdir(parents=True)
    self.dataset = FIXTURES / "profiles_2.json"

  def write_config(self, doc):
    path = self.store / "config.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path

  def common(self):
    return ["--dataset", self.dataset, "--store", self.store / "runs"]

  def test_attack_defend_eval_report(self):
    r = run("attack", *self.common(), "--json")
    self.assertEqual(r.returncode, 0, r.stderr)
    attack = json.loads(r.stdout)
    self.assertEqual(attack["overall"]["top1"], 1.0)

    r = run("defend", "trace+rps", *self.common(), "--json",
            "--max-iters-stage1", "300", "--max-iters-stage2", "300")
    self.assertEqual(r.returncode, 0, r.stderr)
    run_id = json.loads(r.stdout)["run"]
    self.assertTrue(run_id.startswith("defend-"))

    r = run("eval", "--run", run_id, *self.common(), "--json")
    self.assertEqual(r.returncode, 0, r.stderr)
    self.assertEqual(json.loads(r.stdout)["overall"]["top1"], 0.0)

    r = run("report", "--run", run_id, *self.common())
    self.assertEqual(r.returncode, 0, r.stderr)
    self.assertIn("overall", r.stdout)

  def test_providers_check(self):
    r = run("providers", "check")
    self.assertEqual(r.returncode, 0, r.stderr)
    self.assertEqual(json.loads(r.stdout)[0]["name"], "surrogate")

  def test_config_errors_exit_2(self):
    self.assertEqual(run("attack", "--jobs", "0", *self.common()).returncode, 2)
    self.assertEqual(run("attack", "--no-such-flag").returncode, 2)
    config = self.write_config({"attack": {"jobs": 3}})
    r = run("attack", "--config", config, *self.common())
    self.assertEqual(r.returncode, 2)
    self.assertIn("attack.jobs", r.stderr)

  def test_secret_in_config_exit_2(self):
    config = self.write_config({
        "providers": {
            "surrogate": {},
            "remote": {"backend": "http-completions",
                       "endpoint": "http://127.0.0.1:1",
                       "api_key": "sk-do-not-store"},
        }
    })
    r = run("attack", "--config", config, *self.common())
    self.assertEqual(r.returncode, 2)
    self.assertIn("providers.remote.api_key", r.stderr)
    self.assertNotIn("sk-do-not-store", r.stderr)

  def test_provider_errors_exit_3(self):
    config = self.write_config({
        "providers": {
            "surrogate": {},
            "side": {"backend": "sidecar", "endpoint": "http://127.0.0.1:1",
                     "retries": 0, "timeout_seconds": 1},
        }
    })
    r = run("providers", "check", "--config", config)
    self.assertEqual(r.returncode, 3)
    self.assertFalse(
        {s["name"]: s for s in json.loads(r.stdout)}["side"]["reachable"])

    config = self.write_config({
        "providers": {
            "surrogate": {},
            "remote": {"backend": "http-completions",
                       "endpoint": "http://127.0.0.1:1"},
        },
        "defense": {"search_providers": ["remote"]},
    })
    r = run("defend", "rps", "--config", config, *self.common())
    self.assertEqual(r.returncode, 3)
    self.assertIn("capability-mismatch", r.stderr)

  def test_data_errors_exit_4(self):
    r = run("report", "--run", "defend-00000000", *self.common())
    self.assertEqual(r.returncode, 4)
    self.assertIn("run-not-found", r.stderr)
    r = run("attack", "--dataset", self.store / "missing.json", "--store",
            self.store / "runs")
    self.assertEqual(r.returncode, 4)


if __name__ == "__main__":
  CLI, FIXTURES, WORK = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(
      sys.argv[3])
  unittest.main(argv=sys.argv[:1], verbosity=2)
