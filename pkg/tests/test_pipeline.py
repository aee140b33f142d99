import json
from pathlib import Path

import pytest

from sctk.artifacts import canonical_bytes, write_bytes
from sctk.cli import main
from sctk.errors import ParameterError
from sctk.pipeline import PipelineConfig, run_pipeline
from sctk.workcell import workcell_policy_doc

from conftest import two_factor_policy_doc


def run_cli(args) -> int:
    try:
        main(list(args))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return 0


@pytest.fixture(scope="module")
def policy_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("policy") / "two-factor.json"
    write_bytes(path, canonical_bytes(two_factor_policy_doc()))
    return path


@pytest.fixture(scope="module")
def workcell_policy_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("policy") / "workcell.json"
    write_bytes(path, canonical_bytes(workcell_policy_doc()))
    return path


def _cfg(policy, workdir, **kv):
    return PipelineConfig.build(None, str(workdir), policy=str(policy), **kv)


def test_full_pipeline_self_conformance(policy_file, tmp_path):
    cfg = _cfg(policy_file, tmp_path / "wd")
    code, info = run_pipeline(cfg)
    assert code == 0
    assert info["run"]["verdict"] == "PASS"
    assert info["validate"]["passed"]
    for key in ("interface", "sfsm", "fsm", "suite", "concrete", "program", "log", "report"):
        assert Path(getattr(cfg, key)).is_file(), key


def test_pipeline_artifacts_are_deterministic(policy_file, tmp_path):
    trees = []
    for name in ("one", "two"):
        cfg = _cfg(policy_file, tmp_path / name)
        assert run_pipeline(cfg)[0] == 0
        tree = {
            key: Path(getattr(cfg, key)).read_bytes()
            for key in ("interface", "sfsm", "fsm", "suite", "concrete", "program", "log", "report")
        }
        trees.append(tree)
    assert trees[0] == trees[1]


def test_mutated_program_fails_run(policy_file, tmp_path):
    wd = tmp_path / "wd"
    assert run_cli(["pipeline", "--policy", str(policy_file), "--workdir", str(wd)]) == 0
    assert run_cli([
        "codegen", "--policy", str(policy_file), "--workdir", str(wd), "--mutate", "output:3",
    ]) == 0
    assert run_cli(["run", "--policy", str(policy_file), "--workdir", str(wd)]) == 1
    # the log records at least one failing case
    summary = json.loads(Path(wd, "log.jsonl").read_text().splitlines()[-1])
    assert summary["failed"] >= 1


def test_m_override_below_n_is_usage_error(policy_file, tmp_path):
    wd = tmp_path / "wd"
    assert run_cli(["derive", "--policy", str(policy_file), "--workdir", str(wd)]) == 0
    assert run_cli(["abstract", "--policy", str(policy_file), "--workdir", str(wd)]) == 0
    code = run_cli([
        "testgen", "--policy", str(policy_file), "--workdir", str(wd), "--m", "1",
    ])
    assert code == 3


def test_tampered_abstraction_breaks_consumers_holding_its_hash(policy_file, tmp_path):
    wd = tmp_path / "wd"
    assert run_cli(["pipeline", "--policy", str(policy_file), "--workdir", str(wd)]) == 0

    # tamper the abstraction artifact: the stale suite no longer hash-matches it,
    # so run and validate refuse before executing anything
    fsm_path = Path(wd, "fsm.json")
    doc = json.loads(fsm_path.read_text())
    doc["initial"] = doc["states"][1]
    fsm_path.write_bytes(canonical_bytes(doc))
    assert run_cli(["run", "--policy", str(policy_file), "--workdir", str(wd)]) == 3
    assert run_cli(["validate", "--policy", str(policy_file), "--workdir", str(wd)]) == 3
    # re-running the producer re-derives a fresh, consistent abstraction
    assert run_cli(["abstract", "--policy", str(policy_file), "--workdir", str(wd)]) == 0
    assert run_cli(["testgen", "--policy", str(policy_file), "--workdir", str(wd)]) == 0
    assert run_cli(["run", "--policy", str(policy_file), "--workdir", str(wd)]) == 0


def test_tampered_policy_detected_at_abstract(policy_file, tmp_path):
    wd = tmp_path / "wd"
    policy_copy = tmp_path / "policy.json"
    policy_copy.write_bytes(policy_file.read_bytes())
    assert run_cli(["pipeline", "--policy", str(policy_copy), "--workdir", str(wd)]) == 0
    doc = json.loads(policy_copy.read_text())
    doc["transitions"][0]["action"] = "renamed"
    policy_copy.write_bytes(canonical_bytes(doc))
    assert run_cli(["abstract", "--policy", str(policy_copy), "--workdir", str(wd)]) == 3
    assert run_cli(["codegen", "--policy", str(policy_copy), "--workdir", str(wd)]) == 3


def test_config_file_with_flag_override(policy_file, tmp_path):
    wd = tmp_path / "wd"
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "policy": str(policy_file),
        "workdir": str(wd),
        "method": "w",
        "seed": 4,
    }))
    assert run_cli(["pipeline", "--config", str(config)]) == 0
    suite = json.loads(Path(wd, "suite.json").read_text())
    assert suite["meta"]["method"] == "W"
    # flags override the config file
    assert run_cli(["testgen", "--config", str(config), "--method", "h"]) == 0
    suite = json.loads(Path(wd, "suite.json").read_text())
    assert suite["meta"]["method"] == "H"


def test_unknown_config_key_rejected(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"policy": "p.json", "mystery": 1}))
    assert run_cli(["derive", "--config", str(config)]) == 3


def test_paths_must_be_distinct(policy_file, tmp_path):
    with pytest.raises(ParameterError, match="pairwise distinct"):
        PipelineConfig.build(
            None,
            str(tmp_path),
            policy=str(policy_file),
            sfsm=str(tmp_path / "same.json"),
            fsm=str(tmp_path / "same.json"),
        )


def test_missing_policy_is_usage_error(tmp_path):
    assert run_cli(["derive", "--workdir", str(tmp_path)]) == 3


def test_example_policy_command(tmp_path):
    out = tmp_path / "example.json"
    assert run_cli(["example-policy", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert {"interface", "initial", "transitions"} <= set(doc)


def test_workcell_pipeline_end_to_end(workcell_policy_file, tmp_path):
    wd = tmp_path / "wd"
    assert run_cli(["pipeline", "--policy", str(workcell_policy_file), "--workdir", str(wd)]) == 0
    report = json.loads(Path(wd, "validation.json").read_text())
    assert report["passed"]
    assert report["static_analysis"]["m_equals_n"]
    assert report["suite_validator"]["passed"]
    assert report["log_validator"]["passed"]


def test_validate_flags_suite_tampering(policy_file, tmp_path):
    wd = tmp_path / "wd"
    assert run_cli(["pipeline", "--policy", str(policy_file), "--workdir", str(wd)]) == 0
    # gut the suite down to one short case
    suite_path = Path(wd, "suite.json")
    doc = json.loads(suite_path.read_text())
    doc["cases"] = doc["cases"][:1]
    suite_path.write_bytes(canonical_bytes(doc))
    # the stale log no longer hash-matches the suite
    assert run_cli(["validate", "--policy", str(policy_file), "--workdir", str(wd)]) == 3
    # re-executing repairs the hash chain, but the suite validator rejects the
    # gutted suite: the harness alone cannot bless it
    assert run_cli(["run", "--policy", str(policy_file), "--workdir", str(wd)]) == 0
    assert run_cli(["validate", "--policy", str(policy_file), "--workdir", str(wd)]) == 2
