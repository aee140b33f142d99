"""Pipeline stages over the artifact files, chained by content hashes.

Every stage records the hash of its input artifact inside its output and
verifies the recorded hashes of its inputs before running, so a stale or
tampered artifact chain fails at the first downstream command.  All stages
are deterministic: identical inputs yield byte-identical artifact trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .abstraction import (
    abstract_to_fsm,
    complete_with_idle,
    count_unclassified,
    extract_classes,
    minimize,
)
from .artifacts import canonical_bytes, file_hash, load_json, write_bytes
from .errors import FormatError, ParameterError, ToolchainError
from .fsm import load_fsm, save_fsm
from .gcl import analyze, generate_code, load_program, mutate_program, save_program
from .harness import Wrapper, load_log, run_suite, save_log
from .model import load_interface, save_interface
from .policy import derive_reference, load_policy, load_sfsm, save_sfsm
from .testgen import concretize, generate_h, generate_w, load_suite, save_concrete, save_suite
from .validators import validate_h, validate_log


class HashMismatchError(ToolchainError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    policy: Path
    interface: Path
    sfsm: Path
    fsm: Path
    suite: Path
    concrete: Path
    program: Path
    log: Path
    report: Path
    method: str = "h"
    m_override: int | None = None
    seed: int = 0
    mutate: str | None = None  # "kind:seed" fault injection at codegen

    _ARTIFACT_KEYS = ("interface", "sfsm", "fsm", "suite", "concrete", "program", "log", "report")

    def __post_init__(self):
        if self.method not in ("h", "w"):
            raise ParameterError(f"method must be 'h' or 'w', got {self.method!r}")
        paths = [Path(self.policy)] + [Path(getattr(self, k)) for k in self._ARTIFACT_KEYS]
        if len({p.resolve() for p in paths}) != len(paths):
            raise ParameterError("artifact paths must be pairwise distinct")

    @staticmethod
    def build(config_path=None, workdir=None, **overrides) -> "PipelineConfig":
        """Assemble a config from defaults, an optional JSON file, and flag overrides."""
        settings: dict = {}
        if config_path is not None:
            doc = load_json(config_path)
            unknown = set(doc) - {
                "policy", "workdir", "interface", "sfsm", "fsm", "suite", "concrete",
                "program", "log", "report", "method", "m_override", "seed", "mutate",
            }
            if unknown:
                raise FormatError(f"{config_path}: unknown config key(s) {sorted(unknown)}")
            settings.update(doc)
        if workdir is not None:
            settings["workdir"] = workdir
        for key, value in overrides.items():
            if value is not None:
                settings[key] = value

        wd = Path(settings.get("workdir", "artifacts"))
        if "policy" not in settings:
            raise ParameterError("a policy file is required (flag --policy or config key 'policy')")
        defaults = {
            "interface": wd / "interface.json",
            "sfsm": wd / "sfsm.json",
            "fsm": wd / "fsm.json",
            "suite": wd / "suite.json",
            "concrete": wd / "suite.concrete.json",
            "program": wd / "supervisor.gcl",
            "log": wd / "log.jsonl",
            "report": wd / "validation.json",
        }
        kwargs = {
            "policy": Path(settings["policy"]),
            "method": str(settings.get("method", "h")).lower(),
            "m_override": settings.get("m_override"),
            "seed": int(settings.get("seed", 0)),
            "mutate": settings.get("mutate"),
        }
        for key, default in defaults.items():
            kwargs[key] = Path(settings.get(key, default))
        return PipelineConfig(**kwargs)


def _require_file(path: Path, role: str) -> None:
    if not Path(path).is_file():
        raise ToolchainError(f"missing {role} artifact: {path}")


def _require_hash(recorded: str | None, path: Path, consumer: str, producer: str) -> None:
    if recorded is None:
        raise HashMismatchError(f"{consumer}: input artifact records no {producer} hash")
    actual = file_hash(path)
    if recorded != actual:
        raise HashMismatchError(
            f"{consumer}: stale artifact chain; recorded {producer} hash {recorded[:12]}... "
            f"!= current {actual[:12]}... ({path})"
        )


def _load_interface_for(cfg: PipelineConfig):
    _require_file(cfg.interface, "interface")
    return load_interface(cfg.interface)


# ---------------------------------------------------------------------------
# Stages


def stage_derive(cfg: PipelineConfig) -> dict:
    """Policy -> symbolic reference.  Also materializes the interface artifact."""
    _require_file(cfg.policy, "policy")
    if Path(cfg.interface).is_file():
        iface = load_interface(cfg.interface)
        transitions, initial, _ = load_policy(cfg.policy, iface)
    else:
        transitions, initial, iface = load_policy(cfg.policy)
        save_interface(cfg.interface, iface)
    reference = derive_reference(transitions, initial, iface)
    meta = {
        "policy_hash": file_hash(cfg.policy),
        "interface_hash": file_hash(cfg.interface),
    }
    save_sfsm(cfg.sfsm, reference, iface, meta)
    return {
        "sfsm": str(cfg.sfsm),
        "states": len(reference.states),
        "transitions": len(reference.transitions),
    }


def _load_reference(cfg: PipelineConfig, consumer: str):
    iface = _load_interface_for(cfg)
    _require_file(cfg.sfsm, "reference")
    reference, meta = load_sfsm(cfg.sfsm, iface)
    _require_file(cfg.policy, "policy")
    _require_hash(meta.get("policy_hash"), cfg.policy, consumer, "policy")
    _require_hash(meta.get("interface_hash"), cfg.interface, consumer, "interface")
    return iface, reference


def stage_abstract(cfg: PipelineConfig) -> dict:
    """Reference -> input classes -> minimal finite-state abstraction."""
    iface, reference = _load_reference(cfg, "abstract")
    classes = extract_classes(reference, iface)
    unclassified = count_unclassified(classes, iface)
    completed = complete_with_idle(reference, classes)
    machine = minimize(abstract_to_fsm(completed, classes, iface))
    save_fsm(cfg.fsm, machine, {"sfsm_hash": file_hash(cfg.sfsm)})
    return {
        "fsm": str(cfg.fsm),
        "classes": len(classes.classes),
        "unclassified_inputs": unclassified,
        "idle_loops_added": len(completed.transitions) - len(reference.transitions),
        "n": len(machine.states),
    }


def stage_testgen(cfg: PipelineConfig) -> dict:
    _require_file(cfg.fsm, "abstraction")
    machine, meta = load_fsm(cfg.fsm)
    _require_file(cfg.sfsm, "reference")
    _require_hash(meta.get("sfsm_hash"), cfg.sfsm, "testgen", "reference")
    n = len(machine.states)
    m = cfg.m_override if cfg.m_override is not None else n
    if m < n:
        raise ParameterError(f"fault bound m={m} below reference state count n={n}")
    generator = generate_h if cfg.method == "h" else generate_w
    suite = generator(machine, m, reference_hash=file_hash(cfg.fsm))
    save_suite(cfg.suite, suite)

    iface, reference = _load_reference(cfg, "testgen")
    classes = extract_classes(reference, iface)
    save_concrete(cfg.concrete, concretize(suite, classes), suite)
    return {
        "suite": str(cfg.suite),
        "concrete": str(cfg.concrete),
        "method": suite.meta.method,
        "m": m,
        "n": n,
        "cases": len(suite.cases),
        "symbols": sum(len(c) for c in suite.cases),
    }


def stage_codegen(cfg: PipelineConfig) -> dict:
    iface, reference = _load_reference(cfg, "codegen")
    classes = extract_classes(reference, iface)
    completed = complete_with_idle(reference, classes)
    program = generate_code(
        completed,
        iface,
        iface_ref=Path(cfg.interface).name,
        source_hash=file_hash(cfg.sfsm),
    )
    mutated = None
    if cfg.mutate:
        kind, _, seed_text = cfg.mutate.partition(":")
        try:
            seed = int(seed_text)
        except ValueError:
            raise ParameterError(f"--mutate expects kind:seed, got {cfg.mutate!r}") from None
        program = mutate_program(program, kind, seed)
        mutated = f"{kind}:{seed}"
    save_program(cfg.program, program)
    return {"program": str(cfg.program), "commands": len(program.commands), "mutated": mutated}


def stage_run(cfg: PipelineConfig) -> dict:
    iface, reference = _load_reference(cfg, "run")
    _require_file(cfg.fsm, "abstraction")
    machine, fsm_meta = load_fsm(cfg.fsm)
    _require_hash(fsm_meta.get("sfsm_hash"), cfg.sfsm, "run", "reference")
    _require_file(cfg.suite, "suite")
    suite = load_suite(cfg.suite)
    _require_hash(suite.meta.reference_hash, cfg.fsm, "run", "abstraction")
    _require_file(cfg.program, "program")
    program = load_program(cfg.program, iface)
    _require_hash(program.source_hash, cfg.sfsm, "run", "reference")

    classes = extract_classes(reference, iface)
    completed = complete_with_idle(reference, classes)
    wrapper = Wrapper.for_reference(classes, completed, iface)
    verdicts, log = run_suite(suite, program, machine, wrapper, suite_hash=file_hash(cfg.suite))
    save_log(cfg.log, log, program_hash=file_hash(cfg.program))
    passed = sum(1 for v in verdicts if v.passed)
    return {
        "log": str(cfg.log),
        "cases": len(verdicts),
        "passed": passed,
        "failed": len(verdicts) - passed,
        "verdict": "PASS" if passed == len(verdicts) else "FAIL",
    }


def stage_validate(cfg: PipelineConfig) -> dict:
    """Run the suite validator, the static analyzer, and the log validator;
    aggregate a machine-readable report."""
    iface, reference = _load_reference(cfg, "validate")
    machine, fsm_meta = load_fsm(cfg.fsm)
    _require_hash(fsm_meta.get("sfsm_hash"), cfg.sfsm, "validate", "reference")
    suite = load_suite(cfg.suite)
    _require_hash(suite.meta.reference_hash, cfg.fsm, "validate", "abstraction")
    program = load_program(cfg.program, iface)
    _require_hash(program.source_hash, cfg.sfsm, "validate", "reference")
    log, summary = load_log(cfg.log)
    _require_hash(summary.get("suite_hash"), cfg.suite, "validate", "suite")
    _require_hash(summary.get("program_hash"), cfg.program, "validate", "program")

    classes = extract_classes(reference, iface)
    completed = complete_with_idle(reference, classes)

    suite_report = validate_h(suite, machine)
    static_report = analyze(program, completed)
    log_report = validate_log(log, suite, classes)

    n = len(machine.states)
    doc = {
        "suite_validator": {
            "passed": suite_report.passed,
            "violations": [{"clause": v.clause, "message": v.message} for v in suite_report.violations],
        },
        "static_analysis": {
            "passed": static_report.passed,
            "guards_match": static_report.guards_match,
            "guard_diff": list(static_report.guard_diff),
            "states_match": static_report.states_match,
            "state_diff": list(static_report.state_diff),
            "state_count_m": static_report.state_count_m,
            "minimized_state_count_n": n,
            "m_equals_n": static_report.state_count_m == n,
            "flat_structure_ok": static_report.flat_structure_ok,
        },
        "log_validator": {
            "passed": log_report.passed,
            "violations": [{"clause": v.clause, "message": v.message} for v in log_report.violations],
        },
    }
    doc["passed"] = bool(
        doc["suite_validator"]["passed"]
        and doc["static_analysis"]["passed"]
        and doc["log_validator"]["passed"]
    )
    write_bytes(cfg.report, canonical_bytes(doc))
    doc["report"] = str(cfg.report)
    return doc


STAGES = (
    ("derive", stage_derive),
    ("abstract", stage_abstract),
    ("testgen", stage_testgen),
    ("codegen", stage_codegen),
    ("run", stage_run),
    ("validate", stage_validate),
)


def run_pipeline(cfg: PipelineConfig):
    """All stages in order; returns (exit code, per-stage info)."""
    info = {}
    for name, stage in STAGES:
        info[name] = stage(cfg)
    if info["run"]["verdict"] != "PASS":
        return 1, info
    if not info["validate"]["passed"]:
        return 2, info
    return 0, info
