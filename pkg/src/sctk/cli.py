"""Command-line entry points for the supervisor conformance pipeline.

Exit codes: 0 all PASS, 1 any test FAIL, 2 validator error, 3 usage or
format error.
"""

from __future__ import annotations

import sys

import click

from .artifacts import canonical_bytes, write_bytes
from .errors import ToolchainError
from .pipeline import STAGES, PipelineConfig, run_pipeline
from .report import write_report
from .workcell import workcell_policy_doc

_PATH_KEYS = ("policy", "interface", "sfsm", "fsm", "suite", "concrete", "program", "log", "report")


def config_options(fn):
    decorators = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="JSON config file; flags override its entries."),
        click.option("--workdir", default=None, help="Directory for defaulted artifact paths."),
        click.option("--policy", default=None, help="Policy file (controller fragment)."),
        click.option("--interface", default=None, help="Interface artifact path."),
        click.option("--sfsm", default=None, help="Symbolic reference artifact path."),
        click.option("--fsm", default=None, help="Finite-state abstraction artifact path."),
        click.option("--suite", default=None, help="Abstract test suite artifact path."),
        click.option("--concrete", default=None, help="Concrete test suite artifact path."),
        click.option("--program", default=None, help="Guarded-command program artifact path."),
        click.option("--log", "log_", default=None, help="Execution log artifact path."),
        click.option("--report", "report_", default=None, help="Validation report artifact path."),
        click.option("--method", type=click.Choice(["h", "w"], case_sensitive=False), default=None,
                     help="Test generation strategy (default h)."),
        click.option("--m", "m_override", type=int, default=None,
                     help="Fault-domain state bound; defaults to the reference state count."),
        click.option("--seed", type=int, default=None, help="Seed for randomized commands."),
        click.option("--mutate", default=None, metavar="KIND:SEED",
                     help="Inject a fault at codegen: output, transfer, or add-state."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def _build_config(config_path, workdir, log_, report_, **kv) -> PipelineConfig:
    kv["log"] = log_
    kv["report"] = report_
    return PipelineConfig.build(config_path, workdir, **kv)


def _echo_info(name: str, info: dict) -> None:
    detail = ", ".join(f"{k}={v}" for k, v in info.items() if v is not None)
    click.echo(f"[{name}] {detail}")


@click.group()
def cli():
    """Derive, test, and validate guarded-command safety supervisors."""


def _stage_command(name, stage):
    @cli.command(name=name, help=f"Run the {name} stage.")
    @config_options
    def command(config_path, workdir, log_, report_, **kv):
        cfg = _build_config(config_path, workdir, log_, report_, **kv)
        info = stage(cfg)
        _echo_info(name, info)
        if name == "run" and info["verdict"] != "PASS":
            sys.exit(1)
        if name == "validate" and not info["passed"]:
            sys.exit(2)

    return command


for _name, _stage in STAGES:
    _stage_command(_name, _stage)


@cli.command(name="pipeline", help="Run all stages in order.")
@config_options
def pipeline_command(config_path, workdir, log_, report_, **kv):
    cfg = _build_config(config_path, workdir, log_, report_, **kv)
    code, info = run_pipeline(cfg)
    for name, stage_info in info.items():
        _echo_info(name, stage_info)
    if code:
        sys.exit(code)


@cli.command(name="example-policy", help="Write the built-in workcell example policy.")
@click.option("-o", "--out", default="workcell-policy.json", show_default=True)
def example_policy_command(out):
    write_bytes(out, canonical_bytes(workcell_policy_doc()))
    click.echo(f"wrote {out}")


@cli.command(name="report", help="Render the suite-size and mutation-score studies (CSV + figures).")
@click.option("-o", "--out", "out_dir", default="report", show_default=True,
              help="Output directory for CSVs and figures.")
@click.option("--refs", type=int, default=20, show_default=True, help="Random references to sample.")
@click.option("--mutants", type=int, default=2000, show_default=True, help="Mutants per reference.")
@click.option("--seed", type=int, default=7, show_default=True)
def report_command(out_dir, refs, mutants, seed):
    summary = write_report(out_dir, num_refs=refs, mutants=mutants, seed=seed)
    click.echo(f"suite sizes: H <= W on {summary['sizes']['fraction_h_le_w']:.0%} of references "
               f"(mean ratio {summary['sizes']['mean_ratio']:.2f})")
    click.echo(f"mutation: min score {summary['mutation']['min_score']:.2%}, "
               f"{summary['mutation']['total_survivors']} survivors")
    click.echo(f"report written to {out_dir}")


def main(argv=None):
    """CLI entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:  # --help and friends
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(3)
    except click.Abort:
        sys.exit(3)
    except ToolchainError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
