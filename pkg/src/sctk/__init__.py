"""Supervisor conformance toolkit.

Turns a synthesized safety-supervisor policy into a symbolic test reference,
executable guarded-command code, and a complete conformance test suite, then
executes the suite through a harness with independent validators.
"""

from .abstraction import (
    ClassAlphabet,
    InputClass,
    abstract_to_fsm,
    complete_with_idle,
    count_unclassified,
    extract_classes,
    minimize,
)
from .errors import FormatError, ParameterError, ToolchainError
from .fsm import Fsm, fsm_from_text, fsm_to_text, load_fsm, save_fsm
from .gcl import (
    GclProgram,
    GuardedCommand,
    StaticAnalysisReport,
    analyze,
    generate_code,
    load_program,
    mutate_program,
    parse_program,
    save_program,
    serialize_program,
    step,
)
from .guards import (
    IDLE,
    IDLE_SYMBOL,
    And,
    Atom,
    GuardExpr,
    Not,
    Or,
    canonical_print,
    eval_guard,
    parse_guard,
    print_output,
    satisfying_valuations,
)
from .harness import (
    ExecutionLog,
    LogEntry,
    Verdict,
    Wrapper,
    abstract_program,
    fsm_equivalent,
    load_log,
    mutate,
    run_suite,
    save_log,
)
from .model import (
    InterfaceSpec,
    Sort,
    Valuation,
    VarDecl,
    interface_from_doc,
    iter_valuations,
    load_interface,
    save_interface,
)
from .pipeline import PipelineConfig, run_pipeline
from .policy import (
    PolicyTransition,
    Sfsm,
    SfsmTransition,
    derive_reference,
    load_policy,
    load_sfsm,
    risk_state_name,
    save_sfsm,
    step_reference,
)
from .testgen import (
    ConcreteSuite,
    SuiteMeta,
    TestSuite,
    concretize,
    generate_h,
    generate_w,
    load_suite,
    save_suite,
    suite_size,
)
from .validators import ValidationReport, Violation, validate_h, validate_log

__version__ = "0.1.0"
