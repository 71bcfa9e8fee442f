"""CSX: a declarative language for specifying configurable sheet-finishing
devices, with an embedded constraint solver for exploring the configuration
spaces those specifications describe.

Dimensions in CSX sources are integers in 0.1 mm units: a 210 mm sheet edge
is written 2100.
"""

from csx.ast import Span, Spec, fingerprint, is_valid_ident
from csx.parser import ParseError, parse, parse_expression
from csx.printer import pretty_print
from csx.desugar import desugar
from csx.semantics import AnalysisResult, Diagnostic, analyze
from csx.lower import (
    lower_action_inhabitance,
    lower_device,
    lower_expr,
    lower_type_inhabitance,
    qualified_name,
    render_model,
)
from csx.model import ConstraintModel, MalformedModel
from csx.solver import Budget, DomainBox, SolveResult, check_sat, evaluate, optimize
from csx.interp import (
    MissingBinding,
    SpaceTooLarge,
    enumerate_configurations,
    eval_expr,
    satisfies,
)
from csx.explore import (
    Configuration,
    EmptySpace,
    ExplorationEngine,
    Exhausted,
    Found,
    Inhabitance,
    Job,
    PathError,
    analyze_workspace,
    check_inhabitance,
    find_configuration,
    run_scenario,
)

__version__ = "0.1.0"
