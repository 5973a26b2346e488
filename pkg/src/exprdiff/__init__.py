"""Forward-mode and symbolic differentiation over one shared expression IR."""

from .core import (
    BudgetExceeded,
    ExprForest,
    ExprStore,
    OpKind,
    OpLog,
    StructuralError,
    node_count,
)
from .equivalence import compare_op_logs, compare_structural, randomized_equivalence_suite
from .evaluator import DomainError, check_gradient, evaluate, finite_difference
from .forward import forward_derivative, forward_gradient
from .parser import ParseError, parse_expr, parse_program
from .rules import local_partials
from .symbolic import DiffPolicy, derivative_size, symbolic_derivative
from .tracer import trace_derivative, trace_program
from .transforms import cons_tree, swell_report, to_forest, unfold

__version__ = "0.1.0"
