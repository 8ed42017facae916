"""Reduced differential transform solver for fourth-order dissipative PDEs.

The pieces, bottom to top: :mod:`rdtm.expr` (symbolic expressions in one
variable), :mod:`rdtm.engine` (the series recurrence), :mod:`rdtm.ks` (the
Kuramoto-Sivashinsky benchmark family), :mod:`rdtm.verify` (independent
finite-difference oracles), and :mod:`rdtm.cli` (the command line).
"""

from .engine import (LinearTerm, NonlinearTerm, PdeModel, SpectrumSeries,
                     assemble, assemble_grid, build_series, cauchy_product,
                     monomial_shift, power_convolution, recurrence_step,
                     spatial_derivative, time_derivative_transform)
from .expr import (Bindings, DomainError, EvaluationError, Expr, ExprError,
                   ParseError, UnboundConstantError, UnknownFunctionError,
                   differentiate, evaluate, evaluate_many, parse, simplify,
                   to_text)
from .ks import (KsParams, generalized_model, ks_exact, ks_exact_grid,
                 ks_initial, ks_model)
from .verify import (ErrorRow, ErrorTable, compare_table, fd_derivative,
                     residual, series_product_oracle)

__version__ = "0.1.0"

__all__ = [
    "Expr", "Bindings", "parse", "to_text", "evaluate", "evaluate_many",
    "differentiate", "simplify",
    "ExprError", "ParseError", "UnknownFunctionError", "EvaluationError",
    "UnboundConstantError", "DomainError",
    "LinearTerm", "NonlinearTerm", "PdeModel", "SpectrumSeries",
    "cauchy_product", "power_convolution", "time_derivative_transform",
    "monomial_shift", "spatial_derivative", "recurrence_step",
    "build_series", "assemble", "assemble_grid",
    "KsParams", "ks_initial", "ks_exact", "ks_exact_grid", "ks_model",
    "generalized_model",
    "ErrorRow", "ErrorTable", "fd_derivative", "residual",
    "series_product_oracle", "compare_table",
    "__version__",
]
