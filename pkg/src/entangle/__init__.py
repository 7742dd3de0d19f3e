"""Entanglement quantification for multipartite pure states.

Partial entropies of every party subset are combined into the
combinatorial entropy of fully entangled states (CEF); the entanglement
combination (EC) splits a state into fully entangled blocks; CE sums the
block CEFs.
"""

__version__ = "0.1.0"

from .errors import (
    ArityMismatch,
    BadHeader,
    BadRow,
    DimensionMismatch,
    DuplicateEntry,
    EigenFailure,
    EmptySubset,
    EntangleError,
    IndexOutOfRange,
    InvalidState,
    KetSyntaxError,
    NotSeparable,
    NumericalAmbiguity,
    ParseError,
    SizeLimit,
    TrivialSubset,
    ZeroState,
)
from .ketparse import parse_amplitude_table, parse_ket_expression, serialize_state
from .measures import CEReport, EntanglementCombination, ce, cef, entanglement_combination, is_block_separable
from .state import (
    DensityMatrix,
    PartySubset,
    PureState,
    SystemShape,
    Tolerances,
    cat_state,
    normalize,
    partial_trace,
    reduced_pure_state,
    subset_entropy,
    subset_rank,
    tensor_product,
    von_neumann_entropy,
)
