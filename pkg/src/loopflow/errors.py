"""Error hierarchy shared by every loopflow module.

Each error carries a stable machine-readable ``code`` so the CLI and the
HTTP service can map failures without string matching on messages.
InputError subclasses indicate problems with the supplied network document
or vectors; AnalysisError subclasses indicate numerical failure during
analysis of a valid input.
"""

from __future__ import annotations


class LoopflowError(Exception):
    """Base class for all loopflow errors."""

    code = "error"


class InputError(LoopflowError):
    """The supplied document, vector, or basis is invalid."""

    code = "input_error"


class AnalysisError(LoopflowError):
    """A numerical operation failed on otherwise valid input."""

    code = "analysis_error"


class MalformedDocument(InputError):
    code = "malformed_document"


class DuplicateId(InputError):
    code = "duplicate_id"


class SelfLoop(InputError):
    code = "self_loop"


class NonPositiveMu(InputError):
    code = "non_positive_mu"


class UnbalancedConsumption(InputError):
    code = "unbalanced_consumption"


class Disconnected(InputError):
    code = "disconnected"


class NoCycles(InputError):
    code = "no_cycles"


class InconsistentCycle(InputError):
    code = "inconsistent_cycle"


class NotFaceBasis(InputError):
    code = "not_face_basis"


class InvalidReferenceFlow(InputError):
    code = "invalid_reference_flow"


class InvalidVector(InputError):
    code = "invalid_vector"


class Singular(AnalysisError):
    """A dense matrix is singular at the pivot threshold."""

    code = "singular_matrix"


class SingularJacobian(AnalysisError):
    code = "singular_jacobian"


class SingularH(AnalysisError):
    code = "singular_h"


class SingularPressureDrop(AnalysisError):
    code = "singular_pressure_drop"


class InsufficientData(AnalysisError):
    code = "insufficient_data"
