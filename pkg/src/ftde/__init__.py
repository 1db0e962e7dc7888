"""Finite-time dissipative encoders for stabilizer codes."""

from .code import (
    EncoderPlan,
    StabilizerCode,
    basin_dimension,
    plan_from_reference,
    standard_form,
    synthesize_plan,
    validate_code,
)
from .fixtures import BUILTIN_CODES, builtin
from .pauli import PauliOperator, pauli_from_string
from .report import ARTIFACT_VERSION, VerificationReport
from .toric import toric_plan
from .verify import verify_plan

__version__ = ARTIFACT_VERSION

__all__ = [
    "BUILTIN_CODES",
    "EncoderPlan",
    "PauliOperator",
    "StabilizerCode",
    "VerificationReport",
    "basin_dimension",
    "builtin",
    "pauli_from_string",
    "plan_from_reference",
    "standard_form",
    "synthesize_plan",
    "toric_plan",
    "validate_code",
    "verify_plan",
]
