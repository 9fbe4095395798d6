"""Interactive verifiable polynomial evaluation over prime fields.

The verifier precomputes a look-up table of folded leaf constants once; each
evaluation is then checked in ``r`` challenge rounds of ``O(eta)`` work.
"""

from vpe.field import DEFAULT_MODULUS, FieldElement, ModulusMismatch, NotInvertible, PrimeModulus
from vpe.params import ParamSelector, ParamsError, ProtocolParams, derive_params, select_eta
from vpe.poly import Polynomial, ZTable, evaluate, fold, interpolate_eval, lagrange_table, stripe
from vpe.lookup import CoefficientTree, LazyTable, LookupTable, build_table, naive_entry
from vpe.protocol import (
    HonestProver,
    Transcript,
    Verdict,
    Verifier,
    run_protocol,
)

__all__ = [
    "DEFAULT_MODULUS",
    "FieldElement",
    "ModulusMismatch",
    "NotInvertible",
    "PrimeModulus",
    "ParamSelector",
    "ParamsError",
    "ProtocolParams",
    "derive_params",
    "select_eta",
    "Polynomial",
    "ZTable",
    "evaluate",
    "fold",
    "interpolate_eval",
    "lagrange_table",
    "stripe",
    "CoefficientTree",
    "LazyTable",
    "LookupTable",
    "build_table",
    "naive_entry",
    "HonestProver",
    "Transcript",
    "Verdict",
    "Verifier",
    "run_protocol",
]
