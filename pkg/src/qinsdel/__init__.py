"""Insertion/deletion error models and Knill-Laflamme checks for small qudit codes."""

from .channels import (
    InsdelSpec,
    MixtureChannel,
    SeparableState,
    apply_insdel,
    spanning_kraus_family,
    uniform_deletion,
    uniform_insdel,
)
from .codefile import bundled_code, load_code, parse_code, render_code
from .kl import QuantumCode, build_recovery, check_insdel_code, check_kl, random_code, theorem_sweep, verify_recovery
from .kraus import DeletionOp, InsertionOp, build_deletion, build_insertion
from .tensor import DensityMatrix, Tolerance
from .words import KrausWord, normalize, render

__version__ = "0.1.0"
