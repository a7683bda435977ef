"""Verification library for generalized complex geometry.

Submodules: ``split_linear`` (split-signature linear algebra and Dirac
relations), ``gc_linear`` (pointwise generalized complex structures),
``spinor`` (exterior algebra and pure spinors), ``calculus`` (charts, form
fields, jets and the Courant bracket), ``groupoid`` (local groupoids and
multiplicative forms), ``cover_glue`` (holomorphic covers), ``examples``
(built-in fixtures), ``suites`` and ``scene`` (checks and reports) and
``cli``.
"""
from .errors import DomainError, GCVerifyError, InconclusiveError, PreconditionError, SceneError
from .suites import Report, RunConfig, run_suite
from .scene import load_scene, parse_scene

__version__ = "0.1.0"

__all__ = [
    "GCVerifyError",
    "DomainError",
    "InconclusiveError",
    "PreconditionError",
    "SceneError",
    "Report",
    "RunConfig",
    "run_suite",
    "load_scene",
    "parse_scene",
]
