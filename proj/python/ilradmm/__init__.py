"""Iteratively linearized reweighted ADMM for nonconvex composite problems."""

from ._core import *  # noqa: F401,F403
from ._core import Error, LinearOperator, Problem, solve  # noqa: F401

__version__ = "0.1.0"
