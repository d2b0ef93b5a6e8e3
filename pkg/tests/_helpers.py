"""Shared builders for the test suite."""

import os

import numpy as np

from nlevo.catalog import build_named
from nlevo.functions import ScalarFunction

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(REPO_ROOT, "configs")


def heat_problem(n=16, initial=None):
    """Pure diffusion on the interval: the conservation-law entry with the
    flux and reaction both switched off leaves u' = Laplacian u."""
    return build_named(
        "burgers", n=n,
        overrides={"F": ScalarFunction.zero(), "g": ScalarFunction.zero()},
        initial=initial)


def tight_heat_traits(problem):
    """The exact coercivity declaration of the Laplacian: 2<Au,u> = -2|u|_V^2
    needs no H-norm slack at all, so the sharp record has c_const = 0."""
    return problem.traits.with_updates(c_const=0.0)


def unit_mode(n, k=0):
    e = np.zeros(n)
    e[k] = 1.0
    return e
