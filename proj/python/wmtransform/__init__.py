"""Multiscale transforms of measure-valued sequences."""

import json

from ._wmt import *  # noqa: F401,F403
from ._wmt import (
    DiscreteMeasure,
    GaussianMeasure,
    MeasureSequence,
    Pyramid,
    WmtError,
    analyze,
    gen_gaussian_curve as _gen_gaussian_curve,
    simulate_dipole as _simulate_dipole,
    synthesize,
)


def gen_gaussian_curve(**spec):
    """Synthetic Gaussian curve; keyword arguments follow the JSON spec fields."""
    return _gen_gaussian_curve(json.dumps(spec))


def simulate_dipole(**spec):
    """Particle clouds in the dipole field; keyword arguments follow the JSON spec fields."""
    return _simulate_dipole(json.dumps(spec))
