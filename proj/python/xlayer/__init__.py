"""Joint routing, power allocation, power control and congestion control on wireless networks."""

import json

from . import _core
from ._core import XlayerError

__all__ = [
    "XlayerError",
    "generate",
    "min_hop_route",
    "evaluate",
    "run",
    "compare",
    "check",
    "project_simplex",
]


def generate(**gen):
    """Draw an instance. Keyword arguments are generator keys (nodes, seed, cost, ...)."""
    return json.loads(_core.generate(json.dumps(gen)))


def min_hop_route(network):
    return json.loads(_core.min_hop_route(json.dumps(network)))


def evaluate(network, state):
    return json.loads(_core.evaluate(json.dumps(network), json.dumps(state)))


def run(network, state, algorithm=None, channel=None):
    """Optimise from `state`. `algorithm` uses the config keys (rt, pa, pc, cr, max_iterations, ...)."""
    return json.loads(
        _core.run(json.dumps(network), json.dumps(state), json.dumps(algorithm or {}), json.dumps(channel or {}))
    )


def compare(experiment):
    """Run an experiment config. Returns (summary dict, per-iteration CSV text, per-seed CSV text)."""
    summary, csv, seeds = _core.compare(json.dumps(experiment))
    return json.loads(summary), csv, seeds


def check(network, state, trials=50, seed=1, interior=True):
    return json.loads(_core.check(json.dumps(network), json.dumps(state), trials, seed, interior))


def project_simplex(y, weights=None, mass=1.0):
    return _core.project_simplex(list(y), list(weights) if weights is not None else [1.0] * len(y), mass)
