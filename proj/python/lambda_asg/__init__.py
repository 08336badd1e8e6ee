"""Simulators and exact oracles for the Lambda-asymmetric Moran model.

Measures are passed as lists of ``(location, mass)`` pairs and couplings as
lists of ``(y, z, mass)`` triples.
"""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, _check_measures, _run_experiment


def run_experiment(config, output_dir=None, seed=None, threads=1):
    """Run an experiment config (dict); returns ``(exit_code, log_text)``."""
    return _run_experiment(_json.dumps(config), output_dir, seed, threads)


def check_measures(config):
    """Validation report (dict) for the measures of a config dict."""
    return _json.loads(_check_measures(_json.dumps(config)))
