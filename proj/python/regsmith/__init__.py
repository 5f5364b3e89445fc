"""Exact cokernel statistics for random regular graph and digraph models.

The heavy lifting lives in the compiled extension; this package re-exports it
and adds a small convenience wrapper for experiment summaries.
"""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_experiment_json  # noqa: F401


def run_experiment(config_text):
    """Run an experiment config and return the summary as a dict."""
    return _json.loads(run_experiment_json(config_text))
