"""Time-bin entanglement source simulator.

Configs are plain dicts with the same layout as the JSON config files.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    Error,
    NumericError,
    RangeError,
    bandwidths,
    dof_convert,
    fidelity,
    ideal_target,
    pm_intensity,
    qpm_period_from_indices,
    reconstruct_exact,
    shg_efficiency_theory,
    werner_state,
)

__all__ = [
    "ConfigError",
    "Error",
    "NumericError",
    "RangeError",
    "bandwidths",
    "default_config",
    "dof_convert",
    "expected_rates",
    "fidelity",
    "fit_fringe",
    "fourfold_rate_oracle",
    "ideal_target",
    "load_config",
    "pm_intensity",
    "predicted_state",
    "qpm_period_from_indices",
    "reconstruct_exact",
    "run_experiment",
    "run_tomography",
    "shg_efficiency_theory",
    "simulate_fringe",
    "werner_state",
]


def _dump(config):
    if config is None:
        config = {"schema_version": 1}
    return json.dumps(config)


def default_config():
    return json.loads(_core.default_config())


def load_config(path):
    """Config file as a dict with every field filled; table paths made absolute."""
    return json.loads(_core.load_config(str(path)))


def run_experiment(config=None, pulses=100_000, threads=1, stream_id=0):
    """Monte Carlo counts record (dict, schema tbent.counts/1)."""
    return json.loads(_core.run_experiment(_dump(config), pulses, threads, stream_id))


def expected_rates(config=None):
    return _core.expected_rates(_dump(config))


def fourfold_rate_oracle(config=None):
    return _core.fourfold_rate_oracle(_dump(config))


def simulate_fringe(config=None, order=4, basis="pm", points=37, pulses=100_000, threads=1):
    """(theta_s, theta_i list, counts list), angles in rad."""
    return _core.simulate_fringe(_dump(config), order, basis, points, pulses, threads)


def fit_fringe(theta_i, values, order=4, bootstrap=0, seed=1):
    return _core.fit_fringe(list(theta_i), list(values), order, bootstrap, seed)


def run_tomography(config=None, qubits=2, pulses=100_000, scheme="pauli", bootstrap=0, threads=1):
    return _core.run_tomography(_dump(config), qubits, pulses, scheme, bootstrap, threads)


def predicted_state(config=None, qubits=2):
    return _core.predicted_state(_dump(config), qubits)
