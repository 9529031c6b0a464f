"""Python front end for the slowdos core."""

import json
import os

from ._slowdos import balanced_accuracy, _evaluate, _read_trace, _simulate, _synth, _train

__all__ = ["balanced_accuracy", "synth", "read_trace", "evaluate", "train", "simulate"]


def synth(tool, out, clients=50, duration=600.0, benign_clients=500, seed=1, headers_only=True):
    """Write a labeled attack trace (plus sidecar) and return its counts."""
    return json.loads(_synth(tool, clients, duration, benign_clients, seed, os.fspath(out), headers_only))


def read_trace(path):
    return json.loads(_read_trace(os.fspath(path)))


def evaluate(path, config):
    """Run one scheme configuration (a dict) over a labeled trace."""
    return json.loads(_evaluate(os.fspath(path), json.dumps(config)))


def train(path, scheme, include_handshake=True):
    return json.loads(_train(os.fspath(path), scheme, include_handshake))


def simulate(path, config):
    return json.loads(_simulate(os.fspath(path), json.dumps(config)))
