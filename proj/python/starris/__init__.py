"""NOMA-assisted STAR-RIS downlink simulator with a DDPG optimizer."""

import json as _json

try:
    from . import _core  # wheel layout: starris/_core.so
except ImportError:  # cmake layout: build/python/_core.so on PYTHONPATH
    import _core

_names = [n for n in dir(_core) if not n.startswith("_")]
globals().update({n: getattr(_core, n) for n in _names})


def config(overrides=None):
    """Resolve a config given as a dict, JSON text or None; returns the full echo text."""
    if overrides is None:
        overrides = {}
    if isinstance(overrides, dict):
        overrides = _json.dumps(overrides)
    return _core.resolve_config(overrides)


def config_dict(overrides=None):
    """Same as config(), parsed back into a dict."""
    return _json.loads(config(overrides))


__all__ = _names + ["config", "config_dict"]
