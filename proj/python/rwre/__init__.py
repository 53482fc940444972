"""Random walks in random environments on coloured trees."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import Environment


def environment(doc):
    """Environment from a dict or a JSON string."""
    if isinstance(doc, dict):
        doc = _json.dumps(doc)
    return Environment.from_json(doc)
