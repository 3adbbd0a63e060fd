"""JSON schemas for the machine-readable CLI outputs."""

import json
from importlib import resources


def load(name: str) -> dict:
    """``load("ir")`` returns the parsed ``ir.schema.json``."""
    return json.loads(resources.files(__name__).joinpath(f"{name}.schema.json").read_text())
