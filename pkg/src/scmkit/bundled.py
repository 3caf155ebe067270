"""Access to the model files shipped with the package."""

from __future__ import annotations

from importlib import resources

from .core import Scm
from .dsl import parse


def names() -> tuple[str, ...]:
    """The bundled model names, without the ``.scm`` suffix."""
    data = resources.files(__package__) / "data"
    return tuple(sorted(
        entry.name[:-4] for entry in data.iterdir() if entry.name.endswith(".scm")))


def text(name: str) -> str:
    """The raw text of a bundled model."""
    return (resources.files(__package__) / "data" / f"{name}.scm").read_text(encoding="utf-8")


def load(name: str) -> Scm:
    """Parse and return a bundled model."""
    return parse(text(name))
