"""Bundled example domains, problems, scenarios and choice scripts."""
from __future__ import annotations

from importlib import resources


def fixture_text(name: str) -> str:
    return (resources.files(__package__) / name).read_text(encoding="utf-8")


def fixture_path(name: str):
    return resources.files(__package__) / name
