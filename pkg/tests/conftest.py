"""Shared pytest setup: the project runs from its root, so put the root on sys.path."""

import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)


@pytest.fixture(autouse=True)
def run_from_root(monkeypatch):
    """Relative paths in config (settings, fixtures) resolve against the project root."""
    monkeypatch.chdir(ROOT)
