"""Bundled system files."""
from importlib import resources

from .fileformat import parse_system


def fixture_path(name: str):
    """Filesystem path of a bundled ``.pks`` file, e.g. ``"counterexample"``."""
    return resources.files("probweb") / "data" / f"{name}.pks"


def load_counterexample():
    """``(X1), (X2), (X3|X1,X2)`` with fair marginals and a deterministic-or-fair X3."""
    return parse_system(fixture_path("counterexample").read_text(encoding="utf-8"))


def load_inconsistent():
    """Two marginals that disagree on ``P(X1=1)`` (0.6 vs 0.4)."""
    return parse_system(fixture_path("inconsistent").read_text(encoding="utf-8"))
