"""Small bundled corpora: knowledge files, a price table and hypothesis files."""

from importlib.resources import files
from pathlib import Path

NAMES = ("updown.kb", "accelerated_up.kb", "cardholder.kb", "four_days.csv", "four_days_rules.txt")


def path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(f"no fixture named {name!r}; choose from {NAMES}")
    return Path(str(files(__name__) / name))
