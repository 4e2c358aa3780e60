"""Veracity label schemes, scoring, mapping, and free-text label parsing.

Two schemes are supported: a three-way scheme (false / half / true) and a
six-way scheme (pants-fire through true). Labels are value objects tied to
their scheme; mixing schemes raises ``SchemeMismatchError``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple

from .errors import SchemeMismatchError, UnparseableLabelError


@dataclass(frozen=True)
class VeracityScheme:
    """An ordered label set. Order is least-true to most-true."""

    name: str
    labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate label identifiers in scheme")

    def __len__(self) -> int:
        return len(self.labels)

    def label(self, identifier: str) -> "VeracityLabel":
        return VeracityLabel.from_identifier(self, identifier)

    def all_labels(self) -> Tuple["VeracityLabel", ...]:
        return tuple(VeracityLabel(self, i) for i in range(len(self.labels)))

    def render_label_set(self) -> str:
        """Brace-delimited listing used verbatim in prompts, e.g. ``{false, half, true}``."""
        return "{" + ", ".join(self.labels) + "}"


THREE_WAY = VeracityScheme("three_way", ("false", "half", "true"))
SIX_WAY = VeracityScheme(
    "six_way",
    ("pants-fire", "false", "barely-true", "half-true", "mostly-true", "true"),
)

_SCHEMES = {s.name: s for s in (THREE_WAY, SIX_WAY)}

# Loader-facing aliases: some sources spell the middle three-way class "half-true".
_THREE_WAY_ALIASES = {"half-true": "half"}


def scheme_by_name(name: str) -> VeracityScheme:
    try:
        return _SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown label scheme: {name!r}") from None


@dataclass(frozen=True)
class VeracityLabel:
    scheme: VeracityScheme
    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.index < len(self.scheme):
            raise ValueError(f"label index {self.index} out of range for {self.scheme.name}")

    @property
    def identifier(self) -> str:
        return self.scheme.labels[self.index]

    @classmethod
    def from_identifier(cls, scheme: VeracityScheme, identifier: str) -> "VeracityLabel":
        ident = identifier.strip().lower()
        if scheme is THREE_WAY or scheme.name == THREE_WAY.name:
            ident = _THREE_WAY_ALIASES.get(ident, ident)
        try:
            return cls(scheme, scheme.labels.index(ident))
        except ValueError:
            raise UnparseableLabelError(
                f"{identifier!r} is not a label of scheme {scheme.name}"
            ) from None

    def __str__(self) -> str:
        return self.identifier


def map_six_to_three(label: VeracityLabel) -> VeracityLabel:
    """Collapse a six-way label onto the three-way scheme.

    pants-fire, false, barely-true -> false; half-true -> half;
    mostly-true, true -> true.
    """
    if label.scheme.name != SIX_WAY.name:
        raise SchemeMismatchError("map_six_to_three expects a six_way label")
    if label.index <= 2:
        return VeracityLabel(THREE_WAY, 0)
    if label.index == 3:
        return VeracityLabel(THREE_WAY, 1)
    return VeracityLabel(THREE_WAY, 2)


def label_to_score(label: VeracityLabel) -> float:
    """Numeric veracity score: 0/2.5/5 for three_way, ordinal 0..5 for six_way."""
    if label.scheme.name == THREE_WAY.name:
        return (0.0, 2.5, 5.0)[label.index]
    if label.scheme.name == SIX_WAY.name:
        return float(label.index)
    raise SchemeMismatchError(f"no score mapping for scheme {label.scheme.name}")


def max_score(scheme: VeracityScheme) -> float:
    return max(label_to_score(lab) for lab in scheme.all_labels())


def parse_label_string(text: str, scheme: VeracityScheme) -> VeracityLabel:
    """Resolve model output text to a label of ``scheme``.

    The whole string (after trimming whitespace and surrounding punctuation,
    case-insensitively) is tried as an exact identifier first. Otherwise the
    longest identifier that occurs in the text as a standalone token wins, so
    "mostly-true" beats the "true" inside it.
    """
    normalized = text.strip().lower()
    exact = normalized.strip(" \t\r\n.,;:!?\"'()[]")
    if scheme.name == THREE_WAY.name:
        exact = _THREE_WAY_ALIASES.get(exact, exact)
    if exact in scheme.labels:
        return VeracityLabel(scheme, scheme.labels.index(exact))
    # Longest-first substring pass; token boundaries keep "true" from
    # matching inside "untrue" or "mostly-true".
    for ident in sorted(scheme.labels, key=len, reverse=True):
        pattern = r"(?<![a-z0-9-])" + re.escape(ident) + r"(?![a-z0-9-])"
        if re.search(pattern, normalized):
            return VeracityLabel(scheme, scheme.labels.index(ident))
    raise UnparseableLabelError(
        f"could not find a {scheme.name} label in {text!r}"
    )
