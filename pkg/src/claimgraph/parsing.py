"""Tolerant extraction of dictionary-shaped model replies."""
from __future__ import annotations

import ast
import json
from typing import Optional


def coerce_mapping(text: str) -> Optional[dict]:
    """Best-effort dict from a model reply.

    Tries strict JSON, then Python literal syntax, then the outermost brace
    span inside surrounding prose. Returns None when nothing dict-shaped
    parses.
    """
    candidates = [text]
    start, end = text.find("{"), text.rfind("}")
    if 0 <= start < end:
        candidates.append(text[start : end + 1])
    for candidate in candidates:
        for loader in (json.loads, ast.literal_eval):
            try:
                value = loader(candidate)
            except (ValueError, SyntaxError):
                continue
            if isinstance(value, dict):
                return value
    return None
