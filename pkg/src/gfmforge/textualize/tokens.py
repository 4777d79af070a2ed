"""Tokenizer-independent length measure for prompts."""

from __future__ import annotations

import re
from typing import Callable

_SIMPLE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

TOKENIZERS: dict[str, Callable[[str], list[str]]] = {
    # word runs and single punctuation marks
    "simple": _SIMPLE.findall,
    "whitespace": str.split,
}


def count_tokens(text: str, rule: str | Callable[[str], list[str]] = "simple") -> int:
    tokenize = TOKENIZERS[rule] if isinstance(rule, str) else rule
    return len(tokenize(text))
