"""Prompt template packs: task kind -> description / query / answer strings."""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

PARTS = ("description", "query", "answer")


class TemplateError(Exception):
    pass


@dataclass(frozen=True)
class TemplatePack:
    version: str
    tasks: Mapping[str, Mapping[str, str]]

    def template(self, kind: str, part: str, directed: bool = False) -> str:
        try:
            entry = self.tasks[kind]
        except KeyError:
            raise TemplateError(f"no template for task kind {kind!r}") from None
        if directed and f"{part}_directed" in entry:
            return entry[f"{part}_directed"]
        if part not in entry:
            raise TemplateError(f"template for {kind!r} lacks a {part!r} entry")
        return entry[part]

    def render(self, kind: str, part: str, slots: Mapping[str, Any], directed: bool = False) -> str:
        text = self.template(kind, part, directed)
        unbound = placeholders(text) - set(slots)
        if unbound:
            raise TemplateError(f"{kind}.{part}: unbound placeholders {sorted(unbound)}")
        return text.format(**slots)


def placeholders(text: str) -> set[str]:
    return {name for _, name, _, _ in string.Formatter().parse(text) if name}


def _from_data(data: Any, origin: str) -> TemplatePack:
    if not isinstance(data, dict) or "version" not in data or "tasks" not in data:
        raise TemplateError(f"{origin}: template pack needs 'version' and 'tasks'")
    for kind, entry in data["tasks"].items():
        missing = [p for p in PARTS if p not in entry]
        if missing:
            raise TemplateError(f"{origin}: {kind} lacks {missing}")
    return TemplatePack(str(data["version"]), data["tasks"])


@lru_cache(maxsize=1)
def default_pack() -> TemplatePack:
    text = resources.files("gfmforge.textualize").joinpath("templates/default.json").read_text("utf-8")
    return _from_data(json.loads(text), "built-in templates")


def load_pack(path: str | Path | None) -> TemplatePack:
    """Built-in pack, with task entries overridden by the pack at ``path`` if given."""
    base = default_pack()
    if path is None:
        return base
    try:
        data = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise TemplateError(f"{path}: {exc}") from None
    user = _from_data(data, str(path))
    merged = {**base.tasks, **user.tasks}
    return TemplatePack(user.version, merged)
