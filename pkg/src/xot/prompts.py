"""Few-shot prompt templates loaded from plain text files.

A template file is a sequence of sections introduced by marker lines:

    [header]      optional instructions
    [example]     few-shot input, usually ending with the cue line
    [completion]  the matching few-shot output
    [query]       final block, may contain {{slot}} placeholders

Rendering joins header, ``input\\ncompletion`` exemplar blocks, and the
query with blank lines. The same template and slots always render to the
same bytes, which is what keeps recorded traces replayable.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

DEFAULT_EXEMPLAR_COUNT = 8

_MARKERS = ("[header]", "[example]", "[completion]", "[query]")
_SLOT_RE = re.compile(r"\{\{([a-zA-Z_][a-zA-Z0-9_]*)\}\}")


class PromptError(Exception):
    pass


class UnknownTemplate(PromptError):
    def __init__(self, template_id: str):
        super().__init__("no template named %r" % template_id)
        self.template_id = template_id


class MissingSlot(PromptError):
    def __init__(self, template_id: str, slot: str):
        super().__init__("template %r needs slot %r" % (template_id, slot))
        self.slot = slot


class TemplateFormatError(PromptError):
    pass


@dataclass(frozen=True)
class Template:
    id: str
    header: str
    exemplars: Tuple[Tuple[str, str], ...]
    query: str


def parse_template(text: str, template_id: str) -> Template:
    text = text.replace("\r\n", "\n")
    sections: list[Tuple[str, list[str]]] = []
    for line in text.split("\n"):
        if line.strip() in _MARKERS:
            sections.append((line.strip(), []))
        elif sections:
            sections[-1][1].append(line)
        elif line.strip():
            raise TemplateFormatError(
                "%s: content before first section marker" % template_id
            )

    header = ""
    query: Optional[str] = None
    exemplars: list[Tuple[str, str]] = []
    pending_input: Optional[str] = None
    for marker, lines in sections:
        body = "\n".join(lines).strip("\n")
        if marker == "[example]":
            if pending_input is not None:
                raise TemplateFormatError(
                    "%s: [example] without [completion]" % template_id
                )
            pending_input = body
        elif marker == "[completion]":
            if pending_input is None:
                raise TemplateFormatError(
                    "%s: [completion] without [example]" % template_id
                )
            exemplars.append((pending_input, body))
            pending_input = None
        elif marker == "[header]":
            header = body
        else:
            query = body
    if pending_input is not None:
        raise TemplateFormatError("%s: trailing [example]" % template_id)
    if query is None:
        raise TemplateFormatError("%s: missing [query] section" % template_id)
    return Template(template_id, header, tuple(exemplars), query)


def select_exemplars(
    template: Template,
    count: Optional[int] = None,
    seed: Optional[int] = None,
) -> Tuple[Tuple[str, str], ...]:
    """First ``count`` exemplars, or a seed-determined sample of them."""
    pool = list(template.exemplars)
    k = min(count if count is not None else DEFAULT_EXEMPLAR_COUNT, len(pool))
    if seed is None:
        return tuple(pool[:k])
    return tuple(random.Random(seed).sample(pool, k))


def render_template(
    template: Template,
    slots: Mapping[str, object],
    exemplar_count: Optional[int] = None,
    exemplar_seed: Optional[int] = None,
) -> str:
    parts = []
    if template.header:
        parts.append(template.header)
    for example, completion in select_exemplars(template, exemplar_count, exemplar_seed):
        parts.append(example + "\n" + completion)
    parts.append(template.query)
    prompt = "\n\n".join(parts)

    def fill(match: re.Match) -> str:
        name = match.group(1)
        if name not in slots:
            raise MissingSlot(template.id, name)
        return str(slots[name])

    return _SLOT_RE.sub(fill, prompt)


class PromptLibrary:
    """All templates under one directory, keyed by file stem."""

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else Path(__file__).parent / "prompts"
        self._templates: Dict[str, Template] = {}
        for path in sorted(self.root.glob("*.txt")):
            raw = path.read_text(encoding="utf-8")
            self._templates[path.stem] = parse_template(raw, path.stem)

    def ids(self) -> Tuple[str, ...]:
        return tuple(sorted(self._templates))

    def get(self, template_id: str) -> Template:
        try:
            return self._templates[template_id]
        except KeyError:
            raise UnknownTemplate(template_id) from None

    def render(
        self,
        template_id: str,
        slots: Mapping[str, object],
        exemplar_count: Optional[int] = None,
        exemplar_seed: Optional[int] = None,
    ) -> str:
        return render_template(
            self.get(template_id), slots, exemplar_count, exemplar_seed
        )
