"""Response database keyed by topic category and detected quadrant.

File format: ``[key]`` section headers followed by one response per line.
Blank lines and lines starting with ``#`` are ignored.  Keys::

    [HAHV HALV]       topic category, detected quadrant (empathetic mode)
    [neutral LAHV]    topic category (neutral mode)
    [prompt LALV]     optional opening prompts for a topic category

All 16 empathetic keys and all 4 neutral keys must be present and non-empty.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ParseError, ValidationError
from ..signals import Quadrant

DEFAULT_PROMPT = "Tell me about this picture and how it makes you feel."


@dataclass(frozen=True)
class ResponseDB:
    empathetic: dict  # (topic Quadrant, detected Quadrant) -> tuple[str, ...]
    neutral: dict  # topic Quadrant -> tuple[str, ...]
    prompts: dict = field(default_factory=dict)

    def __post_init__(self):
        for topic in Quadrant:
            if not self.neutral.get(topic):
                raise ValidationError(f"response DB lacks neutral responses for {topic.value}")
            for q in Quadrant:
                if not self.empathetic.get((topic, q)):
                    raise ValidationError(
                        f"response DB lacks responses for topic {topic.value}, emotion {q.value}"
                    )

    def prompt(self, topic: Quadrant, i: int = 0) -> str:
        options = self.prompts.get(topic)
        return options[i % len(options)] if options else DEFAULT_PROMPT

    def keys(self) -> list[tuple[str, ...]]:
        out = [(t.value, q.value) for t in Quadrant for q in Quadrant]
        out += [("neutral", t.value) for t in Quadrant]
        return out

    def lookup(self, key: tuple[str, ...]) -> tuple[str, ...]:
        if key[0] == "neutral":
            return self.neutral[Quadrant(key[1])]
        return self.empathetic[(Quadrant(key[0]), Quadrant(key[1]))]

    def dumps(self) -> str:
        parts = []
        for key in self.keys():
            parts.append(f"[{' '.join(key)}]")
            parts.extend(self.lookup(key))
            parts.append("")
        for topic, prompts in sorted(self.prompts.items()):
            parts.append(f"[prompt {topic.value}]")
            parts.extend(prompts)
            parts.append("")
        return "\n".join(parts)


def parse_response_db(text: str, where: str = "<responses>") -> ResponseDB:
    empathetic: dict = {}
    neutral: dict = {}
    prompts: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            words = line[1:-1].split()
            try:
                if len(words) != 2:
                    raise ValueError
                if words[0] == "neutral":
                    current = neutral.setdefault(Quadrant(words[1]), [])
                elif words[0] == "prompt":
                    current = prompts.setdefault(Quadrant(words[1]), [])
                else:
                    current = empathetic.setdefault((Quadrant(words[0]), Quadrant(words[1])), [])
            except ValueError:
                raise ParseError(f"bad section header {line!r}", location=f"{where}:{lineno}") from None
            continue
        if current is None:
            raise ParseError("response text before any section header", location=f"{where}:{lineno}")
        current.append(line)
    freeze = lambda d: {k: tuple(v) for k, v in d.items()}  # noqa: E731
    return ResponseDB(freeze(empathetic), freeze(neutral), freeze(prompts))


def load_response_db(path=None) -> ResponseDB:
    """Load a response file, or the bundled sample database when ``path`` is None."""
    if path is None:
        text = resources.files("empathic").joinpath("data/responses.txt").read_text(encoding="utf-8")
        return parse_response_db(text, "responses.txt")
    path = Path(path)
    return parse_response_db(path.read_text(encoding="utf-8"), str(path))
