"""Text cleaning for Brazilian legal documents.

Two cleaners are provided. :func:`clean` is the general one: it masks legal
entities (lawsuit numbers, dates, currency amounts, OAB ids, emails, URLs,
bare numbers) with bracketed placeholders, lowercases, detaches punctuation
from words, and collapses whitespace, so that ``str.split`` afterwards is a
tokenizer. :func:`clean_bert` is minimal: it only drops control characters
and normalizes whitespace, preserving case.

Both functions are idempotent and safe to re-run on already-clean text.

The entity patterns are a documented reconstruction, not an attempt at
bit-compatibility with any other cleaner:

* ``process_number``: the CNJ unified lawsuit numbering shape
  ``NNNNNNN-DD.AAAA.J.TR.OOOO``.
* ``date``: ``DD/MM/YYYY`` (also 2-digit years) and the written form
  ``D de <month> de YYYY``.
* ``currency``: ``R$`` amounts with Brazilian thousand/decimal separators.
* ``oab_id``: ``OAB`` followed by a state code and a registration number.
* ``email`` / ``url``: the usual shapes.
* ``generic_number``: any remaining digit run (with ``.``/``,`` separators),
  matched last so the specific entities above win.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field

_MONTHS = (
    "janeiro|fevereiro|março|marco|abril|maio|junho|julho|agosto"
    "|setembro|outubro|novembro|dezembro"
)

# (entity name, placeholder tag, pattern) in masking precedence order:
# longest/most specific shapes first, bare numbers last.
_ENTITY_PATTERNS: tuple[tuple[str, str, re.Pattern], ...] = (
    ("url", "url", re.compile(r"(?:https?://|www\.)[^\s]+", re.IGNORECASE)),
    ("email", "email", re.compile(r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+")),
    (
        "process_number",
        "numero_processo",
        re.compile(r"\d{7}-\d{2}\.\d{4}\.\d\.\d{2}\.\d{4}"),
    ),
    (
        "date",
        "data",
        re.compile(
            rf"\b\d{{1,2}}\s+de\s+(?:{_MONTHS})\s+de\s+\d{{4}}\b"
            r"|\b\d{1,2}/\d{1,2}/\d{2,4}\b",
            re.IGNORECASE,
        ),
    ),
    (
        "currency",
        "valor",
        re.compile(r"R\$\s*\d{1,3}(?:\.\d{3})*(?:,\d+)?|R\$\s*\d+(?:,\d+)?", re.IGNORECASE),
    ),
    (
        "oab_id",
        "oab",
        re.compile(
            r"\bOAB\s*[/-]?\s*[A-Za-z]{2}\s*(?:n?[ºo°.]\s*)?\d+(?:\.\d+)*",
            re.IGNORECASE,
        ),
    ),
    ("generic_number", "numero", re.compile(r"\d+(?:[.,]\d+)*")),
)

ENTITY_NAMES = tuple(name for name, _, _ in _ENTITY_PATTERNS)

_PLACEHOLDER_RE = re.compile(r"\[[a-z_]+\]")
_PUNCT_RE = re.compile(r"([^\w\s])")
_SPACES_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class CleanConfig:
    """Options for :func:`clean`.

    ``placeholder_style`` must contain one ``{}`` slot for the entity tag;
    the default produces tokens like ``[numero_processo]``. An empty
    ``mask_entities`` set disables masking entirely.
    """

    lowercase: bool = True
    mask_entities: frozenset[str] = field(default_factory=lambda: frozenset(ENTITY_NAMES))
    placeholder_style: str = "[{}]"

    def __post_init__(self) -> None:
        unknown = set(self.mask_entities) - set(ENTITY_NAMES)
        if unknown:
            raise ValueError(
                f"unknown entity classes {sorted(unknown)}; known: {list(ENTITY_NAMES)}"
            )
        probe = self.placeholder_style.format("x")
        if _SPACES_RE.search(probe):
            raise ValueError("placeholder_style must not produce whitespace")


DEFAULT_CLEAN_CONFIG = CleanConfig()


def _placeholder_re(style: str) -> re.Pattern:
    # Matches any placeholder the configured style can produce, so padding
    # and re-cleaning leave placeholder tokens intact.
    if style == "[{}]":
        return _PLACEHOLDER_RE
    head, _, tail = style.partition("{}")
    return re.compile(re.escape(head) + r"[a-z_]+" + re.escape(tail))


def _pad_punctuation(text: str, protect: re.Pattern) -> str:
    # Placeholders are kept intact; everything else gets punctuation
    # detached so that whitespace splitting yields clean tokens.
    parts = []
    last = 0
    for match in protect.finditer(text):
        parts.append(_PUNCT_RE.sub(r" \1 ", text[last : match.start()]))
        parts.append(" " + match.group(0) + " ")
        last = match.end()
    parts.append(_PUNCT_RE.sub(r" \1 ", text[last:]))
    return "".join(parts)


def clean(text: str, config: CleanConfig = DEFAULT_CLEAN_CONFIG) -> str:
    """General cleaner: mask entities, lowercase, detach punctuation.

    Suitable as the preprocessing step before phrase detection and
    embedding training. Idempotent; empty input gives empty output.
    """
    out = text
    for name, tag, pattern in _ENTITY_PATTERNS:
        if name in config.mask_entities:
            out = pattern.sub(config.placeholder_style.format(tag), out)
    if config.lowercase:
        out = out.lower()
    out = _pad_punctuation(out, _placeholder_re(config.placeholder_style))
    return _SPACES_RE.sub(" ", out).strip()


def clean_bert(text: str) -> str:
    """Minimal cleaner: drop control characters, collapse whitespace.

    Case is preserved and nothing is masked.
    """
    out = _SPACES_RE.sub(" ", text)
    out = "".join(ch for ch in out if unicodedata.category(ch) != "Cc")
    return _SPACES_RE.sub(" ", out).strip()


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization of already-cleaned text."""
    return text.split()
