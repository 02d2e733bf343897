"""The 42-class DAMSL act-tag inventory and raw-tag normalization.

The inventory ships as a data file (``data/damsl_tags.json``) so its exact
contents can be audited.  Raw Switchboard act tags carry secondary
annotations (``sd^e``, ``sv@``, ``sd(^q)``, multi-part ``sd,sv``) which
:func:`normalize_tag` collapses onto the 42 canonical labels.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources


class TagError(ValueError):
    """Base class for act-tag problems."""


class UnknownTagError(TagError):
    """Raw tag falls outside the documented inventory."""

    def __init__(self, raw_tag: str):
        super().__init__(f"unknown act tag: {raw_tag!r}")
        self.raw_tag = raw_tag


class ContinuationTagError(TagError):
    """Raw tag '+' marks a segment continuation, not an act of its own.

    Callers resolve it against the same speaker's previous utterance; see
    :func:`dialact.corpus.resolve_continuations`.
    """

    def __init__(self) -> None:
        super().__init__("'+' is a segment continuation, not a dialogue act")


@dataclass(frozen=True)
class DaTag:
    """One of the 42 canonical dialogue-act classes."""

    id: int
    label: str
    description: str

    def __str__(self) -> str:
        return self.label


class TagSet:
    """Immutable collection of the 42 canonical tags with lookup helpers."""

    def __init__(self, tags: list[DaTag], raw_members: dict[str, str]):
        ids = sorted(t.id for t in tags)
        if ids != list(range(len(tags))):
            raise TagError("tag ids must be a bijection onto 0..n-1")
        self._tags = tuple(sorted(tags, key=lambda t: t.id))
        self._by_label = {t.label: t for t in self._tags}
        if len(self._by_label) != len(self._tags):
            raise TagError("duplicate tag labels in inventory")
        # raw source tag -> canonical label
        self._raw_to_label = dict(raw_members)

    def __len__(self) -> int:
        return len(self._tags)

    def __iter__(self):
        return iter(self._tags)

    def __contains__(self, label: str) -> bool:
        return label in self._by_label

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self._tags)

    def by_id(self, tag_id: int) -> DaTag:
        return self._tags[tag_id]

    def by_label(self, label: str) -> DaTag:
        try:
            return self._by_label[label]
        except KeyError:
            raise UnknownTagError(label) from None

    def canonical_label_for_raw(self, raw: str) -> str | None:
        return self._raw_to_label.get(raw)


# Raw tags listed here keep their caret part instead of having it stripped.
_CARET_PRESERVING = {"qy^d", "qw^d", "b^m"}
# Caret-annotated raw tags with their own canonical home.
_CARET_SPECIAL = {"nn^e": "ng", "ny^e": "na"}

_SPLIT_RE = re.compile(r"\s*[,;]\s*")
_CARET_SUFFIX_RE = re.compile(r"(.)\^.*")
_JUNK_CHARS_RE = re.compile(r"[()@*]")


@lru_cache(maxsize=1)
def default_tagset() -> TagSet:
    """The 42-class inventory shipped with the package."""
    text = resources.files("dialact.data").joinpath("damsl_tags.json").read_text("utf-8")
    payload = json.loads(text)
    tags = []
    raw_members: dict[str, str] = {}
    for entry in payload["tags"]:
        tags.append(DaTag(entry["id"], entry["label"], entry["description"]))
        for raw in entry["raw_members"]:
            raw_members[raw] = entry["label"]
    return TagSet(tags, raw_members)


def normalize_tag(raw_tag: str, tagset: TagSet | None = None) -> DaTag:
    """Map a raw Switchboard act tag onto its canonical 42-class tag.

    Rules, applied in order:

    1. multi-part tags (comma/semicolon separated) keep the first part;
    2. ``+`` raises :class:`ContinuationTagError` (resolved by the caller);
    3. ``qy^d``/``qw^d``/``b^m`` are classes of their own; ``nn^e``/``ny^e``
       map to ``ng``/``na``;
    4. otherwise the caret suffix is stripped (``sd^e`` -> ``sd``),
       ``()@*`` decorations and trailing ``-`` are removed, and the merged
       groups (``fo/o/fw/"/by/bc``, ``arp/nd``, ``aap/am``, ``oo/co/cc``,
       ``qr``->``qy``, ``fe``->``ba``, ``fx``->``sv``) are collapsed.

    Raises :class:`UnknownTagError` for anything left outside the inventory.
    """
    if tagset is None:
        tagset = default_tagset()
    if not raw_tag or not raw_tag.strip():
        raise UnknownTagError(raw_tag)

    tag = _SPLIT_RE.split(raw_tag.strip())[0]
    if tag == "+":
        raise ContinuationTagError()

    if tag in _CARET_PRESERVING:
        return tagset.by_label(tag)
    if tag in _CARET_SPECIAL:
        return tagset.by_label(_CARET_SPECIAL[tag])

    tag = _CARET_SUFFIX_RE.sub(r"\1", tag)
    tag = _JUNK_CHARS_RE.sub("", tag).strip()
    while tag.endswith("-") and len(tag) > 1:
        tag = tag[:-1].strip()

    canonical = tagset.canonical_label_for_raw(tag)
    if canonical is None:
        raise UnknownTagError(raw_tag)
    return tagset.by_label(canonical)
