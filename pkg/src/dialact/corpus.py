"""Tagged-utterance datasets: parsing, cleaning, tokenization, statistics.

Two text sources share one dataset model: Switchboard-style utterance files
(telephone speech with disfluency markup) and GitHub issue comments (prose
mixed with commands, paths and code).  Each source gets its own tokenizer
mode; the on-disk interchange format is JSON Lines with one utterance per
line.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .tags import ContinuationTagError, DaTag, TagSet, default_tagset, normalize_tag

TOKENIZER_MODES = ("speech", "github")

DATASET_FIELDS = ("dialogue_id", "turn_index", "speaker", "text", "tag", "raw_tag")


class CorpusError(ValueError):
    """Malformed corpus input."""


class ParseError(CorpusError):
    """Raised with a 1-based line number when a source file is malformed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Utterance:
    """A single tagged conversational turn."""

    dialogue_id: str
    turn_index: int
    speaker: str
    text: str
    tokens: tuple[str, ...]
    tag: DaTag | None = None
    raw_tag: str | None = None


@dataclass(frozen=True)
class CorpusStats:
    n_categories: int
    n_utterances: int
    n_tokens: int  # distinct token types, not total occurrences


@dataclass(frozen=True)
class Dataset:
    """Ordered utterances grouped by dialogue, plus the tagset they use."""

    name: str
    tokenizer_mode: str
    utterances: tuple[Utterance, ...]
    tagset: TagSet = field(default_factory=default_tagset, repr=False)

    def __post_init__(self):
        if self.tokenizer_mode not in TOKENIZER_MODES:
            raise CorpusError(f"unknown tokenizer mode: {self.tokenizer_mode!r}")
        seen_done: set[str] = set()
        current = None
        expected = 0
        for utt in self.utterances:
            if utt.dialogue_id != current:
                if utt.dialogue_id in seen_done:
                    raise CorpusError(
                        f"dialogue {utt.dialogue_id!r} is not contiguous"
                    )
                if current is not None:
                    seen_done.add(current)
                current = utt.dialogue_id
                expected = 0
            if utt.turn_index != expected:
                raise CorpusError(
                    f"dialogue {utt.dialogue_id!r}: expected turn_index "
                    f"{expected}, got {utt.turn_index}"
                )
            expected += 1

    def __len__(self) -> int:
        return len(self.utterances)

    def dialogue_ids(self) -> tuple[str, ...]:
        """Distinct dialogue ids in first-appearance order."""
        out: list[str] = []
        for utt in self.utterances:
            if not out or out[-1] != utt.dialogue_id:
                out.append(utt.dialogue_id)
        return tuple(out)

    def dialogues(self) -> list[tuple[str, list[Utterance]]]:
        groups: list[tuple[str, list[Utterance]]] = []
        for utt in self.utterances:
            if not groups or groups[-1][0] != utt.dialogue_id:
                groups.append((utt.dialogue_id, []))
            groups[-1][1].append(utt)
        return groups


# ---------------------------------------------------------------------------
# Switchboard-format utterance files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwdaRecord:
    speaker: str
    raw_tag: str
    text: str
    dialogue_id: str
    turn_index: int


_UTT_LINE_RE = re.compile(
    r"^(?P<tag>\S+)\s+(?P<speaker>[^.\s]+)\.(?P<turn>\d+)\s+utt(?P<utt>\d+):\s*(?P<text>.*?)\s*$"
)
_UTT_HINT_RE = re.compile(r"\butt\d+:")
_FILENAME_RE = re.compile(r"FILENAME:\s*(\S+)")
_SEPARATOR_RE = re.compile(r"^=+\s*$")


def parse_swda_file(text: str) -> list[SwdaRecord]:
    """Parse one Switchboard-style utterance file.

    The file starts with a free-form header block; utterance lines look like
    ``sd A.1 utt1: I don't have any kids. /``.  Header and blank lines are
    skipped.  Once utterances (or a ``===`` separator) have started, any
    non-blank line that does not parse raises :class:`ParseError` with its
    line number; before that, a header line is only rejected if it clearly
    attempts the utterance layout (contains ``uttN:``) but lacks a tag or
    speaker field.
    """
    records: list[SwdaRecord] = []
    dialogue_id = ""
    body_started = False
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        m = _UTT_LINE_RE.match(line)
        if m:
            body_started = True
            records.append(
                SwdaRecord(
                    speaker=m.group("speaker"),
                    raw_tag=m.group("tag"),
                    text=m.group("text"),
                    dialogue_id=dialogue_id,
                    turn_index=len(records),
                )
            )
            continue
        if _SEPARATOR_RE.match(line.strip()):
            body_started = True
            continue
        if body_started or _UTT_HINT_RE.search(line):
            raise ParseError(line_no, f"malformed utterance line: {line.strip()!r}")
        fn = _FILENAME_RE.search(line)
        if fn:
            dialogue_id = fn.group(1)
    if dialogue_id:
        records = [replace(r, dialogue_id=dialogue_id) for r in records]
    return records


_BRACE_MARKER_RE = re.compile(r"\{[A-Za-z]?\s*|\}")
_ANGLE_EVENT_RE = re.compile(r"<[^<>]*>")
_REPAIR_RE = re.compile(r"\[(?P<before>[^\[\]]*?)\+(?P<after>[^\[\]]*?)\]")
_WS_RE = re.compile(r"\s+")


def clean_speech_text(raw_text: str) -> str:
    """Strip Switchboard transcription markup, keeping the spoken words.

    Removes brace-group markers (``{F`` / ``{D`` / ... and ``}``) while
    keeping inner words, resolves repair brackets ``[ x + y ]`` to the
    repair side ``y``, drops angle-bracket events such as ``<laughter>``,
    and removes trailing ``/`` and ``--``.  Best effort only: unbalanced
    markup is stripped rather than rejected.
    """
    text = _ANGLE_EVENT_RE.sub(" ", raw_text)
    # innermost-first so nested repairs resolve deterministically
    while True:
        text, n = _REPAIR_RE.subn(lambda m: f" {m.group('after')} ", text)
        if n == 0:
            break
    text = _BRACE_MARKER_RE.sub(" ", text)
    text = text.replace("[", " ").replace("]", " ").replace("+", " ")
    text = _WS_RE.sub(" ", text).strip()
    while text.endswith("/") or text.endswith("--"):
        text = text[:-1] if text.endswith("/") else text[:-2]
        text = text.rstrip()
    return text


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

_TRAILING_PUNCT = ".,!?;:"
_URL_RE = re.compile(r"https?://\S+|www\.\S+")
_FENCED_RE = re.compile(r"```(.*?)```|~~~(.*?)~~~", re.DOTALL)
_INLINE_CODE_RE = re.compile(r"`([^`\n]+)`")
_COMMANDISH_CHARS = set("/-_.")


def _peel_trailing(word: str, punct: str) -> tuple[str, list[str]]:
    peeled: list[str] = []
    while word and word[-1] in punct:
        peeled.append(word[-1])
        word = word[:-1]
    peeled.reverse()
    return word, peeled


def _speech_tokens(text: str) -> list[str]:
    tokens: list[str] = []
    for word in text.lower().split():
        base, peeled = _peel_trailing(word, _TRAILING_PUNCT)
        if base:
            tokens.append(base)
        tokens.extend(peeled)
    return tokens


def _commandish(word: str) -> bool:
    # internal dot, slash/dash/underscore anywhere, or leading dot: treat the
    # token as a command/path and keep it verbatim (case preserved)
    if any(c in word for c in "/-_"):
        return True
    if "." in word[:-1]:
        return True
    return word.startswith(".")


def _github_tokens(text: str) -> list[str]:
    parts: list[tuple[bool, str]] = []  # (is_atomic, chunk)
    pos = 0

    def scan(pattern: re.Pattern, segment: str, atomic_group) -> list[tuple[bool, str]]:
        out: list[tuple[bool, str]] = []
        last = 0
        for m in pattern.finditer(segment):
            if m.start() > last:
                out.append((False, segment[last:m.start()]))
            out.append((True, atomic_group(m)))
            last = m.end()
        if last < len(segment):
            out.append((False, segment[last:]))
        return out

    parts = scan(_FENCED_RE, text, lambda m: (m.group(1) or m.group(2) or "").strip())
    expanded: list[tuple[bool, str]] = []
    for atomic, chunk in parts:
        if atomic:
            expanded.append((atomic, chunk))
        else:
            expanded.extend(scan(_INLINE_CODE_RE, chunk, lambda m: m.group(1).strip()))
    parts = expanded
    expanded = []
    for atomic, chunk in parts:
        if atomic:
            expanded.append((atomic, chunk))
        else:
            expanded.extend(scan(_URL_RE, chunk, lambda m: m.group(0)))

    tokens: list[str] = []
    for atomic, chunk in expanded:
        if atomic:
            if chunk:
                tokens.append(chunk)
            continue
        for word in chunk.split():
            base, peeled = _peel_trailing(word, ",;:!?")
            if base and _commandish(base):
                tokens.append(base)
            else:
                base, more = _peel_trailing(base, _TRAILING_PUNCT)
                if base:
                    tokens.append(base.lower())
                peeled = more + peeled
            tokens.extend(peeled)
    return tokens


def tokenize(text: str, mode: str) -> list[str]:
    """Split ``text`` into tokens under the given tokenizer mode.

    ``speech``: lowercase, whitespace split, trailing punctuation split off
    into its own tokens.  ``github``: additionally keeps fenced/inline code
    spans and URLs as single tokens and leaves command-like tokens
    (containing ``/``, ``-``, ``_`` or an internal ``.``) intact with their
    case preserved.  Never produces empty tokens.
    """
    if mode == "speech":
        return _speech_tokens(text)
    if mode == "github":
        return _github_tokens(text)
    raise CorpusError(f"unknown tokenizer mode: {mode!r}")


# ---------------------------------------------------------------------------
# Dataset assembly, interchange format, statistics
# ---------------------------------------------------------------------------

def resolve_continuations(
    records: Iterable[SwdaRecord], tagset: TagSet | None = None
) -> tuple[list[tuple[SwdaRecord, DaTag]], int]:
    """Normalize raw tags, resolving ``+`` continuations.

    A ``+`` segment inherits the tag of the same speaker's most recent
    previous utterance in the dialogue; unresolvable continuations are
    dropped.  Returns the surviving (record, tag) pairs plus the number of
    dropped records.
    """
    tagset = tagset or default_tagset()
    resolved: list[tuple[SwdaRecord, DaTag]] = []
    last_by_speaker: dict[tuple[str, str], DaTag] = {}
    dropped = 0
    for rec in records:
        key = (rec.dialogue_id, rec.speaker)
        try:
            tag = normalize_tag(rec.raw_tag, tagset)
        except ContinuationTagError:
            tag = last_by_speaker.get(key)
            if tag is None:
                dropped += 1
                continue
        resolved.append((rec, tag))
        last_by_speaker[key] = tag
    return resolved, dropped


def dataset_from_swda(
    records: Iterable[SwdaRecord],
    name: str = "swda",
    tagset: TagSet | None = None,
) -> tuple[Dataset, int]:
    """Build a speech-mode Dataset from parsed Switchboard records.

    Cleans transcription markup, resolves ``+`` continuations and renumbers
    turns consecutively per dialogue.  Returns the dataset and the count of
    dropped (unresolvable continuation) records.
    """
    tagset = tagset or default_tagset()
    resolved, dropped = resolve_continuations(records, tagset)
    utterances: list[Utterance] = []
    turn_counter: dict[str, int] = {}
    for rec, tag in resolved:
        text = clean_speech_text(rec.text)
        idx = turn_counter.get(rec.dialogue_id, 0)
        turn_counter[rec.dialogue_id] = idx + 1
        utterances.append(
            Utterance(
                dialogue_id=rec.dialogue_id,
                turn_index=idx,
                speaker=rec.speaker,
                text=text,
                tokens=tuple(tokenize(text, "speech")),
                tag=tag,
                raw_tag=rec.raw_tag,
            )
        )
    return Dataset(name, "speech", tuple(utterances), tagset), dropped


def save_dataset(dataset: Dataset, path) -> None:
    """Write the JSON Lines interchange format (UTF-8, one object per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        for utt in dataset.utterances:
            record = {
                "dialogue_id": utt.dialogue_id,
                "turn_index": utt.turn_index,
                "speaker": utt.speaker,
                "text": utt.text,
                "tag": utt.tag.label if utt.tag is not None else None,
                "raw_tag": utt.raw_tag,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_dataset(
    path,
    tokenizer_mode: str = "github",
    name: str | None = None,
    tagset: TagSet | None = None,
) -> Dataset:
    """Load a JSON Lines dataset file.

    Groups utterances by dialogue (first-appearance order), orders them by
    their stored ``turn_index`` and renumbers consecutively from 0.  Raises
    :class:`ParseError` for a missing field, a duplicate
    ``(dialogue_id, turn_index)`` pair, or an unknown tag label.
    """
    tagset = tagset or default_tagset()
    rows: dict[str, list[tuple[int, int, dict]]] = {}
    seen: set[tuple[str, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(line_no, f"invalid JSON: {e.msg}") from None
            for fld in DATASET_FIELDS:
                if fld not in obj:
                    raise ParseError(line_no, f"missing required field {fld!r}")
            key = (obj["dialogue_id"], obj["turn_index"])
            if key in seen:
                raise ParseError(line_no, f"duplicate (dialogue_id, turn_index): {key!r}")
            seen.add(key)
            if obj["tag"] is not None and obj["tag"] not in tagset:
                raise ParseError(line_no, f"unknown tag label {obj['tag']!r}")
            rows.setdefault(obj["dialogue_id"], []).append(
                (obj["turn_index"], line_no, obj)
            )

    utterances: list[Utterance] = []
    for dialogue_id, entries in rows.items():
        entries.sort(key=lambda e: e[0])
        for new_index, (_, _, obj) in enumerate(entries):
            text = obj["text"]
            utterances.append(
                Utterance(
                    dialogue_id=dialogue_id,
                    turn_index=new_index,
                    speaker=obj["speaker"],
                    text=text,
                    tokens=tuple(tokenize(text, tokenizer_mode)),
                    tag=tagset.by_label(obj["tag"]) if obj["tag"] is not None else None,
                    raw_tag=obj["raw_tag"],
                )
            )
    if name is None:
        name = str(path)
    return Dataset(name, tokenizer_mode, tuple(utterances), tagset)


def split_train_val(
    dataset: Dataset, val_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Deterministic dialogue-level split into (train, validation).

    At least one dialogue lands on each side; dialogues are never split, so
    no utterance can leak between the halves.
    """
    if not 0.0 < val_fraction < 1.0:
        raise CorpusError("val_fraction must be in (0, 1)")
    ids = list(dataset.dialogue_ids())
    if len(ids) < 2:
        raise CorpusError("need at least 2 dialogues to split")
    n_val = int(round(val_fraction * len(ids)))
    n_val = min(max(n_val, 1), len(ids) - 1)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    val_ids = {ids[i] for i in order[:n_val]}

    train_utts = tuple(u for u in dataset.utterances if u.dialogue_id not in val_ids)
    val_utts = tuple(u for u in dataset.utterances if u.dialogue_id in val_ids)
    train = Dataset(f"{dataset.name}/train", dataset.tokenizer_mode, train_utts, dataset.tagset)
    val = Dataset(f"{dataset.name}/val", dataset.tokenizer_mode, val_utts, dataset.tagset)
    return train, val


def dataset_stats(dataset: Dataset) -> CorpusStats:
    """Category / utterance / distinct-token-type counts."""
    types: set[str] = set()
    cats: set[int] = set()
    for utt in dataset.utterances:
        types.update(utt.tokens)
        if utt.tag is not None:
            cats.add(utt.tag.id)
    return CorpusStats(
        n_categories=len(cats),
        n_utterances=len(dataset.utterances),
        n_tokens=len(types),
    )
