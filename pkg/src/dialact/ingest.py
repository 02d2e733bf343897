"""GitHub issue-comment collection and segmentation into utterances.

Network access goes through an injectable transport so every test (and the
bundled fixtures) runs offline; the live transport authenticates with the
``GH_TOKEN`` environment variable.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Protocol

import requests

GITHUB_API = "https://api.github.com"
PER_PAGE = 100
MAX_RETRIES = 3
DEFAULT_FETCH_WORKERS = 4


class IngestError(RuntimeError):
    pass


class AuthenticationError(IngestError):
    pass


class NotFoundError(IngestError):
    pass


class RateLimitExhausted(IngestError):
    pass


@dataclass(frozen=True)
class IssueRef:
    owner: str
    repo: str
    issue_number: int

    def __post_init__(self):
        if not self.owner or not self.repo or self.issue_number < 1:
            raise IngestError(f"invalid issue reference: {self!r}")

    @property
    def dialogue_id(self) -> str:
        return f"{self.owner}/{self.repo}#{self.issue_number}"


@dataclass(frozen=True)
class RawComment:
    issue: IssueRef
    comment_id: str
    author: str
    created_at: str
    body: str


class TransportResponse(NamedTuple):
    status: int
    headers: dict[str, str]
    body: object  # decoded JSON


class Transport(Protocol):
    def get(self, path: str) -> TransportResponse: ...


class RequestsTransport:
    """Live GitHub REST v3 transport."""

    def __init__(self, token: str | None = None, base_url: str = GITHUB_API):
        self.base_url = base_url
        self.token = token if token is not None else os.environ.get("GH_TOKEN")

    def get(self, path: str) -> TransportResponse:
        headers = {"Accept": "application/vnd.github.v3+json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        resp = requests.get(self.base_url + path, headers=headers, timeout=30)
        try:
            body = resp.json()
        except ValueError:
            body = None
        return TransportResponse(resp.status_code, dict(resp.headers), body)


class FixtureTransport:
    """Recorded responses keyed by request path; never touches the network.

    A path may map to a single response or a list consumed in order (the
    last one repeats), which lets fixtures script rate-limit-then-succeed
    sequences.
    """

    def __init__(self, responses: dict[str, object]):
        self._responses = {k: list(v) if isinstance(v, list) else [v]
                           for k, v in responses.items()}
        self.requested: list[str] = []

    @classmethod
    def from_file(cls, path) -> "FixtureTransport":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        responses = {}
        for key, value in raw.items():
            specs = value if isinstance(value, list) else [value]
            responses[key] = [
                TransportResponse(s.get("status", 200), s.get("headers", {}),
                                  s.get("json"))
                for s in specs
            ]
        return cls(responses)

    def get(self, path: str) -> TransportResponse:
        self.requested.append(path)
        if path not in self._responses:
            raise IngestError(f"fixture transport has no response for {path!r}")
        queue = self._responses[path]
        resp = queue.pop(0) if len(queue) > 1 else queue[0]
        if isinstance(resp, TransportResponse):
            return resp
        return TransportResponse(resp.get("status", 200), resp.get("headers", {}),
                                 resp.get("json"))


def _is_rate_limited(resp: TransportResponse) -> bool:
    if resp.status == 429:
        return True
    remaining = resp.headers.get("X-RateLimit-Remaining")
    return resp.status == 403 and remaining == "0"


def _get_json(transport: Transport, path: str,
              sleep: Callable[[float], None]) -> object:
    for attempt in range(MAX_RETRIES):
        resp = transport.get(path)
        if resp.status == 200:
            return resp.body
        if _is_rate_limited(resp):
            if attempt + 1 < MAX_RETRIES:
                sleep(2.0 ** attempt)
            continue
        if resp.status in (401, 403):
            raise AuthenticationError(f"GET {path}: HTTP {resp.status}")
        if resp.status == 404:
            raise NotFoundError(f"GET {path}: not found")
        raise IngestError(f"GET {path}: HTTP {resp.status}")
    raise RateLimitExhausted(f"GET {path}: rate limited after {MAX_RETRIES} attempts")


def fetch_issue_comments(ref: IssueRef, transport: Transport | None = None,
                         sleep: Callable[[float], None] = time.sleep) -> list[RawComment]:
    """All comments of one issue, with the issue body itself as turn 0.

    Pages are fetched in order; rate-limit responses are retried with
    exponential backoff before giving up.
    """
    transport = transport or RequestsTransport()
    base = f"/repos/{ref.owner}/{ref.repo}/issues/{ref.issue_number}"
    issue = _get_json(transport, base, sleep)
    comments: list[RawComment] = [
        RawComment(
            issue=ref,
            comment_id=f"issue-{ref.issue_number}",
            author=(issue.get("user") or {}).get("login", ""),
            created_at=issue.get("created_at", ""),
            body=issue.get("body") or "",
        )
    ]
    page = 1
    while True:
        path = f"{base}/comments?per_page={PER_PAGE}&page={page}"
        batch = _get_json(transport, path, sleep)
        for c in batch:
            comments.append(
                RawComment(
                    issue=ref,
                    comment_id=str(c["id"]),
                    author=(c.get("user") or {}).get("login", ""),
                    created_at=c.get("created_at", ""),
                    body=c.get("body") or "",
                )
            )
        if len(batch) < PER_PAGE:
            return comments
        page += 1


def fetch_many(refs: list[IssueRef], transport: Transport | None = None,
               max_workers: int = DEFAULT_FETCH_WORKERS,
               sleep: Callable[[float], None] = time.sleep) -> list[RawComment]:
    """Fetch several issues concurrently, keeping the input issue order."""
    transport = transport or RequestsTransport()
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(
            lambda r: fetch_issue_comments(r, transport, sleep), refs
        ))
    return [c for comments in results for c in comments]


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------

_SENTENCE_END = (".", "!", "?")


def _split_sentences(text: str) -> list[str]:
    parts: list[str] = []
    buf: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        buf.append(ch)
        if ch in _SENTENCE_END:
            nxt = text[i + 1] if i + 1 < len(text) else " "
            if nxt.isspace() and not (ch == "." and i + 1 < len(text)
                                      and text[i + 1] == "."):
                segment = "".join(buf).strip()
                if segment:
                    parts.append(segment)
                buf = []
        i += 1
    tail = "".join(buf).strip()
    if tail:
        parts.append(tail)
    return parts


def _is_fence(line: str) -> bool:
    s = line.strip()
    return s.startswith("```") or s.startswith("~~~")


def segment_comment(rc: RawComment) -> list[str]:
    """Split one comment body into utterance texts.

    Prose is split on blank lines and sentence terminators; every line of a
    fenced code block becomes its own utterance verbatim (the fence
    delimiter lines themselves are consumed as markup).  Never returns
    empty utterances.
    """
    utterances: list[str] = []
    prose: list[str] = []

    def flush():
        if prose:
            utterances.extend(_split_sentences(" ".join(prose)))
            prose.clear()

    in_fence = False
    for line in rc.body.splitlines():
        if _is_fence(line):
            flush()
            in_fence = not in_fence
            continue
        if in_fence:
            if line.strip():
                utterances.append(line.strip())
            continue
        if not line.strip():
            flush()
        else:
            prose.append(line.strip())
    flush()
    return utterances


def emit_unlabeled(comments: list[RawComment], path) -> int:
    """Write segmented comments as an unlabeled JSON Lines dataset.

    One dialogue per issue (``owner/repo#N``); turn indices run
    consecutively across the issue's comments.  Returns the number of
    utterances written.
    """
    per_issue: dict[str, int] = {}
    written = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rc in comments:
            did = rc.issue.dialogue_id
            for text in segment_comment(rc):
                idx = per_issue.get(did, 0)
                per_issue[did] = idx + 1
                record = {
                    "dialogue_id": did,
                    "turn_index": idx,
                    "speaker": rc.author,
                    "text": text,
                    "tag": None,
                    "raw_tag": None,
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                written += 1
    return written
