"""Walkthrough: collecting GitHub issue comments offline.

Uses the recorded-response transport (no network) to fetch an issue, shows
how comment bodies are segmented into utterances, and writes an unlabeled
dataset ready for annotation.

Run from the repository root:  python demos/05_fetch_and_segment.py
"""

import tempfile
from pathlib import Path

from dialact.corpus import dataset_stats, load_dataset
from dialact.ingest import (
    FixtureTransport,
    IssueRef,
    RawComment,
    emit_unlabeled,
    fetch_issue_comments,
    segment_comment,
)

ROOT = Path(__file__).parent.parent

print("=== segmentation rules ===")
body = (
    "The linter crashes on this file. Reproduced on two machines!\n"
    "\n"
    "Steps:\n"
    "```\n"
    "lint --fix ./src/main.c\n"
    "lint --check ./src/main.c\n"
    "```\n"
    "What is the expected output? What do you see instead?"
)
rc = RawComment(IssueRef("acme", "widget", 12), "c0", "alice", "", body)
print("comment body:")
for line in body.splitlines():
    print(f"  | {line}")
print("\nbecomes one utterance per sentence / code line:")
for i, utt in enumerate(segment_comment(rc)):
    print(f"  {i}: {utt!r}")

print("\n=== fetching from recorded responses (fixture transport) ===")
transport = FixtureTransport.from_file(ROOT / "tests/fixtures/fetch_fixture.json")
comments = fetch_issue_comments(IssueRef("acme", "widget", 12), transport)
print(f"fetched {len(comments)} comments (the issue body itself is turn 0):")
for c in comments:
    first_line = c.body.splitlines()[0] if c.body else ""
    print(f"  [{c.author}] {c.comment_id}: {first_line[:60]}")

out = Path(tempfile.mkdtemp(prefix="dialact-demo-")) / "issue12.jsonl"
n = emit_unlabeled(comments, out)
print(f"\nwrote {n} unlabeled utterances to {out}")

ds = load_dataset(out, tokenizer_mode="github")
stats = dataset_stats(ds)
print(f"reloaded: {stats.n_utterances} utterances, {stats.n_tokens} token types, "
      f"tags pending annotation (categories={stats.n_categories})")
print("\nlive mode works the same way without --fixture; it reads GH_TOKEN")
print("from the environment and honors rate-limit responses with retries.")
