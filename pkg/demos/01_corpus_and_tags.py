"""Walkthrough: parsing Switchboard-style utterance files and the 42-class
act-tag inventory.

Run from the repository root:  python demos/01_corpus_and_tags.py
"""

from dialact.corpus import (
    clean_speech_text,
    dataset_from_swda,
    dataset_stats,
    parse_swda_file,
    tokenize,
)
from dialact.tags import default_tagset, normalize_tag

RAW_FILE = """\
FILENAME:\tsw_demo
=========================================================================

sd  A.1 utt1: {F Well, } we have two dogs at the house. /
+   A.1 utt2: and a cat <laughter> /
qy  B.2 utt1: do you walk the dogs every day? /
ny  A.3 utt1: yes, every day. /
sv^e B.4 utt1: [ i guess, + i think ] dogs are wonderful pets /
"""

print("=== the tag inventory ===")
ts = default_tagset()
print(f"{len(ts)} classes; the first five:")
for tag in list(ts)[:5]:
    print(f"  id={tag.id:2d}  {tag.label:6s} {tag.description}")

print("\nraw source tags collapse onto canonical classes:")
for raw in ("sd", "sv^e", "fo", "qy^d", "sd,sv", "arp"):
    print(f"  {raw!r:10s} -> {normalize_tag(raw).label}")

print("\n=== parsing one utterance file ===")
records = parse_swda_file(RAW_FILE)
for rec in records:
    print(f"  turn {rec.turn_index} [{rec.speaker}] tag={rec.raw_tag!r}: {rec.text}")

print("\nspeech markup is stripped before tokenizing:")
raw = records[0].text
print(f"  raw:     {raw!r}")
print(f"  cleaned: {clean_speech_text(raw)!r}")
print(f"  tokens:  {tokenize(clean_speech_text(raw), 'speech')}")

print("\nGitHub text keeps commands and URLs intact:")
gh = "Run `lint --fix` on ./src/main.c then see https://example.com/docs."
print(f"  {tokenize(gh, 'github')}")

print("\n=== a full dataset (continuations resolved, turns renumbered) ===")
ds, dropped = dataset_from_swda(records, name="demo")
for utt in ds.utterances:
    print(f"  {utt.dialogue_id} #{utt.turn_index} [{utt.tag.label:3s}] {utt.text}")
stats = dataset_stats(ds)
print(f"\nstats: {stats.n_categories} categories, {stats.n_utterances} utterances, "
      f"{stats.n_tokens} distinct token types ({dropped} dropped continuations)")
