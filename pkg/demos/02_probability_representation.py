"""Walkthrough: the keyword-over-tags probability matrix.

Every keyword becomes a row holding the empirical distribution of act tags
it was observed under; out-of-vocabulary tokens fall back to the corpus
tag prior, so every encoded step stays a probability distribution.

Run from the repository root:  python demos/02_probability_representation.py
"""

import numpy as np

from dialact.corpus import Dataset, Utterance, tokenize
from dialact.representation import build_prob_matrix, encode_prob
from dialact.tags import default_tagset

ts = default_tagset()

ROWS = [
    ("d1", "A", "do you have kids", "qy"),
    ("d1", "B", "yes i have three kids", "ny"),
    ("d1", "A", "kids are wonderful", "sv"),
    ("d1", "B", "i agree", "aa"),
    ("d2", "A", "do you have dogs", "qy"),
    ("d2", "B", "yes two dogs", "ny"),
    ("d2", "A", "dogs are wonderful", "sv"),
    ("d2", "B", "right", "b"),
]

utts, counter = [], {}
for did, spk, text, tag in ROWS:
    idx = counter.get(did, 0)
    counter[did] = idx + 1
    utts.append(Utterance(did, idx, spk, text, tuple(tokenize(text, "speech")),
                          ts.by_label(tag), tag))
train = Dataset("demo", "speech", tuple(utts), ts)

pm = build_prob_matrix(train, min_freq=1)
print(f"keywords ({len(pm.keywords)}): {', '.join(pm.keywords)}")

def show_row(token):
    row = pm.row(token)
    nonzero = [(ts.by_id(j).label, row[j]) for j in np.flatnonzero(row)]
    pretty = ", ".join(f"{lbl}={p:.2f}" for lbl, p in nonzero)
    print(f"  P(tag | {token!r:12s}) = {pretty}")

print("\nper-keyword tag distributions (rows sum to 1):")
for token in ("do", "yes", "wonderful", "kids"):
    show_row(token)

print("\nthe corpus prior stands in for unseen tokens:")
prior = ", ".join(f"{ts.by_id(j).label}={pm.prior[j]:.3f}"
                  for j in np.flatnonzero(pm.prior))
print(f"  prior = {prior}")

print("\nencoding an utterance (max_len=6, trailing padding masked):")
probe = Utterance("p", 0, "A", "do dogs dream", tuple(tokenize("do dogs dream", "speech")))
seq = encode_prob(probe, pm, max_len=6)
for t, (vec, real) in enumerate(zip(seq.vectors, seq.mask)):
    kind = "real" if real else "pad "
    print(f"  step {t} [{kind}] row sum = {vec.sum():.3f}")
print("('dream' was never seen, so its row equals the prior; padding rows are zero)")
