"""Generate the bundled reference corpus of coded conversations.

The corpus is synthetic but pins exact aggregate marginals:
  - waypoint refs per speaker x kind: User 8/17/20, Retriever 1/27/28
  - annotation refs per speaker x kind: User 28/20/32, Retriever 28/45/16
  - waypoints in 20 of 26 conversations; annotations in 22 of 26
  - per-conversation dispersion targets: waypoint stdev ~4.26 (sum of
    squares 847, the closest odd value to the real-valued target), and
    annotation stdev ~7.38 (sum of squares 2461)

Run from the repository root:  python3 tools/make_reference_corpus.py
"""

import json
import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "refind" / "data" / "coded_corpus.json"

WAYPOINT_MARGINALS = {
    ("User", "Url"): 8, ("User", "Title"): 17, ("User", "Description"): 20,
    ("Retriever", "Url"): 1, ("Retriever", "Title"): 27, ("Retriever", "Description"): 28,
}
ANNOTATION_MARGINALS = {
    ("User", "Category"): 28, ("User", "Type"): 20, ("User", "GeneralRef"): 32,
    ("Retriever", "Category"): 28, ("Retriever", "Type"): 45, ("Retriever", "GeneralRef"): 16,
}

# per-conversation totals found by local search (see sums/squares above)
W_COUNTS = [19, 13, 8, 6, 5, 5, 5, 5, 5, 4, 4, 4, 3, 3, 3, 2, 2, 2, 2, 1]
A_COUNTS = [29, 23, 16, 15, 13, 9, 9, 8, 7, 6, 6, 4, 4, 4, 4, 4, 3, 1, 1, 1, 1, 1]


def build():
    rng = random.Random(2026)

    pairs = []
    for i in range(26):
        w = W_COUNTS[i] if i < 20 else 0
        if i < 18:
            a = A_COUNTS[i]
        elif i in (18, 19):
            a = 0  # waypoints but no annotations
        elif i < 24:
            a = A_COUNTS[18 + (i - 20)]
        else:
            a = 0  # neither artifact used
        pairs.append((w, a))

    w_pool = [ref for ref, n in WAYPOINT_MARGINALS.items() for _ in range(n)]
    a_pool = [ref for ref, n in ANNOTATION_MARGINALS.items() for _ in range(n)]
    rng.shuffle(w_pool)
    rng.shuffle(a_pool)
    assert len(w_pool) == sum(w for w, _ in pairs) == 101
    assert len(a_pool) == sum(a for _, a in pairs) == 169

    order = list(range(26))
    rng.shuffle(order)
    tasks = [t for _ in range(6) for t in (1, 2, 3, 4)] + [2, 4]

    conversations = []
    wi = ai = 0
    for out_pos, src in enumerate(order):
        w, a = pairs[src]
        conversations.append(
            {
                "conversation_id": f"c{out_pos + 1:02d}",
                "task": tasks[out_pos],
                "waypoint_refs": [
                    {"speaker": s, "kind": k} for s, k in w_pool[wi : wi + w]
                ],
                "annotation_refs": [
                    {"speaker": s, "kind": k} for s, k in a_pool[ai : ai + a]
                ],
            }
        )
        wi += w
        ai += a
    assert wi == 101 and ai == 169
    return conversations


def verify(conversations):
    for marginals, key in (
        (WAYPOINT_MARGINALS, "waypoint_refs"),
        (ANNOTATION_MARGINALS, "annotation_refs"),
    ):
        got = {pair: 0 for pair in marginals}
        for c in conversations:
            for ref in c[key]:
                got[(ref["speaker"], ref["kind"])] += 1
        assert got == marginals, (key, got)

    for key, zeros, total, sq in (
        ("waypoint_refs", 6, 101, 847),
        ("annotation_refs", 4, 169, 2461),
    ):
        counts = [len(c[key]) for c in conversations]
        assert sum(1 for n in counts if n == 0) == zeros
        assert sum(counts) == total
        assert sum(n * n for n in counts) == sq
        mean = total / 26
        stdev = math.sqrt((sq - 26 * mean * mean) / 25)
        print(f"{key}: mean={mean:.4f} stdev={stdev:.4f}")


def main():
    conversations = build()
    verify(conversations)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(conversations, indent=1) + "\n", "utf-8")
    print(f"wrote {OUT} ({len(conversations)} conversations)")


if __name__ == "__main__":
    main()
