"""Builds crates/core/data/embeddings.json.

Every single-word lexicon entry gets its own basis direction. Unseen words
are mixtures: cos(unseen, known) equals the weight listed below, and the
remaining mass sits on a private direction so the vector stays unit length.
Known words listed in RELATED are mixed the same way.
"""
import json
import math
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"

RELATED = {
    "grab": {"take": 0.80},
}

UNSEEN = {
    "fetch": {"take": 0.60, "bring": 0.50},
    "carry": {"bring": 0.65, "take": 0.40},
    "head": {"go": 0.70, "walk": 0.50},
    "navigate": {"go": 0.62, "walk": 0.55},
    "travel": {"go": 0.66, "walk": 0.45},
    "robert": {"bob": 0.82, "alice": 0.46},
    "bobby": {"bob": 0.75},
    "ally": {"alice": 0.72},
    "lobby": {"office": 0.62, "lounge": 0.58},
    "breakroom": {"lounge": 0.55, "kitchen": 0.52},
    "kitchenette": {"kitchen": 0.80},
    "cafeteria": {"conference": 0.50, "kitchen": 0.48},
    "meeting": {"conference": 0.70},
    "rattling": {"empty": 0.55, "metal": 0.30, "can": 0.25},
    "full": {"empty": 0.45, "heavy": 0.30},
    "crimson": {"red": 0.75},
    "hefty": {"heavy": 0.70},
    "tin": {"can": 0.70, "metal": 0.50},
    "glass": {"bottle": 0.50, "plastic": 0.45},
    "paper": {"plastic": 0.35, "box": 0.30},
    "please": {},
    "hey": {},
}


def main():
    lexicon = json.loads((DATA / "lexicon.json").read_text())
    known = sorted({e["tokens"][0] for e in lexicon if len(e["tokens"]) == 1})
    names = known + sorted(UNSEEN)
    index = {w: i for i, w in enumerate(names)}
    dim = len(names)
    out = {}
    for w in known:
        v = [0.0] * dim
        v[index[w]] = 1.0
        out[w] = v
    for w, mix in sorted({**RELATED, **UNSEEN}.items()):
        v = [0.0] * dim
        for k, s in mix.items():
            v[index[k]] = s
        rest = 1.0 - sum(s * s for s in mix.values())
        assert rest > 0, w
        v[index[w]] = math.sqrt(rest)
        out[w] = [round(x, 12) for x in v]
    with open(DATA / "embeddings.json", "w") as f:
        f.write("{\n")
        f.write(",\n".join(f'  "{w}": {json.dumps(v)}' for w, v in out.items()))
        f.write("\n}\n")


if __name__ == "__main__":
    main()
