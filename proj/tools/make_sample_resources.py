#!/usr/bin/env python3
"""Regenerates the bundled sample text resources under resources/.

The sample lexicons reproduce the slot layout of the full affective-dictionary
suite (126 lexicon dims + 4 rule-scorer dims = 130) and the 300-d / 200-d
embedding pair. Values are synthetic, derived from the hand-rated
pleasure/arousal/dominance vocabulary in resources/source/vocabulary.tsv, so
that text features carry recoverable affect signal for the synthetic data
generator. Output is deterministic.

Usage: tools/make_sample_resources.py [resources_dir]
"""

import csv
import json
import sys
from pathlib import Path

import numpy as np

SEED = 20201025

LIWC_CATEGORIES = [
    "function", "pronoun", "ppron", "i", "we", "you", "shehe", "they", "ipron", "article",
    "prep", "auxverb", "adverb", "conj", "negate", "verb", "adj", "compare", "interrog", "number",
    "quant", "affect", "posemo", "negemo", "anx", "anger", "sad", "social", "family", "friend",
    "female", "male", "cogproc", "insight", "cause", "discrep", "tentat", "certain", "differ", "percept",
    "see", "hear", "feel", "bio", "body", "health", "sexual", "ingest", "drives", "affiliation",
    "achieve", "power", "reward", "risk", "focuspast", "focuspresent", "focusfuture", "relativ", "motion", "space",
    "time", "work", "leisure", "home", "money", "relig", "death", "informal", "swear", "netspeak",
    "assent", "nonflu", "filler", "humans", "incl", "excl", "inhib", "sixltr",
]
EMOTIONS = ["anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"]


def clip(x, lo=0.0, hi=1.0):
    return float(min(max(x, lo), hi))


def emotions(p, a, d):
    neg, pos, aro = clip(-p), clip(p), clip(a)
    return {
        "anger": neg * aro * clip(d + 0.5),
        "anticipation": 0.8 * aro * clip(p + 0.5),
        "disgust": 0.8 * neg * clip(d),
        "fear": neg * aro * clip(-d + 0.5),
        "joy": pos,
        "sadness": neg * clip(-a + 0.5),
        "surprise": aro * clip(-d + 0.3),
        "trust": pos * clip(d + 0.3) * clip(-a + 0.7),
    }


def load_vocabulary(path):
    words = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f, delimiter="\t"):
            tags = set(t for t in (row["tags"] or "").split(",") if t)
            words.append((row["word"], float(row["pleasure"]), float(row["arousal"]), float(row["dominance"]), tags))
    return words


def fmt(x):
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def write_tsv(path, dims, rows):
    with open(path, "w") as f:
        f.write("word\t" + "\t".join(dims) + "\n")
        for word, values in rows:
            f.write(word + "\t" + "\t".join(fmt(v) for v in values) + "\n")


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "resources"
    vocab = load_vocabulary(root / "source" / "vocabulary.tsv")
    rng = np.random.default_rng(SEED)
    lex_dir = root / "lexicons"
    emb_dir = root / "embeddings"
    lex_dir.mkdir(parents=True, exist_ok=True)
    emb_dir.mkdir(parents=True, exist_ok=True)

    content = [w for w in vocab if "function" not in w[4] and w[0] != "0"]

    def noisy(x, sd=0.05):
        return x + float(rng.normal(0.0, sd))

    def member(prob):
        return rng.random() < prob

    slots = []

    def slot(name, dims, rows):
        write_tsv(lex_dir / f"{name}.tsv", dims, rows)
        slots.append({"name": name, "path": f"lexicons/{name}.tsv", "dims": len(dims)})

    slot("bing_liu", ["positive", "negative"],
         [(w, [1.0 if p > 0.3 else 0.0, 1.0 if p < -0.3 else 0.0]) for w, p, a, d, _ in content if abs(p) > 0.3])

    rows = []
    for w, p, a, d, _ in content:
        if member(0.9):
            pos, neg = clip(noisy(0.8 * clip(p))), clip(noisy(0.8 * clip(-p)))
            rows.append((w, [pos, neg, clip(1.0 - pos - neg)]))
    slot("sentiwordnet", ["pos_score", "neg_score", "obj_score"], rows)

    rows = []
    for w, p, a, d, _ in content:
        if member(0.85):
            e = emotions(p, a, d)
            rows.append((w, [1.0 if e[k] > 0.25 else 0.0 for k in EMOTIONS] +
                         [1.0 if p < -0.3 else 0.0, 1.0 if p > 0.3 else 0.0]))
    slot("nrc_emolex", ["anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust",
                        "negative", "positive"], rows)

    slot("sentistrength", ["positive_strength", "negative_strength"],
         [(w, [1.0 + round(4 * clip(p)), -1.0 - round(4 * clip(-p))]) for w, p, a, d, _ in content if member(0.8)])

    rows = []
    for w, p, a, d, tags in vocab:
        cats = set(tags)
        e = emotions(p, a, d)
        if max(abs(p), abs(a)) >= 0.4:
            cats.add("affect")
        if p > 0.3:
            cats.add("posemo")
        if p < -0.3:
            cats.add("negemo")
        for src, dst in (("fear", "anx"), ("anger", "anger"), ("sadness", "sad")):
            if e[src] > 0.25:
                cats.add(dst)
        if len(w) > 6:
            cats.add("sixltr")
        if cats & {"family", "friend", "female", "male"}:
            cats.add("humans")
        if cats & {"see", "hear", "feel"}:
            cats.add("percept")
        if cats:
            rows.append((w, [1.0 if c in cats else 0.0 for c in LIWC_CATEGORIES]))
    slot("liwc", LIWC_CATEGORIES, rows)

    slot("afinn", ["valence"], [(w, [float(round(5 * p))]) for w, p, a, d, _ in content if abs(p) > 0.2])
    slot("nrc_hashtag_sentiment", ["score"], [(w, [noisy(5 * p, 0.4)]) for w, p, a, d, _ in content if member(0.8)])
    slot("nrc_sentiment140", ["score"], [(w, [noisy(4 * p, 0.4)]) for w, p, a, d, _ in content if member(0.8)])

    rows = []
    for w, p, a, d, _ in content:
        if member(0.6):
            effect = "plus" if p > 0.25 else ("minus" if p < -0.25 else "null")
            rows.append((w, [float(effect == "plus"), float(effect == "minus"), float(effect == "null")]))
    slot("effectwordnet", ["plus_effect", "minus_effect", "null_effect"], rows)

    rows = []
    for w, p, a, d, _ in content:
        if member(0.75):
            e = emotions(p, a, d)
            rows.append((w, [max(0.0, noisy(2 * e[k], 0.1)) for k in EMOTIONS]))
    slot("nrc_hashtag_emotion", EMOTIONS, rows)

    rows = []
    for w, p, a, d, _ in content:
        if member(0.85):
            e = emotions(p, a, d)
            rows.append((w, [clip(noisy(e[k])) for k in EMOTIONS] + [clip(noisy(clip(-p))), clip(noisy(clip(p)))]))
    slot("nrc_expanded_emotion", EMOTIONS + ["negative", "positive"], rows)

    rows = []
    for w, p, a, d, _ in content:
        e = emotions(p, a, d)
        if max(e["anger"], e["fear"], e["joy"], e["sadness"]) > 0.15:
            rows.append((w, [clip(noisy(e[k])) for k in ("anger", "fear", "joy", "sadness")]))
    slot("nrc_affect_intensity", ["anger", "fear", "joy", "sadness"], rows)

    slot("nrc_vad", ["valence", "arousal", "dominance"],
         [(w, [clip(noisy((x + 1) / 2, 0.03)) for x in (p, a, d)]) for w, p, a, d, _ in content])

    with open(lex_dir / "rule_valence.tsv", "w") as f:
        f.write("word\tvalence\n")
        for w, p, a, d, _ in content:
            if abs(p) >= 0.2:
                v = 1.9 if w == "good" else round(max(-4.0, min(4.0, 3.4 * p + float(rng.normal(0, 0.2)))), 1)
                f.write(f"{w}\t{v:.1f}\n")

    embeddings = []
    for name, dim, keep in (("w2v_news_sample", 300, 1.0), ("glove_wiki_sample", 200, 0.95)):
        basis = rng.normal(0.0, 1.0, size=(3, dim)) / np.sqrt(dim) * 4.0
        path = emb_dir / f"{name}.{dim}d.txt"
        with open(path, "w") as f:
            for w, p, a, d, _ in vocab:
                if keep < 1.0 and "function" not in _ and rng.random() > keep:
                    continue
                vec = np.array([p, a, d]) @ basis + rng.normal(0.0, 0.25, size=dim) / np.sqrt(dim) * 4.0
                f.write(w + " " + " ".join(fmt(x) for x in vec) + "\n")
        embeddings.append({"name": name, "path": f"embeddings/{path.name}", "dim": dim})

    manifest = {
        "lexicons": slots,
        "scorer": {"path": "lexicons/rule_valence.tsv", "dims": 4},
        "embeddings": embeddings,
    }
    total = sum(s["dims"] for s in slots) + 4
    assert total == 130, total
    with open(root / "text_resources.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    print(f"lexical dims: {total}, embedding dims: {sum(e['dim'] for e in embeddings)}")


if __name__ == "__main__":
    main()
