"""Synthetic concept-tagging task: seeds, unlabeled pool, lexicon and held-out set."""
import random

rng = random.Random(11)

onsets = ["b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "cr", "gl", "pl", "st", "tr"]
vowels = ["a", "e", "i", "o", "u", "ae", "ou"]
suffixes = ["itis", "osis", "emia", "algia", "opathy"]
modifiers = ["chronic", "acute", "rare", "severe", "mild"]


def stem():
    return "".join(rng.choice(onsets) + rng.choice(vowels) for _ in range(rng.randint(1, 2)))


concepts = set()
while len(concepts) < 160:
    word = stem() + rng.choice(suffixes)
    if rng.random() < 0.4:
        concepts.add((rng.choice(modifiers), word))
    else:
        concepts.add((word,))
concepts = sorted(concepts)
rng.shuffle(concepts)

templates = [
    "what causes {}", "{} symptoms in adults", "is {} contagious", "treatment for {} at home",
    "how long does {} last", "can children get {}", "{} diet plan", "early signs of {}",
    "living with {} every day", "{} vs {} difference", "doctor for {} near me", "is {} hereditary",
]
fillers = [
    "best doctor near me", "clinic opening hours", "how to sleep better", "healthy breakfast ideas",
    "pharmacy open now", "cheap health insurance", "walking for weight loss", "vitamin d dosage",
]


def sentence(pool):
    if rng.random() < 0.2:
        toks = rng.choice(fillers).split()
        return toks, ["O"] * len(toks)
    tmpl = rng.choice(templates)
    toks, tags = [], []
    parts = tmpl.split("{}")
    for i, part in enumerate(parts):
        words = part.split()
        toks += words
        tags += ["O"] * len(words)
        if i < len(parts) - 1:
            c = rng.choice(pool)
            toks += list(c)
            tags += ["B-CPT"] + ["I-CPT"] * (len(c) - 1)
    return toks, tags


known = concepts[:120]      # lexicon covers every concept of the unlabeled pool
train_pool = concepts[:120]  # concepts seen in seeds / unlabeled text
heldout_pool = concepts[120:]


def write_conll(path, rows):
    with open(path, "w") as f:
        for toks, tags in rows:
            for t, g in zip(toks, tags):
                f.write(f"{t}\t{g}\n")
            f.write("\n")


def seed_sentence(i):
    c = [k for k in known if len(k) == 2][i // 2] if i % 2 else [k for k in known if len(k) == 1][i]
    tmpl = templates[i]
    toks, tags = [], []
    parts = tmpl.split("{}")
    for j, part in enumerate(parts):
        words = part.split()
        toks += words
        tags += ["O"] * len(words)
        if j < len(parts) - 1:
            toks += list(c)
            tags += ["B-CPT"] + ["I-CPT"] * (len(c) - 1)
    return toks, tags


seeds = [seed_sentence(i) for i in range(10)]
unlabeled = [sentence(train_pool) for _ in range(500)]
heldout = [sentence(heldout_pool + train_pool[60:]) for _ in range(200)]

write_conll("seeds.conll", seeds)
write_conll("heldout.conll", heldout)
with open("unlabeled.txt", "w") as f:
    for toks, _ in unlabeled:
        f.write(" ".join(toks) + "\n")
with open("lexicon.txt", "w") as f:
    for c in known:
        f.write(" ".join(c) + "\n")
