"""Writes the 200-record bootstrap toy corpus, its seed pattern and the planted truth."""
import json
import random

rng = random.Random(7)
DATE = "2019-07-01"

records = []
planted = []


def aligned(query, n=2):
    titles = [f"{query} guide", f"the {query} reviewed", f"{query} of 2019"][:n]
    return [[t, rng.randint(1, 40)] for t in titles]


def add(query, docs, planted_concept=False, tag=None):
    records.append({"query": query, "clicked_docs": docs, "clicked_concept_tag": tag, "date": DATE})
    if planted_concept and query not in planted:
        planted.append(query)


# Family A: seed template "top 10 |||".
top = ["phones", "laptops", "cameras", "tablets", "headphones", "smartwatches"]
for x in top:
    add(f"top 10 {x}", aligned(f"top 10 {x}"), True)
for x in top[:3]:
    add(f"top 10 {x} ranking", aligned(f"top 10 {x} ranking"), True)
for x in top[2:6]:
    add(f"top 10 {x} download", aligned(f"top 10 {x} download"), True)

# Family B: "||| ranking", learned from A (n_s = 3, n_e = 4).
for q in ["cameras ranking", "best cameras ranking", "best phones ranking", "best laptops ranking"]:
    add(q, aligned(q), True)

# Family C: "best |||", learned from B (n_s = 3, n_e = 4).
for q in ["best hiking trails", "best pizza recipes", "best running shoes", "best sci fi novels"]:
    add(q, aligned(q), True)

# Over-general "||| download": n_s = 4, n_e = 1, ratio 4 >= beta.
add("free music download", aligned("free music download", 1))
# Under-alpha "cheap |||": n_s = 0.
add("cheap top 10 phones", [["cheap phones deals", 3]])

# Template hits without title support.
for x in ["drones", "routers", "printers"]:
    add(f"top 10 {x}", [[f"{x} buying advice", 5]])
add("top 10", [])

noise = [
    "weather tomorrow", "how to tie a tie", "pizza near me", "train schedule", "translate hello",
    "currency converter", "flight status", "movie times tonight", "news today", "stock price apple",
]
planted_queries = [r for r in records]
while len(records) < 200:
    if rng.random() < 0.5:
        base = rng.choice(planted_queries)
        add(base["query"], aligned(base["query"], 3) if base["clicked_docs"] and len(base["clicked_docs"]) >= 2
            else base["clicked_docs"])
    else:
        q = rng.choice(noise)
        add(q, [[f"{q} results", rng.randint(0, 9)]])

with open("toy_log.jsonl", "w") as f:
    for r in records:
        f.write(json.dumps(r) + "\n")
with open("seed_patterns.txt", "w") as f:
    f.write("top 10 |||\n")
with open("planted.json", "w") as f:
    json.dump({"concepts": planted,
               "families": {"A": "top 10 |||", "B": "||| ranking", "C": "best |||"},
               "over_general": ["||| download"],
               "under_alpha": ["cheap |||"]}, f, indent=1)
    f.write("\n")
