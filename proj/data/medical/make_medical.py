"""Small medical query log with a domain KG, for phrase mining, linking and the end-to-end run."""
import datetime
import json
import random

rng = random.Random(5)

kg = {
    "rare mental disorder": ["body integrity identity disorder", "cotard delusion", "capgras delusion",
                             "alice in wonderland syndrome"],
    "endocrine disorder": ["hypothyroidism", "type 2 diabetes", "cushing syndrome"],
    "respiratory disease": ["asthma", "bronchitis", "pneumonia"],
    "neurological disorder": ["migraine", "epilepsy", "narcolepsy"],
}
extra_families = ["sleep disorder", "skin disease"]

start = datetime.date(2024, 3, 1)
records = []
for d in range(7):
    day = (start + datetime.timedelta(days=d)).isoformat()
    for concept, instances in kg.items():
        for inst in instances:
            for _ in range(rng.randint(1, 3)):
                records.append({
                    "query": f"{inst} symptoms",
                    "clicked_docs": [[f"{inst}: a {concept} explained", rng.randint(3, 30)],
                                     [f"{inst} symptoms and causes", rng.randint(1, 10)]],
                    "clicked_concept_tag": concept,
                    "date": day,
                })
            records.append({
                "query": f"what is {inst}",
                "clicked_docs": [[f"{inst} is a {concept}", rng.randint(2, 20)]],
                "clicked_concept_tag": concept if rng.random() < 0.5 else None,
                "date": day,
            })
            records.append({"query": f"{inst} treatment", "clicked_docs": [], "clicked_concept_tag": None,
                            "date": day})
        if d % 2 == 0:
            records.append({
                "query": f"types of {concept}",
                "clicked_docs": [[f"types of {concept} list", rng.randint(5, 40)],
                                 [f"the main types of {concept}", rng.randint(5, 40)]],
                "clicked_concept_tag": None,
                "date": day,
            })
    for fam in extra_families:
        if d % 3 == 0:
            records.append({
                "query": f"types of {fam}",
                "clicked_docs": [[f"types of {fam} explained", 12], [f"common types of {fam}", 7]],
                "clicked_concept_tag": None,
                "date": day,
            })

with open("log.jsonl", "w") as f:
    for r in records:
        f.write(json.dumps(r) + "\n")
with open("kg.tsv", "w") as f:
    for concept, instances in kg.items():
        for inst in instances:
            f.write(f"{inst}\t{concept}\n")
with open("patterns.txt", "w") as f:
    f.write("types of |||\n")
with open("stopwords.txt", "w") as f:
    f.write("\n".join(["the", "a", "an", "of", "is", "what", "and", "for", "to", "in"]) + "\n")
with open("gold.tsv", "w") as f:
    f.write("body integrity identity disorder facts\tbody integrity identity disorder\n")
    f.write("cotard delusion symptoms\tcotard delusion\n")
    f.write("types of rare mental disorder\trare mental disorder;types of rare mental disorder\n")
