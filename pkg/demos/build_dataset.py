"""Sampling relation triplets from a corpus and splitting them."""
from collections import Counter

from toporel.dataset import retrieval_corpus, sample_triplets, split, verify_triplets
from toporel.synthetic import synthetic_corpus

# a small synthetic corpus stands in for real map data
corpus = synthetic_corpus(cells=24, seed=0)
print(len(corpus), "entities")
print(Counter(e.geom_type for e in corpus.values()))

# 10 per combination plus 5 few-shot examples
sample = sample_triplets(corpus, per_combo=10, fewshot=5, seed=0)
print(len(sample.counts()), "combinations")
full = {**corpus, **sample.entities}  # equals copies are new entities
print(verify_triplets(sample.triplets, full))  # [] when every label re-checks

tagged = split(sample.triplets, seed=0, sizes={"train": 5, "eval": 5, "fewshot": 5})
print(Counter(t.split for t in tagged))

# retrieval candidates: eval triplets without disjoint ones
rc = retrieval_corpus(tagged)
print(len(rc), "retrieval triplets")

t = rc[0]
print(t.id, t.type_a, t.predicate.value, t.type_b)
print(full[t.subject_id].geometry)
print(full[t.object_id].geometry)
