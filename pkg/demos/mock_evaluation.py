"""Running the three evaluation tasks offline against the mock backend."""
import math

from toporel.dataset import ConversionPair, sample_triplets, split
from toporel.evaluation import confusion, run_task1, run_task2, run_task3, task1_items, task1_metrics
from toporel.llm import ChatClient, EmbeddingClient, HashEmbedder
from toporel.mock import GeometryAwareMock
from toporel.synthetic import synthetic_corpus
from toporel.topology import Predicate

corpus = synthetic_corpus(12)
sample = sample_triplets(corpus, per_combo=5, fewshot=5, seed=0)
full = {**corpus, **sample.entities}
tagged = split(sample.triplets, sizes={"train": 0, "eval": 5, "fewshot": 5})
ev = [t for t in tagged if t.split == "eval"]

# task 1: the mock reads the geometries and answers correctly
items = task1_items(ev, full)
print(task1_metrics(run_task1(items, ChatClient(GeometryAwareMock())))["accuracy"])

# now it mistakes within for touches on point/polygon pairs
swapped = run_task1(items, ChatClient(GeometryAwareMock(["within->touches@Point/Polygon"])))
m = task1_metrics(swapped)
print(m["accuracy"], m["dist_incorrect"])
print(confusion(swapped, ("Point", "Polygon")).to_csv())

# task 2: retrieve subjects, typed queries vs generated expansions
emb = EmbeddingClient(HashEmbedder(256))
rc = [t for t in ev if t.predicate is not Predicate.DISJOINT]
print(run_task2(rc, full, emb, "typed").metrics())
run = run_task2(rc, full, emb, "expanded_1", ChatClient(GeometryAwareMock()), fusion="mean")
print(run.metrics())

# task 3: a mock that splits its answers between two predicates
mock = GeometryAwareMock(task3_table={"is along": ["touches", "crosses"]})
pair = ConversionPair("is along", Predicate.TOUCHES, "none", (), 6)
(res,) = run_task3([pair], ChatClient(mock), repetitions=10)
print(res.metrics(), math.log(2))
