"""Relating geometries: DE-9IM matrices, predicates, neighborhoods."""
from toporel import classify, inverse, parse_wkt, relate, topological_distance

campus = parse_wkt("POLYGON ((-89.4222 43.0757, -89.3963 43.0757, -89.3963 43.0661, -89.4222 43.0661, -89.4222 43.0757))")
library = parse_wkt("POINT (-89.4012 43.0750)")
street = parse_wkt("LINESTRING (-89.43 43.07, -89.39 43.07)")

m = relate(library, campus)
print(m.code)                     # 0FFFFF212
print(classify(library, campus))  # within
print(classify(campus, library))  # contains, the inverse
assert classify(campus, library) is inverse(classify(library, campus))

# a street running across the campus
print(relate(street, campus).code, classify(street, campus))

# matrix rows are interior, boundary, exterior of the first geometry
for r in "IBE":
    print(r, [m.entry(r, c) for c in "IBE"])
print(m.matches("T*F**F***"))     # the within pattern

# how far apart two predicates are in the neighborhood graph
pp = ("Polygon", "Polygon")
print(topological_distance(pp, "disjoint", "touches"))   # 1
print(topological_distance(pp, "disjoint", "overlaps"))  # 2, a touch comes first
