"""Hand-derived DE-9IM fixtures: (wkt_a, wkt_b, matrix, predicate).

S is the 4x4 square at the origin; L is its bottom edge as a line.
"""

S = "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))"
L = "LINESTRING (0 0, 4 0)"
HOLED = "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 3 1, 3 3, 1 3, 1 1))"
CAMPUS = "POLYGON ((-89.3552 43.124, -89.355 43.124, -89.355 43.122, -89.3552 43.122, -89.3552 43.124))"

DE9IM_FIXTURES = [
    # Point / Point
    ("POINT (1 1)", "POINT (1 1)", "0FFFFFFF2", "equals"),
    ("POINT (1 1)", "POINT (2 2)", "FF0FFF0F2", "disjoint"),
    # Point / LineString
    ("POINT (2 0)", L, "0FFFFF102", "within"),
    ("POINT (2 2)", "LINESTRING (0 0, 2 2, 4 0)", "0FFFFF102", "within"),
    ("POINT (0 0)", "LINESTRING (0 0, 1 0, 1 1, 0 0)", "0FFFFF1F2", "within"),
    ("POINT (0 0)", L, "F0FFFF102", "touches"),
    ("POINT (2 1)", L, "FF0FFF102", "disjoint"),
    # Point / Polygon
    ("POINT (2 2)", S, "0FFFFF212", "within"),
    ("POINT (-89.3551 43.123)", CAMPUS, "0FFFFF212", "within"),
    ("POINT (4 2)", S, "F0FFFF212", "touches"),
    ("POINT (5 5)", S, "FF0FFF212", "disjoint"),
    # LineString / Point
    (L, "POINT (2 0)", "0F1FF0FF2", "contains"),
    (L, "POINT (0 0)", "FF10F0FF2", "touches"),
    (L, "POINT (2 1)", "FF1FF00F2", "disjoint"),
    # Polygon / Point
    (S, "POINT (2 2)", "0F2FF1FF2", "contains"),
    (S, "POINT (4 2)", "FF20F1FF2", "touches"),
    (S, "POINT (5 5)", "FF2FF10F2", "disjoint"),
    (HOLED, "POINT (2 2)", "FF2FF10F2", "disjoint"),
    ("MULTIPOLYGON (((0 0, 1 0, 1 1, 0 1, 0 0)), ((2 2, 3 2, 3 3, 2 3, 2 2)))", "POINT (2.5 2.5)", "0F2FF1FF2", "contains"),
    # LineString / LineString
    (L, L, "1FFF0FFF2", "equals"),
    ("LINESTRING (4 0, 2 0, 0 0)", L, "1FFF0FFF2", "equals"),
    ("LINESTRING (0 0, 1 0, 4 0)", L, "1FFF0FFF2", "equals"),
    ("LINESTRING (1 0, 3 0)", L, "1FF0FF102", "within"),
    ("LINESTRING (0 0, 2 0)", L, "1FF00F102", "within"),
    (L, "LINESTRING (1 0, 3 0)", "101FF0FF2", "contains"),
    ("LINESTRING (0 0, 3 0)", "LINESTRING (1 0, 4 0)", "1010F0102", "overlaps"),
    ("LINESTRING (0.5 0.5, 1.5 0.5)", "LINESTRING (1.0 0.5, 2.25 0.5)", "1010F0102", "overlaps"),
    ("LINESTRING (0 0, 2 2)", "LINESTRING (0 2, 2 0)", "0F1FF0102", "crosses"),
    ("LINESTRING (0 2, 4 2)", "LINESTRING (2 0, 2 4)", "0F1FF0102", "crosses"),
    ("LINESTRING (0 0, 2 2, 4 0)", "LINESTRING (0 4, 2 2, 4 4)", "0F1FF0102", "crosses"),
    ("LINESTRING (0 0, 2 0)", "LINESTRING (2 0, 2 2)", "FF1F00102", "touches"),
    ("LINESTRING (2 0, 2 2)", L, "FF10F0102", "touches"),
    ("LINESTRING (0 1, 4 1)", L, "FF1FF0102", "disjoint"),
    # LineString / Polygon
    ("LINESTRING (1 1, 3 3)", S, "1FF0FF212", "within"),
    ("LINESTRING (0 2, 2 2)", S, "1FF00F212", "within"),
    ("LINESTRING (4 0, 6 0)", S, "FF1F00212", "touches"),
    (L, S, "F1FF0F212", "touches"),
    ("LINESTRING (5 0, 4 2, 5 4)", S, "F01FF0212", "touches"),
    ("LINESTRING (2 2, 6 2)", S, "1010F0212", "crosses"),
    ("LINESTRING (5 0, 5 4)", S, "FF1FF0212", "disjoint"),
    ("LINESTRING (1.5 2, 2.5 2)", HOLED, "FF1FF0212", "disjoint"),
    # Polygon / LineString
    (S, "LINESTRING (1 1, 3 3)", "102FF1FF2", "contains"),
    (S, "LINESTRING (4 0, 6 0)", "FF2F01102", "touches"),
    (S, "LINESTRING (2 2, 6 2)", "1020F1102", "crosses"),
    (S, "LINESTRING (5 0, 5 4)", "FF2FF1102", "disjoint"),
    # Polygon / Polygon
    (S, S, "2FFF1FFF2", "equals"),
    ("POLYGON ((4 0, 4 4, 0 4, 0 0, 4 0))", S, "2FFF1FFF2", "equals"),
    ("POLYGON ((0 0, 2 0, 4 0, 4 4, 0 4, 0 0))", S, "2FFF1FFF2", "equals"),
    ("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))", "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))", "2FFF1FFF2", "equals"),
    ("POLYGON ((1 1, 3 1, 3 3, 1 3, 1 1))", S, "2FF1FF212", "within"),
    ("POLYGON ((0 0, 2 0, 2 2, 0 2, 0 0))", S, "2FF11F212", "within"),
    (S, "POLYGON ((1 1, 3 1, 3 3, 1 3, 1 1))", "212FF1FF2", "contains"),
    ("POLYGON ((2 2, 6 2, 6 6, 2 6, 2 2))", S, "212101212", "overlaps"),
    (
        "POLYGON ((0.1 0.1, 0.3 0.1, 0.3 0.3, 0.1 0.3, 0.1 0.1))",
        "POLYGON ((0.2 0.2, 0.4 0.2, 0.4 0.4, 0.2 0.4, 0.2 0.2))",
        "212101212",
        "overlaps",
    ),
    ("POLYGON ((4 0, 8 0, 8 4, 4 4, 4 0))", S, "FF2F11212", "touches"),
    ("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))", "POLYGON ((1 0, 2 0, 2 1, 1 1, 1 0))", "FF2F11212", "touches"),
    ("POLYGON ((4 4, 6 4, 6 6, 4 6, 4 4))", S, "FF2F01212", "touches"),
    ("POLYGON ((5 5, 6 5, 6 6, 5 6, 5 5))", S, "FF2FF1212", "disjoint"),
]
