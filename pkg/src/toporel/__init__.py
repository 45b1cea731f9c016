"""Topological relations between vector geometries, relation-triplet
datasets, and an evaluation harness for LLM spatial reasoning."""

__version__ = "0.1.0"

from .geometry import (
    Geometry,
    LineString,
    MultiLineString,
    MultiPoint,
    MultiPolygon,
    Point,
    Polygon,
    dimension,
    geometry_type,
    validate,
)
from .neighborhood import NotApplicable, load_graphs, topological_distance
from .topology import (
    IntersectionMatrix,
    InvalidGeometry,
    Predicate,
    Undetermined,
    all_combinations,
    classify,
    inverse,
    is_valid_combination,
    matches,
    relate,
)
from .wkt import ParseError, from_geojson, parse_wkt, to_geojson, to_wkt

__all__ = [
    "Geometry",
    "IntersectionMatrix",
    "InvalidGeometry",
    "LineString",
    "MultiLineString",
    "MultiPoint",
    "MultiPolygon",
    "NotApplicable",
    "ParseError",
    "Point",
    "Polygon",
    "Predicate",
    "Undetermined",
    "all_combinations",
    "classify",
    "dimension",
    "from_geojson",
    "geometry_type",
    "inverse",
    "is_valid_combination",
    "load_graphs",
    "matches",
    "parse_wkt",
    "relate",
    "to_geojson",
    "to_wkt",
    "topological_distance",
    "validate",
]
