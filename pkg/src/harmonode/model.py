"""Truss data schema, validation and JSON serialization.

Units are SI throughout: metres, newtons, pascals, kilograms. Trusses are
pin-jointed by definition; only translational degrees of freedom exist.
All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

MIN_ELEMENT_LENGTH = 1e-9

# Top-level and per-entity key order used by write_model. Documented in
# docs/schema.md; read_model accepts keys in any order.
_MODEL_KEYS = ("name", "enclosure_area", "nodes", "elements", "supports", "loads")
_NODE_KEYS = ("id", "x", "y", "z")
_ELEMENT_KEYS = ("id", "start", "end", "area", "youngs_modulus")
_SUPPORT_KEYS = ("node", "fix")
_LOAD_KEYS = ("node", "force", "case")


class ModelFormatError(ValueError):
    """A document could not be parsed into a valid truss model."""


class UnknownFieldWarning(UserWarning):
    """A document carried fields the schema does not define."""


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)


@dataclass(frozen=True)
class TrussNode:
    id: int
    position: Point3


@dataclass(frozen=True)
class TrussElement:
    id: int
    start: int
    end: int
    area: float
    youngs_modulus: float


@dataclass(frozen=True)
class Support:
    node: int
    fixed: tuple[bool, bool, bool]


@dataclass(frozen=True)
class PointLoad:
    node: int
    force: Point3
    load_case: str = "default"


@dataclass(frozen=True)
class TrussModel:
    nodes: tuple[TrussNode, ...]
    elements: tuple[TrussElement, ...]
    supports: tuple[Support, ...] = ()
    loads: tuple[PointLoad, ...] = ()
    name: str = ""
    enclosure_area: float | None = None

    def node_map(self) -> dict[int, TrussNode]:
        return {n.id: n for n in self.nodes}

    def load_cases(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for load in self.loads:
            seen.setdefault(load.load_case, None)
        return tuple(seen)


def element_length(model: TrussModel, element: TrussElement) -> float:
    nodes = model.node_map()
    a = nodes[element.start].position
    b = nodes[element.end].position
    return math.dist(a.as_tuple(), b.as_tuple())


def validate(model: TrussModel) -> list[str]:
    """Return every violated invariant, empty when the model is well formed.

    Violations are data, not errors: the report lists one message per broken
    invariant, naming the offending entity, ordered deterministically by
    entity id (nodes, elements, supports, loads, then model-level checks).
    """
    report: list[str] = []
    node_ids: set[int] = set()

    for node in sorted(model.nodes, key=lambda n: n.id):
        if node.id in node_ids:
            report.append(f"node {node.id}: duplicate node id")
        node_ids.add(node.id)
        if not node.position.is_finite():
            report.append(f"node {node.id}: non-finite coordinates")

    positions = {n.id: n.position for n in model.nodes}
    element_ids: set[int] = set()
    for el in sorted(model.elements, key=lambda e: e.id):
        if el.id in element_ids:
            report.append(f"element {el.id}: duplicate element id")
        element_ids.add(el.id)
        missing = [nid for nid in (el.start, el.end) if nid not in positions]
        for nid in missing:
            report.append(f"element {el.id}: references missing node {nid}")
        if el.start == el.end:
            report.append(
                f"element {el.id}: zero-length element (start and end are both node {el.start})"
            )
        elif not missing:
            length = math.dist(
                positions[el.start].as_tuple(), positions[el.end].as_tuple()
            )
            if length <= MIN_ELEMENT_LENGTH:
                report.append(
                    f"element {el.id}: zero-length element "
                    f"(nodes {el.start} and {el.end} coincide)"
                )
        if not el.area > 0:
            report.append(f"element {el.id}: area must be positive, got {el.area}")
        if not el.youngs_modulus > 0:
            report.append(
                f"element {el.id}: youngs_modulus must be positive, got {el.youngs_modulus}"
            )

    for sup in sorted(model.supports, key=lambda s: s.node):
        if sup.node not in positions:
            report.append(f"support at node {sup.node}: references missing node {sup.node}")
        if not any(sup.fixed):
            report.append(f"support at node {sup.node}: restrains no direction")

    for idx, load in enumerate(model.loads):
        if load.node not in positions:
            report.append(f"load {idx}: references missing node {load.node}")
        if not load.force.is_finite():
            report.append(f"load {idx}: non-finite force components")

    if model.enclosure_area is not None and not model.enclosure_area > 0:
        report.append(f"model: enclosure_area must be positive, got {model.enclosure_area}")

    unreachable = _unreachable_nodes(model)
    if unreachable:
        shown = ", ".join(str(n) for n in unreachable[:5])
        more = "" if len(unreachable) <= 5 else f" (+{len(unreachable) - 5} more)"
        report.append(f"model: element graph is not connected; unreachable nodes {shown}{more}")

    return report


def _unreachable_nodes(model: TrussModel) -> list[int]:
    if not model.nodes:
        return []
    ids = sorted({n.id for n in model.nodes})
    adjacency: dict[int, list[int]] = {nid: [] for nid in ids}
    for el in model.elements:
        if el.start in adjacency and el.end in adjacency:
            adjacency[el.start].append(el.end)
            adjacency[el.end].append(el.start)
    seen = {ids[0]}
    stack = [ids[0]]
    while stack:
        for neighbor in adjacency[stack.pop()]:
            if neighbor not in seen:
                seen.add(neighbor)
                stack.append(neighbor)
    return [nid for nid in ids if nid not in seen]


def read_model(document: str | bytes) -> TrussModel:
    """Parse a JSON document into a validated TrussModel.

    Unknown fields are ignored with an UnknownFieldWarning. Malformed JSON
    raises ModelFormatError carrying the character offset; schema violations
    raise ModelFormatError naming the offending JSON path.
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelFormatError(f"document is not UTF-8: {exc}") from exc
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"invalid JSON at offset {exc.pos} (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc

    if not isinstance(raw, dict):
        raise ModelFormatError("top level must be a JSON object")
    _warn_unknown(raw, _MODEL_KEYS, "")

    nodes = []
    seen_node_ids: set[int] = set()
    for i, item in enumerate(_expect_array(raw, "nodes", required=True)):
        path = f"nodes[{i}]"
        _expect_object(item, path)
        _warn_unknown(item, _NODE_KEYS, path)
        node_id = _expect_int(item, "id", path)
        if node_id in seen_node_ids:
            raise ModelFormatError(f"{path}.id: duplicate node id {node_id}")
        seen_node_ids.add(node_id)
        nodes.append(
            TrussNode(
                id=node_id,
                position=Point3(
                    _expect_number(item, "x", path),
                    _expect_number(item, "y", path),
                    _expect_number(item, "z", path),
                ),
            )
        )

    elements = []
    for i, item in enumerate(_expect_array(raw, "elements", required=True)):
        path = f"elements[{i}]"
        _expect_object(item, path)
        _warn_unknown(item, _ELEMENT_KEYS, path)
        elements.append(
            TrussElement(
                id=_expect_int(item, "id", path),
                start=_expect_int(item, "start", path),
                end=_expect_int(item, "end", path),
                area=_expect_number(item, "area", path),
                youngs_modulus=_expect_number(item, "youngs_modulus", path),
            )
        )

    supports = []
    for i, item in enumerate(_expect_array(raw, "supports")):
        path = f"supports[{i}]"
        _expect_object(item, path)
        _warn_unknown(item, _SUPPORT_KEYS, path)
        fix = item.get("fix")
        if (
            not isinstance(fix, list)
            or len(fix) != 3
            or not all(isinstance(v, bool) for v in fix)
        ):
            raise ModelFormatError(f"{path}.fix: expected an array of three booleans")
        supports.append(Support(node=_expect_int(item, "node", path), fixed=tuple(fix)))

    loads = []
    for i, item in enumerate(_expect_array(raw, "loads")):
        path = f"loads[{i}]"
        _expect_object(item, path)
        _warn_unknown(item, _LOAD_KEYS, path)
        force = item.get("force")
        if not isinstance(force, list) or len(force) != 3:
            raise ModelFormatError(f"{path}.force: expected an array of three numbers")
        fx, fy, fz = (_as_number(v, f"{path}.force[{j}]") for j, v in enumerate(force))
        case = item.get("case", "default")
        if not isinstance(case, str):
            raise ModelFormatError(f"{path}.case: expected a string")
        loads.append(
            PointLoad(node=_expect_int(item, "node", path), force=Point3(fx, fy, fz), load_case=case)
        )

    name = raw.get("name", "")
    if not isinstance(name, str):
        raise ModelFormatError("name: expected a string")
    enclosure_area = raw.get("enclosure_area")
    if enclosure_area is not None:
        enclosure_area = _as_number(enclosure_area, "enclosure_area")

    model = TrussModel(
        nodes=tuple(nodes),
        elements=tuple(elements),
        supports=tuple(supports),
        loads=tuple(loads),
        name=name,
        enclosure_area=enclosure_area,
    )
    violations = validate(model)
    if violations:
        raise ModelFormatError("model violates invariants: " + "; ".join(violations))
    return model


def write_model(model: TrussModel) -> str:
    """Serialize a model to JSON with a fixed, documented key order.

    read_model(write_model(m)) structurally equals m for every valid model.
    """
    doc: dict = {"name": model.name}
    if model.enclosure_area is not None:
        doc["enclosure_area"] = model.enclosure_area
    doc["nodes"] = [
        {"id": n.id, "x": n.position.x, "y": n.position.y, "z": n.position.z}
        for n in model.nodes
    ]
    doc["elements"] = [
        {
            "id": e.id,
            "start": e.start,
            "end": e.end,
            "area": e.area,
            "youngs_modulus": e.youngs_modulus,
        }
        for e in model.elements
    ]
    doc["supports"] = [{"node": s.node, "fix": list(s.fixed)} for s in model.supports]
    doc["loads"] = [
        {"node": l.node, "force": [l.force.x, l.force.y, l.force.z], "case": l.load_case}
        for l in model.loads
    ]
    return json.dumps(doc, indent=2) + "\n"


def _warn_unknown(obj: dict, known: tuple[str, ...], path: str) -> None:
    for key in obj:
        if key not in known:
            where = f"{path}.{key}" if path else key
            warnings.warn(f"ignoring unknown field {where!r}", UnknownFieldWarning, stacklevel=3)


def _expect_object(item, path: str) -> None:
    if not isinstance(item, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")


def _expect_array(raw: dict, key: str, required: bool = False) -> list:
    value = raw.get(key, None if required else [])
    if value is None:
        raise ModelFormatError(f"{key}: required array is missing")
    if not isinstance(value, list):
        raise ModelFormatError(f"{key}: expected an array")
    return value


def _expect_int(item: dict, key: str, path: str) -> int:
    value = item.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ModelFormatError(f"{path}.{key}: expected an integer")
    return value


def _expect_number(item: dict, key: str, path: str) -> float:
    if key not in item:
        raise ModelFormatError(f"{path}.{key}: required number is missing")
    return _as_number(item[key], f"{path}.{key}")


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFormatError(f"{where}: expected a number")
    return float(value)
