"""Session files: a ring, named ideals and modules, and an ordered task list.

A session is YAML. Values are read from the composed node tree rather than
from yaml.safe_load so every diagnostic can point at a line and column.
The full grammar is in docs/session_format.md.
"""
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from yaml.constructor import SafeConstructor

from src.algebra.field_arith import DEFAULT_CHARACTERISTIC
from src.algebra.fpmodules import FPModule
from src.algebra.groebner import Ideal
from src.algebra.polyring import MonomialOrder, PolynomialRing
from src.utils.validators import NonHomogeneousError, SessionError, UndefinedNameError

logger = logging.getLogger(__name__)

TABLE_TASKS = ("sample", "mixed", "power")

# task -> (required parameters, optional parameters)
TASK_PARAMS = {
    "sample": ({"i", "M", "N", "I"}, {"J", "grid"}),
    "mixed": ({"i", "M", "N", "I"}, {"J", "grid"}),
    "power": ({"i", "M", "N", "I"}, {"J", "grid"}),
    "diagonal": ({"i", "M", "N", "I"}, {"range"}),
    "fit": (set(), {"table", "i", "M", "N", "I", "J", "grid", "max_degree"}),
    "theorem6": ({"i", "M", "N", "I"}, {"J", "grid", "max_degree"}),
    "corollary7": ({"i", "M", "N", "I"}, {"range", "max_degree"}),
    "corollary8": ({"i", "M", "N", "I"}, {"J", "grid", "max_degree"}),
    "theorem9": ({"i", "M", "N", "I"}, {"J", "grid"}),
    "prop10": ({"M", "N", "I"}, {"i", "J", "table", "grid", "range", "form", "max_degree"}),
    "prop5": ({"i", "M", "N", "I"}, {"budget"}),
    "stabilization": ({"i", "M", "N", "I"}, {"budget", "window"}),
    "shifting": ({"i", "I"}, {"J", "grid"}),
    "remark": (set(), {"grid"}),
}

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")
_POWER = re.compile(r"^R\s*\^\s*(\d+)$")


@dataclass
class TaskSpec:
    """One task with its parameters resolved to engine objects."""

    index: int
    task: str
    name: Optional[str]
    params: Dict[str, Any]
    line: Optional[int] = None
    column: Optional[int] = None

    @property
    def stem(self):
        return f"{self.index:02d}_{self.name or self.task}"


@dataclass
class Session:
    path: Optional[Path]
    ring: PolynomialRing
    ideals: Dict[str, Ideal] = field(default_factory=dict)
    modules: Dict[str, FPModule] = field(default_factory=dict)
    tasks: List[TaskSpec] = field(default_factory=list)
    output: Optional[str] = None


def _where(node):
    mark = node.start_mark
    return mark.line + 1, mark.column + 1


def _error(message, node):
    line, column = _where(node) if node is not None else (None, None)
    return SessionError(message, line, column)


def _value(node):
    return SafeConstructor().construct_object(node, deep=True)


def _mapping(node, what):
    if not isinstance(node, yaml.MappingNode):
        raise _error(f"{what} must be a mapping", node)
    result = {}
    for key_node, value_node in node.value:
        key = _value(key_node)
        if key in result:
            raise _error(f"duplicate key '{key}' in {what}", key_node)
        result[str(key)] = (key_node, value_node)
    return result


def _string_list(node, what):
    """A YAML list or a comma-separated string."""
    value = _value(node)
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    if not isinstance(value, list):
        raise _error(f"{what} must be a list or a comma-separated string", node)
    return [str(v) for v in value]


def parse_order_override(seed_order: str, variables):
    """--seed-order: an integer seed for a random variable permutation, or a
    comma-separated list of variable names from largest to smallest."""
    text = str(seed_order).strip()
    if text.lstrip("-").isdigit():
        priority = list(range(len(variables)))
        random.Random(int(text)).shuffle(priority)
        return tuple(priority)
    names = [v.strip() for v in text.split(",") if v.strip()]
    if sorted(names) != sorted(variables):
        raise ValueError(f"--seed-order {text} is not a permutation of {', '.join(variables)}")
    return tuple(variables.index(v) for v in names)


class SessionLoader:
    """Turns a session file into a Session.

    Args:
        characteristic: default when the session gives none.
        order: default monomial order name.
        overrides: command-line values that beat the session file:
            characteristic, seed_order, budget, max_degree, output.
    """

    def __init__(self, characteristic=DEFAULT_CHARACTERISTIC, order="degrevlex", overrides=None):
        self.default_characteristic = characteristic
        self.default_order = order
        self.overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    def load(self, path) -> Session:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise SessionError(f"cannot read session file {path}: {e}") from e
        session = self.loads(text)
        session.path = path
        return session

    def loads(self, text) -> Session:
        try:
            root = yaml.compose(text)
        except yaml.MarkedYAMLError as e:
            mark = e.problem_mark
            line, column = (mark.line + 1, mark.column + 1) if mark else (None, None)
            raise SessionError(f"malformed YAML: {e.problem}", line, column) from e
        if root is None:
            raise SessionError("empty session file", 1, 1)
        sections = _mapping(root, "session")
        unknown = set(sections) - {"ring", "ideals", "modules", "tasks", "output"}
        if unknown:
            key = sorted(unknown)[0]
            raise _error(f"unknown section '{key}'", sections[key][0])
        if "ring" not in sections:
            raise _error("session has no 'ring' section", root)

        ring = self._ring(sections["ring"][1])
        session = Session(path=None, ring=ring)
        if "ideals" in sections:
            for name, (key_node, node) in _mapping(sections["ideals"][1], "ideals").items():
                self._check_name(name, key_node, session)
                session.ideals[name] = self._ideal_literal(node, ring, f"ideal '{name}'")
        if "modules" in sections:
            for name, (key_node, node) in _mapping(sections["modules"][1], "modules").items():
                self._check_name(name, key_node, session)
                session.modules[name] = self._module(node, session, name)
        if "output" in sections:
            session.output = str(_value(sections["output"][1]))
        if "output" in self.overrides:
            session.output = str(self.overrides["output"])
        if "tasks" in sections:
            tasks_node = sections["tasks"][1]
            if not isinstance(tasks_node, yaml.SequenceNode):
                if _value(tasks_node) is not None:
                    raise _error("tasks must be a list", tasks_node)
            else:
                for index, node in enumerate(tasks_node.value, start=1):
                    session.tasks.append(self._task(index, node, session))
        logger.info(
            f"Loaded session: {len(session.ideals)} ideals, {len(session.modules)} modules, {len(session.tasks)} tasks"
        )
        return session

    def _ring(self, node) -> PolynomialRing:
        fields = _mapping(node, "ring")
        if "variables" not in fields:
            raise _error("ring needs 'variables'", node)
        variables = _string_list(fields["variables"][1], "ring variables")
        for v in variables:
            if not _NAME.match(v):
                raise _error(f"invalid variable name '{v}'", fields["variables"][1])
        characteristic = self.default_characteristic
        if "characteristic" in fields:
            characteristic = _value(fields["characteristic"][1])
        characteristic = self.overrides.get("characteristic", characteristic)
        order_name = _value(fields["order"][1]) if "order" in fields else self.default_order
        priority = None
        try:
            if "priority" in fields:
                names = _string_list(fields["priority"][1], "ring priority")
                priority = parse_order_override(",".join(names), variables)
            if "seed_order" in self.overrides:
                priority = parse_order_override(self.overrides["seed_order"], variables)
            order = MonomialOrder.parse(order_name, priority)
            return PolynomialRing(variables, int(characteristic), order)
        except (ValueError, TypeError) as e:
            raise _error(str(e), node) from e

    def _check_name(self, name, key_node, session):
        if not _NAME.match(name):
            raise _error(f"invalid name '{name}'", key_node)
        if name in session.ideals or name in session.modules or name == "R":
            raise _error(f"name '{name}' is already defined", key_node)

    def _ideal_literal(self, node, ring, what) -> Ideal:
        value = _value(node)
        if isinstance(value, str):
            text = value.strip()
            if text.startswith("(") and text.endswith(")"):
                text = text[1:-1]
            gens = [g for g in _split_top_level(text) if g.strip()]
        elif isinstance(value, list):
            gens = [str(g) for g in value]
        elif value is None:
            gens = []
        else:
            gens = [str(value)]
        try:
            return Ideal(ring, [ring.parse(g) for g in gens])
        except ValueError as e:
            raise _error(f"{what}: {e}", node) from e

    def _ideal_ref(self, node, session) -> Ideal:
        value = _value(node)
        if isinstance(value, str) and _NAME.match(value.strip()):
            name = value.strip()
            if name not in session.ideals:
                line, column = _where(node)
                raise UndefinedNameError(name, "ideal", line, column)
            return session.ideals[name]
        return self._ideal_literal(node, session.ring, "inline ideal")

    def _module(self, node, session, name=None) -> FPModule:
        value = _value(node)
        ring = session.ring
        try:
            if isinstance(value, dict) and set(value) == {"coker"}:
                return self._coker(value["coker"], ring, node, name)
            if not isinstance(value, str):
                raise _error("a module is 'R', 'R^k', 'R/IDEAL', 'R/(gens)' or 'coker [[...]]'", node)
            text = value.strip()
            if text == "R":
                return FPModule.free(ring, name=name or "R")
            power = _POWER.match(text)
            if power:
                return FPModule.free(ring, int(power.group(1)), name=name or text)
            if text.startswith("R/"):
                rest = text[2:].strip()
                if _NAME.match(rest):
                    if rest not in session.ideals:
                        line, column = _where(node)
                        raise UndefinedNameError(rest, "ideal", line, column)
                    ideal = session.ideals[rest]
                else:
                    ideal = self._ideal_from_text(rest, ring, node)
                return FPModule.cyclic(ring, ideal, name=name or text)
            if text.startswith("coker"):
                rows = yaml.safe_load(text[len("coker"):])
                return self._coker(rows, ring, node, name or text)
            if _NAME.match(text):
                if text not in session.modules:
                    line, column = _where(node)
                    raise UndefinedNameError(text, "module", line, column)
                return session.modules[text]
        except NonHomogeneousError as e:
            raise _error(str(e), node) from e
        except yaml.YAMLError as e:
            raise _error(f"malformed matrix in '{value}'", node) from e
        raise _error(f"cannot read module '{value}'", node)

    def _ideal_from_text(self, text, ring, node):
        if text.startswith("(") and text.endswith(")"):
            text = text[1:-1]
        try:
            return Ideal(ring, [ring.parse(g) for g in _split_top_level(text) if g.strip()])
        except ValueError as e:
            raise _error(str(e), node) from e

    def _coker(self, rows, ring, node, name):
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise _error("coker needs a non-empty list of rows", node)
        if len({len(r) for r in rows}) != 1:
            raise _error("coker rows have different lengths", node)
        try:
            parsed = [[ring.parse(str(entry)) for entry in row] for row in rows]
            return FPModule.from_matrix(ring, parsed, name=name)
        except NonHomogeneousError:
            raise
        except ValueError as e:
            raise _error(str(e), node) from e

    def _task(self, index, node, session) -> TaskSpec:
        fields = _mapping(node, "task")
        line, column = _where(node)
        if "task" not in fields:
            raise _error("task entry needs a 'task' key", node)
        kind = str(_value(fields["task"][1]))
        if kind not in TASK_PARAMS:
            raise _error(f"unknown task '{kind}'. Choose from {', '.join(sorted(TASK_PARAMS))}", fields["task"][1])
        required, optional = TASK_PARAMS[kind]
        name = str(_value(fields["name"][1])) if "name" in fields else None
        given = set(fields) - {"task", "name"}
        extra = given - required - optional
        if extra:
            key = sorted(extra)[0]
            raise _error(f"task '{kind}' does not take '{key}'", fields[key][0])
        missing = required - given
        if kind == "fit" and "table" not in given:
            missing |= {"i", "M", "N", "I"} - given
        if missing:
            raise _error(f"task '{kind}' is missing {', '.join(sorted(missing))}", node)

        params = {}
        for key in sorted(given):
            value_node = fields[key][1]
            if key in ("I", "J"):
                params[key] = self._ideal_ref(value_node, session)
            elif key in ("M", "N"):
                params[key] = self._module(value_node, session)
            elif key == "table":
                params[key] = self._table_ref(value_node, session)
            elif key in ("grid", "range"):
                params[key] = self._ranges(value_node, key)
            elif key == "form":
                params[key] = str(_value(value_node))
            else:
                params[key] = self._integer(value_node, key)
        if "I" in params and "J" not in params and kind not in ("diagonal", "corollary7"):
            params["J"] = params["I"]
        if kind in ("prop5", "stabilization") and "budget" in self.overrides:
            params["budget"] = int(self.overrides["budget"])
        if "max_degree" in self.overrides and kind in ("fit", "theorem6", "corollary7", "corollary8", "prop10"):
            params["max_degree"] = int(self.overrides["max_degree"])
        if kind == "prop10" and params.get("form", "quotient") not in ("quotient", "power", "diagonal"):
            raise _error(f"invalid form '{params['form']}'. Choose from 'quotient', 'power' or 'diagonal'.", fields["form"][1])
        return TaskSpec(index, kind, name, params, line, column)

    def _table_ref(self, node, session):
        name = str(_value(node))
        for task in session.tasks:
            if task.name == name:
                if task.task not in TABLE_TASKS:
                    raise _error(f"task '{name}' does not produce a table", node)
                return name
        line, column = _where(node)
        raise UndefinedNameError(name, "table", line, column)

    def _ranges(self, node, key):
        value = _value(node)
        if key == "range":
            return self._pair(value, node)
        if isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value):
            pair = self._pair(value, node)
            return (pair, pair)
        if isinstance(value, list) and len(value) == 2:
            return (self._pair(value[0], node), self._pair(value[1], node))
        raise _error("grid is [lo, hi] or [[n_lo, n_hi], [m_lo, m_hi]]", node)

    def _pair(self, value, node):
        if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value)):
            raise _error(f"expected [lo, hi], got {value}", node)
        lo, hi = value
        if lo < 0 or hi < lo:
            raise _error(f"invalid range [{lo}, {hi}]", node)
        return (lo, hi)

    def _integer(self, node, key):
        value = _value(node)
        if value is None and key == "max_degree":
            return None
        if not isinstance(value, int) or isinstance(value, bool):
            raise _error(f"'{key}' must be an integer", node)
        return value


def _split_top_level(text):
    """Split on commas outside parentheses."""
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return [p.strip() for p in parts]


def load_session(path, **kwargs) -> Session:
    return SessionLoader(**kwargs).load(path)
