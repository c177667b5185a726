"""Linear circuit descriptions and the element-per-line text format.

Text format, one element per line (``#`` starts a comment, values in SI)::

    R <name> <node+> <node-> <ohms>
    C <name> <node+> <node-> <farads>
    L <name> <node+> <node-> <henries>
    K <name> <inductor> <inductor> <coupling>
    I <name> <node+> <node-> <waveform>
    V <name> <node+> <node-> <volts>
    PORT <name> <node+> <node->
    RECEIVER <resistor>

Node ``0`` is ground. A current source drives its current out of ``node+``
and into ``node-``. Inductors sharing a ``K`` line have their ``node+``
terminals dotted.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

GROUND = "0"

_TWO_TERMINAL = {"R": "resistor", "C": "capacitor", "L": "inductor",
                 "I": "current_source", "V": "dc_voltage_source"}
_LETTER = {v: k for k, v in _TWO_TERMINAL.items()}
_LETTER["mutual"] = "K"


class NetlistError(ValueError):
    pass


@dataclass(frozen=True)
class Element:
    kind: str
    name: str
    a: str
    b: str
    value: float | str

    def __str__(self):
        return f"{_LETTER[self.kind]} {self.name} {self.a} {self.b} {self.value}"


@dataclass
class Netlist:
    elements: list[Element] = field(default_factory=list)
    ports: dict[str, tuple[str, str]] = field(default_factory=dict)
    receiver: str | None = None

    def add(self, kind: str, name: str, a: str, b: str, value) -> "Netlist":
        if kind not in _LETTER:
            raise NetlistError(f"unknown element kind {kind!r}")
        if any(e.name == name for e in self.elements):
            raise NetlistError(f"duplicate element name {name!r}")
        self.elements.append(Element(kind, name, str(a), str(b), value))
        return self

    # Convenience wrappers keep builders readable.
    def resistor(self, name, a, b, ohms):
        return self.add("resistor", name, a, b, float(ohms))

    def capacitor(self, name, a, b, farads):
        return self.add("capacitor", name, a, b, float(farads))

    def inductor(self, name, a, b, henries):
        return self.add("inductor", name, a, b, float(henries))

    def mutual(self, name, l1, l2, k):
        return self.add("mutual", name, l1, l2, float(k))

    def current_source(self, name, a, b, waveform="in"):
        return self.add("current_source", name, a, b, str(waveform))

    def dc_voltage_source(self, name, a, b, volts):
        return self.add("dc_voltage_source", name, a, b, float(volts))

    def by_kind(self, kind):
        return [e for e in self.elements if e.kind == kind]

    def element(self, name) -> Element:
        for e in self.elements:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def nodes(self) -> list[str]:
        seen = {GROUND: None}
        for e in self.elements:
            if e.kind != "mutual":
                seen.setdefault(e.a)
                seen.setdefault(e.b)
        return list(seen)

    def validate(self) -> None:
        inductors = {e.name for e in self.by_kind("inductor")}
        for e in self.elements:
            if e.kind == "mutual":
                if e.a not in inductors or e.b not in inductors:
                    raise NetlistError(f"{e.name}: mutual coupling references unknown inductor")
                if e.a == e.b:
                    raise NetlistError(f"{e.name}: inductor coupled to itself")
                if not abs(e.value) < 1:
                    raise NetlistError(f"{e.name}: coupling coefficient must satisfy |k| < 1")
                continue
            if e.a == e.b:
                raise NetlistError(f"{e.name}: both terminals on node {e.a!r}")
            if e.kind in ("resistor", "capacitor", "inductor") and not e.value > 0:
                raise NetlistError(f"{e.name}: element value must be positive")
        nodes = set(self.nodes)
        for name, (a, b) in self.ports.items():
            if a not in nodes or b not in nodes:
                raise NetlistError(f"port {name!r} references a missing node")
        if self.receiver is not None:
            try:
                r = self.element(self.receiver)
            except KeyError:
                raise NetlistError(f"receiver {self.receiver!r} is not an element") from None
            if r.kind != "resistor":
                raise NetlistError(f"receiver {self.receiver!r} must be a resistor")
        unreachable = nodes - self._reachable_from_ground()
        if unreachable:
            raise NetlistError(f"nodes not connected to ground: {sorted(unreachable)}")

    def _reachable_from_ground(self) -> set[str]:
        adj: dict[str, set[str]] = {}
        for e in self.elements:
            if e.kind != "mutual":
                adj.setdefault(e.a, set()).add(e.b)
                adj.setdefault(e.b, set()).add(e.a)
        seen, todo = {GROUND}, deque([GROUND])
        while todo:
            for nb in adj.get(todo.popleft(), ()):
                if nb not in seen:
                    seen.add(nb)
                    todo.append(nb)
        return seen

    def to_text(self) -> str:
        lines = [str(e) for e in self.elements]
        lines += [f"PORT {name} {a} {b}" for name, (a, b) in self.ports.items()]
        if self.receiver is not None:
            lines.append(f"RECEIVER {self.receiver}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Netlist":
        net = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            head = tok[0].upper()
            try:
                if head == "PORT" and len(tok) == 4:
                    net.ports[tok[1]] = (tok[2], tok[3])
                elif head == "RECEIVER" and len(tok) == 2:
                    net.receiver = tok[1]
                elif head == "K" and len(tok) == 5:
                    net.mutual(tok[1], tok[2], tok[3], float(tok[4]))
                elif head == "I" and len(tok) == 5:
                    net.current_source(tok[1], tok[2], tok[3], tok[4])
                elif head in _TWO_TERMINAL and len(tok) == 5:
                    net.add(_TWO_TERMINAL[head], tok[1], tok[2], tok[3], float(tok[4]))
                else:
                    raise NetlistError(f"cannot parse {raw.strip()!r}")
            except ValueError as exc:
                raise NetlistError(f"line {lineno}: {exc}") from None
        return net
