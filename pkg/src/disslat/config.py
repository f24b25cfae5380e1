"""Configuration files and parameter paths for lattice specs.

Schema (INI-style, parsed with configparser):

    [lattice]
    L = 20

    [boundary]
    kind = OBC            ; one of PBC, OBC, OBC_EdgeDefect

    [hoppings]
    0 = 0.5               ; key is the range s, value is the amplitude J_s
    1 = 1.0

    [dissipators]
    0 = a b 0 1.2         ; alpha alpha_prime s gamma, one entry per line
    1 = a b 1 1.2

Parameter paths address single fields of a spec:
"L", "boundary", "hoppings.<s>", "dissipators[<i>].gamma" (also .s,
.alpha, .alpha_prime).
"""

import configparser
import io

from .errors import InvalidSpec, UnknownPath
from .model import Boundary, Dissipator, LatticeSpec


def spec_to_config(spec):
    """Serialize a spec to the documented INI text."""
    lines = ["[lattice]", f"L = {spec.L}", "", "[boundary]",
             f"kind = {spec.boundary.value}", "", "[hoppings]"]
    for s in sorted(spec.hoppings):
        lines.append(f"{s} = {spec.hoppings[s]!r}")
    lines.append("")
    lines.append("[dissipators]")
    for i, d in enumerate(spec.dissipators):
        lines.append(f"{i} = {d.alpha} {d.alpha_prime} {d.s} {d.gamma!r}")
    lines.append("")
    return "\n".join(lines)


def spec_from_config(text):
    """Parse the documented INI schema into a LatticeSpec.

    Raises InvalidSpec with a section/field diagnostic on malformed input.
    """
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InvalidSpec(f"config parse error: {exc}") from exc

    def need(section):
        if not parser.has_section(section):
            raise InvalidSpec(f"missing section [{section}]")
        return parser[section]

    lattice = need("lattice")
    try:
        L = int(lattice["L"])
    except KeyError:
        raise InvalidSpec("[lattice] is missing the field L")
    except ValueError as exc:
        raise InvalidSpec(f"[lattice] L: {exc}") from exc

    kind = need("boundary").get("kind", "")
    try:
        boundary = Boundary(kind)
    except ValueError:
        raise InvalidSpec(
            f"[boundary] kind = {kind!r}; expected one of "
            f"{[b.value for b in Boundary]}"
        )

    hoppings = {}
    for key, val in need("hoppings").items():
        try:
            hoppings[int(key)] = float(val)
        except ValueError as exc:
            raise InvalidSpec(f"[hoppings] {key} = {val!r}: {exc}") from exc

    dissipators = []
    for key, val in need("dissipators").items():
        parts = val.split()
        if len(parts) != 4:
            raise InvalidSpec(
                f"[dissipators] {key} = {val!r}; expected "
                "'alpha alpha_prime s gamma'"
            )
        try:
            dissipators.append(
                Dissipator(parts[0], parts[1], int(parts[2]), float(parts[3]))
            )
        except ValueError as exc:
            raise InvalidSpec(f"[dissipators] {key}: {exc}") from exc
    return LatticeSpec(L=L, hoppings=hoppings, dissipators=tuple(dissipators),
                       boundary=boundary)


def spec_from_config_file(path):
    with open(path, encoding="utf-8") as fh:
        return spec_from_config(fh.read())


def resolve_parameter_path(spec, path, value):
    """Return a new spec with the single field named by `path` replaced."""
    if path == "L":
        return LatticeSpec(L=int(value), hoppings=spec.hoppings,
                           dissipators=spec.dissipators,
                           boundary=spec.boundary)
    if path == "boundary":
        try:
            boundary = Boundary(value)
        except ValueError:
            raise UnknownPath(f"unknown boundary value {value!r}")
        return LatticeSpec(L=spec.L, hoppings=spec.hoppings,
                           dissipators=spec.dissipators, boundary=boundary)
    if path.startswith("hoppings."):
        tail = path[len("hoppings."):]
        try:
            s = int(tail)
        except ValueError:
            raise UnknownPath(f"bad hopping range in {path!r}")
        return spec.with_hopping(s, float(value))
    if path.startswith("dissipators[") and "]." in path:
        head, field = path.split("].", 1)
        try:
            i = int(head[len("dissipators["):])
        except ValueError:
            raise UnknownPath(f"bad dissipator index in {path!r}")
        if not 0 <= i < len(spec.dissipators):
            raise UnknownPath(
                f"dissipator index {i} out of range "
                f"(have {len(spec.dissipators)})"
            )
        if field not in ("alpha", "alpha_prime", "s", "gamma"):
            raise UnknownPath(f"unknown dissipator field {field!r}")
        old = spec.dissipators[i]
        kwargs = {"alpha": old.alpha, "alpha_prime": old.alpha_prime,
                  "s": old.s, "gamma": old.gamma}
        kwargs[field] = (int(value) if field == "s"
                         else float(value) if field == "gamma"
                         else str(value))
        new = list(spec.dissipators)
        new[i] = Dissipator(**kwargs)
        return LatticeSpec(L=spec.L, hoppings=spec.hoppings,
                           dissipators=tuple(new), boundary=spec.boundary)
    raise UnknownPath(f"cannot resolve parameter path {path!r}")
