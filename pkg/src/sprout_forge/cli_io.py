"""Sprout files, run configuration, reports and figure rendering."""
from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Tuple

from . import brace, ger
from . import convolution as cv
from .convolution import ConvElement

FORMAT_VERSION = 1
PAIR = "ger-br"
ENV_PREFIX = "SPROUT_FORGE_"


class FormatError(ValueError):
    """Malformed input file; the message names the offending line."""


class ConfigError(ValueError):
    pass


# -- convention fingerprint --------------------------------------------------------

@lru_cache(maxsize=None)
def convention_fingerprint() -> str:
    """Hash of small sign-sensitive computations.

    Files written under a different sign convention carry a different hash and
    are refused on load.
    """
    h = hashlib.sha256()
    for n in (1, 2, 3):
        for nu in range(n):
            for t in brace.standard_trees(n, nu):
                d = sorted((brace.format_tree(t2), s) for s, t2 in brace.differential_tree(t))
                h.update(f"d {brace.format_tree(t)} {d}\n".encode())
    for n in (2, 3):
        for w in ger.enumerate_ger_basis(n):
            for v in ger.enumerate_ger_basis(2):
                res = sorted((ger.format_word(k), str(c)) for k, c in ger.ger_compose({w: 1}, 1, {v: 1}).items())
                h.update(f"o {ger.format_word(w)} {ger.format_word(v)} {res}\n".encode())
    t12 = brace.parse_tree("r(1(2))")
    tcup = brace.parse_tree("r(•(1,2))")
    for a in (t12, tcup):
        for b in (t12, tcup):
            for wa in ((1, 2), ((1, 2),)):
                for wb in ((1, 2), ((1, 2),)):
                    res = cv.pre_lie({(a, wa): Fraction(1)}, {(b, wb): Fraction(1)})
                    h.update(f"p {sorted((cv.format_term(k), str(c)) for k, c in res.items())}\n".encode())
    return h.hexdigest()[:16]


# -- sprout files ------------------------------------------------------------------

@dataclass
class SproutFile:
    order: int
    element: ConvElement
    pair: str = PAIR
    format_version: int = FORMAT_VERSION
    convention: str = ""

    def __post_init__(self):
        if not self.convention:
            self.convention = convention_fingerprint()


def format_coefficient(c: Fraction) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


_COEFF = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_coefficient(text: str) -> Fraction:
    s = text.strip()
    if not _COEFF.match(s):
        raise FormatError(f"bad coefficient {text!r}")
    if "/" in s:
        p, q = s.split("/")
        p, q = int(p), int(q)
        if q <= 0:
            raise FormatError(f"denominator must be positive in {text!r}")
        c = Fraction(p, q)
        if c.numerator != p or c.denominator != q:
            raise FormatError(f"coefficient {text!r} is not in lowest terms")
        return c
    return Fraction(int(s))


def serialize(sf: SproutFile) -> str:
    lines = [
        "# sprout-forge sprout file",
        f"format_version: {sf.format_version}",
        f"pair: {sf.pair}",
        f"order: {sf.order}",
        f"convention: {sf.convention}",
        f"terms: {len(sf.element)}",
    ]
    for t in sorted(sf.element, key=cv.term_key):
        tree, word = t
        lines.append(f"{format_coefficient(sf.element[t])} | {brace.format_tree(tree)} | {ger.format_word(word)}")
    return "\n".join(lines) + "\n"


def parse(text: str, check_convention: bool = True) -> SproutFile:
    header: Dict[str, str] = {}
    raw = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "|" in s:
            parts = [p.strip() for p in s.split("|")]
            if len(parts) != 3:
                raise FormatError(f"line {lineno}: expected 'coefficient | tree | word'")
            try:
                c = parse_coefficient(parts[0])
                tree = brace.parse_tree(parts[1])
                word = ger.parse_word(parts[2])
            except (FormatError, brace.TreeError, ger.GerError) as e:
                raise FormatError(f"line {lineno}: {e}") from None
            if brace.arity(tree) != ger.word_arity(word):
                raise FormatError(f"line {lineno}: tree and word arities differ")
            if c == 0:
                raise FormatError(f"line {lineno}: zero coefficient")
            raw.append((c, tree, word))
            continue
        if ":" not in s:
            raise FormatError(f"line {lineno}: cannot parse {s!r}")
        key, value = (p.strip() for p in s.split(":", 1))
        if key in header:
            raise FormatError(f"line {lineno}: duplicate header {key!r}")
        header[key] = value
    for key in ("format_version", "pair", "order", "convention", "terms"):
        if key not in header:
            raise FormatError(f"missing header {key!r}")
    unknown = set(header) - {"format_version", "pair", "order", "convention", "terms"}
    if unknown:
        raise FormatError(f"unknown header(s) {sorted(unknown)}")
    try:
        version = int(header["format_version"])
        order = int(header["order"])
        count = int(header["terms"])
    except ValueError as e:
        raise FormatError(f"bad integer header: {e}") from None
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {version}")
    if header["pair"] != PAIR:
        raise FormatError(f"unsupported operad pair {header['pair']!r}")
    if order < 1:
        raise FormatError("order must be at least 1")
    if count != len(raw):
        raise FormatError(f"header announces {count} terms, found {len(raw)}")
    if check_convention and header["convention"] != convention_fingerprint():
        raise FormatError(f"convention fingerprint {header['convention']} does not match "
                          f"this build ({convention_fingerprint()})")
    element = cv.av_normalize(raw)
    return SproutFile(order=order, element=element, pair=PAIR, format_version=version,
                      convention=header["convention"])


def read_sprout(path: str, check_convention: bool = True) -> SproutFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), check_convention)


def write_text(path: str, text: str) -> None:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def data_path(name: str) -> str:
    return os.path.join(os.path.dirname(__file__), "data", name)


# -- run configuration -------------------------------------------------------------

REPORT_FORMATS = ("text", "json", "tikz-svg")


@dataclass
class RunConfig:
    arity_bound: int = 6
    cohomology_bound: int = 4
    workers: int = 1
    out_dir: str = "."
    report_path: str = ""
    report_format: str = "text"
    pivot_rule: str = "markowitz"
    timings: bool = False

    def validate(self) -> "RunConfig":
        if self.arity_bound < 2:
            raise ConfigError("arity_bound must be at least 2")
        if self.cohomology_bound < 1:
            raise ConfigError("cohomology_bound must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.report_format not in REPORT_FORMATS:
            raise ConfigError(f"report_format must be one of {REPORT_FORMATS}")
        if self.pivot_rule not in ("first", "markowitz"):
            raise ConfigError("pivot_rule must be 'first' or 'markowitz'")
        return self


def _coerce(name: str, value: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = kinds[name]
    if kind in ("int", int):
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{name} expects an integer, got {value!r}") from None
    if kind in ("bool", bool):
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name} expects a boolean, got {value!r}")
    return value


def parse_config_text(text: str) -> Dict[str, object]:
    known = {f.name for f in fields(RunConfig)}
    out: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"config line {lineno}: expected key=value")
        key, value = (p.strip() for p in s.split("=", 1))
        if key not in known:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def env_overrides(environ: Mapping[str, str]) -> Dict[str, object]:
    known = {f.name for f in fields(RunConfig)}
    out: Dict[str, object] = {}
    for k in sorted(environ):
        if not k.startswith(ENV_PREFIX):
            continue
        key = k[len(ENV_PREFIX):].lower()
        if key not in known:
            raise ConfigError(f"unknown environment override {k}")
        out[key] = _coerce(key, environ[k])
    return out


def load_config(path: Optional[str] = None, environ: Optional[Mapping[str, str]] = None,
                overrides: Optional[Mapping[str, object]] = None) -> RunConfig:
    """Defaults, then the config file, then environment, then explicit overrides."""
    values: Dict[str, object] = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
    values.update(env_overrides(os.environ if environ is None else environ))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return RunConfig(**values).validate()


# -- reports -----------------------------------------------------------------------

def to_json(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def to_text(data, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(data, dict):
        for k, v in data.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(to_text(v, indent + 1).rstrip("\n"))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(data, list):
        for v in data:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(to_text(v, indent + 1).rstrip("\n"))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(data))
    return "\n".join(lines) + "\n"


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if v == {} or v == []:
        return "(none)"
    return str(v)


def render_report(data, fmt: str) -> str:
    return to_json(data) if fmt == "json" else to_text(data)


# -- figures -----------------------------------------------------------------------

def _layout(tree: brace.BraceTree) -> Tuple[Dict[int, Tuple[float, float]], List[Tuple[int, int]]]:
    """Positions (x, depth) per preorder vertex, with leaves spaced one unit apart."""
    pos: Dict[int, Tuple[float, float]] = {}
    edges = []
    cursor = [0.0]

    def walk(i, depth):
        tag, k = tree[i]
        j = i + 1
        xs = []
        for _ in range(k):
            edges.append((i, j))
            xs.append(j)
            j = walk(j, depth + 1)
        if k == 0:
            x = cursor[0]
            cursor[0] += 1.0
        else:
            x = (pos[xs[0]][0] + pos[xs[-1]][0]) / 2
        pos[i] = (x, depth)
        return j

    walk(0, 1)
    return pos, edges


def _tikz_caption(word: ger.GerWord) -> str:
    out = ""
    for k, f in enumerate(word):
        if k and isinstance(f, int) and isinstance(word[k - 1], int):
            out += " "
        out += _tikz_lie(f)
    return out


def _tikz_lie(u) -> str:
    if isinstance(u, int):
        return f"b_{{{u}}}"
    return "\\{" + _tikz_lie(u[0]) + ", " + _tikz_lie(u[1]) + "\\}"


def render_tikz(sf: SproutFile) -> str:
    out = [
        "% sprout-forge figure source",
        f"% order: {sf.order}",
        f"% convention: {sf.convention}",
    ]
    out.append("\\tikzstyle{lab}=[circle, draw, minimum size=5, inner sep=1]")
    out.append("\\tikzstyle{n}=[circle, draw, fill, minimum size=3]")
    out.append("\\tikzstyle{root}=[circle, draw, fill, minimum size=0, inner sep=1]")
    for idx, t in enumerate(sorted(sf.element, key=cv.term_key)):
        tree, word = t
        c = sf.element[t]
        pos, edges = _layout(tree)
        xs = [p[0] for p in pos.values()]
        shift = (min(xs) + max(xs)) / 2
        out.append(f"% term: {format_coefficient(c)} | {brace.format_tree(tree)} | {ger.format_word(word)}")
        out.append("\\begin{tikzpicture}[scale=0.6]")
        out.append("\\node[root] (rr) at (0, 0) {};")
        for i, (tag, _) in enumerate(tree):
            x, y = pos[i]
            x -= shift
            if tag == brace.NEUTRAL:
                out.append(f"\\node [n] (v{i}) at ({x:g},{y:g}) {{}};")
            else:
                out.append(f"\\node [lab] (v{i}) at ({x:g},{y:g}) {{${tag}$}};")
        out.append("\\draw (rr) edge (v0);")
        for a, b in edges:
            out.append(f"\\draw (v{a}) edge (v{b});")
        out.append(f"\\node at (0,-0.8) {{${_coeff_tex(c)}\\, {_tikz_caption(word)}$}};")
        out.append("\\end{tikzpicture}")
    return "\n".join(out) + "\n"


def _coeff_tex(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    sign = "-" if c < 0 else ""
    return f"{sign}\\frac{{{abs(c.numerator)}}}{{{c.denominator}}}"


def render_svg(sf: SproutFile) -> str:
    terms = sorted(sf.element, key=cv.term_key)
    cell_w, cell_h, unit = 160, 170, 30
    cols = 4
    nrows = -(-len(terms) // cols) if terms else 0
    width = cell_w * cols
    height = max(cell_h * nrows, 1)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="serif" font-size="12">',
        f"<!-- order: {sf.order} convention: {sf.convention} -->",
    ]
    for idx, t in enumerate(terms):
        tree, word = t
        c = sf.element[t]
        ox = (idx % cols) * cell_w + cell_w / 2
        base = (idx // cols) * cell_h + cell_h - 40
        pos, edges = _layout(tree)
        xs = [p[0] for p in pos.values()]
        shift = (min(xs) + max(xs)) / 2

        def xy(i):
            x, y = pos[i]
            return ox + (x - shift) * unit, base - y * unit

        out.append(f"<!-- term: {format_coefficient(c)} | {brace.format_tree(tree)} | {ger.format_word(word)} -->")
        out.append("<g>")
        rx, ry = ox, base
        x0, y0 = xy(0)
        out.append(f'<line x1="{rx:g}" y1="{ry:g}" x2="{x0:g}" y2="{y0:g}" stroke="black"/>')
        for a, b in edges:
            xa, ya = xy(a)
            xb, yb = xy(b)
            out.append(f'<line x1="{xa:g}" y1="{ya:g}" x2="{xb:g}" y2="{yb:g}" stroke="black"/>')
        out.append(f'<circle cx="{rx:g}" cy="{ry:g}" r="2" fill="black"/>')
        for i, (tag, _) in enumerate(tree):
            x, y = xy(i)
            if tag == brace.NEUTRAL:
                out.append(f'<circle cx="{x:g}" cy="{y:g}" r="4" fill="black"/>')
            else:
                out.append(f'<circle cx="{x:g}" cy="{y:g}" r="8" fill="white" stroke="black"/>')
                out.append(f'<text x="{x:g}" y="{y + 4:g}" text-anchor="middle">{tag}</text>')
        caption = f"{format_coefficient(c)} {ger.format_word(word)}"
        out.append(f'<text x="{ox:g}" y="{base + 20:g}" text-anchor="middle">{_xml(caption)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _xml(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def parse_rendered(text: str) -> ConvElement:
    """Recover the element from the ``term:`` comments of a rendered figure."""
    raw = []
    for line in text.splitlines():
        m = re.search(r"term: (.*?)(?: -->)?$", line.strip())
        if not m:
            continue
        parts = [p.strip() for p in m.group(1).split("|")]
        raw.append((parse_coefficient(parts[0]), brace.parse_tree(parts[1]), ger.parse_word(parts[2])))
    return cv.av_normalize(raw)


def config_dict(cfg: RunConfig) -> Dict:
    return asdict(cfg)
